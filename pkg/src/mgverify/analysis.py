"""Predicate dependency graph, tightness and private recursion."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection, Iterable

from .syntax import Literal, Pred, Program, Sign, predicate_symbols


@dataclass(frozen=True)
class DependencyGraph:
    """Predicate dependency graph.

    ``edges`` collapses parallel edges: it maps ``(head, body)`` to whether
    some rule witnesses it positively.  ``rule_edges`` keeps one edge per
    rule and pair, ``(rule index, head, body, positive)``; this is the edge
    list that gets reported and counted.
    """

    vertices: frozenset
    edges: dict
    rule_edges: tuple = ()

    @property
    def positive_edges(self) -> set[tuple[Pred, Pred]]:
        return {e for e, pos in self.edges.items() if pos}

    def successors(self, p: Pred, positive_only: bool = False) -> list[Pred]:
        return sorted(q for (h, q), pos in self.edges.items()
                      if h == p and (pos or not positive_only))

    def edge_list(self) -> list[tuple[int, Pred, Pred, bool]]:
        return list(self.rule_edges)

    def pairs(self) -> list[tuple[Pred, Pred, bool]]:
        return sorted((h, b, pos) for (h, b), pos in self.edges.items())


def dependency_graph(prog: Program) -> DependencyGraph:
    edges: dict[tuple[Pred, Pred], bool] = {}
    per_rule = []
    for i, r in enumerate(prog, 1):
        if r.head is None:
            continue
        local: dict[tuple[Pred, Pred], bool] = {}
        for e in r.body:
            if not isinstance(e, Literal):
                continue
            key = (r.head.pred, e.atom.pred)
            local[key] = local.get(key, False) or e.sign is Sign.POS
        for key, pos in local.items():
            edges[key] = edges.get(key, False) or pos
            per_rule.append((i,) + key + (pos,))
    return DependencyGraph(frozenset(predicate_symbols(prog)), edges, tuple(per_rule))


def _find_cycle(vertices: Iterable[Pred], succ) -> list[Pred] | None:
    """Return some cycle of the graph given by ``succ``, or ``None``."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {v: WHITE for v in vertices}
    for root in sorted(color):
        if color[root] != WHITE:
            continue
        stack = [(root, iter(succ(root)))]
        path = [root]
        color[root] = GREY
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[v] = BLACK
                stack.pop()
                path.pop()
                continue
            if nxt not in color:
                continue
            if color[nxt] == GREY:
                return path[path.index(nxt):]
            if color[nxt] == WHITE:
                color[nxt] = GREY
                path.append(nxt)
                stack.append((nxt, iter(succ(nxt))))
    return None


def positive_cycle(prog: Program) -> list[Pred] | None:
    g = dependency_graph(prog)
    return _find_cycle(g.vertices, lambda p: g.successors(p, positive_only=True))


def is_tight(prog: Program) -> bool:
    return positive_cycle(prog) is None


def private_symbols(prog: Program, inputs: Collection[Pred], outputs: Collection[Pred],
                    ) -> set[Pred]:
    return predicate_symbols(prog) - set(inputs) - set(outputs)


def private_recursion_witness(prog: Program, inputs: Collection[Pred],
                              outputs: Collection[Pred]) -> str | None:
    private = private_symbols(prog, inputs, outputs)
    for r in prog:
        if r.choice and r.head is not None and r.head.pred in private:
            return f"choice rule with private head {r.head.pred}"
    g = dependency_graph(prog)
    cycle = _find_cycle(private, lambda p: [q for q in g.successors(p) if q in private])
    if cycle is not None:
        return "cycle through private symbols " + " -> ".join(map(str, cycle + cycle[:1]))
    return None


def uses_private_recursion(prog: Program, inputs: Collection[Pred] = (),
                           outputs: Collection[Pred] = ()) -> bool:
    return private_recursion_witness(prog, inputs, outputs) is not None


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # NotTight, PrivateRecursion, InputSymbolInHead
    program: int
    detail: str

    def __str__(self):
        return f"program {self.program}: {self.kind}: {self.detail}"


def diagnose(prog: Program, index: int, inputs: Collection[Pred],
             outputs: Collection[Pred]) -> list[Diagnostic]:
    out = []
    heads = sorted({r.head.pred for r in prog if r.head is not None} & set(inputs))
    for p in heads:
        out.append(Diagnostic("InputSymbolInHead", index, f"{p} is an input symbol"))
    cycle = positive_cycle(prog)
    if cycle is not None:
        out.append(Diagnostic("NotTight", index, "positive cycle "
                              + " -> ".join(map(str, cycle + cycle[:1]))))
    why = private_recursion_witness(prog, inputs, outputs)
    if why is not None:
        out.append(Diagnostic("PrivateRecursion", index, why))
    return out


def gate(prog1: Program, prog2: Program | None, guide) -> list[Diagnostic]:
    """Reasons why the verification procedure does not apply; empty if it does."""
    out = diagnose(prog1, 1, guide.inputs, guide.outputs)
    if prog2 is not None:
        out += diagnose(prog2, 2, guide.inputs, guide.outputs)
    return out
