"""TPTP emission and the external prover driver.

Encoding
--------
* ``general`` is a declared sort; integers use the built-in ``$int``.
* ``f__integer__: $int > general`` injects integers into ``general``.
* Symbolic constant ``c`` becomes ``c__c``; ``#inf``/``#sup`` become
  ``c__infimum__``/``c__supremum__``.
* Predicate ``p/n`` becomes ``p__p__n``.
* The order on ``general`` is the predicate ``less__``; on two integer
  terms the built-in ``$less``/``$lesseq``/... are used instead.
"""

from __future__ import annotations

import enum
import os
import re
import shlex
import shutil
import subprocess
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .fol import (And, Arith, Atomic, Cmp, Exists, ForAll, Formula, Iff,
                  Implies, Neg, Not, Or, Sort, Var, _Truth, constants, predicates, sort_of)
from .reduction import BACKWARD, DIRECTION_TITLES, FORWARD, GoalCondition
from .syntax import INF, SUP, Num, Pred, Sym

DEFAULT_TIMEOUT = 600
DEFAULT_ARGS = "--mode casc --time_limit {timeout} {file}"


class UnsupportedTask(ValueError):
    pass


class ProverNotFound(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Background theory
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SignatureSlice:
    """Predicate symbols of a task plus the symbolic constants it names."""

    predicates: frozenset = frozenset()
    constants: frozenset = frozenset()

    @classmethod
    def of(cls, formulas: Iterable[Formula]) -> "SignatureSlice":
        preds, consts = set(), set()
        for f in formulas:
            preds |= predicates(f)
            consts |= {c for c in constants(f) if isinstance(c, Sym)}
        return cls(frozenset(preds), frozenset(consts))


_X, _Y, _Z = Var("X"), Var("Y"), Var("Z")
_N = Var("N", Sort.INTEGER)


def theory_axioms(placeholders: Iterable[str] = (), signature: SignatureSlice | None = None,
                  ) -> list[Formula]:
    """Axioms true in every interpretation that is standard for ``placeholders``.

    The order on ``general`` is strict, total and transitive, ``#inf`` and
    ``#sup`` are its extremes, numerals precede symbolic constants, and the
    symbolic constants named in ``signature`` that are not placeholders are
    ordered lexicographically.  Placeholders get no axioms: their values
    may be any term outside the placeholder set.
    """
    axioms: list[Formula] = [
        ForAll((_X,), Not(Cmp(_X, "<", _X))),
        ForAll((_X, _Y, _Z), Implies(And((Cmp(_X, "<", _Y), Cmp(_Y, "<", _Z))),
                                     Cmp(_X, "<", _Z))),
        ForAll((_X, _Y), Or((Cmp(_X, "<", _Y), Cmp(_X, "=", _Y), Cmp(_Y, "<", _X)))),
        ForAll((_X,), Cmp(INF, "<=", _X)),
        ForAll((_X,), Cmp(_X, "<=", SUP)),
        ForAll((_N,), And((Cmp(INF, "<", _N), Cmp(_N, "<", SUP)))),
    ]
    ph = set(placeholders)
    fixed = sorted(c for c in (signature.constants if signature else ())
                   if isinstance(c, Sym) and c.name not in ph)
    for c in fixed:
        axioms.append(ForAll((_N,), Cmp(_N, "<", c)))
        axioms.append(And((Cmp(INF, "<", c), Cmp(c, "<", SUP))))
    for c, d in zip(fixed, fixed[1:]):
        axioms.append(Cmp(c, "<", d))
    return axioms


# ---------------------------------------------------------------------------
# TPTP TFF emission
# ---------------------------------------------------------------------------


def mangle_constant(c) -> str:
    if c is INF:
        return "c__infimum__"
    if c is SUP:
        return "c__supremum__"
    if isinstance(c, Sym):
        return f"c__{c.name}"
    raise UnsupportedTask(f"not a symbolic object constant: {c}")


def mangle_predicate(p: Pred) -> str:
    return f"p__{p.name}__{p.arity}"


def demangle(name: str):
    """Inverse of the mangling functions."""
    if name == "c__infimum__":
        return INF
    if name == "c__supremum__":
        return SUP
    if name.startswith("c__"):
        return Sym(name[3:])
    if name.startswith("p__"):
        base, _, arity = name[3:].rpartition("__")
        return Pred(base, int(arity))
    raise ValueError(name)


_INT_OPS = {"+": "$sum", "-": "$difference", "*": "$product"}
_INT_CMP = {"<": "$less", "<=": "$lesseq", ">": "$greater", ">=": "$greatereq"}


def _var_name(v: Var) -> str:
    return v.name if v.name[0].isupper() else "V" + v.name


def _int_term(t) -> str:
    if isinstance(t, Num):
        return str(t.value)
    if isinstance(t, Var):
        return _var_name(t)
    if isinstance(t, Neg):
        return f"$uminus({_int_term(t.arg)})"
    if isinstance(t, Arith):
        return f"{_INT_OPS[t.op]}({_int_term(t.left)}, {_int_term(t.right)})"
    raise UnsupportedTask(f"not an integer term: {t}")


def _gen_term(t) -> str:
    if sort_of(t) is Sort.INTEGER:
        return f"f__integer__({_int_term(t)})"
    if isinstance(t, Var):
        return _var_name(t)
    return mangle_constant(t)


def _cmp(c: Cmp) -> str:
    if sort_of(c.left) is Sort.INTEGER and sort_of(c.right) is Sort.INTEGER:
        a, b = _int_term(c.left), _int_term(c.right)
        if c.op == "=":
            return f"({a} = {b})"
        if c.op == "!=":
            return f"({a} != {b})"
        return f"{_INT_CMP[c.op]}({a}, {b})"
    a, b = _gen_term(c.left), _gen_term(c.right)
    return {
        "=": f"({a} = {b})",
        "!=": f"({a} != {b})",
        "<": f"less__({a}, {b})",
        ">": f"less__({b}, {a})",
        "<=": f"(less__({a}, {b}) | ({a} = {b}))",
        ">=": f"(less__({b}, {a}) | ({b} = {a}))",
    }[c.op]


def _binary_chain(op: str, parts: list[str]) -> str:
    out = parts[0]
    for p in parts[1:]:
        out = f"({out} {op} {p})"
    return out


def tff_formula(f: Formula) -> str:
    if isinstance(f, Atomic):
        name = mangle_predicate(f.predicate)
        if not f.args:
            return name
        return f"{name}({', '.join(_gen_term(t) for t in f.args)})"
    if isinstance(f, Cmp):
        return _cmp(f)
    if isinstance(f, _Truth):
        return "$true" if f.value else "$false"
    if isinstance(f, Not):
        return f"~ ({tff_formula(f.arg)})"
    if isinstance(f, And):
        return _binary_chain("&", [tff_formula(a) for a in f.args])
    if isinstance(f, Or):
        return _binary_chain("|", [tff_formula(a) for a in f.args])
    if isinstance(f, Implies):
        return f"({tff_formula(f.left)} => {tff_formula(f.right)})"
    if isinstance(f, Iff):
        return f"({tff_formula(f.left)} <=> {tff_formula(f.right)})"
    if isinstance(f, (ForAll, Exists)):
        q = "!" if isinstance(f, ForAll) else "?"
        decls = ", ".join(f"{_var_name(v)}: {'$int' if v.sort is Sort.INTEGER else 'general'}"
                          for v in f.vars)
        return f"{q}[{decls}]: ({tff_formula(f.body)})"
    raise UnsupportedTask(f"cannot encode {f!r}")


ENCODING_AXIOMS = [
    ("integer_injection",
     "![N1: $int, N2: $int]: ((f__integer__(N1) = f__integer__(N2)) => (N1 = N2))"),
    ("integer_order",
     "![N1: $int, N2: $int]: (less__(f__integer__(N1), f__integer__(N2)) <=> $less(N1, N2))"),
]


@dataclass(frozen=True)
class ProofTask:
    name: str
    axioms: tuple
    conjecture: Formula
    direction: str = FORWARD
    role: str = "goal"  # goal or lemma
    placeholders: tuple = ()
    timeout: float = DEFAULT_TIMEOUT

    def with_axioms(self, extra: Sequence[Formula]) -> "ProofTask":
        return ProofTask(self.name, self.axioms + tuple(extra), self.conjecture,
                         self.direction, self.role, self.placeholders, self.timeout)


def emit_tptp(task: ProofTask) -> str:
    """Deterministic TPTP TFF problem for ``task``, theory axioms included."""
    formulas = list(task.axioms) + [task.conjecture]
    sig = SignatureSlice.of(formulas)
    theory = theory_axioms(task.placeholders, sig)
    consts = set(sig.constants) | {INF, SUP}
    lines = [f"% task {task.name} ({task.role}, {DIRECTION_TITLES.get(task.direction, task.direction)})",
             "tff(general_type, type, general: $tType).",
             "tff(f__integer___type, type, f__integer__: $int > general).",
             "tff(less___type, type, less__: (general * general) > $o)."]
    for c in sorted(consts, key=mangle_constant):
        name = mangle_constant(c)
        lines.append(f"tff({name}_type, type, {name}: general).")
    for p in sorted(sig.predicates):
        name = mangle_predicate(p)
        if p.arity == 0:
            ty = "$o"
        elif p.arity == 1:
            ty = "general > $o"
        else:
            ty = "(" + " * ".join(["general"] * p.arity) + ") > $o"
        lines.append(f"tff({name}_type, type, {name}: {ty}).")
    for name, text in ENCODING_AXIOMS:
        lines.append(f"tff({name}, axiom, {text}).")
    for i, ax in enumerate(theory, 1):
        lines.append(f"tff(theory_{i}, axiom, {tff_formula(ax)}).")
    for i, ax in enumerate(task.axioms, 1):
        lines.append(f"tff(hypothesis_{i}, axiom, {tff_formula(ax)}).")
    lines.append(f"tff(goal, conjecture, {tff_formula(task.conjecture)}).")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Task planning
# ---------------------------------------------------------------------------


def plan_tasks(goal: GoalCondition, helper=None, timeout: float = DEFAULT_TIMEOUT,
               ) -> list[ProofTask]:
    """Lemma tasks followed by one task per goal conjunct, for each direction.

    Axioms of a task do not yet include the lemmas before it; the driver
    adds those that were proved (see :func:`chain_lemmas`).
    """
    tasks = []
    induction = tuple(helper.induction) if helper is not None else ()
    for direction in (FORWARD, BACKWARD):
        base = tuple(goal.hypotheses(direction)) + induction
        lemmas = helper.lemmas_for(direction) if helper is not None else []
        for i, lemma in enumerate(lemmas, 1):
            tasks.append(ProofTask(f"{direction}_lemma_{i}", base, lemma, direction, "lemma",
                                   goal.placeholders, timeout))
        for i, conj in enumerate(goal.goals(direction), 1):
            tasks.append(ProofTask(f"{direction}_goal_{i}", base, conj, direction, "goal",
                                   goal.placeholders, timeout))
    return tasks


def chain_lemmas(tasks: Sequence[ProofTask]) -> list[ProofTask]:
    """Tasks with every earlier lemma of the same direction added as an axiom."""
    out, seen = [], {}
    for t in tasks:
        prior = seen.setdefault(t.direction, [])
        out.append(t.with_axioms(prior))
        if t.role == "lemma":
            prior.append(t.conjecture)
    return out


def write_tasks(tasks: Sequence[ProofTask], directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, t in enumerate(chain_lemmas(tasks), 1):
        p = directory / f"{i:02d}_{t.name}.p"
        p.write_text(emit_tptp(t))
        paths.append(p)
    return paths


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


class Status(enum.Enum):
    PROVED = "Proved"
    NOT_PROVED = "NotProved"
    TIMEOUT = "Timeout"
    ERROR = "ProverError"


class Verdict(enum.Enum):
    EQUIVALENT = "Equivalent"
    UNKNOWN = "Unknown"
    ERROR = "Error"


_SZS_RE = re.compile(r"SZS status\s+(\w+)")
_PROVED = {"Theorem", "ContradictoryAxioms"}
_TIMEOUT = {"Timeout", "ResourceOut"}
_ERRORS = {"Error", "OSError", "InputError", "SyntaxError", "SemanticError", "TypeError",
           "UsageError", "Forced", "User"}


def parse_szs(output: str) -> tuple[Status, str]:
    m = _SZS_RE.search(output)
    if m is None:
        return Status.ERROR, "no SZS status line in prover output"
    word = m.group(1)
    if word in _PROVED:
        return Status.PROVED, word
    if word in _TIMEOUT:
        return Status.TIMEOUT, word
    if word in _ERRORS:
        return Status.ERROR, word
    return Status.NOT_PROVED, word


@dataclass
class ProverConfig:
    executable: str
    args: str = DEFAULT_ARGS
    timeout: float | None = None  # overrides the per-task timeout
    parallel: int = 2
    keep_dir: str | None = None

    def command(self, path: str, timeout: float) -> list[str]:
        exe = shutil.which(self.executable) or (self.executable if os.path.isfile(
            self.executable) else None)
        if exe is None:
            raise ProverNotFound(f"prover executable not found: {self.executable}")
        fmt = {"file": path, "timeout": int(max(1, round(timeout)))}
        return [exe] + [a.format(**fmt) for a in shlex.split(self.args)]


def default_prover() -> str | None:
    """Prover named by ``MGVERIFY_PROVER`` or ``vampire`` on the PATH."""
    env = os.environ.get("MGVERIFY_PROVER")
    if env:
        return env
    return "vampire" if shutil.which("vampire") else None


@dataclass(frozen=True)
class TaskResult:
    task: ProofTask
    status: Status
    detail: str = ""
    seconds: float = 0.0


@dataclass
class ProofOutcome:
    results: list = field(default_factory=list)

    @property
    def overall(self) -> Verdict:
        if any(r.status is Status.ERROR for r in self.results):
            return Verdict.ERROR
        if self.results and all(r.status is Status.PROVED for r in self.results):
            return Verdict.EQUIVALENT
        return Verdict.UNKNOWN


def run_task(task: ProofTask, config: ProverConfig) -> TaskResult:
    timeout = config.timeout if config.timeout is not None else task.timeout
    text = emit_tptp(task)
    start = time.monotonic()
    with tempfile.TemporaryDirectory(dir=config.keep_dir) as tmp:
        path = os.path.join(tmp, f"{task.name}.p")
        with open(path, "w") as fh:
            fh.write(text)
        cmd = config.command(path, timeout)
        try:
            # the prover enforces its own limit; the grace period covers start-up
            proc = subprocess.run(cmd, capture_output=True, text=True,
                                  timeout=timeout + min(5.0, 1.0 + timeout / 10))
        except subprocess.TimeoutExpired:
            return TaskResult(task, Status.TIMEOUT, "killed after timeout",
                              time.monotonic() - start)
        except OSError as e:
            return TaskResult(task, Status.ERROR, str(e), time.monotonic() - start)
    status, detail = parse_szs(proc.stdout + "\n" + proc.stderr)
    return TaskResult(task, status, detail, time.monotonic() - start)


def run_tasks(tasks: Sequence[ProofTask], config: ProverConfig,
              runner: Callable[[ProofTask, ProverConfig], TaskResult] = run_task,
              ) -> ProofOutcome:
    """Run lemma chains and goals; the two directions run concurrently.

    Within a direction, tasks run in order (lemmas first, as planned) and
    each proved lemma becomes an axiom of every later task of that
    direction.
    """
    config.command("probe.p", 1)  # fail early if the executable is missing
    by_direction: dict[str, list[ProofTask]] = {}
    for t in tasks:
        by_direction.setdefault(t.direction, []).append(t)
    lock = threading.Lock()
    results: dict[str, TaskResult] = {}

    def chain(items: list[ProofTask]):
        proved: list[Formula] = []
        for t in items:
            r = runner(t.with_axioms(proved), config)
            with lock:
                results[t.name] = r
            if t.role == "lemma" and r.status is Status.PROVED:
                proved.append(t.conjecture)

    workers = max(1, config.parallel)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(chain, items) for items in by_direction.values()]
        for f in futures:
            f.result()
    return ProofOutcome([results[t.name] for t in tasks])
