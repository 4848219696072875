"""Mini-gringo programs: abstract syntax, parser and pretty-printer.

The accepted surface syntax is the ASCII notation of gringo restricted to
the mini-gringo fragment::

    composite(I*J) :- I = 2..b, J = 2..b.
    prime(I) :- I = a..b, not composite(I).
    {p(X)} :- q(X).
    :- p(X), not q(X).

Aggregates, pools, classical negation, disjunctive heads and ``#``
directives are rejected with :class:`UnsupportedConstruct`.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, NamedTuple, Union


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line else ""
        super().__init__(where + message)


class UnsupportedConstruct(ParseError):
    pass


class Pred(NamedTuple):
    """A predicate symbol ``name/arity``."""

    name: str
    arity: int

    def __str__(self):
        return f"{self.name}/{self.arity}"

    @classmethod
    def parse(cls, text: str) -> "Pred":
        name, _, arity = text.strip().rpartition("/")
        if not name or not arity.isdigit():
            raise ValueError(f"not a predicate symbol: {text!r}")
        return cls(name, int(arity))


# ---------------------------------------------------------------------------
# Precomputed terms
# ---------------------------------------------------------------------------


class Precomputed:
    """Base class of precomputed terms.

    Terms are totally ordered: ``#inf`` < numerals < symbolic constants <
    ``#sup``; numerals by value, symbolic constants lexicographically.
    """

    __slots__ = ()

    def key(self) -> tuple:
        raise NotImplementedError

    def __lt__(self, other):
        if not isinstance(other, Precomputed):
            return NotImplemented
        return self.key() < other.key()

    def __le__(self, other):
        if not isinstance(other, Precomputed):
            return NotImplemented
        return self.key() <= other.key()

    def __gt__(self, other):
        if not isinstance(other, Precomputed):
            return NotImplemented
        return self.key() > other.key()

    def __ge__(self, other):
        if not isinstance(other, Precomputed):
            return NotImplemented
        return self.key() >= other.key()


@dataclass(frozen=True, eq=True)
class Num(Precomputed):
    value: int

    def key(self):
        return (1, self.value)

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True, eq=True)
class Sym(Precomputed):
    name: str

    def key(self):
        return (2, self.name)

    def __str__(self):
        return self.name


@dataclass(frozen=True, eq=True)
class _Infimum(Precomputed):
    def key(self):
        return (0,)

    def __str__(self):
        return "#inf"


@dataclass(frozen=True, eq=True)
class _Supremum(Precomputed):
    def key(self):
        return (3,)

    def __str__(self):
        return "#sup"


INF = _Infimum()
SUP = _Supremum()


# ---------------------------------------------------------------------------
# Program terms, atoms, rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Minus:
    arg: "Term"

    def __str__(self):
        return "-" + _wrap(self.arg, 3)


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - *
    left: "Term"
    right: "Term"

    def __str__(self):
        prec = _PREC[self.op]
        return f"{_wrap(self.left, prec)}{self.op}{_wrap(self.right, prec + 1)}"


@dataclass(frozen=True)
class Interval:
    low: "Term"
    high: "Term"

    def __str__(self):
        return f"{_wrap(self.low, 1)}..{_wrap(self.high, 1)}"


Term = Union[Num, Sym, _Infimum, _Supremum, Var, Minus, BinOp, Interval]

_PREC = {"+": 1, "-": 1, "*": 2}


def _term_prec(t) -> int:
    if isinstance(t, Interval):
        return 0
    if isinstance(t, BinOp):
        return _PREC[t.op]
    if isinstance(t, Minus) or (isinstance(t, Num) and t.value < 0):
        return 3
    return 4


def _wrap(t, needed: int) -> str:
    s = str(t)
    return f"({s})" if _term_prec(t) < needed else s


class Sign(enum.Enum):
    POS = ""
    NOT = "not "
    NOTNOT = "not not "


@dataclass(frozen=True)
class Atom:
    name: str
    args: tuple = ()

    @property
    def pred(self) -> Pred:
        return Pred(self.name, len(self.args))

    def __str__(self):
        if not self.args:
            return self.name
        return f"{self.name}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class Literal:
    atom: Atom
    sign: Sign = Sign.POS

    def __str__(self):
        return f"{self.sign.value}{self.atom}"


COMPARISONS = ("=", "!=", "<", ">", "<=", ">=")


@dataclass(frozen=True)
class Comparison:
    left: Term
    op: str
    right: Term

    def __str__(self):
        return f"{self.left} {self.op} {self.right}"


BodyElement = Union[Literal, Comparison]


@dataclass(frozen=True)
class Rule:
    """A rule; ``head is None`` marks a constraint."""

    head: Atom | None
    body: tuple = ()
    choice: bool = False

    @property
    def is_constraint(self) -> bool:
        return self.head is None

    def __str__(self):
        if self.head is None:
            head = ""
        elif self.choice:
            head = "{" + str(self.head) + "}"
        else:
            head = str(self.head)
        if not self.body:
            return head + "."
        body = ", ".join(map(str, self.body))
        return f"{head} :- {body}." if head else f":- {body}."


@dataclass(frozen=True)
class Program:
    rules: tuple = ()

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)

    def __str__(self):
        return "".join(f"{r}\n" for r in self.rules)


@dataclass(frozen=True, order=True)
class GroundAtom:
    """A precomputed atom ``p(t1,...,tn)``."""

    name: str
    args: tuple = ()

    @property
    def pred(self) -> Pred:
        return Pred(self.name, len(self.args))

    def __str__(self):
        if not self.args:
            return self.name
        return f"{self.name}({','.join(map(str, self.args))})"


# ---------------------------------------------------------------------------
# Traversals
# ---------------------------------------------------------------------------


def term_variables(t) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Minus):
        return term_variables(t.arg)
    if isinstance(t, BinOp):
        return term_variables(t.left) | term_variables(t.right)
    if isinstance(t, Interval):
        return term_variables(t.low) | term_variables(t.high)
    return set()


def term_constants(t) -> set[Precomputed]:
    if isinstance(t, Precomputed):
        return {t}
    if isinstance(t, Minus):
        return term_constants(t.arg)
    if isinstance(t, BinOp):
        return term_constants(t.left) | term_constants(t.right)
    if isinstance(t, Interval):
        return term_constants(t.low) | term_constants(t.high)
    return set()


def element_terms(e: BodyElement) -> tuple:
    if isinstance(e, Literal):
        return e.atom.args
    return (e.left, e.right)


def rule_variables(rule: Rule) -> set[str]:
    names: set[str] = set()
    terms = list(rule.head.args) if rule.head is not None else []
    for e in rule.body:
        terms.extend(element_terms(e))
    for t in terms:
        names |= term_variables(t)
    return names


def rule_atoms(rule: Rule) -> Iterator[Atom]:
    if rule.head is not None:
        yield rule.head
    for e in rule.body:
        if isinstance(e, Literal):
            yield e.atom


def predicate_symbols(program: Program) -> set[Pred]:
    """All ``p/n`` contained in a head or body atom of ``program``."""
    return {a.pred for r in program for a in rule_atoms(r)}


def head_predicates(program: Program) -> set[Pred]:
    return {r.head.pred for r in program if r.head is not None}


def program_constants(program: Program) -> set[Precomputed]:
    out: set[Precomputed] = set()
    for r in program:
        for a in rule_atoms(r):
            for t in a.args:
                out |= term_constants(t)
        for e in r.body:
            if isinstance(e, Comparison):
                out |= term_constants(e.left) | term_constants(e.right)
    return out


def _subst_term(t, v: Mapping[str, Precomputed]):
    if isinstance(t, Sym):
        return v.get(t.name, t)
    if isinstance(t, Minus):
        return Minus(_subst_term(t.arg, v))
    if isinstance(t, BinOp):
        return BinOp(t.op, _subst_term(t.left, v), _subst_term(t.right, v))
    if isinstance(t, Interval):
        return Interval(_subst_term(t.low, v), _subst_term(t.high, v))
    return t


def _subst_atom(a: Atom, v) -> Atom:
    return Atom(a.name, tuple(_subst_term(t, v) for t in a.args))


def substitute_placeholders(program: Program, valuation: Mapping[str, Precomputed]) -> Program:
    """Replace every occurrence of a symbolic constant ``c`` in the domain
    of ``valuation`` by ``valuation[c]``.  Predicate names are untouched."""
    if not valuation:
        return program
    rules = []
    for r in program:
        head = _subst_atom(r.head, valuation) if r.head is not None else None
        body = []
        for e in r.body:
            if isinstance(e, Literal):
                body.append(Literal(_subst_atom(e.atom, valuation), e.sign))
            else:
                body.append(Comparison(_subst_term(e.left, valuation), e.op,
                                       _subst_term(e.right, valuation)))
        rules.append(Rule(head, tuple(body), r.choice))
    return Program(tuple(rules))


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    column: int


_TOKEN_SPEC = [
    ("WS", r"[ \t\r\n]+"),
    ("COMMENT", r"%[^\n]*"),
    ("HASH", r"#[A-Za-z_]\w*"),
    ("INT", r"\d+"),
    ("IDENT", r"[a-z]\w*"),
    ("VAR", r"[A-Z]\w*"),
    ("ANON", r"_\w*"),
    ("STRING", r'"(?:[^"\\]|\\.)*"'),
    ("OP", r"<->|->|<-|:-|\.\.|!=|<>|<=|>=|==|[=<>+\-*/\\(){},;:.|^?&@~$\[\]'`!]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{k}>{p})" for k, p in _TOKEN_SPEC))


def tokenize(text: str, hash_comments: bool = False) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        if hash_comments and text[pos] == "#" and not re.match(
                r"#(inf|sup|infimum|supremum|true|false)\b", text[pos:]):
            end = text.find("\n", pos)
            pos = len(text) if end < 0 else end
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind, value = m.lastgroup, m.group()
        if kind not in ("WS", "COMMENT"):
            tokens.append(Token(kind, value, line, pos - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class TokenStream:
    """Cursor over a token list with the helpers shared by the program,
    formula and user-guide parsers."""

    _UNSUPPORTED = {
        ";": "pools / ';' separators",
        "|": "disjunctive heads or absolute values",
        "/": "division",
        "\\": "modulo",
        "^": "bitwise operators",
        "?": "bitwise operators",
        "&": "bitwise operators or theory atoms",
        "@": "external functions",
        "~": "bitwise negation",
        ":": "conditional literals",
    }

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def at(self, text: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.kind in ("OP", "IDENT") and tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.column)

    def unsupported(self, what: str, tok: Token | None = None) -> UnsupportedConstruct:
        tok = tok or self.peek()
        return UnsupportedConstruct(f"unsupported construct: {what}", tok.line, tok.column)

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.kind in ("OP", "IDENT") and tok.text == text:
            self.pos += 1
            return tok
        self.check_unsupported(tok)
        raise self.error(f"expected {text!r}, found {tok.text or 'end of input'!r}")

    def check_unsupported(self, tok: Token):
        if tok.kind == "HASH" and tok.text not in ("#inf", "#sup", "#infimum", "#supremum"):
            raise self.unsupported(f"{tok.text} (directives and aggregates)", tok)
        if tok.kind == "STRING":
            raise self.unsupported("string constants", tok)
        if tok.kind == "ANON":
            raise self.unsupported("anonymous variables", tok)
        if tok.kind == "OP" and tok.text in self._UNSUPPORTED:
            raise self.unsupported(self._UNSUPPORTED[tok.text], tok)

    # terms -----------------------------------------------------------------

    def parse_term(self, intervals: bool = True):
        low = self._additive()
        if self.at(".."):
            if not intervals:
                raise self.error("intervals are not allowed here")
            self.next()
            return Interval(low, self._additive())
        return low

    def _additive(self):
        t = self._multiplicative()
        while self.peek().kind == "OP" and self.peek().text in ("+", "-"):
            op = self.next().text
            t = BinOp(op, t, self._multiplicative())
        return t

    def _multiplicative(self):
        t = self._unary()
        while self.at("*"):
            self.next()
            if self.at("*"):
                raise self.unsupported("exponentiation")
            t = BinOp("*", t, self._unary())
        return t

    def _unary(self):
        if self.at("-"):
            tok = self.next()
            if self.peek().kind == "IDENT" and self.at("(", 1):
                raise self.unsupported("classical negation", tok)
            arg = self._unary()
            if isinstance(arg, Num):
                return Num(-arg.value)
            return Minus(arg)
        return self._primary()

    def _primary(self):
        tok = self.peek()
        if tok.kind == "INT":
            self.next()
            return Num(int(tok.text))
        if tok.kind == "IDENT":
            if self.at("(", 1):
                raise self.unsupported("function symbols", tok)
            self.next()
            return Sym(tok.text)
        if tok.kind == "VAR":
            self.next()
            return Var(tok.text)
        if tok.kind == "HASH" and tok.text in ("#inf", "#infimum"):
            self.next()
            return INF
        if tok.kind == "HASH" and tok.text in ("#sup", "#supremum"):
            self.next()
            return SUP
        if self.at("("):
            self.next()
            t = self.parse_term()
            if self.at(","):
                raise self.unsupported("tuples")
            self.expect(")")
            return t
        self.check_unsupported(tok)
        raise self.error(f"expected a term, found {tok.text or 'end of input'!r}")

    def parse_atom(self) -> Atom:
        tok = self.peek()
        if tok.kind != "IDENT":
            self.check_unsupported(tok)
            if self.at("-") and self.peek(1).kind == "IDENT":
                raise self.unsupported("classical negation")
            raise self.error(f"expected an atom, found {tok.text or 'end of input'!r}")
        self.next()
        args = []
        if self.accept("("):
            args.append(self.parse_term())
            while self.accept(","):
                args.append(self.parse_term())
            self.expect(")")
        return Atom(tok.text, tuple(args))

    def comparison_op(self) -> str | None:
        tok = self.peek()
        if tok.kind != "OP":
            return None
        return {"=": "=", "==": "=", "!=": "!=", "<>": "!=", "<": "<", ">": ">",
                "<=": "<=", ">=": ">="}.get(tok.text)


class _ProgramParser(TokenStream):
    def program(self) -> Program:
        rules = []
        while self.peek().kind != "EOF":
            rules.append(self.rule())
        return Program(tuple(rules))

    def rule(self) -> Rule:
        head, choice = None, False
        if self.at(":-"):
            pass
        elif self.at("{"):
            self.next()
            head = self.parse_atom()
            if not self.at("}"):
                self.check_unsupported(self.peek())
                raise self.error("choice rules must have exactly one atom in the head")
            self.next()
            choice = True
            if self.peek().kind in ("INT", "VAR"):
                raise self.unsupported("cardinality bounds")
        else:
            if self.peek().kind in ("INT", "VAR") and self.at("{", 1):
                raise self.unsupported("cardinality bounds")
            head = self.parse_atom()
            if self.comparison_op():
                raise self.error("comparisons are not allowed in rule heads")
        body: list[BodyElement] = []
        if self.accept(":-"):
            body.append(self.body_element())
            while self.accept(","):
                body.append(self.body_element())
        if not self.at("."):
            self.check_unsupported(self.peek())
            raise self.error(f"expected '.', found {self.peek().text or 'end of input'!r}")
        self.next()
        return Rule(head, tuple(body), choice)

    def body_element(self) -> BodyElement:
        if self.accept("not"):
            if self.accept("not"):
                return Literal(self.parse_atom(), Sign.NOTNOT)
            return Literal(self.parse_atom(), Sign.NOT)
        tok = self.peek()
        if tok.kind == "IDENT" and self.at("(", 1):
            atom = self.parse_atom()
            if self.comparison_op():
                raise self.unsupported("function symbols", tok)
            return Literal(atom)
        if tok.kind == "IDENT" and not self._starts_comparison():
            return Literal(self.parse_atom())
        left = self.parse_term()
        op = self.comparison_op()
        if op is None:
            self.check_unsupported(self.peek())
            raise self.error("expected a comparison operator")
        self.next()
        return Comparison(left, op, self.parse_term())

    def _starts_comparison(self) -> bool:
        # an identifier followed by an arithmetic/comparison operator is a term
        nxt = self.peek(1)
        return nxt.kind == "OP" and nxt.text in (
            "=", "==", "!=", "<>", "<", ">", "<=", ">=", "+", "-", "*", "..")


def parse_program(text: str) -> Program:
    """Parse mini-gringo source text into a :class:`Program`."""
    return _ProgramParser(tokenize(text)).program()


def parse_facts(text: str) -> set[GroundAtom]:
    """Parse a list of ground facts such as ``father(jacob,joseph).``"""
    atoms = set()
    for rule in parse_program(text):
        if rule.body or rule.choice or rule.head is None:
            raise ParseError(f"not a fact: {rule}")
        args = rule.head.args
        if not all(isinstance(t, Precomputed) for t in args):
            raise ParseError(f"fact arguments must be precomputed terms: {rule}")
        atoms.add(GroundAtom(rule.head.name, args))
    return atoms


def parse_precomputed(text: str) -> Precomputed:
    ts = TokenStream(tokenize(text))
    t = ts.parse_term()
    if ts.peek().kind != "EOF" or not isinstance(t, Precomputed):
        raise ParseError(f"not a precomputed term: {text!r}")
    return t


def facts_program(atoms: Iterable[GroundAtom]) -> Program:
    return Program(tuple(Rule(Atom(a.name, a.args)) for a in sorted(atoms)))
