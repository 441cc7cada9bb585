"""Epistemic statements about the player's beliefs.

Concrete syntax::

    stmt  := modal '(' agent ',' inner ')'
    modal := 'believes' | 'knows' | 'certain'
    inner := 'exists' VAR '.' inner | inner 'and' inner | inner 'or' inner
           | 'not' inner | '(' inner ')' | atom
    atom  := 'inside' '(' key ',' box ')' | 'iscolor' '(' key ',' color ')'
           | 'empty' '(' box ')'

Keywords are case-insensitive. Variables start with an upper-case letter;
colors and boxes (``box1``, ``box2``...) are lower-case constants. A color
used where a key is expected means "some key of that color". ``not`` binds
tighter than ``and``, which binds tighter than ``or``; an ``exists`` body
extends as far right as possible.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Collection, Dict, List, Optional, Tuple, Union

from .beliefs import Belief
from .gridworld import KeyObject, WorldState, world_keys


class ELoTSyntaxError(ValueError):
    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        super().__init__(message if position is None else f"{message} at position {position}")


class Modal(enum.Enum):
    BELIEVES = "believes"
    KNOWS = "knows"
    CERTAIN = "certain"


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Color:
    name: str


KeyTerm = Union[Var, Color]


@dataclass(frozen=True)
class Inside:
    key: KeyTerm
    box: str


@dataclass(frozen=True)
class IsColor:
    key: KeyTerm
    color: str


@dataclass(frozen=True)
class Empty:
    box: str


@dataclass(frozen=True)
class Not:
    body: "Inner"


@dataclass(frozen=True)
class And:
    left: "Inner"
    right: "Inner"


@dataclass(frozen=True)
class Or:
    left: "Inner"
    right: "Inner"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Inner"


Inner = Union[Inside, IsColor, Empty, Not, And, Or, Exists]
ATOMS = (Inside, IsColor, Empty)


@dataclass(frozen=True)
class EpistemicFormula:
    modal: Modal
    agent: str
    inner: Inner

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class ModalThresholds:
    believes: float = 0.5
    knows: float = 0.5
    certain: float = 0.99

    def __post_init__(self):
        for name in ("believes", "knows", "certain"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ValueError(f"threshold {name} must lie in (0, 1], got {value}")


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[(),.])|(?P<bad>\S))")
KEYWORDS = {"believes", "knows", "certain", "exists", "and", "or", "not", "inside", "iscolor", "empty"}
_BOX = re.compile(r"box[1-9][0-9]*")


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group("bad"):
            raise ELoTSyntaxError(f"unexpected character {m.group('bad')!r}", m.start("bad"))
        if m.group("ident"):
            word = m.group("ident")
            if word.lower() in KEYWORDS:
                tokens.append(("kw", word.lower(), m.start("ident")))
            else:
                tokens.append(("id", word, m.start("ident")))
        elif m.group("punct"):
            tokens.append(("p", m.group("punct"), m.start("punct")))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, colors: Optional[Collection[str]], boxes: Optional[Collection[str]]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.colors = None if colors is None else {c.lower() for c in colors}
        self.boxes = None if boxes is None else set(boxes)
        self.scope: List[str] = []

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind: str, value: Optional[str] = None):
        tok = self.tokens[self.i]
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            got = tok[1] or "end of input"
            raise ELoTSyntaxError(f"expected {want!r}, found {got!r}", tok[2])
        self.i += 1
        return tok

    def statement(self) -> EpistemicFormula:
        tok = self.peek()
        if tok[0] != "kw" or tok[1] not in ("believes", "knows", "certain"):
            raise ELoTSyntaxError("expected a modal operator", tok[2])
        self.i += 1
        self.take("p", "(")
        agent = self.take("id")[1]
        self.take("p", ",")
        inner = self.disjunction()
        self.take("p", ")")
        self.take("eof")
        return EpistemicFormula(Modal(tok[1]), agent, inner)

    def disjunction(self) -> Inner:
        left = self.conjunction()
        while self.peek()[:2] == ("kw", "or"):
            self.i += 1
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Inner:
        left = self.unary()
        while self.peek()[:2] == ("kw", "and"):
            self.i += 1
            left = And(left, self.unary())
        return left

    def unary(self) -> Inner:
        kind, value, pos = self.peek()
        if (kind, value) == ("kw", "not"):
            self.i += 1
            return Not(self.unary())
        if (kind, value) == ("kw", "exists"):
            self.i += 1
            name, vpos = self.take("id")[1:]
            if not name[0].isupper():
                raise ELoTSyntaxError(f"quantified variable must be upper-case, got {name!r}", vpos)
            self.take("p", ".")
            self.scope.append(name)
            body = self.disjunction()
            self.scope.pop()
            return Exists(name, body)
        if (kind, value) == ("p", "("):
            self.i += 1
            inner = self.disjunction()
            self.take("p", ")")
            return inner
        return self.atom()

    def atom(self) -> Inner:
        kind, value, pos = self.peek()
        if kind != "kw" or value not in ("inside", "iscolor", "empty"):
            found = value or "end of input"
            raise ELoTSyntaxError(f"expected a formula, found {found!r}", pos)
        self.i += 1
        self.take("p", "(")
        if value == "empty":
            box = self.box()
            self.take("p", ")")
            return Empty(box)
        key = self.key()
        self.take("p", ",")
        if value == "inside":
            result = Inside(key, self.box())
        else:
            result = IsColor(key, self.color())
        self.take("p", ")")
        return result

    def key(self) -> KeyTerm:
        _, name, pos = self.take("id")
        if name[0].isupper():
            if name not in self.scope:
                raise ELoTSyntaxError(f"unbound variable {name}", pos)
            return Var(name)
        self.i -= 1
        return Color(self.color())

    def color(self) -> str:
        _, name, pos = self.take("id")
        if name[0].isupper():
            raise ELoTSyntaxError(f"expected a color constant, found {name!r}", pos)
        if self.colors is not None and name not in self.colors:
            raise ELoTSyntaxError(f"unknown color {name!r}", pos)
        return name

    def box(self) -> str:
        _, name, pos = self.take("id")
        if not _BOX.fullmatch(name):
            raise ELoTSyntaxError(f"expected a box constant, found {name!r}", pos)
        if self.boxes is not None and name not in self.boxes:
            raise ELoTSyntaxError(f"unknown box {name!r}", pos)
        return name


def parse(
    text: str,
    colors: Optional[Collection[str]] = None,
    boxes: Optional[Collection[str]] = None,
) -> EpistemicFormula:
    """Parse a statement. When ``colors``/``boxes`` are given, constants are
    checked against them."""
    return _Parser(text, colors, boxes).statement()


def parse_inner(text: str, colors=None, boxes=None) -> Inner:
    p = _Parser(text, colors, boxes)
    inner = p.disjunction()
    p.take("eof")
    return inner


# -- printing ------------------------------------------------------------------

_PREC = {Or: 1, And: 2}


def _term(k: KeyTerm) -> str:
    return k.name


def inner_to_text(f: Inner) -> str:
    if isinstance(f, Inside):
        return f"inside({_term(f.key)}, {f.box})"
    if isinstance(f, IsColor):
        return f"iscolor({_term(f.key)}, {f.color})"
    if isinstance(f, Empty):
        return f"empty({f.box})"
    if isinstance(f, Exists):
        return f"exists {f.var}. {inner_to_text(f.body)}"
    if isinstance(f, Not):
        body = inner_to_text(f.body)
        return f"not ({body})" if isinstance(f.body, (And, Or, Exists)) else f"not {body}"
    op = "and" if isinstance(f, And) else "or"
    prec = _PREC[type(f)]

    def side(child, right):
        text = inner_to_text(child)
        if isinstance(child, Exists):
            return f"({text})"
        if isinstance(child, (And, Or)):
            cp = _PREC[type(child)]
            if cp < prec or (right and cp == prec):
                return f"({text})"
        return text

    return f"{side(f.left, False)} {op} {side(f.right, True)}"


def to_text(phi: EpistemicFormula) -> str:
    return f"{phi.modal.value}({phi.agent}, {inner_to_text(phi.inner)})"


# -- semantics -----------------------------------------------------------------

def _box_index(box: str, w: WorldState) -> int:
    i = int(box[3:]) - 1
    if not 0 <= i < len(w.map.boxes):
        raise ValueError(f"{box} does not exist on this map")
    return i


def _matches(term: KeyTerm, env: Dict[str, KeyObject], test) -> bool:
    if isinstance(term, Var):
        return test(env[term.name])
    return any(k.color == term.name and test(k) for k in env["__keys__"])


def _eval(f: Inner, w: WorldState, env: Dict) -> bool:
    if isinstance(f, Inside):
        where = ("box", _box_index(f.box, w))
        return _matches(f.key, env, lambda k: k.location == where)
    if isinstance(f, IsColor):
        return _matches(f.key, env, lambda k: k.color == f.color)
    if isinstance(f, Empty):
        i = _box_index(f.box, w)
        return w.box_opened[i] or w.box_contents[i] is None
    if isinstance(f, Not):
        return not _eval(f.body, w, env)
    if isinstance(f, And):
        return _eval(f.left, w, env) and _eval(f.right, w, env)
    if isinstance(f, Or):
        return _eval(f.left, w, env) or _eval(f.right, w, env)
    if isinstance(f, Exists):
        return any(_eval(f.body, w, {**env, f.var: k}) for k in env["__keys__"])
    raise TypeError(f"not a formula: {f!r}")


def eval_inner(f: Inner, w: WorldState) -> bool:
    """Truth of a non-epistemic formula in ``w``. Quantifiers range over keys
    still in the world; collected keys are in the inventory, not in a box."""
    return _eval(f, w, {"__keys__": world_keys(w)})


def degree_of_belief_exact(b: Belief, f: Inner) -> Fraction:
    return sum((p.weight for p in b.particles if eval_inner(f, p.state)), Fraction(0))


def degree_of_belief(b: Belief, f: Inner) -> float:
    return float(degree_of_belief_exact(b, f))


def eval_epistemic(phi: EpistemicFormula, w: WorldState, b: Belief, theta: ModalThresholds = ModalThresholds()) -> bool:
    """The statement as a Boolean function of (state, belief).

    Thresholds compare with ``>=``. ``knows`` is factive.
    """
    degree = degree_of_belief_exact(b, phi.inner)
    if phi.modal is Modal.BELIEVES:
        return degree >= Fraction(theta.believes)
    if phi.modal is Modal.CERTAIN:
        return degree >= Fraction(theta.certain)
    return degree >= Fraction(theta.knows) and eval_inner(phi.inner, w)
