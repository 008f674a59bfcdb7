"""MALL formulas in negation normal form, linear negation, and annotated sequents.

Formulas are built from atoms and their duals with the four connectives
tensor, par, plus and with.  Negation is not a constructor: it is pushed
to the atoms by `negate`, and the parser normalises any `^` written on a
compound subformula the same way.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache


class FormulaSyntaxError(ValueError):
    """Malformed formula text; `position` is a 0-based character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ChannelClashError(ValueError):
    """Two sequent entries (or operands) share a channel name."""


@dataclass(frozen=True, order=True)
class Atom:
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("atom name must be nonempty")

    def __str__(self) -> str:
        return self.name


class Formula:
    """Base class for the six NNF constructors below."""

    __slots__ = ()

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class PosAtom(Formula):
    atom: Atom


@dataclass(frozen=True)
class NegAtom(Formula):
    atom: Atom


@dataclass(frozen=True)
class Tensor(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Par(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Plus(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class With(Formula):
    left: Formula
    right: Formula


def pos(name: str) -> PosAtom:
    return PosAtom(Atom(name))


def neg(name: str) -> NegAtom:
    return NegAtom(Atom(name))


def negate(f: Formula) -> Formula:
    """Linear dual, pushing negation to the atoms.

    Swaps tensor/par and plus/with; an involution on every formula.
    """
    match f:
        case PosAtom(a):
            return NegAtom(a)
        case NegAtom(a):
            return PosAtom(a)
        case Tensor(l, r):
            return Par(negate(l), negate(r))
        case Par(l, r):
            return Tensor(negate(l), negate(r))
        case Plus(l, r):
            return With(negate(l), negate(r))
        case With(l, r):
            return Plus(negate(l), negate(r))
    raise TypeError(f"not a formula: {f!r}")


def subformulas(f: Formula):
    """Pre-order iterator over f and its subformulas."""
    yield f
    match f:
        case Tensor(l, r) | Par(l, r) | Plus(l, r) | With(l, r):
            yield from subformulas(l)
            yield from subformulas(r)


def formula_depth(f: Formula) -> int:
    match f:
        case PosAtom() | NegAtom():
            return 1
        case Tensor(l, r) | Par(l, r) | Plus(l, r) | With(l, r):
            return 1 + max(formula_depth(l), formula_depth(r))
    raise TypeError(f"not a formula: {f!r}")


_SUFFIXED = re.compile(r"^(.*?[^\d_])_(\d+)$")


@dataclass(frozen=True, order=True)
class ChannelName:
    """A communication port name: a base plus a freshening suffix.

    Suffix 0 renders as the bare base, suffix k as `base_k`.
    """

    base: str
    suffix: int = 0

    def __post_init__(self):
        if not self.base:
            raise ValueError("channel base must be nonempty")

    def bumped(self) -> ChannelName:
        return ChannelName(self.base, self.suffix + 1)

    @classmethod
    def parse(cls, text: str) -> ChannelName:
        m = _SUFFIXED.match(text)
        if m:
            return cls(m.group(1), int(m.group(2)))
        return cls(text)

    def __str__(self) -> str:
        return self.base if self.suffix == 0 else f"{self.base}_{self.suffix}"


def chan(text: str) -> ChannelName:
    return ChannelName.parse(text)


class AnnotatedSequent:
    """A multiset of (channel, formula) entries with pairwise-distinct channels.

    Entry order is remembered (it fixes e.g. the argument order of service
    references) but equality and hashing are order-insensitive.
    """

    __slots__ = ("entries", "_shape", "_sorted")

    def __init__(self, entries=()):
        entries = tuple((c, f) for c, f in entries)
        seen = set()
        for c, _ in entries:
            if c in seen:
                raise ChannelClashError(f"duplicate channel {c} in sequent")
            seen.add(c)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_shape", None)
        object.__setattr__(self, "_sorted", None)

    @classmethod
    def _trusted(cls, entries: tuple) -> AnnotatedSequent:
        # internal: caller guarantees channel distinctness
        s = object.__new__(cls)
        object.__setattr__(s, "entries", entries)
        object.__setattr__(s, "_shape", None)
        object.__setattr__(s, "_sorted", None)
        return s

    def sorted_entries(self) -> tuple:
        """Entries ordered by channel; cached."""
        if self._sorted is None:
            object.__setattr__(self, "_sorted",
                               tuple(sorted(self.entries, key=lambda e: e[0])))
        return self._sorted

    def __setattr__(self, name, value):
        raise AttributeError("AnnotatedSequent is immutable")

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AnnotatedSequent):
            return NotImplemented
        return frozenset(self.entries) == frozenset(other.entries)

    def __hash__(self) -> int:
        return hash(frozenset(self.entries))

    def __repr__(self) -> str:
        return f"AnnotatedSequent({self.entries!r})"

    def __str__(self) -> str:
        return ", ".join(f"{c}:{print_formula(f)}" for c, f in self.entries)

    def channels(self) -> tuple[ChannelName, ...]:
        return tuple(c for c, _ in self.entries)

    def channel_set(self) -> frozenset[ChannelName]:
        return frozenset(c for c, _ in self.entries)

    def __contains__(self, channel: ChannelName) -> bool:
        return any(c == channel for c, _ in self.entries)

    def formula_of(self, channel: ChannelName) -> Formula:
        for c, f in self.entries:
            if c == channel:
                return f
        raise KeyError(f"no entry for channel {channel}")

    def without(self, *channels: ChannelName) -> AnnotatedSequent:
        drop = set(channels)
        return AnnotatedSequent._trusted(
            tuple((c, f) for c, f in self.entries if c not in drop))

    def extended(self, channel: ChannelName, formula: Formula) -> AnnotatedSequent:
        if channel in self:
            raise ChannelClashError(f"duplicate channel {channel} in sequent")
        return AnnotatedSequent._trusted(self.entries + ((channel, formula),))

    def formula_multiset(self) -> tuple[str, ...]:
        """Channel-independent shape: the sorted formula prints."""
        if self._shape is None:
            shape = tuple(sorted(print_formula(f) for _, f in self.entries))
            object.__setattr__(self, "_shape", shape)
        return self._shape


def sequent_union(a: AnnotatedSequent, b: AnnotatedSequent) -> AnnotatedSequent:
    """Multiset union; the channel sets must be disjoint."""
    overlap = a.channel_set() & b.channel_set()
    if overlap:
        dup = sorted(overlap)[0]
        raise ChannelClashError(f"channel {dup} occurs in both sequents")
    return AnnotatedSequent(a.entries + b.entries)


# --- formula text grammar ---------------------------------------------------
#
# atoms [A-Z][A-Z0-9_]*; postfix ^ is linear negation; infix * = tensor,
# % = par, + = plus, & = with; precedence ^ > * = % > + = &, binary ops
# left-associative; parentheses; whitespace insignificant.

_TOKEN = re.compile(r"\s*([A-Z][A-Z0-9_]*|[()*%+&^])")

_ADDITIVE = {"+": Plus, "&": With}
_MULTIPLICATIVE = {"*": Tensor, "%": Par}


class _FormulaParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens: list[tuple[str, int]] = []
        i = 0
        while i < len(text):
            m = _TOKEN.match(text, i)
            if not m:
                if text[i:].strip():
                    bad = i + len(text[i:]) - len(text[i:].lstrip())
                    raise FormulaSyntaxError(f"unexpected character {text[bad]!r}", bad)
                break
            self.tokens.append((m.group(1), m.start(1)))
            i = m.end()

    def peek(self):
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, token: str):
        if self.peek() != token:
            where = self.tokens[self.pos][1] if self.pos < len(self.tokens) else len(self.text)
            raise FormulaSyntaxError(f"expected {token!r}", where)
        return self.next()

    def parse(self) -> Formula:
        f = self.additive()
        if self.pos < len(self.tokens):
            tok, where = self.tokens[self.pos]
            raise FormulaSyntaxError(f"unexpected token {tok!r}", where)
        return f

    def additive(self) -> Formula:
        f = self.multiplicative()
        while self.peek() in _ADDITIVE:
            op, _ = self.next()
            f = _ADDITIVE[op](f, self.multiplicative())
        return f

    def multiplicative(self) -> Formula:
        f = self.unary()
        while self.peek() in _MULTIPLICATIVE:
            op, _ = self.next()
            f = _MULTIPLICATIVE[op](f, self.unary())
        return f

    def unary(self) -> Formula:
        f = self.primary()
        while self.peek() == "^":
            self.next()
            f = negate(f)
        return f

    def primary(self) -> Formula:
        tok = self.peek()
        if tok is None:
            raise FormulaSyntaxError("unexpected end of input", len(self.text))
        if tok == "(":
            self.next()
            f = self.additive()
            self.expect(")")
            return f
        if tok[0].isalpha():
            name, _ = self.next()
            return PosAtom(Atom(name))
        _, where = self.tokens[self.pos]
        raise FormulaSyntaxError(f"unexpected token {tok!r}", where)


def parse_formula(text: str) -> Formula:
    return _FormulaParser(text).parse()


_LEVEL_ADDITIVE = 1
_LEVEL_MULTIPLICATIVE = 2
_LEVEL_ATOM = 3

_OP_SYMBOL = {Tensor: "*", Par: "%", Plus: "+", With: "&"}
_OP_LEVEL = {Tensor: _LEVEL_MULTIPLICATIVE, Par: _LEVEL_MULTIPLICATIVE,
             Plus: _LEVEL_ADDITIVE, With: _LEVEL_ADDITIVE}


@lru_cache(maxsize=200_000)
def print_formula(f: Formula, _need: int = _LEVEL_ADDITIVE) -> str:
    """Canonical ASCII rendering; parse_formula(print_formula(f)) == f."""
    match f:
        case PosAtom(a):
            return a.name
        case NegAtom(a):
            return f"{a.name}^"
        case Tensor() | Par() | Plus() | With():
            level = _OP_LEVEL[type(f)]
            sym = _OP_SYMBOL[type(f)]
            text = (f"{print_formula(f.left, level)} {sym} "
                    f"{print_formula(f.right, level + 1)}")
            return f"({text})" if level < _need else text
    raise TypeError(f"not a formula: {f!r}")
