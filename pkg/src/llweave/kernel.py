"""LCF-style trusted core: annotated one-sided MALL rules.

Every rule simultaneously certifies an annotated sequent and constructs the
pi-calculus translation of its derivation.  `Theorem` values can only be
produced by the rule functions in this module, so anything holding a Theorem
holds a kernel-checked derivation.

The free names of a theorem's process are exactly the channels of its
sequent; fresh bound names (the identity buffer payload, the plus/with
branch pair, the cut link) are drawn from a per-derivation counter so
extraction is reproducible.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .cll import (AnnotatedSequent, ChannelClashError, ChannelName, Formula,
                  NegAtom, Plus, PosAtom, Tensor, Par, With, negate,
                  print_formula, sequent_union)
from . import pi
from .pi import Process, Ref, Restrict, Input, Output, Parallel, Sum, NIL


class KernelError(ValueError):
    pass


class MissingChannelError(KernelError):
    pass


class NotFreshError(KernelError):
    pass


class ContextMismatchError(KernelError):
    pass


class CutFormulaMismatchError(KernelError):
    pass


@dataclass(frozen=True)
class ProofTree:
    rule: str  # id | tensor | par | plus_l | plus_r | with | cut | axiom
    principal: tuple[ChannelName, ...]
    premises: tuple[ProofTree, ...] = ()
    name: str | None = None

    def to_json(self) -> dict:
        doc: dict = {"rule": self.rule,
                     "principal": [str(c) for c in self.principal]}
        if self.name is not None:
            doc["name"] = self.name
        if self.premises:
            doc["premises"] = [t.to_json() for t in self.premises]
        return doc

    def rule_multiset(self) -> Counter:
        counts: Counter = Counter()
        stack = [self]
        while stack:
            node = stack.pop()
            counts[node.rule] += 1
            stack.extend(node.premises)
        return counts

    def axiom_leaves(self) -> Counter:
        counts: Counter = Counter()
        stack = [self]
        while stack:
            node = stack.pop()
            if node.rule == "axiom":
                counts[node.name] += 1
            stack.extend(node.premises)
        return counts

    def renamed(self, mapping: dict[ChannelName, ChannelName]) -> ProofTree:
        return ProofTree(self.rule,
                         tuple(mapping.get(c, c) for c in self.principal),
                         tuple(t.renamed(mapping) for t in self.premises),
                         self.name)


_TOKEN = object()


class Theorem:
    """A kernel-certified annotated sequent with its extracted process.

    Constructible only through the rule functions of this module.
    """

    __slots__ = ("sequent", "process", "derivation", "_fresh")

    def __init__(self, guard, sequent: AnnotatedSequent, process: Process,
                 derivation: ProofTree, fresh: int):
        if guard is not _TOKEN:
            raise KernelError("Theorem values are created by kernel rules only")
        object.__setattr__(self, "sequent", sequent)
        object.__setattr__(self, "process", process)
        object.__setattr__(self, "derivation", derivation)
        object.__setattr__(self, "_fresh", fresh)

    def __setattr__(self, name, value):
        raise AttributeError("Theorem is immutable")

    def __repr__(self) -> str:
        return f"<Theorem |- {self.sequent}>"


def _mk(sequent, process, derivation, fresh) -> Theorem:
    return Theorem(_TOKEN, sequent, process, derivation, fresh)


def _fresh_names(counter: int, bases: tuple[str, ...],
                 avoid: frozenset[ChannelName]) -> tuple[tuple[ChannelName, ...], int]:
    """Next batch of generated names `base_k`, one shared index per rule
    application, skipping indices that would collide with live channels."""
    k = counter + 1
    while True:
        names = tuple(ChannelName(b, k) for b in bases)
        if not any(n in avoid for n in names):
            return names, k
        k += 1


def _require(sequent: AnnotatedSequent, channel: ChannelName) -> Formula:
    if channel not in sequent:
        raise MissingChannelError(f"channel {channel} not in sequent |- {sequent}")
    return sequent.formula_of(channel)


def _require_fresh(z: ChannelName, *sequents: AnnotatedSequent):
    for s in sequents:
        if z in s:
            raise NotFreshError(f"channel {z} already occurs in |- {s}")


def ax(f: Formula, x: ChannelName, y: ChannelName) -> Theorem:
    """Identity axiom: |- x:f, y:~f with the axiom buffer y(a).x<a>.0.

    At a negative literal the buffer flips to x(a).y<a>.0 so that it always
    receives on the negated port and sends on the positive one, matching the
    input/output reading of polarity that the concrete stubs follow.
    """
    if x == y:
        raise ChannelClashError(f"axiom needs two distinct channels, got {x}")
    (a,), fresh = _fresh_names(0, ("a",), frozenset({x, y}))
    sequent = AnnotatedSequent(((x, f), (y, negate(f))))
    if isinstance(f, NegAtom):
        process: Process = Input(x, (a,), Output(y, (a,), NIL))
    else:
        process = Input(y, (a,), Output(x, (a,), NIL))
    return _mk(sequent, process, ProofTree("id", (x, y)), fresh)


def tensor(left: Theorem, right: Theorem, x: ChannelName, y: ChannelName,
           z: ChannelName) -> Theorem:
    """|- G,x:A and |- D,y:B give |- G,D,z:A*B  with nu x,y.z<x,y>.(F|G)."""
    a = _require(left.sequent, x)
    b = _require(right.sequent, y)
    rest_l = left.sequent.without(x)
    rest_r = right.sequent.without(y)
    if x in right.sequent or y in left.sequent:
        raise ChannelClashError(f"principal channels {x},{y} occur on both sides")
    combined = sequent_union(rest_l, rest_r)
    _require_fresh(z, left.sequent, right.sequent)
    sequent = combined.extended(z, Tensor(a, b))
    process = Restrict((x, y), Output(z, (x, y), Parallel(left.process, right.process)))
    tree = ProofTree("tensor", (x, y, z), (left.derivation, right.derivation))
    return _mk(sequent, process, tree, max(left._fresh, right._fresh))


def par(premise: Theorem, x: ChannelName, y: ChannelName, z: ChannelName) -> Theorem:
    """|- G,x:A,y:B gives |- G,z:A%B  with z(x,y).F."""
    if x == y:
        raise ChannelClashError("par needs two distinct principal channels")
    a = _require(premise.sequent, x)
    b = _require(premise.sequent, y)
    rest = premise.sequent.without(x, y)
    _require_fresh(z, rest)
    sequent = rest.extended(z, Par(a, b))
    process = Input(z, (x, y), premise.process)
    return _mk(sequent, process,
               ProofTree("par", (x, y, z), (premise.derivation,)), premise._fresh)


def plus_l(premise: Theorem, x: ChannelName, b: Formula, z: ChannelName) -> Theorem:
    """|- G,x:A gives |- G,z:A+b  with nu x.z(u,v).u<x>.P."""
    a = _require(premise.sequent, x)
    rest = premise.sequent.without(x)
    _require_fresh(z, premise.sequent)
    (u, v), fresh = _fresh_names(premise._fresh, ("u", "v"),
                                 premise.sequent.channel_set() | {z})
    sequent = rest.extended(z, Plus(a, b))
    process = Restrict((x,), Input(z, (u, v), Output(u, (x,), premise.process)))
    return _mk(sequent, process,
               ProofTree("plus_l", (x, z), (premise.derivation,)), fresh)


def plus_r(premise: Theorem, y: ChannelName, a: Formula, z: ChannelName) -> Theorem:
    """|- G,y:B gives |- G,z:a+B  with nu y.z(u,v).v<y>.Q."""
    b = _require(premise.sequent, y)
    rest = premise.sequent.without(y)
    _require_fresh(z, premise.sequent)
    (u, v), fresh = _fresh_names(premise._fresh, ("u", "v"),
                                 premise.sequent.channel_set() | {z})
    sequent = rest.extended(z, Plus(a, b))
    process = Restrict((y,), Input(z, (u, v), Output(v, (y,), premise.process)))
    return _mk(sequent, process,
               ProofTree("plus_r", (y, z), (premise.derivation,)), fresh)


def with_(left: Theorem, right: Theorem, x: ChannelName, y: ChannelName,
          z: ChannelName) -> Theorem:
    """|- G,x:A and |- G,y:B (same G, channels included) give |- G,z:A&B
    with nu u,v.z<u,v>.(u(x).P + v(y).Q)."""
    a = _require(left.sequent, x)
    b = _require(right.sequent, y)
    ctx_l = left.sequent.without(x)
    ctx_r = right.sequent.without(y)
    if ctx_l != ctx_r:
        only_l = set(ctx_l.entries) - set(ctx_r.entries)
        only_r = set(ctx_r.entries) - set(ctx_l.entries)
        detail = "; ".join(
            f"{side}: {c}:{print_formula(f)}"
            for side, pairs in (("left", sorted(only_l, key=str)),
                                ("right", sorted(only_r, key=str)))
            for c, f in pairs)
        raise ContextMismatchError(f"with contexts differ ({detail})")
    _require_fresh(z, left.sequent, right.sequent)
    avoid = left.sequent.channel_set() | right.sequent.channel_set() | {z}
    (u, v), fresh = _fresh_names(max(left._fresh, right._fresh), ("u", "v"), avoid)
    sequent = ctx_l.extended(z, With(a, b))
    process = Restrict((u, v), Output(z, (u, v),
                       Sum(Input(u, (x,), left.process),
                           Input(v, (y,), right.process))))
    tree = ProofTree("with", (x, y, z), (left.derivation, right.derivation))
    return _mk(sequent, process, tree, fresh)


def cut(left: Theorem, right: Theorem, x: ChannelName, y: ChannelName) -> Theorem:
    """|- G,x:C and |- D,y:~C give |- G,D  with nu z.(F[z/x] | G[z/y])."""
    c = _require(left.sequent, x)
    c_dual = _require(right.sequent, y)
    if negate(c) != c_dual:
        raise CutFormulaMismatchError(
            f"cut formulas are not dual: {print_formula(c)} vs {print_formula(c_dual)}")
    rest_l = left.sequent.without(x)
    rest_r = right.sequent.without(y)
    combined = sequent_union(rest_l, rest_r)
    avoid = left.sequent.channel_set() | right.sequent.channel_set()
    (z,), fresh = _fresh_names(max(left._fresh, right._fresh), ("z",), avoid)
    process = Restrict((z,), Parallel(pi.substitute(left.process, {x: z}),
                                      pi.substitute(right.process, {y: z})))
    tree = ProofTree("cut", (x, y), (left.derivation, right.derivation))
    return _mk(combined, process, tree, fresh)


def assume(name: str, s: AnnotatedSequent) -> Theorem:
    """Named axiom: the service judgement |- Ref(name, channels) :: s."""
    process = Ref(name, s.channels())
    return _mk(s, process, ProofTree("axiom", s.channels(), name=name), 0)


def rename_channels(thm: Theorem, mapping: dict[ChannelName, ChannelName]) -> Theorem:
    """Admissible interface renaming: injectively rename sequent channels.

    Sound because channel annotations are interface labels; the derivation
    keeps its shape with principal channels renamed alongside.
    """
    channels = thm.sequent.channels()
    new_channels = [mapping.get(c, c) for c in channels]
    if len(set(new_channels)) != len(new_channels):
        raise ChannelClashError(f"renaming is not injective on {channels}")
    sequent = AnnotatedSequent(
        (mapping.get(c, c), f) for c, f in thm.sequent.entries)
    process = pi.substitute(thm.process, dict(mapping))
    return _mk(sequent, process, thm.derivation.renamed(dict(mapping)), thm._fresh)


def identity_expand(f: Formula, x: ChannelName, y: ChannelName) -> Theorem:
    """|- x:f, y:~f built from the rules alone, with Id leaves at literals."""
    if x == y:
        raise ChannelClashError("identity expansion needs distinct channels")

    used = {x, y}
    counter = [0]

    def fresh_chan() -> ChannelName:
        counter[0] += 1
        c = ChannelName("c", counter[0])
        while c in used:
            counter[0] += 1
            c = ChannelName("c", counter[0])
        used.add(c)
        return c

    def build(f: Formula, x: ChannelName, y: ChannelName) -> Theorem:
        match f:
            case PosAtom() | NegAtom():
                return ax(f, x, y)
            case Tensor(a, b):
                xa, ya, xb, yb = fresh_chan(), fresh_chan(), fresh_chan(), fresh_chan()
                ta = build(a, xa, ya)
                tb = build(b, xb, yb)
                t = tensor(ta, tb, xa, xb, x)
                return par(t, ya, yb, y)
            case Par(a, b):
                xa, ya, xb, yb = fresh_chan(), fresh_chan(), fresh_chan(), fresh_chan()
                ta = build(a, xa, ya)
                tb = build(b, xb, yb)
                t = tensor(ta, tb, ya, yb, y)
                return par(t, xa, xb, x)
            case Plus(a, b):
                xa, ya, xb, yb = fresh_chan(), fresh_chan(), fresh_chan(), fresh_chan()
                ta = build(a, xa, ya)
                left = plus_l(ta, xa, b, x)
                tb = build(b, xb, yb)
                right = plus_r(tb, xb, a, x)
                return with_(left, right, ya, yb, y)
            case With(a, b):
                return build(Plus(negate(a), negate(b)), y, x)
        raise TypeError(f"not a formula: {f!r}")

    return build(f, x, y)
