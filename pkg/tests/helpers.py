"""Shared test machinery: concrete formula drivers and random derivations."""

import random

from llweave import services
from llweave.cll import AnnotatedSequent, Atom, ChannelName, NegAtom, PosAtom
from llweave.kernel import (assume, ax, cut, identity_expand, par, plus_l,
                            plus_r, tensor, with_)
from llweave.pi import Process, Restrict


def perform_driver(c: ChannelName, f, prefix: str) -> Process:
    """A stub-style process performing formula f on channel c, its internal
    link channels restricted."""
    namer = services._Namer({c})
    fresh: list[ChannelName] = []
    core = services._perform(c, f, prefix, namer, fresh)
    return Restrict(tuple(fresh), core) if fresh else core


def random_formula(rng: random.Random, depth: int):
    if depth <= 1 or rng.random() < 0.35:
        name = rng.choice(["A", "B", "C"])
        return rng.choice([PosAtom(Atom(name)), NegAtom(Atom(name))])
    from llweave.cll import Par, Plus, Tensor, With
    op = rng.choice([Tensor, Par, Plus, With])
    return op(random_formula(rng, depth - 1), random_formula(rng, depth - 1))


def random_theorem(rng: random.Random, max_depth: int, tag: int):
    """A random kernel derivation with all rules reachable; every theorem has
    its own channel namespace so binary rules always apply."""
    counter = [0]

    def fresh() -> ChannelName:
        counter[0] += 1
        return ChannelName(f"g{tag}n{counter[0]}")

    def leaf():
        kind = rng.randrange(3)
        if kind == 0:
            return ax(random_formula(rng, 3), fresh(), fresh())
        if kind == 1:
            entries = [(fresh(), random_formula(rng, 2))
                       for _ in range(rng.randrange(1, 4))]
            return assume(f"Svc{rng.randrange(50)}", AnnotatedSequent(entries))
        return identity_expand(random_formula(rng, 2), fresh(), fresh())

    def build(depth: int):
        if depth <= 1 or rng.random() < 0.3:
            return leaf()
        rule = rng.randrange(6)
        if rule == 0:  # tensor
            left, right = build(depth - 1), build(depth - 1)
            x = rng.choice(left.sequent.channels())
            y = rng.choice(right.sequent.channels())
            return tensor(left, right, x, y, fresh())
        if rule == 1:  # par
            premise = build(depth - 1)
            if len(premise.sequent) < 2:
                return premise
            x, y = rng.sample(premise.sequent.channels(), 2)
            return par(premise, x, y, fresh())
        if rule == 2:  # plus, either side
            premise = build(depth - 1)
            x = rng.choice(premise.sequent.channels())
            other = random_formula(rng, 2)
            if rng.random() < 0.5:
                return plus_l(premise, x, other, fresh())
            return plus_r(premise, x, other, fresh())
        if rule == 3:  # cut against an identity expansion of the cut formula
            premise = build(depth - 1)
            x = rng.choice(premise.sequent.channels())
            f = premise.sequent.formula_of(x)
            a, b = fresh(), fresh()
            partner = identity_expand(f, a, b)
            return cut(premise, partner, x, b)
        if rule == 4:  # with over two plus branches sharing one channel
            f, g = random_formula(rng, 2), random_formula(rng, 2)
            t = fresh()
            x1, y1 = fresh(), fresh()
            left = plus_l(ax(f, x1, y1), x1, g, t)
            x2, y2 = fresh(), fresh()
            right = plus_r(ax(g, x2, y2), x2, f, t)
            return with_(left, right, y1, y2, fresh())
        return leaf()

    return build(rng.randrange(1, max_depth + 1))
