"""Backward proof search over available-service axioms.

The strategy is iterative deepening with focusing-style phases: leaf closing
(service match, identity) is tried first, the invertible rules (par, with)
are applied eagerly at no depth cost, and the non-invertible choices (plus
branch, tensor context split, cut) spend depth.  Cut formulas are restricted
to the positive entries of the available axioms and their subformulas, which
keeps the search space finite per depth; context splits are enumerated
smallest-first.  Expansion order is fixed, so identical inputs give identical
proofs and extractions.
"""

from __future__ import annotations

import itertools
import time
from collections import Counter
from dataclasses import dataclass, field

from . import kernel
from .cll import (AnnotatedSequent, ChannelName, Formula, NegAtom, Par, Plus,
                  PosAtom, Tensor, With, negate, print_formula, subformulas)
from .kernel import Theorem
from .services import ServiceSpec, encode


class NotComposableError(Exception):
    def __init__(self, message: str, deepest_subgoal: str | None = None):
        if deepest_subgoal:
            message = f"{message}; deepest failed subgoal: |- {deepest_subgoal}"
        super().__init__(message)
        self.deepest_subgoal = deepest_subgoal


class SearchTimeout(Exception):
    def __init__(self, elapsed: float, deepest_subgoal: str | None = None):
        super().__init__(f"proof search timed out after {elapsed:.2f}s")
        self.deepest_subgoal = deepest_subgoal


@dataclass(frozen=True)
class SearchLimits:
    max_depth: int = 12
    max_cuts: int = 6
    timeout: float = 30.0

    def __post_init__(self):
        if self.max_depth <= 0 or self.max_cuts <= 0 or self.timeout <= 0:
            raise ValueError("search limits must be positive")


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    cuts_introduced: int = 0
    elapsed: float = 0.0


@dataclass
class CompositionResult:
    theorem: Theorem
    services_used: Counter
    stats: SearchStats
    goal_sequent: AnnotatedSequent
    renaming: dict[ChannelName, ChannelName] = field(default_factory=dict)


def _is_atom(f: Formula) -> bool:
    return isinstance(f, (PosAtom, NegAtom))


class _Search:
    def __init__(self, axioms: list[Theorem], limits: SearchLimits,
                 reserved: set[ChannelName]):
        self.axioms = axioms
        self.limits = limits
        self.deadline = time.monotonic() + limits.timeout
        self.started = time.monotonic()
        self.stats = SearchStats()
        # cut candidates: positive entries of the axioms and their subformulas
        seen: set[Formula] = set()
        self.candidates: list[Formula] = []
        for thm in axioms:
            for _, f in thm.sequent.entries:
                if isinstance(f, NegAtom):
                    continue
                for sub in subformulas(f):
                    if sub not in seen:
                        seen.add(sub)
                        self.candidates.append(sub)
        self.axiom_shapes = [thm.sequent.formula_multiset() for thm in axioms]
        self.success_memo: dict[tuple, Theorem] = {}
        self.fail_memo: dict[tuple, list[tuple[int, int]]] = {}
        self.deepest_fail: tuple[int, str] | None = None
        self.used: set[ChannelName] = set(reserved)
        for thm in axioms:
            self.used |= thm.sequent.channel_set()
        self._chan_counter = 0
        self._alloc: list[ChannelName] = []

    def fresh_chan(self) -> ChannelName:
        self._chan_counter += 1
        c = ChannelName("x", self._chan_counter)
        while c in self.used:
            self._chan_counter += 1
            c = ChannelName("x", self._chan_counter)
        self.used.add(c)
        self._alloc.append(c)
        return c

    def _mark(self) -> tuple[int, int]:
        return self._chan_counter, len(self._alloc)

    def _release(self, mark: tuple[int, int]):
        # failed attempts hand their fresh names back, keeping extractions tidy
        counter, n = mark
        while len(self._alloc) > n:
            self.used.discard(self._alloc.pop())
        self._chan_counter = counter

    def prove(self, goal: AnnotatedSequent) -> Theorem:
        for depth in range(self.limits.max_depth + 1):
            thm = self.search(goal, depth, self.limits.max_cuts, frozenset(), 0)
            if thm is not None:
                self.stats.elapsed = time.monotonic() - self.started
                return thm
        self.stats.elapsed = time.monotonic() - self.started
        deepest = self.deepest_fail[1] if self.deepest_fail else str(goal)
        raise NotComposableError("search exhausted within limits", deepest)

    def _note_fail(self, goal: AnnotatedSequent, level: int):
        if self.deepest_fail is None or level > self.deepest_fail[0]:
            self.deepest_fail = (level, str(goal))

    def search(self, goal: AnnotatedSequent, depth: int, cuts: int,
               path: frozenset, level: int) -> Theorem | None:
        key = goal.formula_multiset()
        if key in path:
            return None  # an ancestor already poses this goal: no progress
        cached = self.success_memo.get((key, depth, cuts))
        if cached is not None:
            # a proof of this shape at exactly this budget: reuse, renamed
            return kernel.rename_channels(cached, _match(cached.sequent, goal))
        thm = self._expand(goal, key, depth, cuts, path, level)
        if thm is not None:
            self.success_memo[(key, depth, cuts)] = thm
        return thm

    def _expand(self, goal: AnnotatedSequent, key: tuple, depth: int,
                cuts: int, path: frozenset, level: int) -> Theorem | None:
        self.stats.nodes_expanded += 1
        if self.stats.nodes_expanded % 256 == 0 and time.monotonic() > self.deadline:
            self.stats.elapsed = time.monotonic() - self.started
            deepest = self.deepest_fail[1] if self.deepest_fail else None
            raise SearchTimeout(self.stats.elapsed, deepest)

        for d, c in self.fail_memo.get(key, ()):
            if d >= depth and c >= cuts:
                return None

        entries = goal.sorted_entries()

        # leaf closing: service axioms (file order), then identity at literals
        for shape, thm in zip(self.axiom_shapes, self.axioms):
            if shape != key:
                continue
            renaming = _match(thm.sequent, goal)
            if renaming is not None:
                return kernel.rename_channels(thm, renaming)
        if len(entries) == 2:
            (c1, f1), (c2, f2) = entries
            if _is_atom(f1) and negate(f1) == f2:
                return kernel.ax(f1, c1, c2)

        # invertible phase: no depth cost, no choice point
        for c, f in entries:
            if isinstance(f, Par):
                mark = self._mark()
                x, y = self.fresh_chan(), self.fresh_chan()
                premise = goal.without(c).extended(x, f.left).extended(y, f.right)
                sub = self.search(premise, depth, cuts, path, level + 1)
                if sub is None:
                    self._release(mark)
                    self._note_fail(goal, level)
                    return None
                return kernel.par(sub, x, y, c)
        for c, f in entries:
            if isinstance(f, With):
                mark = self._mark()
                x, y = self.fresh_chan(), self.fresh_chan()
                rest = goal.without(c)
                left = self.search(rest.extended(x, f.left), depth, cuts,
                                   path, level + 1)
                right = left and self.search(rest.extended(y, f.right), depth,
                                             cuts, path, level + 1)
                if not right:
                    self._release(mark)
                    self._note_fail(goal, level)
                    return None
                return kernel.with_(left, right, x, y, c)

        if depth == 0:
            self._note_fail(goal, level)
            return None
        path = path | {key}

        # plus: branch choice, left before right
        for c, f in entries:
            if not isinstance(f, Plus):
                continue
            rest = goal.without(c)
            mark = self._mark()
            x = self.fresh_chan()
            sub = self.search(rest.extended(x, f.left), depth - 1, cuts,
                              path, level + 1)
            if sub is not None:
                return kernel.plus_l(sub, x, f.right, c)
            self._release(mark)
            y = self.fresh_chan()
            sub = self.search(rest.extended(y, f.right), depth - 1, cuts,
                              path, level + 1)
            if sub is not None:
                return kernel.plus_r(sub, y, f.left, c)
            self._release(mark)

        # tensor: context splits, smallest left context first
        for c, f in entries:
            if not isinstance(f, Tensor):
                continue
            rest = tuple(e for e in entries if e[0] != c)
            for left_part, right_part in _splits(rest):
                mark = self._mark()
                x, y = self.fresh_chan(), self.fresh_chan()
                lgoal = AnnotatedSequent._trusted(left_part).extended(x, f.left)
                left = self.search(lgoal, depth - 1, cuts, path, level + 1)
                if left is None:
                    self._release(mark)
                    continue
                rgoal = AnnotatedSequent._trusted(right_part).extended(y, f.right)
                right = self.search(rgoal, depth - 1, cuts, path, level + 1)
                if right is not None:
                    return kernel.tensor(left, right, x, y, c)
                self._release(mark)

        # cut: restricted candidate formulas, smallest left context first
        if cuts > 0:
            all_entries = tuple(entries)
            for cand in self.candidates:
                dual = negate(cand)
                for left_part, right_part in _splits(all_entries):
                    mark = self._mark()
                    x, y = self.fresh_chan(), self.fresh_chan()
                    lgoal = AnnotatedSequent._trusted(left_part).extended(x, cand)
                    left = self.search(lgoal, depth - 1, cuts - 1, path, level + 1)
                    if left is None:
                        self._release(mark)
                        continue
                    rgoal = AnnotatedSequent._trusted(right_part).extended(y, dual)
                    right = self.search(rgoal, depth - 1, cuts - 1, path, level + 1)
                    if right is not None:
                        return kernel.cut(left, right, x, y)
                    self._release(mark)

        self._note_fail(goal, level)
        memo = self.fail_memo.setdefault(key, [])
        memo[:] = [(d, c) for d, c in memo if not (d <= depth and c <= cuts)]
        memo.append((depth, cuts))
        return None


def _splits(entries):
    """Ordered two-way splits of the entry list, by left-context size."""
    n = len(entries)
    for size in range(n + 1):
        for combo in itertools.combinations(range(n), size):
            chosen = set(combo)
            left = tuple(entries[i] for i in range(n) if i in chosen)
            right = tuple(entries[i] for i in range(n) if i not in chosen)
            yield left, right


def _match(axiom: AnnotatedSequent, goal: AnnotatedSequent):
    """Channel renaming turning the axiom sequent into the goal, or None.

    Entries are aligned formula by formula; repeated formulas are aligned in
    channel order, which is sound because any alignment yields the same
    judgement up to renaming.
    """
    if len(axiom) != len(goal):
        return None
    if axiom.formula_multiset() != goal.formula_multiset():
        return None

    def keyed(seq: AnnotatedSequent):
        return sorted(((print_formula(f), c) for c, f in seq.entries))

    renaming: dict[ChannelName, ChannelName] = {}
    for (_, ax_chan), (_, goal_chan) in zip(keyed(axiom), keyed(goal)):
        renaming[ax_chan] = goal_chan
    return renaming


def prove(goal: AnnotatedSequent, axioms: list[Theorem],
          limits: SearchLimits = SearchLimits()) -> Theorem:
    """Certified theorem for the goal sequent, or NotComposableError."""
    search = _Search(axioms, limits, set(goal.channel_set()))
    return search.prove(goal)


def compose(available: list[ServiceSpec], goal: ServiceSpec,
            limits: SearchLimits = SearchLimits()) -> CompositionResult:
    """Prove the goal service from the available ones and extract the
    composite process."""
    names = [s.name for s in available]
    if len(set(names)) != len(names):
        raise ValueError("service names must be distinct")
    axioms = [kernel.assume(s.name, encode(s)) for s in available]
    target = encode(goal)
    search = _Search(axioms, limits, set(target.channel_set()))
    theorem = search.prove(target)
    assert theorem.sequent == target
    search.stats.cuts_introduced = theorem.derivation.rule_multiset().get("cut", 0)
    services_used = theorem.derivation.axiom_leaves()
    return CompositionResult(theorem=theorem, services_used=services_used,
                             stats=search.stats, goal_sequent=target)
