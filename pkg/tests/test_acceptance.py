"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criterion 1's connective counts are asserted in two parts: the attainable
sub-claims pass, while the literal tensor/par counts are an expected failure
(see the decisions ledger: a six-leaf derivation admits five two-premise
rules, so the stated multiset {tensor x1, par x2, with x1, plus x2, cut x4}
cannot coexist with five service leaves plus one identity leaf; under the
restricted cut rule the deterministic proof realises cut x4 with one par and
no tensor).
"""

import itertools
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from llweave import composer, kernel, pi, services, sim
from llweave.cll import (Atom, NegAtom, Par, Plus, PosAtom, Tensor, With,
                         chan, negate)
from llweave.kernel import ax, cut, identity_expand, plus_l, plus_r, tensor, with_
from llweave.pi import (NIL, Parallel, Process, enabled_redexes, fire,
                        parse_process, struct_congruent)
from helpers import perform_driver, random_theorem

DATA = Path(__file__).parent.parent / "data" / "ski"
GOLDEN = Path(__file__).parent / "golden"

A = PosAtom(Atom("A"))
B = PosAtom(Atom("B"))
C = PosAtom(Atom("C"))


def report(criterion: str, ok: bool, detail: str = ""):
    mark = "PASS" if ok else "FAIL"
    line = f"[acceptance] {mark} {criterion}"
    if detail:
        line += f" ({detail})"
    print(line)
    return ok


@pytest.fixture(scope="module")
def ski():
    registry = services.load_registry((DATA / "registry.services").read_text())
    request = services.load_request((DATA / "request.services").read_text())
    return registry, request


@pytest.fixture(scope="module")
def ski_composed(ski):
    registry, request = ski
    started = time.monotonic()
    result = composer.compose(registry, request)
    return result, time.monotonic() - started


@pytest.fixture(scope="module")
def ski_main(ski, ski_composed):
    registry, request = ski
    result, _ = ski_composed
    return sim.assemble_main(result.theorem.process,
                             [services.stub(s) for s in registry],
                             services.client(request))


# --- criterion 1: Ski proof shape ---------------------------------------------

def test_c1_ski_proof_shape(ski_composed):
    result, elapsed = ski_composed
    counts = result.theorem.derivation.rule_multiset()
    ok = (elapsed < 10.0
          and counts["axiom"] == 5
          and counts["id"] == 1
          and counts["cut"] == 4
          and counts["with"] == 1
          and counts["plus_l"] + counts["plus_r"] == 2)
    assert report("C1 ski proof shape (5 service leaves, 1 id, cut x4, "
                  "with x1, plus x2, < 10 s)", ok,
                  f"elapsed {elapsed:.2f}s, counts {dict(counts)}")


@pytest.mark.xfail(strict=True,
                   reason="spec defect: 6 leaves admit 5 binary rules, so "
                          "tensor x1 + with x1 + cut x4 is unsatisfiable; "
                          "see decisions ledger")
def test_c1_connective_counts_as_stated(ski_composed):
    result, _ = ski_composed
    counts = result.theorem.derivation.rule_multiset()
    stated = counts["tensor"] == 1 and counts["par"] == 2 and counts["cut"] == 4
    report("C1 connective counts exactly as stated (tensor x1, par x2)",
           stated, f"actual tensor x{counts['tensor']}, par x{counts['par']}")
    assert stated


# --- criterion 2: extraction fidelity -------------------------------------------

def test_c2_extraction_fidelity(ski, ski_composed):
    registry, request = ski
    result, _ = ski_composed
    process = result.theorem.process

    free_ok = pi.free_names(process) == services.encode(request).channel_set()

    refs = set()

    def collect_refs(p: Process):
        match p:
            case pi.Ref(name, _):
                refs.add(name)
            case pi.Input(_, _, body) | pi.Output(_, _, body):
                collect_refs(body)
            case pi.Parallel(l, r) | pi.Sum(l, r):
                collect_refs(l)
                collect_refs(r)
            case pi.Restrict(_, body) | pi.Replicate(body):
                collect_refs(body)
            case _:
                pass

    collect_refs(process)
    refs_ok = refs == {s.name for s in registry}

    from test_composer import find_length_chain
    fragment = find_length_chain(process)
    chain_ok = fragment is not None
    if chain_ok:
        expected = parse_process("nu z.(SelectLength(slh,slw,z) | Cm2Inch(z,cii))")
        renamed = pi.substitute(
            fragment, dict(zip(sorted(pi.free_names(fragment)),
                               map(chan, ["slh", "slw", "cii"]))))
        chain_ok = struct_congruent(renamed, expected)

    golden_path = GOLDEN / "ski_composition.pi"
    actual = pi.print_process(process)
    golden_ok = actual == golden_path.read_text().strip()

    ok = free_ok and refs_ok and chain_ok and golden_ok
    assert report("C2 extraction fidelity (free names, 5 refs, length-chain "
                  "subterm, golden print)", ok,
                  f"free={free_ok} refs={refs_ok} chain={chain_ok} "
                  f"golden={golden_ok}")


# --- criterion 3: end-to-end execution ------------------------------------------

def test_c3_end_to_end(ski_main):
    first = sim.run(ski_main, "first")
    count_ok = first.status == "terminated" and 15 <= len(first.events) <= 19
    price_ok = any(str(e.channel) == "pnc" for e in first.events) \
        and not any(str(e.channel) == "exc" for e in first.events)

    # scripted run through the exception summand
    state = sim.SimState.initial(ski_main)
    while state.enabled():
        redexes = state.enabled()
        if len(redexes) == 2 and redexes[0].channel.base.startswith("u"):
            state = sim.step(state, 1)
        else:
            state = sim.step(state, 0)
    exc_ok = sim._is_terminated(state.term) \
        and any(str(e.channel) == "exc" for e in state.history) \
        and not any(str(e.channel) == "pnc" for e in state.history)

    # plus-exclusivity across policies: never both continuations
    exclusive = True
    for seed in range(5):
        r = sim.run(ski_main, "random", seed=seed)
        seen = {str(e.channel) for e in r.events} & {"pnc", "exc"}
        exclusive = exclusive and len(seen) == 1 and r.status == "terminated"

    ok = count_ok and exc_ok and exclusive
    assert report("C3 end-to-end execution (17+-2 reductions, exception "
                  "routing, plus-exclusivity)", ok,
                  f"first-run {len(first.events)} reductions, "
                  f"exception={exc_ok}, exclusive={exclusive}")


# --- criterion 4: free-names law fuzz -------------------------------------------

def test_c4_free_names_law():
    rng = random.Random(41100)
    failures = 0
    for i in range(1_000):
        thm = random_theorem(rng, max_depth=6, tag=i)
        if pi.free_names(thm.process) != thm.sequent.channel_set():
            failures += 1
    assert report("C4 free-names law (1000 random derivations, depth <= 6)",
                  failures == 0, f"{failures} violations")


# --- criterion 5: cut vs reduction micro-suite ----------------------------------

def observations(term: Process, depth: int = 10) -> frozenset:
    """Brute-force reduction search: canonical forms of every quiescent state
    reachable within `depth` steps.  Raises if the bound is hit."""
    seen: set[str] = set()
    quiescent: set[str] = set()

    def explore(t: Process, left: int):
        c = pi.canonical_form(t)
        if c in seen:
            return
        seen.add(c)
        redexes = enabled_redexes(t)
        if not redexes:
            quiescent.add(c)
            return
        if left == 0:
            raise RuntimeError("depth bound reached with redexes remaining")
        for r in redexes:
            explore(fire(t, r), left - 1)

    explore(term, depth)
    return frozenset(quiescent)


def observing_driver(c, f, tag: str) -> Process:
    """Performs f on c; every payload received at a literal is re-emitted on
    a unique observation channel, so quiescent states reveal what arrived."""
    counter = itertools.count(1)

    def go(c, f) -> Process:
        match f:
            case PosAtom(a):
                payload = chan(f"{tag}p{next(counter)}")
                return pi.Output(c, (payload,), NIL)
            case NegAtom(_):
                got = chan("got")
                obs = chan(f"o{tag}{next(counter)}")
                return pi.Input(c, (got,), pi.Output(obs, (got,), NIL))
            case Tensor(a, b):
                ca, cb = chan(f"{tag}l{next(counter)}"), chan(f"{tag}r{next(counter)}")
                return pi.Restrict((ca, cb), pi.Output(
                    c, (ca, cb), Parallel(go(ca, a), go(cb, b))))
            case Par(a, b):
                ca, cb = chan(f"{tag}l{next(counter)}"), chan(f"{tag}r{next(counter)}")
                return pi.Input(c, (ca, cb), Parallel(go(ca, a), go(cb, b)))
            case Plus(a, b):
                ca, cb = chan(f"{tag}l{next(counter)}"), chan(f"{tag}r{next(counter)}")
                u, v = chan(f"{tag}u{next(counter)}"), chan(f"{tag}v{next(counter)}")
                return pi.Restrict((ca, cb), pi.Input(c, (u, v), pi.Sum(
                    pi.Output(u, (ca,), go(ca, a)),
                    pi.Output(v, (cb,), go(cb, b)))))
            case With(a, b):
                cu, cv = chan(f"{tag}u{next(counter)}"), chan(f"{tag}v{next(counter)}")
                x, y = chan(f"{tag}x{next(counter)}"), chan(f"{tag}y{next(counter)}")
                return pi.Restrict((cu, cv), pi.Output(c, (cu, cv), pi.Sum(
                    pi.Input(cu, (x,), go(x, a)),
                    pi.Input(cv, (y,), go(y, b)))))
        raise TypeError(f"not a formula: {f!r}")

    return go(c, f)


def drive(thm: kernel.Theorem) -> Process:
    main = thm.process
    for c, f in thm.sequent.sorted_entries():
        main = Parallel(main, observing_driver(c, negate(f), f"d{c}"))
    return main


def micro_suite():
    nA = NegAtom(Atom("A"))

    # (a) atom buffer chain
    chain = cut(ax(A, chan("x"), chan("y")), ax(A, chan("p"), chan("q")),
                chan("x"), chan("q"))
    direct = ax(A, chan("p"), chan("y"))
    yield "buffer chain", chain, direct

    # (b) tensor against par
    two = tensor(ax(A, chan("x1"), chan("y1")), ax(B, chan("x2"), chan("y2")),
                 chan("x1"), chan("x2"), chan("z"))
    expansion = identity_expand(Tensor(A, B), chan("p"), chan("q"))
    tensored = cut(two, expansion, chan("z"), chan("q"))
    direct = tensor(ax(A, chan("x3"), chan("y1")), ax(B, chan("x4"), chan("y2")),
                    chan("x3"), chan("x4"), chan("p"))
    yield "tensor vs par", tensored, direct

    # (c) plus against with
    chosen = plus_l(ax(A, chan("x"), chan("y")), chan("x"), B, chan("z"))
    expansion = identity_expand(Plus(A, B), chan("p"), chan("q"))
    routed = cut(chosen, expansion, chan("z"), chan("q"))
    direct = plus_l(ax(A, chan("x2"), chan("y")), chan("x2"), B, chan("p"))
    yield "plus vs with", routed, direct

    # (d) mixed: a cut plus-branch feeding one side of a tensor
    inner = plus_l(ax(A, chan("xa"), chan("ya")), chan("xa"), C, chan("ta"))
    routed_inner = cut(inner, identity_expand(Plus(A, C), chan("p1"), chan("q1")),
                       chan("ta"), chan("q1"))
    mixed1 = tensor(routed_inner, ax(B, chan("xb"), chan("yb")), chan("p1"),
                    chan("xb"), chan("z"))
    direct_inner = plus_l(ax(A, chan("xc"), chan("ya")), chan("xc"), C, chan("tb"))
    direct = tensor(direct_inner, ax(B, chan("xd"), chan("yb")), chan("tb"),
                    chan("xd"), chan("z"))
    yield "plus under tensor", mixed1, direct

    # (e) mixed: a with offer routed through its dual plus
    def with_offer(z, w, salt):
        l = plus_l(ax(A, chan(f"m{salt}"), chan(f"ya{salt}")),
                   chan(f"m{salt}"), B, z)
        r = plus_r(ax(B, chan(f"n{salt}"), chan(f"yb{salt}")),
                   chan(f"n{salt}"), A, z)
        return with_(l, r, chan(f"ya{salt}"), chan(f"yb{salt}"), w)

    offer = with_offer(chan("t"), chan("w"), 1)
    expansion = identity_expand(Plus(A, B), chan("p"), chan("q"))
    routed = cut(expansion, offer, chan("p"), chan("w"))
    direct = with_offer(chan("t"), chan("q"), 2)
    yield "with vs plus", routed, direct


def test_c5_cut_reduction_microsuite():
    passed = 0
    details = []
    for name, with_cut, cut_free in micro_suite():
        assert with_cut.sequent == cut_free.sequent, name
        obs_cut = observations(drive(with_cut))
        obs_free = observations(drive(cut_free))
        same = obs_cut == obs_free
        passed += same
        details.append(f"{name}: {'ok' if same else 'MISMATCH'}")
    assert report("C5 cut~reduction micro-suite (5 proof pairs, depth <= 10)",
                  passed == 5, "; ".join(details))


# --- criterion 6: identity expansion, exhaustive --------------------------------

def test_c6_identity_expansion_exhaustive():
    atoms = [A, B, C]
    ops = [Tensor, Par, Plus, With]
    depth2 = list(atoms) + [op(l, r) for op in ops
                            for l, r in itertools.product(atoms, repeat=2)]
    formulas = list(atoms) + [op(l, r) for op in ops
                              for l, r in itertools.product(depth2, repeat=2)]
    seen: set = set()
    unique = [f for f in formulas if not (f in seen or seen.add(f))]

    started = time.monotonic()
    failures = 0
    for f in unique:
        thm = identity_expand(f, chan("x"), chan("y"))
        main = Parallel(thm.process,
                        Parallel(perform_driver(chan("x"), negate(f), "dx"),
                                 perform_driver(chan("y"), f, "dy")))
        if sim.run(main, "first").status != "terminated":
            failures += 1
    elapsed = time.monotonic() - started
    ok = failures == 0 and elapsed < 60.0
    assert report("C6 identity expansion exhaustive (depth <= 3 over 3 atoms)",
                  ok, f"{len(unique)} formulas, {failures} failures, "
                      f"{elapsed:.1f}s")


def test_c6_payload_direction():
    # negative-side payloads surface on the positive side: spot-checked by
    # instrumenting the positive driver
    for f in (A, Tensor(A, B), Plus(A, B)):
        thm = identity_expand(f, chan("x"), chan("y"))
        main = Parallel(thm.process,
                        Parallel(observing_driver(chan("x"), negate(f), "dx"),
                                 perform_driver(chan("y"), f, "dy")))
        finals = observations(main, depth=12)
        assert finals, f
        assert all("odx" in term for term in finals), (f, finals)


# --- criterion 7: reduction-engine conformance -----------------------------------

def test_c7_reduction_conformance():
    arity_ok = enabled_redexes(parse_process("x(a,b).0 | x<c>.0")) == []

    term = parse_process("(y(c).k<m>.0 + x(a).0) | x<b>.0")
    fired = fire(term, enabled_redexes(term)[0])
    discard_ok = fired == NIL

    congruence_ok = (
        struct_congruent(parse_process("x(a).0 | 0"), parse_process("x(a).0"))
        and struct_congruent(parse_process("x(a).0 + 0"), parse_process("x(a).0"))
        and struct_congruent(parse_process("!x(a).0"),
                             parse_process("x(a).0 | !x(a).0")))

    ok = arity_ok and discard_ok and congruence_ok
    assert report("C7 reduction-engine conformance (arity, sum discard, "
                  "congruence axioms)", ok,
                  f"arity={arity_ok} discard={discard_ok} "
                  f"congruence={congruence_ok}")


# --- criterion 8: client/stub duality --------------------------------------------

def test_c8_client_stub_duality():
    rng = random.Random(90125)
    atoms = ["AX", "BX", "CX", "DX", "EX", "FX", "GX", "HX"]
    failures = 0
    for case in range(50):
        rng.shuffle(atoms)
        n_in = rng.randrange(0, 5)
        n_out = rng.randrange(0 if n_in else 1, 4)
        spec = services.ServiceSpec(
            name=f"Case{case}",
            inputs=tuple(Atom(a) for a in atoms[:n_in]),
            outputs=tuple(Atom(a) for a in atoms[n_in:n_in + n_out]),
            exception=(Atom(atoms[-1]) if n_out and rng.random() < 0.5 else None))
        main = Parallel(services.client(spec).body, services.stub(spec).body)
        for policy, seed in (("first", None), ("random", 101),
                             ("random", 102), ("random", 103)):
            result = sim.run(main, policy, seed=seed)
            if result.status != "terminated":
                failures += 1
    assert report("C8 client/stub duality (50 random specs, first + 3 seeds)",
                  failures == 0, f"{failures} non-terminating runs")