"""Kernel rule tests: certified sequents, extracted processes, free-names law."""

import random

import pytest

from llweave import pi, sim
from llweave.cll import (AnnotatedSequent, Atom, ChannelClashError, NegAtom,
                         Par, Plus, PosAtom, Tensor, With, chan, negate,
                         parse_formula)
from llweave.kernel import (ContextMismatchError, CutFormulaMismatchError,
                            KernelError, MissingChannelError, NotFreshError,
                            Theorem, assume, ax, cut, identity_expand, par,
                            plus_l, plus_r, tensor, with_)
from llweave.pi import (NIL, Input, Output, Parallel, Restrict, Sum,
                        free_names, parse_process, struct_congruent)

A = PosAtom(Atom("A"))
B = PosAtom(Atom("B"))
C = PosAtom(Atom("C"))
EXE = PosAtom(Atom("EXE"))
PN = PosAtom(Atom("PN"))
PU = PosAtom(Atom("PU"))


def sequent(*pairs):
    return AnnotatedSequent([(chan(c), f) for c, f in pairs])


class TestAx:
    def test_axiom_buffer(self):
        thm = ax(EXE, chan("x"), chan("y"))
        assert thm.sequent == sequent(("x", EXE), ("y", NegAtom(Atom("EXE"))))
        assert struct_congruent(thm.process, parse_process("y(a).x<a>.0"))

    def test_double_negation_stable(self):
        thm = ax(negate(negate(A)), chan("x"), chan("y"))
        assert thm.sequent == ax(A, chan("x"), chan("y")).sequent

    def test_channel_clash(self):
        with pytest.raises(ChannelClashError):
            ax(A, chan("x"), chan("x"))

    def test_free_names_random(self):
        rng = random.Random(2)
        from test_cll import random_formula
        for _ in range(200):
            f = random_formula(rng, 5)
            thm = ax(f, chan("p"), chan("q"))
            assert free_names(thm.process) == frozenset({chan("p"), chan("q")})


class TestTensor:
    def test_translation_shape(self):
        left = assume("F", sequent(("w", NegAtom(Atom("G1"))), ("x", A)))
        right = assume("G", sequent(("u", NegAtom(Atom("D1"))), ("y", B)))
        thm = tensor(left, right, chan("x"), chan("y"), chan("z"))
        assert thm.sequent == sequent(("w", NegAtom(Atom("G1"))),
                                      ("u", NegAtom(Atom("D1"))),
                                      ("z", Tensor(A, B)))
        expected = parse_process("nu x,y.z<x,y>.(F(w,x) | G(u,y))")
        assert struct_congruent(thm.process, expected)

    def test_smallest_instance(self):
        t1 = ax(A, chan("x"), chan("yp"))
        t2 = ax(B, chan("y"), chan("up"))
        thm = tensor(t1, t2, chan("x"), chan("y"), chan("z"))
        assert thm.sequent == sequent(("yp", NegAtom(Atom("A"))),
                                      ("up", NegAtom(Atom("B"))),
                                      ("z", Tensor(A, B)))

    def test_composite_over_model_and_length_chain(self):
        # the model picker tensored with the length chain yields the combined
        # (BRAND*MODEL)*LENGTH_IN provider over all four request inputs
        pl, sl, hc, wk, lc = (NegAtom(Atom(n))
                              for n in ("PL", "SL", "HC", "WK", "LC"))
        selmod = assume("SelMod", sequent(
            ("smp", pl), ("sms", sl),
            ("smo", Tensor(PosAtom(Atom("BR")), PosAtom(Atom("MO"))))))
        chain = cut(assume("SelLen", sequent(("slh", hc), ("slw", wk),
                                             ("sll", PosAtom(Atom("LC"))))),
                    assume("Cm2Inch", sequent(("cic", lc),
                                              ("cii", PosAtom(Atom("LI"))))),
                    chan("sll"), chan("cic"))
        combined = tensor(selmod, chain, chan("smo"), chan("cii"), chan("z"))
        assert combined.sequent == sequent(
            ("smp", pl), ("sms", sl), ("slh", hc), ("slw", wk),
            ("z", parse_formula("(BR * MO) * LI")))
        assert free_names(combined.process) == combined.sequent.channel_set()

    def test_missing_channel(self):
        t1 = ax(A, chan("x"), chan("y"))
        t2 = ax(B, chan("p"), chan("q"))
        with pytest.raises(MissingChannelError):
            tensor(t1, t2, chan("nope"), chan("p"), chan("z"))

    def test_z_not_fresh(self):
        t1 = ax(A, chan("x"), chan("y"))
        t2 = ax(B, chan("p"), chan("q"))
        with pytest.raises(NotFreshError):
            tensor(t1, t2, chan("x"), chan("p"), chan("y"))

    def test_overlapping_contexts_rejected(self):
        t1 = ax(A, chan("x"), chan("shared"))
        t2 = ax(B, chan("p"), chan("shared"))
        with pytest.raises(ChannelClashError):
            tensor(t1, t2, chan("x"), chan("p"), chan("z"))


class TestPar:
    def test_shape(self):
        premise = assume("F", sequent(("w", C), ("x", A), ("y", B)))
        thm = par(premise, chan("x"), chan("y"), chan("z"))
        assert thm.sequent == sequent(("w", C), ("z", Par(A, B)))
        assert thm.process == Input(chan("z"), (chan("x"), chan("y")),
                                    premise.process)

    def test_binding_structure(self):
        premise = assume("F", sequent(("x", A), ("y", B)))
        thm = par(premise, chan("x"), chan("y"), chan("z"))
        assert free_names(thm.process) == frozenset({chan("z")})

    def test_selski_input_bundle(self):
        # two nested pars fold the three service inputs of the ski picker
        li, br, mo = (NegAtom(Atom(n)) for n in ("LI", "BR", "MO"))
        svc = assume("SelSki", sequent(("ssl", li), ("ssb", br), ("ssm", mo),
                                       ("sso", Plus(PU, EXE))))
        once = par(svc, chan("ssb"), chan("ssm"), chan("q1"))
        twice = par(once, chan("q1"), chan("ssl"), chan("q2"))
        assert twice.sequent.formula_of(chan("q2")) == Par(Par(br, mo), li)
        assert twice.sequent.formula_of(chan("q2")) == \
            parse_formula("((BR * MO) * LI)^")


class TestPlus:
    def test_left_over_currency_conversion(self):
        usd2nok = assume("Usd2Nok", sequent(("unu", NegAtom(Atom("PU"))),
                                            ("unn", PN)))
        thm = plus_l(usd2nok, chan("unn"), EXE, chan("z"))
        assert thm.sequent == sequent(("unu", NegAtom(Atom("PU"))),
                                      ("z", Plus(PN, EXE)))

    def test_right_over_identity(self):
        buffer = ax(EXE, chan("x"), chan("y"))
        thm = plus_r(buffer, chan("x"), PN, chan("z"))
        assert thm.sequent == sequent(("y", NegAtom(Atom("EXE"))),
                                      ("z", Plus(PN, EXE)))

    def test_ignored_branch_channel_not_free(self):
        premise = ax(A, chan("x"), chan("y"))
        thm = plus_l(premise, chan("x"), B, chan("z"))
        assert free_names(thm.process) == frozenset({chan("y"), chan("z")})


class TestWith:
    def make_branches(self):
        left = plus_l(assume("U", sequent(("j", NegAtom(Atom("PU"))), ("k", PN))),
                      chan("k"), EXE, chan("t"))
        right = plus_r(ax(EXE, chan("m"), chan("n")), chan("m"), PN, chan("t"))
        return left, right

    def test_shared_context_must_match_channels(self):
        left, right = self.make_branches()
        # same shared formula under a different channel: rejected
        bad_right = plus_r(ax(EXE, chan("m"), chan("n")), chan("m"), PN,
                           chan("t2"))
        with pytest.raises(ContextMismatchError):
            with_(left, bad_right, chan("j"), chan("n"), chan("w"))

    def test_shape(self):
        left, right = self.make_branches()
        thm = with_(left, right, chan("j"), chan("n"), chan("w"))
        assert thm.sequent == sequent(
            ("t", Plus(PN, EXE)),
            ("w", With(NegAtom(Atom("PU")), NegAtom(Atom("EXE")))))
        stripped = thm.process
        assert isinstance(stripped, Restrict)
        assert isinstance(stripped.body, Output)
        assert isinstance(stripped.body.body, Sum)

    def test_offers_exactly_one_branch(self):
        # micro simulation: whichever summand fires, the other vanishes
        lthm = ax(A, chan("x1"), chan("c"))
        rthm = ax(A, chan("x2"), chan("c"))
        thm = with_(lthm, rthm, chan("x1"), chan("x2"), chan("w"))
        # drive: send the branch pair, choose the left branch, feed the buffer
        driver = parse_process("w(u,v).u<go>.(go(r).0 | c<pay>.0)")
        main = Parallel(thm.process, driver)
        result = sim.run(main, "first")
        assert result.status == "terminated"
        branch_events = [e for e in result.events if str(e.channel).startswith("u")]
        assert len(branch_events) == 1
        assert not [e for e in result.events if str(e.channel).startswith("v")]


class TestCut:
    def test_length_chain(self):
        hc, wk, lc = (NegAtom(Atom(n)) for n in ("HC", "WK", "LC"))
        li = PosAtom(Atom("LI"))
        sellen = assume("SelLen", sequent(("slh", hc), ("slw", wk),
                                          ("sll", PosAtom(Atom("LC")))))
        cm2inch = assume("Cm2Inch", sequent(("cic", lc), ("cii", li)))
        thm = cut(sellen, cm2inch, chan("sll"), chan("cic"))
        assert thm.sequent == sequent(("slh", hc), ("slw", wk), ("cii", li))
        expected = parse_process("nu z.(SelLen(slh,slw,z) | Cm2Inch(z,cii))")
        assert struct_congruent(thm.process, expected)

    def test_buffer_chain_runs_to_nil(self):
        one = ax(A, chan("x"), chan("y"))
        two = ax(A, chan("p"), chan("q"))
        thm = cut(one, two, chan("x"), chan("q"))
        assert thm.sequent == sequent(("y", NegAtom(Atom("A"))), ("p", A))
        driver = parse_process("y<m>.0 | p(r).0")
        result = sim.run(Parallel(thm.process, driver), "first")
        assert result.status == "terminated"
        assert len(result.events) == 3

    def test_formula_mismatch(self):
        one = ax(A, chan("x"), chan("y"))
        two = ax(B, chan("p"), chan("q"))
        with pytest.raises(CutFormulaMismatchError, match="A"):
            cut(one, two, chan("x"), chan("q"))


class TestAssume:
    def test_service_judgement(self):
        s = sequent(("slh", NegAtom(Atom("HC"))), ("slw", NegAtom(Atom("WK"))),
                    ("sll", PosAtom(Atom("LC"))))
        thm = assume("SelLen", s)
        assert thm.process == pi.Ref("SelLen", (chan("slh"), chan("slw"),
                                                chan("sll")))
        assert thm.derivation.rule == "axiom"
        assert thm.derivation.name == "SelLen"

    def test_empty_sequent(self):
        thm = assume("Noop", AnnotatedSequent())
        assert thm.process == pi.Ref("Noop", ())

    def test_all_ski_services_loadable(self):
        from pathlib import Path
        from llweave import services
        registry = services.load_registry(
            Path(__file__).parent.parent.joinpath(
                "data/ski/registry.services").read_text())
        assert len(registry) == 5
        for spec in registry:
            thm = assume(spec.name, services.encode(spec))
            assert free_names(thm.process) == thm.sequent.channel_set()


class TestIdentityExpand:
    def test_atom_is_plain_axiom(self):
        thm = identity_expand(A, chan("x"), chan("y"))
        assert thm.derivation.rule == "id"
        assert thm.sequent == ax(A, chan("x"), chan("y")).sequent

    def test_tensor_rule_count(self):
        thm = identity_expand(Tensor(A, B), chan("x"), chan("y"))
        counts = thm.derivation.rule_multiset()
        assert counts == {"tensor": 1, "par": 1, "id": 2}

    def test_forwarder_small(self):
        # payload injected on the negative side arrives at the positive side
        thm = identity_expand(A, chan("x"), chan("y"))
        driver = parse_process("y<m>.0 | x(r).seen<r>.0")
        result = sim.run(Parallel(thm.process, driver), "first")
        assert result.status == "stuck"  # only seen<m> remains
        final = result.final.term
        assert struct_congruent(final, parse_process("seen<m>.0"))

    def test_forwarder_compound(self):
        from helpers import perform_driver
        for f in (Tensor(A, B), Plus(A, B), Par(A, B), With(A, B),
                  Tensor(Plus(A, B), C)):
            thm = identity_expand(f, chan("x"), chan("y"))
            main = Parallel(thm.process,
                            Parallel(perform_driver(chan("x"), negate(f), "dx"),
                                     perform_driver(chan("y"), f, "dy")))
            result = sim.run(main, "first")
            assert result.status == "terminated", pi.print_process(main)


class TestTheoremDiscipline:
    def test_cannot_construct_directly(self):
        with pytest.raises(KernelError):
            Theorem(object(), AnnotatedSequent(), NIL, None, 0)

    def test_immutable(self):
        thm = ax(A, chan("x"), chan("y"))
        with pytest.raises(AttributeError):
            thm.sequent = AnnotatedSequent()

    def test_proof_tree_json(self):
        thm = plus_l(ax(A, chan("x"), chan("y")), chan("x"), B, chan("z"))
        doc = thm.derivation.to_json()
        assert doc["rule"] == "plus_l"
        assert doc["premises"][0]["rule"] == "id"
        assert doc["principal"] == ["x", "z"]


class TestFreeNamesLaw:
    def test_fuzz_1000_derivations(self):
        from helpers import random_theorem
        rng = random.Random(60550)
        for i in range(1_000):
            thm = random_theorem(rng, max_depth=6, tag=i)
            assert free_names(thm.process) == thm.sequent.channel_set(), \
                f"law violated at case {i}: {thm.sequent}"
