"""llweave: service composition as linear-logic proof search, with
pi-calculus extraction and interactive execution."""

from .cll import (AnnotatedSequent, Atom, ChannelName, Formula, NegAtom, Par,
                  Plus, PosAtom, Tensor, With, negate, parse_formula,
                  print_formula, sequent_union)
from .pi import (Process, Redex, enabled_redexes, fire, free_names,
                 parse_process, print_process, struct_congruent, substitute)
from .kernel import Theorem, ProofTree, ax, assume, cut, identity_expand, par, \
    plus_l, plus_r, tensor, with_
from .composer import CompositionResult, SearchLimits, compose, prove
from .services import ProcessDef, ServiceSpec, client, encode, load_registry, \
    load_request, stub
from .sim import FiredEvent, SimState, edge_report, instantiate, run, step

__version__ = "0.1.0"
