"""Instantiate an extracted composition with concrete stubs plus a client,
and execute it batch or step by step, producing a replayable trace.

The simulated concurrency is modelled: one state, sequential firing, with the
scheduling policy (deterministic leftmost, seeded random, or a pick script)
resolving any nondeterminism, including internal branch choices.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .cll import ChannelName
from . import pi
from .pi import (Input, Output, Parallel, Process, Redex, Ref, Replicate,
                 Restrict, Sum, enabled_redexes, print_process, state_digest)
from .services import ProcessDef


class UnknownRefError(ValueError):
    pass


class ArityMismatchError(ValueError):
    pass


class InvalidRedexIdError(ValueError):
    pass


class StepLimitExceeded(RuntimeError):
    pass


ANONYMOUS = "process"
GLUE = "composition"


@dataclass(frozen=True)
class FiredEvent:
    step: int
    channel: ChannelName
    sender_origin: str
    receiver_origin: str
    payload: tuple[ChannelName, ...]
    pick: int  # index into the enabled list when this event fired


@dataclass(frozen=True)
class SimState:
    term: Process
    step_index: int
    history: tuple[FiredEvent, ...]

    @classmethod
    def initial(cls, term: Process) -> SimState:
        return cls(term, 0, ())

    @property
    def state_digest(self) -> str:
        """Stable hash of the canonical print; computed on first use."""
        cached = self.__dict__.get("_digest")
        if cached is None:
            cached = state_digest(self.term)
            object.__setattr__(self, "_digest", cached)
        return cached

    def enabled(self) -> list[Redex]:
        return enabled_redexes(self.term)


def stamp(p: Process, origin: str) -> Process:
    """Label every prefix of p with its defining origin."""
    match p:
        case Input(c, params, body):
            return Input(c, params, stamp(body, origin), origin=origin)
        case Output(c, args, body):
            return Output(c, args, stamp(body, origin), origin=origin)
        case Parallel(l, r):
            return Parallel(stamp(l, origin), stamp(r, origin))
        case Sum(l, r):
            return Sum(stamp(l, origin), stamp(r, origin))
        case Restrict(names, body):
            return Restrict(names, stamp(body, origin))
        case Replicate(body):
            return Replicate(stamp(body, origin))
        case _:
            return p


def instantiate(composition: Process, defs: list[ProcessDef]) -> Process:
    """Replace every Ref by its definition body, parameters substituted by the
    reference arguments (capture-avoiding).  Prefixes coming from a definition
    carry that definition's name as origin; the rest belongs to the glue.
    """
    by_name = {d.name: d for d in defs}

    def go(p: Process) -> Process:
        match p:
            case Ref(name, args):
                if name not in by_name:
                    raise UnknownRefError(f"no definition for reference {name}")
                d = by_name[name]
                if len(args) > len(d.params):
                    raise ArityMismatchError(
                        f"{name}: reference has {len(args)} arguments, "
                        f"definition takes at most {len(d.params)}")
                body = stamp(d.body, d.name)
                return pi.substitute(body, dict(zip(d.params, args)))
            case Input(c, params, body):
                return Input(c, params, go(body),
                             origin=p.origin if p.origin else GLUE)
            case Output(c, args, body):
                return Output(c, args, go(body),
                              origin=p.origin if p.origin else GLUE)
            case Parallel(l, r):
                return Parallel(go(l), go(r))
            case Sum(l, r):
                return Sum(go(l), go(r))
            case Restrict(names, body):
                return Restrict(names, go(body))
            case Replicate(body):
                return Replicate(go(body))
            case _:
                return p

    return go(composition)


def assemble_main(composition: Process, defs: list[ProcessDef],
                  client_def: ProcessDef) -> Process:
    """Client in parallel with the fully instantiated composition."""
    return Parallel(stamp(client_def.body, client_def.name),
                    instantiate(composition, defs))


def _origin_at(term: Process, path: tuple[int, ...]) -> str:
    node = pi._node_at(term, path)
    origin = getattr(node, "origin", None)
    return origin or ANONYMOUS


def _advance(state: SimState, redexes: list[Redex], redex_id: int) -> SimState:
    if not 0 <= redex_id < len(redexes):
        raise InvalidRedexIdError(
            f"redex id {redex_id} out of range (enabled: {len(redexes)})")
    r = redexes[redex_id]
    term, payload = pi._fire_at(state.term, r)
    event = FiredEvent(step=state.step_index + 1,
                       channel=r.channel,
                       sender_origin=_origin_at(state.term, r.sender_path),
                       receiver_origin=_origin_at(state.term, r.receiver_path),
                       payload=payload,
                       pick=redex_id)
    return SimState(term, state.step_index + 1, state.history + (event,))


def step(state: SimState, redex_id: int) -> SimState:
    """Fire exactly the redex at `redex_id` in the current enabled list."""
    return _advance(state, state.enabled(), redex_id)


@dataclass
class RunResult:
    events: list[FiredEvent]
    status: str  # "terminated" | "stuck"
    final: SimState
    states: list[SimState]

    @property
    def digests(self) -> list[str]:
        return [s.state_digest for s in self.states]


def _is_terminated(term: Process) -> bool:
    return pi.canonical_form(term) == "0"


def run(initial: Process, policy: str = "first", *, seed: int | None = None,
        script: list[int] | None = None, step_limit: int = 10_000) -> RunResult:
    """Fire redexes until none are enabled.

    policy: "first" picks the least redex in the deterministic order;
    "random" picks uniformly with the given seed; "script" follows the given
    pick indices, falling back to "first" once the script is exhausted.
    """
    if policy == "random":
        if seed is None:
            raise ValueError("random policy requires a seed")
        rng = random.Random(seed)
    state = SimState.initial(initial)
    states = [state]
    while True:
        redexes = enabled_redexes(state.term)
        if not redexes:
            status = "terminated" if _is_terminated(state.term) else "stuck"
            return RunResult(list(state.history), status, state, states)
        if state.step_index >= step_limit:
            raise StepLimitExceeded(f"no terminal state within {step_limit} steps")
        if policy == "first":
            pick = 0
        elif policy == "random":
            pick = rng.randrange(len(redexes))
        elif policy == "script":
            pick = script[state.step_index] if script and state.step_index < len(script) else 0
        else:
            raise ValueError(f"unknown policy {policy!r}")
        state = _advance(state, redexes, pick)
        states.append(state)


# --- reporting ------------------------------------------------------------------

@dataclass(frozen=True)
class BlockedEdge:
    channel: ChannelName
    sender_path: tuple[int, ...]
    receiver_path: tuple[int, ...]
    sender_origin: str
    receiver_origin: str


@dataclass
class EdgeReport:
    enabled: list[Redex]
    blocked: list[BlockedEdge]


def _all_prefix_sites(term: Process):
    """Every prefix occurrence with its guardedness and channel binder."""
    sites = []

    def walk(p: Process, path, env, guarded: bool):
        match p:
            case Input(c, params, body):
                sites.append(("in", c, env.get(c), len(params), path, guarded,
                              p.origin or ANONYMOUS))
                walk(body, path + (0,), env, True)
            case Output(c, args, body):
                sites.append(("out", c, env.get(c), len(args), path, guarded,
                              p.origin or ANONYMOUS))
                walk(body, path + (0,), env, True)
            case Parallel(l, r) | Sum(l, r):
                walk(l, path + (0,), env, guarded)
                walk(r, path + (1,), env, guarded)
            case Restrict(names, body):
                env2 = dict(env)
                for n in names:
                    env2[n] = path
                walk(body, path + (0,), env2, guarded)
            case Replicate(body):
                walk(body, path + (0,), env, True)
            case _:
                pass

    walk(term, (), {}, False)
    return sites


def edge_report(state: SimState) -> EdgeReport:
    """Enabled interactions plus the currently blocked sender/receiver pairs
    (same channel and arity, at least one side still guarded)."""
    enabled = state.enabled()
    enabled_keys = {(r.sender_path, r.receiver_path) for r in enabled}
    sites = _all_prefix_sites(state.term)
    blocked = []
    for snd in sites:
        if snd[0] != "out":
            continue
        for rcv in sites:
            if rcv[0] != "in" or rcv[1] != snd[1] or rcv[2] != snd[2]:
                continue
            if rcv[3] != snd[3]:
                continue
            if snd[4] == rcv[4]:
                continue
            if (snd[4], rcv[4]) in enabled_keys:
                continue
            if not (snd[5] or rcv[5]):
                continue  # unguarded non-redex pairs are not interactions
            blocked.append(BlockedEdge(snd[1], snd[4], rcv[4], snd[6], rcv[6]))
    blocked.sort(key=lambda b: (b.channel, b.sender_path, b.receiver_path))
    return EdgeReport(enabled, blocked)


def origin_views(state: SimState) -> list[dict]:
    """One card per origin holding its residual behaviour; foreign subterms
    inside a card are elided to `Origin()` placeholders."""
    term = state.term

    def origins_of(p: Process) -> frozenset[str]:
        match p:
            case Input() | Output():
                return frozenset({p.origin or ANONYMOUS}) | origins_of(p.body)
            case Parallel(l, r) | Sum(l, r):
                return origins_of(l) | origins_of(r)
            case Restrict(_, body) | Replicate(body):
                return origins_of(body)
            case _:
                return frozenset()

    def elide(p: Process, keep: str) -> Process:
        os = origins_of(p)
        if os and keep not in os:
            return Ref("-".join(sorted(os)), ())
        match p:
            case Parallel(l, r):
                return Parallel(elide(l, keep), elide(r, keep))
            case Sum(l, r):
                return Sum(elide(l, keep), elide(r, keep))
            case Restrict(names, body):
                return Restrict(names, elide(body, keep))
            case Replicate(body):
                return Replicate(elide(body, keep))
            case Input(c, params, body):
                return Input(c, params, elide(body, keep), origin=p.origin)
            case Output(c, args, body):
                return Output(c, args, elide(body, keep), origin=p.origin)
            case _:
                return p

    parts: dict[str, list[str]] = {}

    def collect(p: Process, skip: str | None):
        os = origins_of(p)
        if not os:
            return
        if len(os) == 1:
            o = next(iter(os))
            if o != skip:
                parts.setdefault(o, []).append(print_process(p))
            return
        match p:
            case Parallel(l, r) | Sum(l, r):
                collect(l, skip)
                collect(r, skip)
            case Restrict(_, body) | Replicate(body):
                collect(body, skip)
            case Input() | Output():
                o = p.origin or ANONYMOUS
                if o != skip:
                    parts.setdefault(o, []).append(print_process(elide(p, o)))
                collect(p.body, o)
            case _:
                pass

    collect(term, None)
    return [{"origin": origin, "text": " | ".join(texts)}
            for origin, texts in sorted(parts.items())]


# --- exports --------------------------------------------------------------------

def trace_document(initial: Process, result: RunResult) -> dict:
    return {
        "initial": print_process(initial),
        "events": [{
            "step": e.step,
            "channel": str(e.channel),
            "from": e.sender_origin,
            "to": e.receiver_origin,
            "payload": [str(n) for n in e.payload],
            "pick": e.pick,
        } for e in result.events],
        "terminal": result.status,
        "digests": result.digests,
    }


def trace_json(initial: Process, result: RunResult) -> str:
    return json.dumps(trace_document(initial, result), indent=2)


def trace_csv(result: RunResult) -> str:
    lines = ["step,channel,from,to,payload"]
    for e in result.events:
        payload = " ".join(str(n) for n in e.payload)
        lines.append(f"{e.step},{e.channel},{e.sender_origin},"
                     f"{e.receiver_origin},{payload}")
    return "\n".join(lines) + "\n"


def dot_export(state: SimState) -> str:
    """Graphviz view of the interaction graph: enabled edges solid black,
    blocked edges grey dashed, one node per origin."""
    report = edge_report(state)
    term = state.term
    nodes: dict[str, str] = {}

    def node_id(origin: str) -> str:
        if origin not in nodes:
            nodes[origin] = f"n{len(nodes)}"
        return nodes[origin]

    lines = ["digraph interactions {", "  rankdir=LR;",
             '  node [shape=box, style=rounded];']
    edges = []
    for r in report.enabled:
        s = node_id(_origin_at(term, r.sender_path))
        t = node_id(_origin_at(term, r.receiver_path))
        edges.append(f'  {s} -> {t} [label="{r.channel}", color=black, style=solid];')
    for b in report.blocked:
        s = node_id(b.sender_origin)
        t = node_id(b.receiver_origin)
        edges.append(f'  {s} -> {t} [label="{b.channel}", color=grey, style=dashed];')
    for origin, ident in nodes.items():
        lines.append(f'  {ident} [label="{origin}"];')
    lines.extend(edges)
    lines.append("}")
    return "\n".join(lines) + "\n"
