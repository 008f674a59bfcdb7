"""Service descriptions: ingestion, sequent encoding, and concrete stubs.

A service with preconditions P, inputs I, effects F, outputs O and optional
exception E encodes as the sequent

    |- P1^, .., I1^, .., ((F1 * .. ) * (O1 * .. )) + E

with one negated-atom entry per precondition and input and a single entry for
the result formula (iterated tensors nest to the right; the + E wrapper only
appears when an exception is declared; a single output with no effects stays
a bare atom).

Stubs and request clients are built from the encoded sequent by the standard
formula-directed translations: senders for positive positions, receivers for
negative ones, branch pairs for the additives.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .cll import (AnnotatedSequent, Atom, ChannelName, Formula, NegAtom, Par,
                  Plus, PosAtom, Tensor, With, negate)
from .pi import NIL, Input, Output, Parallel, Process, Restrict, Sum


class RegistryError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class DuplicateServiceError(RegistryError):
    pass


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class ServiceSpec:
    name: str
    inputs: tuple[Atom, ...] = ()
    outputs: tuple[Atom, ...] = ()
    preconditions: tuple[Atom, ...] = ()
    effects: tuple[Atom, ...] = ()
    exception: Atom | None = None

    def __post_init__(self):
        if not self.name:
            raise ValueError("service name must be nonempty")
        if not self.inputs and not self.outputs:
            raise ValueError(f"service {self.name}: needs an input or an output")


@dataclass(frozen=True)
class ProcessDef:
    """A named process with its parameters in first-free-occurrence order.

    For generated stubs the leading parameters are the interface channels of
    the encoded sequent, followed by the free payload constants.
    """

    name: str
    params: tuple[ChannelName, ...]
    body: Process


def _service_initials(name: str) -> str:
    caps = "".join(c for c in name if c.isupper())
    return caps.lower() if caps else name[0].lower()


def _word_initials(atom: Atom) -> list[str]:
    return [w[0].lower() for w in atom.name.split("_") if w]


def payload_token(atom: Atom) -> str:
    """hc for HEIGHT_CM, pu for PRICE_USD; two letters for single words."""
    words = [w for w in atom.name.split("_") if w]
    if len(words) > 1:
        return "".join(w[0].lower() for w in words)
    return words[0][:2].lower()


def _leading_atom(f: Formula) -> Atom:
    match f:
        case PosAtom(a) | NegAtom(a):
            return a
        case Tensor(l, _) | Par(l, _) | Plus(l, _) | With(l, _):
            return _leading_atom(l)
    raise TypeError(f"not a formula: {f!r}")


def _assign_channels(prefix: str, candidate_lists: list[list[str]]) -> list[ChannelName]:
    """One channel per entry: prefix + a distinguishing letter of the atom.

    Clashing entries advance together to their next word initial (so
    LENGTH_CM / LENGTH_IN become cic / cii); leftover clashes get numeric
    suffixes.
    """
    picks = [0] * len(candidate_lists)

    def name(i: int) -> str:
        return prefix + candidate_lists[i][picks[i]]

    changed = True
    while changed:
        changed = False
        groups: dict[str, list[int]] = {}
        for i in range(len(candidate_lists)):
            groups.setdefault(name(i), []).append(i)
        for members in groups.values():
            if len(members) > 1:
                for i in members:
                    if picks[i] + 1 < len(candidate_lists[i]):
                        picks[i] += 1
                        changed = True
    out: list[ChannelName] = []
    used: set[ChannelName] = set()
    for i in range(len(candidate_lists)):
        c = ChannelName(name(i))
        while c in used:
            c = c.bumped()
        used.add(c)
        out.append(c)
    return out


def _result_formula(s: ServiceSpec) -> Formula | None:
    parts = [PosAtom(a) for a in s.effects + s.outputs]
    if not parts:
        if s.exception is not None:
            raise EncodingError(
                f"service {s.name}: exception without outputs or effects")
        return None
    core = parts[-1]
    for p in reversed(parts[:-1]):
        core = Tensor(p, core)
    if s.exception is not None:
        core = Plus(core, PosAtom(s.exception))
    return core


def encode(s: ServiceSpec) -> AnnotatedSequent:
    """The CLL sequent of a service, with auto-named channels."""
    negatives = list(s.preconditions) + list(s.inputs)
    result = _result_formula(s)
    if not negatives and result is None:
        raise EncodingError(f"service {s.name}: encodes to an empty sequent")

    prefix = _service_initials(s.name)
    candidates = [_word_initials(a) for a in negatives]
    if result is not None:
        match result:
            case PosAtom(a):
                candidates.append(_word_initials(a))
            case _:
                candidates.append(["o"])
    channels = _assign_channels(prefix, candidates)

    entries: list[tuple[ChannelName, Formula]] = [
        (c, NegAtom(a)) for c, a in zip(channels, negatives)]
    if result is not None:
        entries.append((channels[-1], result))
    return AnnotatedSequent(entries)


class _Namer:
    """Deterministic fresh lowercase tokens, bumping suffixes on collision."""

    def __init__(self, used):
        self.used = set(used)

    def take(self, base: str) -> ChannelName:
        c = ChannelName(base)
        while c in self.used:
            c = c.bumped()
        self.used.add(c)
        return c


def _perform(c: ChannelName, f: Formula, prefix: str, namer: _Namer,
             fresh_channels: list[ChannelName]) -> Process:
    """The concrete process performing formula f on channel c.

    Positive atoms send a payload, negative atoms receive one; tensors send a
    fresh channel pair, pars receive one; plus receives a branch-channel pair
    and picks a side, with sends one and offers both.  Fresh channels created
    here are appended to `fresh_channels` for the caller to bind (stubs) or
    leave free (clients).
    """
    match f:
        case PosAtom(a):
            return Output(c, (namer.take(payload_token(a)),), NIL)
        case NegAtom(a):
            return Input(c, (namer.take(payload_token(a)),), NIL)
        case Tensor(a, b):
            ca = namer.take(prefix + payload_token(_leading_atom(a))[0])
            cb = namer.take(prefix + payload_token(_leading_atom(b))[0])
            fresh_channels.extend((ca, cb))
            return Output(c, (ca, cb),
                          Parallel(_perform(ca, a, prefix, namer, fresh_channels),
                                   _perform(cb, b, prefix, namer, fresh_channels)))
        case Par(a, b):
            ca = namer.take(prefix + payload_token(_leading_atom(a))[0])
            cb = namer.take(prefix + payload_token(_leading_atom(b))[0])
            return Input(c, (ca, cb),
                         Parallel(_perform(ca, a, prefix, namer, fresh_channels),
                                  _perform(cb, b, prefix, namer, fresh_channels)))
        case Plus(a, b):
            ca = namer.take(prefix + payload_token(_leading_atom(a))[0])
            cb = namer.take(prefix + payload_token(_leading_atom(b))[0])
            fresh_channels.extend((ca, cb))
            u, v = namer.take("u"), namer.take("v")
            return Input(c, (u, v),
                         Sum(Output(u, (ca,), _perform(ca, a, prefix, namer, fresh_channels)),
                             Output(v, (cb,), _perform(cb, b, prefix, namer, fresh_channels))))
        case With(a, b):
            cu = namer.take(payload_token(_leading_atom(a)) + "c")
            cv = namer.take(payload_token(_leading_atom(b)) + "c")
            fresh_channels.extend((cu, cv))
            x, y = namer.take("x"), namer.take("y")
            return Output(c, (cu, cv),
                          Sum(Input(cu, (x,), _perform(x, a, prefix, namer, fresh_channels)),
                              Input(cv, (y,), _perform(y, b, prefix, namer, fresh_channels))))
    raise TypeError(f"not a formula: {f!r}")


def _free_occurrence_order(p: Process) -> tuple[ChannelName, ...]:
    order: list[ChannelName] = []

    def walk(p: Process, bound: frozenset[ChannelName]):
        def note(n: ChannelName):
            if n not in bound and n not in order:
                order.append(n)

        match p:
            case Input(c, params, body):
                note(c)
                walk(body, bound | frozenset(params))
            case Output(c, args, body):
                note(c)
                for a in args:
                    note(a)
                walk(body, bound)
            case Parallel(l, r) | Sum(l, r):
                walk(l, bound)
                walk(r, bound)
            case Restrict(names, body):
                walk(body, bound | frozenset(names))
            case _:
                pass

    walk(p, frozenset())
    return tuple(order)


def stub(s: ServiceSpec) -> ProcessDef:
    """A concrete black-box body for s: receive every negative entry in
    sequent order, then perform the result formula, its fresh link channels
    restricted just around the result part (as the worked services do)."""
    seq = encode(s)
    prefix = _service_initials(s.name)
    namer = _Namer(seq.channel_set())

    entries = list(seq.entries)
    result_entry = None
    if entries and not isinstance(entries[-1][1], NegAtom):
        result_entry = entries[-1]
        entries = entries[:-1]

    if result_entry is None:
        body: Process = NIL
    else:
        c, f = result_entry
        fresh: list[ChannelName] = []
        core = _perform(c, f, prefix, namer, fresh)
        body = Restrict(tuple(fresh), core) if fresh else core

    for c, f in reversed(entries):
        assert isinstance(f, NegAtom)
        body = Input(c, (namer.take(payload_token(f.atom)),), body)

    return ProcessDef(s.name, _free_occurrence_order(body), body)


def client(goal: ServiceSpec) -> ProcessDef:
    """The request client: sends a fresh payload on every goal input channel,
    then interacts dually with the result (for a plus result it sends a fresh
    continuation pair and offers a sum over both branches).  Its link names
    stay free, as the worked request does."""
    seq = encode(goal)
    prefix = _service_initials(goal.name)
    namer = _Namer(seq.channel_set())

    entries = list(seq.entries)
    result_entry = None
    if entries and not isinstance(entries[-1][1], NegAtom):
        result_entry = entries[-1]
        entries = entries[:-1]

    if result_entry is None:
        body: Process = NIL
    else:
        c, f = result_entry
        fresh: list[ChannelName] = []
        body = _perform(c, negate(f), prefix, namer, fresh)
        # client link channels stay free: they are interface constants

    for c, f in reversed(entries):
        assert isinstance(f, NegAtom)
        body = Output(c, (namer.take(payload_token(f.atom)),), body)

    return ProcessDef("Request", _free_occurrence_order(body), body)


# --- registry file format -----------------------------------------------------
#
# Line-oriented: a `service <Name>` header followed by optional
# `in:`, `out:`, `pre:`, `eff:`, `exc:` lines; `#` comments; blocks separated
# by blank lines.  A request uses the same syntax under `request <Name>`.

_HEADER = re.compile(r"^(service|request)\s+([A-Za-z][A-Za-z0-9_]*)\s*$")
_FIELD = re.compile(r"^(in|out|pre|eff|exc)\s*:\s*(.*)$")
_ATOM = re.compile(r"^[A-Z][A-Z0-9_]*$")


def _parse_atoms(text: str, line: int) -> tuple[Atom, ...]:
    atoms = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise RegistryError("empty atom name", line)
        if not _ATOM.match(part):
            raise RegistryError(f"bad atom name {part!r}", line)
        atoms.append(Atom(part))
    return tuple(atoms)


def parse_document(text: str) -> list[tuple[str, ServiceSpec]]:
    blocks: list[tuple[str, ServiceSpec]] = []
    kind: str | None = None
    name: str | None = None
    header_line = 0
    fields: dict[str, tuple[Atom, ...]] = {}

    def close():
        nonlocal kind, name, fields
        if kind is None:
            return
        exc = fields.get("exc", ())
        if len(exc) > 1:
            raise RegistryError(f"{name}: more than one exception atom", header_line)
        try:
            spec = ServiceSpec(name=name,
                               inputs=fields.get("in", ()),
                               outputs=fields.get("out", ()),
                               preconditions=fields.get("pre", ()),
                               effects=fields.get("eff", ()),
                               exception=exc[0] if exc else None)
        except ValueError as e:
            raise RegistryError(str(e), header_line) from None
        blocks.append((kind, spec))
        kind, name, fields = None, None, {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _HEADER.match(line)
        if m:
            close()
            kind, name = m.group(1), m.group(2)
            header_line = lineno
            continue
        m = _FIELD.match(line)
        if m:
            if kind is None:
                raise RegistryError("field outside a service block", lineno)
            key = m.group(1)
            if key in fields:
                raise RegistryError(f"duplicate {key!r} line", lineno)
            fields[key] = _parse_atoms(m.group(2), lineno)
            continue
        raise RegistryError(f"unrecognised line {line!r}", lineno)
    close()
    return blocks


def load_registry(text: str) -> list[ServiceSpec]:
    """Ordered service list; order is significant for composer tie-breaking."""
    specs = []
    seen: set[str] = set()
    for kind, spec in parse_document(text):
        if kind != "service":
            raise RegistryError(f"{spec.name}: request blocks do not belong in a registry")
        if spec.name in seen:
            raise DuplicateServiceError(f"duplicate service name {spec.name!r}")
        seen.add(spec.name)
        specs.append(spec)
    return specs


def load_request(text: str) -> ServiceSpec:
    blocks = parse_document(text)
    requests = [spec for kind, spec in blocks if kind == "request"]
    if len(requests) != 1 or len(blocks) != 1:
        raise RegistryError("a request document holds exactly one request block")
    return requests[0]
