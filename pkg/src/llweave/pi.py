"""Polyadic pi-calculus terms with capture-avoiding substitution, structural
congruence, and the communication reduction step.

Reduction may happen under parallel composition and restriction but not under
prefixes or replication.  Firing a redex whose payload names are restricted
between the two agents widens those restrictions first (scope extrusion), so
mobile names behave as expected.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

from .cll import ChannelName


class ProcessSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class StaleRedexError(ValueError):
    """The redex is not enabled in the given process."""


class Process:
    __slots__ = ()

    def __str__(self) -> str:
        return print_process(self)


@dataclass(frozen=True)
class Nil(Process):
    pass


NIL = Nil()


@dataclass(frozen=True)
class Input(Process):
    chan: ChannelName
    params: tuple[ChannelName, ...]
    body: Process
    origin: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(set(self.params)) != len(self.params):
            raise ValueError(f"input parameters not pairwise distinct: {self.params}")


@dataclass(frozen=True)
class Output(Process):
    chan: ChannelName
    args: tuple[ChannelName, ...]
    body: Process
    origin: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Parallel(Process):
    left: Process
    right: Process


@dataclass(frozen=True)
class Sum(Process):
    left: Process
    right: Process


@dataclass(frozen=True)
class Restrict(Process):
    names: tuple[ChannelName, ...]
    body: Process

    def __post_init__(self):
        if not self.names:
            raise ValueError("restriction binds at least one name")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"restricted names not pairwise distinct: {self.names}")


@dataclass(frozen=True)
class Replicate(Process):
    body: Process


@dataclass(frozen=True)
class Ref(Process):
    name: str
    args: tuple[ChannelName, ...]


def parallel(*parts: Process) -> Process:
    """Left-assoc parallel composition of the given parts, dropping nils."""
    parts = [p for p in parts if not isinstance(p, Nil)]
    if not parts:
        return NIL
    out = parts[0]
    for p in parts[1:]:
        out = Parallel(out, p)
    return out


def free_names(p: Process) -> frozenset[ChannelName]:
    # memoised per node; sound because terms are immutable
    cached = p.__dict__.get("_free")
    if cached is not None:
        return cached
    match p:
        case Nil():
            out = frozenset()
        case Input(c, params, body):
            out = frozenset({c}) | (free_names(body) - frozenset(params))
        case Output(c, args, body):
            out = frozenset({c}) | frozenset(args) | free_names(body)
        case Parallel(l, r) | Sum(l, r):
            out = free_names(l) | free_names(r)
        case Restrict(names, body):
            out = free_names(body) - frozenset(names)
        case Replicate(body):
            out = free_names(body)
        case Ref(_, args):
            out = frozenset(args)
        case _:
            raise TypeError(f"not a process: {p!r}")
    object.__setattr__(p, "_free", out)
    return out


def _freshen(bound: tuple[ChannelName, ...], avoid: set[ChannelName]):
    """Rename the bound names that collide with `avoid`, by suffix bumps.

    Returns (new_bound, renaming).  Chosen names also avoid the original
    bound names and each other, keeping the simultaneous substitution sound.
    """
    forbidden = set(avoid)
    original = set(bound)
    renaming: dict[ChannelName, ChannelName] = {}
    fresh: list[ChannelName] = []
    for b in bound:
        if b in forbidden:
            cand = b.bumped()
            while cand in forbidden or cand in original:
                cand = cand.bumped()
            renaming[b] = cand
            fresh.append(cand)
            forbidden.add(cand)
        else:
            fresh.append(b)
            forbidden.add(b)
    return tuple(fresh), renaming


def substitute(p: Process, mapping: dict[ChannelName, ChannelName]) -> Process:
    """Simultaneous capture-avoiding renaming of free names."""

    def sub_name(n: ChannelName, m) -> ChannelName:
        return m.get(n, n)

    def go(p: Process, m: dict[ChannelName, ChannelName]) -> Process:
        if not m:
            return p
        match p:
            case Nil():
                return p
            case Ref(name, args):
                return Ref(name, tuple(sub_name(a, m) for a in args))
            case Output(c, args, body):
                return Output(sub_name(c, m), tuple(sub_name(a, m) for a in args),
                              go(body, m), origin=p.origin)
            case Input(c, params, body):
                inner = {k: v for k, v in m.items() if k not in params}
                inner = {k: v for k, v in inner.items() if k in free_names(body)}
                avoid = {sub_name(n, inner) for n in free_names(body) if n not in params}
                params2, ren = _freshen(params, avoid)
                return Input(sub_name(c, m), params2, go(body, {**inner, **ren}),
                             origin=p.origin)
            case Restrict(names, body):
                inner = {k: v for k, v in m.items() if k not in names}
                inner = {k: v for k, v in inner.items() if k in free_names(body)}
                avoid = {sub_name(n, inner) for n in free_names(body) if n not in names}
                names2, ren = _freshen(names, avoid)
                return Restrict(names2, go(body, {**inner, **ren}))
            case Parallel(l, r):
                return Parallel(go(l, m), go(r, m))
            case Sum(l, r):
                return Sum(go(l, m), go(r, m))
            case Replicate(body):
                return Replicate(go(body, m))
        raise TypeError(f"not a process: {p!r}")

    return go(p, dict(mapping))


# --- structural congruence ---------------------------------------------------

def _flatten(p: Process, cls) -> list[Process]:
    if isinstance(p, cls):
        return _flatten(p.left, cls) + _flatten(p.right, cls)
    return [p]


def _rebuild(parts: list[Process], cls) -> Process:
    if not parts:
        return NIL
    out = parts[0]
    for p in parts[1:]:
        out = cls(out, p)
    return out


def _normalise(p: Process) -> Process:
    """Unit laws, sum/parallel flattening, restriction extrusion and merging."""
    match p:
        case Nil() | Ref(_, _):
            return p
        case Input(c, params, body):
            return Input(c, params, _normalise(body), origin=p.origin)
        case Output(c, args, body):
            return Output(c, args, _normalise(body), origin=p.origin)
        case Replicate(body):
            return Replicate(_normalise(body))
        case Sum(_, _):
            parts = [q for part in _flatten(p, Sum)
                     for q in [_normalise(part)] if not isinstance(q, Nil)]
            flat: list[Process] = []
            for q in parts:
                flat.extend(_flatten(q, Sum))
            return _rebuild(flat, Sum)
        case Parallel(_, _):
            raw = [q for part in _flatten(p, Parallel)
                   for q in [_normalise(part)] if not isinstance(q, Nil)]
            # scope extrusion: hoist component restrictions over the whole
            # composition, alpha-renaming when a name would be captured
            hoisted: list[ChannelName] = []
            comps: list[Process] = []
            for i, q in enumerate(raw):
                while isinstance(q, Restrict):
                    avoid = set(hoisted) | free_names(q)
                    for o in raw[i + 1:] + comps:
                        avoid |= free_names(o)
                    names2, ren = _freshen(q.names, avoid)
                    body = substitute(q.body, ren) if ren else q.body
                    hoisted.extend(names2)
                    q = _normalise(body)
                comps.extend(c for c in _flatten(q, Parallel)
                             if not isinstance(c, Nil))
            core = _rebuild(comps, Parallel)
            if hoisted:
                return _normalise_restrict(tuple(hoisted), core)
            return core
        case Restrict(names, body):
            return _normalise_restrict(names, _normalise(body))
    raise TypeError(f"not a process: {p!r}")


def _normalise_restrict(names: tuple[ChannelName, ...], body: Process) -> Process:
    while isinstance(body, Restrict):
        inner, ren = _freshen(body.names, set(names))
        body2 = substitute(body.body, ren) if ren else body.body
        names = names + inner
        body = body2
    if isinstance(body, Nil):
        return NIL
    fn = free_names(body)
    live = [n for n in names if n in fn]
    if not live:
        return body
    return Restrict(tuple(live), body)


def _canon_render(p: Process, env: dict[ChannelName, str], counter: list[int]) -> str:
    """Alpha-invariant rendering: bound names become numbered placeholders
    assigned in traversal order; parallel/sum branches are sorted."""

    def name(n: ChannelName) -> str:
        return env.get(n, f"'{n}'")

    match p:
        case Nil():
            return "0"
        case Ref(rn, args):
            return f"{rn}({','.join(name(a) for a in args)})"
        case Output(c, args, body):
            return f"{name(c)}<{','.join(name(a) for a in args)}>.{_canon_render(body, env, counter)}"
        case Input(c, params, body):
            env2 = dict(env)
            for prm in params:
                counter[0] += 1
                env2[prm] = f"#{counter[0]}"
            return (f"{name(c)}({','.join(env2[prm] for prm in params)})."
                    f"{_canon_render(body, env2, counter)}")
        case Replicate(body):
            return f"!({_canon_render(body, env, counter)})"
        case Sum(_, _) | Parallel(_, _):
            cls = type(p)
            sep = " + " if cls is Sum else " | "
            parts = _flatten(p, cls)
            # coarse pass fixes a name-independent order, then binder ids are
            # assigned in that order and the final renders sorted again
            coarse = sorted(range(len(parts)),
                            key=lambda i: _canon_render(parts[i], env, [counter[0]]))
            rendered = [_canon_render(parts[i], env, counter) for i in coarse]
            return "(" + sep.join(sorted(rendered)) + ")"
        case Restrict(names, body):
            # deterministic binder order: first use in the body
            order = _first_use_order(body, set(names))
            env2 = dict(env)
            for n in order:
                counter[0] += 1
                env2[n] = f"#{counter[0]}"
            return f"nu[{len(order)}].{_canon_render(body, env2, counter)}"
    raise TypeError(f"not a process: {p!r}")


def _first_use_order(p: Process, names: set[ChannelName]) -> list[ChannelName]:
    order: list[ChannelName] = []

    def note(n: ChannelName):
        if n in names and n not in order:
            order.append(n)

    def walk(p: Process, shadowed: frozenset[ChannelName]):
        match p:
            case Nil():
                pass
            case Ref(_, args):
                for a in args:
                    if a not in shadowed:
                        note(a)
            case Output(c, args, body):
                if c not in shadowed:
                    note(c)
                for a in args:
                    if a not in shadowed:
                        note(a)
                walk(body, shadowed)
            case Input(c, params, body):
                if c not in shadowed:
                    note(c)
                walk(body, shadowed | frozenset(params))
            case Restrict(ns, body):
                walk(body, shadowed | frozenset(ns))
            case Parallel(l, r) | Sum(l, r):
                walk(l, shadowed)
                walk(r, shadowed)
            case Replicate(body):
                walk(body, shadowed)

    walk(p, frozenset())
    for n in sorted(names):
        if n not in order:
            order.append(n)
    return order


def canonical_form(p: Process) -> str:
    """Canonical string deciding structural congruence minus replication.

    Equal strings mean congruent terms under the unit, commutativity,
    associativity, scope-extrusion and alpha axioms.
    """
    return _canon_render(_normalise(p), {}, [0])


def state_digest(p: Process) -> str:
    return hashlib.sha256(canonical_form(p).encode()).hexdigest()[:16]


def _unfoldings(p: Process, k: int) -> set[str]:
    """Canonical forms reachable by at most k replication unfoldings."""

    def unfold_once(q: Process) -> list[Process]:
        out = []
        match q:
            case Replicate(body):
                out.append(Parallel(body, q))
                out.extend(Replicate(b) for b in unfold_once(body))
            case Input(c, params, body):
                out.extend(Input(c, params, b, origin=q.origin) for b in unfold_once(body))
            case Output(c, args, body):
                out.extend(Output(c, args, b, origin=q.origin) for b in unfold_once(body))
            case Parallel(l, r):
                out.extend(Parallel(l2, r) for l2 in unfold_once(l))
                out.extend(Parallel(l, r2) for r2 in unfold_once(r))
            case Sum(l, r):
                out.extend(Sum(l2, r) for l2 in unfold_once(l))
                out.extend(Sum(l, r2) for r2 in unfold_once(r))
            case Restrict(names, body):
                out.extend(Restrict(names, b) for b in unfold_once(body))
        return out

    seen = {canonical_form(p)}
    frontier = [p]
    for _ in range(k):
        nxt = []
        for q in frontier:
            for q2 in unfold_once(q):
                c = canonical_form(q2)
                if c not in seen:
                    seen.add(c)
                    nxt.append(q2)
        frontier = nxt
    return seen


def struct_congruent(p: Process, q: Process, *, replication_bound: int = 2) -> bool:
    """Structural congruence, with replication unfolded at most
    `replication_bound` times on each side."""
    cp, cq = canonical_form(p), canonical_form(q)
    if cp == cq:
        return True
    has_repl = "!(" in cp or "!(" in cq
    if not has_repl:
        return False
    return bool(_unfoldings(p, replication_bound) & _unfoldings(q, replication_bound))


# --- reduction ----------------------------------------------------------------

@dataclass(frozen=True)
class Redex:
    channel: ChannelName
    sender_path: tuple[int, ...]
    receiver_path: tuple[int, ...]
    arity: int


@dataclass(frozen=True)
class _Agent:
    kind: str  # "in" | "out"
    chan: ChannelName
    binder: tuple[int, ...] | None  # path of the binding Restrict, None if free
    arity: int
    path: tuple[int, ...]


def _collect_agents(p: Process) -> list[_Agent]:
    agents: list[_Agent] = []

    def walk(p: Process, path: tuple[int, ...], env: dict[ChannelName, tuple[int, ...]]):
        match p:
            case Input(c, params, _):
                agents.append(_Agent("in", c, env.get(c), len(params), path))
            case Output(c, args, _):
                agents.append(_Agent("out", c, env.get(c), len(args), path))
            case Parallel(l, r) | Sum(l, r):
                walk(l, path + (0,), env)
                walk(r, path + (1,), env)
            case Restrict(names, body):
                env2 = dict(env)
                for n in names:
                    env2[n] = path
                walk(body, path + (0,), env2)
            case _:
                pass  # Nil, Ref, Replicate: no enabled prefixes

    walk(p, (), {})
    return agents


def _node_at(p: Process, path: tuple[int, ...]) -> Process:
    for i in path:
        match p:
            case Parallel(l, r) | Sum(l, r):
                p = l if i == 0 else r
            case Restrict(_, body):
                p = body
            case _:
                raise ValueError(f"bad path {path}")
    return p


def _diverge_node(p: Process, a: tuple[int, ...], b: tuple[int, ...]) -> Process:
    k = 0
    while k < len(a) and k < len(b) and a[k] == b[k]:
        k += 1
    return _node_at(p, a[:k])


def enabled_redexes(p: Process) -> list[Redex]:
    """All communication redexes: an unguarded sender and receiver on the same
    channel (resolved to the same binder), equal arity, in parallel positions.
    Deterministically ordered by channel, then sender path, then receiver path.
    """
    agents = _collect_agents(p)
    redexes = []
    for snd in agents:
        if snd.kind != "out":
            continue
        for rcv in agents:
            if rcv.kind != "in" or rcv.chan != snd.chan or rcv.binder != snd.binder:
                continue
            if rcv.arity != snd.arity:
                continue
            if not isinstance(_diverge_node(p, snd.path, rcv.path), Parallel):
                continue
            redexes.append(Redex(snd.chan, snd.path, rcv.path, snd.arity))
    redexes.sort(key=lambda r: (r.channel, r.sender_path, r.receiver_path))
    return redexes


def _prune(p: Process) -> Process:
    """Drop syntactic nil units introduced by a reduction step."""
    match p:
        case Parallel(l, r):
            l, r = _prune(l), _prune(r)
            if isinstance(l, Nil):
                return r
            if isinstance(r, Nil):
                return l
            return Parallel(l, r)
        case Sum(l, r):
            l, r = _prune(l), _prune(r)
            if isinstance(l, Nil):
                return r
            if isinstance(r, Nil):
                return l
            return Sum(l, r)
        case Restrict(names, body):
            body = _prune(body)
            if isinstance(body, Nil):
                return NIL
            return Restrict(names, body)
        case _:
            return p


def _binder_of(p: Process, path: tuple[int, ...], name: ChannelName):
    """Path of the Restrict binding `name` at position `path`, or None."""
    binder = None
    node = p
    for k, i in enumerate(path):
        if isinstance(node, Restrict) and name in node.names:
            binder = path[:k]
        node = _node_at(node, (i,))
    return binder


def _all_names(p: Process) -> frozenset[ChannelName]:
    match p:
        case Nil():
            return frozenset()
        case Ref(_, args):
            return frozenset(args)
        case Input(c, params, body):
            return frozenset({c}) | frozenset(params) | _all_names(body)
        case Output(c, args, body):
            return frozenset({c}) | frozenset(args) | _all_names(body)
        case Parallel(l, r) | Sum(l, r):
            return _all_names(l) | _all_names(r)
        case Restrict(names, body):
            return frozenset(names) | _all_names(body)
        case Replicate(body):
            return _all_names(body)
    raise TypeError(f"not a process: {p!r}")


def fire(p: Process, r: Redex) -> Process:
    """Apply the communication rule at redex r.

    The receiver body is instantiated with the sent names, all other summands
    of both sum contexts are discarded, and restrictions on the payload that
    do not already cover the receiver are widened (scope extrusion).
    """
    return fire_detailed(p, r)[0]


def fire_detailed(p: Process, r: Redex) -> tuple[Process, tuple[ChannelName, ...]]:
    """Like fire, also returning the payload names as delivered (after any
    extrusion renaming)."""
    if r not in enabled_redexes(p):
        raise StaleRedexError(f"redex on {r.channel} is not enabled")
    return _fire_at(p, r)


def _fire_at(p: Process, r: Redex) -> tuple[Process, tuple[ChannelName, ...]]:
    # caller guarantees r is currently enabled

    sender_path, recv_path = r.sender_path, r.receiver_path
    lca_len = 0
    while (lca_len < len(sender_path) and lca_len < len(recv_path)
           and sender_path[lca_len] == recv_path[lca_len]):
        lca_len += 1

    sender = _node_at(p, sender_path)
    assert isinstance(sender, Output)

    # payload names bound strictly below the lca never reach the receiver;
    # rename them fresh, drop their binders, and re-restrict at the root
    escaping: list[tuple[tuple[int, ...], ChannelName]] = []
    for a in dict.fromkeys(sender.args):
        binder = _binder_of(p, sender_path, a)
        if binder is not None and len(binder) >= lca_len:
            escaping.append((binder, a))
    escaping.sort(key=lambda e: len(e[0]), reverse=True)  # deepest first

    extruded: list[ChannelName] = []
    if escaping:
        taken = set(_all_names(p)) | {n for _, n in escaping}
        for binder, name in escaping:
            cand = name.bumped()
            while cand in taken:
                cand = cand.bumped()
            taken.add(cand)
            extruded.append(cand)
            p, removed = _drop_binder(p, binder, name, cand)
            if removed:
                # the empty Restrict vanished; paths through it shorten
                sender_path = _shorten(sender_path, binder)
                recv_path = _shorten(recv_path, binder)
        sender = _node_at(p, sender_path)

    receiver = _node_at(p, recv_path)
    assert isinstance(receiver, Input) and isinstance(sender, Output)
    mapping = dict(zip(receiver.params, sender.args))
    new_receiver = substitute(receiver.body, mapping)
    new_sender = sender.body

    def on_path(path: tuple[int, ...]) -> bool:
        return sender_path[:len(path)] == path or recv_path[:len(path)] == path

    def rebuild(node: Process, path: tuple[int, ...]) -> Process:
        if not on_path(path):
            return node
        if path == sender_path:
            return new_sender
        if path == recv_path:
            return new_receiver
        match node:
            case Sum(l, r_):
                # the fired branch replaces the whole sum
                idx = 0 if on_path(path + (0,)) else 1
                return rebuild(l if idx == 0 else r_, path + (idx,))
            case Parallel(l, r_):
                return Parallel(rebuild(l, path + (0,)), rebuild(r_, path + (1,)))
            case Restrict(names, body):
                return Restrict(names, rebuild(body, path + (0,)))
        raise ValueError("redex path crosses a prefix")

    result = _prune(rebuild(p, ()))
    if extruded:
        live = [n for n in extruded if n in free_names(result)]
        if live:
            result = Restrict(tuple(live), result)
    return result, sender.args


def _shorten(path: tuple[int, ...], binder: tuple[int, ...]) -> tuple[int, ...]:
    if path[:len(binder)] == binder and len(path) > len(binder):
        return binder + path[len(binder) + 1:]
    return path


def _drop_binder(p: Process, binder: tuple[int, ...], name: ChannelName,
                 fresh: ChannelName):
    """Rename `name` to `fresh` inside its binder and unbind it there.
    Returns (new process, binder_removed)."""

    def go(node: Process, path: tuple[int, ...]):
        if path == binder:
            assert isinstance(node, Restrict) and name in node.names
            body = substitute(node.body, {name: fresh})
            rest = tuple(n for n in node.names if n != name)
            if rest:
                return Restrict(rest, body), False
            return body, True
        i = binder[len(path)]
        match node:
            case Parallel(l, r):
                if i == 0:
                    sub, rm = go(l, path + (0,))
                    return Parallel(sub, r), rm
                sub, rm = go(r, path + (1,))
                return Parallel(l, sub), rm
            case Sum(l, r):
                if i == 0:
                    sub, rm = go(l, path + (0,))
                    return Sum(sub, r), rm
                sub, rm = go(r, path + (1,))
                return Sum(l, sub), rm
            case Restrict(names, body):
                sub, rm = go(body, path + (0,))
                return Restrict(names, sub), rm
        raise ValueError("binder path crosses a prefix")

    return go(p, ())


# --- process text grammar -----------------------------------------------------
#
# 0; input x(a,b).P; output x<a,b>.P; parallel P | Q; sum P + Q;
# restriction nu x,y.P; replication !P; reference Name(x,y);
# precedence . > ! > + > |; parentheses allowed.

_PTOKEN = re.compile(r"\s*([A-Za-z][A-Za-z0-9_]*|0|[()<>.,|+!])")


class _ProcessParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens: list[tuple[str, int]] = []
        i = 0
        while i < len(text):
            m = _PTOKEN.match(text, i)
            if not m:
                if text[i:].strip():
                    bad = i + len(text[i:]) - len(text[i:].lstrip())
                    raise ProcessSyntaxError(f"unexpected character {text[bad]!r}", bad)
                break
            self.tokens.append((m.group(1), m.start(1)))
            i = m.end()

    def peek(self):
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def where(self):
        return self.tokens[self.pos][1] if self.pos < len(self.tokens) else len(self.text)

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok[0]

    def expect(self, token: str):
        if self.peek() != token:
            raise ProcessSyntaxError(f"expected {token!r}", self.where())
        return self.next()

    def parse(self) -> Process:
        p = self.parallel()
        if self.pos < len(self.tokens):
            raise ProcessSyntaxError(f"unexpected token {self.peek()!r}", self.where())
        return p

    def parallel(self) -> Process:
        p = self.sum()
        while self.peek() == "|":
            self.next()
            p = Parallel(p, self.sum())
        return p

    def sum(self) -> Process:
        p = self.prefix()
        while self.peek() == "+":
            self.next()
            p = Sum(p, self.prefix())
        return p

    def prefix(self) -> Process:
        tok = self.peek()
        if tok is None:
            raise ProcessSyntaxError("unexpected end of input", len(self.text))
        if tok == "!":
            self.next()
            return Replicate(self.prefix())
        if tok == "0":
            self.next()
            return NIL
        if tok == "(":
            self.next()
            p = self.parallel()
            self.expect(")")
            return p
        if tok == "nu":
            self.next()
            names = self.name_list(stop=".")
            if not names:
                raise ProcessSyntaxError("restriction needs at least one name", self.where())
            self.expect(".")
            return Restrict(tuple(names), self.prefix())
        if tok[0].isalpha():
            where = self.where()
            ident = self.next()
            if self.peek() == "(":
                self.next()
                names = self.name_list(stop=")")
                self.expect(")")
                if self.peek() == ".":
                    self.next()
                    return Input(ChannelName.parse(ident), tuple(names), self.prefix())
                return Ref(ident, tuple(names))
            if self.peek() == "<":
                self.next()
                names = self.name_list(stop=">")
                self.expect(">")
                self.expect(".")
                return Output(ChannelName.parse(ident), tuple(names), self.prefix())
            raise ProcessSyntaxError(f"dangling name {ident!r}", where)
        raise ProcessSyntaxError(f"unexpected token {tok!r}", self.where())

    def name_list(self, stop: str) -> list[ChannelName]:
        names: list[ChannelName] = []
        if self.peek() == stop:
            return names
        while True:
            tok = self.peek()
            if tok is None or not tok[0].isalpha() or tok == "nu":
                raise ProcessSyntaxError("expected a name", self.where())
            names.append(ChannelName.parse(self.next()))
            if self.peek() != ",":
                return names
            self.next()


def parse_process(text: str) -> Process:
    return _ProcessParser(text).parse()


_PLEVEL_PAR = 0
_PLEVEL_SUM = 1
_PLEVEL_PREFIX = 2


def print_process(p: Process, _need: int = _PLEVEL_PAR) -> str:
    """Canonical rendering; parse_process(print_process(p)) == p."""

    def names(ns) -> str:
        return ",".join(str(n) for n in ns)

    match p:
        case Nil():
            return "0"
        case Ref(name, args):
            return f"{name}({names(args)})"
        case Input(c, params, body):
            return f"{c}({names(params)}).{print_process(body, _PLEVEL_PREFIX)}"
        case Output(c, args, body):
            return f"{c}<{names(args)}>.{print_process(body, _PLEVEL_PREFIX)}"
        case Replicate(body):
            return f"!{print_process(body, _PLEVEL_PREFIX)}"
        case Restrict(ns, body):
            return f"nu {names(ns)}.{print_process(body, _PLEVEL_PREFIX)}"
        case Parallel(l, r):
            text = f"{print_process(l, _PLEVEL_PAR)} | {print_process(r, _PLEVEL_SUM)}"
            return f"({text})" if _need > _PLEVEL_PAR else text
        case Sum(l, r):
            text = f"{print_process(l, _PLEVEL_SUM)} + {print_process(r, _PLEVEL_PREFIX)}"
            return f"({text})" if _need > _PLEVEL_SUM else text
    raise TypeError(f"not a process: {p!r}")
