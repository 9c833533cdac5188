"""Simulator for the shared-log client/server protocol.

One server holds a totally ordered log of (event id, object, operation)
entries.  Each client keeps three local logs: ``known`` (a prefix of the
server log it has pulled), ``unacked`` (entries it pushed but has not seen
echoed back), and ``pending`` (entries not yet pushed).  Executing an
operation evaluates it against the concatenation known+unacked+pending
restricted to the operation's object, then appends a fresh entry to pending.
A push fence flushes pending inside the execution; a pull fence first runs
pulls until known covers the whole server log.

Schedules are explicit token sequences: call/body/ret triples per event and
push/pull transitions per client, where a client's own push/pull never sits
between its call and ret.  Disabled transitions are errors, never no-ops.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping, Sequence

from .model import (
    PULL,
    PUSH,
    AbstractExecution,
    Event,
    History,
    HistoryError,
    Op,
    Rval,
    make_history,
)
from .relations import Relation, TotalOrder
from .semantics import ObjectSemantics

Entry = tuple[str, str, Op]  # (event id, object, operation)


class ScheduleError(ValueError):
    """Malformed schedule or disabled transition."""


class EnumerationCapError(RuntimeError):
    """The bounded exploration exceeded its configured budget."""


# -- tokens and schedules ----------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str
    client: str
    obj: str | None = None
    op: Op | None = None
    fences: frozenset[str] = frozenset()
    id: str | None = None


def call(client: str, obj: str, op: Op, fences: Iterable[str] = (), id: str | None = None) -> Token:
    return Token("call", client, obj, op, frozenset(fences), id)


def body(client: str) -> Token:
    return Token("body", client)


def ret(client: str) -> Token:
    return Token("ret", client)


def push(client: str) -> Token:
    return Token("push", client)


def pull(client: str) -> Token:
    return Token("pull", client)


@dataclass(frozen=True)
class Schedule:
    steps: tuple[Token, ...]

    def __iter__(self) -> Iterator[Token]:
        return iter(self.steps)

    def __len__(self) -> int:
        return len(self.steps)


def validate_schedule(schedule: Schedule) -> list[str]:
    """Grammar check: per client (call body ret)* with push/pull outside the
    call..ret window; call tokens complete; explicit ids unique."""
    out: list[str] = []
    phase: dict[str, str] = {}
    ids_seen: set[str] = set()
    for i, t in enumerate(schedule):
        p = phase.get(t.client, "idle")
        if t.kind == "call":
            if t.obj is None or t.op is None:
                out.append(f"step {i}: call without obj/op")
            if t.id is not None:
                if t.id in ids_seen:
                    out.append(f"step {i}: duplicate explicit event id {t.id}")
                ids_seen.add(t.id)
            if p != "idle":
                out.append(f"step {i}: call({t.client}) while an exec is in progress")
            phase[t.client] = "called"
        elif t.kind == "body":
            if p != "called":
                out.append(f"step {i}: body({t.client}) without a pending call")
            phase[t.client] = "evaluated"
        elif t.kind == "ret":
            if p != "evaluated":
                out.append(f"step {i}: ret({t.client}) without an evaluated body")
            phase[t.client] = "idle"
        elif t.kind in ("push", "pull"):
            if p != "idle":
                out.append(f"step {i}: {t.kind}({t.client}) between call and ret")
        else:
            out.append(f"step {i}: unknown token kind {t.kind!r}")
    for c, p in sorted(phase.items()):
        if p != "idle":
            out.append(f"client {c} left mid-execution")
    return out


# -- world state -------------------------------------------------------------


@dataclass(frozen=True)
class Frame:
    event_id: str
    obj: str
    op: Op
    fences: frozenset[str]
    done: bool = False
    rval: Rval = None
    view: frozenset[str] = frozenset()


@dataclass(frozen=True)
class ClientState:
    known_len: int = 0
    unacked: tuple[Entry, ...] = ()
    pending: tuple[Entry, ...] = ()
    frame: Frame | None = None
    next_index: int = 0


@dataclass(frozen=True)
class World:
    server: tuple[Entry, ...]
    clients: tuple[tuple[str, ClientState], ...]

    @staticmethod
    def initial(client_names: Iterable[str]) -> "World":
        return World((), tuple((c, ClientState()) for c in sorted(client_names)))

    def client(self, name: str) -> ClientState:
        for c, st in self.clients:
            if c == name:
                return st
        raise KeyError(name)

    def replace_client(self, name: str, st: ClientState) -> "World":
        return World(self.server, tuple((c, st if c == name else old) for c, old in self.clients))

    def with_server(self, server: tuple[Entry, ...]) -> "World":
        return World(server, self.clients)

    def known(self, name: str) -> tuple[Entry, ...]:
        return self.server[: self.client(name).known_len]

    def logs(self, name: str) -> tuple[Entry, ...]:
        st = self.client(name)
        return self.server[: st.known_len] + st.unacked + st.pending

    def quiescent(self) -> bool:
        return all(
            st.frame is None and not st.pending and st.known_len == len(self.server)
            for _, st in self.clients
        )


def _push(world: World, c: str) -> World:
    st = world.client(c)
    if not st.pending:
        raise ScheduleError(f"push({c}) not enabled: pending empty")
    entry, rest = st.pending[0], st.pending[1:]
    return world.with_server(world.server + (entry,)).replace_client(
        c, replace(st, unacked=st.unacked + (entry,), pending=rest)
    )


def _pull(world: World, c: str) -> World:
    st = world.client(c)
    if st.known_len >= len(world.server):
        raise ScheduleError(f"pull({c}) not enabled: known equals server log")
    entry = world.server[st.known_len]
    unacked = st.unacked
    if unacked and unacked[0] == entry:
        unacked = unacked[1:]
    elif entry in unacked:
        raise AssertionError("pulled own entry out of push order")
    return world.replace_client(c, replace(st, known_len=st.known_len + 1, unacked=unacked))


BodyInfo = tuple[str, str, str, Op, frozenset[str], Rval, frozenset[str]]


def _body(world: World, c: str, semantics: ObjectSemantics) -> tuple[World, BodyInfo]:
    st = world.client(c)
    if st.frame is None or st.frame.done:
        raise ScheduleError(f"body({c}) not enabled")
    fr = st.frame
    if PULL in fr.fences:
        while world.client(c).known_len < len(world.server):
            world = _pull(world, c)
        st = world.client(c)
    logs = world.server[: st.known_len] + st.unacked + st.pending
    view = frozenset(eid for eid, _, _ in logs)
    context = tuple(op for _, obj, op in logs if obj == fr.obj)
    rval = semantics.eval(context, fr.op)
    entry: Entry = (fr.event_id, fr.obj, fr.op)
    st = replace(st, pending=st.pending + (entry,),
                 frame=replace(fr, done=True, rval=rval, view=view))
    world = world.replace_client(c, st)
    if PUSH in fr.fences:
        while world.client(c).pending:
            world = _push(world, c)
    info: BodyInfo = (fr.event_id, c, fr.obj, fr.op, fr.fences, rval, view)
    return world, info


def step(world: World, token: Token, semantics: ObjectSemantics) -> tuple[World, BodyInfo | None]:
    """Apply one token.  Raises ScheduleError when the transition is disabled."""
    c = token.client
    if token.kind == "push":
        return _push(world, c), None
    if token.kind == "pull":
        return _pull(world, c), None
    st = world.client(c)
    if token.kind == "call":
        if st.frame is not None:
            raise ScheduleError(f"call({c}) while an exec is in progress")
        event_id = token.id if token.id is not None else f"{c}:{st.next_index}"
        fr = Frame(event_id, token.obj, token.op, token.fences)
        return world.replace_client(c, replace(st, frame=fr, next_index=st.next_index + 1)), None
    if token.kind == "body":
        return _body(world, c, semantics)
    if token.kind == "ret":
        if st.frame is None or not st.frame.done:
            raise ScheduleError(f"ret({c}) not enabled")
        return world.replace_client(c, replace(st, frame=None)), None
    raise ScheduleError(f"unknown token kind {token.kind!r}")


# -- running explicit schedules ----------------------------------------------


@dataclass(frozen=True)
class EventRecord:
    id: str
    client: str
    obj: str
    op: Op
    fences: frozenset[str]
    rval: Rval
    view: frozenset[str]
    call_index: int
    body_index: int
    ret_index: int


@dataclass(frozen=True)
class SimRun:
    schedule: Schedule
    events: tuple[EventRecord, ...]
    world: World


def run_schedule(schedule: Schedule, semantics: ObjectSemantics,
                 clients: Iterable[str] = (), validate: bool = True) -> SimRun:
    """Fold a schedule over the initial world.

    ``clients`` may add idle clients beyond those mentioned by the tokens.
    Grammar violations and disabled transitions raise ScheduleError with the
    offending step index.
    """
    if validate:
        problems = validate_schedule(schedule)
        if problems:
            raise ScheduleError("; ".join(problems))
    names = sorted(set(itertools.chain((t.client for t in schedule), clients)))
    world = World.initial(names)
    open_calls: dict[str, dict] = {}
    records: list[dict] = []
    seen_ids: set[str] = set()
    for i, token in enumerate(schedule):
        try:
            world, info = step(world, token, semantics)
        except ScheduleError as exc:
            raise ScheduleError(f"step {i}: {exc}") from None
        if token.kind == "call":
            open_calls[token.client] = {"call_index": i}
        elif token.kind == "body":
            eid, c, obj, op, fences, rval, view = info
            if eid in seen_ids:
                raise AssertionError(f"event id collision: {eid}")
            seen_ids.add(eid)
            open_calls[c].update(id=eid, client=c, obj=obj, op=op, fences=fences,
                                 rval=rval, view=view, body_index=i)
        elif token.kind == "ret":
            rec = open_calls.pop(token.client)
            rec["ret_index"] = i
            records.append(rec)
    if open_calls:
        raise ScheduleError(f"unmatched calls for {sorted(open_calls)}")
    events = tuple(EventRecord(**r) for r in records)
    return SimRun(schedule, events, world)


def extract_history(run: SimRun) -> History:
    events = [Event(r.id, r.client, r.obj, r.op, r.rval, r.fences) for r in run.events]
    sessions: dict[str, list[str]] = {}
    for r in sorted(run.events, key=lambda r: r.call_index):
        sessions.setdefault(r.client, []).append(r.id)
    ids = frozenset(r.id for r in run.events)
    rt = Relation(ids, frozenset(
        (a.id, b.id)
        for a in run.events
        for b in run.events
        if a.ret_index < b.call_index
    ))
    return make_history(events, sessions, rt)


def extract_execution(run: SimRun) -> AbstractExecution:
    """History plus the visibility witnessed by each body and the final
    server-log arbitration.  Requires a quiescent final world."""
    if not run.world.quiescent():
        raise HistoryError("run not quiescent: flush pushes/pulls before extracting")
    h = extract_history(run)
    ids = h.ids
    vis = Relation(ids, frozenset(
        (seen, r.id) for r in run.events for seen in r.view if seen != r.id
    ))
    ar = TotalOrder(tuple(eid for eid, _, _ in run.world.server))
    return AbstractExecution(h, vis, ar)


def flush_suffix(world: World) -> list[Token]:
    """Tokens that drive a world to quiescence: round-robin pushes over the
    sorted clients (FIFO within each), then pulls client by client."""
    out: list[Token] = []
    pend = {c: len(st.pending) for c, st in world.clients}
    while any(pend.values()):
        for c in sorted(pend):
            if pend[c]:
                out.append(push(c))
                pend[c] -= 1
    total = len(world.server) + sum(len(st.pending) for _, st in world.clients)
    for c, st in world.clients:
        for _ in range(total - st.known_len):
            out.append(pull(c))
    return out


def run_to_quiescence(schedule: Schedule, semantics: ObjectSemantics,
                      clients: Iterable[str] = ()) -> SimRun:
    base = run_schedule(schedule, semantics, clients)
    extra = flush_suffix(base.world)
    if not extra:
        return base
    return run_schedule(Schedule(base.schedule.steps + tuple(extra)), semantics, clients)


# -- bounded exhaustive exploration --------------------------------------------

Program = tuple[tuple[str, Op, frozenset[str]], ...]  # (obj, op, fences) per event


def programs_of(h: History) -> dict[str, Program]:
    """The per-client programs a history's sessions spell out."""
    by_id = h.by_id
    return {
        client: tuple((by_id[i].obj, by_id[i].op, by_id[i].fences) for i in ids)
        for client, ids in h.sessions
    }


@dataclass(frozen=True)
class _Done:
    """A returned event inside an exploration state."""

    id: str
    client: str
    obj: str
    op: Op
    fences: frozenset[str]
    rval: Rval
    view: frozenset[str]


@dataclass(frozen=True)
class _ExpState:
    world: World
    done: tuple[_Done, ...]
    rt: frozenset[tuple[str, str]]


def _terminal(state: _ExpState, programs: Mapping[str, Program]) -> bool:
    return all(
        st.frame is None and st.next_index == len(programs[c])
        for c, st in state.world.clients
    )


def _moves(state: _ExpState, programs: Mapping[str, Program]) -> list[Token]:
    out: list[Token] = []
    for c, st in state.world.clients:
        if st.frame is not None:
            out.append(body(c) if not st.frame.done else ret(c))
            continue
        if st.next_index < len(programs[c]):
            obj, op, fences = programs[c][st.next_index]
            out.append(call(c, obj, op, fences))
        if st.pending:
            out.append(push(c))
        if st.known_len < len(state.world.server):
            out.append(pull(c))
    return out


def _apply(state: _ExpState, token: Token, semantics: ObjectSemantics) -> _ExpState:
    world, info = step(state.world, token, semantics)
    done, rt = state.done, state.rt
    if token.kind == "call":
        new_id = f"{token.client}:{state.world.client(token.client).next_index}"
        rt = rt | frozenset((d.id, new_id) for d in done)
    elif token.kind == "ret":
        fr = state.world.client(token.client).frame
        done = done + (_Done(fr.event_id, token.client, fr.obj, fr.op, fr.fences,
                             fr.rval, fr.view),)
    return _ExpState(world, done, rt)


def _finish(state: _ExpState, semantics: ObjectSemantics) -> tuple[History, AbstractExecution]:
    world = state.world
    for token in flush_suffix(world):
        world, _ = step(world, token, semantics)
    events = [Event(d.id, d.client, d.obj, d.op, d.rval, d.fences) for d in state.done]
    sessions: dict[str, list[str]] = {}
    for d in state.done:
        sessions.setdefault(d.client, [])
    for c in sessions:
        sessions[c] = sorted((d.id for d in state.done if d.client == c),
                             key=lambda i: int(i.rsplit(":", 1)[1]))
    ids = frozenset(d.id for d in state.done)
    h = make_history(events, sessions, Relation(ids, state.rt))
    vis = Relation(ids, frozenset(
        (seen, d.id) for d in state.done for seen in d.view if seen != d.id
    ))
    ar = TotalOrder(tuple(eid for eid, _, _ in world.server))
    return h, AbstractExecution(h, vis, ar)


def _target_tables(target: History | None):
    if target is None:
        return None
    rvals = {e.id: e.rval for e in target.events}
    rt_pairs = target.rt.pairs
    preds = {e.id: target.rt.predecessors(e.id) for e in target.events}
    return rvals, rt_pairs, preds


def explore(programs: Mapping[str, Program], semantics: ObjectSemantics,
            max_states: int = 2_000_000, target: History | None = None
            ) -> Iterator[tuple[History, AbstractExecution]]:
    """Depth-first walk of every schedule of the given programs, deduplicated
    by reachable state.  Yields (history, execution) per distinct terminal
    state, after a deterministic quiescence flush.

    With ``target`` (canonical client:index ids) the walk prunes branches
    that provably cannot reproduce the target history: a wrong return value,
    an rt pair outside the target's, or a required rt pair already missed.
    All three conditions are monotone along a run, so pruning is sound.
    """
    for c, prog in programs.items():
        for _, op, fences in prog:
            if not frozenset(fences) <= frozenset({PUSH, PULL}):
                raise ValueError(f"bad fences in program for {c}")
    tables = _target_tables(target)
    init = _ExpState(World.initial(programs.keys()), (), frozenset())
    seen: set[_ExpState] = {init}
    stack: list[_ExpState] = [init]
    emitted: set[tuple[History, AbstractExecution]] = set()
    while stack:
        state = stack.pop()
        if _terminal(state, programs):
            pair = _finish(state, semantics)
            if pair not in emitted:
                emitted.add(pair)
                yield pair
            continue
        for token in _moves(state, programs):
            nxt = _apply(state, token, semantics)
            if tables is not None and not _target_compatible(nxt, token, tables):
                continue
            if nxt in seen:
                continue
            seen.add(nxt)
            if len(seen) > max_states:
                raise EnumerationCapError(f"exploration exceeded {max_states} states")
            stack.append(nxt)


def _target_compatible(state: _ExpState, token: Token, tables) -> bool:
    """Check the state right after ``token`` against the target tables.

    Returned-before pairs only ever get added when an event is called, so a
    call whose required predecessors have not all returned, or that pairs up
    with something the target does not, can never lead to the target."""
    rvals, rt_pairs, preds = tables
    if token.kind == "call":
        fr = state.world.client(token.client).frame
        if fr.event_id not in rvals:
            return False
        if not state.rt <= rt_pairs:
            return False
        returned = {d.id for d in state.done}
        if not preds[fr.event_id] <= returned:
            return False
    elif token.kind == "body":
        fr = state.world.client(token.client).frame
        if fr.event_id not in rvals or fr.rval != rvals[fr.event_id]:
            return False
    return True


def enumerate_histories(programs: Mapping[str, Program], semantics: ObjectSemantics,
                        max_states: int = 2_000_000) -> list[History]:
    """Distinct histories reachable from the programs, in a deterministic
    order (canonical ids sorted by their event tuples and rt)."""
    out = {h for h, _ in explore(programs, semantics, max_states)}
    return sorted(out, key=History.sort_key)


def can_produce(h: History, semantics: ObjectSemantics, max_states: int = 2_000_000) -> bool:
    """Whether some schedule of h's own programs reproduces h exactly
    (canonical ids).  Exhaustive up to the state cap."""
    target = h.canonical()
    programs = programs_of(target)
    for hist, _ in explore(programs, semantics, max_states, target=target):
        if (hist.events == target.events and hist.rt == target.rt
                and hist.sessions == target.sessions):
            return True
    return False
