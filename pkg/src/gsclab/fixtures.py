"""Canonical litmus histories with frozen verdicts, shared by every suite.

Each fixture is a small multi-client history over append/read sequence
objects whose membership verdict under every fence preset is known and
pinned here.  The five canonical names are part of the tool's interface:

  fig3a  stale read: both appends propagate late; each reader sees its own
         client's append but only one sees both
  fig3b  reordered appends: the shared log orders two appends against their
         real-time order
  fig3c  store buffering: two clients each miss the other's unpushed append
  fig3d  long fork: two observers disagree on the order of two independent
         appends (never allowed, though both per-object projections are)
  fig5   unfenced handoff: a client reads one object then another with only
         a pull fence, missing an append it transitively depends on

Behavioural aliases (stale_read, reordered_appends, store_buffering,
long_fork, unfenced_handoff) resolve to the same fixtures.

fig3a, fig3b and fig3c carry golden schedules: replaying them through the
log protocol reproduces the fixture history exactly (ids, return values,
returns-before pairs) and ends with a pinned server order.  Their witness
executions are extracted from those replays at import time, so a fixture
that disagreed with the protocol would fail to import.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

from .model import (
    PULL,
    PUSH,
    AbstractExecution,
    Event,
    History,
    Interval,
    Op,
    make_history,
    project,
)
from .protocol import Schedule, body, call, extract_execution, pull, push, ret, run_schedule
from .relations import Relation, TotalOrder

FIXTURE_NAMES = ("fig3a", "fig3b", "fig3c", "fig3d", "fig5")

ALIASES = {
    "stale_read": "fig3a",
    "reordered_appends": "fig3b",
    "store_buffering": "fig3c",
    "long_fork": "fig3d",
    "unfenced_handoff": "fig5",
}


@dataclass(frozen=True)
class Fixture:
    """A named history plus its pinned verdict per fence preset.

    ``membership[model]`` is the expected membership verdict after applying
    that model's fence preset.  ``schedule`` (when present) replays to
    ``history`` exactly and leaves the server holding ``server_order``.
    """

    name: str
    alias: str
    history: History
    membership: Mapping[str, bool]
    witness: AbstractExecution | None = None
    schedule: Schedule | None = None
    server_order: tuple[str, ...] | None = None
    description: str = ""


def _append(val: int) -> Op:
    return Op("append", val)


_READ = Op("read")


def _ev(eid: str, client: str, obj: str, op: Op, rval, fences=()) -> Event:
    return Event(eid, client, obj, op, rval, frozenset(fences))


def with_fences(h: History, assignment: Mapping[str, frozenset[str] | set[str]]) -> History:
    """A copy of ``h`` with the fences of selected events replaced."""
    unknown = set(assignment) - set(h.ids)
    if unknown:
        raise KeyError(f"unknown event ids {sorted(unknown)}")
    events = [
        e.with_fences(assignment[e.id]) if e.id in assignment else e for e in h.events
    ]
    return make_history(events, dict(h.sessions), h.rt)


# --- histories -------------------------------------------------------------


def _stale_read_history() -> History:
    events = [
        _ev("e1", "A", "x", _append(1), None),
        _ev("e2", "A", "x", _READ, (1, 2)),
        _ev("f1", "B", "x", _append(2), None),
        _ev("f2", "B", "x", _READ, (2,)),
    ]
    sessions = {"A": ["e1", "e2"], "B": ["f1", "f2"]}
    intervals = {
        "e1": Interval(0, 2),
        "f1": Interval(1, 3),
        "e2": Interval(4, 5),
        "f2": Interval(6, 7),
    }
    return make_history(events, sessions, intervals)


def _reordered_appends_history() -> History:
    events = [
        _ev("e1", "A", "x", _append(1), None),
        _ev("f1", "B", "x", _append(2), None),
        _ev("f2", "B", "x", _READ, (2, 1)),
    ]
    sessions = {"A": ["e1"], "B": ["f1", "f2"]}
    intervals = {"e1": Interval(0, 1), "f1": Interval(2, 3), "f2": Interval(4, 5)}
    return make_history(events, sessions, intervals)


def _store_buffering_history() -> History:
    events = [
        _ev("e1", "A", "x", _append(1), None),
        _ev("e2", "A", "y", _READ, ()),
        _ev("f1", "B", "y", _append(1), None),
        _ev("f2", "B", "x", _READ, ()),
    ]
    sessions = {"A": ["e1", "e2"], "B": ["f1", "f2"]}
    intervals = {
        "e1": Interval(0, 1),
        "f1": Interval(0, 1),
        "e2": Interval(2, 3),
        "f2": Interval(2, 3),
    }
    return make_history(events, sessions, intervals)


def _long_fork_history() -> History:
    events = [
        _ev("a", "C1", "x", _append(1), None),
        _ev("b", "C2", "y", _append(1), None),
        _ev("c1", "C3", "x", _READ, (1,)),
        _ev("c2", "C3", "y", _READ, ()),
        _ev("d1", "C4", "y", _READ, (1,)),
        _ev("d2", "C4", "x", _READ, ()),
    ]
    sessions = {"C1": ["a"], "C2": ["b"], "C3": ["c1", "c2"], "C4": ["d1", "d2"]}
    intervals = {
        "a": Interval(0, 1),
        "b": Interval(0, 1),
        "c1": Interval(2, 3),
        "d1": Interval(2, 3),
        "c2": Interval(4, 5),
        "d2": Interval(4, 5),
    }
    return make_history(events, sessions, intervals)


def _unfenced_handoff_history() -> History:
    events = [
        _ev("f", "C1", "x", _append(1), None),
        _ev("e", "C2", "y", _append(2), None),
        _ev("p", "C3", "y", _READ, (2,)),
        _ev("g", "C3", "x", _READ, (), fences={PULL}),
    ]
    sessions = {"C1": ["f"], "C2": ["e"], "C3": ["p", "g"]}
    intervals = {
        "f": Interval(0, 1),
        "e": Interval(0, 1),
        "p": Interval(2, 3),
        "g": Interval(4, 5),
    }
    return make_history(events, sessions, intervals)


# --- flip variants (each turns a member into a non-member) -----------------


def fig3a_pull_variant() -> History:
    """Stale read with a pull fence on the stale reader: the pull would have
    fetched both appends, so returning just one is no longer allowed."""
    return with_fences(_stale_read_history(), {"f2": {PULL}})


def fig3b_push_variant() -> History:
    """Reordered appends with a push fence on the earlier append: the push
    pins it to the server first, so the log can no longer reorder them."""
    return with_fences(_reordered_appends_history(), {"e1": {PUSH}})


def fig3c_fence_variant() -> History:
    """Store buffering with pushed appends and pulling reads: each read
    would then have to see the other client's append."""
    return with_fences(
        _store_buffering_history(),
        {"e1": {PUSH}, "f1": {PUSH}, "e2": {PULL}, "f2": {PULL}},
    )


# --- golden schedules ------------------------------------------------------


def _stale_read_schedule() -> tuple[Schedule, tuple[str, ...]]:
    steps = [
        call("A", "x", _append(1), id="e1"),
        call("B", "x", _append(2), id="f1"),
        body("A"),
        body("B"),
        ret("A"),
        ret("B"),
        push("A"),
        push("B"),
        pull("A"),
        pull("A"),
        call("A", "x", _READ, id="e2"),
        body("A"),
        ret("A"),
        call("B", "x", _READ, id="f2"),
        body("B"),
        ret("B"),
        push("A"),
        push("B"),
        pull("A"),
        pull("A"),
        pull("B"),
        pull("B"),
        pull("B"),
        pull("B"),
    ]
    return Schedule(tuple(steps)), ("e1", "f1", "e2", "f2")


def _reordered_appends_schedule() -> tuple[Schedule, tuple[str, ...]]:
    steps = [
        call("A", "x", _append(1), id="e1"),
        body("A"),
        ret("A"),
        call("B", "x", _append(2), id="f1"),
        body("B"),
        ret("B"),
        push("B"),
        push("A"),
        pull("B"),
        pull("B"),
        call("B", "x", _READ, id="f2"),
        body("B"),
        ret("B"),
        push("B"),
        pull("A"),
        pull("A"),
        pull("A"),
        pull("B"),
    ]
    return Schedule(tuple(steps)), ("f1", "e1", "f2")


def _store_buffering_schedule() -> tuple[Schedule, tuple[str, ...]]:
    steps = [
        call("A", "x", _append(1), id="e1"),
        call("B", "y", _append(1), id="f1"),
        body("A"),
        body("B"),
        ret("A"),
        ret("B"),
        call("A", "y", _READ, id="e2"),
        call("B", "x", _READ, id="f2"),
        body("A"),
        body("B"),
        ret("A"),
        ret("B"),
        push("A"),
        push("B"),
        push("A"),
        push("B"),
        pull("A"),
        pull("A"),
        pull("A"),
        pull("A"),
        pull("B"),
        pull("B"),
        pull("B"),
        pull("B"),
    ]
    return Schedule(tuple(steps)), ("e1", "f1", "e2", "f2")


# --- assembly --------------------------------------------------------------


def _replayed_witness(
    h: History, schedule: Schedule, server_order: tuple[str, ...]
) -> AbstractExecution:
    """Replay the golden schedule and check it reproduces ``h`` exactly."""
    from .semantics import SEQUENCE

    run = run_schedule(schedule, SEQUENCE)
    x = extract_execution(run)
    got = x.history
    if got.canonical() != h.canonical():
        raise AssertionError(f"golden schedule does not reproduce fixture: {got} != {h}")
    if tuple(x.ar.sequence) != server_order:
        raise AssertionError(f"golden server order {x.ar.sequence} != {server_order}")
    return AbstractExecution(h, x.vis, x.ar)


def _handoff_witness(h: History) -> AbstractExecution:
    vis = Relation.from_pairs(h.ids, [("p", "g"), ("e", "p"), ("e", "g")])
    ar = TotalOrder(("e", "p", "f", "g"))
    return AbstractExecution(h, vis, ar)


def _build() -> dict[str, Fixture]:
    out: dict[str, Fixture] = {}

    h = _stale_read_history()
    sched, server = _stale_read_schedule()
    out["fig3a"] = Fixture(
        name="fig3a",
        alias="stale_read",
        history=h,
        membership={
            "gsc": True, "gsp": True, "tso": False,
            "dual_tso": True, "osc": False, "lin": False,
        },
        witness=_replayed_witness(h, sched, server),
        schedule=sched,
        server_order=server,
        description="two racing appends; one reader sees both, the other only its own",
    )

    h = _reordered_appends_history()
    sched, server = _reordered_appends_schedule()
    out["fig3b"] = Fixture(
        name="fig3b",
        alias="reordered_appends",
        history=h,
        membership={
            "gsc": True, "gsp": True, "tso": True,
            "dual_tso": False, "osc": False, "lin": False,
        },
        witness=_replayed_witness(h, sched, server),
        schedule=sched,
        server_order=server,
        description="the log orders two appends against their real-time order",
    )

    h = _store_buffering_history()
    sched, server = _store_buffering_schedule()
    out["fig3c"] = Fixture(
        name="fig3c",
        alias="store_buffering",
        history=h,
        membership={
            "gsc": True, "gsp": True, "tso": True,
            "dual_tso": True, "osc": False, "lin": False,
        },
        witness=_replayed_witness(h, sched, server),
        schedule=sched,
        server_order=server,
        description="both clients read the other object before either append lands",
    )

    h = _long_fork_history()
    out["fig3d"] = Fixture(
        name="fig3d",
        alias="long_fork",
        history=h,
        membership={
            "gsc": False, "gsp": False, "tso": False,
            "dual_tso": False, "osc": False, "lin": False,
        },
        description="two observers disagree on the order of independent appends",
    )

    h = _unfenced_handoff_history()
    out["fig5"] = Fixture(
        name="fig5",
        alias="unfenced_handoff",
        history=h,
        membership={
            "gsc": True, "gsp": True, "tso": True,
            "dual_tso": True, "osc": True, "lin": False,
        },
        witness=_handoff_witness(h),
        description="a pull-fenced read crosses objects; well-fencing fails on (p, g)",
    )
    return out


_REGISTRY: dict[str, Fixture] | None = None


def _registry() -> dict[str, Fixture]:
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = _build()
    return _REGISTRY


def fixture(name: str) -> Fixture:
    """Look up a fixture by canonical name or behavioural alias."""
    key = ALIASES.get(name, name)
    reg = _registry()
    if key not in reg:
        known = ", ".join(list(FIXTURE_NAMES) + sorted(ALIASES))
        raise KeyError(f"unknown fixture {name!r}; known: {known}")
    return reg[key]


def all_fixtures() -> tuple[Fixture, ...]:
    return tuple(_registry()[n] for n in FIXTURE_NAMES)


def fig3d_projection_executions() -> dict[str, AbstractExecution]:
    """Member witnesses for both object projections of the long fork.

    The full history is a non-member, but each projection is fine: the
    witness simply arbitrates the append before the reader that saw it and
    after the reader that did not.
    """
    h = _long_fork_history()
    hx = project(h, "x")
    hy = project(h, "y")
    return {
        "x": AbstractExecution(
            hx,
            Relation.from_pairs(hx.ids, [("a", "c1")]),
            TotalOrder(("a", "c1", "d2")),
        ),
        "y": AbstractExecution(
            hy,
            Relation.from_pairs(hy.ids, [("b", "d1")]),
            TotalOrder(("b", "d1", "c2")),
        ),
    }
