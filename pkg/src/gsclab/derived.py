"""Stronger models obtained by fixing fences: linearizability and ordered
sequential consistency (OSC).

When every event both pushes and pulls, the log behaves like a single copy:
membership is equivalent to the existence of a linearization, a total order
containing session order and real-time order in which every event's return
value equals the sequential evaluation of the same-object prefix before it.
When every event pushes and every update also pulls, reads may trail behind
but updates still serialize: the real-time requirement weakens to edges that
end in an update.

Both checkers search for such a total order directly (desk scale), so they
can serve as independent cross-checks of the axiomatic membership test
under the corresponding fence presets.  The converters translate between
the two witness shapes: a linearization of an all-fenced history and a
full visibility/arbitration execution.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    PULL,
    PUSH,
    AbstractExecution,
    History,
    HistoryError,
    validate_history,
)
from .relations import Relation, TotalOrder, extend_to_total
from .semantics import ObjectSemantics


@dataclass(frozen=True)
class Linearization:
    """A history together with a single total order explaining it."""

    history: History
    lin: TotalOrder


@dataclass(frozen=True)
class LinearizationResult:
    member: bool
    witness: Linearization | None = None
    note: str = ""

    def __bool__(self) -> bool:
        return self.member


def _prefix_search(h: History, semantics: ObjectSemantics, base: Relation) -> TotalOrder | None:
    """Smallest (by id at each step) linear extension of ``base`` in which
    every event's return value matches evaluation of the same-object prefix
    placed before it.  Placement order is exactly the evaluation context, so
    a value mismatch prunes the whole branch."""
    events = h.by_id
    ids = sorted(events)
    order: list[str] = []
    placed: set[str] = set()
    prefix_ops: dict[str, list] = {}

    def feasible(eid: str) -> bool:
        e = events[eid]
        ctx = tuple(prefix_ops.get(e.obj, ()))
        return semantics.eval(ctx, e.op) == e.rval

    def rec() -> bool:
        if len(order) == len(ids):
            return True
        for eid in ids:
            if eid in placed:
                continue
            if any(p not in placed for p in base.predecessors(eid)):
                continue
            if not feasible(eid):
                continue
            e = events[eid]
            placed.add(eid)
            order.append(eid)
            prefix_ops.setdefault(e.obj, []).append(e.op)
            if rec():
                return True
            prefix_ops[e.obj].pop()
            order.pop()
            placed.remove(eid)
        return False

    if not base.is_acyclic():
        return None
    return TotalOrder(tuple(order)) if rec() else None


def _validated(h: History) -> None:
    errs = validate_history(h)
    if errs:
        raise HistoryError("; ".join(errs))


def check_lin(h: History, semantics: ObjectSemantics) -> LinearizationResult:
    """Membership under the single-copy model: requires every event to push
    and pull, and searches for a linearization containing session order and
    real-time order whose prefix evaluation reproduces every return value."""
    _validated(h)
    for e in h.events:
        if PUSH not in e.fences or PULL not in e.fences:
            raise HistoryError(
                f"fence preset violated: event {e.id} must both push and pull"
            )
    base = h.so | h.rt
    lin = _prefix_search(h, semantics, base)
    if lin is None:
        return LinearizationResult(
            False,
            note="no total order contains session order and real-time order "
            "while reproducing every return value by prefix evaluation",
        )
    return LinearizationResult(True, Linearization(h, lin))


def check_osc(h: History, semantics: ObjectSemantics) -> LinearizationResult:
    """Membership under the serialized-updates model: requires every event
    to push and every update to also pull.  Reads may linearize before
    events that finished earlier, so only real-time edges into updates are
    enforced."""
    _validated(h)
    if semantics.classify is None:
        raise HistoryError(
            f"semantics {semantics.name!r} cannot classify updates"
        )
    for e in h.events:
        if PUSH not in e.fences:
            raise HistoryError(f"fence preset violated: event {e.id} must push")
        if semantics.is_update(e.op) and PULL not in e.fences:
            raise HistoryError(
                f"fence preset violated: update event {e.id} must pull"
            )
    updates = {e.id for e in h.events if semantics.is_update(e.op)}
    rt_into_updates = Relation(
        h.ids, frozenset((a, b) for (a, b) in h.rt.pairs if b in updates)
    )
    base = h.so | rt_into_updates
    lin = _prefix_search(h, semantics, base)
    if lin is None:
        return LinearizationResult(
            False,
            note="no total order contains session order and real-time edges "
            "into updates while reproducing every return value",
        )
    return LinearizationResult(True, Linearization(h, lin))


def lin_from_osc_execution(
    x: AbstractExecution, semantics: ObjectSemantics
) -> Linearization:
    """Collapse a visibility/arbitration witness (with serialized updates)
    into one total order: updates keep their arbitration order and each read
    goes right after the last update it observed (reads that observed none
    go first).  Reads sharing an anchor stay in arbitration order, which
    also respects session order since session order is contained in it."""
    h = x.history
    if semantics.classify is None:
        raise HistoryError(f"semantics {semantics.name!r} cannot classify updates")
    updates = [i for i in x.ar.sequence if semantics.is_update(h.event(i).op)]
    groups: dict[str | None, list[str]] = {None: []}
    for u in updates:
        groups[u] = []
    for eid in x.ar.sequence:
        if semantics.is_update(h.event(eid).op):
            continue
        anchor: str | None = None
        for u in updates:
            if (u, eid) in x.vis:
                anchor = u
        groups[anchor].append(eid)
    seq: list[str] = list(groups[None])
    for u in updates:
        seq.append(u)
        seq.extend(groups[u])
    return Linearization(h, TotalOrder(tuple(seq)))


def osc_execution_from_lin(
    l: Linearization, semantics: ObjectSemantics
) -> AbstractExecution:
    """Expand a linearization with serialized updates into a full witness.

    Arbitration extends (update-to-anything linearization edges) united with
    real-time order, breaking ties by linearization position; an event sees
    the updates linearized before it, closed under session order on both
    sides, and every pull-fenced event additionally sees the pushed work
    arbitrated up to it, as the pushed-visibility law demands.  With every
    update push- and pull-fenced that last part makes each update see all
    its arbitration predecessors; with all events fully fenced it makes
    visibility the whole arbitration order."""
    h = l.history
    if semantics.classify is None:
        raise HistoryError(f"semantics {semantics.name!r} cannot classify updates")
    ids = h.ids
    upd = {i for i in ids if semantics.is_update(h.event(i).op)}
    lin_rel = l.lin.as_relation()
    r_upd = Relation(ids, frozenset(p for p in lin_rel.pairs if p[0] in upd))
    ar = extend_to_total(r_upd | h.rt, tie_break=l.lin.sequence)
    ar_rel = ar.as_relation()
    arq = ar_rel.reflexive()
    soq = h.so.reflexive()
    push_pull = h.rt.reflexive() & Relation.product(ids, h.pushers(), h.pullers())
    pushed = Relation(ids, frozenset(
        p for p in arq.compose(push_pull).pairs if p[0] != p[1]))
    vis = h.so | arq.compose(r_upd - h.so).compose(soq) | pushed.compose(soq)
    return AbstractExecution(h, vis, ar)
