"""Histories and abstract executions for the shared-log consistency models.

A history records what clients observed: per-session sequences of events,
each event an operation on a named object together with its return value and
its fence requests, plus a returns-before relation ``rt`` (an interval order
containing session order).  An abstract execution adds the two explanatory
relations: visibility (which events an event's client had in its logs) and
arbitration (the order the shared log ends up in).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .relations import Relation, TotalOrder

PUSH = "push"
PULL = "pull"
FENCE_KINDS = frozenset({PUSH, PULL})

# Models selectable by fence preset.
MODELS = ("gsc", "gsp", "tso", "dual_tso", "osc", "lin")


class HistoryError(ValueError):
    """A structurally invalid history or execution was supplied."""


Rval = None | int | tuple[int, ...]


@dataclass(frozen=True)
class Op:
    """An operation descriptor: a kind plus an optional integer argument."""

    kind: str
    value: int | None = None

    def __str__(self) -> str:
        return self.kind if self.value is None else f"{self.kind}({self.value})"


@dataclass(frozen=True)
class Event:
    id: str
    client: str
    obj: str
    op: Op
    rval: Rval
    fences: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if not self.fences <= FENCE_KINDS:
            raise HistoryError(f"unknown fences {set(self.fences) - FENCE_KINDS}")
        if isinstance(self.rval, list):
            object.__setattr__(self, "rval", tuple(self.rval))

    def with_fences(self, fences: Iterable[str]) -> "Event":
        return Event(self.id, self.client, self.obj, self.op, self.rval, frozenset(fences))


@dataclass(frozen=True)
class Interval:
    """A real-time activity span; ``rt`` holds between disjoint spans."""

    start: float
    end: float

    def __post_init__(self) -> None:
        if not self.start < self.end:
            raise HistoryError(f"interval must have start < end, got [{self.start}, {self.end}]")


def rt_from_intervals(assignment: Mapping[str, Interval]) -> Relation:
    """e before f iff e's interval ends strictly before f's begins."""
    ids = frozenset(assignment)
    pairs = frozenset(
        (a, b)
        for a in ids
        for b in ids
        if a != b and assignment[a].end < assignment[b].start
    )
    return Relation(ids, pairs)


@dataclass(frozen=True)
class History:
    """Events grouped into per-client sessions plus a returns-before order.

    ``sessions`` is canonically sorted by client name; ``events`` follows the
    session layout.  ``so`` (session order) is derived and stored for
    convenience.  Use :func:`make_history`; the raw constructor does not
    validate.
    """

    events: tuple[Event, ...]
    sessions: tuple[tuple[str, tuple[str, ...]], ...]
    rt: Relation
    so: Relation

    # -- access helpers ----------------------------------------------------

    @property
    def ids(self) -> frozenset[str]:
        return frozenset(e.id for e in self.events)

    def event(self, event_id: str) -> Event:
        for e in self.events:
            if e.id == event_id:
                return e
        raise KeyError(event_id)

    @property
    def by_id(self) -> dict[str, Event]:
        return {e.id: e for e in self.events}

    @property
    def session_map(self) -> dict[str, tuple[str, ...]]:
        return dict(self.sessions)

    @property
    def clients(self) -> tuple[str, ...]:
        return tuple(c for c, _ in self.sessions)

    def objects(self) -> tuple[str, ...]:
        return tuple(sorted({e.obj for e in self.events}))

    def pushers(self) -> frozenset[str]:
        return frozenset(e.id for e in self.events if PUSH in e.fences)

    def pullers(self) -> frozenset[str]:
        return frozenset(e.id for e in self.events if PULL in e.fences)

    def renamed(self, mapping: Mapping[str, str]) -> "History":
        """Rename event ids (bijectively) without touching anything else."""
        if sorted(mapping) != sorted(self.ids) or len(set(mapping.values())) != len(mapping):
            raise HistoryError("renaming must be a bijection on the event ids")
        events = tuple(
            Event(mapping[e.id], e.client, e.obj, e.op, e.rval, e.fences) for e in self.events
        )
        sessions = {c: [mapping[i] for i in ids] for c, ids in self.sessions}
        dom = frozenset(mapping.values())
        rt = Relation(dom, frozenset((mapping[a], mapping[b]) for a, b in self.rt.pairs))
        return make_history(events, sessions, rt)

    def canonical(self) -> "History":
        """Rename ids to the deterministic client:index scheme."""
        mapping: dict[str, str] = {}
        for client, ids in self.sessions:
            for i, eid in enumerate(ids):
                mapping[eid] = f"{client}:{i}"
        return self.renamed(mapping)

    def sort_key(self):
        """A total, deterministic ordering key (events then rt pairs)."""
        return (
            tuple(
                (e.id, e.client, e.obj, e.op.kind, repr(e.op.value),
                 repr(e.rval), tuple(sorted(e.fences)))
                for e in self.events
            ),
            sorted(self.rt.pairs),
        )


def session_order(sessions: Mapping[str, Sequence[str]], domain: Iterable[str]) -> Relation:
    pairs: set[tuple[str, str]] = set()
    for ids in sessions.values():
        for i in range(len(ids)):
            for j in range(i + 1, len(ids)):
                pairs.add((ids[i], ids[j]))
    return Relation(frozenset(domain), frozenset(pairs))


def make_history(
    events: Iterable[Event],
    sessions: Mapping[str, Sequence[str]],
    rt: Relation | Mapping[str, Interval],
) -> History:
    """Assemble a history in canonical layout.  Does not validate; see
    :func:`validate_history`."""
    evs = list(events)
    sess = tuple(
        (client, tuple(sessions[client])) for client in sorted(sessions) if sessions[client]
    )
    order = {eid: (ci, i) for ci, (_, ids) in enumerate(sess) for i, eid in enumerate(ids)}
    evs.sort(key=lambda e: order.get(e.id, (len(sess), e.id)))
    if not isinstance(rt, Relation):
        rt = rt_from_intervals(rt)
    ids = frozenset(e.id for e in evs)
    so = session_order(dict(sess), ids)
    return History(tuple(evs), sess, rt, so)


def validate_history(h: History) -> list[str]:
    """Structural checks; returns human-readable violations (empty = valid)."""
    out: list[str] = []
    ids = [e.id for e in h.events]
    if len(ids) != len(set(ids)):
        out.append("duplicate event ids")
    id_set = set(ids)
    listed: list[str] = []
    for client, sess_ids in h.sessions:
        listed.extend(sess_ids)
        for eid in sess_ids:
            if eid not in id_set:
                out.append(f"session {client} lists unknown event {eid}")
            elif h.event(eid).client != client:
                out.append(f"event {eid} filed under session {client} but carries "
                           f"client {h.event(eid).client}")
    if sorted(listed) != sorted(ids):
        out.append("sessions do not partition the event set")
    if h.rt.domain != frozenset(id_set):
        out.append("rt domain differs from the event set")
        return out
    if not h.rt.is_interval_order():
        out.append("rt not interval order")
    missing = h.so.pairs - h.rt.pairs
    if missing:
        a, b = min(missing)
        out.append(f"so not contained in rt: ({a}, {b})")
    return out


def project(h: History, obj: str) -> History:
    """The sub-history of events on one object (sessions restricted, empty
    sessions dropped, rt induced)."""
    keep = [e for e in h.events if e.obj == obj]
    keep_ids = {e.id for e in keep}
    sessions = {
        client: [i for i in ids if i in keep_ids]
        for client, ids in h.sessions
        if any(i in keep_ids for i in ids)
    }
    return make_history(keep, sessions, h.rt.restrict(keep_ids))


def set_all_fences(h: History, fences: Iterable[str]) -> History:
    fen = frozenset(fences)
    return make_history(
        (e.with_fences(fen) for e in h.events), dict(h.sessions), h.rt
    )


def erase_fences(h: History) -> History:
    return set_all_fences(h, ())


def is_well_fenced(h: History) -> tuple[bool, tuple[str, str] | None]:
    """Whether every cross-object session pair is separated by a push of the
    first object followed by a pull of the second, within the session.

    Returns (verdict, offending pair or None).  The offending pair is the
    first (in session order) e before f on different objects with no such
    fence pair between them.
    """
    by_id = h.by_id
    for _, ids in h.sessions:
        n = len(ids)
        for i in range(n):
            e = by_id[ids[i]]
            for j in range(i + 1, n):
                f = by_id[ids[j]]
                if e.obj == f.obj:
                    continue
                ok = False
                for k in range(i, n):
                    ek = by_id[ids[k]]
                    if not (PUSH in ek.fences and ek.obj == e.obj):
                        continue
                    for m in range(k + 1, j + 1):
                        fm = by_id[ids[m]]
                        if PULL in fm.fences and fm.obj == f.obj:
                            ok = True
                            break
                    if ok:
                        break
                if not ok:
                    return False, (e.id, f.id)
    return True, None


@dataclass(frozen=True)
class AbstractExecution:
    """A history together with acyclic visibility and total arbitration."""

    history: History
    vis: Relation
    ar: TotalOrder

    def structural_violations(self) -> list[str]:
        out = validate_history(self.history)
        ids = self.history.ids
        if self.vis.domain != ids:
            out.append("vis domain differs from the event set")
            return out
        if frozenset(self.ar.sequence) != ids:
            out.append("ar does not enumerate the event set")
            return out
        if not self.vis.is_acyclic():
            out.append("vis cyclic")
        ar_rel = self.ar.as_relation()
        extra = self.vis.pairs - ar_rel.pairs
        if extra:
            a, b = min(extra)
            out.append(f"vis not contained in ar: ({a}, {b})")
        return out

    def with_history(self, h: History) -> "AbstractExecution":
        return AbstractExecution(h, self.vis, self.ar)


# -- fence presets ---------------------------------------------------------


def _normalize_model(model: str) -> str:
    m = model.replace("-", "_").lower()
    if m not in MODELS:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    return m


def preset_fences(model: str, op_is_update: bool) -> frozenset[str]:
    m = _normalize_model(model)
    if m in ("gsc", "gsp"):
        return frozenset()
    if m == "tso":
        return frozenset({PULL})
    if m == "dual_tso":
        return frozenset({PUSH})
    if m == "lin":
        return frozenset({PUSH, PULL})
    # osc: all operations push, updates additionally pull
    return frozenset({PUSH, PULL}) if op_is_update else frozenset({PUSH})


def check_fence_preset(h: History, model: str, semantics=None) -> bool:
    """Whether every event carries the fences its model preset mandates.

    gsp demands exactly no fences; the stronger presets demand at least the
    tabled fences.  osc and the update/read-only split need ``semantics``
    with a classifier.
    """
    m = _normalize_model(model)
    if m == "gsc":
        return True
    if m == "gsp":
        return all(not e.fences for e in h.events)
    if m == "osc":
        if semantics is None or semantics.classify is None:
            raise ValueError("osc preset needs semantics with a classifier")
        for e in h.events:
            need = preset_fences(m, semantics.classify(e.op) == "update")
            if not need <= e.fences:
                return False
        return True
    need = preset_fences(m, True)
    return all(need <= e.fences for e in h.events)


def apply_fence_preset(h: History, model: str, semantics=None) -> History:
    """Rewrite every event's fences to the model's canonical preset."""
    m = _normalize_model(model)
    if m == "gsc":
        return h
    if m == "osc" and (semantics is None or semantics.classify is None):
        raise ValueError("osc preset needs semantics with a classifier")
    events = []
    for e in h.events:
        if m == "osc":
            fen = preset_fences(m, semantics.classify(e.op) == "update")
        else:
            fen = preset_fences(m, True)
        events.append(e.with_fences(fen))
    return make_history(events, dict(h.sessions), h.rt)
