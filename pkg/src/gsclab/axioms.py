"""Declarative consistency laws and the membership decision procedure.

An abstract execution (history + visibility + arbitration) satisfies the
model when all eight laws hold:

  RETVAL         every rval equals eval over the event's same-object
                 visibility predecessors, ordered by arbitration
  RYW            session order is visible (read your writes)
  MONOTONICVIEW  visibility survives along a session (vis;so <= vis)
  OBSERVEDVIS    what a cross-session predecessor observed is observed
                 transitively: ar? ; (vis \\ so) ; (rt & E x EPull)? <= vis
  PUSHEDVIS      pushed work precedes pull-fenced work:
                 ar? ; (rt? & EPush x EPull) <= vis?
  OBSERVEDAR     observed cross-session visibility respects real time in
                 arbitration: (vis \\ so) ; rt <= ar
  PUSHEDAR       pushed events are arbitrated before anything after them in
                 real time: rt & (EPush x E) <= ar
  EVENTUAL       every event is eventually visible (vacuous here: all
                 histories are finite)

Membership (is there any visibility/arbitration pair making a history
satisfy all laws) is decided two ways.  When return values pin down each
observer's visible update set (sequence reads over distinct values), the
forced edges are decoded directly and only arbitration is searched.
Otherwise candidate visible-update sets are enumerated per observer.  Both
paths rely on the laws RYW/MONOTONICVIEW/OBSERVEDVIS/PUSHEDVIS being
monotone in vis: the least closure of the forced edges is contained in any
witness, so rejecting a closure that breaks RETVAL or escapes the candidate
arbitration rejects every witness over that arbitration.

Enumerating update subsets only (when the semantics classifies operations)
is justified by the read-only law: eval ignores read-only context entries,
so visibility of read-only events never changes an rval.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .model import (
    AbstractExecution,
    Event,
    History,
    HistoryError,
    validate_history,
)
from .relations import Relation, TotalOrder, linear_extensions
from .semantics import ObjectSemantics

AXIOM_NAMES = (
    "RETVAL",
    "RYW",
    "MONOTONICVIEW",
    "OBSERVEDVIS",
    "PUSHEDVIS",
    "OBSERVEDAR",
    "PUSHEDAR",
    "EVENTUAL",
)

DEFAULT_MAX_EVENTS = 9


@dataclass(frozen=True)
class AxiomVerdict:
    name: str
    holds: bool
    counterexamples: tuple = ()
    note: str = ""


@dataclass(frozen=True)
class AxiomReport:
    verdicts: tuple[AxiomVerdict, ...]
    structural: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.structural and all(v.holds for v in self.verdicts)

    def failed(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.verdicts if not v.holds)

    def verdict(self, name: str) -> AxiomVerdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)


def evaluation_context(x: AbstractExecution, event_id: str) -> tuple[Event, ...]:
    """The same-object visibility predecessors of an event, in arbitration
    order.  RETVAL evaluates the event's operation against exactly this."""
    e = x.history.by_id[event_id]
    pred = x.vis.predecessors(event_id)
    same = [x.history.by_id[a] for a in pred if x.history.by_id[a].obj == e.obj]
    same.sort(key=lambda ev: x.ar.position(ev.id))
    return tuple(same)


def _limit(pairs, n=4):
    return tuple(sorted(pairs))[:n]


def check_axioms(x: AbstractExecution, semantics: ObjectSemantics) -> AxiomReport:
    """Evaluate all eight laws literally against a concrete execution."""
    structural = tuple(x.structural_violations())
    if structural:
        return AxiomReport((), structural)
    h = x.history
    ids = h.ids
    vis, so, rt = x.vis, h.so, h.rt
    ar_rel = x.ar.as_relation()
    ar_refl = ar_rel.reflexive()
    pushers, pullers = h.pushers(), h.pullers()
    verdicts = []

    bad = []
    for e in h.events:
        ctx = tuple(ev.op for ev in evaluation_context(x, e.id))
        if semantics.eval(ctx, e.op) != e.rval:
            bad.append((e.id, semantics.eval(ctx, e.op)))
    verdicts.append(AxiomVerdict("RETVAL", not bad, _limit(bad),
                                 "rval must equal eval over visible same-object context"))

    missing = so.pairs - vis.pairs
    verdicts.append(AxiomVerdict("RYW", not missing, _limit(missing)))

    missing = vis.compose(so).pairs - vis.pairs
    verdicts.append(AxiomVerdict("MONOTONICVIEW", not missing, _limit(missing)))

    rt_pull = Relation(ids, frozenset(p for p in rt.pairs if p[1] in pullers))
    lhs = ar_refl.compose(vis - so).compose(rt_pull.reflexive())
    missing = lhs.pairs - vis.pairs
    verdicts.append(AxiomVerdict("OBSERVEDVIS", not missing, _limit(missing)))

    push_pull = rt.reflexive() & Relation.product(ids, pushers, pullers)
    lhs = ar_refl.compose(push_pull)
    missing = frozenset(p for p in lhs.pairs if p[0] != p[1]) - vis.pairs
    verdicts.append(AxiomVerdict("PUSHEDVIS", not missing, _limit(missing)))

    missing = (vis - so).compose(rt).pairs - ar_rel.pairs
    verdicts.append(AxiomVerdict("OBSERVEDAR", not missing, _limit(missing)))

    missing = frozenset(p for p in rt.pairs if p[0] in pushers) - ar_rel.pairs
    verdicts.append(AxiomVerdict("PUSHEDAR", not missing, _limit(missing)))

    verdicts.append(AxiomVerdict("EVENTUAL", True, (),
                                 "vacuously true: histories here are finite"))
    return AxiomReport(tuple(verdicts))


# -- least visibility closure --------------------------------------------------


@dataclass
class Derivation:
    rule: str
    via: tuple[str, str] | None = None


class Closure:
    """Least visibility relation containing the seed and closed under the
    monotone laws, for one fixed arbitration.  Tracks a derivation per pair
    so refutations can say which law forced an unwanted edge.

    conflict is set when a law demands a reflexive pair where the law's
    right-hand side is vis rather than vis?; no execution over this
    arbitration can satisfy the laws then.
    """

    def __init__(self, h: History, ar: TotalOrder):
        self.h = h
        self.ar = ar
        self.pairs: set[tuple[str, str]] = set()
        self.why: dict[tuple[str, str], Derivation] = {}
        self.conflict: str | None = None
        ids = h.ids
        pullers = h.pullers()
        self._rt_pull_succ: dict[str, tuple[str, ...]] = {}
        for a, b in h.rt.pairs:
            if b in pullers:
                self._rt_pull_succ.setdefault(a, ())
                self._rt_pull_succ[a] += (b,)
        self._so_succ = {i: tuple(sorted(h.so.successors(i))) for i in ids}

    def _ar_preds_refl(self, a: str) -> list[str]:
        pos = self.ar.position(a)
        return list(self.ar.sequence[: pos + 1])

    def add(self, a: str, b: str, rule: str, via=None) -> bool:
        if a == b:
            if rule in ("monotonic-view", "observed-visibility"):
                self.conflict = (f"law {rule} forces {a} to observe itself "
                                 f"(via {via})")
            return False
        if (a, b) in self.pairs:
            return False
        self.pairs.add((a, b))
        self.why[(a, b)] = Derivation(rule, via)
        return True

    def seed(self, pairs, rule: str) -> None:
        for a, b in sorted(pairs):
            self.add(a, b, rule)

    def seed_pushed(self) -> None:
        # ar? ; (rt? & EPush x EPull) <= vis?: ground, independent of vis
        h = self.h
        base = set(p for p in h.rt.pairs
                   if p[0] in h.pushers() and p[1] in h.pullers())
        base |= {(e, e) for e in h.pushers() & h.pullers()}
        for a, b in sorted(base):
            for c in self._ar_preds_refl(a):
                if c != b:
                    self.add(c, b, "pushed-visibility", (a, b))

    def close(self) -> None:
        so_pairs = self.h.so.pairs
        queue = list(sorted(self.pairs))
        while queue and self.conflict is None:
            a, b = queue.pop()
            for c in self._so_succ.get(b, ()):
                if self.add(a, c, "monotonic-view", (a, b)):
                    queue.append((a, c))
                if self.conflict:
                    return
            if (a, b) not in so_pairs:
                # ar? ; {(a, b)} ; (rt & E x EPull)? <= vis
                rights = (b,) + self._rt_pull_succ.get(b, ())
                for left in self._ar_preds_refl(a):
                    for right in rights:
                        if (left, right) != (a, b):
                            if self.add(left, right, "observed-visibility", (a, b)):
                                queue.append((left, right))
                            if self.conflict:
                                return

    def relation(self) -> Relation:
        return Relation(self.h.ids, frozenset(self.pairs))

    def chain(self, pair: tuple[str, str]) -> list[str]:
        """Narrate how a pair was derived, walking via-links back to seeds."""
        out: list[str] = []
        seen = set()
        todo = [pair]
        while todo:
            p = todo.pop()
            if p in seen or p not in self.why:
                continue
            seen.add(p)
            d = self.why[p]
            step = f"{p[0]} -> {p[1]} by {d.rule}"
            if d.via:
                step += f" (from {d.via[0]} -> {d.via[1]})"
                todo.append(d.via)
            out.append(step)
        return list(reversed(out))


def minimal_visibility(h: History, ar: TotalOrder,
                       seed: Relation | None = None) -> tuple[Relation, Closure]:
    """Least visibility over a fixed arbitration: session order, the pushed
    ground edges, plus the optional seed, closed under the monotone laws."""
    cl = Closure(h, ar)
    cl.seed(h.so.pairs, "session-order")
    if seed is not None:
        cl.seed(seed.pairs, "seed")
    cl.seed_pushed()
    cl.close()
    return cl.relation(), cl


# -- decoding forced visibility from return values ----------------------------


@dataclass(frozen=True)
class DecodedConstraints:
    """Per-observer exact visible-update sets recovered from return values.

    edges: forced update -> observer visibility pairs.
    exact: observer id -> the exact set of same-object updates it sees.
    chains: arbitration pairs forced by the order updates appear in an rval.
    unattainable: observers whose rval no update subset can produce.
    ambiguous: True when some rval admits several decodings (fast path off).
    """

    edges: frozenset[tuple[str, str]]
    exact: tuple[tuple[str, frozenset[str]], ...]
    chains: frozenset[tuple[str, str]]
    unattainable: tuple[str, ...]
    ambiguous: bool

    def exact_map(self) -> dict[str, frozenset[str]]:
        return dict(self.exact)


def decoded_visibility(h: History, semantics: ObjectSemantics) -> DecodedConstraints | None:
    """Invert return values into visibility constraints, when the semantics
    supports it.  None when there is no decoder."""
    if semantics.decode_visibility is None:
        return None
    edges: set[tuple[str, str]] = set()
    exact: list[tuple[str, frozenset[str]]] = []
    chains: set[tuple[str, str]] = set()
    unattainable: list[str] = []
    ambiguous = False
    for e in h.events:
        candidates = tuple(
            (f.id, f.op) for f in h.events
            if f.obj == e.obj and f.id != e.id and semantics.is_update(f.op)
        )
        options = semantics.decode_visibility(e.op, e.rval, candidates)
        if options is None:
            continue
        if len(options) == 0:
            unattainable.append(e.id)
            continue
        if len(options) > 1:
            ambiguous = True
            continue
        (order,) = options
        exact.append((e.id, frozenset(order)))
        edges.update((u, e.id) for u in order)
        chains.update(zip(order, order[1:]))
    return DecodedConstraints(frozenset(edges), tuple(exact), frozenset(chains),
                              tuple(unattainable), ambiguous)


# -- membership ----------------------------------------------------------------


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    witness: AbstractExecution | None
    method: str
    stats: dict = field(compare=False, default_factory=dict)
    refutations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.member


def _find_cycle_text(h: History, rel: Relation, labels: dict) -> str:
    """A short narrative for a cyclic arbitration seed."""
    # find one cycle by DFS
    graph = {i: sorted(rel.successors(i)) for i in rel.domain}
    state: dict[str, int] = {}
    stack: list[str] = []

    def dfs(v: str) -> list[str] | None:
        state[v] = 1
        stack.append(v)
        for w in graph[v]:
            if state.get(w, 0) == 1:
                return stack[stack.index(w):] + [w]
            if state.get(w, 0) == 0:
                got = dfs(w)
                if got:
                    return got
        state[v] = 2
        stack.pop()
        return None

    cycle = None
    for v in sorted(graph):
        if state.get(v, 0) == 0:
            cycle = dfs(v)
            if cycle:
                break
    if not cycle:
        return "arbitration constraints are cyclic"
    steps = []
    for a, b in zip(cycle, cycle[1:]):
        steps.append(f"{a} -> {b} ({labels.get((a, b), 'required')})")
    return "arbitration constraints are cyclic: " + ", ".join(steps)


def _required_ar_seed(h: History, decoded: DecodedConstraints | None
                      ) -> tuple[Relation, dict]:
    """Pairs every witness arbitration must contain, with labels for
    refutation text.  Soundness: vis <= ar structurally, so session order
    (RYW) and decoded update edges sit inside ar; PUSHEDAR puts pushed
    real-time pairs there; RETVAL orders an observer's visible updates by
    the rval order."""
    labels: dict[tuple[str, str], str] = {}
    pairs: set[tuple[str, str]] = set()
    for p in h.so.pairs:
        pairs.add(p)
        labels.setdefault(p, "session order")
    for p in h.rt.pairs:
        if p[0] in h.pushers():
            pairs.add(p)
            labels.setdefault(p, "pushed before in real time (PUSHEDAR)")
    if decoded is not None:
        for p in decoded.chains:
            pairs.add(p)
            labels.setdefault(p, "return value orders these updates (RETVAL)")
        for p in decoded.edges:
            pairs.add(p)
            labels.setdefault(p, "observed update (RETVAL, vis inside ar)")
    return Relation(h.ids, frozenset(pairs)), labels


def _narrate_escape(cl: Closure, pair: tuple[str, str], reason: str) -> str:
    return reason + ": " + "; ".join(cl.chain(pair))


def _try_ar(h: History, ar: TotalOrder, seed_vis: frozenset,
            exact: dict[str, frozenset[str]], semantics: ObjectSemantics,
            stats: dict) -> tuple[AbstractExecution | None, str | None]:
    """Close the forced visibility over one arbitration and check the laws.
    Returns (witness, None) or (None, refutation)."""
    stats["closures"] = stats.get("closures", 0) + 1
    vis, cl = minimal_visibility(h, ar, Relation(h.ids, seed_vis))
    if cl.conflict:
        return None, f"ar {list(ar.sequence)}: {cl.conflict}"
    for a, b in vis.pairs:
        if not ar.before(a, b):
            return None, _narrate_escape(
                cl, (a, b),
                f"ar {list(ar.sequence)}: forced visibility {a} -> {b} "
                f"contradicts this arbitration")
    by_id = h.by_id
    for obs, want in exact.items():
        got = frozenset(
            a for a in vis.predecessors(obs)
            if by_id[a].obj == by_id[obs].obj and semantics.is_update(by_id[a].op)
        )
        if got != want:
            extra = sorted(got - want)
            culprit = (extra[0], obs) if extra else None
            msg = (f"ar {list(ar.sequence)}: {obs} must see exactly "
                   f"{sorted(want)} to return {by_id[obs].rval!r} (RETVAL) "
                   f"but the laws force {sorted(got)}")
            if culprit and culprit in cl.why:
                msg = _narrate_escape(cl, culprit, msg)
            return None, msg
    x = AbstractExecution(h, vis, ar)
    report = check_axioms(x, semantics)
    if report.ok:
        return x, None
    names = ", ".join(report.failed())
    return None, f"ar {list(ar.sequence)}: laws violated: {names}"


def _candidate_sets(h: History, ar: TotalOrder, e: Event,
                    semantics: ObjectSemantics) -> list[frozenset[str]]:
    """Visible-update candidates for one observer under a fixed arbitration:
    subsets of same-object updates arbitrated before it, containing its
    same-object session predecessors, consistent with its rval."""
    by_id = h.by_id
    if semantics.classify is not None:
        pool = [f for f in h.events
                if f.obj == e.obj and f.id != e.id and semantics.is_update(f.op)
                and ar.before(f.id, e.id)]
    else:
        pool = [f for f in h.events if f.obj == e.obj and f.id != e.id
                and ar.before(f.id, e.id)]
    pool_ids = {f.id for f in pool}
    must = {a for a in h.so.predecessors(e.id) if a in pool_ids}
    optional = sorted(pool_ids - must)
    out = []
    for k in range(len(optional) + 1):
        for combo in itertools.combinations(optional, k):
            chosen = must | set(combo)
            ctx = tuple(by_id[a].op for a in sorted(chosen, key=ar.position))
            if semantics.eval(ctx, e.op) == e.rval:
                out.append(frozenset(chosen))
    out.sort(key=lambda s: (len(s), sorted(s)))
    return out


def is_gsc(h: History, semantics: ObjectSemantics,
           max_events: int = DEFAULT_MAX_EVENTS,
           max_refutations: int = 3) -> MembershipResult:
    """Decide whether any visibility/arbitration pair satisfies all laws.

    Return-value decoding drives the fast path; otherwise visible-update
    sets are enumerated per context-sensitive event.  The witness, when one
    exists, uses the lexicographically least accepting arbitration and the
    least visibility over it.
    """
    problems = validate_history(h)
    if problems:
        raise HistoryError("; ".join(problems))
    if len(h.events) > max_events:
        raise HistoryError(
            f"history has {len(h.events)} events, over the cap {max_events}; "
            f"raise max_events explicitly for larger inputs")
    stats: dict = {"ars_tried": 0, "closures": 0, "assignments_tried": 0}
    refutations: list[str] = []

    decoded = decoded_visibility(h, semantics)
    if decoded is not None and decoded.unattainable:
        for obs in decoded.unattainable[:max_refutations]:
            e = h.by_id[obs]
            refutations.append(
                f"{obs} returned {e.rval!r} but no subset of the other "
                f"{e.obj} updates evaluates to that (RETVAL)")
        return MembershipResult(False, None, "decoded", stats, tuple(refutations))

    use_decoded = (decoded is not None and not decoded.ambiguous
                   and semantics.rval_determines_visibility)

    if use_decoded:
        seed_ar, labels = _required_ar_seed(h, decoded)
        exact = decoded.exact_map()
        seed_vis = decoded.edges
        if not seed_ar.is_acyclic():
            refutations.append(_find_cycle_text(h, seed_ar, labels))
            return MembershipResult(False, None, "decoded", stats, tuple(refutations))
        for ar in linear_extensions(seed_ar):
            stats["ars_tried"] += 1
            witness, refutation = _try_ar(h, ar, seed_vis, exact, semantics, stats)
            if witness is not None:
                return MembershipResult(True, witness, "decoded", stats)
            if len(refutations) < max_refutations:
                refutations.append(refutation)
        return MembershipResult(False, None, "decoded", stats, tuple(refutations))

    # enumerative path: search arbitrations, then exact visible-update sets
    # per context-sensitive event
    seed_ar, labels = _required_ar_seed(h, None)
    if not seed_ar.is_acyclic():
        refutations.append(_find_cycle_text(h, seed_ar, labels))
        return MembershipResult(False, None, "enumerative", stats, tuple(refutations))
    observers = [e for e in h.events if semantics.context_sensitive(e.op)]
    for ar in linear_extensions(seed_ar):
        stats["ars_tried"] += 1
        menus = []
        feasible = True
        for e in sorted(observers, key=lambda e: ar.position(e.id)):
            sets = _candidate_sets(h, ar, e, semantics)
            if not sets:
                if len(refutations) < max_refutations:
                    refutations.append(
                        f"ar {list(ar.sequence)}: no visible-update set under "
                        f"this arbitration lets {e.id} return {e.rval!r} (RETVAL)")
                feasible = False
                break
            menus.append((e.id, sets))
        if not feasible:
            continue
        for choice in itertools.product(*(sets for _, sets in menus)):
            stats["assignments_tried"] += 1
            exact = {obs: chosen for (obs, _), chosen in zip(menus, choice)}
            seed_vis = frozenset(
                (u, obs) for obs, chosen in exact.items() for u in chosen)
            witness, refutation = _try_ar(h, ar, seed_vis, exact, semantics, stats)
            if witness is not None:
                return MembershipResult(True, witness, "enumerative", stats)
        if len(refutations) < max_refutations:
            refutations.append(
                f"ar {list(ar.sequence)}: every RETVAL-consistent visibility "
                f"assignment breaks the laws")
    return MembershipResult(False, None, "enumerative", stats, tuple(refutations))
