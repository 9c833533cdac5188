"""Schedule synthesis: the scheduling precedence relation, the body order,
the call/return interleaving, witness-to-schedule compilation with replay
verification, and the relational facts the construction relies on."""

import random

import pytest

from gsclab import (
    AbstractExecution,
    Event,
    HistoryError,
    Interval,
    Op,
    Relation,
    SynthesisError,
    TotalOrder,
    body_order,
    extract_execution,
    fixture,
    interleave_calls_returns,
    is_gsc,
    make_history,
    run_to_quiescence,
    scheduling_precedence,
    synthesize_schedule,
)
from gsclab.generators import random_well_fenced_run


def pull_race_execution():
    """One pulling reader that missed an append another reader saw."""
    events = [
        Event("e", "A", "x", Op("read"), (), frozenset({"pull"})),
        Event("g", "B", "x", Op("append", 1), None, frozenset()),
        Event("f", "C", "x", Op("read"), (1,), frozenset()),
    ]
    h = make_history(
        events,
        {"A": ["e"], "B": ["g"], "C": ["f"]},
        Relation.from_pairs(["e", "g", "f"], []),
    )
    return AbstractExecution(h, Relation.from_pairs(h.ids, [("g", "f")]),
                             TotalOrder(("g", "e", "f")))


# -- scheduling precedence ---------------------------------------------------------


def test_precedence_empty_without_pullers(sem):
    for name in ("fig3a", "fig3b", "fig3c"):
        assert scheduling_precedence(fixture(name).witness).pairs == frozenset()


def test_precedence_pull_race(sem):
    # The puller e returned () even though g's append was arbitrated before
    # its snapshot, so e's body must run before anything that observes g.
    x = pull_race_execution()
    assert scheduling_precedence(x).pairs == {("e", "f")}


def test_precedence_on_handoff_witness(sem):
    # The puller g missed only f, but nothing observes f and nothing
    # pushes, so neither arm of the precedence definition fires: keeping
    # f's entry out of g's pull is the slot assigner's job, not the body
    # order's.
    assert scheduling_precedence(fixture("fig5").witness).pairs == frozenset()


# -- body order --------------------------------------------------------------------


def test_body_order_contains_required_relations(sem):
    x = fixture("fig5").witness
    h = x.history
    lt = scheduling_precedence(x)
    q = body_order(x, lt)
    qrel = q.as_relation()
    pushers = h.pushers()
    arbar = Relation(h.ids, frozenset(
        p for p in x.ar.as_relation().pairs if p[1] in pushers))
    for r in (h.rt, x.vis, arbar, lt):
        assert r.pairs <= qrel.pairs


def test_body_order_deterministic(sem):
    x = fixture("fig3a").witness
    assert body_order(x) == body_order(x)


# -- interleaving ------------------------------------------------------------------


def test_interleave_respects_grammar_and_rt(sem):
    x = fixture("fig3a").witness
    h = x.history
    plan = interleave_calls_returns(h, body_order(x, scheduling_precedence(x)))
    pos = {tok: i for i, tok in enumerate(plan.tokens)}
    for e in h.ids:
        assert pos[("call", e)] < pos[("body", e)] < pos[("ret", e)]
    for a, b in zip(plan.q.sequence, plan.q.sequence[1:]):
        assert pos[("body", a)] < pos[("body", b)]
    for e in h.ids:
        for f in h.ids:
            if e == f:
                continue
            if (e, f) in h.rt:
                assert pos[("ret", e)] < pos[("call", f)]
            else:
                assert pos[("call", f)] < pos[("ret", e)]


# -- full synthesis ----------------------------------------------------------------


@pytest.mark.parametrize("name", ["fig3a", "fig3b", "fig3c", "fig5"])
def test_fixture_witness_round_trip(sem, name):
    x = fixture(name).witness
    sched = synthesize_schedule(x, sem)
    run = run_to_quiescence(sched, sem)
    got = extract_execution(run)
    assert got.history.canonical() == x.history.canonical()
    canon = {e: c for e, c in zip(
        sorted(x.history.ids, key=x.ar.position),
        sorted(got.history.ids, key=got.ar.position))}
    assert {(canon[a], canon[b]) for a, b in x.vis.pairs} == got.vis.pairs


def test_pull_race_is_member_but_not_schedulable(sem):
    # f observes g across clients without a returned-before edge and
    # without pulling: g's entry would have to reach f's client before
    # f's call, which forces g to return first, contradicting the empty
    # real-time order.  The laws accept the execution; no schedule exists.
    from gsclab import can_produce, is_gsc
    x = pull_race_execution()
    assert is_gsc(x.history, sem).member
    with pytest.raises(SynthesisError):
        synthesize_schedule(x, sem)
    assert not can_produce(x.history, sem)


def test_synthesis_rejects_lawless_witness(sem):
    w = fixture("fig3a").witness
    broken = AbstractExecution(
        w.history, w.vis - Relation.from_pairs(w.history.ids, [("e1", "e2")]), w.ar)
    with pytest.raises(HistoryError, match="fails axioms"):
        synthesize_schedule(broken, sem)


def test_synthesis_rejects_grammar_infeasible_witness(sem):
    # Valid witness, impossible timing: the reader saw the append, so the
    # append's body must run first; but with no returned-before pair the
    # grammar forces the reader's call before the append's return, and a
    # same-snapshot read cannot see an entry appended after its call.
    events = [
        Event("g", "A", "x", Op("append", 1), None, frozenset()),
        Event("e", "B", "x", Op("read"), (1,), frozenset()),
    ]
    h = make_history(events, {"A": ["g"], "B": ["e"]},
                     Relation.from_pairs(["g", "e"], []))
    x = AbstractExecution(h, Relation.from_pairs(h.ids, [("g", "e")]),
                          TotalOrder(("g", "e")))
    with pytest.raises(SynthesisError):
        synthesize_schedule(x, sem)
    assert isinstance(SynthesisError("x"), AssertionError)


def test_synthesis_round_trips_generated_runs(sem):
    rng = random.Random(23)
    for _ in range(15):
        h, x = random_well_fenced_run(rng, sem)
        if not h.events:
            continue
        sched = synthesize_schedule(x, sem)
        got = extract_execution(run_to_quiescence(sched, sem))
        assert got.history.canonical() == x.history.canonical()


def test_synthesis_carries_pending_through_flush(sem):
    # The unfenced append A:0 must land on the server after B:0's entry,
    # but its client is never idle late enough for a standalone push token:
    # B:0's window overlaps both of A's, so B:0 returns (and pushes) only
    # after A:1's call.  The only legal placement rides the pending-queue
    # flush inside A:1's push-fenced body.
    events = [
        Event("A:0", "A", "x", Op("append", 1), None, frozenset()),
        Event("A:1", "A", "x", Op("read"), (2, 1), frozenset({"push", "pull"})),
        Event("B:0", "B", "x", Op("append", 2), None, frozenset()),
    ]
    h = make_history(events, {"A": ["A:0", "A:1"], "B": ["B:0"]},
                     Relation.from_pairs(["A:0", "A:1", "B:0"], [("A:0", "A:1")]))
    res = is_gsc(h, sem)
    assert res.member
    sched = synthesize_schedule(res.witness, sem)
    got = extract_execution(run_to_quiescence(sched, sem))
    assert got.history == h
    assert got.vis == res.witness.vis


# -- relational facts behind the construction ----------------------------------------


def relations_of(x):
    h = x.history
    lt = scheduling_precedence(x)
    arbar = Relation(h.ids, frozenset(
        p for p in x.ar.as_relation().pairs if p[1] in h.pushers()))
    return h, x.vis, arbar, lt


def assert_scheduling_facts(x):
    h, vis, arbar, lt = relations_of(x)
    rt = h.rt
    vns = vis - h.so

    # Real-time absorbs visibility and arbitration-into-pushers hops.
    assert rt.compose(vis).compose(rt).pairs <= rt.pairs
    assert rt.compose(arbar).compose(rt).pairs <= rt.pairs

    # The precedence guard is a strict partial order...
    assert lt.is_strict_partial_order()
    # ...absorbing arbitration-into-pushers and observed edges on the right,
    assert lt.compose(arbar).pairs <= lt.pairs
    assert lt.compose(vns).pairs <= lt.pairs
    # ...and closed over real-time bridges between guard edges.
    bridge = rt.compose((vns | arbar).reflexive())
    assert lt.compose(bridge).compose(lt).pairs <= lt.pairs

    # Everything the body order must include is jointly acyclic.
    union = rt | vis | arbar | lt
    assert union.is_acyclic()

    # The closure of the union stays within the bounded-path cover.
    s = (rt | vns | arbar | rt.compose(vns) | vns.compose(rt)
         | rt.compose(arbar) | arbar.compose(rt))
    assert s.compose(s).pairs <= s.pairs
    cover = (s | lt | s.compose(lt) | lt.compose(s)
             | s.compose(lt).compose(s))
    assert union.transitive_closure().pairs <= cover.pairs


def test_scheduling_facts_on_fixture_witnesses(sem):
    for name in ("fig3a", "fig3b", "fig3c", "fig5"):
        assert_scheduling_facts(fixture(name).witness)


def test_scheduling_facts_on_pull_race(sem):
    assert_scheduling_facts(pull_race_execution())


def test_scheduling_facts_on_generated_runs(sem):
    rng = random.Random(29)
    for _ in range(20):
        _, x = random_well_fenced_run(rng, sem)
        assert_scheduling_facts(x)
