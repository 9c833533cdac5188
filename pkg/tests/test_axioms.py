"""Law checker and membership tests: per-law verdicts on known-good and
deliberately broken executions, the frozen verdict table over all fence
presets, refutation narratives, and fast-vs-enumerative agreement."""

import dataclasses

import pytest

from gsclab import (
    AXIOM_NAMES,
    AbstractExecution,
    Event,
    HistoryError,
    Interval,
    Op,
    Relation,
    TotalOrder,
    all_fixtures,
    apply_fence_preset,
    check_axioms,
    check_lin,
    check_osc,
    evaluation_context,
    fixture,
    is_gsc,
    make_history,
    minimal_visibility,
)
from gsclab.fixtures import fig3a_pull_variant, fig3b_push_variant, fig3c_fence_variant


def three_singletons(vis_pairs, ar_seq, fences=None, rvals=None, kinds=None):
    fences = fences or {}
    rvals = rvals or {}
    kinds = kinds or {}
    events = []
    for i, eid in enumerate(("a", "b", "c")):
        kind, value = kinds.get(eid, ("append", i + 1))
        events.append(Event(eid, f"C{eid}", "x", Op(kind, value),
                            rvals.get(eid), frozenset(fences.get(eid, ()))))
    sessions = {f"C{eid}": [eid] for eid in ("a", "b", "c")}
    intervals = {"a": Interval(0, 1), "b": Interval(2, 3), "c": Interval(4, 5)}
    h = make_history(events, sessions, intervals)
    return AbstractExecution(h, Relation.from_pairs(h.ids, vis_pairs), TotalOrder(ar_seq))


def test_axiom_names_are_stable():
    assert AXIOM_NAMES == (
        "RETVAL", "RYW", "MONOTONICVIEW", "OBSERVEDVIS",
        "PUSHEDVIS", "OBSERVEDAR", "PUSHEDAR", "EVENTUAL",
    )


@pytest.mark.parametrize("name", ["fig3a", "fig3b", "fig3c", "fig5"])
def test_fixture_witnesses_pass_all_laws(sem, name):
    report = check_axioms(fixture(name).witness, sem)
    assert report.ok
    assert report.failed() == ()
    assert all(report.verdict(n).holds for n in AXIOM_NAMES)


def test_verdict_lookup_unknown_name(sem):
    report = check_axioms(fixture("fig3a").witness, sem)
    with pytest.raises(KeyError):
        report.verdict("NOSUCHLAW")


def test_structural_problems_reported(sem):
    w = fixture("fig3a").witness
    broken = AbstractExecution(w.history, w.vis, TotalOrder(tuple(reversed(w.ar.sequence))))
    report = check_axioms(broken, sem)
    assert not report.ok
    assert any("ar" in p for p in report.structural)


def test_retval_failure(sem):
    # b and c read x without seeing the append, but b claims it did.
    x = three_singletons(
        [], ("a", "b", "c"),
        kinds={"b": ("read", None), "c": ("read", None)},
        rvals={"b": (1,), "c": ()},
    )
    report = check_axioms(x, sem)
    assert "RETVAL" in report.failed()
    bad = report.verdict("RETVAL")
    assert any("b" in pair for pair in bad.counterexamples) or bad.counterexamples


def test_ryw_failure(sem):
    events = [
        Event("a", "A", "x", Op("append", 1), None, frozenset()),
        Event("b", "A", "x", Op("read"), (), frozenset()),
    ]
    h = make_history(events, {"A": ["a", "b"]},
                     {"a": Interval(0, 1), "b": Interval(2, 3)})
    x = AbstractExecution(h, Relation.from_pairs(h.ids, []), TotalOrder(("a", "b")))
    report = check_axioms(x, sem)
    assert "RYW" in report.failed()
    assert ("a", "b") in report.verdict("RYW").counterexamples


def test_monotonic_view_failure(sem):
    events = [
        Event("a", "A", "x", Op("append", 1), None, frozenset()),
        Event("b", "B", "x", Op("read"), (1,), frozenset()),
        Event("c", "B", "x", Op("read"), (), frozenset()),
    ]
    h = make_history(events, {"A": ["a"], "B": ["b", "c"]},
                     {"a": Interval(0, 1), "b": Interval(2, 3), "c": Interval(4, 5)})
    x = AbstractExecution(h, Relation.from_pairs(h.ids, [("a", "b"), ("b", "c")]),
                          TotalOrder(("a", "b", "c")))
    report = check_axioms(x, sem)
    assert "MONOTONICVIEW" in report.failed()
    assert ("a", "c") in report.verdict("MONOTONICVIEW").counterexamples


def test_pushed_vis_failure(sem):
    # g pushes, e pulls after it in real time, yet e does not see g.
    events = [
        Event("g", "A", "x", Op("append", 1), None, frozenset({"push"})),
        Event("e", "B", "x", Op("read"), (), frozenset({"pull"})),
    ]
    h = make_history(events, {"A": ["g"], "B": ["e"]},
                     {"g": Interval(0, 1), "e": Interval(2, 3)})
    x = AbstractExecution(h, Relation.from_pairs(h.ids, []), TotalOrder(("g", "e")))
    report = check_axioms(x, sem)
    assert "PUSHEDVIS" in report.failed()


def test_observed_ar_failure(sem):
    # a is visible to b, b returns before c, yet c is arbitrated before a.
    x = three_singletons([("a", "b")], ("c", "a", "b"))
    h = x.history
    rt = Relation.from_pairs(h.ids, [("a", "b"), ("a", "c"), ("b", "c")])
    x = AbstractExecution(dataclasses.replace(h, rt=rt), x.vis, x.ar)
    report = check_axioms(x, sem)
    assert "OBSERVEDAR" in report.failed()
    assert ("a", "c") in report.verdict("OBSERVEDAR").counterexamples


def test_pushed_ar_failure(sem):
    x = three_singletons([], ("b", "c", "a"), fences={"a": ("push",)})
    h = x.history
    rt = Relation.from_pairs(h.ids, [("a", "b"), ("a", "c"), ("b", "c")])
    x = AbstractExecution(dataclasses.replace(h, rt=rt), x.vis, x.ar)
    report = check_axioms(x, sem)
    assert "PUSHEDAR" in report.failed()


def test_evaluation_context_orders_by_ar(sem):
    w = fixture("fig3a").witness
    ctx = evaluation_context(w, "e2")
    assert [e.id for e in ctx] == ["e1", "f1"]


# -- minimal visibility ----------------------------------------------------------


def test_minimal_visibility_on_witness_ar(sem):
    w = fixture("fig3a").witness
    vis, closure = minimal_visibility(w.history, w.ar)
    # The least closed visibility sits inside the witness's visibility.
    assert vis.pairs <= w.vis.pairs
    for pair in sorted(vis.pairs):
        chain = closure.chain(pair)
        assert chain
        assert all(" -> " in line and " by " in line for line in chain)
        assert chain[-1].startswith(f"{pair[0]} -> {pair[1]} by ")


def test_minimal_visibility_includes_seed(sem):
    w = fixture("fig3b").witness
    seed = Relation.from_pairs(w.history.ids, [("e1", "f2")])
    vis, _ = minimal_visibility(w.history, w.ar, seed)
    assert ("e1", "f2") in vis.pairs


# -- membership: frozen verdict table ----------------------------------------------

VERDICTS = {
    "fig3a": {"gsc": True, "gsp": True, "tso": False, "dual_tso": True,
              "osc": False, "lin": False},
    "fig3b": {"gsc": True, "gsp": True, "tso": True, "dual_tso": False,
              "osc": False, "lin": False},
    "fig3c": {"gsc": True, "gsp": True, "tso": True, "dual_tso": True,
              "osc": False, "lin": False},
    "fig3d": {"gsc": False, "gsp": False, "tso": False, "dual_tso": False,
              "osc": False, "lin": False},
    "fig5": {"gsc": True, "gsp": True, "tso": True, "dual_tso": True,
             "osc": True, "lin": False},
}


def model_verdict(h, model, sem):
    refenced = apply_fence_preset(h, model, sem)
    if model == "lin":
        return bool(check_lin(refenced, sem))
    if model == "osc":
        return bool(check_osc(refenced, sem))
    return bool(is_gsc(refenced, sem))


@pytest.mark.parametrize("name", sorted(VERDICTS))
def test_verdict_table_row(sem, name):
    fix = fixture(name)
    assert dict(fix.membership) == VERDICTS[name]
    got = {m: model_verdict(fix.history, m, sem) for m in VERDICTS[name]}
    assert got == VERDICTS[name]


@pytest.mark.parametrize("variant", [fig3a_pull_variant, fig3b_push_variant,
                                     fig3c_fence_variant])
def test_flip_variants_are_non_members(sem, variant):
    assert not is_gsc(variant(), sem)


# -- membership mechanics -----------------------------------------------------------


def test_member_result_is_truthy_with_witness(sem):
    res = is_gsc(fixture("fig3a").history, sem)
    assert res and res.member
    assert res.method == "decoded"
    assert check_axioms(res.witness, sem).ok


def test_long_fork_refutation_narrative(sem):
    res = is_gsc(fixture("fig3d").history, sem)
    assert not res
    text = " ".join(res.refutations).lower()
    assert "retval" in text
    assert "observed-visibility" in text
    assert "monotonic-view" in text


def test_membership_event_cap(sem):
    with pytest.raises(HistoryError, match="over the cap"):
        is_gsc(fixture("fig3d").history, sem, max_events=3)


def test_membership_rejects_invalid_history(sem):
    h = fixture("fig3a").history
    bad = dataclasses.replace(h, rt=Relation.from_pairs(h.ids, [("e2", "e1")]))
    with pytest.raises(HistoryError):
        is_gsc(bad, sem)


def test_duplicate_values_fall_back_to_enumerative(sem):
    events = [
        Event("a", "A", "x", Op("append", 1), None, frozenset()),
        Event("b", "B", "x", Op("append", 1), None, frozenset()),
        Event("c", "C", "x", Op("read"), (1,), frozenset()),
    ]
    h = make_history(events, {"A": ["a"], "B": ["b"], "C": ["c"]},
                     {"a": Interval(0, 1), "b": Interval(0, 1), "c": Interval(2, 3)})
    res = is_gsc(h, sem)
    assert res.member
    assert res.method == "enumerative"


@pytest.mark.parametrize("name", ["fig3a", "fig3b", "fig3c", "fig3d", "fig5"])
def test_decoded_and_enumerative_agree_on_fixtures(sem, name):
    h = fixture(name).history
    slow_sem = dataclasses.replace(sem, decode_visibility=None)
    fast = is_gsc(h, sem)
    slow = is_gsc(h, slow_sem)
    assert fast.method == "decoded" and slow.method == "enumerative"
    assert fast.member == slow.member
    if slow.member:
        assert check_axioms(slow.witness, sem).ok


def test_witnesses_satisfy_transitivity_and_joint_acyclicity(sem):
    # Accepted executions have transitive visibility, and visibility joined
    # with returned-before stays acyclic.
    for fix in all_fixtures():
        if fix.witness is None:
            continue
        x = fix.witness
        vis = x.vis
        assert vis.compose(vis).pairs <= vis.pairs
        assert (vis | x.history.rt).is_acyclic()
