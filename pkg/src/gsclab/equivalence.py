"""All-push and all-pull forms of fence-free executions.

A fence-free execution satisfying the axioms stays valid when every event
is made pushing and returns-before is strengthened to the arbitration
order, and when every event is made pulling and returns-before is
strengthened to a total order containing visibility and the scheduling
precedence of the all-pull image.  Together with fence erasure, membership
is preserved across the three fencing disciplines as long as the
returns-before order may be re-chosen; the flip fixtures show it is not
preserved when returns-before is pinned.
"""

from __future__ import annotations

from .axioms import check_axioms
from .model import (
    PULL,
    PUSH,
    AbstractExecution,
    HistoryError,
    erase_fences,
    make_history,
)
from .relations import CycleError, extend_to_total
from .semantics import ObjectSemantics
from .synthesis import scheduling_precedence

__all__ = ["to_dual_tso", "to_tso", "erase_fences"]


def _checked_fence_free(x: AbstractExecution, semantics: ObjectSemantics) -> None:
    fenced = sorted(e.id for e in x.history.events if e.fences)
    if fenced:
        raise HistoryError(
            f"transformation requires a fence-free history; fenced: {fenced}"
        )
    errs = x.structural_violations()
    if errs:
        raise HistoryError("; ".join(errs))
    rep = check_axioms(x, semantics)
    if not rep.ok:
        raise HistoryError(f"input fails axioms: {', '.join(rep.failed())}")


def _refenced(x: AbstractExecution, fences: frozenset[str], rt) -> AbstractExecution:
    h = x.history
    h2 = make_history(
        (e.with_fences(fences) for e in h.events), dict(h.sessions), rt
    )
    return AbstractExecution(h2, x.vis, x.ar)


def to_dual_tso(x: AbstractExecution, semantics: ObjectSemantics) -> AbstractExecution:
    """The all-push form: every event push-fenced, returns-before set to the
    arbitration order, visibility and arbitration unchanged."""
    _checked_fence_free(x, semantics)
    out = _refenced(x, frozenset({PUSH}), x.ar.as_relation())
    rep = check_axioms(out, semantics)
    if not rep.ok:
        raise AssertionError(
            f"all-push form fails axioms (checker bug): {', '.join(rep.failed())}"
        )
    return out


def to_tso(x: AbstractExecution, semantics: ObjectSemantics) -> AbstractExecution:
    """The all-pull form: every event pull-fenced, returns-before set to a
    deterministic total extension of visibility joined with the scheduling
    precedence of the all-pull image (lexicographic tie-break)."""
    _checked_fence_free(x, semantics)
    image = _refenced(x, frozenset({PULL}), x.history.rt)
    prec = scheduling_precedence(image)
    try:
        rt2 = extend_to_total(x.vis | prec, tie_break=sorted(x.history.ids))
    except CycleError as err:
        raise AssertionError(
            f"visibility and scheduling precedence cyclic (checker bug): {err}"
        ) from err
    out = _refenced(x, frozenset({PULL}), rt2.as_relation())
    rep = check_axioms(out, semantics)
    if not rep.ok:
        raise AssertionError(
            f"all-pull form fails axioms (checker bug): {', '.join(rep.failed())}"
        )
    return out
