"""Shared corpora for the test suite.

The session-scoped ``corpus`` fixture streams every execution reachable
from the soundness program grid (plus a seeded two-object sample) through
the axiom checker exactly once, keeping counts, a deterministic sample of
executions for relational property checks, and, per deduplicated canonical
history, the first extracted witness execution for the completeness and
transformation sweeps.
"""

from __future__ import annotations

import dataclasses

import pytest

from gsclab import (
    AbstractExecution,
    History,
    Relation,
    TotalOrder,
    check_axioms,
    explore,
    get_semantics,
)
from gsclab.generators import soundness_grid_programs, soundness_sampled_programs

CORPUS_SEED = 20250813


def canonical_execution(h: History, x: AbstractExecution) -> AbstractExecution:
    """The witness renamed to the canonical client:index id scheme."""
    mapping = {}
    for client, ids in h.sessions:
        for i, eid in enumerate(ids):
            mapping[eid] = f"{client}:{i}"
    hc = h.renamed(mapping)
    vis = Relation(hc.ids, frozenset((mapping[a], mapping[b]) for a, b in x.vis.pairs))
    ar = TotalOrder(tuple(mapping[e] for e in x.ar.sequence))
    return AbstractExecution(hc, vis, ar)


@dataclasses.dataclass
class Corpus:
    executions_checked: int
    axiom_failures: list
    sample_executions: list
    unique_histories: list
    witnesses: dict


@pytest.fixture(scope="session")
def sem():
    return get_semantics("sequence")


@pytest.fixture(scope="session")
def corpus(sem) -> Corpus:
    programs = soundness_grid_programs() + soundness_sampled_programs(
        CORPUS_SEED, count=100
    )
    checked = 0
    failures: list = []
    sample: list = []
    witnesses: dict[History, AbstractExecution] = {}
    for prog in programs:
        for h, x in explore(prog, sem):
            rep = check_axioms(x, sem)
            checked += 1
            if not rep.ok:
                failures.append((prog, rep.failed()))
            if checked % 53 == 0 and len(sample) < 500:
                sample.append(x)
            hc = h.canonical()
            if hc not in witnesses:
                witnesses[hc] = canonical_execution(h, x)
    ordered = sorted(witnesses, key=History.sort_key)
    return Corpus(checked, failures, sample, ordered, witnesses)
