import numpy as np
import pytest

from ifra.augmentation import AugmentationConfig, augment_fallers
from ifra.dataset import Outcome, Split
from ifra.errors import DataError
from ifra.selection import (
    SelectionConfig,
    SelectionReport,
    run_selection,
    sample_balanced_subset,
)

from helpers import planted_dataset


@pytest.fixture(scope="module")
def cohort():
    return planted_dataset(0)


def _run(ds, **kwargs):
    workers = kwargs.pop("workers", 1)
    cfg = SelectionConfig(**{"iterations": 100, "seed": 1, **kwargs})
    return run_selection(ds.select(split=Split.TRAIN), ds.select(split=Split.VALIDATION), config=cfg,
                         workers=workers)


def test_balanced_subset(cohort):
    train = cohort.select(split=Split.TRAIN)
    sub = sample_balanced_subset(train, 42)
    fallers = [s for s in sub if s.is_faller]
    assert len(fallers) == 39 and len(sub) == 78
    assert len({s.subject_id for s in sub}) == 78
    assert sample_balanced_subset(train, 42) == sub
    assert sample_balanced_subset(train, 43) != sub


def test_planted_feature_selected(cohort):
    r = _run(cohort)
    assert r.selected == ("f0",)
    assert r.relevance("f0").selection_pct == 1.0
    assert r.iterations_passed_gate > 0
    assert all(f.relevance_count <= r.iterations_passed_gate for f in r.features)
    assert [f.name for f in r.features] == cohort.catalog.names


def test_report_json_roundtrip(cohort):
    r = _run(cohort)
    back = SelectionReport.from_json(r.to_json())
    assert back == r
    assert back.to_json() == r.to_json()


def test_worker_count_does_not_change_result(cohort):
    assert _run(cohort).to_json() == _run(cohort, workers=3).to_json()


def test_no_gated_iterations(cohort):
    # validation labels contradict the training signal, so no SVM reaches the gate
    flipped = cohort.with_subjects(
        type(s)(s.subject_id, Outcome.NON_FALLER if s.is_faller else Outcome.FALLER, s.synthetic, s.split,
                s.values) if s.split is Split.VALIDATION else s
        for s in cohort
    )
    r = _run(flipped)
    assert r.no_gated_iterations
    assert r.selected == ()
    assert all(f.selection_pct == 0 for f in r.features)


def test_total_denominator(cohort):
    gated = _run(cohort, accuracy_gate=1.0)
    total = _run(cohort, accuracy_gate=1.0, denominator="total")
    g = gated.relevance("f0")
    t = total.relevance("f0")
    assert g.relevance_count == t.relevance_count
    assert t.selection_pct == pytest.approx(g.relevance_count / 100)


def test_selected_sorted_by_pct_then_catalog_order():
    ds = planted_dataset(3, planted=(4, 1, 7), shift=1.5)
    r = _run(ds, relevance_fraction=0.1)
    pcts = [r.relevance(n).selection_pct for n in r.selected]
    assert pcts == sorted(pcts, reverse=True)
    idx = {n: i for i, n in enumerate(ds.catalog.names)}
    for a, b in zip(r.selected, r.selected[1:]):
        if r.relevance(a).selection_pct == r.relevance(b).selection_pct:
            assert idx[a] < idx[b]


def test_constant_feature_never_selected():
    ds = planted_dataset(1)
    ds = ds.with_subjects(
        type(s)(s.subject_id, s.outcome, s.synthetic, s.split, {**s.values, "f5": 1.0}) for s in ds
    )
    r = _run(ds)
    assert r.relevance("f5").relevance_count == 0


def test_errors(cohort):
    with pytest.raises(DataError):
        SelectionConfig(iterations=0)
    with pytest.raises(DataError):
        SelectionConfig(accuracy_gate=0)
    with pytest.raises(DataError):
        SelectionConfig(denominator="all")
    few = planted_dataset(0, train=(10, 20))
    with pytest.raises(DataError, match="balance"):
        _run(few)
    with pytest.raises(DataError, match="validation"):
        run_selection(cohort.select(split=Split.TRAIN), cohort.select(split=Split.TEST))
    with pytest.raises(DataError, match="clinical"):
        _run(cohort, feature_kind="clinical")


def test_synthetic_fallers_count_as_fallers():
    ds = planted_dataset(2, train=(54, 24))
    aug = augment_fallers(ds, AugmentationConfig(count=15, seed=0))
    sub = sample_balanced_subset(aug.select(split=Split.TRAIN), 0)
    assert sum(s.is_faller for s in sub) == 39
    assert np.any([s.synthetic for s in sub])


def test_positive_affine_transform_keeps_relevance_counts():
    ds = planted_dataset(6, planted=(0, 2), shift=0.8)
    moved = ds.with_subjects(
        type(s)(s.subject_id, s.outcome, s.synthetic, s.split,
                {**s.values, "f0": 3.7 * s.values["f0"] - 2.0, "f2": 0.01 * s.values["f2"] + 40.0})
        for s in ds
    )
    a, b = _run(ds), _run(moved)
    assert [f.relevance_count for f in a.features] == [f.relevance_count for f in b.features]
