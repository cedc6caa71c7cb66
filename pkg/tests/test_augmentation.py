import numpy as np
import pytest

from ifra.augmentation import AugmentationConfig, augment_fallers
from ifra.dataset import Outcome, Split, make_splits
from ifra.errors import DataError
from ifra.synthetic import CohortSpec, planted_cohort


@pytest.fixture(scope="module")
def cohort():
    return make_splits(planted_cohort(11), (12, 5), (22, 10), seed=4)


def test_reference_size(cohort):
    out = augment_fallers(cohort, AugmentationConfig(count=15, seed=1))
    assert len(cohort) == 127
    assert len(out) == 142
    new = out.subjects[127:]
    assert all(s.synthetic and s.split is Split.TRAIN and s.outcome is Outcome.FALLER for s in new)
    assert len(set(out.ids)) == 142
    assert out.subjects[:127] == cohort.subjects


def test_deterministic(cohort):
    a = augment_fallers(cohort, AugmentationConfig(seed=9))
    b = augment_fallers(cohort, AugmentationConfig(seed=9))
    c = augment_fallers(cohort, AugmentationConfig(seed=10))
    assert a.to_csv_text() == b.to_csv_text()
    assert a.to_csv_text() != c.to_csv_text()


def _donor_of(record, donors):
    # with zero noise the synthetic record is an exact copy of its donor
    matches = [d for d in donors if d.values == record.values]
    assert len(matches) >= 1
    return matches[0]


def test_zero_noise_copies_donors_without_replacement(cohort):
    out = augment_fallers(cohort, AugmentationConfig(count=20, noise_scale=0.0, seed=2))
    donors = [s for s in cohort if s.is_faller and s.split is Split.TRAIN]
    used = [_donor_of(s, donors).subject_id for s in out.subjects[len(cohort):]]
    assert len(set(used)) == 20


def test_constant_feature_keeps_donor_value(cohort):
    name = cohort.catalog.names[0]
    flat = cohort.with_subjects(
        type(s)(s.subject_id, s.outcome, s.synthetic, s.split,
                {**s.values, name: 3.25 if s.is_faller else s.values[name]})
        for s in cohort
    )
    out = augment_fallers(flat, AugmentationConfig(count=10, noise_scale=0.5, seed=3))
    assert all(s.values[name] == 3.25 for s in out.subjects[len(flat):])


def test_noise_sd_tracks_faller_sd():
    spec = CohortSpec(non_fallers=10, fallers=10000, separation=0.0)
    ds = planted_cohort(0, spec)
    x = ds.select(outcome="faller").matrix()
    sd = x.std(axis=0, ddof=1)
    out = augment_fallers(ds, AugmentationConfig(count=10000, noise_scale=0.2, seed=5))
    # recover per-record noise through the zero-noise twin, which picks the same donors
    twin = augment_fallers(ds, AugmentationConfig(count=10000, noise_scale=0.0, seed=5))
    diff = out.matrix()[len(ds):] - twin.matrix()[len(ds):]
    ratio = diff.std(axis=0, ddof=1) / (0.2 * sd)
    assert np.all(np.abs(ratio - 1) < 0.05)


def test_errors(cohort):
    with pytest.raises(DataError, match="only"):
        augment_fallers(cohort, AugmentationConfig(count=25))
    with pytest.raises(DataError):
        AugmentationConfig(noise_scale=-0.1)
    with pytest.raises(DataError):
        AugmentationConfig(count=0)


def test_synthetic_fallers_are_not_donors(cohort):
    once = augment_fallers(cohort, AugmentationConfig(count=20, seed=1))
    with pytest.raises(DataError):
        augment_fallers(once, AugmentationConfig(count=25, seed=2))
    twice = augment_fallers(once, AugmentationConfig(count=5, seed=2))
    assert len(set(twice.ids)) == len(twice) == len(cohort) + 25
