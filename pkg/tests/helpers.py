import numpy as np

from ifra.catalog import Direction, FeatureCatalog, FeatureDescriptor, Kind
from ifra.dataset import Dataset, Outcome, Split, SubjectRecord


def make_catalog(n, kind=Kind.ITUG, direction=Direction.HIGHER_RISKIER, prefix="f"):
    return FeatureCatalog(tuple(FeatureDescriptor(f"{prefix}{i}", "", kind, direction) for i in range(n)))


def planted_dataset(seed, n_features=20, shift=5.0, planted=(0,), train=(54, 39), validation=(12, 5),
                    test=(0, 0)):
    """Standard-normal features; fallers shifted by ``shift`` on ``planted`` columns."""
    catalog = make_catalog(n_features)
    rng = np.random.default_rng(seed)
    subjects = []
    for split, (n_nf, n_f) in ((Split.TRAIN, train), (Split.VALIDATION, validation), (Split.TEST, test)):
        for outcome, n in ((Outcome.NON_FALLER, n_nf), (Outcome.FALLER, n_f)):
            x = rng.standard_normal((n, n_features))
            if outcome is Outcome.FALLER:
                x[:, list(planted)] += shift
            for i in range(n):
                sid = f"{split.value[0]}{outcome.value[0]}{i}"
                values = {f"f{j}": float(x[i, j]) for j in range(n_features)}
                subjects.append(SubjectRecord(sid, outcome, False, split, values))
    return Dataset(catalog, tuple(subjects))


def simple_dataset(rows, catalog, split=Split.TRAIN):
    """``rows`` is a list of (outcome, values-list) pairs."""
    subjects = []
    for i, (outcome, values) in enumerate(rows):
        subjects.append(SubjectRecord(f"s{i}", Outcome(outcome), False, split, dict(zip(catalog.names, values))))
    return Dataset(catalog, tuple(subjects))
