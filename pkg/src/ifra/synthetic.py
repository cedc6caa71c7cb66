"""Seeded synthetic cohorts for demos and tests."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ifra.catalog import Direction, FeatureCatalog, reference_catalog
from ifra.dataset import Dataset, Outcome, Split, SubjectRecord
from ifra.errors import DataError
from ifra.scale import RiskScale, Stratum, ifra_published_scale


@dataclass(frozen=True)
class CohortSpec:
    non_fallers: int = 88
    fallers: int = 39
    # shift of faller means, in units of the common standard deviation
    separation: float = 1.0
    planted: tuple[str, ...] | None = None


def planted_cohort(
    seed: int,
    spec: CohortSpec | None = None,
    catalog: FeatureCatalog | None = None,
) -> Dataset:
    """Standard-normal features with the ``planted`` ones shifted for fallers.

    The shift points in each feature's risk direction. By default the planted
    set is the features of the published IFRA scale. Every record is real and
    in the train split; assign splits afterwards.
    """
    spec = spec or CohortSpec()
    catalog = catalog or reference_catalog()
    planted = spec.planted if spec.planted is not None else tuple(ifra_published_scale().features)
    for name in planted:
        if name not in catalog:
            raise DataError(f"planted feature {name!r} not in catalog")
    names = catalog.names
    shift = np.zeros(len(names))
    for name in planted:
        sign = 1.0 if catalog[name].direction is Direction.HIGHER_RISKIER else -1.0
        shift[catalog.index(name)] = sign * spec.separation

    rng = np.random.default_rng(seed)
    subjects = []
    for label, n, offset in (("nf", spec.non_fallers, 0.0), ("f", spec.fallers, 1.0)):
        x = rng.standard_normal((n, len(names))) + offset * shift
        outcome = Outcome.FALLER if offset else Outcome.NON_FALLER
        for i in range(n):
            values = dict(zip(names, (float(v) for v in x[i])))
            subjects.append(SubjectRecord(f"{label}-{i + 1:03d}", outcome, False, Split.TRAIN, values))
    return Dataset(catalog, tuple(subjects))


def _stratum_value(entry, stratum: Stratum) -> float:
    if stratum is Stratum.LOW:
        return entry.t_low
    if stratum is Stratum.HIGH:
        return entry.t_high
    return (entry.t_low + entry.t_high) / 2.0


def cohort_from_counts(
    scales: Sequence[RiskScale],
    counts: Mapping[str, Sequence[Sequence[int]]],
    catalog: FeatureCatalog | None = None,
    split: Split = Split.TEST,
) -> Dataset:
    """A cohort whose single-feature scales reproduce given 2 x 3 tables.

    ``counts[scale.name]`` holds rows (non-faller, faller) of low/medium/high
    counts. Row totals must agree across scales. Values sit on the scale's
    thresholds (low, high) or at their midpoint (medium).
    """
    catalog = catalog or reference_catalog().filter("clinical")
    totals = None
    for sc in scales:
        if len(sc.entries) != 1:
            raise DataError(f"scale {sc.name!r} is not single-feature")
        rows = np.asarray(counts[sc.name], dtype=int)
        if rows.shape != (2, 3) or (rows < 0).any():
            raise DataError(f"counts for {sc.name!r} must be a 2 x 3 non-negative table")
        t = tuple(int(v) for v in rows.sum(axis=1))
        if totals is not None and t != totals:
            raise DataError(f"row totals for {sc.name!r} disagree with earlier scales")
        totals = t
    if totals is None:
        raise DataError("no scales given")

    values: list[dict[str, float]] = [dict() for _ in range(sum(totals))]
    for sc in scales:
        entry = sc.entries[0]
        rows = np.asarray(counts[sc.name], dtype=int)
        k = 0
        for row in rows:
            for stratum, c in zip(Stratum, row):
                for _ in range(int(c)):
                    values[k][entry.feature] = _stratum_value(entry, stratum)
                    k += 1
    # features the scales do not cover get a neutral filler
    for v in values:
        for name in catalog.names:
            v.setdefault(name, 0.0)

    subjects = []
    for i, v in enumerate(values):
        outcome = Outcome.NON_FALLER if i < totals[0] else Outcome.FALLER
        subjects.append(SubjectRecord(f"s{i + 1:03d}", outcome, False, split, v))
    return Dataset(catalog, tuple(subjects))
