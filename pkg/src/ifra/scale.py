"""Risk scales: tertile thresholds, per-feature strata and the mode vote."""
from __future__ import annotations

import json
import warnings
from collections import Counter
from dataclasses import dataclass
from enum import IntEnum
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from ifra.catalog import Direction, FeatureCatalog
from ifra.dataset import Dataset, SubjectRecord
from ifra.errors import DataError


class Stratum(IntEnum):
    LOW = 0
    MEDIUM = 1
    HIGH = 2

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: str) -> "Stratum":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise DataError(f"unknown stratum {text!r}") from None


class ThresholdTieWarning(UserWarning):
    """Duplicated training values at a tertile boundary unbalance the strata."""


@dataclass(frozen=True)
class FeatureThresholds:
    """Boundaries for one feature, in raw feature units.

    ``t_low`` bounds the low-risk stratum and ``t_high`` the high-risk one;
    both bounds are inclusive of their extreme stratum.
    """

    feature: str
    direction: Direction
    t_low: float
    t_high: float
    selection_pct: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        if self.direction is Direction.HIGHER_SAFER and self.t_low < self.t_high:
            raise DataError(f"{self.feature}: higher_safer needs t_low >= t_high")
        if self.direction is Direction.HIGHER_RISKIER and self.t_low > self.t_high:
            raise DataError(f"{self.feature}: higher_riskier needs t_low <= t_high")

    def to_dict(self) -> dict:
        d = {
            "feature": self.feature,
            "direction": self.direction.value,
            "t_low": self.t_low,
            "t_high": self.t_high,
        }
        if self.selection_pct is not None:
            d["selection_pct"] = self.selection_pct
        return d


@dataclass(frozen=True)
class RiskScale:
    name: str
    entries: tuple[FeatureThresholds, ...]
    provenance: str = "derived"

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if self.provenance not in ("derived", "published"):
            raise DataError(f"unknown provenance {self.provenance!r}")
        names = [e.feature for e in self.entries]
        if len(set(names)) != len(names):
            raise DataError(f"scale {self.name!r} lists a feature twice")

    @property
    def features(self) -> list[str]:
        return [e.feature for e in self.entries]

    def check_catalog(self, catalog: FeatureCatalog) -> None:
        for e in self.entries:
            if e.feature not in catalog:
                raise DataError(f"scale {self.name!r}: feature {e.feature!r} not in catalog")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "provenance": self.provenance,
            "entries": [e.to_dict() for e in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, d: Mapping) -> "RiskScale":
        try:
            entries = tuple(
                FeatureThresholds(
                    feature=e["feature"],
                    direction=Direction(e["direction"]),
                    t_low=float(e["t_low"]),
                    t_high=float(e["t_high"]),
                    selection_pct=None if e.get("selection_pct") is None else float(e["selection_pct"]),
                )
                for e in d["entries"]
            )
            return cls(name=str(d["name"]), entries=entries, provenance=d.get("provenance", "derived"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DataError):
                raise
            raise DataError(f"malformed scale definition: {exc}") from None


def parse_scales(obj) -> list[RiskScale]:
    """A scale file holds one scale object or an array of them."""
    if isinstance(obj, list):
        return [RiskScale.from_dict(d) for d in obj]
    return [RiskScale.from_dict(obj)]


def load_scales(path: str | Path) -> list[RiskScale]:
    try:
        return parse_scales(json.loads(Path(path).read_text(encoding="utf-8")))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON ({exc})") from None


def _bundled(name: str):
    return json.loads(resources.files("ifra.data").joinpath(name).read_text(encoding="utf-8"))


def ifra_published_scale() -> RiskScale:
    """The 22-feature IFRA scale as published."""
    return parse_scales(_bundled("ifra_published.json"))[0]


def builtin_clinical_scales() -> list[RiskScale]:
    """Eight single-feature clinical scales with literature thresholds."""
    return parse_scales(_bundled("clinical_published.json"))


# ---------------------------------------------------------------------------

def tertile_thresholds(values: Sequence[float], direction: Direction) -> tuple[float, float, bool]:
    """``(t_low, t_high, tied)`` from training values.

    Values are put in increasing-risk order and split into thirds of size
    ``k = n // 3``: ``t_low`` is the last value of the low third (rank k) and
    ``t_high`` the first value of the high third (rank 2k + 1), so with
    inclusive extreme strata every third maps back onto its own stratum.
    ``tied`` flags a boundary value shared with its neighbour across the cut.
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    if n < 3:
        raise DataError("need at least 3 training values to form tertiles")
    ordered = np.sort(v)
    if Direction(direction) is Direction.HIGHER_SAFER:
        ordered = ordered[::-1]
    k = n // 3
    t_low, t_high = ordered[k - 1], ordered[2 * k]
    tied = bool(ordered[k] == t_low or ordered[2 * k - 1] == t_high)
    return float(t_low), float(t_high), tied


def derive_scale(
    train: Dataset,
    selected,
    catalog: FeatureCatalog | None = None,
    name: str = "derived",
) -> RiskScale:
    """Thresholds for each selected feature from the training slice.

    ``selected`` is a :class:`~ifra.selection.SelectionReport` or a sequence of
    feature names; selection percentages are carried over when available.
    """
    catalog = catalog or train.catalog
    if hasattr(selected, "selected"):
        pct = {f.name: f.selection_pct for f in selected.features}
        names = list(selected.selected)
    else:
        pct = {}
        names = list(selected)
    if not names:
        raise DataError("no selected features to derive a scale from")
    if len(train) < 3:
        raise DataError("need at least 3 training subjects to derive a scale")
    entries, tied = [], []
    for feature in names:
        if feature not in catalog:
            raise DataError(f"selected feature {feature!r} not in catalog")
        direction = catalog[feature].direction
        t_low, t_high, is_tied = tertile_thresholds(train.matrix([feature])[:, 0], direction)
        if is_tied:
            tied.append(feature)
        entries.append(FeatureThresholds(feature, direction, t_low, t_high, pct.get(feature)))
    if tied:
        warnings.warn(
            f"tied training values at a tertile boundary: {', '.join(tied)}",
            ThresholdTieWarning,
            stacklevel=2,
        )
    return RiskScale(name=name, entries=tuple(entries), provenance="derived")


def stratify_feature(value: float, thresholds: FeatureThresholds) -> Stratum:
    if thresholds.direction is Direction.HIGHER_SAFER:
        if value >= thresholds.t_low:
            return Stratum.LOW
        if value <= thresholds.t_high:
            return Stratum.HIGH
    else:
        if value <= thresholds.t_low:
            return Stratum.LOW
        if value >= thresholds.t_high:
            return Stratum.HIGH
    return Stratum.MEDIUM


def mode_vote(votes: Iterable[Stratum]) -> Stratum:
    """Most frequent stratum; ties go to the highest-risk tied stratum."""
    counts = Counter(votes)
    if not counts:
        raise DataError("no votes to combine")
    top = max(counts.values())
    return max(s for s, c in counts.items() if c == top)


@dataclass(frozen=True)
class Assessment:
    stratum: Stratum
    votes: dict[str, Stratum]
    skipped: tuple[str, ...] = ()

    def to_dict(self, subject_id: str | None = None) -> dict:
        d = {} if subject_id is None else {"subject_id": subject_id}
        d["stratum"] = self.stratum.label
        d["votes"] = {k: v.label for k, v in self.votes.items()}
        if self.skipped:
            d["skipped"] = list(self.skipped)
        return d


def assess_values(values: Mapping[str, float], scale: RiskScale) -> Assessment:
    votes, skipped = {}, []
    for entry in scale.entries:
        v = values.get(entry.feature)
        if v is None or v != v:
            skipped.append(entry.feature)
            continue
        votes[entry.feature] = stratify_feature(float(v), entry)
    if not votes:
        raise DataError(f"none of the {scale.name!r} features are available")
    return Assessment(mode_vote(votes.values()), votes, tuple(skipped))


def assess(subject: SubjectRecord, scale: RiskScale) -> Assessment:
    """Overall stratum of one subject under ``scale``.

    Scale features absent from the subject are skipped and listed in
    ``Assessment.skipped``.
    """
    return assess_values(subject.values, scale)
