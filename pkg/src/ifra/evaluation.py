"""Faller-status by stratum contingency tables and exact-test reports."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ifra.dataset import Dataset, Outcome
from ifra.errors import DataError
from ifra.scale import RiskScale, Stratum, assess
from ifra.stats import fisher_exact

ROW_ORDER = (Outcome.NON_FALLER, Outcome.FALLER)


def build_contingency(subjects: Dataset, assessments: Mapping[str, Stratum]) -> np.ndarray:
    """2 x 3 counts; rows non-faller/faller, columns low/medium/high."""
    table = np.zeros((2, 3), dtype=np.int64)
    for s in subjects:
        try:
            stratum = assessments[s.subject_id]
        except KeyError:
            raise DataError(f"no assessment for subject {s.subject_id!r}") from None
        table[ROW_ORDER.index(s.outcome), int(Stratum(stratum))] += 1
    return table


def row_percentages(table) -> np.ndarray:
    t = np.asarray(table, dtype=float)
    totals = t.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        pct = np.where(totals > 0, 100.0 * t / totals, 0.0)
    return pct


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    scale: str
    counts: np.ndarray
    p_value: float
    alpha: float = 0.05

    def __eq__(self, other):
        if not isinstance(other, EvaluationReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    @property
    def percentages(self) -> np.ndarray:
        return row_percentages(self.counts)

    @property
    def reject_h0(self) -> bool:
        return self.p_value < self.alpha

    def to_dict(self) -> dict:
        labels = [s.label for s in Stratum]
        return {
            "scale": self.scale,
            "counts": {
                oc.value: dict(zip(labels, (int(v) for v in row)))
                for oc, row in zip(ROW_ORDER, self.counts)
            },
            "percentages": {
                oc.value: dict(zip(labels, (round(float(v), 1) for v in row)))
                for oc, row in zip(ROW_ORDER, self.percentages)
            },
            "p_value": self.p_value,
            "alpha": self.alpha,
            "reject_h0": self.reject_h0,
        }


def evaluate_scale(test: Dataset, scale: RiskScale, alpha: float = 0.05) -> EvaluationReport:
    """Assess every subject in ``test`` and run the exact test on the result."""
    n_f = sum(1 for s in test if s.is_faller)
    if n_f == 0 or n_f == len(test):
        raise DataError(
            f"degenerate evaluation slice: {n_f} fallers and {len(test) - n_f} non-fallers; need at least one of each"
        )
    if not 0 < alpha < 1:
        raise DataError("alpha must lie in (0, 1)")
    strata = {s.subject_id: assess(s, scale).stratum for s in test}
    table = build_contingency(test, strata)
    return EvaluationReport(scale.name, table, fisher_exact(table).p_value, alpha)


def compare_scales(test: Dataset, scales: Sequence[RiskScale], alpha: float = 0.05) -> list[EvaluationReport]:
    return [evaluate_scale(test, sc, alpha) for sc in scales]


def reports_to_json(reports: Sequence[EvaluationReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, ensure_ascii=False) + "\n"


def reports_to_markdown(reports: Sequence[EvaluationReport]) -> str:
    """Row percentages per outcome and stratum, one line per scale, plus the p-value."""
    head = "| Scale | Non-faller low | Non-faller medium | Non-faller high | Faller low | Faller medium | Faller high | p-value |"
    lines = [head, "|" + "---|" * 8]
    for r in reports:
        cells = [f"{v:.1f}%" for v in r.percentages.ravel()]
        p = f"{r.p_value:.3f}" if r.p_value >= 0.001 else f"{r.p_value:.1e}"
        lines.append(f"| {r.scale} | " + " | ".join(cells) + f" | {p} |")
    return "\n".join(lines) + "\n"
