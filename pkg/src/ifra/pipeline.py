"""End-to-end run on a seeded synthetic cohort."""
from __future__ import annotations

from dataclasses import dataclass

from ifra import svm
from ifra.augmentation import AugmentationConfig, augment_fallers
from ifra.dataset import Dataset, Split, make_splits
from ifra.evaluation import EvaluationReport, evaluate_scale
from ifra.scale import RiskScale, derive_scale
from ifra.seeding import STAGE_AUGMENT, STAGE_COHORT, STAGE_SELECT, STAGE_SPLITS, derive_seed
from ifra.selection import SelectionConfig, SelectionReport, run_selection
from ifra.synthetic import CohortSpec, planted_cohort

VALIDATION_COUNTS = (12, 5)
TEST_COUNTS = (22, 10)


@dataclass(frozen=True)
class DemoResult:
    dataset: Dataset
    selection: SelectionReport
    scale: RiskScale
    report: EvaluationReport


def run_demo(
    seed: int,
    iterations: int = 1000,
    accuracy_gate: float = 0.80,
    alpha: float = 0.05,
    relevance_fraction: float = 0.50,
    noise_scale: float = 0.1,
    count: int = 15,
    cohort: CohortSpec | None = None,
    workers: int = 1,
) -> DemoResult:
    """Cohort, splits, augmentation, selection, thresholds and test-set evaluation.

    Splits are drawn before augmentation so synthetic fallers only ever see
    training donors.
    """
    data = planted_cohort(derive_seed(seed, STAGE_COHORT), cohort)
    data = make_splits(data, VALIDATION_COUNTS, TEST_COUNTS, derive_seed(seed, STAGE_SPLITS))
    data = augment_fallers(
        data, AugmentationConfig(count=count, noise_scale=noise_scale, seed=derive_seed(seed, STAGE_AUGMENT))
    )
    train = data.select(split=Split.TRAIN)
    config = SelectionConfig(
        iterations=iterations,
        accuracy_gate=accuracy_gate,
        alpha=alpha,
        relevance_fraction=relevance_fraction,
        seed=derive_seed(seed, STAGE_SELECT),
    )
    selection = run_selection(train, data.select(split=Split.VALIDATION), svm_config=svm.SvmConfig(),
                              config=config, workers=workers)
    scale = derive_scale(train, selection, name="IFRA (derived)")
    report = evaluate_scale(data.select(split=Split.TEST), scale, alpha)
    return DemoResult(data, selection, scale, report)
