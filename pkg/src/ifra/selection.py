"""SVM-gated feature selection over balanced subsamples of the training set.

Each iteration keeps every training faller, draws as many non-fallers without
replacement, trains a linear SVM on the subset and, when the SVM reaches the
accuracy gate on the validation slice, tests every feature for a
faller/non-faller difference. A feature is selected when it was significant
in at least ``relevance_fraction`` of the counted iterations.
"""
from __future__ import annotations

import json
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from ifra import svm
from ifra.catalog import FeatureCatalog
from ifra.dataset import Dataset, Outcome, SubjectRecord
from ifra.errors import DataError
from ifra.seeding import derive_seed
from ifra.stats import ranksum_columns, shapiro_wilk_columns, t_test_columns


@dataclass(frozen=True)
class SelectionConfig:
    iterations: int = 1000
    accuracy_gate: float = 0.80
    alpha: float = 0.05
    relevance_fraction: float = 0.50
    seed: int = 0
    feature_kind: str = "itug"
    # "gated": percentages over gate-passing iterations; "total": over all
    denominator: str = "gated"

    def __post_init__(self):
        if self.iterations < 1:
            raise DataError("iterations must be positive")
        if not 0 < self.accuracy_gate <= 1:
            raise DataError("accuracy_gate must lie in (0, 1]")
        if not 0 < self.alpha < 1:
            raise DataError("alpha must lie in (0, 1)")
        if not 0 < self.relevance_fraction <= 1:
            raise DataError("relevance_fraction must lie in (0, 1]")
        if self.feature_kind not in ("itug", "clinical", "all"):
            raise DataError(f"unknown feature_kind {self.feature_kind!r}")
        if self.denominator not in ("gated", "total"):
            raise DataError(f"unknown denominator {self.denominator!r}")


@dataclass(frozen=True)
class FeatureRelevance:
    name: str
    relevance_count: int
    selection_pct: float


@dataclass(frozen=True)
class SelectionReport:
    config: SelectionConfig
    svm_config: svm.SvmConfig
    iterations_run: int
    iterations_passed_gate: int
    features: tuple[FeatureRelevance, ...]
    selected: tuple[str, ...]

    @property
    def no_gated_iterations(self) -> bool:
        return self.iterations_passed_gate == 0

    def relevance(self, name: str) -> FeatureRelevance:
        for f in self.features:
            if f.name == name:
                return f
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "svm_config": self.svm_config.to_dict(),
            "iterations_run": self.iterations_run,
            "iterations_passed_gate": self.iterations_passed_gate,
            "no_gated_iterations": self.no_gated_iterations,
            "features": [asdict(f) for f in self.features],
            "selected": list(self.selected),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "SelectionReport":
        try:
            return cls(
                config=SelectionConfig(**d["config"]),
                svm_config=svm.SvmConfig(**d["svm_config"]),
                iterations_run=int(d["iterations_run"]),
                iterations_passed_gate=int(d["iterations_passed_gate"]),
                features=tuple(FeatureRelevance(**f) for f in d["features"]),
                selected=tuple(d["selected"]),
            )
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed selection report: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "SelectionReport":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise DataError(f"selection report is not valid JSON ({exc})") from None


def _draw_nonfallers(iteration_seed: int, n_nonfallers: int, n_fallers: int):
    """Sorted non-faller row indices and the SVM seed for one iteration."""
    rng = np.random.default_rng(iteration_seed)
    idx = np.sort(rng.choice(n_nonfallers, size=n_fallers, replace=False))
    return idx, int(rng.integers(0, 2 ** 63))


def sample_balanced_subset(train: Dataset, iteration_seed: int) -> list[SubjectRecord]:
    """All training fallers plus an equal number of non-fallers drawn without replacement."""
    fallers = [s for s in train if s.outcome is Outcome.FALLER]
    others = [s for s in train if s.outcome is Outcome.NON_FALLER]
    if len(others) < len(fallers):
        raise DataError(f"{len(others)} non-fallers cannot balance {len(fallers)} fallers")
    idx, _ = _draw_nonfallers(iteration_seed, len(others), len(fallers))
    return fallers + [others[i] for i in idx]


@dataclass(frozen=True)
class _Problem:
    fallers: np.ndarray
    nonfallers: np.ndarray
    x_val: np.ndarray
    y_val: np.ndarray
    faller_normal_p: np.ndarray
    svm_config: svm.SvmConfig
    config: SelectionConfig


def _run_iteration(problem: _Problem, i: int):
    """Relevance mask for iteration ``i`` or None when the gate fails."""
    cfg = problem.config
    f = problem.fallers
    idx, svm_seed = _draw_nonfallers(derive_seed(cfg.seed, i), problem.nonfallers.shape[0], f.shape[0])
    nf = problem.nonfallers[idx]
    x = np.vstack([f, nf])
    y = np.concatenate([np.ones(f.shape[0], dtype=int), -np.ones(nf.shape[0], dtype=int)])
    model = svm.train(x, y, problem.svm_config, seed=svm_seed)
    if svm.accuracy(model, problem.x_val, problem.y_val) < cfg.accuracy_gate:
        return None

    _, nonfaller_normal_p = shapiro_wilk_columns(nf)
    # NaN (constant subgroup) compares False: such features take the rank test
    normal = (problem.faller_normal_p > cfg.alpha) & (nonfaller_normal_p > cfg.alpha)
    _, p_t = t_test_columns(f, nf, "pooled")
    _, p_rank = ranksum_columns(f, nf)
    p = np.where(normal, p_t, p_rank)
    return p < cfg.alpha


_WORKER_PROBLEM: _Problem | None = None


def _init_worker(problem: _Problem) -> None:
    global _WORKER_PROBLEM
    _WORKER_PROBLEM = problem


def _run_chunk(iterations: list[int]):
    return _accumulate(_WORKER_PROBLEM, iterations)


def _accumulate(problem: _Problem, iterations) -> tuple[int, np.ndarray]:
    gated = 0
    counts = np.zeros(problem.fallers.shape[1], dtype=np.int64)
    for i in iterations:
        mask = _run_iteration(problem, i)
        if mask is not None:
            gated += 1
            counts += mask
    return gated, counts


def run_selection(
    train: Dataset,
    validation: Dataset,
    catalog: FeatureCatalog | None = None,
    svm_config: svm.SvmConfig | None = None,
    config: SelectionConfig | None = None,
    workers: int = 1,
) -> SelectionReport:
    """Count, per feature, the gated iterations in which it separates fallers from non-fallers.

    Iteration ``i`` (1-based) draws everything it needs from
    ``derive_seed(config.seed, i)``, so the report does not depend on
    ``workers`` or on the order in which iterations run.
    """
    config = config or SelectionConfig()
    svm_config = svm_config or svm.SvmConfig()
    catalog = (catalog or train.catalog).filter(config.feature_kind)
    names = catalog.names
    if not names:
        raise DataError(f"no {config.feature_kind} features in the catalog")
    if len(validation) == 0:
        raise DataError("validation slice is empty")

    fallers = train.select(outcome=Outcome.FALLER).matrix(names)
    nonfallers = train.select(outcome=Outcome.NON_FALLER).matrix(names)
    if fallers.shape[0] < 3:
        raise DataError("need at least 3 training fallers")
    if nonfallers.shape[0] < fallers.shape[0]:
        raise DataError(
            f"{nonfallers.shape[0]} training non-fallers cannot balance {fallers.shape[0]} fallers"
        )
    _, faller_normal_p = shapiro_wilk_columns(fallers)
    problem = _Problem(
        fallers=np.ascontiguousarray(fallers),
        nonfallers=np.ascontiguousarray(nonfallers),
        x_val=validation.matrix(names),
        y_val=validation.labels(),
        faller_normal_p=faller_normal_p,
        svm_config=svm_config,
        config=config,
    )

    iterations = list(range(1, config.iterations + 1))
    if workers <= 1:
        gated, counts = _accumulate(problem, iterations)
    else:
        chunks = [iterations[k::workers] for k in range(workers)]
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(workers, mp_context=ctx, initializer=_init_worker, initargs=(problem,)) as pool:
            parts = list(pool.map(_run_chunk, chunks))
        gated = sum(g for g, _ in parts)
        counts = np.sum([c for _, c in parts], axis=0)

    denom = gated if config.denominator == "gated" else config.iterations
    features = tuple(
        FeatureRelevance(name, int(c), float(c) / denom if denom else 0.0)
        for name, c in zip(names, counts)
    )
    ranked = sorted(
        (k for k, f in enumerate(features) if denom and f.selection_pct >= config.relevance_fraction),
        key=lambda k: (-features[k].selection_pct, k),
    )
    return SelectionReport(
        config=config,
        svm_config=svm_config,
        iterations_run=config.iterations,
        iterations_passed_gate=gated,
        features=features,
        selected=tuple(features[k].name for k in ranked),
    )
