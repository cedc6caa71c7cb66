"""Gaussian-noise copies of real training fallers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ifra.dataset import Dataset, Outcome, Split, SubjectRecord
from ifra.errors import DataError


@dataclass(frozen=True)
class AugmentationConfig:
    count: int = 15
    noise_scale: float = 0.1
    seed: int = 0
    id_prefix: str = "syn-"

    def __post_init__(self):
        if self.count < 1:
            raise DataError("augmentation count must be positive")
        if not self.noise_scale >= 0:
            raise DataError("noise_scale must be non-negative")


def augment_fallers(dataset: Dataset, config: AugmentationConfig | None = None) -> Dataset:
    """Append ``config.count`` synthetic fallers to the training split.

    Donors are drawn without replacement from the real training fallers. Each
    feature gets ``N(0, (noise_scale * sd_f)^2)`` added, where ``sd_f`` is the
    sample standard deviation of that feature over the same real fallers.
    """
    config = config or AugmentationConfig()
    donors = [
        s for s in dataset
        if s.outcome is Outcome.FALLER and s.split is Split.TRAIN and not s.synthetic
    ]
    if len(donors) < config.count:
        raise DataError(
            f"{config.count} synthetic fallers requested but only {len(donors)} real training fallers available"
        )
    names = dataset.catalog.names
    x = np.array([[s.values[n] for n in names] for s in donors], dtype=float).reshape(len(donors), len(names))
    sd = x.std(axis=0, ddof=1) if len(donors) > 1 else np.zeros(len(names))

    rng = np.random.default_rng(config.seed)
    picked = rng.choice(len(donors), size=config.count, replace=False)
    noise = rng.standard_normal((config.count, len(names))) * (config.noise_scale * sd)

    taken = set(dataset.ids)
    serial = 0
    new = []
    for row, donor in enumerate(picked):
        while True:
            serial += 1
            sid = f"{config.id_prefix}{serial:04d}"
            if sid not in taken:
                break
        taken.add(sid)
        values = {n: float(x[donor, j] + noise[row, j]) for j, n in enumerate(names)}
        new.append(SubjectRecord(sid, Outcome.FALLER, True, Split.TRAIN, values))
    return dataset.with_subjects((*dataset.subjects, *new))
