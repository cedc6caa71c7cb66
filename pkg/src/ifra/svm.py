"""Linear soft-margin SVM used as the validation-accuracy gate."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ifra.errors import DataError
from ifra.kernels import smo_solve

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class SvmConfig:
    c: float = 1.0
    tolerance: float = 1e-3
    max_passes: int = 100
    kernel: str = "linear"

    def __post_init__(self):
        if not self.c > 0:
            raise DataError("SVM regularisation c must be positive")
        if not self.tolerance > 0:
            raise DataError("SVM tolerance must be positive")
        if self.max_passes < 1:
            raise DataError("max_passes must be a positive integer")
        if self.kernel != "linear":
            raise DataError(f"unsupported kernel {self.kernel!r}; only 'linear' is available")

    def to_dict(self) -> dict:
        return {"c": self.c, "tolerance": self.tolerance, "max_passes": self.max_passes, "kernel": self.kernel}


@dataclass(frozen=True)
class SvmModel:
    """Trained linear SVM.

    ``features`` indexes the columns of the training matrix that survived the
    zero-variance filter; ``weights``, ``mean`` and ``scale`` are aligned to it.
    """

    features: tuple[int, ...]
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    scale: np.ndarray
    n_columns: int
    dropped: tuple[int, ...] = ()
    alpha: np.ndarray = field(default=None, repr=False)
    labels: np.ndarray = field(default=None, repr=False)
    passes: int = 0
    converged: bool = False

    def decision_function(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.n_columns:
            raise DataError(f"expected {self.n_columns} feature columns, got {x.shape[1]}")
        used = x[:, self.features]
        if not np.all(np.isfinite(used)):
            raise DataError("feature vector has missing values on model features")
        out = ((used - self.mean) / self.scale) @ self.weights + self.bias
        return out[0] if single else out


def train(x, y, config: SvmConfig | None = None, seed: int = 0) -> SvmModel:
    """Fit a linear SVM on standardised features by SMO dual ascent.

    ``y`` holds -1 (non-faller) / +1 (faller). Columns with zero training
    variance are dropped and listed in ``SvmModel.dropped``.
    """
    config = config or SvmConfig()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    if x.ndim != 2 or x.shape[0] == 0:
        raise DataError("training matrix is empty")
    if y.shape != (x.shape[0],):
        raise DataError("labels must be a vector with one entry per row")
    if not np.all(np.isin(y, (-1, 1))):
        raise DataError("labels must be -1 or +1")
    if not ((y == 1).any() and (y == -1).any()):
        raise DataError("training data must contain both classes")
    if not np.all(np.isfinite(x)):
        raise DataError("training matrix has missing values")

    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    keep = np.flatnonzero(scale > 0)
    dropped = tuple(int(i) for i in np.flatnonzero(scale == 0))
    xs = (x[:, keep] - mean[keep]) / scale[keep]
    yf = y.astype(float)

    gram = np.ascontiguousarray(xs @ xs.T)
    alpha, bias, passes, converged = smo_solve(
        gram, np.ascontiguousarray(yf), float(config.c), float(config.tolerance),
        int(config.max_passes), int(seed) & _SEED_MASK,
    )
    weights = (alpha * yf) @ xs
    return SvmModel(
        features=tuple(int(i) for i in keep),
        weights=weights,
        bias=float(bias),
        mean=mean[keep],
        scale=scale[keep],
        n_columns=x.shape[1],
        dropped=dropped,
        alpha=alpha,
        labels=yf,
        passes=int(passes),
        converged=bool(converged),
    )


def predict(model: SvmModel, x):
    """Class label(s); a decision value of exactly zero maps to +1."""
    d = model.decision_function(x)
    return np.where(d >= 0, 1, -1) if np.ndim(d) else (1 if d >= 0 else -1)


def accuracy(model: SvmModel, x, y) -> float:
    y = np.asarray(y)
    if y.size == 0:
        raise DataError("cannot score an empty slice")
    return float(np.mean(predict(model, np.atleast_2d(x)) == y))
