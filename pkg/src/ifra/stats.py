"""Hypothesis tests used by feature selection and scale evaluation.

Each test has a scalar entry point returning :class:`TestOutcome` and, where
the selection loop needs it, a column-batched variant working on 2-D arrays
(one feature per column). The scalar functions are thin wrappers over the
batched ones so both paths share a single implementation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np
from scipy import special
from scipy.stats import rankdata

from ifra.errors import DataError, NumericError, TableTooLargeError

SW_MIN_N, SW_MAX_N = 3, 5000
EXACT_RANKSUM_MAX_N = 16
FISHER_REL_TOL = 1e-7
FISHER_MAX_TABLES = 5_000_000


@dataclass(frozen=True)
class TestOutcome:
    """Result of a hypothesis test.

    For ``ranksum-approx`` the statistic is the standardised z score; for
    ``ranksum-exact`` it is the rank sum of the first sample. Fisher's test has
    no natural statistic and reports the probability of the observed table.
    """

    __test__ = False  # keep pytest from collecting this class

    statistic: float
    p_value: float
    method: str
    n: tuple[int, ...]


def _clip_p(p):
    return np.clip(p, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Shapiro-Wilk (Royston 1995 approximation)

# polynomial coefficients, ascending powers
_C1 = (0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)
_SMALL_N_P_FLOOR = 1e-99


def _poly(coefs: Sequence[float], x: float) -> float:
    out = 0.0
    for c in reversed(coefs):
        out = out * x + c
    return out


@lru_cache(maxsize=64)
def shapiro_weights(n: int) -> np.ndarray:
    """Antisymmetric W coefficients for ``n`` ascending order statistics."""
    if n < SW_MIN_N:
        raise DataError(f"Shapiro-Wilk needs at least {SW_MIN_N} observations")
    half = n // 2
    if n == 3:
        upper = np.array([math.sqrt(0.5)])
    else:
        i = np.arange(1, half + 1)
        m = special.ndtri((i - 0.375) / (n + 0.25))
        summ2 = 2.0 * float(np.sum(m * m))
        ssumm2 = math.sqrt(summ2)
        rsn = 1.0 / math.sqrt(n)
        a1 = _poly(_C1, rsn) - m[0] / ssumm2
        if n > 5:
            a2 = -m[1] / ssumm2 + _poly(_C2, rsn)
            fac = math.sqrt(
                (summ2 - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2) / (1.0 - 2.0 * a1 ** 2 - 2.0 * a2 ** 2)
            )
            upper = m / -fac
            upper[1] = a2
        else:
            fac = math.sqrt((summ2 - 2.0 * m[0] ** 2) / (1.0 - 2.0 * a1 ** 2))
            upper = m / -fac
        upper[0] = a1
    # upper[k] weights the (k+1)-th largest value; its mirror gets the negation
    weights = np.zeros(n)
    weights[:half] = -upper
    weights[n - half:] = upper[::-1]
    weights.setflags(write=False)
    return weights


def _shapiro_pvalue(w: np.ndarray, w1: np.ndarray, n: int) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        if n == 3:
            p = (6.0 / math.pi) * (np.arcsin(np.sqrt(np.clip(w, 0.0, 1.0))) - math.pi / 3.0)
            return _clip_p(p)
        y = np.log(w1)
        if n <= 11:
            gamma = _poly(_G, n)
            m = _poly(_C3, n)
            s = math.exp(_poly(_C4, n))
            degenerate = y >= gamma
            y = -np.log(np.where(degenerate, np.nan, gamma - y))
            p = special.ndtr(-(y - m) / s)
            p = np.where(degenerate, _SMALL_N_P_FLOOR, p)
        else:
            ln = math.log(n)
            m = _poly(_C5, ln)
            s = math.exp(_poly(_C6, ln))
            p = special.ndtr(-(y - m) / s)
    p = np.where(np.isnan(w), np.nan, p)
    return _clip_p(p)


def shapiro_wilk_columns(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """W and p for every column of ``x``; constant columns yield NaN."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if not SW_MIN_N <= n <= SW_MAX_N:
        raise DataError(f"Shapiro-Wilk requires {SW_MIN_N} <= n <= {SW_MAX_N}, got n={n}")
    a = shapiro_weights(n)
    xs = np.sort(x, axis=0)
    span = xs[-1] - xs[0]
    constant = span <= 0
    span = np.where(constant, 1.0, span)
    xs = xs / span
    xc = xs - xs.mean(axis=0)
    ac = a - a.mean()
    ssa = float(ac @ ac)
    ssx = np.sum(xc * xc, axis=0)
    sax = ac @ xc
    with np.errstate(invalid="ignore", divide="ignore"):
        root = np.sqrt(ssa * ssx)
        # 1 - W in a cancellation-free form
        w1 = (root - sax) * (root + sax) / (ssa * ssx)
    w1 = np.where(constant, np.nan, np.maximum(w1, 0.0))
    w = 1.0 - w1
    return w, _shapiro_pvalue(w, w1, n)


def shapiro_wilk(sample: Sequence[float]) -> TestOutcome:
    """Shapiro-Wilk normality test with Royston's p-value approximation."""
    x = np.asarray(sample, dtype=float).ravel()
    if not SW_MIN_N <= x.size <= SW_MAX_N:
        raise DataError(f"Shapiro-Wilk requires {SW_MIN_N} <= n <= {SW_MAX_N}, got n={x.size}")
    if not np.all(np.isfinite(x)):
        raise DataError("Shapiro-Wilk sample contains non-finite values")
    if np.ptp(x) == 0:
        raise NumericError("Shapiro-Wilk W is undefined for a constant sample")
    w, p = shapiro_wilk_columns(x[:, None])
    return TestOutcome(float(w[0]), float(p[0]), "shapiro-wilk", (x.size,))


# ---------------------------------------------------------------------------
# Two-sample t test

def t_test_columns(
    a: np.ndarray, b: np.ndarray, variance_mode: str = "pooled"
) -> tuple[np.ndarray, np.ndarray]:
    """Column-wise two-sided t test; columns where t is undefined give NaN."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na, nb = a.shape[0], b.shape[0]
    va = a.var(axis=0, ddof=1)
    vb = b.var(axis=0, ddof=1)
    diff = a.mean(axis=0) - b.mean(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        if variance_mode == "pooled":
            df = np.full(va.shape, float(na + nb - 2))
            sp2 = ((na - 1) * va + (nb - 1) * vb) / df
            se = np.sqrt(sp2 * (1.0 / na + 1.0 / nb))
        elif variance_mode == "welch":
            qa, qb = va / na, vb / nb
            se = np.sqrt(qa + qb)
            df = (qa + qb) ** 2 / (qa ** 2 / (na - 1) + qb ** 2 / (nb - 1))
        else:
            raise DataError(f"unknown variance_mode {variance_mode!r}")
        t = diff / se
        p = 2.0 * special.stdtr(df, -np.abs(t))
    undefined = (va == 0) & (vb == 0)
    t = np.where(undefined, np.nan, t)
    p = np.where(undefined, np.nan, _clip_p(p))
    return t, p


def t_test_two_sample(
    a: Sequence[float], b: Sequence[float], variance_mode: str = "pooled"
) -> TestOutcome:
    """Student (pooled) or Welch two-sample t test, two-sided."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size < 2 or b.size < 2:
        raise DataError("t test needs at least two observations per group")
    if variance_mode not in ("pooled", "welch"):
        raise DataError(f"unknown variance_mode {variance_mode!r}")
    if a.var() == 0 and b.var() == 0:
        raise NumericError("t statistic undefined: both groups have zero variance")
    t, p = t_test_columns(a[:, None], b[:, None], variance_mode)
    return TestOutcome(float(t[0]), float(p[0]), f"t-{variance_mode}", (a.size, b.size))


# ---------------------------------------------------------------------------
# Wilcoxon rank-sum

def ranksum_columns(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normal-approximation rank-sum test per column.

    Midranks with the tie-corrected variance and a 0.5 continuity correction
    toward the mean. Columns with every observation tied have zero variance;
    they get ``z = 0`` and ``p = 1``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na, nb = a.shape[0], b.shape[0]
    n = na + nb
    pooled = np.concatenate([a, b], axis=0)
    lo = rankdata(pooled, method="min", axis=0)
    hi = rankdata(pooled, method="max", axis=0)
    mid = 0.5 * (lo + hi)
    tie_size = hi - lo + 1.0
    # sum over tie groups of (t^3 - t) == sum over members of (t^2 - 1)
    tie_term = np.sum(tie_size * tie_size - 1.0, axis=0)
    w = mid[:na].sum(axis=0)
    mean = na * (n + 1) / 2.0
    var = na * nb / 12.0 * ((n + 1) - tie_term / (n * (n - 1))) if n > 1 else np.zeros_like(w)
    var = np.where(var > 0, var, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        d = w - mean
        d = np.sign(d) * np.maximum(np.abs(d) - 0.5, 0.0)
        z = np.where(var > 0, d / np.sqrt(var), 0.0)
    p = special.erfc(np.abs(z) / math.sqrt(2.0))
    return z, _clip_p(p)


@lru_cache(maxsize=256)
def _ranksum_counts(n1: int, n: int) -> tuple[int, ...]:
    """Number of n1-subsets of {1..n} with each possible rank sum."""
    max_sum = sum(range(n - n1 + 1, n + 1))
    # table[k][s]: subsets of size k with sum s drawn from ranks seen so far
    table = [[0] * (max_sum + 1) for _ in range(n1 + 1)]
    table[0][0] = 1
    for r in range(1, n + 1):
        for k in range(min(r, n1), 0, -1):
            row, prev = table[k], table[k - 1]
            for s in range(max_sum, r - 1, -1):
                if prev[s - r]:
                    row[s] += prev[s - r]
    return tuple(table[n1])


def ranksum_test(a: Sequence[float], b: Sequence[float], mode: str = "approx") -> TestOutcome:
    """Two-sided Wilcoxon rank-sum test.

    ``approx`` uses the continuity-corrected normal approximation with tie
    correction; ``exact`` uses the full permutation distribution of the rank
    sum and requires tie-free data with ``len(a) + len(b) <= 16``.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size < 1 or b.size < 1:
        raise DataError("rank-sum test needs at least one observation per group")
    n = a.size + b.size
    if mode == "approx":
        z, p = ranksum_columns(a[:, None], b[:, None])
        return TestOutcome(float(z[0]), float(p[0]), "ranksum-approx", (a.size, b.size))
    if mode != "exact":
        raise DataError(f"unknown rank-sum mode {mode!r}")
    if n > EXACT_RANKSUM_MAX_N:
        raise DataError(f"exact rank-sum limited to n <= {EXACT_RANKSUM_MAX_N}, got {n}")
    pooled = np.concatenate([a, b])
    if np.unique(pooled).size != n:
        raise DataError("exact rank-sum requires tie-free data")
    ranks = rankdata(pooled).astype(int)
    w = int(ranks[: a.size].sum())
    counts = _ranksum_counts(a.size, n)
    lower = sum(counts[: w + 1])
    upper = sum(counts[w:])
    p = min(1.0, 2.0 * min(lower, upper) / comb(n, a.size))
    return TestOutcome(float(w), p, "ranksum-exact", (a.size, b.size))


# ---------------------------------------------------------------------------
# Fisher / Freeman-Halton exact test

def _compositions(total: int, caps: Sequence[int]):
    """Non-negative integer vectors summing to ``total`` with ``v[i] <= caps[i]``."""
    if len(caps) == 1:
        if total <= caps[0]:
            yield (total,)
        return
    rest = sum(caps[1:])
    for v in range(max(0, total - rest), min(caps[0], total) + 1):
        for tail in _compositions(total - v, caps[1:]):
            yield (v, *tail)


def _validate_table(table) -> np.ndarray:
    t = np.asarray(table)
    if t.ndim != 2:
        raise DataError("contingency table must be two-dimensional")
    if not np.issubdtype(t.dtype, np.integer):
        if not np.all(np.equal(np.mod(t, 1), 0)):
            raise DataError("contingency table cells must be integers")
        t = t.astype(np.int64)
    if (t < 0).any():
        raise DataError("contingency table cells must be non-negative")
    if t.sum() == 0:
        raise DataError("contingency table total is zero")
    return t.astype(np.int64)


def fisher_exact(table, max_tables: int = FISHER_MAX_TABLES) -> TestOutcome:
    """Freeman-Halton exact test of independence for an r x c table.

    The p-value sums the probability of every table with the observed margins
    that is no more probable than the observed one (relative slack 1e-7).
    """
    t = _validate_table(table)
    t = t[t.sum(axis=1) > 0][:, t.sum(axis=0) > 0]
    rows = [int(v) for v in t.sum(axis=1)]
    cols = [int(v) for v in t.sum(axis=0)]
    n = int(t.sum())
    lgf = special.gammaln(np.arange(n + 1) + 1.0).tolist()
    const = sum(lgf[r] for r in rows) + sum(lgf[c] for c in cols) - lgf[n]
    observed = const - sum(lgf[int(v)] for v in t.ravel())
    if len(rows) < 2 or len(cols) < 2:
        return TestOutcome(math.exp(observed), 1.0, "fisher-freeman-halton", (n,))

    threshold = observed + math.log1p(FISHER_REL_TOL)
    total = 0.0
    visited = 0
    last = len(cols) - 1

    def fill(j: int, remaining: list[int], acc: float) -> None:
        nonlocal total, visited
        if j == last:
            visited += 1
            if visited > max_tables:
                raise TableTooLargeError(f"more than {max_tables} tables to enumerate")
            lp = acc - sum(lgf[v] for v in remaining)
            if lp <= threshold:
                total += math.exp(lp)
            return
        for comp in _compositions(cols[j], remaining):
            fill(
                j + 1,
                [r - v for r, v in zip(remaining, comp)],
                acc - sum(lgf[v] for v in comp),
            )

    fill(0, rows, const)
    return TestOutcome(math.exp(observed), float(min(1.0, total)), "fisher-freeman-halton", (n,))
