import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ifra import _smo_py, kernels, svm
from ifra.errors import DataError


def _problem(seed, n=40, d=10, shift=1.5):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, d))
    y = np.where(np.arange(n) % 2 == 0, 1, -1)
    x[y == 1, 0] += shift
    return x, y


@pytest.mark.skipif(kernels.BACKEND != "compiled", reason="extension not built")
@pytest.mark.parametrize("seed", range(5))
def test_compiled_and_python_kernels_are_bit_identical(seed):
    from ifra import _smo

    x, y = _problem(seed, n=30 + seed * 7)
    k = np.ascontiguousarray(x @ x.T)
    yf = y.astype(float)
    a1, b1, p1, c1 = _smo.smo_solve(k, yf, 0.7, 1e-3, 50, seed)
    a2, b2, p2, c2 = _smo_py.smo_solve(k, yf, 0.7, 1e-3, 50, seed)
    assert np.array_equal(a1, a2)
    assert (b1, p1, c1) == (b2, p2, c2)


def test_two_point_problem():
    model = svm.train([[0.0], [2.0]], [-1, 1], svm.SvmConfig(c=10.0))
    assert svm.predict(model, [-1.0]) == -1
    assert svm.predict(model, [3.0]) == 1
    # boundary at the midpoint, so the point 1.0 sits on it
    assert abs(model.decision_function([1.0])) < 1e-6


@pytest.mark.parametrize("seed", range(4))
def test_dual_feasibility(seed):
    x, y = _problem(seed)
    cfg = svm.SvmConfig(c=0.5)
    m = svm.train(x, y, cfg, seed=seed)
    assert np.all(m.alpha >= 0) and np.all(m.alpha <= cfg.c + 1e-12)
    assert abs(np.dot(m.alpha, m.labels)) < 1e-9


def test_separable_data_is_learned():
    x, y = _problem(0, n=60, shift=6.0)
    m = svm.train(x, y)
    assert svm.accuracy(m, x, y) == 1.0
    assert m.converged


def test_feature_scaling_invariance():
    x, y = _problem(3)
    scale = np.geomspace(0.01, 100, x.shape[1])
    a = svm.train(x, y, seed=4)
    b = svm.train(x * scale + 7.0, y, seed=4)
    assert np.array_equal(svm.predict(a, x), svm.predict(b, x * scale + 7.0))


def test_zero_variance_column_dropped():
    x, y = _problem(1)
    x[:, 3] = 2.0
    m = svm.train(x, y)
    assert m.dropped == (3,)
    assert 3 not in m.features
    assert svm.predict(m, x).shape == (x.shape[0],)


def test_shuffled_labels_give_chance_accuracy():
    rng = np.random.default_rng(0)
    accs = []
    for seed in range(100):
        x = rng.standard_normal((60, 10))
        y = rng.permutation(np.repeat([1, -1], 30))
        m = svm.train(x[:40], y[:40], seed=seed)
        accs.append(svm.accuracy(m, x[40:], y[40:]))
    assert abs(np.mean(accs) - 0.5) < 0.05


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_training_is_deterministic(seed):
    x, y = _problem(seed % 7)
    a = svm.train(x, y, seed=seed)
    b = svm.train(x, y, seed=seed)
    assert np.array_equal(a.weights, b.weights) and a.bias == b.bias


def test_errors():
    x, y = _problem(0)
    with pytest.raises(DataError):
        svm.train(x, np.ones(len(y), dtype=int))
    with pytest.raises(DataError):
        svm.train(x, y * 2)
    with pytest.raises(DataError):
        svm.train(np.empty((0, 3)), np.empty(0))
    bad = x.copy()
    bad[0, 0] = np.nan
    with pytest.raises(DataError):
        svm.train(bad, y)
    m = svm.train(x, y)
    with pytest.raises(DataError):
        m.decision_function(x[:, :3])
    with pytest.raises(DataError):
        svm.accuracy(m, np.empty((0, x.shape[1])), np.empty(0))
    for kwargs in ({"c": 0}, {"tolerance": 0}, {"max_passes": 0}, {"kernel": "rbf"}):
        with pytest.raises(DataError):
            svm.SvmConfig(**kwargs)
