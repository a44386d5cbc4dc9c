"""The compiled and numpy kernels must agree bit for bit on decisions."""
import numpy as np
import pytest

from polarshape import _backend, _fallback
from polarshape.core import int_to_bits, polar_transform
from polarshape.sc import ARGMAX, GIVEN, SAMPLE, SCTree, boxplus, genie_llrs

BACKENDS = ["python"] + (["cython"] if _backend._kernels is not None else [])


def test_compiled_backend_is_available():
    # the build ships the extension; the fallback stays usable either way
    assert _backend.BACKEND in ("cython", "python")
    assert "python" in BACKENDS


@pytest.mark.parametrize("name", BACKENDS)
def test_transform_kernel(name, rng):
    k = _backend.kernels(name)
    u = rng.integers(0, 2, (7, 64)).astype(np.uint8)
    ref = u.copy()
    k.polar_transform_inplace(u)
    G = np.ones((1, 1), dtype=np.int64)
    for _ in range(6):
        G = np.kron(G, np.array([[1, 0], [1, 1]]))
    assert np.array_equal(u, (ref.astype(np.int64) @ G) % 2)


def _run(name, leaf, rules, given, unif):
    t = SCTree(leaf, kernels=_backend.kernels(name))
    t.sweep(leaf.shape[1], rules, given=given, unif=unif)
    return t


@pytest.mark.parametrize("N", [1, 2, 8, 64])
def test_backends_agree_on_mixed_rules(N, rng):
    if len(BACKENDS) < 2:
        pytest.skip("compiled kernels not built")
    B = 5
    leaf = rng.normal(0, 2, (B, N))
    leaf[0, 0] = np.inf
    rules = rng.integers(0, 3, N).astype(np.int8)
    given = rng.integers(0, 2, (B, N)).astype(np.uint8)
    unif = rng.random((B, N))
    a = _run("python", leaf, rules, given, unif)
    b = _run("cython", leaf, rules, given, unif)
    assert np.array_equal(a.u, b.u)
    assert np.array_equal(a.x, b.x)
    np.testing.assert_allclose(a.llr, b.llr, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("name", BACKENDS)
def test_tree_output_is_transform_of_decisions(name, rng):
    leaf = rng.normal(0, 1, (3, 32))
    t = _run(name, leaf, np.full(32, ARGMAX, np.int8), None, None)
    assert np.array_equal(t.x, polar_transform(t.u))


@pytest.mark.parametrize("name", BACKENDS)
def test_descend_push_matches_sweep(name, rng):
    leaf = rng.normal(0, 1, (4, 16))
    given = rng.integers(0, 2, (4, 16)).astype(np.uint8)
    a = _run(name, leaf, np.full(16, GIVEN, np.int8), given, None)
    t = SCTree(leaf, kernels=_backend.kernels(name))
    cols = []
    for i in range(16):
        cols.append(t.descend())
        t.push(given[:, i])
    np.testing.assert_allclose(np.stack(cols, axis=1), a.llr, rtol=1e-12)
    assert np.array_equal(t.x, a.x)


@pytest.mark.parametrize("name", BACKENDS)
def test_genie_llrs_match_tree(name, rng):
    leaf = rng.normal(0, 1.5, (6, 32))
    u = rng.integers(0, 2, (6, 32)).astype(np.uint8)
    t = _run(name, leaf, np.full(32, GIVEN, np.int8), u, None)
    np.testing.assert_allclose(genie_llrs(leaf, u), t.llr, rtol=1e-10, atol=1e-12)


def test_source_llrs_match_enumeration():
    p, L = 0.27, 8
    X = int_to_bits(np.arange(256), L)
    PX = np.prod(np.where(X == 1, p, 1 - p), axis=1)
    U = polar_transform(X)
    lam = np.log((1 - p) / p)
    g = genie_llrs(np.full((256, L), lam), U)
    for row in range(0, 256, 17):
        for i in range(L):
            m = np.all(U[:, :i] == U[row, :i], axis=1)
            p0 = PX[m & (U[:, i] == 0)].sum()
            p1 = PX[m & (U[:, i] == 1)].sum()
            assert g[row, i] == pytest.approx(np.log(p0 / p1), rel=1e-9, abs=1e-12)


def test_sample_rule_threshold():
    leaf = np.zeros((2, 1))
    t = SCTree(leaf)
    t.sweep(1, np.array([SAMPLE], np.int8), unif=np.array([[0.49], [0.51]]))
    assert t.u[:, 0].tolist() == [0, 1]


def test_boxplus_edge_cases():
    assert boxplus(np.inf, 3.0) == pytest.approx(3.0)
    assert boxplus(-np.inf, 3.0) == pytest.approx(-3.0)
    assert boxplus(0.0, 5.0) == 0.0
    a, b = 1.3, -0.7
    exact = np.log((1 + np.exp(a + b)) / (np.exp(a) + np.exp(b)))
    assert boxplus(a, b) == pytest.approx(exact, rel=1e-14)
    assert np.isnan(boxplus(np.nan, 1.0))


def test_fallback_prob_zero_is_stable():
    assert _fallback.prob_zero(800.0) == 1.0
    assert _fallback.prob_zero(-800.0) == 0.0
    assert _fallback.prob_zero(0.0) == 0.5
