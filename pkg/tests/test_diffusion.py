import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dig.diffusion import (
    adaptive_bandwidth,
    alpha_decay_kernel,
    diffuse,
    row_normalize,
    select_time_scale,
    spectrum_from_operator,
    stationary_distribution,
    von_neumann_entropy_curve,
)
from support import random_model, random_positive_kernel


# -- bandwidth and kernel ----------------------------------------------------

D3 = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 3.0], [2.0, 3.0, 0.0]])


def test_nearest_neighbor_bandwidth():
    np.testing.assert_array_equal(adaptive_bandwidth(D3, 1), [1.0, 1.0, 2.0])


def test_bandwidth_at_n_minus_one():
    np.testing.assert_array_equal(adaptive_bandwidth(D3, 2), D3.max(axis=1))


def test_bandwidth_errors():
    with pytest.raises(ValueError, match=r"k must be in \[1, 2\]"):
        adaptive_bandwidth(D3, 3)
    dup = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
    with pytest.raises(ValueError, match="index 0"):
        adaptive_bandwidth(dup, 1)


def test_kernel_values():
    sigma = np.array([4.0, 4.0, 2.0])
    d = np.array([[0.0, 2.0, 1.0], [2.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
    for alpha in (1.0, 3.0, 10.0):
        K = alpha_decay_kernel(d, sigma, alpha)
        np.testing.assert_array_equal(np.diag(K), 1.0)
        # D^2 equals both bandwidths -> exp(-1)
        assert K[0, 1] == pytest.approx(np.exp(-1.0), rel=1e-15)
        # oracle: the two one-sided terms evaluated separately
        ref = 0.5 * np.exp(-(1.0 / 4.0) ** alpha) + 0.5 * np.exp(-(1.0 / 2.0) ** alpha)
        assert K[0, 2] == pytest.approx(ref, rel=1e-15)
        np.testing.assert_array_equal(K, K.T)


def test_kernel_errors():
    with pytest.raises(ValueError, match="alpha"):
        alpha_decay_kernel(D3, np.ones(3), 0.5)
    with pytest.raises(ValueError, match="positive"):
        alpha_decay_kernel(D3, np.array([1.0, 0.0, 1.0]), 2.0)


# -- operator and stationary distribution -------------------------------------


def test_row_normalize_examples():
    np.testing.assert_allclose(row_normalize([[1, 1], [1, 3]]), [[0.5, 0.5], [0.25, 0.75]])
    np.testing.assert_array_equal(row_normalize(np.eye(3)), np.eye(3))
    with pytest.raises(ValueError, match="row 1"):
        row_normalize([[1.0, 0.0], [0.0, 0.0]])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(2, 30))
def test_row_normalize_is_stochastic(seed, n):
    P = row_normalize(random_positive_kernel(seed, n))
    assert P.min() >= 0
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)


def test_stationary_small():
    K = np.array([[1.0, 1.0], [1.0, 3.0]])
    phi = stationary_distribution(K)
    np.testing.assert_allclose(phi, [1 / 3, 2 / 3])
    np.testing.assert_allclose(phi @ row_normalize(K), phi)


def test_identity_kernel_rejected():
    with pytest.raises(ValueError, match="disconnected"):
        stationary_distribution(np.eye(4))


def test_asymmetric_kernel_rejected():
    with pytest.raises(ValueError, match="symmetric"):
        stationary_distribution(np.array([[1.0, 0.5], [0.2, 1.0]]))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 100_000))
def test_stationary_matches_perron_vector(seed):
    K = random_positive_kernel(seed, 20)
    phi = stationary_distribution(K)
    # oracle: left Perron eigenvector from a dense eigendecomposition
    w, v = np.linalg.eig(row_normalize(K).T)
    perron = np.real(v[:, np.argmax(w.real)])
    perron = perron / perron.sum()
    np.testing.assert_allclose(phi, perron, atol=1e-8)
    assert np.all(phi > 0)


# -- powers --------------------------------------------------------------------

P2 = np.array([[0.5, 0.5], [0.25, 0.75]])


def test_diffuse_examples():
    np.testing.assert_array_equal(diffuse(P2, 1), P2)
    np.testing.assert_allclose(diffuse(P2, 2), [[0.375, 0.625], [0.3125, 0.6875]], atol=1e-15)
    with pytest.raises(ValueError):
        diffuse(P2, 0)


def test_long_time_converges_to_stationary():
    K = random_positive_kernel(11, 10)
    phi = stationary_distribution(K)
    Pt = diffuse(row_normalize(K), 512)
    assert np.max(np.abs(Pt - phi[None, :])) < 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 12), st.integers(1, 12))
def test_semigroup(seed, a, b):
    P = random_model(seed % 50, n=15).operator
    np.testing.assert_allclose(diffuse(P, a + b), diffuse(P, a) @ diffuse(P, b), atol=1e-10)
    np.testing.assert_allclose(diffuse(P, a + b).sum(axis=1), 1.0, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_operator_preserves_simplex(seed):
    rng = np.random.default_rng(seed)
    P = random_model(seed % 50, n=20).operator
    v = rng.dirichlet(np.ones(20))
    out = v @ P
    assert out.min() >= 0
    assert out.sum() == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 100_000))
def test_spectrum_properties(seed):
    m = random_model(seed, n=25)
    lam = spectrum_from_operator(m.operator, m.stationary)
    assert lam.min() >= -1 - 1e-10 and lam.max() <= 1 + 1e-10
    assert lam[-1] == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(m.operator @ np.ones(25), 1.0, atol=1e-10)
    # the general eigensolver agrees with the symmetric route
    np.testing.assert_allclose(spectrum_from_operator(m.operator), lam, atol=1e-8)


# -- entropy and time scale ------------------------------------------------------


def test_identity_entropy_is_log_n():
    H = von_neumann_entropy_curve(np.eye(6), t_max=5)
    np.testing.assert_allclose(H, np.log(6))


def test_two_state_entropy():
    P = row_normalize(np.array([[3.0, 1.0], [1.0, 3.0]]))
    H = von_neumann_entropy_curve(P, t_max=3, stationary=stationary_distribution(np.array([[3.0, 1.0],
                                                                                         [1.0, 3.0]])))
    eta = np.array([2 / 3, 1 / 3])
    assert H[0] == pytest.approx(-np.sum(eta * np.log(eta)), abs=1e-12)
    assert H[0] == pytest.approx(0.63651, abs=1e-5)


def test_complex_spectrum_rejected():
    rotation = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    with pytest.raises(ValueError, match="non-real"):
        von_neumann_entropy_curve(rotation, 4)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 100_000))
def test_entropy_non_increasing(seed):
    m = random_model(seed, n=30)
    H = von_neumann_entropy_curve(m.operator, 64, m.stationary)
    assert np.all(np.diff(H) <= 1e-12)
    assert H[-1] < H[0]


def chord_distances(H):
    """Independent oracle: distance of each point to the chord via a projection."""
    pts = np.column_stack([np.arange(1, len(H) + 1), H]).astype(float)
    a, b = pts[0], pts[-1]
    u = (b - a) / np.linalg.norm(b - a)
    rel = pts - a
    return np.linalg.norm(rel - np.outer(rel @ u, u), axis=1)


def test_knee_example():
    H = [10, 2, 1.9, 1.8, 1.7]
    assert select_time_scale(H) == 2
    assert int(np.argmax(chord_distances(np.array(H, float))[1:-1])) + 2 == 2


def test_linear_curve_tie_break():
    assert select_time_scale(np.linspace(5, 1, 9)) == 2


def test_knee_errors():
    with pytest.raises(ValueError, match="flat"):
        select_time_scale([1.0, 1.0, 1.0])
    with pytest.raises(ValueError, match="at least 3"):
        select_time_scale([2.0, 1.0])
    with pytest.raises(ValueError, match="non-increasing"):
        select_time_scale([1.0, 2.0, 0.5])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.0, 5.0, allow_nan=False), min_size=3, max_size=40))
def test_knee_matches_brute_force(steps):
    H = 10.0 - np.cumsum(np.sort(steps)[::-1])
    if H[0] - H[-1] <= 1e-9:
        return
    dist = chord_distances(H)[1:-1]
    t = select_time_scale(H)
    assert 2 <= t <= len(H) - 1
    assert dist[t - 2] >= dist.max() - 1e-9 * max(1.0, dist.max())
