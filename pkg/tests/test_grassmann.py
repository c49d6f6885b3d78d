import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grassfilt.exceptions import BaseMismatch, CutLocus, RankDeficientTangent
from grassfilt.grassmann import (
    _grassmann_log_inverse,
    exp_sensitivity_probe,
    geodesic_distance,
    grassmann_exp,
    grassmann_log,
    is_horizontal,
    principal_angles,
    procrustes_align,
    project_tangent,
    projector_distance,
    random_orthogonal,
    random_stiefel,
)

E1 = np.array([[1.0], [0.0]])
E2 = np.array([[0.0], [1.0]])


def planar(theta):
    return np.array([[np.cos(theta)], [np.sin(theta)]])


def nearby(n, k, rng, scale=0.8):
    B = random_stiefel(n, k, rng)
    V, _ = np.linalg.qr(B + scale * rng.standard_normal((n, k)) / np.sqrt(n))
    return B, V


seeds = st.integers(0, 2**31 - 1)


def test_log_of_base_is_zero(rng):
    B = random_stiefel(10, 3, rng)
    np.testing.assert_allclose(grassmann_log(B, B).delta, 0.0, atol=1e-14)
    np.testing.assert_allclose(grassmann_log(B, B @ random_orthogonal(3, rng)).delta, 0.0, atol=1e-12)


@pytest.mark.parametrize("theta", [0.05, 0.7, 1.2, 1.55])
def test_planar_log_exp(theta):
    log = grassmann_log(E1, planar(theta))
    np.testing.assert_allclose(log.delta, theta * E2, atol=1e-12)
    np.testing.assert_allclose(grassmann_exp(E1, theta * E2), planar(theta), atol=1e-12)


def test_planar_log_flips_representative():
    # (-cos, -sin) spans the same line; the aligned representative is used
    np.testing.assert_allclose(grassmann_log(E1, -planar(0.4)).delta, 0.4 * E2, atol=1e-12)


def test_cut_locus():
    with pytest.raises(CutLocus):
        grassmann_log(E1, E2)


def test_exp_of_zero_is_base(rng):
    B = random_stiefel(8, 3, rng)
    assert np.linalg.norm(grassmann_exp(B, np.zeros((8, 3))) - B) <= 1e-12


def test_tangent_vector_base_mismatch(rng):
    B = random_stiefel(6, 2, rng)
    other = random_stiefel(6, 2, rng)
    D = grassmann_log(B, nearby(6, 2, rng)[1])
    with pytest.raises(BaseMismatch):
        grassmann_exp(other, D)
    with pytest.raises(BaseMismatch):
        D + grassmann_log(other, other)
    assert (2.0 * D).norm == pytest.approx(2.0 * D.norm)
    # an equal copy of the base is accepted
    grassmann_exp(B.copy(), D)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_log_is_horizontal_and_norm_is_distance(seed):
    rng = np.random.default_rng(seed)
    B, V = nearby(20, 4, rng)
    log = grassmann_log(B, V)
    assert is_horizontal(B, log.delta)
    assert abs(log.norm - geodesic_distance(B, V)) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_log_representative_invariance(seed):
    rng = np.random.default_rng(seed)
    B, V = nearby(15, 3, rng)
    Q = random_orthogonal(3, rng)
    np.testing.assert_allclose(grassmann_log(B, V @ Q).delta, grassmann_log(B, V).delta, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_roundtrip_returns_aligned_representative(seed):
    rng = np.random.default_rng(seed)
    B, V = nearby(30, 5, rng)
    V = V @ random_orthogonal(5, rng)
    W = grassmann_exp(B, grassmann_log(B, V))
    assert np.linalg.norm(W - procrustes_align(B, V)) <= 1e-8
    assert projector_distance(W, V) <= 1e-8
    assert np.linalg.norm(W.T @ W - np.eye(5)) <= 1e-10
    # an already aligned target comes back unchanged
    A = procrustes_align(B, V)
    assert np.linalg.norm(grassmann_exp(B, grassmann_log(B, A)) - A) <= 1e-8


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_procrustes_log_matches_inverse_log(seed):
    rng = np.random.default_rng(seed)
    B, V = nearby(12, 3, rng)
    np.testing.assert_allclose(grassmann_log(B, V).delta, _grassmann_log_inverse(B, V), atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(0.0, 1.5))
def test_exp_orthonormal_and_on_geodesic(seed, scale):
    rng = np.random.default_rng(seed)
    B = random_stiefel(10, 3, rng)
    D = project_tangent(B, rng.standard_normal((10, 3)))
    D *= scale / max(np.linalg.norm(D, 2), 1e-300)
    V = grassmann_exp(B, D)
    assert np.linalg.norm(V.T @ V - np.eye(3)) <= 1e-10
    # spectral norm below pi/2: the geodesic is minimizing
    assert abs(geodesic_distance(B, V) - np.linalg.norm(D)) <= 1e-9


@pytest.mark.parametrize("theta", [1e-9, 0.3, 1.0, np.pi / 2 - 1e-9])
def test_planar_distances(theta):
    assert geodesic_distance(E1, planar(theta)) == pytest.approx(theta, abs=1e-12)
    assert projector_distance(E1, planar(theta)) == pytest.approx(np.sqrt(2) * np.sin(theta), abs=1e-12)


def test_distances_zero_for_same_subspace(rng):
    B = random_stiefel(9, 4, rng)
    Q = random_orthogonal(4, rng)
    assert geodesic_distance(B, B @ Q) <= 1e-7
    assert projector_distance(B, B @ Q) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_distance_metric_properties(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_stiefel(8, 3, rng) for _ in range(3))
    dab, dba = geodesic_distance(a, b), geodesic_distance(b, a)
    assert abs(dab - dba) <= 1e-12
    assert geodesic_distance(a, c) <= dab + geodesic_distance(b, c) + 1e-9
    Pa, Pb = a @ a.T, b @ b.T
    assert abs(projector_distance(a, b) - np.linalg.norm(Pa - Pb)) <= 1e-10
    assert projector_distance(a, b) <= 2.0 * np.linalg.norm(a - b) + 1e-12
    assert abs(projector_distance(a, b) ** 2 - (6 - 2 * np.linalg.norm(a.T @ b) ** 2)) <= 1e-10


def test_principal_angles_ascending(rng):
    a, b = random_stiefel(10, 4, rng), random_stiefel(10, 4, rng)
    th = principal_angles(a, b)
    assert np.all(np.diff(th) >= -1e-12)
    assert np.all((th >= 0) & (th <= np.pi / 2 + 1e-12))


def test_sensitivity_probe_rank_deficient():
    with pytest.raises(RankDeficientTangent):
        exp_sensitivity_probe(E1, np.zeros((2, 1)))


def test_sensitivity_probe_planar_unit_speed():
    out = exp_sensitivity_probe(E1, 0.7 * E2, trials=5, eps=1e-7, rng=0)
    # the only horizontal direction is along the geodesic, which has unit speed
    assert out["max_ratio"] == pytest.approx(1.0, abs=1e-6)
    assert out["bound_factor"] == pytest.approx(8 / 0.7 + 2)


def test_sensitivity_probe_stable_under_eps(rng):
    B = random_stiefel(40, 4, rng)
    D = project_tangent(B, rng.standard_normal((40, 4)))
    D *= 0.8 / np.linalg.norm(D, 2)
    r1 = exp_sensitivity_probe(B, D, trials=50, eps=1e-6, rng=1)["max_ratio"]
    r2 = exp_sensitivity_probe(B, D, trials=50, eps=5e-7, rng=1)["max_ratio"]
    assert np.isfinite(r1) and abs(r1 - r2) <= 0.2 * r1
