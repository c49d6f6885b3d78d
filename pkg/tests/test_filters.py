import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grassfilt.exceptions import BrokenEigenspaceWarning, DimensionMismatch, NotSymmetric
from grassfilt.experiments import block_rotation_trajectory
from grassfilt.filters import (
    FactoredFilter,
    GraphFilterInterpolator,
    apply_filter,
    build_lowpass,
    filter_distance,
    interpolate_filter,
    rayleigh_ritz_align,
    vandermonde,
    write_response_csv,
)
from grassfilt.graph import build_graph, karate_club, shift_operator
from grassfilt.grassmann import projector_distance, random_orthogonal, random_stiefel
from grassfilt.interpolation import AnchorSet, build_anchor_set, chebyshev_nodes, choose_base_point
from grassfilt.spectral import extremal_eigenpairs


def p3():
    return shift_operator(build_graph(3, [(0, 1), (1, 2)]), "laplacian")


def test_vandermonde_examples():
    np.testing.assert_array_equal(vandermonde([0, 1, 2], 3), [[1, 0, 0], [1, 1, 1], [1, 2, 4]])
    np.testing.assert_array_equal(vandermonde([3.0, -2.0], 1), [[1.0], [1.0]])
    np.testing.assert_array_equal(vandermonde([0.5], 4), [[1, 0.5, 0.25, 0.125]])
    with pytest.raises(ValueError):
        vandermonde([1.0], 0)


def test_unit_taps_give_projector(rng):
    S = rng.standard_normal((10, 10))
    pair = extremal_eigenpairs(S + S.T, 3)
    f = build_lowpass(pair, [1.0])
    V = pair.vectors
    np.testing.assert_allclose(f.to_dense(), V @ V.T, atol=1e-14)
    x_in = V @ rng.standard_normal(3)
    np.testing.assert_allclose(apply_filter(f, x_in), x_in, atol=1e-12)
    x_out = rng.standard_normal(10)
    x_out -= V @ (V.T @ x_out)
    np.testing.assert_allclose(apply_filter(f, x_out), 0.0, atol=1e-12)


def test_linear_taps_give_truncated_shift(rng):
    pair = extremal_eigenpairs(p3(), 2)
    x = rng.standard_normal(3)
    V = pair.vectors
    np.testing.assert_allclose(apply_filter(build_lowpass(pair, [0.0, 1.0]), x),
                               V @ (pair.values * (V.T @ x)), atol=1e-14)


def test_power_of_two_taps_response():
    pair = extremal_eigenpairs(np.diag([0.0, 0.5, 1.0, 7.0]), 3)
    f = build_lowpass(pair, 2.0 ** -np.arange(5))
    lam = np.array([0.0, 0.5, 1.0])
    np.testing.assert_allclose(f.response(), sum((lam / 2) ** i for i in range(5)))


def test_p3_dense_oracle():
    pair = extremal_eigenpairs(p3(), 2)
    f = build_lowpass(pair, [1.0, 1.0])
    x = np.array([1.0, 0.0, 0.0])
    V = pair.vectors
    dense = V @ np.diag(vandermonde(pair.values, 2) @ [1.0, 1.0]) @ V.T @ x
    assert np.linalg.norm(apply_filter(f, x) - dense) <= 1e-12
    # the P3 spectrum is {0, 1, 3}
    np.testing.assert_allclose(pair.values, [0.0, 1.0], atol=1e-14)


def test_apply_filter_matrix_signal_and_mismatch(rng):
    pair = extremal_eigenpairs(p3(), 2)
    f = build_lowpass(pair, [1.0, 0.5])
    X = rng.standard_normal((3, 4))
    np.testing.assert_allclose(f.apply(X), f.to_dense() @ X, atol=1e-14)
    with pytest.raises(DimensionMismatch):
        apply_filter(f, np.ones(4))


def test_to_dense_refused_for_large_n(rng):
    f = FactoredFilter(random_stiefel(65, 2, rng), np.array([0.0, 1.0]), np.array([1.0]))
    with pytest.raises(MemoryError):
        f.to_dense()
    assert f.to_dense(force=True).shape == (65, 65)


def test_filter_distance_matches_dense(rng):
    S = rng.standard_normal((12, 12))
    S = S + S.T
    f = build_lowpass(extremal_eigenpairs(S, 3), [1.0, 0.3])
    g = build_lowpass(extremal_eigenpairs(S + 0.1 * np.diag(rng.random(12)), 3), [1.0, 0.3])
    assert abs(filter_distance(f, g) - np.linalg.norm(f.to_dense() - g.to_dense())) <= 1e-12
    assert filter_distance(f, f) <= 1e-13
    assert f.frobenius_norm() == pytest.approx(np.linalg.norm(f.to_dense()))


def test_rayleigh_ritz_on_exact_basis(rng):
    S = rng.standard_normal((8, 8))
    S = S + S.T
    pair = extremal_eigenpairs(S, 3)
    lam, O = rayleigh_ritz_align(pair.vectors, S)
    np.testing.assert_allclose(lam, pair.values, atol=1e-10 * np.linalg.norm(S))
    np.testing.assert_allclose(np.abs(O), np.eye(3), atol=1e-10)


def test_rayleigh_ritz_rotated_basis(rng):
    S = rng.standard_normal((8, 8))
    S = S + S.T
    pair = extremal_eigenpairs(S, 3)
    Q = random_orthogonal(3, rng)
    lam, O = rayleigh_ritz_align(pair.vectors @ Q, S)
    np.testing.assert_allclose(lam, pair.values, atol=1e-10)
    W = pair.vectors @ Q @ O
    np.testing.assert_allclose(np.abs(np.sum(W * pair.vectors, axis=0)), 1.0, atol=1e-10)
    np.testing.assert_allclose(O.T @ O, np.eye(3), atol=1e-10)


def test_rayleigh_ritz_hand_example():
    S = np.diag([1.0, 2.0, 3.0, 4.0])
    r = np.sqrt(0.5)
    vt = np.array([[r, r], [r, -r], [0, 0], [0, 0]])
    lam, O = rayleigh_ritz_align(vt, S)
    np.testing.assert_allclose(lam, [1.0, 2.0], atol=1e-14)
    np.testing.assert_allclose(np.abs(vt @ O), np.eye(4)[:, :2], atol=1e-14)


def test_rayleigh_ritz_errors(rng):
    with pytest.raises(NotSymmetric):
        rayleigh_ritz_align(random_stiefel(3, 1, rng), np.triu(np.ones((3, 3))))
    with pytest.raises(DimensionMismatch):
        rayleigh_ritz_align(random_stiefel(3, 1, rng), np.eye(4))


def test_commutation_on_exact_basis():
    S = shift_operator(karate_club(), "laplacian")
    pair = extremal_eigenpairs(S, 4)
    H = build_lowpass(pair, [1.0, -0.2, 0.03]).to_dense()
    assert np.linalg.norm(H @ S - S @ H) <= 1e-8 * np.linalg.norm(S) * np.linalg.norm(H)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_orthogonal_invariance(seed):
    rng = np.random.default_rng(seed)
    V = random_stiefel(15, 3, rng)
    lam = np.sort(rng.standard_normal(3))
    taps = rng.standard_normal(3)
    x = rng.standard_normal(15)
    Q = random_orthogonal(3, rng)
    # same operator written in the rotated basis: diag(r) becomes Q^T diag(r) Q
    r = vandermonde(lam, 3) @ taps
    ref = V @ (r * (V.T @ x))
    W = V @ Q
    alt = W @ ((Q.T * r) @ Q @ (W.T @ x))
    assert np.linalg.norm(ref - alt) <= 1e-10 * max(1.0, np.linalg.norm(ref))
    # and the realigned filter from Rayleigh-Ritz on W reproduces it
    S = (V * lam) @ V.T
    lam2, O = rayleigh_ritz_align(W, S)
    f = FactoredFilter(W @ O, lam2, taps)
    assert np.linalg.norm(apply_filter(f, x) - ref) <= 1e-9 * max(1.0, np.linalg.norm(ref))


def test_anchor_reproduction_dense():
    family = block_rotation_trajectory(30, 3, 0.5, rng=0)
    anchors = build_anchor_set(family, chebyshev_nodes(5), 3)
    base = choose_base_point(anchors)
    taps = [1.0, -0.5, 0.25]
    for t in anchors.times:
        H_t = interpolate_filter(anchors, base, taps, t, family(t)).to_dense()
        H = build_lowpass(extremal_eigenpairs(family(t), 3), taps).to_dense()
        assert np.linalg.norm(H_t - H) <= 1e-7 * np.linalg.norm(H)


def test_constant_family(rng):
    S = rng.standard_normal((12, 12))
    S = S + S.T
    pair = extremal_eigenpairs(S, 3)
    reps = np.stack([pair.vectors @ random_orthogonal(3, rng) for _ in range(4)])
    anchors = AnchorSet(chebyshev_nodes(3), reps)
    base = reps[1]
    ref = build_lowpass(pair, [1.0, 0.5]).to_dense()
    for t in (-0.9, 0.0, 0.6):
        H = interpolate_filter(anchors, base, [1.0, 0.5], t, S, warn=False).to_dense()
        assert np.linalg.norm(H - ref) <= 1e-8


def test_filter_error_tracks_subspace_error():
    from scipy.stats import spearmanr
    family = block_rotation_trajectory(30, 3, 0.7, rng=3)
    probes = np.linspace(-0.95, 0.95, 9)
    sub, filt = [], []
    for N in (2, 3, 4, 5, 6):
        anchors = build_anchor_set(family, chebyshev_nodes(N), 3)
        base = choose_base_point(anchors)
        es, ef = 0.0, 0.0
        for t in probes:
            pair = extremal_eigenpairs(family(t), 3)
            f = interpolate_filter(anchors, base, [1.0, 0.5], t, family(t), warn=False)
            es = max(es, projector_distance(f.basis, pair.vectors))
            ef = max(ef, filter_distance(f, build_lowpass(pair, [1.0, 0.5])))
        sub.append(es)
        filt.append(ef)
    assert spearmanr(sub, filt).statistic >= 0.9


def test_broken_eigenspace_warning():
    g = build_graph(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
    pair = extremal_eigenpairs(shift_operator(g, "laplacian"), 2)
    with pytest.warns(BrokenEigenspaceWarning):
        build_lowpass(pair, [1.0])


def test_response_csv(tmp_path):
    f = build_lowpass(extremal_eigenpairs(p3(), 2), [1.0, 2.0])
    write_response_csv(f, tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "lambda,response"
    lam, r = map(float, lines[2].split(","))
    assert lam == pytest.approx(1.0) and r == pytest.approx(3.0)


def test_graph_filter_interpolator():
    family = block_rotation_trajectory(25, 3, 0.5, rng=6)
    est = GraphFilterInterpolator(k=3, taps=(1.0, 0.5), n_nodes=7).fit(family)
    assert set(est.get_params()) == {"k", "taps", "n_nodes", "interval", "base_point", "random_state"}
    t = float(est.anchors_.times[2])
    assert filter_distance(est.predict(t), est.exact(t)) <= 1e-7
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        f = est.predict(0.1)
    assert filter_distance(f, est.exact(0.1)) <= 1e-4
    x = np.arange(25.0)
    np.testing.assert_allclose(est.transform(x, 0.1), apply_filter(f, x))
    assert projector_distance(est.subspace(0.1), f.basis) <= 1e-12
    callable_taps = GraphFilterInterpolator(k=3, taps=lambda t: [1.0, t], n_nodes=5).fit(family)
    np.testing.assert_array_equal(callable_taps.predict(0.3).taps, [1.0, 0.3])
