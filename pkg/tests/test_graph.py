import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grassfilt.exceptions import (
    DegenerateFeatures,
    DuplicateEdge,
    IndexOutOfRange,
    NegativeWeight,
    SelfLoop,
    ZeroDegree,
)
from grassfilt.graph import (
    ShiftKind,
    build_graph,
    graph_from_adjacency,
    karate_club,
    knn_graph,
    read_edge_csv,
    read_feature_csv,
    read_label_csv,
    shift_operator,
    write_edge_csv,
    write_feature_csv,
)


def path3():
    return build_graph(3, [(0, 1, 1.0), (1, 2, 1.0)])


def test_path_graph():
    g = path3()
    assert g.n == 3 and g.m == 2
    assert g.edges == [(0, 1, 1.0), (1, 2, 1.0)]


def test_edges_canonicalized_and_sorted():
    g = build_graph(4, [(3, 1, 2.0), (2, 0), (1, 0, 0.5)])
    assert g.edges == [(0, 1, 0.5), (0, 2, 1.0), (1, 3, 2.0)]


@pytest.mark.parametrize("edges, err", [
    ([(0, 0, 1.0)], SelfLoop),
    ([(0, 1), (1, 0)], DuplicateEdge),
    ([(0, 5)], IndexOutOfRange),
    ([(-1, 0)], IndexOutOfRange),
    ([(0, 1, -1.0)], NegativeWeight),
])
def test_build_graph_errors(edges, err):
    with pytest.raises(err):
        build_graph(2 if err is SelfLoop else 3, edges)


def test_signed_graph_allowed():
    g = build_graph(2, [(0, 1, -0.5)], signed_ok=True)
    assert g.weights[0] == -0.5
    with pytest.raises(NegativeWeight):
        build_graph(2, [(0, 1, 1.0)]).with_weights([-1.0])


def test_graph_is_immutable():
    g = path3()
    with pytest.raises(ValueError):
        g.weights[0] = 3.0


def test_p3_laplacian():
    L = shift_operator(path3(), ShiftKind.LAPLACIAN)
    np.testing.assert_array_equal(L, [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])


def test_degree_matrix():
    g = build_graph(4, [(0, 1, 2.0), (1, 2, 0.5), (0, 3, 1.5)])
    A = g.adjacency()
    np.testing.assert_allclose(shift_operator(g, "degree"), np.diag(A @ np.ones(4)))


def test_k3_normalized_laplacian():
    g = build_graph(3, [(0, 1), (0, 2), (1, 2)])
    L = shift_operator(g, "normalized_laplacian")
    expected = np.eye(3) - 0.5 * (np.ones((3, 3)) - np.eye(3))
    np.testing.assert_allclose(L, expected, atol=1e-15)


def test_random_walk_laplacian():
    g = path3()
    S = shift_operator(g, "random_walk_laplacian")
    np.testing.assert_allclose(S @ np.ones(3), 0.0, atol=1e-15)
    assert S[0, 1] == -1.0 and S[1, 0] == -0.5


def test_normalized_variants_need_degrees():
    g = build_graph(3, [(0, 1)])
    for kind in ("normalized_laplacian", "random_walk_laplacian"):
        with pytest.raises(ZeroDegree):
            shift_operator(g, kind)
    shift_operator(g, "laplacian")


def test_sparse_shift_matches_dense():
    g = karate_club()
    for kind in ShiftKind:
        np.testing.assert_allclose(shift_operator(g, kind, sparse=True).toarray(), shift_operator(g, kind))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**31 - 1))
def test_laplacian_properties(n, seed):
    rng = np.random.default_rng(seed)
    W = np.triu(rng.random((n, n)) * (rng.random((n, n)) < 0.5), 1)
    g = graph_from_adjacency(W + W.T)
    L = shift_operator(g, "laplacian")
    assert np.linalg.norm(L @ np.ones(n)) <= 1e-12 * max(np.linalg.norm(L), 1.0)
    assert np.array_equal(L, L.T)
    A = shift_operator(g, "adjacency")
    assert np.array_equal(A, A.T)
    if np.all(g.degrees() > 0):
        Ln = shift_operator(g, "normalized_laplacian")
        np.testing.assert_allclose(np.diag(Ln), 1.0, atol=1e-14)


def test_knn_complete_when_kappa_is_n_minus_one(rng):
    X = rng.standard_normal((6, 2))
    g = knn_graph(X, 5, "unit")
    assert g.m == 15


def test_knn_two_clusters():
    rng = np.random.default_rng(3)
    X = np.vstack([rng.random((5, 2)), 100.0 + rng.random((5, 2))])
    g = knn_graph(X, 2)
    side = np.arange(10) >= 5
    assert not np.any(side[g.rows] != side[g.cols])
    for i, j, _ in g.edges:
        d = np.linalg.norm(X[:, None] - X[None], axis=2)
        np.fill_diagonal(d, np.inf)
        assert j in np.argsort(d[i], kind="stable")[:2] or i in np.argsort(d[j], kind="stable")[:2]


def test_knn_weight_modes(rng):
    X = rng.standard_normal((12, 3))
    raw = knn_graph(X, 3, "raw_distance")
    gauss = knn_graph(X, 3, "gaussian_kernel")
    assert raw.edges[0][:2] == gauss.edges[0][:2]
    bw = np.median(raw.weights)
    np.testing.assert_allclose(gauss.weights, np.exp(-raw.weights ** 2 / (2 * bw ** 2)))


def test_knn_order_independent(rng):
    X = rng.standard_normal((15, 2))
    perm = rng.permutation(15)
    g = knn_graph(X, 3)
    h = knn_graph(X[perm], 3)
    relabeled = {(min(perm[i], perm[j]), max(perm[i], perm[j])) for i, j, _ in h.edges}
    assert relabeled == {(i, j) for i, j, _ in g.edges}


def test_knn_identical_points_and_too_few():
    g = knn_graph(np.zeros((5, 2)), 2, "unit")
    assert g.m > 0
    with pytest.raises(DegenerateFeatures):
        knn_graph(np.zeros((3, 2)), 3)


def test_karate_club():
    g = karate_club()
    assert (g.n, g.m) == (34, 78)
    assert set(np.unique(g.labels)) == {0, 1}
    assert g.labels[0] != g.labels[33]


def test_karate_matches_networkx():
    nx = pytest.importorskip("networkx")
    ref = nx.karate_club_graph()
    ours = {(i, j) for i, j, _ in karate_club().edges}
    assert ours == {(min(u, v), max(u, v)) for u, v in ref.edges()}
    clubs = np.array([ref.nodes[v]["club"] != "Mr. Hi" for v in range(34)], dtype=int)
    np.testing.assert_array_equal(karate_club().labels, clubs)


def test_csv_roundtrip(tmp_path, rng):
    g = build_graph(5, [(0, 1, 0.25), (1, 4, 3.0), (2, 3, 1e-17)])
    write_edge_csv(g, tmp_path / "e.csv")
    assert read_edge_csv(tmp_path / "e.csv").edges == g.edges
    X = rng.standard_normal((4, 3))
    write_feature_csv(X, tmp_path / "f.csv")
    np.testing.assert_array_equal(read_feature_csv(tmp_path / "f.csv"), X)
    (tmp_path / "l.csv").write_text("id,label\n0,1\n3,0\n")
    labels, known = read_label_csv(tmp_path / "l.csv", 5)
    np.testing.assert_array_equal(labels, [1, -1, -1, 0, -1])
    np.testing.assert_array_equal(known, [True, False, False, True, False])


def test_edge_csv_default_weight(tmp_path):
    (tmp_path / "e.csv").write_text("src,dst\n0,2\n")
    g = read_edge_csv(tmp_path / "e.csv")
    assert g.edges == [(0, 2, 1.0)] and g.n == 3
