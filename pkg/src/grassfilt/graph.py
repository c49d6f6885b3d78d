"""Weighted undirected graphs and their shift operators."""

import csv
import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import cdist

from .exceptions import (
    DegenerateFeatures,
    DuplicateEdge,
    IndexOutOfRange,
    NegativeWeight,
    SelfLoop,
    ZeroDegree,
)

ZERO_DEGREE_TOL = 1e-12


class ShiftKind(str, enum.Enum):
    ADJACENCY = "adjacency"
    LAPLACIAN = "laplacian"
    NORMALIZED_LAPLACIAN = "normalized_laplacian"
    RANDOM_WALK_LAPLACIAN = "random_walk_laplacian"
    DEGREE = "degree"


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph on vertices ``0..n-1``.

    Each edge is stored once with ``rows[e] < cols[e]``; edges are sorted
    lexicographically. Use :func:`build_graph` rather than the constructor
    to get validation and canonical ordering.
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    signed_ok: bool = False
    labels: np.ndarray = field(default=None, compare=False, repr=False)

    @property
    def m(self):
        return int(self.rows.shape[0])

    @property
    def edges(self):
        return [(int(i), int(j), float(w)) for i, j, w in zip(self.rows, self.cols, self.weights)]

    def adjacency(self, sparse=False):
        A = sp.coo_matrix(
            (np.concatenate([self.weights, self.weights]),
             (np.concatenate([self.rows, self.cols]), np.concatenate([self.cols, self.rows]))),
            shape=(self.n, self.n),
        ).tocsr()
        return A if sparse else A.toarray()

    def degrees(self):
        deg = np.zeros(self.n)
        np.add.at(deg, self.rows, self.weights)
        np.add.at(deg, self.cols, self.weights)
        return deg

    def to_triplets(self):
        """Sparse ``(rows, cols, weights)`` export, one entry per undirected edge."""
        return self.rows.copy(), self.cols.copy(), self.weights.copy()

    def with_weights(self, weights, signed_ok=None):
        """Same edge set with new weights (zeros kept as explicit edges)."""
        weights = np.asarray(weights, dtype=float)
        signed_ok = self.signed_ok if signed_ok is None else signed_ok
        if not signed_ok and np.any(weights < 0):
            raise NegativeWeight("negative weight on a graph with signed_ok=False")
        return Graph(self.n, self.rows, self.cols, _frozen(weights), signed_ok, self.labels)


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


def build_graph(n, edge_list, signed_ok=False, labels=None):
    """Validate an edge list and return a canonical :class:`Graph`.

    ``edge_list`` holds ``(i, j)`` or ``(i, j, w)`` tuples; missing weights
    default to 1. ``(i, j)`` and ``(j, i)`` are the same undirected edge and
    may only appear once.
    """
    n = int(n)
    if n < 0:
        raise ValueError("n must be nonnegative")
    edge_list = list(edge_list)
    if edge_list:
        arr = np.array([e if len(e) == 3 else (e[0], e[1], 1.0) for e in edge_list], dtype=float)
    else:
        arr = np.zeros((0, 3))
    i = arr[:, 0].astype(np.int64)
    j = arr[:, 1].astype(np.int64)
    w = arr[:, 2]
    if np.any(i != arr[:, 0]) or np.any(j != arr[:, 1]):
        raise IndexOutOfRange("vertex indices must be integers")
    if np.any((i < 0) | (i >= n) | (j < 0) | (j >= n)):
        raise IndexOutOfRange(f"vertex index outside [0, {n})")
    if np.any(i == j):
        v = int(i[i == j][0])
        raise SelfLoop(f"self-loop at vertex {v}")
    if not np.all(np.isfinite(w)):
        raise ValueError("edge weights must be finite")
    if not signed_ok and np.any(w < 0):
        raise NegativeWeight("negative edge weight with signed_ok=False")
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    order = np.lexsort((hi, lo))
    lo, hi, w = lo[order], hi[order], w[order]
    dup = (lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])
    if np.any(dup):
        k = int(np.flatnonzero(dup)[0])
        raise DuplicateEdge(f"edge ({lo[k]}, {hi[k]}) appears more than once")
    if labels is not None:
        labels = _frozen(np.asarray(labels))
        if labels.shape != (n,):
            raise ValueError(f"labels must have shape ({n},)")
    return Graph(n, _frozen(lo), _frozen(hi), _frozen(w), bool(signed_ok), labels)


def graph_from_adjacency(A, signed_ok=False, tol=0.0):
    """Build a :class:`Graph` from the upper triangle of a symmetric matrix.

    Entries with ``|A_ij| <= tol`` are treated as absent.
    """
    A = sp.csr_matrix(A) if sp.issparse(A) else np.asarray(A, dtype=float)
    U = sp.triu(A, k=1).tocoo() if sp.issparse(A) else sp.coo_matrix(np.triu(A, k=1))
    keep = np.abs(U.data) > tol
    edges = zip(U.row[keep], U.col[keep], U.data[keep])
    return build_graph(A.shape[0], edges, signed_ok=signed_ok)


def shift_operator(g, kind="laplacian", sparse=False):
    """Assemble a graph shift operator.

    Parameters
    ----------
    g : Graph
    kind : ShiftKind or str
        ``adjacency``, ``laplacian`` (``D - A``), ``normalized_laplacian``
        (``D^-1/2 L D^-1/2``), ``random_walk_laplacian`` (``I - D^-1 A``,
        the only non-symmetric variant) or ``degree``.
    sparse : bool
        Return a CSR matrix instead of a dense array.
    """
    kind = ShiftKind(kind)
    A = g.adjacency(sparse=True)
    deg = g.degrees()
    D = sp.diags(deg)
    if kind is ShiftKind.ADJACENCY:
        S = A
    elif kind is ShiftKind.DEGREE:
        S = D
    elif kind is ShiftKind.LAPLACIAN:
        S = D - A
    else:
        small = np.abs(deg) < ZERO_DEGREE_TOL
        if np.any(small):
            raise ZeroDegree(f"vertex {int(np.flatnonzero(small)[0])} has zero degree")
        I = sp.identity(g.n)
        if kind is ShiftKind.NORMALIZED_LAPLACIAN:
            # signed degrees make the square root complex; use |d| as is customary
            s = sp.diags(1.0 / np.sqrt(np.abs(deg)))
            S = I - s @ A @ s if np.all(deg > 0) else s @ (D - A) @ s
        else:
            S = I - sp.diags(1.0 / deg) @ A
    S = sp.csr_matrix(S)
    return S if sparse else S.toarray()


class KnnWeight(str, enum.Enum):
    GAUSSIAN_KERNEL = "gaussian_kernel"
    RAW_DISTANCE = "raw_distance"
    UNIT = "unit"


def knn_graph(features, kappa, weight_mode="gaussian_kernel"):
    """Symmetrized Euclidean k-nearest-neighbour graph.

    Vertices ``i`` and ``j`` are joined if either selects the other among its
    ``kappa`` nearest neighbours. Distance ties are broken by ascending
    vertex index. ``gaussian_kernel`` weights are ``exp(-d^2 / (2 b^2))``
    with ``b`` the median distance over the selected pairs.
    """
    X = np.asarray(features, dtype=float)
    if X.ndim != 2:
        raise ValueError("features must be an n x d matrix")
    n = X.shape[0]
    kappa = int(kappa)
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    if n <= kappa:
        raise DegenerateFeatures(f"need more than kappa={kappa} points, got n={n}")
    mode = KnnWeight(weight_mode)

    dist = cdist(X, X)
    np.fill_diagonal(dist, np.inf)
    # stable sort keeps ascending index order among equal distances
    nbrs = np.argsort(dist, axis=1, kind="stable")[:, :kappa]
    i = np.repeat(np.arange(n), kappa)
    j = nbrs.ravel()
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    pairs = np.unique(np.stack([lo, hi], axis=1), axis=0)
    lo, hi = pairs[:, 0], pairs[:, 1]
    d = dist[lo, hi]

    if mode is KnnWeight.UNIT:
        w = np.ones_like(d)
    elif mode is KnnWeight.RAW_DISTANCE:
        w = d.copy()
    else:
        bw = float(np.median(d)) if d.size else 1.0
        if bw <= 0:
            bw = 1.0
        w = np.exp(-(d ** 2) / (2.0 * bw ** 2))
    return build_graph(n, zip(lo, hi, w))


# Zachary (1977) karate club, 0-based; labels: 0 = Mr. Hi's faction, 1 = Officer's.
_KARATE_EDGES = [
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10), (0, 11),
    (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31), (1, 2), (1, 3), (1, 7), (1, 13),
    (1, 17), (1, 19), (1, 21), (1, 30), (2, 3), (2, 7), (2, 8), (2, 9), (2, 13), (2, 27),
    (2, 28), (2, 32), (3, 7), (3, 12), (3, 13), (4, 6), (4, 10), (5, 6), (5, 10), (5, 16),
    (6, 16), (8, 30), (8, 32), (8, 33), (9, 33), (13, 33), (14, 32), (14, 33), (15, 32),
    (15, 33), (18, 32), (18, 33), (19, 33), (20, 32), (20, 33), (22, 32), (22, 33),
    (23, 25), (23, 27), (23, 29), (23, 32), (23, 33), (24, 25), (24, 27), (24, 31),
    (25, 31), (26, 29), (26, 33), (27, 33), (28, 31), (28, 33), (29, 32), (29, 33),
    (30, 32), (30, 33), (31, 32), (31, 33), (32, 33),
]
_KARATE_LABELS = [
    0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 1, 0, 1, 0, 1, 1, 1, 1, 1, 1, 1,
    1, 1, 1, 1, 1,
]


def karate_club():
    """Zachary's karate club: 34 vertices, 78 unit-weight edges, with the
    two-faction split available as ``graph.labels``."""
    return build_graph(34, _KARATE_EDGES, labels=np.array(_KARATE_LABELS))


# --- CSV interchange -------------------------------------------------------

def read_edge_csv(path, n=None, signed_ok=False):
    """Read a ``src,dst[,weight]`` edge list. ``n`` defaults to max index + 1."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"src", "dst"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected header src,dst[,weight]")
        edges = []
        for row in reader:
            w = row.get("weight")
            edges.append((int(row["src"]), int(row["dst"]), float(w) if w not in (None, "") else 1.0))
    if n is None:
        n = 1 + max((max(i, j) for i, j, _ in edges), default=-1)
    return build_graph(n, edges, signed_ok=signed_ok)


def write_edge_csv(g, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["src", "dst", "weight"])
        for i, j, wt in g.edges:
            w.writerow([i, j, repr(wt)])


def read_feature_csv(path):
    """Read ``id,f0,...`` rows into an array ordered by id."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "id":
            raise ValueError(f"{path}: expected header id,f0,...")
        rows = {int(r[0]): [float(v) for v in r[1:]] for r in reader if r}
    ids = sorted(rows)
    if ids != list(range(len(ids))):
        raise ValueError(f"{path}: ids must be 0..n-1")
    return np.array([rows[i] for i in ids], dtype=float)


def write_feature_csv(X, path):
    X = np.asarray(X, dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id"] + [f"f{c}" for c in range(X.shape[1])])
        for i, row in enumerate(X):
            w.writerow([i] + [repr(float(v)) for v in row])


def read_label_csv(path, n):
    """Read ``id,label`` rows. Returns ``(labels, known_mask)``; missing ids
    are unlabeled and hold ``-1``."""
    labels = np.full(n, -1, dtype=np.int64)
    known = np.zeros(n, dtype=bool)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"id", "label"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected header id,label")
        for row in reader:
            i = int(row["id"])
            if not 0 <= i < n:
                raise IndexOutOfRange(f"{path}: id {i} outside [0, {n})")
            labels[i] = int(row["label"])
            known[i] = True
    return labels, known
