"""Vertex classification with learned low-pass graph filters."""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_signal
from .dpg import dpg_at_threshold, quantile_grid
from .exceptions import (
    CutLocus,
    DimensionMismatch,
    EmptyMask,
    EmptyValidation,
    SingularNormalEquations,
)
from .filters import as_taps, rayleigh_ritz_align, vandermonde
from .graph import Graph, graph_from_adjacency, shift_operator
from .interpolation import AnchorSet, chebyshev_nodes, choose_base_point, interpolate_subspace
from .spectral import SpectralPair, extremal_eigenpairs

logger = logging.getLogger(__name__)

SPLIT_FRACTIONS = (0.7, 0.1, 0.2)


@dataclass(frozen=True)
class SplitSpec:
    """Disjoint train/validation/evaluation masks covering the known labels."""

    known_mask: np.ndarray
    train_mask: np.ndarray
    val_mask: np.ndarray
    eval_mask: np.ndarray
    seed: int = None

    def __post_init__(self):
        masks = (self.train_mask, self.val_mask, self.eval_mask)
        if any(not m.any() for m in masks):
            raise EmptyMask("train, validation and evaluation masks must be nonempty")
        total = sum(m.astype(int) for m in masks)
        if np.any(total > 1) or np.any((total == 1) != self.known_mask):
            raise ValueError("masks must be disjoint and cover exactly the known vertices")


def make_split(known_mask, seed=None, fractions=SPLIT_FRACTIONS):
    """Random train/validation/evaluation split of the known vertices.

    Validation and evaluation each get at least one vertex.
    """
    known_mask = np.asarray(known_mask, dtype=bool)
    idx = np.flatnonzero(known_mask)
    if idx.size < 3:
        raise EmptyMask("need at least three known labels to split")
    rng = np.random.default_rng(seed)
    idx = rng.permutation(idx)
    n_val = max(1, int(round(fractions[1] * idx.size)))
    n_train = min(int(round(fractions[0] * idx.size)), idx.size - n_val - 1)
    masks = []
    for part in (idx[:n_train], idx[n_train:n_train + n_val], idx[n_train + n_val:]):
        m = np.zeros_like(known_mask)
        m[part] = True
        masks.append(m)
    return SplitSpec(known_mask, *masks, seed=seed)


def random_known_mask(n, fraction=0.5, rng=None):
    rng = np.random.default_rng(rng)
    mask = np.zeros(n, dtype=bool)
    mask[rng.choice(n, size=int(round(fraction * n)), replace=False)] = True
    return mask


@dataclass(frozen=True)
class TapsFit:
    """Ridge fit of filter taps.

    ``residual`` is the full objective; ``data_residual`` its least-squares
    part alone.
    """

    h: np.ndarray
    alpha: float
    residual: float
    data_residual: float

    @property
    def M(self):
        return self.h.size


def tap_design(pair, x_tr, x_fit, M):
    """Rows of ``diag(x_fit) V diag(V^T x_tr) Psi`` where ``x_fit != 0``."""
    V = pair.vectors
    n = V.shape[0]
    x_tr = check_signal(x_tr, n, "x_tr")
    x_fit = check_signal(x_fit, n, "x_fit")
    B = (V * (V.T @ x_tr)) @ vandermonde(pair.values, M)
    rows = np.flatnonzero(x_fit)
    return x_fit[rows, None] * B[rows]


def learn_taps(pair, x_tr, x_fit, M, alpha=0.0):
    """Taps minimizing ``||diag(x_fit) V diag(Psi h) V^T x_tr - 1||^2 + alpha ||h||^2``.

    Only vertices with ``x_fit != 0`` contribute rows. The problem is solved
    as an augmented least-squares system rather than via normal equations.
    """
    M = int(M)
    if M < 1:
        raise ValueError("M must be >= 1")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    B = tap_design(pair, x_tr, x_fit, M)
    if B.shape[0] < M:
        logger.info("only %d fit rows for %d taps; relying on regularization", B.shape[0], M)
    ones = np.ones(B.shape[0])
    if alpha == 0:
        if np.linalg.matrix_rank(B) < M:
            raise SingularNormalEquations("tap design is rank deficient and alpha = 0")
        h = np.linalg.lstsq(B, ones, rcond=None)[0]
    else:
        Baug = np.vstack([B, np.sqrt(alpha) * np.eye(M)])
        h = np.linalg.lstsq(Baug, np.concatenate([ones, np.zeros(M)]), rcond=None)[0]
    data = float(np.sum((B @ h - ones) ** 2))
    return TapsFit(h, float(alpha), data + alpha * float(h @ h), data)


def filter_scores(pair, taps, x_kn):
    h = as_taps(taps.h if isinstance(taps, TapsFit) else taps)
    V = pair.vectors
    x_kn = np.asarray(x_kn, dtype=float)
    if x_kn.shape[0] != V.shape[0]:
        raise DimensionMismatch(f"signal has {x_kn.shape[0]} entries, basis has {V.shape[0]} rows")
    r = vandermonde(pair.values, h.size) @ h
    return V @ (r * (V.T @ x_kn))


def predict_binary(pair, taps, x_kn):
    """``(labels, scores)``; zero scores are labeled +1."""
    scores = filter_scores(pair, taps, x_kn)
    return np.where(scores >= 0, 1, -1), scores


def predict_multiclass(pair, per_class_taps, x_kn_onevsall):
    """One-vs-all prediction; ties go to the lowest class index."""
    if len(per_class_taps) != len(x_kn_onevsall):
        raise DimensionMismatch("need one signal per class filter")
    if len(per_class_taps) < 2:
        raise ValueError("need at least two classes")
    scores = np.stack([filter_scores(pair, h, x) for h, x in zip(per_class_taps, x_kn_onevsall)])
    return np.argmax(scores, axis=0)


def evaluate_accuracy(pred, truth, mask):
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise EmptyMask("accuracy mask is empty")
    return float(np.mean(np.asarray(pred)[mask] == np.asarray(truth)[mask]))


def _signal(labels, mask, positive):
    return np.where(mask, np.where(labels == positive, 1.0, -1.0), 0.0)


def fit_predict_filter(pair, labels, fit_mask, classes, M, alpha):
    """Learn taps on ``fit_mask`` and label every vertex.

    Two classes use a single signed filter (``classes[1]`` is +1); more
    classes use one-vs-all filters.
    """
    classes = np.asarray(classes)
    if classes.size == 2:
        x = _signal(labels, fit_mask, classes[1])
        fit = learn_taps(pair, x, x, M, alpha)
        sign, scores = predict_binary(pair, fit, x)
        return np.where(sign > 0, classes[1], classes[0]), scores
    xs = [_signal(labels, fit_mask, c) for c in classes]
    fits = [learn_taps(pair, x, x, M, alpha) for x in xs]
    idx = predict_multiclass(pair, fits, xs)
    scores = np.stack([filter_scores(pair, f, x) for f, x in zip(fits, xs)], axis=1)
    return classes[idx], scores


@dataclass
class DeltaReport:
    delta_star: float
    grid: list = field(default_factory=list)
    test_accuracy: float = float("nan")

    @property
    def val_curve(self):
        return [row["val_acc"] for row in self.grid]

    @property
    def best_test_accuracy(self):
        return max(row["test_acc"] for row in self.grid)

    def to_dict(self):
        return {"delta_star": self.delta_star, "test_accuracy": self.test_accuracy,
                "grid": self.grid}


def _exact_pair(g, k, shift):
    return extremal_eigenpairs(shift_operator(g, shift), k)


class _InterpolatedSweep:
    """Eigenspaces along the threshold family from a few exact anchors."""

    def __init__(self, emb, lo, hi, k, n_anchors, shift):
        self.emb, self.k, self.shift = emb, k, shift
        times = chebyshev_nodes(n_anchors - 1, lo, hi) if hi > lo else np.array([lo])
        pairs = [_exact_pair(dpg_at_threshold(emb, t), k, shift) for t in times]
        self.anchors = AnchorSet(times, np.stack([p.vectors for p in pairs]),
                                 np.stack([p.values for p in pairs]))
        self.base = choose_base_point(self.anchors, "middle_anchor")
        try:
            self.anchors.tangents(self.base)
        except CutLocus as exc:
            raise CutLocus(f"{exc}; try more anchors per sweep") from exc

    def pair(self, g, delta):
        # grid endpoints lie just outside the Chebyshev anchors by design
        V = interpolate_subspace(self.anchors, self.base, delta, warn=False)
        lam, O = rayleigh_ritz_align(V, shift_operator(g, self.shift))
        return SpectralPair(lam, V @ O)


def select_delta(emb, split, labels, k=3, M=5, alpha=1e-2, grid=None, grid_size=32,
                 search="grid", anchors_per_sweep=10, use_interpolation=False,
                 shift="laplacian", golden_iters=16):
    """Choose the dot-product-graph threshold by validation accuracy.

    For every candidate threshold the graph is built, its ``k``-dimensional
    low-frequency subspace is solved exactly or interpolated from
    ``anchors_per_sweep`` Chebyshev anchors, taps are re-learned on the
    training labels, and validation/evaluation accuracies are recorded.
    Ties in validation accuracy go to the smaller threshold.
    """
    if not split.val_mask.any():
        raise EmptyValidation("validation mask is empty")
    labels = np.asarray(labels)
    classes = np.unique(labels[split.known_mask])
    grid = quantile_grid(emb, grid_size) if grid is None else np.sort(np.asarray(grid, float))
    sweep = None
    if use_interpolation:
        sweep = _InterpolatedSweep(emb, grid[0], grid[-1], k, anchors_per_sweep, shift)

    def evaluate(delta):
        g = dpg_at_threshold(emb, delta)
        pair = sweep.pair(g, delta) if sweep else _exact_pair(g, k, shift)
        pred, _ = fit_predict_filter(pair, labels, split.train_mask, classes, M, alpha)
        return {"delta": float(delta),
                "val_acc": evaluate_accuracy(pred, labels, split.val_mask),
                "test_acc": evaluate_accuracy(pred, labels, split.eval_mask),
                "n_edges": g.m}

    if search == "grid":
        rows = [evaluate(d) for d in grid]
    elif search == "golden_section":
        warnings.warn("golden-section search assumes a unimodal validation curve",
                      UserWarning, stacklevel=2)
        rows = _golden_section(evaluate, grid[0], grid[-1], golden_iters)
    else:
        raise ValueError(f"unknown search {search!r}")
    rows.sort(key=lambda r: r["delta"])
    best = max(rows, key=lambda r: (r["val_acc"], -r["delta"]))
    return DeltaReport(best["delta"], rows, best["test_acc"])


def _golden_section(evaluate, lo, hi, iters):
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    seen = {}

    def f(x):
        if x not in seen:
            seen[x] = evaluate(x)
        return seen[x]["val_acc"]

    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    for _ in range(iters):
        if f(c) >= f(d):
            b, d = d, c
            c = b - invphi * (b - a)
        else:
            a, c = c, d
            d = a + invphi * (b - a)
    return list(seen.values())


class LowPassFilterClassifier(ClassifierMixin, BaseEstimator):
    """Transductive vertex classifier built on a learned low-pass filter.

    Parameters
    ----------
    k : int, optional
        Low-frequency subspace dimension; defaults to ``ceil(0.1 n)``.
    M : int
        Number of filter taps.
    alpha : float
        Ridge weight on the taps.
    shift : str
        Shift operator kind passed to :func:`shift_operator`.

    Notes
    -----
    ``fit(A, y)`` takes the graph (adjacency matrix or :class:`Graph`) and
    one label per vertex, with ``-1`` marking unlabeled vertices as in
    :mod:`sklearn.semi_supervised`. ``predict`` labels every vertex of the
    fitted graph.
    """

    def __init__(self, k=None, M=5, alpha=1e-2, shift="laplacian"):
        self.k = k
        self.M = M
        self.alpha = alpha
        self.shift = shift

    def fit(self, A, y):
        g = A if isinstance(A, Graph) else graph_from_adjacency(A)
        y = np.asarray(y)
        if y.shape != (g.n,):
            raise DimensionMismatch(f"y must have shape ({g.n},)")
        labeled = y != -1
        if not labeled.any():
            raise EmptyMask("no labeled vertices")
        self.classes_ = np.unique(y[labeled])
        if self.classes_.size < 2:
            raise ValueError("need at least two classes among the labeled vertices")
        k = self.k if self.k is not None else int(np.ceil(0.1 * g.n))
        self.pair_ = _exact_pair(g, k, self.shift)
        self.transduction_, self.scores_ = fit_predict_filter(
            self.pair_, y, labeled, self.classes_, self.M, self.alpha)
        self.n_features_in_ = g.n
        return self

    def predict(self, A=None):
        check_is_fitted(self, "transduction_")
        return self.transduction_

    def decision_function(self, A=None):
        check_is_fitted(self, "transduction_")
        return self.scores_
