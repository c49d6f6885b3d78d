"""Dot-product-graph families induced by a two-sided spectral embedding."""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import RankOutOfRange
from .graph import Graph, build_graph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DpgEmbedding:
    """Left/right vertex embeddings with ``f @ g.T`` the best rank-``d``
    approximation of the source adjacency."""

    f: np.ndarray
    g: np.ndarray
    d: int
    source_norm: float

    @property
    def n(self):
        return self.f.shape[0]

    def scores(self):
        """Symmetric score matrix ``min(f_i . g_j, f_j . g_i)``."""
        P = self.f @ self.g.T
        return np.minimum(P, P.T)


def spectral_embedding(A, d):
    """Two-sided embedding ``f = U_d sqrt(S_d)``, ``g = V_d sqrt(S_d)``."""
    A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    n = A.shape[0]
    d = int(d)
    if not 1 <= d <= n:
        raise RankOutOfRange(f"d must satisfy 1 <= d <= n={n}, got {d}")
    U, s, Vt = np.linalg.svd(A)
    U, s, V = U[:, :d], s[:d], Vt[:d].T
    neg = np.flatnonzero(np.einsum("ij,ij->j", U, V) < 0)
    if neg.size:
        logger.info("singular directions %s come from negative eigenvalues; f != g there",
                    neg.tolist())
    root = np.sqrt(s)
    return DpgEmbedding(U * root, V * root, d, float(np.linalg.norm(A)))


def dpg_at_threshold(emb, delta):
    """Graph with an edge wherever the pair score exceeds ``delta``; the
    edge weight is the margin ``score - delta``."""
    S = emb.scores()
    iu, ju = np.triu_indices(emb.n, k=1)
    s = S[iu, ju]
    keep = s > delta
    return build_graph(emb.n, zip(iu[keep], ju[keep], s[keep] - delta))


def delta_range(emb):
    """``(min score, max score, ascending scores)`` over all vertex pairs."""
    S = emb.scores()
    s = np.sort(S[np.triu_indices(emb.n, k=1)])
    return float(s[0]), float(s[-1]), s


def quantile_grid(emb, size=32):
    """Thresholds at evenly spaced quantiles of the pair scores.

    The top quantile is excluded since a threshold at the largest score
    leaves no edges.
    """
    _, _, s = delta_range(emb)
    qs = np.linspace(0.0, 1.0, size + 1)[:-1]
    return np.unique(np.quantile(s, qs))


def edge_jaccard(a, b):
    """Jaccard similarity of two graphs' edge sets."""
    ea = set(zip(a.rows.tolist(), a.cols.tolist()))
    eb = set(zip(b.rows.tolist(), b.cols.tolist()))
    union = ea | eb
    return len(ea & eb) / len(union) if union else 1.0


class DotProductGraph(TransformerMixin, BaseEstimator):
    """Estimator form of the dot-product-graph construction.

    ``fit(A)`` computes the rank-``d`` embedding of the adjacency ``A``;
    ``transform(A)`` returns the left embedding ``f`` of the fitted graph
    (``A`` is accepted for API compatibility and ignored); ``graph(delta)``
    returns the thresholded graph.
    """

    def __init__(self, d=4):
        self.d = d

    def fit(self, A, y=None):
        if isinstance(A, Graph):
            A = A.adjacency()
        self.embedding_ = spectral_embedding(A, self.d)
        self.n_features_in_ = self.embedding_.n
        return self

    def transform(self, X):
        check_is_fitted(self, "embedding_")
        return self.embedding_.f

    def graph(self, delta):
        check_is_fitted(self, "embedding_")
        return dpg_at_threshold(self.embedding_, delta)

    def delta_grid(self, size=32):
        check_is_fitted(self, "embedding_")
        return quantile_grid(self.embedding_, size)
