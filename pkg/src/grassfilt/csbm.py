"""Contextual stochastic block models with similarity-corrected edge weights."""

import json
from dataclasses import asdict, dataclass, fields

import numpy as np

from .exceptions import ConfigInvalid, ZeroFeatureVector
from .graph import build_graph, shift_operator


@dataclass(frozen=True)
class CsbmConfig:
    """Two-block contextual SBM.

    Cluster ``c`` features are ``mu_c(t) + sigma * z`` with standard normal
    ``z``. ``mu_1`` is fixed along the all-ones direction with norm
    ``mu_norm``; ``mu_2(t)`` has the same norm and is rotated away from it
    by the angle ``theta0 * (1 - t) / 2`` in a fixed plane, so the two means
    align at ``t = 1``.
    """

    n1: int = 50
    n2: int = 100
    p: float = 0.45
    q: float = 0.4
    d: int = 64
    sigma: float = 1.0
    mu_norm: float = 8.0
    theta0: float = np.pi / 4
    seed: int = 0

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ConfigInvalid("cluster sizes must be >= 1")
        if not (0 < self.p <= 1 and 0 <= self.q <= 1):
            raise ConfigInvalid("need 0 < p <= 1 and 0 <= q <= 1")
        if self.d < 1:
            raise ConfigInvalid("d must be >= 1")
        if self.sigma < 0 or self.mu_norm < 0:
            raise ConfigInvalid("sigma and mu_norm must be nonnegative")

    @property
    def n(self):
        return self.n1 + self.n2

    @property
    def blocks(self):
        """Cluster index (0 or 1) of every vertex."""
        return np.repeat([0, 1], [self.n1, self.n2])

    @classmethod
    def from_dict(cls, cfg):
        known = {f.name for f in fields(cls)}
        unknown = set(cfg) - known
        if unknown:
            raise ConfigInvalid(f"unknown CSBM keys: {sorted(unknown)}")
        return cls(**cfg)

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return asdict(self)


def _streams(cfg):
    graph_ss, feat_ss = np.random.SeedSequence(cfg.seed).spawn(2)
    return np.random.default_rng(graph_ss), np.random.default_rng(feat_ss)


def _rotation_plane(d):
    u1 = np.ones(d) / np.sqrt(d)
    if d == 1:
        return u1, np.zeros(1)
    e = np.zeros(d)
    e[0] = 1.0
    u2 = e - u1 * u1[0]
    return u1, u2 / np.linalg.norm(u2)


def feature_means(cfg, t):
    """``(mu_1(t), mu_2(t))``."""
    u1, u2 = _rotation_plane(cfg.d)
    theta = cfg.theta0 * (1.0 - t) / 2.0
    mu1 = cfg.mu_norm * u1
    mu2 = cfg.mu_norm * (np.cos(theta) * u1 + np.sin(theta) * u2)
    return mu1, mu2


def sample_csbm_graph(cfg):
    """Bernoulli(p) edges inside blocks and Bernoulli(q) across, unit weights."""
    rng, _ = _streams(cfg)
    n = cfg.n
    iu, ju = np.triu_indices(n, k=1)
    blk = cfg.blocks
    prob = np.where(blk[iu] == blk[ju], cfg.p, cfg.q)
    keep = rng.random(iu.size) < prob
    return build_graph(n, zip(iu[keep], ju[keep]), labels=blk)


def sample_features(cfg, t):
    """Feature matrix at time ``t``.

    The noise draw depends only on ``cfg.seed``; only the means move with
    ``t``, so the feature trajectory is smooth in ``t``.
    """
    _, rng = _streams(cfg)
    Z = rng.standard_normal((cfg.n, cfg.d))
    mu1, mu2 = feature_means(cfg, t)
    means = np.where((cfg.blocks == 0)[:, None], mu1, mu2)
    return means + cfg.sigma * Z


def similarity_correction(g, X, mode="signed"):
    """Multiply every edge weight by the cosine similarity of its endpoints.

    ``mode`` is ``"signed"`` (keep negative similarities), ``"absolute"``
    or ``"clamped"`` (negative similarities become 0). The edge set is
    unchanged; zero weights stay as explicit edges.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[0] != g.n:
        raise ValueError(f"features have {X.shape[0]} rows, graph has {g.n} vertices")
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms <= 1e-12):
        raise ZeroFeatureVector(f"vertex {int(np.argmin(norms))} has a zero feature vector")
    cos = np.einsum("ij,ij->i", X[g.rows], X[g.cols]) / (norms[g.rows] * norms[g.cols])
    cos = np.clip(cos, -1.0, 1.0)
    if mode == "signed":
        pass
    elif mode == "absolute":
        cos = np.abs(cos)
    elif mode == "clamped":
        cos = np.maximum(cos, 0.0)
    else:
        raise ValueError(f"unknown similarity mode {mode!r}")
    return g.with_weights(g.weights * cos, signed_ok=g.signed_ok or mode == "signed")


def cos_d(mu_a, mu_b, d):
    """Large-``d`` surrogate for the expected cosine of two noisy vectors:
    ``mu_a . mu_b / (sqrt(|mu_a|^2 + d) sqrt(|mu_b|^2 + d))``."""
    mu_a = np.asarray(mu_a, dtype=float)
    mu_b = np.asarray(mu_b, dtype=float)
    return float(mu_a @ mu_b / (np.sqrt(mu_a @ mu_a + d) * np.sqrt(mu_b @ mu_b + d)))


def block_kappas(cfg, t):
    mu1, mu2 = feature_means(cfg, t)
    return cos_d(mu1, mu1, cfg.d), cos_d(mu1, mu2, cfg.d), cos_d(mu2, mu2, cfg.d)


def expected_adjacency(cfg, t):
    """Block approximation of the expected similarity-corrected adjacency."""
    k11, k12, k22 = block_kappas(cfg, t)
    blk = cfg.blocks
    same = blk[:, None] == blk[None, :]
    E = np.where(same, np.where(blk[:, None] == 0, cfg.p * k11, cfg.p * k22), cfg.q * k12)
    np.fill_diagonal(E, 0.0)
    return E


def _pair_cosines(ma, mb, sigma, d, n_samples, rng):
    """Cosines of ``n_samples`` independent pairs ``(ma + sigma za, mb + sigma zb)``.

    Both means lie in the fixed rotation plane, so the noise is split into
    its two in-plane coordinates and an exactly sampled orthogonal part:
    for independent standard normals ``a, b`` in ``R^m``, ``a . b = |a| g``
    and ``|b|^2 = g^2 + chi2(m - 1)`` with ``g`` standard normal. The cost
    is independent of ``d`` and the in-plane draws do not depend on ``d``.
    """
    u1, u2 = _rotation_plane(d)
    P = np.stack([u1, u2], axis=1)
    ma2, mb2 = ma @ P, mb @ P
    za, zb = rng.standard_normal((2, n_samples, 2))
    g = rng.standard_normal(n_samples)
    m = d - 2
    if m >= 2:
        aa = rng.chisquare(m, n_samples)
        bb = g ** 2 + rng.chisquare(m - 1, n_samples)
    else:
        aa = bb = np.zeros(n_samples)
        g = np.zeros(n_samples)
        if m == 1:
            a1, b1 = rng.standard_normal((2, n_samples))
            aa, bb, g = a1 ** 2, b1 ** 2, np.sign(a1) * b1
    xa, xb = ma2 + sigma * za, mb2 + sigma * zb
    dot = np.einsum("ij,ij->i", xa, xb) + sigma ** 2 * np.sqrt(aa) * g
    na = np.sqrt(np.einsum("ij,ij->i", xa, xa) + sigma ** 2 * aa)
    nb = np.sqrt(np.einsum("ij,ij->i", xb, xb) + sigma ** 2 * bb)
    return dot / (na * nb)


def monte_carlo_block_means(cfg, t, n_samples=10_000, rng=None):
    """Monte-Carlo block means of the corrected adjacency.

    Every sample draws a fresh vertex pair: two feature vectors from the
    block distributions and an independent Bernoulli edge indicator. The
    draws depend on ``d`` only through the orthogonal noise part, so runs
    sharing a seed but differing in ``d`` use common random numbers.
    Returns ``(m11, m12, m22)``.
    """
    if cfg.d < 2:
        raise ValueError("Monte-Carlo block means need d >= 2")
    rng = np.random.default_rng(rng)
    mu1, mu2 = feature_means(cfg, t)
    out = []
    for ma, mb, prob in ((mu1, mu1, cfg.p), (mu1, mu2, cfg.q), (mu2, mu2, cfg.p)):
        stream = np.random.default_rng(rng.integers(2**63))
        edge = stream.random(n_samples) < prob
        cos = _pair_cosines(ma, mb, cfg.sigma, cfg.d, n_samples, stream)
        out.append(float(np.mean(edge * cos)))
    return tuple(out)


class CsbmTrajectory:
    """Fixed CSBM topology whose weights follow the feature trajectory.

    Calling the trajectory with ``t`` returns the shift operator of the
    similarity-corrected graph at ``t``.
    """

    def __init__(self, cfg, mode="signed", kind="laplacian"):
        self.cfg = cfg
        self.mode = mode
        self.kind = kind
        self.base_graph = sample_csbm_graph(cfg)
        _, rng = _streams(cfg)
        self._noise = rng.standard_normal((cfg.n, cfg.d))
        self._rows, self._cols = self.base_graph.rows, self.base_graph.cols

    def features(self, t):
        mu1, mu2 = feature_means(self.cfg, t)
        means = np.where((self.cfg.blocks == 0)[:, None], mu1, mu2)
        return means + self.cfg.sigma * self._noise

    def graph(self, t):
        return similarity_correction(self.base_graph, self.features(t), self.mode)

    def __call__(self, t):
        return shift_operator(self.graph(t), self.kind)

    def weight_quantiles(self, t, qs=(0.25, 0.5, 0.75)):
        return np.quantile(self.graph(t).weights, qs)
