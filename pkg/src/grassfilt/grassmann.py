"""Grassmann manifold primitives on Stiefel representatives.

Points of Gr(n, k) are stored as column-orthonormal ``n x k`` arrays; two
arrays that differ by a right ``k x k`` orthogonal factor represent the same
subspace. Tangent vectors are horizontal lifts: ``n x k`` arrays ``D`` with
``base.T @ D == 0``.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import ORTHO_TOL, check_same_shape, check_stiefel
from .exceptions import BaseMismatch, CutLocus, RankDeficientTangent
from .spectral import thin_svd

CUT_LOCUS_TOL = 1e-10
RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Horizontal tangent vector ``delta`` anchored at ``base``."""

    delta: np.ndarray
    base: np.ndarray

    @property
    def norm(self):
        return float(np.linalg.norm(self.delta))

    def __add__(self, other):
        _check_base(other, self.base)
        return TangentVector(self.delta + other.delta, self.base)

    def __mul__(self, c):
        return TangentVector(c * self.delta, self.base)

    __rmul__ = __mul__


def _check_base(tangent, base):
    if tangent.base is base:
        return
    if tangent.base.shape != base.shape or not np.array_equal(tangent.base, base):
        raise BaseMismatch("tangent vector is anchored at a different base point")


def project_tangent(base, X):
    """Orthogonal projection of ``X`` onto the horizontal space at ``base``."""
    return X - base @ (base.T @ X)


def random_stiefel(n, k, rng=None):
    """Haar-distributed ``n x k`` orthonormal matrix."""
    rng = np.random.default_rng(rng)
    Q, R = np.linalg.qr(rng.standard_normal((n, k)))
    return Q * np.sign(np.diag(R))


def random_orthogonal(k, rng=None):
    return random_stiefel(k, k, rng)


def grassmann_log(base, target):
    """Procrustes logarithm of ``target`` at ``base``.

    The target representative is first rotated onto its Procrustes alignment
    with ``base``; the result therefore depends only on the subspace spanned
    by ``target`` and satisfies ``grassmann_exp(base, log) == aligned(target)``.

    Raises
    ------
    CutLocus
        If ``base.T @ target`` has a singular value below ``1e-10``.
    """
    base = check_stiefel(base, "base")
    target = check_stiefel(target, "target")
    check_same_shape(base, target, ("base", "target"))
    O, s, W2t = np.linalg.svd(target.T @ base)
    if s.min() < CUT_LOCUS_TOL:
        raise CutLocus(f"sigma_min(base^T target) = {s.min():.2e}; logarithm undefined")
    aligned = target @ O @ W2t
    U, xi, W = thin_svd(aligned - base @ (base.T @ aligned))
    delta = (U * np.arcsin(np.clip(xi, -1.0, 1.0))) @ W.T
    return TangentVector(delta, base)


def _grassmann_log_inverse(base, target):
    """Plain logarithm via ``(base^T target)^-1``; kept for cross-checks."""
    L = target @ np.linalg.inv(base.T @ target) - base
    U, xi, W = thin_svd(L)
    return (U * np.arctan(xi)) @ W.T


def procrustes_align(base, target):
    """Representative of ``span(target)`` closest to ``base`` in Frobenius norm."""
    O, _, W2t = np.linalg.svd(target.T @ base)
    return target @ O @ W2t


def grassmann_exp(base, tangent):
    """Exponential map: the endpoint of the geodesic from ``base`` with
    initial velocity ``tangent``.

    ``tangent`` is a :class:`TangentVector` anchored at ``base`` or a raw
    horizontal ``n x k`` array. The trailing ``W^T`` factor is kept so that
    ``grassmann_exp(base, grassmann_log(base, V))`` returns the aligned
    representative of ``V`` itself, not merely a basis of its span.
    """
    base = np.asarray(base, dtype=float)
    if isinstance(tangent, TangentVector):
        _check_base(tangent, base)
        delta = tangent.delta
    else:
        delta = np.asarray(tangent, dtype=float)
    check_same_shape(base, delta, ("base", "tangent"))
    U, xi, W = thin_svd(delta)
    return ((base @ W) * np.cos(xi) + U * np.sin(xi)) @ W.T


def principal_angles(a, b):
    """Principal angles between ``span(a)`` and ``span(b)``, ascending.

    Small angles are taken from the sines and large ones from the cosines,
    which keeps both ends accurate to rounding.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    check_same_shape(a, b, ("a", "b"))
    ab = a.T @ b
    cos = np.linalg.svd(ab, compute_uv=False)  # descending
    sin = np.linalg.svd(b - a @ ab, compute_uv=False)[::-1]  # ascending
    from_cos = np.arccos(np.clip(cos, -1.0, 1.0))
    from_sin = np.arcsin(np.clip(sin, -1.0, 1.0))
    return np.where(cos ** 2 >= 0.5, from_sin, from_cos)


def geodesic_distance(a, b):
    """Arc-length distance ``||theta||_2`` over the principal angles."""
    return float(np.linalg.norm(principal_angles(a, b)))


def projector_distance(a, b):
    """``||a a^T - b b^T||_F`` without forming ``n x n`` projectors.

    Uses ``||P_a - P_b||_F^2 = 2 ||(I - P_a) b||_F^2``, which equals
    ``2k - 2 ||a^T b||_F^2`` but does not cancel for nearby subspaces.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    check_same_shape(a, b, ("a", "b"))
    return float(np.sqrt(2.0) * np.linalg.norm(b - a @ (a.T @ b)))


def exp_sensitivity_probe(base, tangent, trials=50, eps=1e-6, rng=None):
    """Empirical local Lipschitz ratio of the exponential map at ``tangent``.

    Draws ``trials`` random horizontal perturbations ``E`` with
    ``||E||_F = eps`` and returns the largest observed
    ``||Exp(D) - Exp(D + E)||_F / ||E||_F`` next to the reference scale
    ``8 / sigma_k(D) + 2``.
    """
    base = np.asarray(base, dtype=float)
    delta = tangent.delta if isinstance(tangent, TangentVector) else np.asarray(tangent, float)
    if isinstance(tangent, TangentVector):
        _check_base(tangent, base)
    sigma_k = float(np.linalg.svd(delta, compute_uv=False).min())
    if sigma_k < RANK_TOL:
        raise RankDeficientTangent(f"sigma_k(delta) = {sigma_k:.2e}")
    rng = np.random.default_rng(rng)
    V0 = grassmann_exp(base, delta)
    ratios = []
    for _ in range(int(trials)):
        E = project_tangent(base, rng.standard_normal(delta.shape))
        E *= eps / np.linalg.norm(E)
        ratios.append(np.linalg.norm(V0 - grassmann_exp(base, delta + E)) / eps)
    return {"max_ratio": float(max(ratios)), "bound_factor": 8.0 / sigma_k + 2.0,
            "sigma_k": sigma_k}


def is_horizontal(base, delta, tol=ORTHO_TOL):
    return float(np.linalg.norm(base.T @ delta)) <= tol
