"""Orthogonal projectors, principal angles and CS-decomposition block sizes."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dense_core import (
    LinAlgError,
    OrthonormalBasis,
    RankError,
    as_matrix,
    complement_basis,
    orthonormalize,
    pseudoinverse,
    svd,
)
from .schatten import INF, SchattenIndex, schatten_norm, schatten_norm_of_singular_values

#: Default cosine tolerance for classifying intersections in :func:`cs_block_dims`.
ANGLE_TOL = 1e-8


def _basis_matrix(z):
    return z.matrix if isinstance(z, OrthonormalBasis) else OrthonormalBasis(z).matrix


@dataclass(frozen=True, eq=False)
class Projector:
    """Orthogonal projector stored through its basis.

    Either ``P = Z Z^T`` for orthonormal ``Z`` (``pinv is None``) or
    ``P = Zh Zh^+`` for a full-column-rank ``Zh``.
    """

    basis: np.ndarray
    rank: int
    pinv: np.ndarray | None = None

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    def matrix(self):
        if self.pinv is None:
            return self.basis @ self.basis.T
        return self.basis @ self.pinv

    def complement_matrix(self):
        """``I - P``."""
        return np.eye(self.ambient_dim) - self.matrix()

    def orthonormal_basis(self):
        if self.pinv is None:
            return OrthonormalBasis(self.basis)
        return orthonormalize(self.basis)

    def apply_complement(self, a):
        """``(I - P) a`` without forming ``I - P``."""
        a = as_matrix(a)
        if self.pinv is None:
            return a - self.basis @ (self.basis.T @ a)
        return a - self.basis @ (self.pinv @ a)


def zero_projector(m):
    """The rank-0 projector on ``R^m``."""
    return Projector(np.zeros((m, 0)), 0)


def projector_from_orthonormal(z):
    z = _basis_matrix(z)
    return Projector(z, z.shape[1])


def projector_from_full_rank(z_hat, rank_tol=None):
    """``P = Zh Zh^+`` for a full-column-rank ``Zh``.

    Raises
    ------
    RankError
        If ``Zh`` is rank deficient; the rank-preservation hypothesis of the
        basis-perturbation bound fails in that case.
    """
    z_hat = as_matrix(z_hat, "z_hat")
    m, k = z_hat.shape
    rank = svd(z_hat).rank(rank_tol)
    if rank < k:
        raise RankError(f"z_hat has rank {rank} < {k} columns (rank(Zh) = rank(Z) fails)", rank)
    return Projector(z_hat, k, pseudoinverse(z_hat, rank_tol))


@dataclass(frozen=True, eq=False)
class PrincipalAngles:
    """Cosines (non-ascending) and sines (non-descending) of the principal angles."""

    cosines: np.ndarray
    sines: np.ndarray
    clamp: float = 0.0

    @property
    def angles(self):
        return np.arctan2(self.sines, self.cosines)

    def __len__(self):
        return self.cosines.size


def principal_angles(z, z_hat):
    """Principal angles between ``range(z)`` (k-dim) and ``range(z_hat)`` (l-dim), l >= k.

    Cosines are the singular values of ``Z^T Zh`` clamped to [0, 1].  For
    angles below pi/4 the sine is taken from the singular values of
    ``(I - Zh Zh^T) Z``, which keeps full relative accuracy for tiny angles.
    """
    zm = _basis_matrix(z)
    zh = _basis_matrix(z_hat)
    if zm.shape[0] != zh.shape[0]:
        raise LinAlgError(f"ambient dimensions differ: {zm.shape[0]} vs {zh.shape[0]}")
    k, l = zm.shape[1], zh.shape[1]
    if l < k:
        raise LinAlgError(f"z_hat must not have fewer columns than z ({l} < {k}); swap arguments")
    raw = svd(zm.T @ zh).singular_values[:k]
    clamp = float(max(0.0, raw.max(initial=0.0) - 1.0))
    cos = np.clip(raw, 0.0, 1.0)
    sin = np.sqrt(np.maximum(0.0, (1.0 - cos) * (1.0 + cos)))
    small = cos > np.sqrt(0.5)
    if np.any(small):
        residual = zm - zh @ (zh.T @ zm)
        # ascending, so entry j pairs with the j-th largest cosine
        direct = np.sort(svd(residual).singular_values[:k])
        sin[small] = np.minimum(direct[small], 1.0)
    cos.setflags(write=False)
    sin.setflags(write=False)
    return PrincipalAngles(cos, sin, clamp)


def _ordered(z, z_hat):
    a, b = _basis_matrix(z), _basis_matrix(z_hat)
    return (a, b) if a.shape[1] <= b.shape[1] else (b, a)


def sin_theta_norm(z, z_hat, p):
    """``||sin Theta(Z, Zh)||_p`` from the principal-angle sines."""
    a, b = _ordered(z, z_hat)
    return schatten_norm_of_singular_values(principal_angles(a, b).sines, p)


def cos_theta_norm(z, z_hat, p):
    a, b = _ordered(z, z_hat)
    return schatten_norm_of_singular_values(principal_angles(a, b).cosines, p)


def projector_distance(p1, p2):
    """``||P1 - P2||_2`` for equal-rank projectors.

    Raises
    ------
    LinAlgError
        For unequal ranks, where the distance is no longer ``||sin Theta||_2``
        (use :func:`sin_theta_norm` instead).
    """
    if p1.rank != p2.rank:
        raise LinAlgError(
            f"projector ranks differ ({p1.rank} vs {p2.rank}); use sin_theta_norm for unequal ranks"
        )
    return schatten_norm(p1.matrix() - p2.matrix(), INF)


@dataclass(frozen=True)
class CsBlockDims:
    """Block sizes of the CS decomposition of ``[Z Z_perp]^T [Zh Zh_perp]``."""

    r: int
    s: int
    k_minus: int
    l_minus: int
    m_rem: int
    k: int = field(default=0, repr=False)
    l: int = field(default=0, repr=False)
    m: int = field(default=0, repr=False)

    def check(self):
        fields_ = (self.r, self.s, self.k_minus, self.l_minus, self.m_rem)
        ok = (
            all(x >= 0 for x in fields_)
            and self.r + self.s + self.k_minus == self.k
            and self.r + self.s + self.l_minus == self.l
            and self.r + 2 * self.s + self.k_minus + self.m_rem + self.l_minus == self.m
        )
        if not ok:
            raise ArithmeticError(f"inconsistent CS block dimensions {self}")
        return self


def _check_cs_window(k, l, m):
    if not k < l:
        raise LinAlgError(f"CS block structure needs k < l, got k={k}, l={l}")
    if not l < m - k:
        raise LinAlgError(f"CS block structure needs l < m - k, got l={l}, m-k={m - k}")


def cs_block_dims(z, z_hat, angle_tol=ANGLE_TOL):
    """Intersection dimensions from the principal angles (requires k < l < m - k)."""
    zm, zh = _basis_matrix(z), _basis_matrix(z_hat)
    m, k = zm.shape
    l = zh.shape[1]
    _check_cs_window(k, l, m)
    cos = principal_angles(zm, zh).cosines
    r = int(np.count_nonzero(cos >= 1.0 - angle_tol))
    k_minus = int(np.count_nonzero(cos <= angle_tol))
    s = k - r - k_minus
    dims = CsBlockDims(r, s, k_minus, l - (r + s), m - (k + l) + r, k, l, m)
    return dims.check()


def verify_cs_identities(z, z_hat, p=None, tolerance=1e-10):
    """Evaluate the three norm identities implied by the CS decomposition.

    Checked in the two-norm and the Frobenius norm (plus ``p`` when given):

    * ``||sin Theta(Z, Zh)|| = ||Z^T Zh_perp||``
    * ``||cos Theta(Z, Zh)|| = ||Z^T Zh||``
    * ``||cos Theta(Z_perp, Zh_perp)|| = ||Z_perp^T Zh_perp||
      = ||diag(I_{m-(k+l)}, cos Theta(Z, Zh))||``

    Returns a :class:`BoundReport` whose ``lhs`` is the largest absolute
    discrepancy and whose ``rhs`` is zero.
    """
    from .reports import BoundReport

    zm, zh = _basis_matrix(z), _basis_matrix(z_hat)
    m, k = zm.shape
    l = zh.shape[1]
    _check_cs_window(k, l, m)
    z_perp = complement_basis(OrthonormalBasis(zm)).matrix
    zh_perp = complement_basis(OrthonormalBasis(zh)).matrix
    angles = principal_angles(zm, zh)
    comp_angles = principal_angles(zh_perp, z_perp)
    padded = np.concatenate([np.ones(m - (k + l)), angles.cosines])

    indices = [INF, SchattenIndex(2)]
    if p is not None and SchattenIndex.parse(p) not in indices:
        indices.append(SchattenIndex.parse(p))
    parts = {}
    worst = 0.0
    for q in indices:
        pairs = {
            "sin": (
                schatten_norm_of_singular_values(angles.sines, q),
                schatten_norm(zm.T @ zh_perp, q),
            ),
            "cos": (
                schatten_norm_of_singular_values(angles.cosines, q),
                schatten_norm(zm.T @ zh, q),
            ),
            "cos_perp": (
                schatten_norm_of_singular_values(comp_angles.cosines, q),
                schatten_norm(z_perp.T @ zh_perp, q),
                schatten_norm_of_singular_values(padded, q),
            ),
        }
        for name, values in pairs.items():
            gap = max(values) - min(values)
            worst = max(worst, gap)
            parts[f"{name}_p{q}"] = [float(v) for v in values]
    dims = cs_block_dims(zm, zh)
    return BoundReport.one_sided(
        "cs_identities",
        lhs=worst,
        rhs=0.0,
        tolerance=tolerance,
        m=m,
        k=k,
        context={"l": l, "r": dims.r, "s": dims.s, "values": parts},
    )
