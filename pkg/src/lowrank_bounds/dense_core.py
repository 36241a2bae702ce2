"""Dense real linear algebra kernels.

Everything downstream goes through :func:`svd`, a one-sided Jacobi SVD that is
deterministic and accurate at desk scale.  Matrices are plain ``float64``
numpy arrays; the small frozen dataclasses below carry factorizations and
orthonormal bases.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._jacobi import one_sided_jacobi

EPS = np.finfo(np.float64).eps

#: Sweep budget for the Jacobi iteration.
MAX_SWEEPS = 60
#: Column-pair cosine below which two columns count as orthogonal.
JACOBI_TOL = 1e-14


class LinAlgError(ValueError):
    """Raised when an input violates a kernel precondition."""


class SvdConvergenceError(RuntimeError):
    """The Jacobi sweeps did not converge within the sweep budget."""

    def __init__(self, residual, sweeps):
        super().__init__(
            f"one-sided Jacobi did not converge in {sweeps} sweeps "
            f"(largest column cosine {residual:.3e})"
        )
        self.residual = residual
        self.sweeps = sweeps

    def __reduce__(self):
        return type(self), (self.residual, self.sweeps)


class RankError(LinAlgError):
    """Numerical rank is smaller than required."""

    def __init__(self, message, rank):
        super().__init__(message)
        self.rank = rank

    def __reduce__(self):
        return type(self), (self.args[0], self.rank)


def as_matrix(a, name="a"):
    """Return ``a`` as a 2-D float64 array, rejecting NaN/Inf and empty shapes."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise LinAlgError(f"{name} must be a matrix, got {arr.ndim}-d input")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise LinAlgError(f"{name} must have positive dimensions, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise LinAlgError(f"{name} has non-finite entries")
    return arr


def _frozen(arr):
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SvdFactors:
    """Full SVD ``A = U diag(s) V^T`` with square orthogonal ``U`` and ``V``."""

    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray

    @property
    def shape(self):
        return self.u.shape[0], self.v.shape[0]

    @property
    def sigma_max(self):
        return float(self.singular_values[0]) if self.singular_values.size else 0.0

    def default_rank_tol(self):
        return max(self.shape) * EPS * self.sigma_max

    def rank(self, rank_tol=None):
        tol = self.default_rank_tol() if rank_tol is None else rank_tol
        return int(np.count_nonzero(self.singular_values > tol))

    def reconstruct(self):
        r = self.singular_values.size
        return (self.u[:, :r] * self.singular_values) @ self.v[:, :r].T


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """An ``m x k`` matrix with orthonormal columns."""

    matrix: np.ndarray

    def __post_init__(self):
        z = as_matrix(self.matrix, "basis")
        m, k = z.shape
        if k > m:
            raise LinAlgError(f"basis has more columns ({k}) than rows ({m})")
        err = np.max(np.abs(z.T @ z - np.eye(k)))
        if err > 1e-12:
            raise LinAlgError(f"columns are not orthonormal (max |Z^T Z - I| = {err:.2e})")
        object.__setattr__(self, "matrix", _frozen(z))

    @property
    def ambient_dim(self):
        return self.matrix.shape[0]

    @property
    def dim(self):
        return self.matrix.shape[1]


@dataclass(frozen=True, eq=False)
class RankKApprox:
    """Best rank-k approximation ``A_k = U_k S_k V_k^T`` together with ``U_k``."""

    k: int
    a_k: np.ndarray
    basis: OrthonormalBasis
    sigmas: np.ndarray
    right: np.ndarray

    def pinv(self):
        """``A_k^+ = V_k S_k^{-1} U_k^T``."""
        return (self.right / self.sigmas) @ self.basis.matrix.T


def _complete_columns(q, m):
    """Extend orthonormal columns ``q`` (m x r) to an m x m orthogonal matrix.

    The extra columns are the trailing Householder vectors of a complete QR of
    ``q``, which are orthogonal to ``range(q)`` to working precision.
    """
    r = q.shape[1]
    if r == m:
        return q
    if r == 0:
        return np.eye(m)
    full, _ = np.linalg.qr(q, mode="complete")
    return np.column_stack([q, full[:, r:]])


def _reorthogonalize(q):
    """Gram-Schmidt twice over the columns, dropping those that lose direction."""
    cols = []
    for j in range(q.shape[1]):
        x = q[:, j].copy()
        for _ in range(2):
            for c in cols:
                x -= (c @ x) * c
        nx = np.linalg.norm(x)
        if nx < 0.5:
            # noise-level columns trail the spectrum; the rest is completed
            break
        cols.append(x / nx)
    return np.array(cols).T if cols else np.zeros((q.shape[0], 0))


def _svd_tall(a):
    m, n = a.shape
    w = np.array(a, dtype=np.float64, order="F", copy=True)
    v = np.asfortranarray(np.eye(n))
    tol = max(JACOBI_TOL, m * EPS)
    # columns this small are below any rank tolerance; rotating them only churns noise
    floor = (m * EPS * np.linalg.norm(w)) ** 2
    sweeps, off = one_sided_jacobi(w, v, tol, MAX_SWEEPS, floor)
    if sweeps < 0:
        raise SvdConvergenceError(off, MAX_SWEEPS)
    sigmas = np.sqrt(np.sum(w * w, axis=0))
    order = np.argsort(-sigmas, kind="stable")
    sigmas = sigmas[order]
    w = w[:, order]
    v = v[:, order]

    nz = int(np.count_nonzero(sigmas))
    q = w[:, :nz] / sigmas[:nz]
    if nz and np.max(np.abs(q.T @ q - np.eye(nz))) > 1e-13:
        q = _reorthogonalize(q)
    u = _complete_columns(q, m)
    return u, sigmas, v, q.shape[1]


def svd(a):
    """Full SVD of a real matrix by one-sided Jacobi rotations.

    The singular values come out non-ascending (stable order on ties) and each
    left singular vector has a non-negative first nonzero component.

    Raises
    ------
    SvdConvergenceError
        If the sweep budget is exhausted; carries the residual cosine.
    """
    a = as_matrix(a)
    m, n = a.shape
    if m >= n:
        u, s, v, nz = _svd_tall(a)
    else:
        v, s, u, nz = _svd_tall(a.T)
    mags = np.abs(u)
    first = np.argmax(mags > 8 * EPS * mags.max(axis=0), axis=0)
    flip = u[first, np.arange(u.shape[1])] < 0
    u[:, flip] *= -1.0
    v[:, :nz][:, flip[:nz]] *= -1.0
    return SvdFactors(_frozen(u), _frozen(s), _frozen(v))


def singular_values(a):
    return svd(a).singular_values


def truncate(f, k, rank_tol=None):
    """Best rank-``k`` approximation from SVD factors.

    Raises
    ------
    RankError
        If ``k`` exceeds the numerical rank.
    """
    if k < 1:
        raise LinAlgError(f"k must be positive, got {k}")
    rank = f.rank(rank_tol)
    if k > rank:
        raise RankError(f"k={k} exceeds the numerical rank {rank}", rank)
    uk = f.u[:, :k]
    sk = f.singular_values[:k]
    vk = f.v[:, :k]
    a_k = (uk * sk) @ vk.T
    return RankKApprox(k, _frozen(a_k), OrthonormalBasis(uk), _frozen(sk), _frozen(vk))


def best_rank_k(a, k, rank_tol=None):
    return truncate(svd(a), k, rank_tol)


def pseudoinverse(a, rank_tol=None):
    """Moore-Penrose inverse; singular values ``<= rank_tol`` count as zero.

    The default tolerance is ``max(m, n) * eps * sigma_1``.
    """
    f = svd(a)
    tol = f.default_rank_tol() if rank_tol is None else rank_tol
    if tol < 0:
        raise LinAlgError("rank_tol must be non-negative")
    r = f.rank(tol)
    m, n = f.shape
    if r == 0:
        return np.zeros((n, m))
    return (f.v[:, :r] / f.singular_values[:r]) @ f.u[:, :r].T


def orthonormalize(a, rank_tol=None):
    """Orthonormal basis for ``range(a)``, column order preserved.

    The input must have full column rank; the QR factor is sign-fixed so that
    ``R`` has a positive diagonal, which makes orthonormal input come back
    unchanged.

    Raises
    ------
    RankError
        For rank-deficient input, reporting the detected rank.
    """
    a = as_matrix(a)
    m, k = a.shape
    f = svd(a)
    r = f.rank(rank_tol)
    if r < k or k > m:
        raise RankError(f"input has rank {r} but {k} columns", r)
    q, rr = np.linalg.qr(a)
    signs = np.sign(np.diag(rr))
    signs[signs == 0] = 1.0
    return OrthonormalBasis(q * signs)


def complement_basis(z):
    """Orthonormal basis ``Z_perp`` such that ``[Z, Z_perp]`` is orthogonal."""
    zm = z.matrix if isinstance(z, OrthonormalBasis) else as_matrix(z)
    m, k = zm.shape
    if k >= m:
        raise LinAlgError(f"basis spans all of R^{m}; complement is empty")
    comp = svd(zm).u[:, k:]
    # one projection pass removes the O(eps) leakage from the SVD route
    comp = comp - zm @ (zm.T @ comp)
    comp, _ = np.linalg.qr(comp)
    return OrthonormalBasis(comp)


def write_csv(a, path=None):
    """Write a matrix as CSV using shortest round-trip float repr.

    Returns the text when ``path`` is None.
    """
    a = as_matrix(a)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in a:
        writer.writerow([repr(float(x)) for x in row])
    text = buf.getvalue()
    if path is None:
        return text
    Path(path).write_text(text)
    return text


def read_csv(source):
    """Read a matrix written by :func:`write_csv` (path, text or open file)."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).exists()):
        text = Path(source).read_text()
    else:
        text = source
    rows = [[float(x) for x in row] for row in csv.reader(io.StringIO(text)) if row]
    return as_matrix(np.array(rows))
