"""Seeded generators for test matrices, bases and perturbations.

Random numbers come from numpy's Philox-4x64 counter-based bit generator.
Each call derives its own stream from ``(seed, tag)`` through
:class:`numpy.random.SeedSequence`; uniforms are the top 53 bits of the raw
64-bit words and normals use the Box-Muller transform, so the output depends
only on the bit stream and not on numpy's sampling routines.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .dense_core import (
    EPS,
    LinAlgError,
    OrthonormalBasis,
    as_matrix,
    svd,
)
from .schatten import INF, schatten_norm

_MASK64 = (1 << 64) - 1


def derive_seed(*parts):
    """Stable 64-bit seed from arbitrary printable parts."""
    text = "\x1f".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


class Stream:
    """Deterministic uniform/normal source for one ``(seed, tag)`` pair."""

    def __init__(self, seed, tag=""):
        seq = np.random.SeedSequence([int(seed) & _MASK64, derive_seed("tag", tag)])
        self._bits = np.random.Philox(seq)

    def uniform(self, size):
        """Doubles on [0, 1) with 53 random bits each."""
        n = int(np.prod(size))
        raw = self._bits.random_raw(n)
        return ((raw >> np.uint64(11)).astype(np.float64) * 2.0**-53).reshape(size)

    def normal(self, size):
        n = int(np.prod(size))
        half = (n + 1) // 2
        u = self.uniform(2 * half)
        radius = np.sqrt(-2.0 * np.log1p(-u[0::2]))
        phase = 2.0 * math.pi * u[1::2]
        z = np.empty(2 * half)
        z[0::2] = radius * np.cos(phase)
        z[1::2] = radius * np.sin(phase)
        return z[:n].reshape(size)


def _haar(stream, m, k):
    g = stream.normal((m, k))
    q, r = np.linalg.qr(g)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def haar_basis(m, k, seed):
    """Haar-distributed ``m x k`` orthonormal basis (QR of a Gaussian, sign-fixed)."""
    if not 1 <= k <= m:
        raise ValueError(f"need 1 <= k <= m, got k={k}, m={m}")
    return OrthonormalBasis(_haar(Stream(seed, "haar"), m, k))


@dataclass(frozen=True)
class SpectrumSpec:
    """Target dimensions and singular values; ``gap_k`` records a required gap."""

    m: int
    n: int
    sigmas: tuple
    seed: int = 0
    gap_k: int | None = None

    def __post_init__(self):
        s = tuple(float(x) for x in self.sigmas)
        object.__setattr__(self, "sigmas", s)
        if self.m < 1 or self.n < 1:
            raise ValueError("dimensions must be positive")
        if len(s) != min(self.m, self.n):
            raise ValueError(f"need {min(self.m, self.n)} singular values, got {len(s)}")
        if any(x < 0 for x in s):
            raise ValueError("singular values must be non-negative")
        if any(a < b for a, b in zip(s, s[1:])):
            raise ValueError("singular values must be non-ascending")
        if self.gap_k is not None:
            k = self.gap_k
            if not 1 <= k < len(s) or not s[k - 1] > s[k]:
                raise ValueError(f"no strict gap after singular value {k}")


def matrix_with_spectrum(spec):
    """``A = U diag(sigmas) V^T`` with Haar-random orthogonal ``U`` and ``V``."""
    stream = Stream(spec.seed, "spectrum")
    u = _haar(stream, spec.m, spec.m)
    v = _haar(stream, spec.n, spec.n)
    r = len(spec.sigmas)
    return (u[:, :r] * np.asarray(spec.sigmas)) @ v[:, :r].T


def _scaled_gaussian(stream, shape, magnitude):
    if magnitude < 0:
        raise ValueError("magnitude must be non-negative")
    if magnitude == 0:
        return np.zeros(shape)
    g = stream.normal(shape)
    return g * (magnitude / svd(g).singular_values[0])


@dataclass(frozen=True, eq=False)
class BasisPerturbation:
    """``Zh = Z + F`` with the measure ``eps_Z = ||Zh^+||_2 ||Z - Zh||_2``."""

    z_hat: np.ndarray
    f: np.ndarray
    f_norm: float
    rank: int
    eps_z: float

    @property
    def rank_preserved(self):
        return self.rank == self.z_hat.shape[1]


def basis_perturbation_measure(z, z_hat, rank_tol=None):
    """Return ``(rank(Zh), eps_Z)``; ``eps_Z`` is inf when ``Zh`` is rank deficient."""
    z = as_matrix(z)
    z_hat = as_matrix(z_hat)
    f = svd(z_hat)
    rank = f.rank(rank_tol)
    diff = schatten_norm(z - z_hat, INF)
    if rank < z_hat.shape[1]:
        return rank, math.inf
    return rank, diff / float(f.singular_values[z_hat.shape[1] - 1]) if diff > 0 else 0.0


def perturb_basis(z, magnitude, seed):
    """Add a Gaussian ``F`` rescaled to ``||F||_2 = magnitude`` to the basis ``Z``.

    The result flags rank loss rather than raising; ``||F||_2 <= 1/2`` always
    preserves the rank.
    """
    zm = z.matrix if isinstance(z, OrthonormalBasis) else as_matrix(z)
    f = _scaled_gaussian(Stream(seed, "basis"), zm.shape, float(magnitude))
    z_hat = zm + f
    rank, eps_z = basis_perturbation_measure(zm, z_hat)
    return BasisPerturbation(z_hat, f, float(magnitude), rank, eps_z)


@dataclass(frozen=True, eq=False)
class MatrixPerturbation:
    """``A + E`` together with ``E``."""

    perturbed: np.ndarray
    e: np.ndarray

    @property
    def two_norm(self):
        return schatten_norm(self.e, INF)

    @property
    def fro_norm(self):
        return float(np.linalg.norm(self.e))


def perturb_matrix(a, magnitude, seed):
    """``A + E`` with Gaussian ``E`` rescaled to ``||E||_2 = magnitude``."""
    a = as_matrix(a)
    e = _scaled_gaussian(Stream(seed, "matrix"), a.shape, float(magnitude))
    return MatrixPerturbation(a + e, e)


def column_probabilities(a):
    """Sampling probabilities ``||a_j||^2 / ||A||_F^2``."""
    a = as_matrix(a)
    norms = np.sum(a * a, axis=0)
    total = norms.sum()
    if total == 0:
        raise LinAlgError("cannot sample columns of the zero matrix")
    return norms / total


def sample_column_indices(a, c, seed):
    """``c`` column indices drawn i.i.d. with replacement from :func:`column_probabilities`."""
    if c < 1:
        raise ValueError(f"column count must be positive, got {c}")
    probs = column_probabilities(a)
    cdf = np.cumsum(probs)
    u = Stream(seed, "columns").uniform(c) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    last = int(np.flatnonzero(probs)[-1])
    return np.minimum(idx, last), probs


def column_sample_rescale(a, c, seed):
    """Sketch ``A X`` whose j-th column is ``a_i / sqrt(c p_i)`` for a sampled ``i``.

    ``E[(AX)(AX)^T] = A A^T``.
    """
    a = as_matrix(a)
    idx, probs = sample_column_indices(a, c, seed)
    return a[:, idx] / np.sqrt(c * probs[idx])


def collapse_repeated_columns(a, c, seed):
    """Sketch with each repeated sample merged into one column.

    A column drawn ``t`` times becomes ``sqrt(t) a_i / sqrt(c p_i)``, so the
    sketch ``C`` has distinct columns (full column rank when the sampled
    columns of ``A`` are independent) and exactly the same ``C C^T`` as
    :func:`column_sample_rescale` for the same seed.
    """
    a = as_matrix(a)
    idx, probs = sample_column_indices(a, c, seed)
    chosen, counts = np.unique(idx, return_counts=True)
    return a[:, chosen] * np.sqrt(counts / (c * probs[chosen]))


@dataclass(frozen=True)
class PerturbationSpec:
    """Template for one perturbation: kind, magnitude (or column count) and seed."""

    kind: str
    magnitude: float
    seed: int = 0

    KINDS = ("basis_additive", "matrix_additive", "column_sample")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown perturbation kind {self.kind!r}; expected one of {self.KINDS}")
        if self.magnitude < 0:
            raise ValueError("magnitude must be non-negative")
        if self.kind == "column_sample" and (self.magnitude < 1 or int(self.magnitude) != self.magnitude):
            raise ValueError("column_sample needs an integer column count c >= 1")

    @property
    def label(self):
        mag = int(self.magnitude) if self.kind == "column_sample" else self.magnitude
        return f"{self.kind}({mag})"


def spectrum_template(name, r, k=None, scale=1.0):
    """Singular values for a named template.

    ``flat``
        all ones.
    ``gapped(ratio)``
        a slowly decreasing leading block of size ``k`` followed by the same
        profile multiplied by ``ratio`` (< 1 gives a gap after position ``k``).
    ``decaying(rate)``
        ``rate ** j``.
    """
    base, arg = _parse_template(name)
    j = np.arange(r)
    if base == "flat":
        s = np.ones(r)
    elif base == "gapped":
        if k is None:
            raise ValueError("gapped spectrum needs k")
        ratio = 0.5 if arg is None else arg
        if not 0 <= ratio < 1:
            raise ValueError("gap ratio must lie in [0, 1)")
        s = 1.0 - 0.25 * j / max(r, 1)
        s[k:] *= ratio
    elif base == "decaying":
        rate = 0.7 if arg is None else arg
        if not 0 < rate < 1:
            raise ValueError("decay rate must lie in (0, 1)")
        s = rate**j
    else:
        raise ValueError(f"unknown spectrum template {name!r}")
    return tuple(float(x) for x in scale * s)


def _parse_template(name):
    name = name.strip()
    if "(" in name:
        base, rest = name.split("(", 1)
        return base.strip(), float(rest.rstrip(")"))
    return name, None


def has_gap(sigmas, k, rel_tol=None):
    """True when ``sigma_k > sigma_{k+1}`` by more than rounding noise."""
    s = np.asarray(sigmas, dtype=np.float64)
    if k < 1 or k > s.size:
        return False
    if k == s.size:
        return s[k - 1] > 0
    tol = (100 * EPS * s[0]) if rel_tol is None else rel_tol * s[0]
    return bool(s[k - 1] - s[k] > tol)
