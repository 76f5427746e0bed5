"""Combinatorics of symmetric tensor powers.

Partitions label the symmetric-subspace basis ``|N, n>``; multinomials,
angular-momentum weights and energy convolutions are the probability
distributions that every cloning family reduces to.  All probabilities are
kept as natural logarithms until the last moment, since values such as
``p**M`` at ``M ~ 10**3`` underflow double precision.

Half-integer angular momenta are passed around as ``two_j = 2*j`` so that the
ladder ``j_min, j_min + 1, ..., N/2`` is plain integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Hashable, Sequence

import numpy as np
from scipy.special import comb, gammaln, logsumexp

PARTITION_CAP = 10**7
# log-weights this close count as tied when picking a most likely label
MODE_TIE_TOL = 1e-9

Partition = tuple[int, ...]


class CapExceededError(ValueError):
    """A requested enumeration or dense object is larger than the configured cap."""


def _as_probs(probs: Sequence[float]) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("probabilities must be a non-empty vector")
    if np.any(p <= 0):
        raise ValueError("all probabilities must be strictly positive")
    if abs(p.sum() - 1.0) > 1e-12:
        raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
    return p


@dataclass(frozen=True, eq=False)
class WeightedDistribution:
    """Exact probability distribution over hashable labels, stored in log space."""

    support: tuple[Hashable, ...]
    log_weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        lw = np.asarray(self.log_weights, dtype=float)
        if lw.shape != (len(self.support),):
            raise ValueError("support and log_weights have different lengths")
        if np.any(np.isnan(lw)) or np.any(lw > 1e-12):
            raise ValueError("log weights must be <= 0")
        total = logsumexp(lw)
        if abs(total) > 1e-12:
            raise ValueError(f"weights do not normalize: log-sum = {total:.3e}")
        lw.setflags(write=False)
        object.__setattr__(self, "log_weights", lw)
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(self.support)})

    def __len__(self) -> int:
        return len(self.support)

    def __contains__(self, label) -> bool:
        return label in self._index

    def log_weight(self, label) -> float:
        i = self._index.get(label)
        return -np.inf if i is None else float(self.log_weights[i])

    def __getitem__(self, label) -> float:
        return math.exp(self.log_weight(label))

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.weights.tolist()))

    def argmax(self):
        """Label of largest weight (first in support order on exact ties)."""
        return self.support[int(np.argmax(self.log_weights))]


@dataclass(frozen=True, eq=False)
class GaussianApprox:
    """Lattice Gaussian ``sqrt(det(A / 2 pi s)) exp(-x^T A x / 2 s)``.

    ``x`` is measured from ``mean``; ``scale`` is the copy number ``s = N``.
    Both the multinomial approximation (``A_jk = delta_jk/p_j + 1/p_0``) and the
    energy approximation (``A = 1/<H^2>``) have this shape.
    """

    mean: np.ndarray
    matrix: np.ndarray
    scale: float

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if a.shape[0] != a.shape[1] or np.any(np.linalg.eigvalsh(a) <= 0):
            raise ValueError("Gaussian matrix must be positive definite")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "mean", np.atleast_1d(np.asarray(self.mean, dtype=float)))

    @property
    def normalization(self) -> float:
        return math.sqrt(np.linalg.det(self.matrix / (2 * math.pi * self.scale)))

    def density(self, points) -> np.ndarray:
        x = np.asarray(points, dtype=float) - self.mean
        q = np.einsum("...i,ij,...j->...", x, self.matrix, x)
        return self.normalization * np.exp(-q / (2 * self.scale))

    @classmethod
    def multinomial(cls, N: int, probs: Sequence[float]) -> "GaussianApprox":
        p = _as_probs(probs)
        if p.size < 2:
            raise ValueError("need at least two levels for a Gaussian approximation")
        a = np.diag(1.0 / p[1:]) + 1.0 / p[0]
        return cls(mean=N * p[1:], matrix=a, scale=N)

    @classmethod
    def energy(cls, N: int, mean: float, variance: float) -> "GaussianApprox":
        return cls(mean=[N * mean], matrix=[[1.0 / variance]], scale=N)


def symmetric_dimension(N: int, d: int) -> int:
    """Dimension ``C(N+d-1, d-1)`` of the N-fold symmetric power of ``C^d``."""
    if N < 0 or d < 1:
        raise ValueError("need N >= 0 and d >= 1")
    return math.comb(N + d - 1, d - 1)


@lru_cache(maxsize=256)
def _partition_array(N: int, d: int) -> np.ndarray:
    if d == 1:
        out = np.array([[N]], dtype=np.int64)
    else:
        blocks = []
        for first in range(N, -1, -1):
            rest = _partition_array(N - first, d - 1)
            blocks.append(np.column_stack([np.full(len(rest), first, dtype=np.int64), rest]))
        out = np.vstack(blocks)
    out.setflags(write=False)
    return out


def partition_array(N: int, d: int, cap: int = PARTITION_CAP) -> np.ndarray:
    """All partitions of N into d parts as rows, lexicographically descending."""
    if N < 0 or d < 1:
        raise ValueError("need N >= 0 and d >= 1")
    count = symmetric_dimension(N, d)
    if count > cap:
        raise CapExceededError(f"{count} partitions of N={N} into d={d} exceed cap {cap}")
    return _partition_array(N, d)


def partition_rank(parts, d: int) -> np.ndarray:
    """Position of each partition in the descending lexicographic order.

    Uses the hockey-stick count of partitions sharing a prefix but with a larger
    next entry, so no table of partitions is built.
    """
    n = np.asarray(parts, dtype=np.int64)
    if n.shape[-1] != d:
        raise ValueError("partition length does not match d")
    remaining = n.sum(axis=-1)
    rank = np.zeros(n.shape[:-1], dtype=np.int64)
    for i in range(d - 1):
        k = d - i - 1
        slack = remaining - n[..., i]
        count = np.rint(comb(slack + k - 1, k, exact=False)).astype(np.int64)
        rank += np.where(slack > 0, count, 0)
        remaining = slack
    return rank


def enumerate_partitions(N: int, d: int, cap: int = PARTITION_CAP) -> list[Partition]:
    """Partitions of ``N`` into ``d`` non-negative parts, lexicographically descending.

    >>> enumerate_partitions(2, 2)
    [(2, 0), (1, 1), (0, 2)]
    """
    return [tuple(int(v) for v in row) for row in partition_array(N, d, cap)]


def log_multinomial(N: int, probs: Sequence[float], parts) -> np.ndarray:
    """Log multinomial probabilities for one partition or a stack of them."""
    p = _as_probs(probs)
    n = np.asarray(parts, dtype=np.int64)
    if n.shape[-1] != p.size:
        raise ValueError(f"partition length {n.shape[-1]} does not match {p.size} levels")
    if np.any(n < 0) or np.any(n.sum(axis=-1) != N):
        raise ValueError(f"not a partition of N={N}")
    return gammaln(N + 1) - gammaln(n + 1).sum(axis=-1) + (n * np.log(p)).sum(axis=-1)


def multinomial_weight(N: int, probs: Sequence[float], parts: Partition) -> float:
    """``N!/(n_0!...n_{d-1}!) prod p_j^{n_j}``."""
    return float(np.exp(log_multinomial(N, probs, parts)))


def multinomial_distribution(N: int, probs: Sequence[float], cap: int = PARTITION_CAP) -> WeightedDistribution:
    parts = partition_array(N, len(probs), cap)
    labels = tuple(tuple(int(v) for v in row) for row in parts)
    return WeightedDistribution(labels, log_multinomial(N, probs, parts))


def gaussian_multinomial(N: int, probs: Sequence[float], parts) -> np.ndarray | float:
    """Gaussian density approximating the multinomial at ``parts``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    g = GaussianApprox.multinomial(N, probs)
    n = np.asarray(parts, dtype=float)
    if n.shape[-1] != len(probs):
        raise ValueError("partition length does not match number of levels")
    val = g.density(n[..., 1:])
    return float(val) if np.ndim(val) == 0 else val


def j_ladder(N: int) -> np.ndarray:
    """Allowed ``2j`` values in the N-fold tensor power of spin 1/2."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return np.arange(N % 2, N + 1, 2)


def _check_two_j(N: int, two_j) -> np.ndarray:
    tj = np.asarray(two_j, dtype=np.int64)
    if np.any(tj < 0) or np.any(tj > N) or np.any((tj - N) % 2 != 0):
        raise ValueError(f"2j={two_j} is not on the ladder for N={N}")
    return tj


def multiplicity(N: int, two_j: int) -> int:
    """Multiplicity of spin j in N spins 1/2: ``2 d_j/(N + d_j + 1) * C(N, N/2 + j)``."""
    _check_two_j(N, two_j)
    dj = two_j + 1
    num = 2 * dj * math.comb(N, (N + two_j) // 2)
    m, r = divmod(num, N + dj + 1)
    assert r == 0
    return m


def angular_weight_exact(N: int, two_j: int) -> Fraction:
    return Fraction((two_j + 1) * multiplicity(N, two_j), 2**N)


def log_angular_weight(N: int, two_j) -> np.ndarray | float:
    """Log of ``p_{N,j} = d_j m_j / 2^N``; vectorized over ``two_j``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    tj = _check_two_j(N, two_j)
    dj = tj + 1.0
    log_binom = gammaln(N + 1) - gammaln((N + tj) // 2 + 1) - gammaln((N - tj) // 2 + 1)
    out = np.log(2 * dj**2 / (N + dj + 1)) + log_binom - N * math.log(2)
    return float(out) if out.ndim == 0 else out


def angular_weight(N: int, two_j: int) -> float:
    """Probability that N copies of a maximally entangled qubit pair sit in sector j."""
    return math.exp(log_angular_weight(N, two_j))


def angular_gaussian(N: int, two_j) -> np.ndarray | float:
    """Large-N approximation ``sqrt(2/(pi N^3)) 2 (2j+1)^2 exp(-2 j^2/N)``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    j = np.asarray(two_j, dtype=float) / 2
    out = math.sqrt(2 / (math.pi * N**3)) * 2 * (2 * j + 1) ** 2 * np.exp(-2 * j**2 / N)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=512)
def _log_energy(spectrum: tuple[int, ...], probs: tuple[float, ...], N: int) -> tuple[int, np.ndarray]:
    emin = min(spectrum)
    offsets = np.array([e - emin for e in spectrum])
    logp = np.log(probs)
    span = int(offsets.max())
    cur = np.array([0.0])
    for _ in range(N):
        nxt = np.full(cur.size + span, -np.inf)
        for off, lp in zip(offsets, logp):
            seg = nxt[off : off + cur.size]
            nxt[off : off + cur.size] = np.logaddexp(seg, cur + lp)
        cur = nxt
    cur.setflags(write=False)
    return N * emin, cur


def log_energy_array(spectrum: Sequence[int], probs: Sequence[float], N: int) -> tuple[int, np.ndarray]:
    """Dense log-probabilities of total energy: ``(E_lowest, logp)`` with ``logp[k]`` at ``E_lowest + k``.

    Energies that cannot occur carry ``-inf``.
    """
    spec = tuple(int(e) for e in spectrum)
    if not spec:
        raise ValueError("empty spectrum")
    if len(set(spec)) != len(spec):
        raise ValueError("spectrum entries must be distinct")
    p = _as_probs(probs)
    if p.size != len(spec):
        raise ValueError("spectrum and probabilities differ in length")
    if N < 0:
        raise ValueError("N must be >= 0")
    return _log_energy(spec, tuple(p.tolist()), int(N))


def energy_distribution(spectrum: Sequence[int], probs: Sequence[float], N: int) -> WeightedDistribution:
    """N-fold convolution of the single-copy energy distribution."""
    e0, lp = log_energy_array(spectrum, probs, N)
    idx = np.flatnonzero(np.isfinite(lp))
    return WeightedDistribution(tuple(int(e0 + k) for k in idx), lp[idx])


def energy_gaussian(N: int, spectrum: Sequence[int], probs: Sequence[float], energies) -> np.ndarray | float:
    """Gaussian lattice approximation of ``p_{N,E}`` centred on ``N * mean``.

    The lattice spacing (gcd of level differences) plays the role of the
    conversion constant between the discrete distribution and the density.
    """
    spec = np.asarray(spectrum, dtype=np.int64)
    p = _as_probs(probs)
    mu = float(p @ spec)
    var = float(p @ (spec - mu) ** 2)
    step = int(np.gcd.reduce(spec - spec.min()))
    out = step * GaussianApprox.energy(N, mu, var).density(np.asarray(energies, dtype=float)[..., None])
    return float(out) if np.ndim(out) == 0 else out
