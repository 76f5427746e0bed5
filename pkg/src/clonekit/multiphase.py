"""Multiphase-covariant cloning.

Input states are ``sqrt(p_0)|0> + sum_j sqrt(p_j) e^{i theta_j} |j>`` with the
phases uniformly random.  N copies live in the symmetric subspace with basis
``|N, n>`` indexed by partitions, so every fidelity below is a finite sum over
partitions weighted by the multinomial ``p_{N,n}``.

The measure-and-prepare fidelity is evaluated without quadrature: both factors
of the torus integrand are squared trigonometric polynomials, so the integral
is the dot product of their Fourier coefficients, i.e. of the
autocorrelations of the two amplitude vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from . import fidelity
from .fidelity import FidelityReport
from .symcomb import MODE_TIE_TOL, Partition, _as_probs, log_multinomial, partition_array, partition_rank


@dataclass(frozen=True)
class MultiphaseFamily:
    """Probabilities ``p_j`` of the phase-covariant qudit family."""

    probs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(float(p) for p in _as_probs(self.probs)))

    @property
    def d(self) -> int:
        return len(self.probs)

    def state(self, phases: Sequence[float]) -> np.ndarray:
        """Single-copy amplitudes; ``phases`` has ``d - 1`` entries (level 0 carries no phase)."""
        th = np.concatenate([[0.0], np.asarray(phases, dtype=float)])
        return np.sqrt(self.probs) * np.exp(1j * th)


def _family(family) -> MultiphaseFamily:
    return family if isinstance(family, MultiphaseFamily) else MultiphaseFamily(tuple(family))


@lru_cache(maxsize=128)
def _weights(N: int, probs: tuple[float, ...]) -> tuple[np.ndarray, np.ndarray, int]:
    parts = partition_array(N, len(probs))
    lw = log_multinomial(N, probs, parts)
    lw.setflags(write=False)
    mode = int(np.flatnonzero(lw >= lw.max() - MODE_TIE_TOL)[0])
    return parts, lw, mode


def mode_partition(N: int, family) -> Partition:
    """Most likely partition of N; near-ties go to the lexicographically greatest."""
    fam = _family(family)
    parts, _, mode = _weights(N, fam.probs)
    return tuple(int(v) for v in parts[mode])


@dataclass(frozen=True)
class EconomicalIsometry:
    """Label map ``|N, n> -> |M, n - n* + m*>``; all amplitudes are 1."""

    N: int
    M: int
    d: int
    n_star: Partition
    m_star: Partition
    inputs: np.ndarray
    outputs: np.ndarray

    @property
    def shift(self) -> np.ndarray:
        return np.subtract(self.m_star, self.n_star)

    def mapping(self) -> dict[Partition, Partition]:
        return {tuple(map(int, a)): tuple(map(int, b)) for a, b in zip(self.inputs, self.outputs)}

    def matrix(self) -> np.ndarray:
        """Dense ``V`` in the partition bases (both in descending lexicographic order)."""
        d_in = len(partition_array(self.N, self.d))
        d_out = len(partition_array(self.M, self.d))
        v = np.zeros((d_out, d_in))
        v[partition_rank(self.outputs, self.d), partition_rank(self.inputs, self.d)] = 1.0
        return v


def _shifted_index(N: int, M: int, fam: MultiphaseFamily) -> tuple[np.ndarray, np.ndarray]:
    parts_n, _, mode_n = _weights(N, fam.probs)
    parts_m, _, mode_m = _weights(M, fam.probs)
    out = parts_n - parts_n[mode_n] + parts_m[mode_m]
    if np.any(out < 0):
        bad = tuple(int(v) for v in out[np.any(out < 0, axis=1)][0])
        raise ValueError(f"shifted label {bad} is not a partition of M={M}; economical map undefined for N={N}")
    return out, partition_rank(out, fam.d)


def economical_isometry(N: int, M: int, family) -> EconomicalIsometry:
    fam = _family(family)
    if M < N:
        raise ValueError("need M >= N")
    outputs, _ = _shifted_index(N, M, fam)
    return EconomicalIsometry(
        N=N,
        M=M,
        d=fam.d,
        n_star=mode_partition(N, fam),
        m_star=mode_partition(M, fam),
        inputs=partition_array(N, fam.d),
        outputs=outputs,
    )


def _log_overlap_terms(N: int, M: int, fam: MultiphaseFamily) -> np.ndarray:
    _, lw_n, _ = _weights(N, fam.probs)
    _, lw_m, _ = _weights(M, fam.probs)
    _, idx = _shifted_index(N, M, fam)
    return 0.5 * (lw_n + lw_m[idx])


def economical_fidelity(N: int, M: int, family) -> float:
    """``(sum_n sqrt(p_{N,n} p_{M, n - n* + m*}))^2``."""
    fam = _family(family)
    if M < N:
        raise ValueError("need M >= N")
    return math.exp(2 * logsumexp(_log_overlap_terms(N, M, fam)))


def success_probability(N: int, family) -> float:
    """Optimal likelihood density ``(sum_n sqrt(p_{N,n}))^2``; not bounded by 1."""
    fam = _family(family)
    _, lw, _ = _weights(N, fam.probs)
    return math.exp(2 * logsumexp(0.5 * lw))


def average_state_max_eigenvalue(M: int, family) -> float:
    fam = _family(family)
    _, lw, mode = _weights(M, fam.probs)
    return math.exp(lw[mode])


def upper_bound(N: int, M: int, family) -> float:
    return average_state_max_eigenvalue(M, family) * success_probability(N, family)


def fidelity_report(N: int, M: int, family) -> FidelityReport:
    return FidelityReport(
        value=economical_fidelity(N, M, family),
        rho_av_max=average_state_max_eigenvalue(M, family),
        p_succ=success_probability(N, family),
    )


def _grid(parts: np.ndarray, values: np.ndarray, size: int) -> np.ndarray:
    """Scatter values onto a dense grid indexed by the last ``d - 1`` partition entries."""
    d = parts.shape[1]
    g = np.zeros((size + 1,) * (d - 1))
    g[tuple(parts[:, 1:].T)] = values
    return g


def _correlation_at(g: np.ndarray, delta: Sequence[int]) -> float:
    """``sum_k g[k] g[k + delta]`` over the overlap of the grid with its shift."""
    src, dst = [], []
    for n, s in zip(g.shape, delta):
        if abs(s) >= n:
            return 0.0
        src.append(slice(max(0, -s), n - max(0, s)))
        dst.append(slice(max(0, s), n - max(0, -s)))
    return float(np.sum(g[tuple(src)] * g[tuple(dst)]))


def mp_protocol_fidelity(N: int, K: int, M: int, family) -> float:
    """Estimate the phases from N copies, prepare K copies, clone K -> M economically.

    Returns ``sum_Delta A(Delta) B(Delta)`` with ``A``, ``B`` the autocorrelations
    of ``a_n = sqrt(p_{N,n})`` and ``b_k = sqrt(p_{K,k} p_{M,k-k*+m*})``.
    """
    fam = _family(family)
    if N < 1 or not 1 <= K <= M:
        raise ValueError("need N >= 1 and 1 <= K <= M")
    parts_n, lw_n, _ = _weights(N, fam.probs)
    parts_k, _, _ = _weights(K, fam.probs)
    a = _grid(parts_n, np.exp(0.5 * lw_n), N)
    b = _grid(parts_k, np.exp(_log_overlap_terms(K, M, fam)), K)
    total = 0.0
    for delta in np.ndindex(*(2 * N + 1,) * (fam.d - 1)):
        delta = tuple(s - N for s in delta)
        ad = _correlation_at(a, delta)
        if ad != 0.0:
            total += ad * _correlation_at(b, delta)
    return total


def naive_mp_fidelity(N: int, M: int, family) -> float:
    """Optimal estimate followed by M identical copies (the ``K = M`` protocol)."""
    return mp_protocol_fidelity(N, M, M, family)


def naive_ratio(N: int, M: int, family) -> float:
    return naive_mp_fidelity(N, M, family) / economical_fidelity(N, M, family)


def asymptotic_fidelity(N: int, M: int, d: int) -> float:
    return fidelity.asymptotic_fidelity(N, M, d - 1)
