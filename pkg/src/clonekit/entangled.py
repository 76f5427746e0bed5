"""Cloning of maximally entangled qubit pairs ``(U_g x I)|Phi+>``.

N copies decompose under SU(2) into spin sectors ``j`` with dimension
``d_j = 2j + 1``, multiplicity ``m_j`` and weight ``p_{N,j} = d_j m_j / 2^N``.
Every closed form below is a sum over this ladder; only the measure-and-prepare
fidelity needs an integral, and that one is over the class angle ``tau`` of
SU(2) only, because the integrand is a class function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import logsumexp, roots_legendre

from . import fidelity
from .fidelity import FidelityReport
from .symcomb import angular_weight_exact, j_ladder, log_angular_weight, multiplicity


@dataclass(frozen=True)
class EntangledFamily:
    """Marker for the orbit ``(U x I)|Phi+>`` with U Haar-distributed over SU(2)."""

    def state(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        return np.kron(u, np.eye(2)) @ np.array([1, 0, 0, 1]) / math.sqrt(2)


@dataclass(frozen=True)
class JDecomposition:
    """Spin ladder of N entangled pairs; ``two_j`` stores ``2j`` as integers."""

    N: int
    two_j: tuple[int, ...]
    dims: tuple[int, ...]
    multiplicities: tuple[int, ...]
    weights: tuple[Fraction, ...]

    def as_dict(self) -> dict[Fraction, dict]:
        return {
            Fraction(tj, 2): {"d": d, "m": m, "p": p}
            for tj, d, m, p in zip(self.two_j, self.dims, self.multiplicities, self.weights)
        }


def decompose(N: int) -> JDecomposition:
    tj = [int(t) for t in j_ladder(N)]
    dec = JDecomposition(
        N=N,
        two_j=tuple(tj),
        dims=tuple(t + 1 for t in tj),
        multiplicities=tuple(multiplicity(N, t) for t in tj),
        weights=tuple(angular_weight_exact(N, t) for t in tj),
    )
    assert sum(d * m for d, m in zip(dec.dims, dec.multiplicities)) == 2**N
    assert sum(dec.weights) == 1
    return dec


def _check_parity(N: int, M: int) -> None:
    if N < 1 or M < 1:
        raise ValueError("need N, M >= 1")
    if (M - N) % 2:
        raise ValueError(f"N={N} and M={M} must have the same parity")


def _log_overlap_terms(N: int, M: int) -> tuple[np.ndarray, np.ndarray]:
    """``(2j, log sqrt(p_{N,j} p_{M,j}))`` over the N ladder."""
    tj = j_ladder(N)
    return tj, 0.5 * (log_angular_weight(N, tj) + log_angular_weight(M, tj))


def economical_fidelity(N: int, M: int) -> float:
    """``(sum_j sqrt(p_{N,j} p_{M,j}))^2`` over ``j <= N/2``."""
    _check_parity(N, M)
    if M < N:
        raise ValueError("need M >= N")
    _, terms = _log_overlap_terms(N, M)
    return math.exp(2 * logsumexp(terms))


def success_probability(N: int) -> float:
    """``(sum_j d_j sqrt(p_{N,j}))^2``; a density on SU(2), so it exceeds 1."""
    tj = j_ladder(N)
    return math.exp(2 * logsumexp(0.5 * log_angular_weight(N, tj) + np.log(tj + 1.0)))


def average_state_max_eigenvalue(M: int) -> float:
    """``p_{M,jmin} / d_jmin^2``."""
    tj = M % 2
    return math.exp(log_angular_weight(M, tj)) / (tj + 1) ** 2


def upper_bound(N: int, M: int) -> float:
    return average_state_max_eigenvalue(M) * success_probability(N)


def fidelity_report(N: int, M: int) -> FidelityReport:
    return FidelityReport(
        value=economical_fidelity(N, M),
        rho_av_max=average_state_max_eigenvalue(M),
        p_succ=success_probability(N),
    )


def characters(two_j: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """``chi_j(tau) = sin((j + 1/2) tau) / sin(tau / 2)``, shape ``(len(tau), len(two_j))``."""
    tau = np.asarray(tau, dtype=float)[:, None]
    return np.sin((np.asarray(two_j)[None, :] + 1) * tau / 2) / np.sin(tau / 2)


def matched_k(K: int, M: int) -> int:
    """Round K up to the parity of M."""
    return K + (M - K) % 2


def mp_protocol_fidelity(N: int, K: int, M: int, nodes: int | None = None) -> float:
    """Estimate the pair from N copies, prepare K copies, clone K -> M economically.

    Integrates ``(2/pi) sin^2(tau/2) p_N(tau) f_{K,M}(tau)`` over ``[0, pi]`` by
    Gauss-Legendre; ``p_N`` is the estimate density relative to the true state
    and ``f_{K,M}`` the economical fidelity between states ``tau`` apart.
    """
    if N < 1 or not 1 <= K <= M:
        raise ValueError("need N >= 1 and 1 <= K <= M")
    _check_parity(K, M)
    nodes = nodes or 4 * (N + K + M) + 16
    x, w = roots_legendre(nodes)
    tau = np.pi * (x + 1) / 2
    w = w * np.pi / 2

    tj_n = j_ladder(N)
    a = np.exp(0.5 * log_angular_weight(N, tj_n))
    p_n = (characters(tj_n, tau) @ a) ** 2

    tj_k, terms = _log_overlap_terms(K, M)
    b = np.exp(terms) / (tj_k + 1)
    f_km = (characters(tj_k, tau) @ b) ** 2

    return float((2 / np.pi) * np.sum(w * np.sin(tau / 2) ** 2 * p_n * f_km))


def naive_mp_fidelity(N: int, M: int) -> float:
    return mp_protocol_fidelity(N, M, M)


def naive_ratio(N: int, M: int) -> float:
    return naive_mp_fidelity(N, M) / economical_fidelity(N, M)


def asymptotic_fidelity(N: int, M: int) -> float:
    """``(sqrt(4MN)/(M+N))^3``, the multiphase law for d = 4."""
    return fidelity.asymptotic_fidelity(N, M, 3)
