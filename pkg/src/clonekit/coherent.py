"""Coherent-state families with a finite formal dimension.

For qudit pure states the span of ``|psi_g>^{(x)M}`` is the symmetric subspace,
so the formal dimension is ``d_M = C(M + d - 1, d - 1)`` and every optimal
fidelity is a ratio of such dimensions.  The harmonic oscillator is carried
only as a tabulated reference (``d_M = M``); nothing about it is simulated.

Matrices live in the partition basis ``|M, m>`` of the symmetric subspace,
ordered as :func:`clonekit.symcomb.partition_array`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from .fidelity import FidelityReport
from .symcomb import partition_array, partition_rank, symmetric_dimension

REFERENCE_FAMILIES = ("harmonic-oscillator",)
DIMENSION_CAP = 4096


class UnsupportedFamilyError(ValueError):
    """The operation has no finite-dimensional meaning for this family."""


@dataclass(frozen=True)
class CoherentFamily:
    """``kind`` is ``"qudit"`` (with ``d``) or ``"reference"`` (with ``name``)."""

    kind: str = "qudit"
    d: int = 2
    name: str = ""

    def __post_init__(self):
        if self.kind == "qudit":
            if self.d < 2:
                raise ValueError("qudit families need d >= 2")
        elif self.kind == "reference":
            if self.name not in REFERENCE_FAMILIES:
                raise ValueError(f"unknown reference family {self.name!r}; known: {REFERENCE_FAMILIES}")
        else:
            raise ValueError(f"unknown family kind {self.kind!r}")

    @classmethod
    def qudit(cls, d: int) -> "CoherentFamily":
        return cls("qudit", d)

    @classmethod
    def reference(cls, name: str) -> "CoherentFamily":
        return cls("reference", 0, name)


def _family(family) -> CoherentFamily:
    if isinstance(family, CoherentFamily):
        return family
    if isinstance(family, int):
        return CoherentFamily.qudit(family)
    return CoherentFamily.reference(str(family))


def _require_qudit(fam: CoherentFamily) -> int:
    if fam.kind != "qudit":
        raise UnsupportedFamilyError(f"{fam.name} is a tabulated reference; only its closed forms are available")
    return fam.d


def formal_dimension(family, M: int) -> int:
    fam = _family(family)
    if M < 1:
        raise ValueError("need M >= 1")
    if fam.kind == "qudit":
        return symmetric_dimension(M, fam.d)
    return M


def werner_fidelity_exact(family, N: int, M: int) -> Fraction:
    if not 1 <= N <= M:
        raise ValueError("need 1 <= N <= M")
    return Fraction(formal_dimension(family, N), formal_dimension(family, M))


def werner_fidelity(family, N: int, M: int) -> float:
    """Optimal worst-case (and average) fidelity ``d_N / d_M``."""
    return float(werner_fidelity_exact(family, N, M))


def naive_mp_worstcase(family, N: int, M: int) -> float:
    """Estimate with the coherent-state POVM, then prepare M copies: ``d_N / d_{M+N}``."""
    d = _require_qudit(_family(family))
    if not 1 <= N <= M:
        raise ValueError("need 1 <= N <= M")
    return float(Fraction(symmetric_dimension(N, d), symmetric_dimension(M + N, d)))


def mp_epsilon_bound(family, N: int, M: int) -> float:
    """``d_N eps^{N/M} (1 - eps d_M) / d_M`` with ``eps = N / (M d_M)``."""
    d = _require_qudit(_family(family))
    if not 1 <= N <= M:
        raise ValueError("need 1 <= N <= M")
    d_n, d_m = symmetric_dimension(N, d), symmetric_dimension(M, d)
    eps = N / (M * d_m)
    if eps * d_m >= 1:
        raise ValueError(f"eps * d_M = {eps * d_m} >= 1; the bound is vacuous")
    return d_n * eps ** (N / M) * (1 - eps * d_m) / d_m


def average_fidelity_identity(family, N: int, M: int) -> FidelityReport:
    """``||rho_AV^(M)|| = 1/d_M`` times ``p_succ = d_N``, which reproduces ``d_N/d_M``."""
    fam = _family(family)
    d_n, d_m = formal_dimension(fam, N), formal_dimension(fam, M)
    product = Fraction(1, d_m) * d_n
    assert product == werner_fidelity_exact(fam, N, M)
    return FidelityReport(value=float(product), rho_av_max=1 / d_m, p_succ=float(d_n))


def _log_multinomial_coef(parts: np.ndarray) -> np.ndarray:
    parts = np.asarray(parts)
    return gammaln(parts.sum(axis=-1) + 1) - gammaln(parts + 1).sum(axis=-1)


def symmetric_power(psi, N: int) -> np.ndarray:
    """``|psi>^{(x)N}`` in the partition basis: ``sqrt(N!/prod n_j!) prod psi_j^{n_j}``."""
    psi = np.asarray(psi, dtype=complex)
    parts = partition_array(N, psi.size)
    amp = np.exp(0.5 * _log_multinomial_coef(parts))
    return amp * np.prod(psi[None, :] ** parts, axis=1)


def embedding_operators(d: int, N: int, M: int) -> list[np.ndarray]:
    """Operators ``A_k |N, n> = c |M, n + k>`` for each partition k of ``M - N``.

    ``c = sqrt(C(N; n) C(M-N; k) / C(M; n+k))`` with multinomial coefficients,
    so that ``sum_k A_k rho A_k^dag = P_M (rho x I) P_M`` on symmetric inputs.
    """
    if not 1 <= N <= M:
        raise ValueError("need 1 <= N <= M")
    d_in, d_out = symmetric_dimension(N, d), symmetric_dimension(M, d)
    if max(d_in, d_out) > DIMENSION_CAP:
        raise ValueError(f"symmetric dimension {max(d_in, d_out)} exceeds cap {DIMENSION_CAP}")
    n_parts = partition_array(N, d)
    ln = _log_multinomial_coef(n_parts)
    ops = []
    for k in partition_array(M - N, d):
        out = n_parts + k
        c = np.exp(0.5 * (ln + _log_multinomial_coef(k) - _log_multinomial_coef(out)))
        a = np.zeros((d_out, d_in))
        a[partition_rank(out, d), np.arange(d_in)] = c
        ops.append(a)
    return ops


def werner_cloner_apply(family, N: int, M: int, rho) -> np.ndarray:
    """``(d_N/d_M) P_M (rho x I^{(x)(M-N)}) P_M`` for ``rho`` on the N-copy symmetric subspace."""
    d = _require_qudit(_family(family))
    rho = np.asarray(rho, dtype=complex)
    d_in = symmetric_dimension(N, d)
    if rho.shape != (d_in, d_in):
        raise ValueError(f"rho must be {d_in}x{d_in} in the symmetric basis")
    scale = symmetric_dimension(N, d) / symmetric_dimension(M, d)
    return scale * sum(a @ rho @ a.T for a in embedding_operators(d, N, M))


def bound_ratio(family, N: int, M: int) -> float:
    """``mp_epsilon_bound / werner_fidelity``; tends to 1 as M grows."""
    return mp_epsilon_bound(family, N, M) / werner_fidelity(family, N, M)

