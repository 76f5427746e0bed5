"""Fidelity values together with the factorization they are compared against."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class FidelityReport:
    """A fidelity and the ``||rho_AV||_inf * p_succ`` product that bounds it.

    ``error`` is an absolute envelope on ``value`` (0 for closed forms).
    """

    value: float
    rho_av_max: float
    p_succ: float
    error: float = 0.0

    @property
    def bound(self) -> float:
        return self.rho_av_max * self.p_succ

    @property
    def saturation(self) -> float:
        return self.value / self.bound


def equivalence_ratio(f_clone: float, f_est: float) -> float:
    """``(F_clon - F_est) / F_clon``; tends to 0 when cloning and estimation are globally equivalent."""
    return (f_clone - f_est) / f_clone


def asymptotic_fidelity(N: int, M: int, exponent: float) -> float:
    """``(sqrt(4 M N) / (M + N)) ** exponent``, the large-N law for a family with ``exponent`` parameters."""
    if N < 1 or M < 1:
        raise ValueError("need N, M >= 1")
    return ((4 * M * N) ** 0.5 / (M + N)) ** exponent


def protocol_copies(M: int, epsilon: float) -> int:
    """``K = ceil(M^(1 - epsilon))`` clipped to ``[1, M]``; the guard keeps exact powers such as 27^(2/3) at 9."""
    if not 0 <= epsilon < 1:
        raise ValueError("epsilon must lie in [0, 1)")
    return min(M, max(1, math.ceil(M ** (1 - epsilon) - 1e-9)))
