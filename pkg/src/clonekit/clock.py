"""Phase-covariant cloning of clock states ``sum_E sqrt(p_E) e^{i E theta} |E>``.

N copies are described entirely by the distribution ``p_{N,E}`` of total
energy, obtained by repeated convolution of the single-copy ``p_E``.  The
economical cloner maps ``|N, E> -> |M, E + E0>``.

How ``E0`` is chosen matters.  The default ``rule="mode"`` aligns the most
likely energies of the input and output, ``E0 = E*_M - E*_N``; this is what
makes a two-level family reproduce the multiphase d=2 cloner and gives the
optimal asymptotic fidelity.  ``rule="mean"`` picks the difference closest to
``(M - N) mu``, and ``rule="uncentered"`` picks the difference of smallest
modulus in the raw integer spectra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import fidelity
from .fidelity import FidelityReport
from .symcomb import MODE_TIE_TOL, _as_probs, log_energy_array

E0_RULES = ("mode", "mean", "uncentered")


@dataclass(frozen=True)
class ClockFamily:
    """Integer spectrum and the populations ``p_E`` of each level."""

    spectrum: tuple[int, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        spec = tuple(int(e) for e in self.spectrum)
        if len(spec) < 2:
            raise ValueError("a clock family needs at least two levels")
        if len(set(spec)) != len(spec):
            raise ValueError("spectrum entries must be distinct")
        p = _as_probs(self.probs)
        if p.size != len(spec):
            raise ValueError("spectrum and probabilities differ in length")
        order = np.argsort(spec)
        object.__setattr__(self, "spectrum", tuple(spec[i] for i in order))
        object.__setattr__(self, "probs", tuple(float(p[i]) for i in order))

    @property
    def mean(self) -> float:
        return float(np.dot(self.spectrum, self.probs))

    @property
    def variance(self) -> float:
        return float(np.dot(self.probs, (np.array(self.spectrum) - self.mean) ** 2))

    def state(self, theta: float) -> np.ndarray:
        return np.sqrt(self.probs) * np.exp(1j * theta * np.array(self.spectrum))


def _family(family) -> ClockFamily:
    if isinstance(family, ClockFamily):
        return family
    spectrum, probs = family
    return ClockFamily(tuple(spectrum), tuple(probs))


def _log_energy(N: int, fam: ClockFamily) -> tuple[int, np.ndarray]:
    return log_energy_array(fam.spectrum, fam.probs, N)


def _support(N: int, fam: ClockFamily) -> np.ndarray:
    e_lo, lw = _log_energy(N, fam)
    return e_lo + np.flatnonzero(np.isfinite(lw))


def _mode(N: int, fam: ClockFamily) -> int:
    # near-ties go to the smallest energy
    e_lo, lw = _log_energy(N, fam)
    return e_lo + int(np.flatnonzero(lw >= lw.max() - MODE_TIE_TOL)[0])


def shift_e0(N: int, M: int, family, rule: str = "mode") -> int:
    """Energy offset of the economical map ``|N, E> -> |M, E + E0>``."""
    fam = _family(family)
    if M < N:
        raise ValueError("need M >= N")
    if rule == "mode":
        return _mode(M, fam) - _mode(N, fam)
    diffs = np.unique(np.subtract.outer(_support(M, fam), _support(N, fam)))
    if rule == "uncentered":
        target = 0.0
    elif rule == "mean":
        target = (M - N) * fam.mean
    else:
        raise ValueError(f"unknown rule {rule!r}; expected one of {E0_RULES}")
    dist = np.abs(diffs - target)
    best = diffs[dist <= dist.min() + 1e-9]
    # tie toward the non-negative side of the target
    return int(best[best >= target].min() if np.any(best >= target) else best.max())


def _log_overlap_terms(N: int, M: int, fam: ClockFamily, rule: str) -> np.ndarray:
    """``log sqrt(p_{N,E} p_{M,E+E0})`` over the support of ``p_N``; raises if a target is missing."""
    e0 = shift_e0(N, M, fam, rule)
    n_lo, lw_n = _log_energy(N, fam)
    m_lo, lw_m = _log_energy(M, fam)
    keep = np.isfinite(lw_n)
    idx = np.flatnonzero(keep) + n_lo + e0 - m_lo
    ok = (idx >= 0) & (idx < lw_m.size)
    if not ok.all() or not np.all(np.isfinite(lw_m[idx])):
        bad = int(n_lo + np.flatnonzero(keep)[~ok | ~np.isfinite(lw_m[np.clip(idx, 0, lw_m.size - 1)])][0])
        raise ValueError(f"energy {bad} + E0={e0} is not in the M={M} spectrum; economical map undefined")
    out = np.full(lw_n.size, -np.inf)
    out[keep] = 0.5 * (lw_n[keep] + lw_m[idx])
    return out


def economical_fidelity(N: int, M: int, family, rule: str = "mode") -> float:
    """``(sum_E sqrt(p_{M,E+E0} p_{N,E}))^2``."""
    fam = _family(family)
    return math.exp(2 * logsumexp(_log_overlap_terms(N, M, fam, rule)))


def success_probability(N: int, family) -> float:
    """Phase-estimation likelihood density ``(sum_E sqrt(p_{N,E}))^2``."""
    if N < 1:
        raise ValueError("need N >= 1")
    _, lw = _log_energy(N, _family(family))
    return math.exp(2 * logsumexp(0.5 * lw))


def average_state_max_eigenvalue(M: int, family) -> float:
    _, lw = _log_energy(M, _family(family))
    return math.exp(lw.max())


def upper_bound(N: int, M: int, family) -> float:
    return average_state_max_eigenvalue(M, family) * success_probability(N, family)


def fidelity_report(N: int, M: int, family, rule: str = "mode") -> FidelityReport:
    return FidelityReport(
        value=economical_fidelity(N, M, family, rule),
        rho_av_max=average_state_max_eigenvalue(M, family),
        p_succ=success_probability(N, family),
    )


def mp_protocol_fidelity(N: int, K: int, M: int, family, rule: str = "mode") -> float:
    """Estimate theta from N copies, prepare K copies, clone K -> M economically.

    ``sum_Delta A(Delta) B(Delta)`` with ``A``, ``B`` the autocorrelations of
    ``a_E = sqrt(p_{N,E})`` and ``b_E = sqrt(p_{K,E} p_{M,E+E0})``.
    """
    fam = _family(family)
    if N < 1 or not 1 <= K <= M:
        raise ValueError("need N >= 1 and 1 <= K <= M")
    _, lw_n = _log_energy(N, fam)
    a = np.exp(0.5 * lw_n)
    b = np.exp(_log_overlap_terms(K, M, fam, rule))
    ca = np.correlate(a, a, "full")
    cb = np.correlate(b, b, "full")
    # both are centred on lag 0; trim the longer one to the shorter
    h = min(ca.size, cb.size) // 2
    mid_a, mid_b = ca.size // 2, cb.size // 2
    return float(np.dot(ca[mid_a - h : mid_a + h + 1], cb[mid_b - h : mid_b + h + 1]))


def naive_mp_fidelity(N: int, M: int, family, rule: str = "mode") -> float:
    return mp_protocol_fidelity(N, M, M, family, rule)


def naive_ratio(N: int, M: int, family, rule: str = "mode") -> float:
    return naive_mp_fidelity(N, M, family, rule) / economical_fidelity(N, M, family, rule)


def asymptotic_fidelity(N: int, M: int) -> float:
    """``sqrt(4MN)/(M+N)``, the same for every Hamiltonian and input state."""
    return fidelity.asymptotic_fidelity(N, M, 1)
