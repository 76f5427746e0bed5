"""Cloning and state estimation for finite sets of pure states.

All N-copy algebra happens in the span of ``{|psi_x>^{(x)N}}``: the Gram matrix
``G_xy = <psi_x|psi_y>^N`` has a square root ``R = Lambda^{1/2} W^dag`` whose
columns are coordinates of the N-copy states, so the work is ``|X|``-dimensional
whatever N is.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

ALPHA = 3 + 2 * math.sqrt(2)
TENSOR_CAP = 4096


class ConvergenceError(RuntimeError):
    """The discrimination refinement left a gap above tolerance; ``result`` holds the best iterate."""

    def __init__(self, message: str, result: "DiscriminationResult"):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True, eq=False)
class StateSet:
    """Unit vectors ``states[x]`` with prior probabilities ``priors[x]``."""

    states: np.ndarray
    priors: np.ndarray

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.states, dtype=complex))
        p = np.asarray(self.priors, dtype=float)
        if s.shape[0] < 1:
            raise ValueError("need at least one state")
        if p.shape != (s.shape[0],):
            raise ValueError("one prior per state")
        if np.any(np.abs(np.linalg.norm(s, axis=1) - 1) > 1e-12):
            raise ValueError("states must have unit norm")
        if np.any(p <= 0) or abs(p.sum() - 1) > 1e-12:
            raise ValueError("priors must be positive and sum to 1")
        object.__setattr__(self, "states", s)
        object.__setattr__(self, "priors", p)
        if s.shape[0] > 1 and _max_overlap(s) > 1 - 1e-12:
            raise ValueError("states must be pairwise distinct")

    @property
    def size(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @classmethod
    def uniform(cls, states) -> "StateSet":
        states = np.atleast_2d(states)
        return cls(states, np.full(states.shape[0], 1 / states.shape[0]))

    @classmethod
    def from_dict(cls, data: dict) -> "StateSet":
        """Schema: ``{"states": [[amp, ...], ...], "priors": [...]}``; an amplitude is a number or ``[re, im]``."""
        rows = [[complex(*a) if isinstance(a, (list, tuple)) else complex(a) for a in row] for row in data["states"]]
        states = np.array(rows)
        if data.get("normalize", False):
            states = states / np.linalg.norm(states, axis=1, keepdims=True)
        priors = data.get("priors") or [1 / len(rows)] * len(rows)
        if "dimension" in data and data["dimension"] != states.shape[1]:
            raise ValueError("declared dimension does not match the amplitudes")
        return cls(states, np.array(priors, dtype=float))

    @classmethod
    def from_json(cls, path) -> "StateSet":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {
            "dimension": self.dim,
            "states": [[[a.real, a.imag] for a in row] for row in self.states],
            "priors": self.priors.tolist(),
        }

    def gram(self, N: int = 1) -> np.ndarray:
        return (self.states.conj() @ self.states.T) ** N


def _max_overlap(states: np.ndarray) -> float:
    g = np.abs(states.conj() @ states.T) ** 2
    np.fill_diagonal(g, 0)
    return float(g.max())


def pairwise_max_overlap(states: StateSet) -> float:
    """``eta = max_{x != y} |<psi_x|psi_y>|^2``."""
    if states.size < 2:
        raise ValueError("need at least two states")
    return _max_overlap(states.states)


def lemma_bound(size: int, eta: float) -> float:
    """``sqrt(alpha^|X| eta / (alpha - 1))`` with ``alpha = 3 + 2 sqrt 2``."""
    return math.sqrt(ALPHA**size * eta / (ALPHA - 1))


@dataclass(frozen=True, eq=False)
class GramResult:
    vectors: np.ndarray
    distances: np.ndarray
    bound: float
    eta: float


def gram_schmidt_with_bound(states: StateSet, tol: float = 1e-10) -> GramResult:
    """Orthonormalize in input order; distances are ``sqrt(1 - |<psi_x|gamma_x>|^2)``.

    The distance is computed as the norm of the projection of ``psi_x`` onto
    the earlier vectors, which equals the formula above without its
    cancellation (and is exactly zero for ``x = 0``).
    """
    s = states.states
    if np.linalg.eigvalsh(states.gram()).min() < tol:
        raise ValueError("states are (nearly) linearly dependent")
    gammas = np.zeros_like(s)
    distances = np.zeros(states.size)
    for x, psi in enumerate(s):
        # two projection passes keep the basis orthonormal to machine precision
        perp = psi - gammas[:x].T @ (gammas[:x].conj() @ psi)
        perp = perp - gammas[:x].T @ (gammas[:x].conj() @ perp)
        gammas[x] = perp / np.linalg.norm(perp)
        distances[x] = np.linalg.norm(psi - perp)
    eta = pairwise_max_overlap(states) if states.size > 1 else 0.0
    return GramResult(gammas, distances, lemma_bound(states.size, eta), eta)


@dataclass(frozen=True, eq=False)
class DiscriminationResult:
    """``value`` is a certified lower edge and ``upper`` an upper edge of the optimum."""

    value: float
    upper: float
    povm: tuple[np.ndarray, ...]
    coords: np.ndarray
    iterations: int

    @property
    def gap(self) -> float:
        return self.upper - self.value

    def conditional(self) -> np.ndarray:
        """``P[y | x] = <psi_x^N| Pi_y |psi_x^N>``, shape ``(|X|, |X|)``."""
        r = self.coords
        return np.array([[np.real(r[:, x].conj() @ pi @ r[:, x]) for pi in self.povm] for x in range(r.shape[1])])


def _span_coords(states: StateSet, N: int) -> np.ndarray:
    lam, w = np.linalg.eigh(states.gram(N))
    keep = lam > 1e-14 * lam.max()
    return np.sqrt(lam[keep])[:, None] * w[:, keep].conj().T


def _herm(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def _sqrtm_psd(a: np.ndarray, inverse: bool = False) -> np.ndarray:
    lam, v = np.linalg.eigh(_herm(a))
    lam = np.clip(lam, 0, None)
    if inverse:
        keep = lam > 1e-14 * max(lam.max(), 1e-300)
        return (v[:, keep] / np.sqrt(lam[keep])) @ v[:, keep].conj().T
    return (v * np.sqrt(lam)) @ v.conj().T


def _dual_upper(rhos: list[np.ndarray], povm: tuple[np.ndarray, ...]) -> float:
    y = _herm(sum(r @ p for r, p in zip(rhos, povm)))
    shift = max(0.0, max(float(np.linalg.eigvalsh(r - y).max()) for r in rhos))
    return float(np.real(np.trace(y))) + y.shape[0] * shift


def _discriminate(coords: np.ndarray, priors: np.ndarray, tol: float, max_iter: int) -> DiscriminationResult:
    rhos = [p * np.outer(coords[:, x], coords[:, x].conj()) for x, p in enumerate(priors)]
    dim = coords.shape[0]
    if len(rhos) == 2:
        lam, v = np.linalg.eigh(_herm(rhos[0] - rhos[1]))
        p0 = v[:, lam > 0] @ v[:, lam > 0].conj().T
        value = 0.5 * (1 + float(np.abs(lam).sum()))
        return DiscriminationResult(value, value, (p0, np.eye(dim) - p0), coords, 0)

    s_inv = _sqrtm_psd(sum(rhos), inverse=True)
    povm = tuple(_herm(s_inv @ r @ s_inv) for r in rhos)
    # pad with the kernel of the average state so the POVM sums to identity
    povm = (povm[0] + np.eye(dim) - sum(povm),) + povm[1:]
    it = 0
    for it in range(1, max_iter + 1):
        value = float(sum(np.real(np.trace(r @ p)) for r, p in zip(rhos, povm)))
        upper = _dual_upper(rhos, povm)
        if upper - value <= tol:
            break
        big_r = _sqrtm_psd(sum(r @ p @ r for r, p in zip(rhos, povm)), inverse=True)
        povm = tuple(_herm(big_r @ r @ p @ r @ big_r) for r, p in zip(rhos, povm))
        povm = (povm[0] + np.eye(dim) - sum(povm),) + povm[1:]
    value = float(sum(np.real(np.trace(r @ p)) for r, p in zip(rhos, povm)))
    result = DiscriminationResult(value, _dual_upper(rhos, povm), povm, coords, it)
    if result.gap > 1e-6:
        raise ConvergenceError(f"discrimination gap {result.gap:.3g} after {it} iterations", result)
    return result


def discrimination_success(
    states: StateSet,
    N: int,
    worst_case: bool = False,
    tol: float = 1e-8,
    max_iter: int = 10_000,
    cap: int = TENSOR_CAP,
) -> DiscriminationResult:
    """Optimal probability of identifying ``x`` from ``|psi_x>^{(x)N}``.

    Two states give the Helstrom value exactly.  More states give a certified
    interval ``[value, upper]``.  With ``worst_case`` the priors are replaced
    by uniform ones, ``value`` becomes ``min_x P[x | x]`` under that POVM and
    ``upper`` the uniform-prior optimum, which bounds any worst-case success.
    """
    if N < 1:
        raise ValueError("need N >= 1")
    if states.dim**N > cap:
        raise ValueError(f"d_H^N = {states.dim ** N} exceeds cap {cap}")
    coords = _span_coords(states, N)
    priors = np.full(states.size, 1 / states.size) if worst_case else states.priors
    res = _discriminate(coords, priors, tol, max_iter)
    if not worst_case:
        return res
    worst = float(np.diag(res.conditional()).min())
    return DiscriminationResult(worst, res.upper, res.povm, coords, res.iterations)


def cloning_upper_bound(states: StateSet, N: int, M: int, worst_case: bool = False, **kwargs) -> float:
    """``p_succ^{(N)} + sqrt(alpha^|X| eta^M / (alpha - 1))``, unclamped; uses the upper edge of ``p_succ``."""
    if M < N:
        raise ValueError("need M >= N")
    p = discrimination_success(states, N, worst_case, **kwargs).upper
    return p + lemma_bound(states.size, pairwise_max_overlap(states) ** M)


def naive_mp_fidelity(states: StateSet, N: int, M: int, worst_case: bool = False, **kwargs) -> float:
    """Guess ``y`` with the optimal POVM, output ``|psi_y>^{(x)M}``.

    ``sum_{x,y} p_x P[y|x] |<psi_x|psi_y>|^{2M}``, or its minimum over x.
    """
    if M < 1:
        raise ValueError("need M >= 1")
    res = discrimination_success(states, N, worst_case, **kwargs)
    overlap = np.abs(states.gram()) ** (2 * M)
    per_state = np.sum(res.conditional() * overlap, axis=1)
    if worst_case:
        return float(per_state.min())
    return float(states.priors @ per_state)


def equivalence_ratio(states: StateSet, N: int, M: int, **kwargs) -> float:
    """``(bound - naive) / bound``; vanishes as M grows when cloning reduces to estimation."""
    bound = cloning_upper_bound(states, N, M, **kwargs)
    return (bound - naive_mp_fidelity(states, N, M, **kwargs)) / bound
