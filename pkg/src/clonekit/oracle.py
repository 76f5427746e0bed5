"""Brute-force dense simulation at small dimensions.

Everything here is deliberately independent of the closed forms: states are
built from factorials or explicit tensor products, group averages use exact
quadrature rules, and channels are explicit Kraus lists.  The closed-form
modules are then checked against these objects.

Choi convention: ``C = sum_ij E(|i><j|) (x) |i><j|`` (output first), so
``Tr_out C = I_in`` and ``F = Tr[C Omega]`` with
``Omega = sum_x p_x psi_x^{(x)M} (x) (psi_x^{(x)N})^T``.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import null_space
from scipy.special import roots_jacobi, roots_legendre

from .clock import ClockFamily
from .coherent import CoherentFamily
from .entangled import EntangledFamily
from .multiphase import MultiphaseFamily
from .symcomb import enumerate_partitions

DIMENSION_CAP = 4096
SEESAW_CAP = 400
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)


# ---------------------------------------------------------------- states


@dataclass(frozen=True, eq=False)
class DenseState:
    amplitudes: np.ndarray
    labels: tuple

    def __post_init__(self):
        if abs(np.linalg.norm(self.amplitudes) - 1) > 1e-12:
            raise ValueError(f"state norm {np.linalg.norm(self.amplitudes)} is not 1")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


def _multinomial_coef(n: Sequence[int]) -> int:
    out = math.factorial(sum(n))
    for k in n:
        out //= math.factorial(k)
    return out


def _check_cap(dim: int) -> None:
    if dim > DIMENSION_CAP:
        raise ValueError(f"dimension {dim} exceeds oracle cap {DIMENSION_CAP}")


def _kron_power(v: np.ndarray, N: int) -> np.ndarray:
    _check_cap(v.size**N)
    out = np.ones(1, dtype=complex)
    for _ in range(N):
        out = np.kron(out, v)
    return out


def build_symmetric_state(family, params, N: int, basis: str = "symmetric") -> DenseState:
    """``|psi_g>^{(x)N}``.

    ``basis="symmetric"`` gives partition amplitudes (multiphase, qudit) or
    energy amplitudes (clock); ``basis="full"`` gives the tensor power.
    Entangled pairs always use the full ``4^N`` space, pairs in order.
    """
    if isinstance(family, EntangledFamily):
        return DenseState(_kron_power(family.state(params), N), ("full", N))
    if isinstance(family, MultiphaseFamily):
        single = family.state(params)
    elif isinstance(family, ClockFamily):
        single = family.state(float(params))
    elif isinstance(family, CoherentFamily):
        single = np.asarray(params, dtype=complex)
        if single.size != family.d:
            raise ValueError("qudit state has the wrong dimension")
    else:
        raise TypeError(f"unsupported family {family!r}")
    if basis == "full":
        return DenseState(_kron_power(single, N), ("full", N))
    if basis != "symmetric":
        raise ValueError(f"unknown basis {basis!r}")
    parts = enumerate_partitions(N, single.size)
    _check_cap(len(parts))
    amps = np.array([math.sqrt(_multinomial_coef(n)) * np.prod(single ** np.array(n)) for n in parts])
    if not isinstance(family, ClockFamily):
        return DenseState(amps, tuple(parts))
    # collapse partitions onto total energy; all partitions with the same energy share the phase
    energies = [int(np.dot(n, family.spectrum)) for n in parts]
    support = sorted(set(energies))
    weight = dict.fromkeys(support, 0.0)
    for e, a in zip(energies, amps):
        weight[e] += abs(a) ** 2
    theta = float(params)
    out = np.array([math.sqrt(weight[e]) * np.exp(1j * e * theta) for e in support])
    return DenseState(out, tuple(support))


# ---------------------------------------------------------------- quadrature


@dataclass(frozen=True, eq=False)
class Quadrature:
    params: list
    weights: np.ndarray


def _uniform_angles(L: int) -> np.ndarray:
    return 2 * np.pi * np.arange(L) / L


def _simplex_rule(d: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform measure on the probability simplex, exact for polynomials of degree ``2n - 1``."""
    if d == 1:
        return np.ones((1, 1)), np.ones(1)
    axes = []
    for k in range(1, d):
        x, w = roots_jacobi(n, d - 1 - k, 0)
        axes.append(((x + 1) / 2, w))
    pts, wts = [], []
    for combo in itertools.product(*(range(n) for _ in axes)):
        rest, p, wt = 1.0, [], 1.0
        for (u, w), i in zip(axes, combo):
            p.append(rest * u[i])
            rest *= 1 - u[i]
            wt *= w[i]
        pts.append(p + [rest])
        wts.append(wt)
    wts = np.array(wts)
    return np.array(pts), wts / wts.sum()


def su2(alpha: float, beta: float, gamma: float) -> np.ndarray:
    rz = lambda a: np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])
    ry = np.array([[math.cos(beta / 2), -math.sin(beta / 2)], [math.sin(beta / 2), math.cos(beta / 2)]])
    return rz(alpha) @ ry @ rz(gamma)


def quadrature(family, degree: int) -> Quadrature:
    """Rule exact for the family's fidelity integrands of total copy number ``degree``."""
    if isinstance(family, MultiphaseFamily):
        L = 2 * degree + 1
        params = [np.array(t) for t in itertools.product(_uniform_angles(L), repeat=family.d - 1)]
        return Quadrature(params, np.full(len(params), 1 / len(params)))
    if isinstance(family, ClockFamily):
        L = 2 * degree * (max(family.spectrum) - min(family.spectrum)) + 1
        return Quadrature(list(_uniform_angles(L)), np.full(L, 1 / L))
    if isinstance(family, CoherentFamily):
        d = family.d
        simplex, sw = _simplex_rule(d, degree // 2 + 2)
        phases = list(itertools.product(_uniform_angles(2 * degree + 1), repeat=d - 1))
        params, weights = [], []
        for p, w in zip(simplex, sw):
            for th in phases:
                params.append(np.sqrt(p) * np.exp(1j * np.concatenate([[0.0], th])))
                weights.append(w / len(phases))
        return Quadrature(params, np.array(weights))
    if isinstance(family, EntangledFamily):
        L = 2 * degree + 1
        x, w = roots_legendre(degree // 2 + 2)
        params, weights = [], []
        for a in _uniform_angles(L):
            for c in _uniform_angles(L):
                for xb, wb in zip(x, w):
                    params.append(su2(a, math.acos(xb), c))
                    weights.append(wb / 2 / L**2)
        return Quadrature(params, np.array(weights))
    raise TypeError(f"unsupported family {family!r}")


# ---------------------------------------------------------------- channels


@dataclass(frozen=True, eq=False)
class DenseChannel:
    kraus: tuple[np.ndarray, ...]
    d_in: int
    d_out: int

    @classmethod
    def from_kraus(cls, ops: Sequence[np.ndarray]) -> "DenseChannel":
        ops = tuple(np.asarray(k, dtype=complex) for k in ops)
        d_out, d_in = ops[0].shape
        return cls(ops, d_in, d_out)

    @classmethod
    def from_isometry(cls, v: np.ndarray, tol: float = 1e-10) -> "DenseChannel":
        """``rho -> V rho V^dag``; a partial isometry is completed by sending its kernel to ``|0>``."""
        v = np.asarray(v, dtype=complex)
        ker = null_space(v, rcond=tol) if v.shape[1] > 0 else np.zeros((0, 0))
        ops = [v]
        if ker.size:
            e0 = np.zeros((v.shape[0], 1))
            e0[0] = 1
            ops += [e0 @ k[None, :].conj() for k in ker.T]
        return cls.from_kraus(ops)

    @classmethod
    def from_choi(cls, choi: np.ndarray, d_in: int, d_out: int, floor: float = 1e-14) -> "DenseChannel":
        lam, vec = np.linalg.eigh((choi + choi.conj().T) / 2)
        keep = lam > floor * max(1.0, lam.max())
        ops = [math.sqrt(l) * v.reshape(d_out, d_in) for l, v in zip(lam[keep], vec[:, keep].T)]
        return cls(tuple(ops), d_in, d_out)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def adjoint(self, x: np.ndarray) -> np.ndarray:
        return sum(k.conj().T @ x @ k for k in self.kraus)

    def choi(self) -> np.ndarray:
        vecs = np.array([k.reshape(-1) for k in self.kraus])
        return vecs.T @ vecs.conj()

    def cptp_violation(self) -> float:
        """``||sum K^dag K - I||`` (complete positivity holds by construction)."""
        s = sum(k.conj().T @ k for k in self.kraus)
        return float(np.linalg.norm(s - np.eye(self.d_in), 2))


def partial_trace_out(choi: np.ndarray, d_in: int, d_out: int) -> np.ndarray:
    return np.einsum("aiaj->ij", choi.reshape(d_out, d_in, d_out, d_in))


# ---------------------------------------------------------------- fidelities


def fidelity_by_quadrature(
    channel: DenseChannel,
    family,
    N: int,
    M: int,
    basis: str = "symmetric",
    degree: int | None = None,
    output_basis: str | None = None,
) -> float:
    """Average of ``<psi^M| C(psi^N psi^N^dag) |psi^M>`` over the family's measure."""
    rule = quadrature(family, degree or N + M)
    total = 0.0
    for g, w in zip(rule.params, rule.weights):
        psi_n = build_symmetric_state(family, g, N, basis).amplitudes
        psi_m = build_symmetric_state(family, g, M, output_basis or basis).amplitudes
        out = channel.apply(np.outer(psi_n, psi_n.conj()))
        total += w * np.real(psi_m.conj() @ out @ psi_m)
    return float(total)


@dataclass(frozen=True, eq=False)
class FidelityOperator:
    matrix: np.ndarray
    d_in: int
    d_out: int

    def __post_init__(self):
        if self.matrix.shape != (self.d_in * self.d_out,) * 2:
            raise ValueError("matrix does not match d_in * d_out")
        if not np.allclose(self.matrix, self.matrix.conj().T, atol=1e-12):
            raise ValueError("fidelity operator must be Hermitian")

    def value(self, choi: np.ndarray) -> float:
        return float(np.real(np.trace(choi @ self.matrix)))


def fidelity_operator(inputs: Sequence[np.ndarray], outputs: Sequence[np.ndarray], weights: Sequence[float]) -> FidelityOperator:
    """``sum_x w_x |out_x><out_x| (x) (|in_x><in_x|)^T``."""
    d_in, d_out = len(inputs[0]), len(outputs[0])
    omega = np.zeros((d_in * d_out,) * 2, dtype=complex)
    for a, b, w in zip(inputs, outputs, weights):
        v = np.kron(b, np.conj(a))
        omega += w * np.outer(v, v.conj())
    return FidelityOperator((omega + omega.conj().T) / 2, d_in, d_out)


def finite_set_fidelity_operator(states: np.ndarray, priors: Sequence[float], N: int, M: int) -> FidelityOperator:
    """Omega for cloning a finite set, from full dense tensor powers."""
    ins = [_kron_power(np.asarray(s, dtype=complex), N) for s in states]
    outs = [_kron_power(np.asarray(s, dtype=complex), M) for s in states]
    return fidelity_operator(ins, outs, priors)


def discrimination_operator(states: np.ndarray, priors: Sequence[float], N: int) -> FidelityOperator:
    """Omega whose optimal channel value is the optimal guessing probability (output ``|x>``)."""
    ins = [_kron_power(np.asarray(s, dtype=complex), N) for s in states]
    outs = list(np.eye(len(ins)))
    return fidelity_operator(ins, outs, priors)


def family_fidelity_operator(family, N: int, M: int, basis: str = "symmetric") -> FidelityOperator:
    rule = quadrature(family, N + M)
    ins = [build_symmetric_state(family, g, N, basis).amplitudes for g in rule.params]
    outs = [build_symmetric_state(family, g, M, basis).amplitudes for g in rule.params]
    return fidelity_operator(ins, outs, rule.weights)


# ---------------------------------------------------------------- see-saw


@dataclass(frozen=True, eq=False)
class SeesawResult:
    value: float
    upper: float
    channel: DenseChannel
    iterations: int
    converged: bool
    seed: int

    @property
    def gap(self) -> float:
        return self.upper - self.value


def _psd_sqrt_inverse(a: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """``a^{-1/2}`` on the support and the projector onto the kernel."""
    lam, vec = np.linalg.eigh((a + a.conj().T) / 2)
    keep = lam > tol * max(1.0, lam.max())
    inv = (vec[:, keep] / np.sqrt(lam[keep])) @ vec[:, keep].conj().T
    null = vec[:, ~keep] @ vec[:, ~keep].conj().T
    return inv, null


def _normalize_choi(c: np.ndarray, d_in: int, d_out: int) -> np.ndarray:
    inv, null = _psd_sqrt_inverse(partial_trace_out(c, d_in, d_out), 1e-13)
    lift = np.kron(np.eye(d_out), inv)
    return lift @ c @ lift + np.kron(np.eye(d_out) / d_out, null)


def dual_upper_bound(omega: FidelityOperator, choi: np.ndarray) -> float:
    """``Tr Y`` for the feasible dual ``Y = Herm(Tr_out[Omega C]) + t I`` with ``I (x) Y >= Omega``."""
    y = partial_trace_out(omega.matrix @ choi, omega.d_in, omega.d_out)
    y = (y + y.conj().T) / 2
    t = max(0.0, float(np.linalg.eigvalsh(omega.matrix - np.kron(np.eye(omega.d_out), y)).max()))
    return float(np.real(np.trace(y))) + omega.d_in * t


def _seesaw_branch(omega: FidelityOperator, seed: int, tol: float, max_iter: int) -> SeesawResult:
    d_in, d_out = omega.d_in, omega.d_out
    dim = d_in * d_out
    if seed == 0:
        c = np.eye(dim) / d_out
    else:
        g = np.random.default_rng(seed).normal(size=(dim, dim)) + 1j * np.random.default_rng(seed + 10**6).normal(size=(dim, dim))
        c = _normalize_choi(g @ g.conj().T, d_in, d_out)
    om = omega.matrix
    value = omega.value(c)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        c = _normalize_choi(om @ c @ om, d_in, d_out)
        c = (c + c.conj().T) / 2
        new = omega.value(c)
        if abs(new - value) <= tol * max(abs(new), 1e-300):
            value = new
            converged = True
            break
        value = new
    return SeesawResult(value, dual_upper_bound(omega, c), DenseChannel.from_choi(c, d_in, d_out), it, converged, seed)


def seesaw_optimal_fidelity(
    omega: FidelityOperator,
    restarts: int = 8,
    seed: int = 0,
    tol: float = 1e-9,
    max_iter: int = 10_000,
    workers: int = 1,
) -> SeesawResult:
    """Maximize ``Tr[C Omega]`` over channels by the fixed-point iteration ``C <- L Omega C Omega L``.

    ``L = (I (x) lambda^{-1})`` restores ``Tr_out C = I``.  Every iterate is a
    channel, so the value is always a valid lower bound; ``upper`` is a dual
    certificate.  Restarts use seeds ``seed, seed+1, ...``; the best value wins,
    ties going to the lowest seed.
    """
    if omega.d_in * omega.d_out > SEESAW_CAP:
        raise ValueError(f"d_in * d_out = {omega.d_in * omega.d_out} exceeds cap {SEESAW_CAP}")
    seeds = [seed + r for r in range(restarts)]
    run = lambda s: _seesaw_branch(omega, s, tol, max_iter)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, seeds))
    else:
        results = [run(s) for s in seeds]
    best = max(results, key=lambda r: (r.value, -r.seed))
    return SeesawResult(best.value, min(r.upper for r in results), best.channel, best.iterations, best.converged, best.seed)


# ---------------------------------------------------------------- covariance


def _group_action(family, g, N: int, basis: str, labels: tuple) -> np.ndarray:
    """Matrix of ``U_g^{(x)N}`` on the chosen basis."""
    if isinstance(family, EntangledFamily):
        u = np.kron(np.asarray(g), np.eye(2))
        return np.array(_kron_matrix_power(u, N))
    if basis == "full":
        if isinstance(family, CoherentFamily):
            return _kron_matrix_power(np.asarray(g), N)
        if isinstance(family, MultiphaseFamily):
            return _kron_matrix_power(np.diag(np.exp(1j * np.concatenate([[0.0], g]))), N)
        return _kron_matrix_power(np.diag(np.exp(1j * float(g) * np.array(family.spectrum))), N)
    if isinstance(family, MultiphaseFamily):
        th = np.concatenate([[0.0], g])
        return np.diag(np.exp(1j * np.array(labels) @ th))
    if isinstance(family, ClockFamily):
        return np.diag(np.exp(1j * float(g) * np.array(labels)))
    raise ValueError("qudit covariance needs basis='full'")


def _kron_matrix_power(u: np.ndarray, N: int) -> np.ndarray:
    _check_cap(u.shape[0] ** N)
    out = np.ones((1, 1), dtype=complex)
    for _ in range(N):
        out = np.kron(out, u)
    return out


def random_group_element(family, rng: np.random.Generator):
    if isinstance(family, MultiphaseFamily):
        return rng.uniform(0, 2 * np.pi, family.d - 1)
    if isinstance(family, ClockFamily):
        return rng.uniform(0, 2 * np.pi)
    if isinstance(family, (CoherentFamily, EntangledFamily)):
        d = family.d if isinstance(family, CoherentFamily) else 2
        z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        q, r = np.linalg.qr(z)
        q = q * (np.diag(r) / abs(np.diag(r)))
        # SU(d): a global phase would scale N and M copies differently
        return q / np.linalg.det(q) ** (1 / d)
    raise TypeError(f"unsupported family {family!r}")


def random_pure_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def trace_norm(x: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvalsh((x + x.conj().T) / 2)).sum())


def covariance_check(channel: DenseChannel, family, N: int, M: int, samples: int = 20, seed: int = 0, basis: str = "symmetric") -> float:
    """Max of ``||U^M C(rho) U^M^dag - C(U^N rho U^N^dag)||_1`` over random g and pure rho."""
    rng = np.random.default_rng(seed)
    ref = quadrature(family, 1).params[0]
    labels_n = build_symmetric_state(family, ref, N, basis).labels
    labels_m = build_symmetric_state(family, ref, M, basis).labels
    worst = 0.0
    for _ in range(samples):
        g = random_group_element(family, rng)
        un = _group_action(family, g, N, basis, labels_n)
        um = _group_action(family, g, M, basis, labels_m)
        psi = random_pure_state(channel.d_in, rng)
        rho = np.outer(psi, psi.conj())
        lhs = um @ channel.apply(rho) @ um.conj().T
        rhs = channel.apply(un @ rho @ un.conj().T)
        worst = max(worst, trace_norm(lhs - rhs))
    return worst


# ---------------------------------------------------------------- channel builders


def symmetric_projector(d: int, M: int) -> np.ndarray:
    """``P_M`` on ``(C^d)^{(x)M}`` as the average of all permutation operators."""
    dim = d**M
    _check_cap(dim)
    idx = np.arange(dim).reshape((d,) * M)
    proj = np.zeros((dim, dim))
    perms = list(itertools.permutations(range(M)))
    for perm in perms:
        proj[np.arange(dim), np.transpose(idx, perm).reshape(-1)] += 1
    return proj / len(perms)


def werner_channel(d: int, N: int, M: int) -> DenseChannel:
    """``(d_N/d_M) P_M (rho (x) I) P_M`` on the full tensor space, antisymmetric inputs sent to ``|0>``."""
    p_n, p_m = symmetric_projector(d, N), symmetric_projector(d, M)
    d_n, d_m = round(np.trace(p_n)), round(np.trace(p_m))
    ops = []
    for k in range(d ** (M - N)):
        ek = np.zeros((d ** (M - N), 1))
        ek[k] = 1
        ops.append(math.sqrt(d_n / d_m) * p_m @ np.kron(p_n, ek))
    rest = np.eye(d**N) - p_n
    if np.linalg.norm(rest) > 1e-12:
        basis = np.linalg.eigh(rest)[1][:, np.linalg.eigvalsh(rest) > 0.5]
        e0 = np.zeros((d**M, 1))
        e0[0] = 1
        ops += [e0 @ b[None, :].conj() for b in basis.T]
    return DenseChannel.from_kraus(ops)


def _spin_casimir(N: int) -> np.ndarray:
    """``J^2`` of the first qubit of every pair in ``(C^2 (x) C^2)^{(x)N}``."""
    paulis = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1.0, -1.0])]
    dim = 4**N
    total = np.zeros((dim, dim), dtype=complex)
    for s in paulis:
        j = np.zeros((dim, dim), dtype=complex)
        for k in range(N):
            ops = [np.eye(4)] * N
            ops[k] = np.kron(s / 2, np.eye(2))
            term = np.ones((1, 1))
            for o in ops:
                term = np.kron(term, o)
            j += term
        total += j @ j
    return total


def spin_sector_projectors(N: int) -> dict[int, np.ndarray]:
    """Projectors onto total spin ``j`` of the U-side qubits, keyed by ``2j``."""
    lam, vec = np.linalg.eigh(_spin_casimir(N))
    out = {}
    for tj in range(N % 2, N + 1, 2):
        jj = tj / 2 * (tj / 2 + 1)
        sel = np.abs(lam - jj) < 1e-6
        out[tj] = vec[:, sel] @ vec[:, sel].conj().T
    return out


def entangled_economical_isometry(N: int, M: int, seed: int = 0) -> np.ndarray:
    """Map ``P_j psi_U^N / |P_j psi_U^N| -> P_j psi_U^M / |..|`` for every ``j <= N/2``.

    Built by least squares over random orbit samples: ``V = X_M X_N^+``.
    """
    if (M - N) % 2 or M < N:
        raise ValueError("need M >= N with the same parity")
    fam = EntangledFamily()
    rng = np.random.default_rng(seed)
    proj_n, proj_m = spin_sector_projectors(N), spin_sector_projectors(M)
    samples = 4 * (N + 1) ** 2 + 8
    cols_n, cols_m = [], []
    for _ in range(samples):
        u = random_group_element(fam, rng)
        psi_n = build_symmetric_state(fam, u, N).amplitudes
        psi_m = build_symmetric_state(fam, u, M).amplitudes
        for tj, pn in proj_n.items():
            a, b = pn @ psi_n, proj_m[tj] @ psi_m
            cols_n.append(a / np.linalg.norm(a))
            cols_m.append(b / np.linalg.norm(b))
    xn, xm = np.array(cols_n).T, np.array(cols_m).T
    return xm @ np.linalg.pinv(xn, rcond=1e-10)


def energy_shift_isometry(family: ClockFamily, N: int, M: int, e0: int) -> np.ndarray:
    """``|N, E> -> |M, E + e0>`` between the energy bases of ``build_symmetric_state``."""
    ref = quadrature(family, 1).params[0]
    e_n = build_symmetric_state(family, ref, N).labels
    e_m = build_symmetric_state(family, ref, M).labels
    index = {e: i for i, e in enumerate(e_m)}
    v = np.zeros((len(e_m), len(e_n)))
    for i, e in enumerate(e_n):
        if e + e0 not in index:
            raise ValueError(f"energy {e + e0} is not reachable with M={M} copies")
        v[index[e + e0], i] = 1.0
    return v


def entangled_bicovariance_check(v: np.ndarray, N: int, M: int, samples: int = 20, seed: int = 0) -> float:
    """Max of ``||V W_N x - W_M V x||`` with ``W = (U_g (x) U_h)^{(x)copies}`` over random ``g, h``.

    ``x`` is a random unit vector in the span of the N-copy orbit, the
    subspace on which ``V`` is defined.
    """
    fam = EntangledFamily()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        x = sum(rng.normal() * build_symmetric_state(fam, random_group_element(fam, rng), N).amplitudes for _ in range(4))
        x = x / np.linalg.norm(x)
        w = np.kron(random_group_element(fam, rng), random_group_element(fam, rng))
        w_n, w_m = _kron_matrix_power(w, N), _kron_matrix_power(w, M)
        worst = max(worst, float(np.linalg.norm(v @ (w_n @ x) - w_m @ (v @ x))))
    return worst


def mp_channel(
    family,
    N: int,
    M: int,
    prepare: Callable[[object], np.ndarray] | None = None,
    basis: str = "symmetric",
    degree: int | None = None,
    out_dim: int | None = None,
) -> DenseChannel:
    """Measure with ``E_g = w_g rho^{-1/2} psi_g psi_g^dag rho^{-1/2}``, then prepare.

    ``rho = sum_g w_g psi_g psi_g^dag`` is the N-copy average state, so the
    POVM is complete on its support by construction.  ``prepare(g)`` defaults
    to ``psi_g^{(x)M}``.  Inputs outside the support are sent to ``|0>``.
    """
    rule = quadrature(family, degree or N + M)
    prepare = prepare or (lambda g: build_symmetric_state(family, g, M, basis).amplitudes)
    states = [build_symmetric_state(family, g, N, basis).amplitudes for g in rule.params]
    rho = sum(w * np.outer(s, s.conj()) for s, w in zip(states, rule.weights))
    inv, null = _psd_sqrt_inverse(rho, 1e-11)
    ops = []
    for g, s, w in zip(rule.params, states, rule.weights):
        eta = inv @ s
        out = prepare(g)
        ops.append(math.sqrt(w) * np.outer(out, eta.conj()))
    dim_out = out_dim or ops[0].shape[0]
    lam, vec = np.linalg.eigh(null)
    e0 = np.zeros(dim_out)
    e0[0] = 1
    ops += [np.outer(e0, v.conj()) for v in vec[:, lam > 0.5].T]
    return DenseChannel.from_kraus(ops)


# ---------------------------------------------------------------- trace distance


@dataclass(frozen=True, eq=False)
class DistanceResult:
    distance: float
    bound: float
    claimed_bound: float
    state: np.ndarray
    converged: bool

    @property
    def satisfies_bound(self) -> bool:
        return self.distance >= self.bound - 1e-6


def _ascent(a: DenseChannel, b: DenseChannel, psi: np.ndarray, max_iter: int, tol: float) -> tuple[float, np.ndarray, bool]:
    value = -1.0
    for _ in range(max_iter):
        delta = a.apply(np.outer(psi, psi.conj())) - b.apply(np.outer(psi, psi.conj()))
        lam, vec = np.linalg.eigh((delta + delta.conj().T) / 2)
        new = float(np.abs(lam).sum())
        if new <= value + tol:
            return max(new, value), psi, True
        value = new
        s = (vec * np.sign(lam)) @ vec.conj().T
        gen = a.adjoint(s) - b.adjoint(s)
        psi = np.linalg.eigh((gen + gen.conj().T) / 2)[1][:, -1]
    return value, psi, False


def trace_distance_econ_vs_mp(
    econ: DenseChannel,
    mp: DenseChannel,
    restarts: int = 16,
    seed: int = 0,
    max_iter: int = 500,
    tol: float = 1e-13,
) -> DistanceResult:
    """Largest ``||C(psi) - C'(psi)||_1`` over pure inputs, by alternating ascent.

    With ``S = sign(Delta(psi))`` fixed the best ``psi`` is the top eigenvector
    of ``C^dag(S) - C'^dag(S)``, so each round can only increase the distance.
    ``bound = 2(1 - sqrt(1/d_in))``; ``claimed_bound = 2(1 - 1/d_in)`` is
    reported but never asserted.
    """
    if (econ.d_in, econ.d_out) != (mp.d_in, mp.d_out):
        raise ValueError("channels must share input and output dimensions")
    rng = np.random.default_rng(seed)
    best = (-1.0, None, False)
    for _ in range(restarts):
        out = _ascent(econ, mp, random_pure_state(econ.d_in, rng), max_iter, tol)
        if out[0] > best[0]:
            best = out
    d = econ.d_in
    return DistanceResult(best[0], 2 * (1 - math.sqrt(1 / d)), 2 * (1 - 1 / d), best[1], best[2])


__all__ = [name for name in dir() if not name.startswith("_")]
