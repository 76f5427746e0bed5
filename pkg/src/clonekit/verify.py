"""Invariant suite run by ``clonekit verify``.

Each check returns ``(ok, detail)`` where ``detail`` reports the worst
deviation found.  Checks are small enough to finish in about a minute in total.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from . import clock, coherent, entangled, finiteset, multiphase, oracle, symcomb
from .clock import ClockFamily
from .coherent import CoherentFamily
from .entangled import EntangledFamily
from .finiteset import StateSet
from .multiphase import MultiphaseFamily


@dataclass(frozen=True)
class CheckResult:
    module: str
    name: str
    ok: bool
    detail: str
    seconds: float


CHECKS: list[tuple[str, str, Callable[[int], tuple[bool, str]]]] = []


def check(module: str, name: str):
    def register(fn):
        CHECKS.append((module, name, fn))
        return fn

    return register


def _worst(values) -> float:
    return float(max(values, default=0.0))


# ---------------------------------------------------------------- symcomb


@check("symcomb", "distributions normalize to 1e-12")
def _normalization(seed):
    errs = [abs(logsumexp(symcomb.multinomial_distribution(N, p).log_weights)) for N, p in [(30, (0.5, 0.5)), (12, (0.2, 0.3, 0.5))]]
    errs += [abs(logsumexp(symcomb.energy_distribution((0, 1, 3), (0.5, 0.3, 0.2), N).log_weights)) for N in (10, 200)]
    errs += [abs(logsumexp(symcomb.log_angular_weight(N, symcomb.j_ladder(N)))) for N in (7, 200)]
    return _worst(errs) <= 1e-12, f"max |log total| = {_worst(errs):.2e}"


@check("symcomb", "multinomial weights match exact rationals for N <= 20")
def _multinomial_exact(seed):
    worst = 0.0
    for probs in [(0.25, 0.75), (0.125, 0.375, 0.5)]:
        exact_p = [Fraction(p) for p in probs]
        for N in (1, 7, 20):
            for n in symcomb.enumerate_partitions(N, len(probs)):
                exact = Fraction(math.factorial(N))
                for k, p in zip(n, exact_p):
                    exact = exact / math.factorial(k) * p**k
                got = symcomb.multinomial_weight(N, probs, n)
                worst = max(worst, abs(Fraction(got) - exact) / exact)
    return worst <= 1e-12, f"max relative error {float(worst):.2e}"


@check("symcomb", "angular weights sum to 1 for N <= 200")
def _angular_sum(seed):
    bad = [N for N in range(1, 201) if sum(symcomb.angular_weight_exact(N, int(t)) for t in symcomb.j_ladder(N)) != 1]
    return not bad, "exact" if not bad else f"fails at N = {bad[:5]}"


@check("symcomb", "energy distributions form a semigroup under convolution")
def _semigroup(seed):
    worst = 0.0
    for spec, probs in [((0, 1), (0.3, 0.7)), ((0, 1, 3), (0.5, 0.3, 0.2)), ((-1, 2, 5), (0.2, 0.2, 0.6))]:
        for n1, n2 in [(1, 1), (3, 4), (10, 7)]:
            a = symcomb.energy_distribution(spec, probs, n1).as_dict()
            b = symcomb.energy_distribution(spec, probs, n2).as_dict()
            conv: dict[int, float] = {}
            for ea, wa in a.items():
                for eb, wb in b.items():
                    conv[ea + eb] = conv.get(ea + eb, 0.0) + wa * wb
            direct = symcomb.energy_distribution(spec, probs, n1 + n2).as_dict()
            if set(conv) != set(direct):
                return False, f"support mismatch for {spec} at {n1}+{n2}"
            worst = max(worst, max(abs(direct[e] - conv[e]) / direct[e] for e in direct))
    return worst <= 1e-10, f"max relative error {worst:.2e}"


@check("symcomb", "Gaussian bulk error is non-increasing in N")
def _gaussian(seed):
    multi, energy, angular = [], [], []
    for N in (100, 400, 1600):
        parts = symcomb.partition_array(N, 2)
        bulk = np.abs(parts[:, 1] - 0.3 * N) <= 2 * math.sqrt(0.21 * N)
        ex = np.exp(symcomb.log_multinomial(N, (0.7, 0.3), parts[bulk]))
        g = symcomb.gaussian_multinomial(N, (0.7, 0.3), parts[bulk])
        multi.append(np.max(np.abs(ex - g) / g))
        dist = symcomb.energy_distribution((0, 1, 3), (0.5, 0.25, 0.25), N)
        e = np.array(dist.support)
        eb = np.abs(e - N) <= 2 * math.sqrt(1.5 * N)
        g = symcomb.energy_gaussian(N, (0, 1, 3), (0.5, 0.25, 0.25), e[eb])
        energy.append(np.max(np.abs(dist.weights[eb] - g) / g))
        tj = symcomb.j_ladder(N)
        tj = tj[tj <= 2 * math.sqrt(N)]
        g = symcomb.angular_gaussian(N, tj)
        angular.append(np.max(np.abs(np.exp(symcomb.log_angular_weight(N, tj)) - g) / g))
    ok = all(s[0] >= s[1] >= s[2] for s in (multi, energy, angular))
    return ok, "errors " + "; ".join(", ".join(f"{x:.3f}" for x in s) for s in (multi, energy, angular))


# ---------------------------------------------------------------- finiteset


def _random_set(rng, n, d):
    v = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
    return StateSet(v / np.linalg.norm(v, axis=1, keepdims=True), rng.dirichlet(np.ones(n)))


@check("finiteset", "equivalence ratio decays over M = 4, 8, 16, 32")
def _ratio_decay(seed):
    rng = np.random.default_rng(seed)
    for _ in range(5):
        s = _random_set(rng, int(rng.integers(2, 4)), 3)
        r = [finiteset.equivalence_ratio(s, 1, M) for M in (4, 8, 16, 32)]
        if not all(a > b for a, b in zip(r, r[1:])):
            return False, f"ratios {r}"
    return True, "monotone on 5 random sets"


@check("finiteset", "naive MP <= see-saw <= cloning bound")
def _sandwich(seed):
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for n, d, N, M in [(2, 2, 1, 2), (3, 3, 1, 2), (2, 3, 2, 3)]:
        s = _random_set(rng, n, d)
        best = oracle.seesaw_optimal_fidelity(oracle.finite_set_fidelity_operator(s.states, s.priors, N, M), restarts=2, seed=seed)
        lo = finiteset.naive_mp_fidelity(s, N, M) - best.value
        hi = best.value - finiteset.cloning_upper_bound(s, N, M)
        worst = max(worst, lo, hi)
    return worst <= 1e-9, f"max violation {worst:.2e}"


@check("finiteset", "Gram-Schmidt orthonormal and within the overlap bound (1000 sets)")
def _gram(seed):
    rng = np.random.default_rng(seed)
    ortho, excess = 0.0, -np.inf
    for _ in range(1000):
        n = int(rng.integers(1, 6))
        g = finiteset.gram_schmidt_with_bound(_random_set(rng, n, int(rng.integers(n, 7))))
        ortho = max(ortho, float(np.abs(g.vectors.conj() @ g.vectors.T - np.eye(n)).max()))
        excess = max(excess, float(np.max(g.distances - g.bound)))
    return ortho <= 1e-10 and excess <= 0, f"orthonormality {ortho:.2e}, max distance - bound {excess:.2e}"


# ---------------------------------------------------------------- coherent


@check("coherent", "Haar average of psi^M equals P_M / d_M for M <= 5")
def _schur(seed):
    fam = CoherentFamily.qudit(2)
    worst = 0.0
    for M in range(1, 6):
        rule = oracle.quadrature(fam, 2 * M)
        avg = sum(w * oracle.build_symmetric_state(fam, g, M, "full").projector() for g, w in zip(rule.params, rule.weights))
        proj = oracle.symmetric_projector(2, M)
        d_m = coherent.formal_dimension(2, M)
        worst = max(worst, float(np.abs(avg - proj / d_m).max()))
        # the same identity read as completeness of the d_M-weighted POVM
        worst = max(worst, float(np.abs(d_m * avg - proj).max()))
    return worst <= 1e-10, f"max entry error {worst:.2e}"


@check("coherent", "d_N / d_M monotone in N and M")
def _monotone(seed):
    for d in (2, 3, 5):
        for N in range(1, 8):
            col = [coherent.werner_fidelity_exact(d, N, M) for M in range(N, 40)]
            if col != sorted(col, reverse=True):
                return False, f"not non-increasing in M at d={d}, N={N}"
        for M in range(2, 12):
            row = [coherent.werner_fidelity_exact(d, N, M) for N in range(1, M + 1)]
            if row != sorted(row):
                return False, f"not non-decreasing in N at d={d}, M={M}"
    return True, "d = 2, 3, 5"


@check("coherent", "harmonic-oscillator reference is N / M")
def _reference(seed):
    ok = all(coherent.werner_fidelity("harmonic-oscillator", N, M) == N / M for N in (1, 3) for M in (3, 10))
    return ok, "table values"


# ---------------------------------------------------------------- multiphase

MP_FAMILIES = [MultiphaseFamily((0.5, 0.5)), MultiphaseFamily((0.3, 0.7)), MultiphaseFamily((0.2, 0.3, 0.5))]


def _mp_econ_channel(N, M, fam):
    return oracle.DenseChannel.from_isometry(multiphase.economical_isometry(N, M, fam).matrix())


def _defined(fn) -> bool:
    try:
        fn()
    except ValueError:
        return False
    return True


@check("multiphase", "economical map is an isometry and covariant")
def _mp_isometry(seed):
    worst_iso = worst_cov = 0.0
    for fam in MP_FAMILIES:
        for N, M in [(1, 2), (2, 4), (3, 6)]:
            v = multiphase.economical_isometry(N, M, fam).matrix()
            worst_iso = max(worst_iso, float(np.abs(v.T @ v - np.eye(v.shape[1])).max()))
            worst_cov = max(worst_cov, oracle.covariance_check(oracle.DenseChannel.from_isometry(v), fam, N, M, seed=seed))
    return worst_iso == 0 and worst_cov <= 1e-10, f"V^T V - I: {worst_iso:.1e}, covariance {worst_cov:.2e}"


@check("multiphase", "economical fidelity matches quadrature (N <= 4, M <= 6, d <= 3)")
def _mp_econ(seed):
    worst = 0.0
    for fam in MP_FAMILIES:
        for N in range(1, 5):
            for M in range(N, 7):
                if not _defined(lambda: multiphase.economical_isometry(N, M, fam)):
                    continue
                q = oracle.fidelity_by_quadrature(_mp_econ_channel(N, M, fam), fam, N, M)
                worst = max(worst, abs(q - multiphase.economical_fidelity(N, M, fam)))
    return worst <= 1e-10, f"max error {worst:.2e}"


def _mp_protocol_oracle(module, family, N, K, M, v):
    deg = N + K + M
    ch = oracle.mp_channel(family, N, M, prepare=lambda g: v @ oracle.build_symmetric_state(family, g, K).amplitudes, degree=deg)
    return oracle.fidelity_by_quadrature(ch, family, N, M, degree=deg)


@check("multiphase", "MP protocol matches quadrature and stays below the bound")
def _mp_protocol(seed):
    worst, excess = 0.0, -np.inf
    for fam in MP_FAMILIES:
        triples = [(1, 1, 2), (2, 1, 3), (2, 2, 4), (3, 2, 5), (2, 3, 6), (6, 6, 6)] if fam.d == 2 else [(1, 1, 2), (2, 2, 4), (1, 3, 3)]
        for N, K, M in triples:
            if not _defined(lambda: multiphase.economical_isometry(K, M, fam)):
                continue
            v = multiphase.economical_isometry(K, M, fam).matrix()
            f = multiphase.mp_protocol_fidelity(N, K, M, fam)
            worst = max(worst, abs(_mp_protocol_oracle(multiphase, fam, N, K, M, v) - f))
            excess = max(excess, f - multiphase.upper_bound(N, M, fam))
    for fam in MP_FAMILIES[:2]:
        for N in (1, 3, 8):
            for M in (N, 2 * N, 40):
                excess = max(excess, multiphase.economical_fidelity(N, M, fam) - multiphase.upper_bound(N, M, fam))
    return worst <= 1e-10 and excess <= 1e-12, f"max error {worst:.2e}, max excess over bound {excess:.2e}"


# ---------------------------------------------------------------- clock

CLOCK_FAMILIES = [ClockFamily((0, 1, 3), (0.5, 0.3, 0.2)), ClockFamily((0, 1, 2), (0.25, 0.5, 0.25))]


@check("clock", "two-level clock reduces to multiphase d=2 to 1e-12")
def _clock_reduction(seed):
    worst = 0.0
    for p in (0.5, 0.3):
        cf, mf = ClockFamily((0, 1), (1 - p, p)), MultiphaseFamily((1 - p, p))
        for N in range(1, 5):
            worst = max(worst, abs(clock.success_probability(N, cf) - multiphase.success_probability(N, mf)))
            for M in range(N, 65, 3):
                pairs = [
                    (clock.economical_fidelity(N, M, cf), multiphase.economical_fidelity(N, M, mf)),
                    (clock.average_state_max_eigenvalue(M, cf), multiphase.average_state_max_eigenvalue(M, mf)),
                    (clock.upper_bound(N, M, cf), multiphase.upper_bound(N, M, mf)),
                    (clock.naive_mp_fidelity(N, M, cf), multiphase.naive_mp_fidelity(N, M, mf)),
                ]
                worst = max(worst, max(abs(a - b) for a, b in pairs))
    return worst <= 1e-12, f"max difference {worst:.2e}"


@check("clock", "energy distribution is the partition marginal (exact)")
def _clock_marginal(seed):
    for spec, probs in [((0, 1, 3), (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))), ((0, 2), (Fraction(1, 4), Fraction(3, 4)))]:
        for N in range(1, 7):
            marg: dict[int, Fraction] = {}
            for n in symcomb.enumerate_partitions(N, len(spec)):
                w = Fraction(math.factorial(N))
                for k, p in zip(n, probs):
                    w = w / math.factorial(k) * p**k
                e = sum(k * s for k, s in zip(n, spec))
                marg[e] = marg.get(e, 0) + w
            got = symcomb.energy_distribution(spec, [float(p) for p in probs], N).as_dict()
            if set(got) != set(marg) or any(abs(got[e] - float(marg[e])) > 1e-15 for e in marg):
                return False, f"mismatch at {spec}, N={N}"
    return True, "exact within float representation"


@check("clock", "MP protocol matches circle quadrature")
def _clock_protocol(seed):
    worst = 0.0
    for fam in CLOCK_FAMILIES:
        for N, K, M in [(1, 1, 2), (2, 2, 4), (2, 3, 5), (3, 1, 4)]:
            v = oracle.energy_shift_isometry(fam, K, M, clock.shift_e0(K, M, fam))
            worst = max(worst, abs(_mp_protocol_oracle(clock, fam, N, K, M, v) - clock.mp_protocol_fidelity(N, K, M, fam)))
    return worst <= 1e-10, f"max error {worst:.2e}"


# ---------------------------------------------------------------- entangled


@check("entangled", "j-ladder dimensions sum to 2^N (exact)")
def _ent_ladder(seed):
    for N in range(1, 60):
        dec = entangled.decompose(N)
        if sum(d * m for d, m in zip(dec.dims, dec.multiplicities)) != 2**N or sum(dec.weights) != 1:
            return False, f"fails at N={N}"
    return True, "N < 60"


@check("entangled", "economical isometry: V^dag V = P and bi-covariance (N=1, M=3)")
def _ent_isometry(seed):
    v = oracle.entangled_economical_isometry(1, 3, seed=seed)
    proj = sum(oracle.spin_sector_projectors(1).values())
    iso = float(np.abs(v.conj().T @ v - proj).max())
    cov = oracle.entangled_bicovariance_check(v, 1, 3, seed=seed)
    return iso <= 1e-10 and cov <= 1e-10, f"V^dag V - P: {iso:.2e}, bi-covariance {cov:.2e}"


@check("entangled", "economical fidelity matches Haar quadrature")
def _ent_econ(seed):
    worst = 0.0
    for N, M in [(1, 1), (1, 3), (2, 2), (2, 4)]:
        ch = oracle.DenseChannel.from_isometry(oracle.entangled_economical_isometry(N, M, seed=seed))
        worst = max(worst, abs(oracle.fidelity_by_quadrature(ch, EntangledFamily(), N, M) - entangled.economical_fidelity(N, M)))
    return worst <= 1e-8, f"max error {worst:.2e}"


def universality_slope(fidelity: Callable[[int, int], float], Ns=(16, 32, 64), ratio: int = 20) -> float:
    """Through-origin slope of ``log F`` against ``log(4MN/(M+N)^2)`` with ``M = ratio * N``."""
    x = np.array([math.log(4 * ratio * N * N / (N + ratio * N) ** 2) for N in Ns])
    y = np.array([math.log(fidelity(N, ratio * N)) for N in Ns])
    return float(x @ y / (x @ x))


@check("entangled", "universality slope within 10% of 3/2")
def _ent_universal(seed):
    slope = universality_slope(entangled.economical_fidelity)
    return abs(slope - 1.5) <= 0.15, f"slope {slope:.4f}"


# ---------------------------------------------------------------- oracle


@check("oracle", "doubling quadrature nodes changes fidelities by < 1e-12")
def _doubling(seed):
    worst = 0.0
    cases = [(MP_FAMILIES[2], 2, 3), (CLOCK_FAMILIES[0], 2, 4), (CoherentFamily.qudit(2), 1, 2)]
    for fam, N, M in cases:
        ch = oracle.mp_channel(fam, N, M, degree=2 * (N + M))
        a = oracle.fidelity_by_quadrature(ch, fam, N, M)
        b = oracle.fidelity_by_quadrature(ch, fam, N, M, degree=2 * (N + M))
        worst = max(worst, abs(a - b))
    ch = oracle.DenseChannel.from_isometry(oracle.entangled_economical_isometry(1, 3, seed=seed))
    a = oracle.fidelity_by_quadrature(ch, EntangledFamily(), 1, 3)
    b = oracle.fidelity_by_quadrature(ch, EntangledFamily(), 1, 3, degree=8)
    worst = max(worst, abs(a - b))
    return worst < 1e-12, f"max change {worst:.2e}"


@check("oracle", "see-saw channels are CPTP and respect analytic bounds")
def _seesaw(seed):
    cases = [
        (CoherentFamily.qudit(2), 1, 2, "full", coherent.werner_fidelity(2, 1, 2)),
        (MP_FAMILIES[0], 1, 2, "symmetric", multiphase.upper_bound(1, 2, MP_FAMILIES[0])),
        (MP_FAMILIES[1], 1, 3, "symmetric", multiphase.upper_bound(1, 3, MP_FAMILIES[1])),
    ]
    cptp, excess = 0.0, -np.inf
    for fam, N, M, basis, bound in cases:
        res = oracle.seesaw_optimal_fidelity(oracle.family_fidelity_operator(fam, N, M, basis), restarts=2, seed=seed)
        cptp = max(cptp, res.channel.cptp_violation())
        excess = max(excess, oracle.fidelity_by_quadrature(res.channel, fam, N, M, basis) - bound)
    return cptp <= 1e-9 and excess <= 1e-6, f"CPTP violation {cptp:.2e}, max excess {excess:.2e}"


@check("oracle", "see-saw discrimination reproduces Helstrom")
def _helstrom(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(3):
        s = _random_set(rng, 2, 3)
        res = oracle.seesaw_optimal_fidelity(oracle.discrimination_operator(s.states, s.priors, 1), restarts=2, seed=seed)
        worst = max(worst, abs(res.value - finiteset.discrimination_success(s, 1).value))
    return worst <= 1e-6, f"max error {worst:.2e}"


@check("oracle", "trace distance of economical vs MP exceeds 2(1 - sqrt(1/d_in))")
def _distance(seed):
    fam = MP_FAMILIES[0]
    res = oracle.trace_distance_econ_vs_mp(_mp_econ_channel(1, 2, fam), oracle.mp_channel(fam, 1, 2), seed=seed)
    return res.satisfies_bound, f"distance {res.distance:.5f}, bound {res.bound:.5f}, claimed {res.claimed_bound:.5f}"


# ---------------------------------------------------------------- cli


@check("cli", "identical config and seed give byte-identical CSV")
def _cli_deterministic(seed):
    from . import cli

    base = {**cli.DEFAULTS, "seed": seed, "n": "1,2", "m": "2:32:geometric"}
    texts = []
    for family, extra in [("multiphase", {"probs": "0.3,0.7"}), ("clock", {"spectrum": "0,1,3"}), ("entangled", {"m": "3:33:geometric"})]:
        runs = [cli.format_csv(cli.run_family(family, {**base, **extra, "threads": t}), cli.CSV_COLUMNS) for t in (1, 4)]
        if runs[0] != runs[1]:
            return False, f"{family} output depends on the thread count"
        texts.append(runs[0])
    return True, f"{sum(t.count(chr(10)) - 1 for t in texts)} rows reproduced"


# ---------------------------------------------------------------- driver


def run_checks(modules=None, seed: int = 0) -> list[CheckResult]:
    results = []
    for module, name, fn in CHECKS:
        if modules and module not in modules:
            continue
        t0 = time.perf_counter()
        try:
            ok, detail = fn(seed)
        except Exception as exc:  # a crash is a violation, not an abort
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(module, name, bool(ok), detail, time.perf_counter() - t0))
    return results
