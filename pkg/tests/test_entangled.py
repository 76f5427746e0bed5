import math
from fractions import Fraction

import numpy as np
import pytest

from clonekit import entangled as ent
from clonekit.symcomb import angular_weight


def grid_mp(N, K, M):
    """Class-angle integral on a uniform grid over [0, 2 pi); exact for trigonometric polynomials."""
    L = 4 * (N + K + M) + 7
    tau = 2 * np.pi * (np.arange(L) + 0.5) / L
    half = tau / 2
    p_n = sum(math.sqrt(angular_weight(N, tj)) * np.sin((tj + 1) * half) / np.sin(half) for tj in range(N % 2, N + 1, 2)) ** 2
    f = sum(
        math.sqrt(angular_weight(K, tj) * angular_weight(M, tj)) / (tj + 1) * np.sin((tj + 1) * half) / np.sin(half)
        for tj in range(K % 2, K + 1, 2)
    ) ** 2
    return float(np.mean(2 * np.sin(half) ** 2 * p_n * f))


class TestDecompose:
    def test_examples(self):
        assert ent.decompose(1).as_dict() == {Fraction(1, 2): {"d": 2, "m": 1, "p": 1}}
        d2 = ent.decompose(2).as_dict()
        assert d2[Fraction(0)]["p"] == Fraction(1, 4) and d2[Fraction(1)]["p"] == Fraction(3, 4)
        d3 = ent.decompose(3).as_dict()
        assert d3[Fraction(1, 2)] == {"d": 2, "m": 2, "p": Fraction(1, 2)}
        assert d3[Fraction(3, 2)] == {"d": 4, "m": 1, "p": Fraction(1, 2)}

    @pytest.mark.parametrize("N", [1, 2, 4, 7, 30, 101])
    def test_consistency(self, N):
        dec = ent.decompose(N)
        assert sum(d * m for d, m in zip(dec.dims, dec.multiplicities)) == 2**N
        assert sum(dec.weights) == 1

    def test_four_copies(self):
        dec = ent.decompose(4)
        assert dec.multiplicities == (2, 3, 1)
        assert dec.weights == (Fraction(2, 16), Fraction(9, 16), Fraction(5, 16))


class TestClosedForms:
    def test_one_to_three_saturates_bound(self):
        assert ent.economical_fidelity(1, 3) == pytest.approx(0.5, abs=1e-15)
        assert ent.upper_bound(1, 3) == pytest.approx(0.5, abs=1e-15)

    def test_two_to_four(self):
        exact = (math.sqrt(1 / 4 * 1 / 8) + math.sqrt(3 / 4 * 9 / 16)) ** 2
        assert ent.economical_fidelity(2, 4) == pytest.approx(exact, abs=1e-14)
        assert ent.economical_fidelity(2, 4) == pytest.approx(0.68277, abs=1e-5)

    def test_n_to_n(self):
        for N in (1, 2, 9):
            assert ent.economical_fidelity(N, N) == pytest.approx(1.0, abs=1e-13)

    def test_parity(self):
        with pytest.raises(ValueError):
            ent.economical_fidelity(1, 2)
        with pytest.raises(ValueError):
            ent.mp_protocol_fidelity(1, 2, 3)

    def test_success_probability(self):
        assert ent.success_probability(1) == pytest.approx(4.0, abs=1e-13)
        assert ent.success_probability(2) == pytest.approx((0.5 + math.sqrt(0.75) * 3) ** 2, abs=1e-12)
        assert ent.success_probability(2) > 1

    def test_max_eigenvalue(self):
        assert ent.average_state_max_eigenvalue(1) == pytest.approx(0.25)
        assert ent.average_state_max_eigenvalue(2) == pytest.approx(0.25)
        assert ent.average_state_max_eigenvalue(4) == pytest.approx(0.125)

    def test_bound_on_grid(self):
        for N in range(1, 5):
            for M in range(N, 41, 2):
                r = ent.fidelity_report(N, M)
                assert r.value <= r.bound + 1e-12

    def test_bound_ratio_tends_to_one(self):
        assert ent.fidelity_report(2, 200).saturation >= 0.9

    def test_asymptotic(self):
        assert ent.asymptotic_fidelity(5, 5) == pytest.approx(1.0)
        assert ent.economical_fidelity(21, 401) == pytest.approx(ent.asymptotic_fidelity(21, 401), rel=0.25)


class TestMeasurePrepare:
    @pytest.mark.parametrize("N,K,M", [(1, 1, 1), (1, 1, 3), (2, 2, 4), (3, 1, 5), (2, 4, 6), (4, 2, 2)])
    def test_uniform_grid_oracle(self, N, K, M):
        assert ent.mp_protocol_fidelity(N, K, M) == pytest.approx(grid_mp(N, K, M), abs=1e-12)

    def test_single_pair_value(self):
        # (8/pi) int_0^pi sin^2(t/2) cos^4(t/2) dt
        assert ent.mp_protocol_fidelity(1, 1, 1) == pytest.approx(0.5, abs=1e-12)

    def test_naive_ratio(self):
        assert ent.naive_ratio(1, 257) == pytest.approx(1 / math.sqrt(8), rel=0.05)

    def test_intermediate_k_follows_asymptotic_law(self):
        # F_K / F_opt -> (M / (M + K))^(3/2), which reaches 0.9 only near M ~ 4000
        ratios = []
        for M in (257, 1025):
            K = ent.matched_k(math.ceil(M ** (2 / 3)), M)
            r = ent.mp_protocol_fidelity(1, K, M) / ent.economical_fidelity(1, M)
            assert r == pytest.approx((M / (M + K)) ** 1.5, rel=0.03)
            ratios.append(r)
        assert ratios[0] < ratios[1]
        assert ratios[0] > ent.naive_ratio(1, 257)

    def test_matched_k(self):
        assert ent.matched_k(40, 257) == 41
        assert ent.matched_k(41, 257) == 41
        assert ent.matched_k(3, 10) == 4
