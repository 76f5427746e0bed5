import json
import math

import numpy as np
import pytest

from clonekit import finiteset as fs
from clonekit import oracle
from clonekit.finiteset import StateSet

PAIR = StateSet.uniform([[1, 0], [0.5, math.sqrt(3) / 2]])  # eta = 0.25


def random_set(rng, n, d):
    v = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return StateSet(v, rng.dirichlet(np.ones(n)))


def helstrom_dense(states, N):
    """Helstrom value from full tensor powers."""
    a, b = (oracle._kron_power(s, N) for s in states.states)
    delta = states.priors[0] * np.outer(a, a.conj()) - states.priors[1] * np.outer(b, b.conj())
    return 0.5 * (1 + np.abs(np.linalg.eigvalsh(delta)).sum())


class TestStateSet:
    def test_validation(self):
        with pytest.raises(ValueError):
            StateSet([[1, 0], [1, 0]], [0.5, 0.5])
        with pytest.raises(ValueError):
            StateSet([[1, 0], [0, 2]], [0.5, 0.5])
        with pytest.raises(ValueError):
            StateSet([[1, 0], [0, 1]], [0.7, 0.7])

    def test_json_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        s = random_set(rng, 3, 3)
        path = tmp_path / "set.json"
        path.write_text(json.dumps(s.to_dict()))
        back = StateSet.from_json(path)
        assert np.allclose(back.states, s.states) and np.allclose(back.priors, s.priors)

    def test_from_dict_real_amplitudes(self):
        s = StateSet.from_dict({"states": [[1, 1], [1, -1]], "normalize": True})
        assert s.priors.tolist() == [0.5, 0.5]
        assert fs.pairwise_max_overlap(s) == pytest.approx(0, abs=1e-15)


class TestOverlapAndGram:
    def test_overlap_examples(self):
        assert fs.pairwise_max_overlap(StateSet.uniform(np.eye(2))) == 0
        assert fs.pairwise_max_overlap(PAIR) == pytest.approx(0.25, abs=1e-15)

    def test_overlap_brute_force(self):
        rng = np.random.default_rng(5)
        s = random_set(rng, 3, 4)
        brute = max(abs(np.vdot(s.states[i], s.states[j])) ** 2 for i in range(3) for j in range(3) if i != j)
        assert fs.pairwise_max_overlap(s) == pytest.approx(brute, abs=1e-15)

    def test_gram_examples(self):
        ortho = fs.gram_schmidt_with_bound(StateSet.uniform(np.eye(3)))
        assert np.allclose(np.abs(ortho.vectors), np.eye(3)) and np.all(ortho.distances < 1e-15)
        g = fs.gram_schmidt_with_bound(PAIR)
        assert g.distances[1] == pytest.approx(0.5, abs=1e-12)
        assert g.bound == pytest.approx(math.sqrt(0.25 * fs.ALPHA**2 / (fs.ALPHA - 1)), rel=1e-12)
        assert g.bound == pytest.approx(1.326, abs=1e-3)

    def test_near_orthogonal_random(self):
        rng = np.random.default_rng(9)
        base = np.linalg.qr(rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))[0]
        v = base + 5e-3 * (rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5)))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        s = StateSet.uniform(v)
        assert fs.pairwise_max_overlap(s) <= 1e-3
        g = fs.gram_schmidt_with_bound(s)
        assert np.all(g.distances <= g.bound)

    def test_lemma_property(self):
        rng = np.random.default_rng(12)
        for _ in range(200):
            n = int(rng.integers(1, 6))
            s = random_set(rng, n, int(rng.integers(n, 7)))
            g = fs.gram_schmidt_with_bound(s)
            assert np.allclose(g.vectors.conj() @ g.vectors.T, np.eye(n), atol=1e-10)
            assert np.all(g.distances <= g.bound)

    def test_dependent_rejected(self):
        with pytest.raises(ValueError):
            fs.gram_schmidt_with_bound(StateSet.uniform([[1, 0], [0, 1], [math.sqrt(0.5), math.sqrt(0.5)]]))


class TestDiscrimination:
    def test_examples(self):
        assert fs.discrimination_success(StateSet.uniform(np.eye(2)), 1).value == pytest.approx(1.0)
        assert fs.discrimination_success(PAIR, 1).value == pytest.approx(0.5 * (1 + math.sqrt(0.75)), abs=1e-12)
        assert fs.discrimination_success(PAIR, 2).value == pytest.approx(0.5 * (1 + math.sqrt(0.9375)), abs=1e-12)

    @pytest.mark.parametrize("N", [1, 2, 3])
    def test_helstrom_matches_dense(self, N):
        rng = np.random.default_rng(N)
        s = random_set(rng, 2, 3)
        assert fs.discrimination_success(s, N).value == pytest.approx(helstrom_dense(s, N), abs=1e-12)

    def test_certified_interval(self):
        rng = np.random.default_rng(21)
        for _ in range(40):
            n = int(rng.integers(3, 6))
            r = fs.discrimination_success(random_set(rng, n, int(rng.integers(2, 6))), int(rng.integers(1, 3)))
            assert 0 <= r.gap <= 1e-6
            assert sum(r.povm) == pytest.approx(np.eye(r.povm[0].shape[0]), abs=1e-10)
            assert all(np.linalg.eigvalsh(p).min() > -1e-10 for p in r.povm)

    def test_matches_seesaw(self):
        # guessing the label is a channel into |x>; its optimum is the success probability
        rng = np.random.default_rng(4)
        for n in (2, 3):
            s = random_set(rng, n, 3)
            r = fs.discrimination_success(s, 1)
            ss = oracle.seesaw_optimal_fidelity(oracle.discrimination_operator(s.states, s.priors, 1), restarts=2)
            assert ss.value == pytest.approx(r.value, abs=1e-6)

    def test_worst_case_flag(self):
        rng = np.random.default_rng(8)
        s = random_set(rng, 3, 3)
        avg = fs.discrimination_success(s, 1)
        worst = fs.discrimination_success(s, 1, worst_case=True)
        uniform = fs.discrimination_success(StateSet.uniform(s.states), 1)
        assert worst.value <= uniform.value + 1e-12
        assert worst.upper == pytest.approx(uniform.upper)
        assert worst.value <= avg.upper + 1e-9

    def test_tensor_cap(self):
        with pytest.raises(ValueError):
            fs.discrimination_success(StateSet.uniform(np.eye(4)), 7)


class TestCloningBounds:
    def test_bound_example(self):
        tail = math.sqrt(fs.ALPHA**2 * 0.25**4 / (fs.ALPHA - 1))
        assert fs.cloning_upper_bound(PAIR, 1, 4) == pytest.approx(0.5 * (1 + math.sqrt(0.75)) + tail, abs=1e-12)
        assert fs.cloning_upper_bound(PAIR, 1, 4) == pytest.approx(1.0988, abs=1e-4)

    def test_bound_tends_to_psucc(self):
        p = fs.discrimination_success(PAIR, 1).value
        assert fs.cloning_upper_bound(PAIR, 1, 50) - p < 1e-12

    def test_orthogonal(self):
        s = StateSet.uniform(np.eye(3))
        assert fs.cloning_upper_bound(s, 1, 3) == pytest.approx(1.0)
        for N, M in [(1, 1), (2, 5)]:
            assert fs.naive_mp_fidelity(s, N, M) == pytest.approx(1.0)

    def test_naive_sandwich(self):
        p = fs.discrimination_success(PAIR, 1).value
        v = fs.naive_mp_fidelity(PAIR, 1, 4)
        assert p - 1e-12 <= v <= 1

    def test_naive_tends_to_psucc(self):
        p = fs.discrimination_success(PAIR, 1).value
        assert fs.naive_mp_fidelity(PAIR, 1, 60) == pytest.approx(p, abs=1e-10)

    def test_equivalence_ratio_decays(self):
        rng = np.random.default_rng(31)
        for n in (2, 3):
            s = random_set(rng, n, 3)
            ratios = [fs.equivalence_ratio(s, 1, M) for M in (4, 8, 16, 32)]
            assert all(a > b for a, b in zip(ratios, ratios[1:]))

    def test_worst_case_naive_not_above_average(self):
        rng = np.random.default_rng(2)
        s = StateSet.uniform(random_set(rng, 3, 3).states)
        assert fs.naive_mp_fidelity(s, 1, 3, worst_case=True) <= fs.naive_mp_fidelity(s, 1, 3) + 1e-12

    def test_seesaw_sandwich_small(self):
        rng = np.random.default_rng(17)
        s = random_set(rng, 2, 2)
        for N, M in [(1, 2), (2, 3)]:
            best = oracle.seesaw_optimal_fidelity(oracle.finite_set_fidelity_operator(s.states, s.priors, N, M), restarts=2)
            assert fs.naive_mp_fidelity(s, N, M) <= best.value + 1e-9
            assert best.value <= min(1.0, fs.cloning_upper_bound(s, N, M)) + 1e-9
