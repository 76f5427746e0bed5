"""Cloning a finite set of states becomes state discrimination as M grows."""

import numpy as np

from clonekit import finiteset, oracle
from clonekit.finiteset import StateSet

rng = np.random.default_rng(7)
v = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
states = StateSet(v / np.linalg.norm(v, axis=1, keepdims=True), [0.5, 0.3, 0.2])

p = finiteset.discrimination_success(states, 1)
print(f"max overlap {finiteset.pairwise_max_overlap(states):.4f}, success probability in [{p.value:.8f}, {p.upper:.8f}]")
print(f"{'M':>3} {'naive':>10} {'see-saw':>10} {'bound':>10} {'ratio':>10}")
for M in (1, 2, 3, 8, 32):
    naive = finiteset.naive_mp_fidelity(states, 1, M)
    bound = finiteset.cloning_upper_bound(states, 1, M)
    best = ""
    if M <= 3:
        omega = oracle.finite_set_fidelity_operator(states.states, states.priors, 1, M)
        best = f"{oracle.seesaw_optimal_fidelity(omega, restarts=2).value:10.6f}"
    print(f"{M:>3} {naive:10.6f} {best:>10} {bound:10.6f} {finiteset.equivalence_ratio(states, 1, M):10.2e}")
