"""Closed-form fidelities next to brute-force dense channels at small sizes."""

from clonekit import coherent, entangled, multiphase, oracle
from clonekit.coherent import CoherentFamily
from clonekit.entangled import EntangledFamily
from clonekit.multiphase import MultiphaseFamily

fam = MultiphaseFamily((0.2, 0.3, 0.5))
for N, M in [(1, 2), (2, 3), (2, 5)]:
    ch = oracle.DenseChannel.from_isometry(multiphase.economical_isometry(N, M, fam).matrix())
    q = oracle.fidelity_by_quadrature(ch, fam, N, M)
    print(f"multiphase {N}->{M}: closed form {multiphase.economical_fidelity(N, M, fam):.12f}  quadrature {q:.12f}")

for N, M in [(1, 3), (2, 4)]:
    ch = oracle.DenseChannel.from_isometry(oracle.entangled_economical_isometry(N, M))
    q = oracle.fidelity_by_quadrature(ch, EntangledFamily(), N, M)
    print(f"entangled  {N}->{M}: closed form {entangled.economical_fidelity(N, M):.12f}  quadrature {q:.12f}")

omega = oracle.family_fidelity_operator(CoherentFamily.qudit(2), 1, 2, basis="full")
res = oracle.seesaw_optimal_fidelity(omega)
print(f"qubit 1->2 see-saw optimum {res.value:.10f} (dual bound {res.upper:.10f}), Werner {coherent.werner_fidelity(2, 1, 2):.10f}")

uniform = MultiphaseFamily((0.5, 0.5))
econ = oracle.DenseChannel.from_isometry(multiphase.economical_isometry(1, 2, uniform).matrix())
dist = oracle.trace_distance_econ_vs_mp(econ, oracle.mp_channel(uniform, 1, 2))
print(f"trace distance economical vs naive MP: {dist.distance:.4f} >= {dist.bound:.4f}")
