"""How much fidelity the naive estimate-and-prepare strategy loses, per family.

The ratio F_naive / F_econ tends to 2^(-f/2) for a family with f parameters.
"""

import math

from clonekit import clock, entangled, multiphase
from clonekit.clock import ClockFamily
from clonekit.multiphase import MultiphaseFamily

families = {
    "multiphase d=2": (lambda M: multiphase.naive_ratio(1, M, MultiphaseFamily((0.5, 0.5))), 2 ** -0.5),
    "multiphase d=3": (lambda M: multiphase.naive_ratio(1, M, MultiphaseFamily((1 / 3,) * 3)), 0.5),
    "clock {0,1,2}": (lambda M: clock.naive_ratio(1, M, ClockFamily((0, 1, 2), (0.25, 0.5, 0.25))), 2 ** -0.5),
    "entangled": (lambda M: entangled.naive_ratio(1, M + 1), 8 ** -0.5),
}

print(f"{'family':<16}" + "".join(f"{'M=' + str(M):>10}" for M in (16, 64, 256)) + f"{'limit':>10}")
for name, (ratio, limit) in families.items():
    print(f"{name:<16}" + "".join(f"{ratio(M):10.4f}" for M in (16, 64, 256)) + f"{limit:10.4f}")

# an intermediate number of prepared copies recovers the optimum
fam = MultiphaseFamily((0.5, 0.5))
for M in (64, 256, 1024):
    K = math.ceil(M ** (2 / 3) - 1e-9)
    ratio = multiphase.mp_protocol_fidelity(1, K, M, fam) / multiphase.economical_fidelity(1, M, fam)
    print(f"multiphase d=2, M={M}: K={K} prepared copies reach {ratio:.3f} of the optimum")
