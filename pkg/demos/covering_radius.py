"""Covering radius: bounds from the minima against exact distances to sample targets."""

from fractions import Fraction

from sadic.exactnum import SConfig
from sadic.instances import classical_instances, random_suite
from sadic.smodule import SModule
from sadic.theorems import covering_radius_bounds, covering_radius_estimate, distance_to_module

for inst, radius, hole in classical_instances():
    b = covering_radius_bounds(inst.module)
    print(f"{inst.id:12s} known {radius}  bounds [{b.lower}, {b.upper}]  distance to deep hole",
          distance_to_module(inst.module, hole))

# Z[1/2]: the real and 2-adic parts interact
z2 = SModule.standard(SConfig((2,)), 1)
print("Z[1/2], target (1/2 at inf, 0 at 2):", distance_to_module(z2, {"inf": (Fraction(1, 2),), 2: (0,)}))

for inst in random_suite(5):
    est = covering_radius_estimate(inst.module, samples=6, seed=11, instance=inst.id)
    print(inst.id, "n =", inst.module.n, "S primes", inst.module.config.primes,
          "estimate", est.value, "<= upper", covering_radius_bounds(inst.module).upper, est.within)
