"""A unimodular family drifting off to infinity, seen through its first minima."""

from fractions import Fraction

from sadic.exactnum import SConfig
from sadic.instances import diag_flow_family
from sadic.smodule import SModule, covolume
from sadic.theorems import mahler_probe, submodules_up_to

fam = [(i.id, i.module) for i in diag_flow_family(range(1, 9))]
for mid, m in fam:
    print(mid, "covolume", covolume(m))

rep = mahler_probe(fam, Fraction(1, 4))
for mid, iota in rep.members:
    print(mid, "iota_1 =", iota)
print("bounded below:", rep.bounded_below, "offending:", [o[0] for o in rep.offending])

# by contrast only finitely many submodules of I_S^2 have covolume <= B
cfg = SConfig((2,))
for bound in (1, 3, 5, 9, 15):
    print("B =", bound, "submodules:", len(submodules_up_to(cfg, 2, bound)))
same = mahler_probe([SModule.standard(cfg, 2)] * 3, Fraction(1, 4))
print("constant family bounded below:", same.bounded_below)
