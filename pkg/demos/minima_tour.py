"""Successive minima of a few small S-modules, and the volume sandwich they satisfy."""

from fractions import Fraction

from sadic.exactnum import SConfig
from sadic.linalg import SMatrix
from sadic.smodule import SModule, covolume, reduce, successive_minima, points_below
from sadic.theorems import verify_minkowski, verify_precise

F = Fraction

# Z[1/6]^2 with a skewed real part and a rescaled 3-adic part
cfg = SConfig((2, 3))
g = SMatrix(cfg, {
    "inf": [[F(1, 3), F(2)], [F(0), F(5, 2)]],
    2: [[1, 0], [0, 1]],
    3: [[F(1, 9), 0], [1, 1]],
})
m = SModule(cfg, g)
print("covolume", covolume(m))

res = successive_minima(m)
for iota, w in zip(res.minima, res.witnesses):
    print("minimum", iota, "at coefficients", [str(x) for x in w.coeffs])

for rep in (verify_precise(m, res), verify_minkowski(m, res)):
    print(rep.check, rep.lower, "<=", rep.middle, "<=", rep.upper, "ok" if rep.passed else "FAILED")

# rescaling along the witnesses leaves nothing inside the open unit ball
red = reduce(m, res)
print("points of norm < 1 after reduction:", len(points_below(red.module, 1)))
print("content of det g' times witness contents:", red.det_content * red.witness_content)
