"""Which initial data turn into a single Burgers shock at T = 1?

The target is w = 1 left of 0, 0 right of 0.  Many data reach it: the
compression ramp (the vertex of the set), data that already carry the shock,
and everything in the cone they span.
"""
import numpy as np

from backtrace import (
    InverseProblem,
    PiecewiseProfile,
    burgers,
    construct_sharp,
    evolve_cl_profile,
    l1_distance,
    membership_cl,
    spoiler_negative,
    tent_family,
)
from backtrace.inverse import cone_combination

w = PiecewiseProfile.step(0.0, 1.0, 0.0)
prob = InverseProblem(w, burgers(), 1.0)
print("fan gap on the initial line:", prob.jumps)


def report(name, u0):
    out = evolve_cl_profile(u0, prob.flux, prob.T, -5, 5)
    rep = membership_cl(prob, u0)
    print(f"{name:<12} member={rep.verdict!s:<5} worst margin={rep.worst_margin:+.2e}  "
          f"L1(S_T u0, w)={l1_distance(out, w, -5, 5):.1e}")


ustar = prob.extremal
print("vertex knots:", ustar.knots, "values:", ustar(np.array([-2.0, -0.5, 1.0])))
report("vertex", ustar)
sharp = construct_sharp(prob, 0.0)
report("sharp", sharp)
report("cone 7", cone_combination(prob, sharp, 7.0))
for k, v in enumerate(tent_family(prob, sharp, 3)):
    report(f"tent v{k}", v)
report("spoiler", spoiler_negative(prob, ustar, 0.0, 10))
