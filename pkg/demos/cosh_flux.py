"""Back-tracing with a non-quadratic flux f(u) = cosh(u) - 1.

The two vertex constructions (pull back through characteristics, or evolve
the reflected target forward) are independent and should agree.  A Godunov
run of the result closes the loop.
"""
import numpy as np

from backtrace import ConvexFlux, InverseProblem, PiecewiseProfile, l1_distance
from backtrace.inverse import construct_extremal_reverse, membership_cl
from backtrace.oracle import evolve_fv

flux = ConvexFlux(lambda u: np.cosh(u) - 1.0, np.sinh, np.cosh, state_range=(-2.0, 2.0), name="cosh")
w = PiecewiseProfile.from_pieces([(-1, 0, 0.2, 0.3), (0, 1, -0.6, 0.2)], 0.2, -0.4)
prob = InverseProblem(w, flux, 1.0)
pull = prob.extremal
rev = construct_extremal_reverse(prob)
print("pullback vs reverse L1:", l1_distance(pull, rev, -4, 4))
print("member:", membership_cl(prob, pull).status)
print("Godunov dx=1e-3 vs target L1:", l1_distance(evolve_fv(pull, flux, 1.0, 1e-3, -3, 3), w, -3, 3))
