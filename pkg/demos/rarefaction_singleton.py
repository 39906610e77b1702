"""A continuous target has exactly one preimage.

w = clamp(x, 0, 1) at T = 1 is a centered rarefaction; the only datum
producing it is the upward step at 0, and nudging it anywhere breaks it.
"""
from backtrace import InverseProblem, PiecewiseProfile, burgers, membership_cl
from backtrace.inverse import spoiler_bump, uniqueness_probe

w = PiecewiseProfile.from_pieces([(0.0, 1.0, 0.0, 1.0)], 0.0, 1.0)
prob = InverseProblem(w, burgers(), 1.0)
print("probe:", uniqueness_probe(prob))
print("datum:", prob.extremal)
for n in (10, 100, 1000):
    rep = membership_cl(prob, spoiler_bump(prob, prob.extremal, n))
    print(f"bump of L1 size 2/{n}: status {rep.status}, worst margin {rep.worst_margin:+.3f}")
