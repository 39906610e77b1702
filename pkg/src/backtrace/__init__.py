"""Inverse design for scalar conservation laws with convex flux.

Decide whether a profile is reachable at time ``T``, build initial data
that reach it, describe the whole set of such data, and check every
construction by forward evolution.
"""
from .flux import ConvexFlux, FluxError, SpeedRangeError, burgers, flux_from_dict, polynomial
from .inverse import (
    InverseProblem,
    MembershipError,
    MembershipReport,
    NoFaceError,
    cone_combination,
    construct_extremal_pullback,
    construct_extremal_reverse,
    construct_sharp,
    member_primitive,
    membership_cl,
    membership_hj,
    spoiler_bump,
    spoiler_negative,
    tent_family,
    uniqueness_probe,
)
from .laxhopf import evolve_cl, evolve_cl_profile, evolve_hj, lift_cl_to_hj, s_value
from .oleinik import InadmissibleError, Partition, PMap, build_pmap, check_oleinik, partition
from .oracle import evolve_fv, godunov_step
from .piecewise import PiecewisePrimitive, PiecewiseProfile, integrate, l1_distance, primitive

__version__ = "0.1.0"
