"""Forward solvers built on the Lax-Hopf variational formula.

For a datum ``u0`` with primitive ``U0`` the entropy solution is
``u(t, x) = g((x - y*)/t)`` where ``y*`` minimizes

    s(t, x, y) = t f*((x - y)/t) + U0(y),

and the viscosity solution of ``U_t + f(U_x) = 0`` is ``min_y s``.  Since
``ds/dy = u0(y) - g((x - y)/t)`` on every piece of ``u0``, the global
minimum is attained at a knot, at an end of the search window, or at a
stationary point inside a piece, so the minimization is exact up to root
finding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from .flux import ConvexFlux
from .piecewise import PiecewisePrimitive, PiecewiseProfile

__all__ = [
    "VariationalState",
    "s_value",
    "minimize",
    "evolve_cl",
    "evolve_hj",
    "evolve_cl_profile",
    "lift_cl_to_hj",
]

SUBSAMPLES = 64
TIE_TOL = 1e-11
ROOT_TOL = 1e-12
LOCAL_MIN_TOL = 1e-9
CANDIDATE_BUDGET = 2_000_000


@dataclass(frozen=True)
class VariationalState:
    t: float
    x: float
    minimizer_y: float
    value_s: float
    state_u: float


def _as_primitive(U0) -> PiecewisePrimitive:
    if isinstance(U0, PiecewisePrimitive):
        return U0
    if isinstance(U0, PiecewiseProfile):
        return U0.primitive(0.0)
    raise TypeError("expected a PiecewiseProfile or PiecewisePrimitive")


def s_value(U0, flux: ConvexFlux, t: float, x, y):
    """``s(t, x, y) = t f*((x - y)/t) + U0(y)``."""
    U0 = _as_primitive(U0)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return t * flux.legendre((x - y) / t) + U0(y)


def _segments(u0: PiecewiseProfile):
    """Pieces of ``u0`` plus the two constant half-lines, as arrays."""
    k = u0.knots
    lo = np.concatenate([[-math.inf], k[:-1], [k[-1]]])
    hi = np.concatenate([[k[0]], k[1:], [math.inf]])
    a = np.concatenate([[u0.ext_left], u0.a, [u0.ext_right]])
    b = np.concatenate([[0.0], u0.b, [0.0]])
    # value at y on segment j is a[j] + b[j] * (y - ref[j])
    ref = np.concatenate([[0.0], k[:-1], [0.0]])
    return lo, hi, a, b, ref


def _live_pairs(lo, hi, yl, yr):
    """``(row, seg)`` for every segment meeting the open window ``]yl, yr[`` of each row."""
    j0 = np.searchsorted(hi, yl, side="right")
    j1 = np.searchsorted(lo, yr, side="left")
    counts = np.maximum(j1 - j0, 0)
    rows = np.repeat(np.arange(yl.size), counts)
    offsets = np.cumsum(counts) - counts
    cols = j0[rows] + np.arange(rows.size) - offsets[rows]
    return rows, cols


def _stationary_points(u0, flux, t, x, yl, yr):
    """Roots of ``u0(y) - g((x - y)/t)`` inside each piece, flattened.

    Returns ``(row, y)`` where ``row`` indexes ``x``.
    """
    lo, hi, a, b, ref = _segments(u0)
    rows, cols = _live_pairs(lo, hi, yl, yr)
    if rows.size == 0:
        return rows, np.empty(0)
    Ls = np.maximum(lo[cols], yl[rows])
    Rs = np.minimum(hi[cols], yr[rows])
    xs = x[rows]
    aa, bb, rr = a[cols], b[cols], ref[cols]
    if flux.quadratic is not None:
        c = 1.0 / (2 * flux.quadratic * t)
        denom = bb + c
        with np.errstate(divide="ignore", invalid="ignore"):
            y = (c * xs - aa + bb * rr) / denom
        ok = (np.abs(denom) > 1e-14) & (y >= Ls) & (y <= Rs)
        return rows[ok], y[ok]

    smin, smax = flux.speed_range

    def h(yv, xv, av, bv, rv):
        lam = np.clip((xv - yv) / t, smin, smax)
        return av + bv * (yv - rv) - flux.g(lam)

    # dh/dy = b + g'/t with 1/max f'' <= g' <= 1/min f''; outside that band h is
    # monotone and the two ends bracket the only possible root
    band = (bb + 1.0 / (1.01 * t * flux.curvature_ceiling) <= 0) & (bb + 1.0 / (0.99 * t * flux.convexity_floor) >= 0)
    # long pieces get SUBSAMPLES cells; a piece of length l gets about
    # SUBSAMPLES * l, since a root pair hidden inside a cell of width d moves
    # the minimum of s by O(d**3)
    want = np.ceil(np.log2(np.maximum(1.0, SUBSAMPLES * (Rs - Ls))))
    nsub = np.where(band, np.minimum(SUBSAMPLES, 2.0 ** want), 1).astype(int)
    found_r, found_y = [], []
    for level in np.unique(nsub):
        mask = nsub == level
        nsub_here = int(level)
        frac = np.linspace(0.0, 1.0, nsub_here + 1)
        L_, R_ = Ls[mask], Rs[mask]
        x_, a_, b_, r_ = xs[mask], aa[mask], bb[mask], rr[mask]
        grid = L_[:, None] + frac[None, :] * (R_ - L_)[:, None]
        hv = h(grid, x_[:, None], a_[:, None], b_[:, None], r_[:, None])
        change = (hv[:, :-1] * hv[:, 1:] <= 0) & ~((hv[:, :-1] == 0) & (hv[:, 1:] == 0))
        bi, bj = np.nonzero(change)
        if bi.size == 0:
            continue
        yl_b, yr_b = grid[bi, bj], grid[bi, bj + 1]
        hl = hv[bi, bj]
        xb, ab, bb_, rb = x_[bi], a_[bi], b_[bi], r_[bi]
        for _ in range(100):
            if np.all(yr_b - yl_b <= ROOT_TOL * np.maximum(1.0, np.abs(yl_b))):
                break
            ym = 0.5 * (yl_b + yr_b)
            hm = h(ym, xb, ab, bb_, rb)
            same = hm * hl > 0
            yl_b = np.where(same, ym, yl_b)
            hl = np.where(same, hm, hl)
            yr_b = np.where(same, yr_b, ym)
        found_r.append(rows[mask][bi])
        found_y.append(0.5 * (yl_b + yr_b))
    if not found_r:
        return np.empty(0, dtype=int), np.empty(0)
    return np.concatenate(found_r), np.concatenate(found_y)


def minimize(U0, flux: ConvexFlux, t: float, xs):
    """Global minimization of ``y -> s(t, x, y)`` at every ``x``.

    Returns ``(y_min, y_max, s_min)``: the smallest and largest global
    minimizers (minimal / maximal backward characteristics) and the value.
    """
    if not t > 0:
        raise ValueError("t must be positive; the t = 0 solution is the datum itself")
    U0 = _as_primitive(U0)
    u0 = U0.profile
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    umin, umax = u0.value_bounds()
    smin, smax = float(flux.df(umin)), float(flux.df(umax))
    lo_seg, hi_seg = _segments(u0)[:2]
    # cost per x is the number of pieces inside its search window
    cost = np.searchsorted(lo_seg, xs - t * smin) - np.searchsorted(hi_seg, xs - t * smax, side="right") + 3
    per = SUBSAMPLES + 1 if flux.quadratic is None else 4
    cum = np.cumsum(cost * per)
    cuts = [0]
    while cuts[-1] < xs.size:
        done = cuts[-1]
        base = cum[done - 1] if done else 0
        nxt = int(np.searchsorted(cum, base + CANDIDATE_BUDGET, side="right"))
        cuts.append(min(xs.size, max(nxt, done + 1)))
    y_min = np.empty_like(xs)
    y_max = np.empty_like(xs)
    s_min = np.empty_like(xs)
    knots = u0.knots
    for start, stop in zip(cuts[:-1], cuts[1:]):
        x = xs[start:stop]
        m = x.size
        yl = x - t * smax
        yr = x - t * smin
        rows = [np.arange(m), np.arange(m)]
        ys = [yl, yr]
        kinds = [np.full(m, 1), np.full(m, -1)]
        k0 = np.searchsorted(knots, yl, side="left")
        k1 = np.searchsorted(knots, yr, side="right")
        cnt = k1 - k0
        kr = np.repeat(np.arange(m), cnt)
        kc = k0[kr] + np.arange(kr.size) - (np.cumsum(cnt) - cnt)[kr]
        rows.append(kr)
        ys.append(knots[kc])
        kinds.append(np.zeros(kr.size, dtype=int))
        sr, sy = _stationary_points(u0, flux, t, x, yl, yr)
        rows.append(sr)
        ys.append(sy)
        kinds.append(np.full(sr.size, 2))
        row = np.concatenate(rows)
        y = np.concatenate(ys)
        kind = np.concatenate(kinds)
        lam = np.clip((x[row] - y) / t, smin, smax)
        s = t * flux.legendre(lam) + U0(y)
        # ds/dy = u0(y) - g(lam): a knot or window end counts as a minimizer
        # only if s does not decrease away from it, so knots sitting next to
        # an interior minimum cannot win ties
        state = flux.g(lam)
        slack = LOCAL_MIN_TOL * np.maximum(1.0, np.abs(state))
        left_ok = (kind == 1) | (kind == 2) | (u0.eval(y, "left") - state <= slack)
        right_ok = (kind == -1) | (kind == 2) | (u0.eval(y, "right") - state >= -slack)
        local = left_ok & right_ok
        best = np.full(m, np.inf)
        np.minimum.at(best, row, s)
        best_local = np.full(m, np.inf)
        np.minimum.at(best_local, row[local], s[local])
        # fall back to all candidates wherever the filter emptied a row
        fallback = ~np.isfinite(best_local)
        local = local | fallback[row]
        tie = local & (s <= best[row] + TIE_TOL * np.maximum(1.0, np.abs(best[row])))
        lo_y = np.full(m, np.inf)
        hi_y = np.full(m, -np.inf)
        np.minimum.at(lo_y, row[tie], y[tie])
        np.maximum.at(hi_y, row[tie], y[tie])
        y_min[start:stop] = lo_y
        y_max[start:stop] = hi_y
        s_min[start:stop] = best
    return y_min, y_max, s_min


def _states(flux, u0, t, x, y):
    umin, umax = u0.value_bounds()
    lam = np.clip((x - y) / t, float(flux.df(umin)), float(flux.df(umax)))
    return flux.g(lam)


def variational_state(U0, flux, t, x) -> VariationalState:
    U0 = _as_primitive(U0)
    y0, _, s = minimize(U0, flux, t, [x])
    u = _states(flux, U0.profile, t, np.array([x]), y0)
    return VariationalState(float(t), float(x), float(y0[0]), float(s[0]), float(u[0]))


def evolve_cl(u0: PiecewiseProfile, flux: ConvexFlux, t: float, xs):
    """Entropy solution at time ``t``: ``(left, right)`` one-sided values at ``xs``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    y_min, y_max, _ = minimize(u0.primitive(0.0), flux, t, xs)
    return _states(flux, u0, t, xs, y_min), _states(flux, u0, t, xs, y_max)


def evolve_hj(U0, flux: ConvexFlux, t: float, xs):
    """Viscosity solution ``U(t, x) = min_y s(t, x, y)`` at ``xs``."""
    _, _, s = minimize(U0, flux, t, xs)
    return s


def evolve_cl_profile(
    u0: PiecewiseProfile,
    flux: ConvexFlux,
    t: float,
    lo: float,
    hi: float,
    dx: float = 1e-3,
    area_tol: float = 1e-13,
    value_tol: float = 1e-7,
    max_depth: int = 48,
    collapse_width: float = 1e-9,
) -> PiecewiseProfile:
    """Entropy solution at time ``t`` on ``[lo, hi]`` as a piecewise-linear profile.

    Starts from a uniform grid and bisects every cell whose interpolant
    misses the solution at a quarter point by more than ``value_tol`` and by
    more than ``area_tol / h``, down to width ``collapse_width``.  Shocks are
    thereby located to within ``collapse_width``, while smooth curvature
    below ``value_tol`` is left to the linear interpolant.
    """
    n = max(1, int(math.ceil((hi - lo) / dx - 1e-9)))
    nodes = np.linspace(lo, hi, n + 1)
    left, right = evolve_cl(u0, flux, t, nodes)
    known_x = [nodes]
    known_l = [left]
    known_r = [right]
    xa, xb = nodes[:-1], nodes[1:]
    ra, lb = right[:-1], left[1:]
    # cells below collapse_width end up as a single jump node anyway
    min_width = max(collapse_width, 1e-14 * max(1.0, abs(lo), abs(hi)))
    for _ in range(max_depth):
        if xa.size == 0:
            break
        h = xb - xa
        q = xa[:, None] + h[:, None] * np.array([0.25, 0.5, 0.75])[None, :]
        ql, qr = evolve_cl(u0, flux, t, q.ravel())
        ql = ql.reshape(q.shape)
        qr = qr.reshape(q.shape)
        interp = ra[:, None] + (lb - ra)[:, None] * np.array([0.25, 0.5, 0.75])[None, :]
        err = np.maximum(np.abs(ql - interp), np.abs(qr - interp)).max(axis=1)
        bad = (err > value_tol) & (err * h > area_tol) & (h > min_width)
        if not bad.any():
            break
        m = 0.5 * (xa + xb)[bad]
        ml, mr = ql[bad, 1], qr[bad, 1]
        known_x.append(m)
        known_l.append(ml)
        known_r.append(mr)
        xa = np.concatenate([xa[bad], m])
        xb = np.concatenate([m, xb[bad]])
        ra = np.concatenate([ra[bad], mr])
        lb = np.concatenate([ml, lb[bad]])
    xs = np.concatenate(known_x)
    order = np.argsort(xs, kind="stable")
    xs = xs[order]
    lv = np.concatenate(known_l)[order]
    rv = np.concatenate(known_r)[order]
    keep = np.concatenate([[True], np.diff(xs) > 0])
    xs, lv, rv = xs[keep], lv[keep], rv[keep]
    # a bisected shock leaves a cluster of sliver cells; turn each into one jump node
    gap = np.diff(xs) <= min_width
    if gap.any():
        starts = np.concatenate([[True], ~gap])
        first = np.nonzero(starts)[0]
        last = np.concatenate([first[1:] - 1, [xs.size - 1]])
        xs = 0.5 * (xs[first] + xs[last])
        lv, rv = lv[first], rv[last]
    prof = PiecewiseProfile.from_nodes(xs, lv, rv)
    return prof.simplify(1e-12)


def _path(gamma, lip_max: float):
    """Normalize ``gamma`` to ``(position(tau), velocity(tau))`` callables."""
    if callable(gamma):
        h = 1e-6

        def vel(tau):
            tau = np.asarray(tau, dtype=float)
            return (gamma(tau + h) - gamma(np.maximum(tau - h, 0.0))) / (tau + h - np.maximum(tau - h, 0.0))

        return gamma, vel
    if np.ndim(gamma) == 0:
        x0 = float(gamma)
        return (lambda tau: np.full(np.shape(tau), x0)), (lambda tau: np.zeros(np.shape(tau)))
    times, pos = (np.asarray(v, dtype=float) for v in gamma)
    if times.ndim != 1 or times.shape != pos.shape or times.size < 2:
        raise ValueError("path samples must be two equal-length 1D arrays")
    dt = np.diff(times)
    if np.any(dt <= 0):
        raise ValueError("path sample times must be strictly increasing")
    speed = np.diff(pos) / dt
    if not np.all(np.isfinite(speed)) or np.max(np.abs(speed)) > lip_max:
        raise ValueError(f"path is not Lipschitz (slope above {lip_max:g})")

    def where(tau):
        return np.interp(tau, times, pos)

    def vel(tau):
        idx = np.clip(np.searchsorted(times, tau, side="right") - 1, 0, speed.size - 1)
        return speed[idx]

    return where, vel


def lift_cl_to_hj(
    u0: PiecewiseProfile,
    flux: ConvexFlux,
    t: float,
    xs,
    gamma=0.0,
    c: float = 0.0,
    dt: float = 1e-3,
    lip_max: float = 1e6,
) -> np.ndarray:
    """Potential built from the conservation-law solution along a path.

    ``U(t, x) = int_{gamma(t)}^x u(t) + int_0^t (gamma' u - f(u))(tau, gamma(tau)) dtau + c``,
    the time integral by composite Simpson with step about ``dt``.  ``gamma``
    is a constant, a callable or ``(times, positions)`` samples.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    where, vel = _path(gamma, lip_max)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    g_t = float(where(t))
    lo = min(xs.min(), g_t) - 1.0
    hi = max(xs.max(), g_t) + 1.0
    ut = evolve_cl_profile(u0, flux, t, lo, hi, dx=min(1e-2, (hi - lo) / 200))
    space = ut.integrate(g_t, xs)

    n = max(2, int(math.ceil(t / dt)))
    n += n % 2
    taus = np.linspace(0.0, t, n + 1)
    vals = np.empty_like(taus)
    pos = where(taus)
    speed = vel(taus)
    vals[0] = speed[0] * u0(pos[0]) - flux.f(u0(pos[0]))
    for i in range(1, n + 1):
        ul, _ = evolve_cl(u0, flux, taus[i], [pos[i]])
        vals[i] = speed[i] * ul[0] - flux.f(ul[0])
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    timepart = (t / n) / 3.0 * np.sum(w * vals)
    return space + timepart + c
