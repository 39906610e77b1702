"""Initial data reaching a target profile at time ``T``.

Every datum that evolves into ``w`` agrees with ``w`` transported back
along characteristics on the images of the increasing pieces of ``p``;
inside each shock fan ``]p(x-), p(x+)[`` it is only constrained by two
families of integral inequalities.  The vertex of this cone of data is the
datum that fills each fan with the compression wave focusing exactly at the
shock.  This module builds the vertex (two independent ways), the
shock-prolonged member, cone combinations and tent families, the two
membership tests (conservation-law and Hamilton-Jacobi form), and spoilers
that sit arbitrarily close to a member without being one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .flux import ConvexFlux
from .laxhopf import evolve_cl_profile
from .oleinik import (
    DECREASING,
    FLAT,
    InadmissibleError,
    PMap,
    Partition,
    build_pmap,
    check_oleinik,
    partition,
)
from .piecewise import PiecewisePrimitive, PiecewiseProfile

__all__ = [
    "InverseProblem",
    "MembershipReport",
    "NoFaceError",
    "MembershipError",
    "construct_extremal_pullback",
    "construct_extremal_reverse",
    "construct_sharp",
    "membership_cl",
    "membership_hj",
    "hj_offset",
    "member_primitive",
    "cone_combination",
    "face_parameters",
    "tent_family",
    "spoiler_negative",
    "spoiler_bump",
    "uniqueness_probe",
]

N_I = 128
N_V = 64
FACE_GRID = 4096


class NoFaceError(ValueError):
    """The datum is the vertex of the cone, so no tent family passes through it."""


class MembershipError(ValueError):
    """An operation that needs a member of the cone got a non-member."""


class InverseProblem:
    """Target ``w`` at horizon ``T`` for flux ``flux``; must satisfy Oleinik."""

    def __init__(self, target: PiecewiseProfile, flux: ConvexFlux, T: float, tol: float | None = None):
        self.target = target
        self.flux = flux
        self.T = float(T)
        self.pmap: PMap = build_pmap(target, flux, self.T)
        verdict = check_oleinik(self.pmap)
        if not verdict:
            raise InadmissibleError(f"target is not attainable: {verdict.reason}", verdict)
        self.partition: Partition = partition(self.pmap)
        if tol is None:
            tol = 1e-8 if flux.quadratic is not None else 1e-5
        self.tol = float(tol)

    @property
    def W(self) -> PiecewisePrimitive:
        """Target potential, ``int_0^x w``."""
        return self.target.primitive(0.0)

    @cached_property
    def extremal(self) -> PiecewiseProfile:
        return construct_extremal_pullback(self)

    @property
    def jumps(self):
        return self.partition.xii

    def image_window(self) -> tuple[float, float]:
        """Interval of the initial line containing every non-trivial image."""
        k = self.target.knots
        return float(self.pmap(k[0], "left")), float(self.pmap(k[-1], "right"))


# -- the vertex -----------------------------------------------------------------
def _fan_pieces(prob: InverseProblem, xbar: float, ylo: float, yhi: float, dx_out: float):
    flux, T = prob.flux, prob.T
    if flux.quadratic is not None:
        c = 1.0 / (2 * flux.quadratic * T)
        return [(ylo, yhi, c * (xbar - ylo), -c)]
    m = max(2, int(math.ceil((yhi - ylo) / dx_out)) + 1)
    ys = np.linspace(ylo, yhi, m)
    vals = flux.g(np.clip((xbar - ys) / T, *flux.speed_range))
    return [(ys[i], ys[i + 1], vals[i], (vals[i + 1] - vals[i]) / (ys[i + 1] - ys[i])) for i in range(m - 1)]


def _pullback_pieces(prob: InverseProblem, k: int, ylo: float, yhi: float, dx_out: float):
    w, pm = prob.target, prob.pmap
    lo, hi = w.knots[k], w.knots[k + 1]
    a, b = w.a[k], w.b[k]
    if pm.exact:
        s = pm.slope_range[k, 0]
        return [(ylo, yhi, a, b / s)]
    m = max(2, int(math.ceil((yhi - ylo) / dx_out)) + 1)
    xs = np.linspace(lo, hi, m)
    ys = pm(xs)
    ys[0], ys[-1] = ylo, yhi
    vals = a + b * (xs - lo)
    out = []
    for i in range(m - 1):
        if ys[i + 1] - ys[i] > 1e-14:
            out.append((ys[i], ys[i + 1], vals[i], (vals[i + 1] - vals[i]) / (ys[i + 1] - ys[i])))
    return out


def construct_extremal_pullback(prob: InverseProblem, dx_out: float = 1e-3) -> PiecewiseProfile:
    """Vertex datum by transporting ``w`` back along characteristics and filling fans.

    Exactly piecewise linear for quadratic fluxes; otherwise each transported
    or fan piece is resampled at ``dx_out`` and interpolated linearly.
    """
    w, pm = prob.target, prob.pmap
    left, right = w.knot_limits()
    p_left = w.knots - prob.T * prob.flux.df(left)
    p_right = w.knots - prob.T * prob.flux.df(right)
    jump_at = {x: (pl, pr) for x, pl, pr in prob.partition.xii}
    pieces = []
    cursor = float(p_left[0])
    for k in range(w.n_pieces + 1):
        x = float(w.knots[k])
        if x in jump_at:
            pl, pr = jump_at[x]
            pieces += _fan_pieces(prob, x, cursor, pr, dx_out)
            cursor = pr
        if k == w.n_pieces:
            break
        kind = pm.kinds[k]
        if kind == DECREASING:
            raise InadmissibleError("target is not attainable")
        y_end = float(p_left[k + 1])
        if kind == FLAT or y_end - cursor <= 1e-14:
            cursor = max(cursor, y_end)
            continue
        pieces += _pullback_pieces(prob, k, cursor, y_end, dx_out)
        cursor = y_end
    if not pieces:
        return PiecewiseProfile.step(cursor, w.ext_left, w.ext_right)
    return PiecewiseProfile.from_pieces(pieces, w.ext_left, w.ext_right).simplify(1e-12)


def construct_extremal_reverse(prob: InverseProblem, dx_out: float = 1e-3, margin: float = 1.0) -> PiecewiseProfile:
    """Vertex datum by evolving the mirrored target ``xi -> w(-xi)`` and mirroring back."""
    lo, hi = prob.image_window()
    lo -= margin
    hi += margin
    mirrored = prob.target.reflect()
    evolved = evolve_cl_profile(mirrored, prob.flux, prob.T, -hi, -lo, dx=dx_out)
    back = evolved.reflect()
    return PiecewiseProfile(back.knots, back.a, back.b, prob.target.ext_left, prob.target.ext_right)


def _find_jump(prob: InverseProblem, jump_x: float):
    for x, pl, pr in prob.partition.xii:
        if abs(x - jump_x) <= 1e-12 * max(1.0, abs(x)):
            return x, pl, pr
    raise ValueError(f"x = {jump_x!r} is not a downward jump of the target")


def construct_sharp(prob: InverseProblem, jump_x: float) -> PiecewiseProfile:
    """Vertex datum with the shock at ``jump_x`` prolonged back to ``t = 0``."""
    x, pl, pr = _find_jump(prob, jump_x)
    wl = float(prob.target(x, "left"))
    wr = float(prob.target(x, "right"))
    f = prob.flux
    speed = float((f.f(wr) - f.f(wl)) / (wr - wl))
    x_sharp = x - speed * prob.T
    return prob.extremal.splice(pl, pr, PiecewiseProfile.step(x_sharp, wl, wr))


# -- membership -------------------------------------------------------------------
@dataclass(frozen=True)
class ConditionIFailure:
    x: float
    y: float
    side: str
    measured: float
    expected: float
    margin: float


@dataclass(frozen=True)
class ConditionIIFailure:
    x: float
    v: float
    which: str
    margin: float


@dataclass
class MembershipReport:
    verdict: bool
    status: str
    tol: float
    worst_margin: float
    condition_i_failures: list = field(default_factory=list)
    condition_ii_failures: list = field(default_factory=list)
    fan_balance: list = field(default_factory=list)  # (x, residual) per jump
    form: str = "cl"

    def __bool__(self):
        return self.verdict

    @property
    def certified_fail(self) -> bool:
        return self.status == "certified-fail"

    def to_dict(self) -> dict:
        return {
            "form": self.form,
            "verdict": self.verdict,
            "status": self.status,
            "tol": self.tol,
            "worst_margin": self.worst_margin,
            "condition_i_failures": [vars(f) for f in self.condition_i_failures],
            "condition_ii_failures": [vars(f) for f in self.condition_ii_failures],
            "total_fan_balance": [{"x": x, "residual": r} for x, r in self.fan_balance],
        }


def _status(worst: float, tol: float) -> str:
    if worst >= -tol:
        return "pass"
    return "certified-fail" if worst < -10 * tol else "fail"


def _check_window(prob: InverseProblem, u0: PiecewiseProfile) -> tuple[float, float]:
    lo, hi = prob.image_window()
    return min(lo, u0.knots[0]) - 1.0, max(hi, u0.knots[-1]) + 1.0


def _transport_samples(prob: InverseProblem, u0: PiecewiseProfile):
    """Sample points of the transported part: ``(y, sides, expected, x)`` arrays.

    ``sides`` is 0 for both one-sided limits, 1 for the right limit only
    (left end of an image) and -1 for the left limit only.
    """
    lo_w, hi_w = _check_window(prob, u0)
    w, pm = prob.target, prob.pmap
    n = w.n_pieces
    ys, sides, expect, xs = [], [], [], []
    for lo, hi, k in prob.partition.xi:
        a = max(lo, lo_w)
        b = min(hi, hi_w)
        if not b > a:
            continue
        inner = a + (b - a) * (np.arange(N_I) + 0.5) / N_I
        knots = u0.knots[(u0.knots > a) & (u0.knots < b)]
        y = np.concatenate([inner, knots, [a, b]])
        side = np.concatenate([np.zeros(inner.size + knots.size), [1, -1]]).astype(int)
        if k == -1:
            vals = np.full(y.shape, w.ext_left)
            x = pm.invert_on_piece(k, y)
        elif k == n:
            vals = np.full(y.shape, w.ext_right)
            x = pm.invert_on_piece(k, y)
        else:
            x = pm.invert_on_piece(k, y)
            x = np.clip(x, w.knots[k], w.knots[k + 1])
            vals = w.a[k] + w.b[k] * (x - w.knots[k])
        ys.append(y)
        sides.append(side)
        expect.append(vals)
        xs.append(x)
    if not ys:
        return np.empty(0), np.empty(0, dtype=int), np.empty(0), np.empty(0)
    return np.concatenate(ys), np.concatenate(sides), np.concatenate(expect), np.concatenate(xs)


def _v_grid(wr: float, wl: float) -> np.ndarray:
    m = N_V - 2
    j = np.arange(m)
    nodes = 0.5 * (wl + wr) + 0.5 * (wl - wr) * np.cos(np.pi * (2 * j + 1) / (2 * m))
    return np.sort(np.concatenate([[wr], nodes, [wl]]))


def membership_cl(prob: InverseProblem, u0: PiecewiseProfile) -> MembershipReport:
    """Sampled test that ``u0`` evolves into the target (conservation-law form).

    Transported part: both one-sided values of ``u0`` must match ``w``
    transported back.  Fans: both integral inequalities on a Chebyshev grid
    of intermediate states, plus the fan mass balance.
    """
    tol = prob.tol
    f, T, w = prob.flux, prob.T, prob.target
    fails_i, fails_ii, balance = [], [], []
    margins = [0.0]

    y, side, expected, x = _transport_samples(prob, u0)
    for which, mask in (("left", side <= 0), ("right", side >= 0)):
        measured = u0.eval(y[mask], which)
        diff = np.abs(measured - expected[mask])
        if diff.size:
            margins.append(-float(diff.max()))
        for i in np.nonzero(diff > tol)[0]:
            fails_i.append(ConditionIFailure(
                float(x[mask][i]), float(y[mask][i]), which,
                float(measured[i]), float(expected[mask][i]), -float(diff[i]),
            ))

    for xb, pl, pr in prob.partition.xii:
        wl = float(w(xb, "left"))
        wr = float(w(xb, "right"))
        v = _v_grid(wr, wl)
        pos = xb - T * f.df(v)
        phi_v = f.legendre_at_state(v)
        phi_l = float(f.legendre_at_state(wl))
        phi_r = float(f.legendre_at_state(wr))
        m1 = (phi_v - phi_r) - u0.integrate(pos, pr) / T
        m2 = u0.integrate(pl, pos) / T - (phi_l - phi_v)
        for label, m in (("upper", m1), ("lower", m2)):
            margins.append(float(m.min()))
            for i in np.nonzero(m < -tol)[0]:
                fails_ii.append(ConditionIIFailure(float(xb), float(v[i]), label, float(m[i])))
        res = float(u0.integrate(pl, pr) / T - (phi_l - phi_r))
        balance.append((float(xb), res))
        margins.append(-abs(res))
        if abs(res) > tol:
            fails_ii.append(ConditionIIFailure(float(xb), math.nan, "balance", -abs(res)))

    worst = min(margins)
    status = _status(worst, tol)
    return MembershipReport(status == "pass", status, tol, worst, fails_i, fails_ii, balance, "cl")


def hj_offset(prob: InverseProblem, u0: PiecewiseProfile) -> float:
    """Constant ``c`` making ``int_0^x u0 + c`` evolve into the target potential."""
    x_ref = float(prob.target.knots[0]) - 1.0
    y_ref = float(prob.pmap(x_ref))
    lam = (x_ref - y_ref) / prob.T
    return float(prob.W(x_ref) - u0.integrate(0.0, y_ref) - prob.T * prob.flux.legendre(lam))


def member_primitive(prob: InverseProblem, u0: PiecewiseProfile) -> PiecewisePrimitive:
    return u0.primitive(0.0, hj_offset(prob, u0))


def _one_sided_slopes(U0: PiecewisePrimitive, y: np.ndarray, side: int, h_max: float = 1e-3):
    """Richardson-extrapolated one-sided difference quotients of ``U0``.

    ``U0`` is quadratic between knots, so with a step that stays inside one
    piece the extrapolation is exact up to roundoff.
    """
    knots = U0.knots
    if side > 0:
        idx = np.searchsorted(knots, y, side="right")
        nxt = np.where(idx < knots.size, knots[np.minimum(idx, knots.size - 1)], np.inf)
        room = nxt - y
    else:
        idx = np.searchsorted(knots, y, side="left") - 1
        prv = np.where(idx >= 0, knots[np.maximum(idx, 0)], -np.inf)
        room = y - prv
    h = np.minimum(h_max, 0.5 * room) * side
    d1 = (U0(y + h) - U0(y)) / h
    d2 = (U0(y + 0.5 * h) - U0(y)) / (0.5 * h)
    return 2 * d2 - d1


def membership_hj(
    prob: InverseProblem, U0: PiecewisePrimitive, W: PiecewisePrimitive | None = None
) -> MembershipReport:
    """Sampled test that ``U0`` evolves into the potential ``W`` (Hamilton-Jacobi form).

    Uses only values of ``U0``: one-sided difference quotients on the
    transported part, and ``U0(y) + T f*((x - y)/T) >= W(x)`` inside each
    fan with equality at both fan ends.  An anchor point left of every wave
    pins the additive constant.
    """
    if W is None:
        W = prob.W
    tol = prob.tol
    f, T = prob.flux, prob.T
    fails_i, fails_ii, balance = [], [], []
    margins = [0.0]

    y, side, expected, x = _transport_samples(prob, U0.profile)
    for which, sgn, mask in (("left", -1, side <= 0), ("right", 1, side >= 0)):
        measured = _one_sided_slopes(U0, y[mask], sgn)
        diff = np.abs(measured - expected[mask])
        if diff.size:
            margins.append(-float(diff.max()))
        for i in np.nonzero(diff > tol)[0]:
            fails_i.append(ConditionIFailure(
                float(x[mask][i]), float(y[mask][i]), which,
                float(measured[i]), float(expected[mask][i]), -float(diff[i]),
            ))

    x_ref = float(prob.target.knots[0]) - 1.0
    y_ref = float(prob.pmap(x_ref))
    anchor = float(U0(y_ref) + T * f.legendre((x_ref - y_ref) / T) - W(x_ref))
    margins.append(-abs(anchor))
    if abs(anchor) > tol:
        fails_i.append(ConditionIFailure(x_ref, y_ref, "anchor", float(U0(y_ref)), float(W(x_ref)), -abs(anchor)))

    for xb, pl, pr in prob.partition.xii:
        Wx = float(W(xb))
        j = np.arange(N_V)
        inner = 0.5 * (pl + pr) + 0.5 * (pr - pl) * np.cos(np.pi * (2 * j + 1) / (2 * N_V))
        knots = U0.knots[(U0.knots > pl) & (U0.knots < pr)]
        ys = np.concatenate([inner, knots])
        lam = np.clip((xb - ys) / T, *sorted(((xb - pl) / T, (xb - pr) / T)))
        m = U0(ys) + T * f.legendre(lam) - Wx
        margins.append(float(m.min()))
        for i in np.nonzero(m < -tol)[0]:
            fails_ii.append(ConditionIIFailure(float(xb), float(ys[i]), "interior", float(m[i])))
        ends = []
        for label, yy in (("left-end", pl), ("right-end", pr)):
            e = float(U0(yy) + T * f.legendre((xb - yy) / T) - Wx)
            ends.append(e)
            margins.append(-abs(e))
            if abs(e) > tol:
                fails_ii.append(ConditionIIFailure(float(xb), float(yy), label, -abs(e)))
        balance.append((float(xb), ends[1] - ends[0]))

    worst = min(margins)
    status = _status(worst, tol)
    return MembershipReport(status == "pass", status, tol, worst, fails_i, fails_ii, balance, "hj")


# -- the cone ---------------------------------------------------------------------
def cone_combination(prob: InverseProblem, u0: PiecewiseProfile, theta: float) -> PiecewiseProfile:
    """``u* + theta (u0 - u*)`` for a member ``u0`` and ``theta >= 0``."""
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    report = membership_cl(prob, u0)
    if not report:
        raise MembershipError(f"datum is not a member (worst margin {report.worst_margin:.3g})")
    return PiecewiseProfile.combine([prob.extremal, u0], [1.0 - theta, float(theta)])


@dataclass(frozen=True)
class FaceParameters:
    x: float  # target jump whose fan hosts the tents
    y: float  # tent family center
    eta: float  # half width of the tent region
    eps: float  # tent height
    gap: tuple


def _fan_margin(prob, U0, xb, pl, ys):
    f, T = prob.flux, prob.T
    lam = (xb - ys) / T
    base = U0(pl) + T * f.legendre((xb - pl) / T)
    return U0(ys) + T * f.legendre(lam) - base


def face_parameters(prob: InverseProblem, u0: PiecewiseProfile) -> FaceParameters:
    """Locate a fan point where the fan inequality is strict, with room around it.

    ``eps`` is half the largest margin found; ``eta`` is half the width of
    the stretch around the maximizer where the margin stays above ``eps``.
    """
    U0 = u0.primitive(0.0)
    best = None
    for xb, pl, pr in prob.partition.xii:
        ys = np.linspace(pl, pr, FACE_GRID + 1)[1:-1]
        ys = np.union1d(ys, u0.knots[(u0.knots > pl) & (u0.knots < pr)])
        m = _fan_margin(prob, U0, xb, pl, ys)
        i = int(np.argmax(m))
        if best is None or m[i] > best[0]:
            best = (float(m[i]), xb, pl, pr, ys, m, i)
    if best is None or best[0] <= 10 * prob.tol:
        raise NoFaceError("datum is the vertex u_o* of the cone: u_o* is the unique extremal point")
    mmax, xb, pl, pr, ys, m, i = best
    eps = 0.5 * mmax

    def edge(inside, outside):
        for _ in range(80):
            mid = 0.5 * (inside + outside)
            if _fan_margin(prob, U0, xb, pl, np.array([mid]))[0] >= eps:
                inside = mid
            else:
                outside = mid
        return inside

    j = i
    while j > 0 and m[j - 1] >= eps:
        j -= 1
    ya = edge(ys[j], ys[j - 1] if j > 0 else pl)
    j = i
    while j < ys.size - 1 and m[j + 1] >= eps:
        j += 1
    yb = edge(ys[j], ys[j + 1] if j < ys.size - 1 else pr)
    return FaceParameters(float(xb), 0.5 * (ya + yb), 0.5 * (yb - ya), eps, (pl, pr))


def tent_slopes(params: FaceParameters, N: int) -> list[PiecewiseProfile]:
    """Derivatives of the N tents of height ``eps`` tiling ``]y - eta, y + eta]``."""
    w = params.eta / N
    s = params.eps / w
    out = []
    for k in range(1, N + 1):
        yk = params.y + w * (2 * k - 1 - N)
        out.append(PiecewiseProfile(np.array([yk - w, yk, yk + w]), np.array([s, -s]), np.zeros(2), 0.0, 0.0))
    return out


def tent_family(prob: InverseProblem, u0: PiecewiseProfile, N: int) -> list[PiecewiseProfile]:
    """``N + 1`` members averaging to ``u0`` with affinely independent differences."""
    if N < 1:
        raise ValueError("N must be at least 1")
    params = face_parameters(prob, u0)
    slopes = tent_slopes(params, N)
    members = [PiecewiseProfile.combine([u0, *slopes], [1.0] + [1.0] * N)]
    for a_k in slopes:
        members.append(PiecewiseProfile.combine([u0, a_k], [1.0, -1.0]))
    return members


# -- spoilers ---------------------------------------------------------------------
def spoiler_negative(prob: InverseProblem, u0: PiecewiseProfile, jump_x: float, n: int) -> PiecewiseProfile:
    """Lower ``u0`` by ``C`` on ``[p(x-), p(x-) + 1/n]``, breaking the fan inequality."""
    x, pl, _ = _find_jump(prob, jump_x)
    w_left = float(prob.flux.g((x - pl) / prob.T))
    C = u0.sup_norm() - w_left + 1.0
    return PiecewiseProfile.combine([u0, PiecewiseProfile.indicator(pl, pl + 1.0 / n)], [1.0, -C])


def spoiler_height(prob: InverseProblem, u0: PiecewiseProfile, jump_x: float) -> float:
    x, pl, _ = _find_jump(prob, jump_x)
    return u0.sup_norm() - float(prob.flux.g((x - pl) / prob.T)) + 1.0


def bump_center(prob: InverseProblem, n: int) -> float:
    """A point of the transported part at distance more than ``1/n`` from its ends."""
    r = 1.0 / n
    best = None
    for lo, hi, _ in prob.partition.xi:
        if math.isfinite(lo) and math.isfinite(hi) and hi - lo > 2.5 * r:
            if best is None or hi - lo > best[1] - best[0]:
                best = (lo, hi)
    if best is not None:
        return 0.5 * (best[0] + best[1])
    lo, hi, _ = prob.partition.xi[0]
    return hi - 1.0 - r


def spoiler_bump(prob: InverseProblem, u0: PiecewiseProfile, n: int, center: float | None = None) -> PiecewiseProfile:
    """``u0 + 1`` on ``]c - 1/n, c + 1/n[`` around a transported point ``c``."""
    if center is None:
        center = bump_center(prob, n)
    r = 1.0 / n
    return PiecewiseProfile.combine([u0, PiecewiseProfile.indicator(center - r, center + r)], [1.0, 1.0])


def uniqueness_probe(prob: InverseProblem) -> str:
    """``"singleton"`` iff the target has no shocks."""
    return "non-singleton" if prob.partition.xii else "singleton"
