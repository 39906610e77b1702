"""The foot-of-characteristic map ``p(x) = x - T f'(w(x))`` and what it decides.

``p`` is nondecreasing exactly when the target satisfies the one-sided
Oleinik bound ``f'(w(x+y)) - f'(w(x)) <= y/T``; then its increasing pieces
and its jump gaps split the initial line into the part where the datum is
forced (transported values) and the part swallowed by shocks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .flux import ConvexFlux
from .piecewise import PiecewiseProfile

__all__ = [
    "PMap",
    "OleinikVerdict",
    "Partition",
    "InadmissibleError",
    "build_pmap",
    "check_oleinik",
    "partition",
]

SLOPE_TOL = 1e-9
SUBGRID = 256

INCREASING = "increasing"
FLAT = "flat"
MIXED = "mixed"
DECREASING = "decreasing"


class InadmissibleError(ValueError):
    """The target violates the Oleinik condition, so no datum reaches it."""

    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


@dataclass(frozen=True, eq=False)
class PMap:
    T: float
    source: PiecewiseProfile
    flux: ConvexFlux
    kinds: tuple
    slope_range: np.ndarray  # (n_pieces, 2) sampled min/max of p'
    jumps: tuple  # (x, p(x-), p(x+)) wherever p is discontinuous

    def __call__(self, x, side: str = "left"):
        x = np.asarray(x, dtype=float)
        return x - self.T * self.flux.df(self.source.eval(x, side))

    @property
    def knots(self) -> np.ndarray:
        return self.source.knots

    @property
    def exact(self) -> bool:
        """``p`` is exactly piecewise linear (quadratic flux)."""
        return self.flux.quadratic is not None

    def piece_image(self, k: int) -> tuple[float, float]:
        """Image ``]p(x_k+), p(x_{k+1}-)]`` of piece ``k``; ``-1`` and ``n`` are the exterior half-lines."""
        n = self.source.n_pieces
        if k == -1:
            return (-math.inf, float(self(self.knots[0], "left")))
        if k == n:
            return (float(self(self.knots[-1], "right")), math.inf)
        return (float(self(self.knots[k], "right")), float(self(self.knots[k + 1], "left")))

    def invert_on_piece(self, k: int, y):
        """``x`` in piece ``k`` with ``p(x) = y``; ``p`` must be increasing there."""
        y = np.asarray(y, dtype=float)
        n = self.source.n_pieces
        shift = None
        if k == -1:
            shift = self.T * float(self.flux.df(self.source.ext_left))
        elif k == n:
            shift = self.T * float(self.flux.df(self.source.ext_right))
        if shift is not None:
            return y + shift
        lo, hi = self.knots[k], self.knots[k + 1]
        a, b = self.source.a[k], self.source.b[k]
        if self.exact:
            slope = 1.0 - self.T * 2 * self.flux.quadratic * b
            return lo + (y - (lo - self.T * self.flux.df(a))) / slope
        xl = np.full(y.shape, lo)
        xh = np.full(y.shape, hi)
        for _ in range(80):
            xm = 0.5 * (xl + xh)
            pm = xm - self.T * self.flux.df(a + b * (xm - lo))
            below = pm < y
            xl = np.where(below, xm, xl)
            xh = np.where(below, xh, xm)
        return 0.5 * (xl + xh)


@dataclass(frozen=True)
class OleinikVerdict:
    admissible: bool
    witness: tuple | None = None  # (x, x + y) with p(x) > p(x + y)
    margin: float = 0.0  # f'(w(x+y)) - f'(w(x)) - y/T at the witness
    reason: str = ""

    def __bool__(self):
        return self.admissible


def build_pmap(w: PiecewiseProfile, flux: ConvexFlux, T: float) -> PMap:
    if not T > 0:
        raise ValueError("horizon T must be positive")
    lo, hi = w.value_bounds()
    if lo < flux.u_min or hi > flux.u_max:
        raise ValueError(
            f"profile values [{lo}, {hi}] leave flux state range [{flux.u_min}, {flux.u_max}]"
        )
    n = w.n_pieces
    slopes = np.zeros((n, 2))
    if flux.quadratic is not None:
        s = 1.0 - T * 2 * flux.quadratic * w.b
        slopes[:, 0] = slopes[:, 1] = s
    elif n:
        t = np.linspace(0.0, 1.0, SUBGRID)
        xs = w.knots[:-1, None] + t[None, :] * w.lengths[:, None]
        vals = w.a[:, None] + w.b[:, None] * (xs - w.knots[:-1, None])
        dp = 1.0 - T * flux.ddf(vals) * w.b[:, None]
        slopes[:, 0] = dp.min(axis=1)
        slopes[:, 1] = dp.max(axis=1)
    kinds = []
    for smin, smax in slopes:
        if smin < -SLOPE_TOL:
            kinds.append(DECREASING)
        elif smax <= SLOPE_TOL:
            kinds.append(FLAT)
        elif smin > SLOPE_TOL:
            kinds.append(INCREASING)
        else:
            kinds.append(MIXED)
    left, right = w.knot_limits()
    p_left = w.knots - T * flux.df(left)
    p_right = w.knots - T * flux.df(right)
    jumps = tuple(
        (float(x), float(pl), float(pr))
        for x, pl, pr in zip(w.knots, p_left, p_right)
        if abs(pr - pl) > SLOPE_TOL
    )
    return PMap(float(T), w, flux, tuple(kinds), slopes, jumps)


def check_oleinik(pmap: PMap) -> OleinikVerdict:
    """Decide whether ``p`` is nondecreasing; return a witness pair otherwise."""
    w, flux, T = pmap.source, pmap.flux, pmap.T

    def margin(x, xy):
        return float(flux.df(w(xy)) - flux.df(w(x)) - (xy - x) / T)

    for x, pl, pr in pmap.jumps:
        if pr < pl:
            k = int(np.searchsorted(w.knots, x))
            room = w.lengths[k] if k < w.n_pieces else 1.0
            delta = 0.5 * room
            for _ in range(80):
                if margin(x, x + delta) > 0:
                    break
                delta *= 0.5
            return OleinikVerdict(
                False, (x, x + delta), margin(x, x + delta),
                f"upward jump of the target at x={x:.17g}",
            )
    for k, kind in enumerate(pmap.kinds):
        if kind != DECREASING:
            continue
        lo, hi = w.knots[k], w.knots[k + 1]
        if pmap.exact:
            x, xy = lo + 0.25 * (hi - lo), lo + 0.75 * (hi - lo)
        else:
            t = np.linspace(lo, hi, SUBGRID)
            pv = pmap(t)
            drops = pv[:-1] - pv[1:]
            i = int(np.argmax(drops))
            x, xy = float(t[i]), float(t[i + 1])
        return OleinikVerdict(
            False, (float(x), float(xy)), margin(x, xy),
            f"f'(w) grows faster than 1/T on piece [{lo:.17g}, {hi:.17g}]",
        )
    return OleinikVerdict(True)


@dataclass(frozen=True)
class Partition:
    """Initial-line partition into transported images and shock fans.

    ``xi`` holds ``(lo, hi, piece)`` images of increasing pieces (``piece``
    is ``-1`` / ``n`` for the exterior half-lines), ``xii`` holds
    ``(x, lo, hi)`` gaps generated by the jump of the target at ``x``.
    """

    xi: tuple
    xii: tuple
    exceptional: tuple
    flat_images: tuple = field(default=())

    def xi_merged(self) -> list[tuple[float, float]]:
        merged: list[list[float]] = []
        for lo, hi, _ in self.xi:
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return [tuple(m) for m in merged]

    def complement(self, lo: float, hi: float) -> list[tuple[float, float]]:
        """Closed pieces of ``[lo, hi]`` covered by neither open ``X_i`` nor ``X_ii`` intervals."""
        opens = sorted([(a, b) for a, b, _ in self.xi] + [(a, b) for _, a, b in self.xii])
        out = []
        cur = lo
        for a, b in opens:
            if b <= cur:
                continue
            if a >= hi:
                break
            if a >= cur:
                out.append((cur, min(a, hi)))
            cur = max(cur, b)
            if cur >= hi:
                break
        if cur <= hi:
            out.append((cur, hi))
        return [iv for iv in out if lo <= iv[0] <= iv[1] <= hi]

    def locate(self, y: float) -> str:
        for a, b, _ in self.xi:
            if a < y < b:
                return "i"
        for _, a, b in self.xii:
            if a < y < b:
                return "ii"
        return "exceptional"


def partition(pmap: PMap) -> Partition:
    verdict = check_oleinik(pmap)
    if not verdict:
        raise InadmissibleError(f"target is not attainable: {verdict.reason}", verdict)
    n = pmap.source.n_pieces
    xi = [(*pmap.piece_image(-1), -1)]
    flats = []
    for k, kind in enumerate(pmap.kinds):
        lo, hi = pmap.piece_image(k)
        if kind == FLAT:
            flats.append(0.5 * (lo + hi))
        else:
            xi.append((lo, hi, k))
    xi.append((*pmap.piece_image(n), n))
    xii = tuple((x, pl, pr) for x, pl, pr in pmap.jumps if pr > pl)
    points = set()
    for lo, hi, _ in xi:
        points.update(v for v in (lo, hi) if math.isfinite(v))
    points.update(flats)
    return Partition(tuple(xi), xii, tuple(sorted(points)), tuple(flats))
