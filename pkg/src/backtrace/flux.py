"""Uniformly convex fluxes, the inverse speed map and the Legendre transform.

A flux is normalized so that ``f(0) = min f = 0`` and ``f'' >= c > 0`` on the
state range.  Inputs that are not normalized are rejected rather than
translated, since translating the state also shifts every profile.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

__all__ = [
    "ConvexFlux",
    "FluxError",
    "SpeedRangeError",
    "burgers",
    "polynomial",
    "flux_from_dict",
]

NEWTON_TOL = 1e-12
NEWTON_MAXITER = 100
CHECK_POINTS = 1000


class FluxError(ValueError):
    """Raised when a flux fails the convexity / normalization checks."""


class SpeedRangeError(ValueError):
    """Raised when a speed lies outside ``[f'(u_min), f'(u_max)]``."""


def _as_array(x):
    return np.asarray(x, dtype=float)


class ConvexFlux:
    """Uniformly convex flux ``f`` together with ``f'``, ``f''``.

    Parameters
    ----------
    f, df, ddf
        Vectorized callables for the flux and its first two derivatives.
    state_range
        ``(u_min, u_max)`` containing every state the flux will see.  May be
        infinite only for quadratic fluxes.
    convexity_floor
        Lower bound ``c`` for ``f''``; estimated on the check grid if omitted.
    quadratic
        Coefficient ``k`` when ``f(u) = k u**2``; enables closed forms.
    """

    def __init__(
        self,
        f: Callable,
        df: Callable,
        ddf: Callable,
        state_range: tuple[float, float] = (-math.inf, math.inf),
        convexity_floor: float | None = None,
        quadratic: float | None = None,
        name: str = "custom",
        spec: dict | None = None,
    ):
        self._f = f
        self._df = df
        self._ddf = ddf
        self.u_min, self.u_max = (float(state_range[0]), float(state_range[1]))
        self.quadratic = quadratic
        self.name = name
        self._spec = spec
        if not self.u_min < self.u_max:
            raise FluxError(f"empty state range {state_range}")
        if quadratic is None and not (
            math.isfinite(self.u_min) and math.isfinite(self.u_max)
        ):
            raise FluxError("non-quadratic fluxes need a finite state_range")
        self._validate(convexity_floor)

    # -- construction checks -------------------------------------------------
    def check_grid(self, n: int = CHECK_POINTS) -> np.ndarray:
        lo = self.u_min if math.isfinite(self.u_min) else -10.0
        hi = self.u_max if math.isfinite(self.u_max) else 10.0
        return np.linspace(lo, hi, n)

    def _validate(self, floor):
        if self.quadratic is not None and self.quadratic <= 0:
            raise FluxError("quadratic coefficient must be positive")
        if not self.u_min <= 0.0 <= self.u_max:
            raise FluxError("state range must contain 0, where f attains its minimum")
        u = self.check_grid()
        curv = self.ddf(u)
        c = float(np.min(curv))
        if floor is not None:
            if c < floor:
                raise FluxError(f"f'' drops to {c:.6g} below convexity floor {floor}")
            c = float(floor)
        if c <= 0:
            raise FluxError(f"flux is not uniformly convex: min f'' = {c:.6g}")
        self.convexity_floor = c
        self.curvature_ceiling = float(np.max(curv))
        if abs(float(self.f(0.0))) > 1e-12:
            raise FluxError("flux must satisfy f(0) = 0")
        if np.min(self.f(u)) < -1e-12:
            raise FluxError("flux must satisfy f >= 0 = f(0) on the state range")
        back = self.g(self.df(u))
        err = float(np.max(np.abs(back - u)))
        if err > 1e-10:
            raise FluxError(f"inverse speed map inconsistent by {err:.3g}")

    # -- pointwise maps ------------------------------------------------------
    def f(self, u):
        return self._f(_as_array(u))

    def df(self, u):
        return self._df(_as_array(u))

    def ddf(self, u):
        return self._ddf(_as_array(u))

    @property
    def speed_range(self) -> tuple[float, float]:
        if self.quadratic is not None:
            return (2 * self.quadratic * self.u_min, 2 * self.quadratic * self.u_max)
        return (float(self.df(self.u_min)), float(self.df(self.u_max)))

    def max_speed(self, lo: float, hi: float) -> float:
        """``max |f'|`` over the states ``[lo, hi]`` (f' is monotone)."""
        return float(max(abs(self.df(lo)), abs(self.df(hi))))

    def _check_speed(self, lam: np.ndarray) -> np.ndarray:
        smin, smax = self.speed_range
        slack = 1e-12 * max(1.0, abs(smin), abs(smax))
        if np.any(lam < smin - slack) or np.any(lam > smax + slack) or np.any(np.isnan(lam)):
            bad = lam[(lam < smin - slack) | (lam > smax + slack) | np.isnan(lam)]
            raise SpeedRangeError(
                f"speed {bad.flat[0]!r} outside admissible interval [{smin}, {smax}]"
            )
        return np.clip(lam, smin, smax)

    def g(self, lam):
        """Inverse of ``f'``: the state travelling at speed ``lam``."""
        lam = _as_array(lam)
        scalar = lam.ndim == 0
        lam = self._check_speed(np.atleast_1d(lam))
        if self.quadratic is not None:
            out = lam / (2 * self.quadratic)
        else:
            out = self._invert_speed(lam)
        return out[0] if scalar else out

    def _invert_speed(self, lam: np.ndarray) -> np.ndarray:
        lo = np.full_like(lam, self.u_min)
        hi = np.full_like(lam, self.u_max)
        u = np.clip(lam / self.convexity_floor, lo, hi)
        tol = NEWTON_TOL * np.maximum(1.0, np.abs(lam))
        done = np.zeros(lam.shape, dtype=bool)
        for _ in range(NEWTON_MAXITER):
            r = self.df(u) - lam
            done = np.abs(r) <= tol
            if done.all():
                return u
            hi = np.where(r > 0, u, hi)
            lo = np.where(r < 0, u, lo)
            step = u - r / self.ddf(u)
            bisect = (step <= lo) | (step >= hi) | ~np.isfinite(step)
            u = np.where(done, u, np.where(bisect, 0.5 * (lo + hi), step))
        # bisection fallback for the stragglers
        for _ in range(200):
            r = self.df(u) - lam
            done = np.abs(r) <= tol
            if done.all() or np.all(hi - lo <= 4 * np.spacing(np.abs(u) + 1.0)):
                break
            hi = np.where(r > 0, u, hi)
            lo = np.where(r < 0, u, lo)
            u = np.where(done, u, 0.5 * (lo + hi))
        return u

    def legendre(self, lam):
        """Convex conjugate ``f*(lam) = lam g(lam) - f(g(lam))``."""
        lam = _as_array(lam)
        if self.quadratic is not None:
            lam_c = self._check_speed(np.atleast_1d(lam))
            out = lam_c**2 / (4 * self.quadratic)
            return out[0] if lam.ndim == 0 else out
        u = self.g(lam)
        return lam * u - self.f(u)

    def legendre_at_state(self, v):
        """``v f'(v) - f(v)``, i.e. ``f*(f'(v))``."""
        v = _as_array(v)
        return v * self.df(v) - self.f(v)

    # -- serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        if self._spec is None:
            raise FluxError("custom fluxes built from callables are not serializable")
        return dict(self._spec)

    def __repr__(self):
        return f"ConvexFlux({self.name}, range=[{self.u_min}, {self.u_max}])"


def burgers() -> ConvexFlux:
    """Burgers flux ``u**2 / 2``."""
    return ConvexFlux(
        lambda u: 0.5 * u * u,
        lambda u: u,
        lambda u: np.ones_like(u),
        quadratic=0.5,
        name="burgers",
        spec={"type": "burgers"},
    )


def polynomial(coeffs: Sequence[float], state_range: tuple[float, float]) -> ConvexFlux:
    """Polynomial flux ``sum_k coeffs[k] u**k``; convexity checked on ``state_range``."""
    coeffs = [float(c) for c in coeffs]
    P = Polynomial(coeffs)
    dP, ddP = P.deriv(1), P.deriv(2)
    trimmed = np.trim_zeros(np.array(coeffs), "b")
    quad = None
    if len(trimmed) == 3 and trimmed[0] == 0.0 and trimmed[1] == 0.0:
        quad = float(trimmed[2])
    return ConvexFlux(
        P,
        dP,
        lambda u: ddP(u) * np.ones_like(u),
        state_range=state_range,
        quadratic=quad,
        name="poly",
        spec={"type": "poly", "coeffs": coeffs, "range": [float(state_range[0]), float(state_range[1])]},
    )


def flux_from_dict(spec: dict) -> ConvexFlux:
    kind = spec.get("type")
    if kind == "burgers":
        return burgers()
    if kind == "poly":
        if "coeffs" not in spec or "range" not in spec:
            raise FluxError('poly flux needs "coeffs" and "range"')
        return polynomial(spec["coeffs"], tuple(spec["range"]))
    raise FluxError(f"unknown flux type {kind!r}")
