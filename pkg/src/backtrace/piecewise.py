"""Piecewise-linear profiles with jumps, and their primitives.

A profile is given by knots ``x_0 < ... < x_n`` and, for each piece
``]x_k, x_{k+1}]``, the value ``a_k + b_k (x - x_k)``.  Outside
``]x_0, x_n]`` it is constant (``ext_left`` on ``]-inf, x_0]``,
``ext_right`` on ``]x_n, +inf[``).  Evaluation is left continuous, so a jump
at a knot is encoded only by the mismatch of the two adjacent pieces.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PiecewiseProfile",
    "PiecewisePrimitive",
    "integrate",
    "primitive",
    "l1_distance",
    "inner_product",
    "sup_distance",
]

JUMP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PiecewiseProfile:
    knots: np.ndarray
    a: np.ndarray
    b: np.ndarray
    ext_left: float
    ext_right: float

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float).ravel()
        a = np.asarray(self.a, dtype=float).ravel()
        b = np.asarray(self.b, dtype=float).ravel()
        if knots.size < 1:
            raise ValueError("a profile needs at least one knot")
        if a.size != knots.size - 1 or b.size != knots.size - 1:
            raise ValueError("need one (a, b) pair per piece")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        if not (np.all(np.isfinite(knots)) and np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("profile data must be finite")
        for arr in (knots, a, b):
            arr.setflags(write=False)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "ext_left", float(self.ext_left))
        object.__setattr__(self, "ext_right", float(self.ext_right))
        lengths = np.diff(knots)
        cum = np.concatenate([[0.0], np.cumsum(a * lengths + 0.5 * b * lengths**2)])
        cum.setflags(write=False)
        object.__setattr__(self, "_cum", cum)

    # -- constructors --------------------------------------------------------
    @classmethod
    def from_pieces(cls, pieces: Iterable[Sequence[float]], ext_left=None, ext_right=None):
        """Build from ``(x_lo, x_hi, a, b)`` tuples; pieces must be contiguous.

        Missing extensions default to the adjacent end values.
        """
        pieces = [tuple(map(float, p)) for p in pieces]
        if not pieces:
            raise ValueError("need at least one piece")
        knots = [pieces[0][0]]
        for k, (lo, hi, _, _) in enumerate(pieces):
            if lo != knots[-1]:
                raise ValueError(f"piece {k} starts at {lo}, expected {knots[-1]}")
            knots.append(hi)
        a = [p[2] for p in pieces]
        b = [p[3] for p in pieces]
        if ext_left is None:
            ext_left = a[0]
        if ext_right is None:
            lo, hi, a_, b_ = pieces[-1]
            ext_right = a_ + b_ * (hi - lo)
        return cls(np.array(knots), np.array(a), np.array(b), ext_left, ext_right)

    @classmethod
    def constant(cls, value: float, at: float = 0.0):
        return cls(np.array([at]), np.empty(0), np.empty(0), value, value)

    @classmethod
    def step(cls, x0: float, left: float, right: float):
        """``left`` on ``]-inf, x0]``, ``right`` on ``]x0, inf[``."""
        return cls(np.array([x0]), np.empty(0), np.empty(0), left, right)

    @classmethod
    def from_nodes(cls, xs, left_values, right_values, ext_left=None, ext_right=None):
        """Linear interpolation between nodes with one-sided values.

        Piece ``]x_k, x_{k+1}]`` runs from ``right_values[k]`` to
        ``left_values[k+1]``, so jumps sit exactly at nodes.
        """
        xs = np.asarray(xs, dtype=float)
        lv = np.asarray(left_values, dtype=float)
        rv = np.asarray(right_values, dtype=float)
        h = np.diff(xs)
        a = rv[:-1]
        b = (lv[1:] - rv[:-1]) / h
        el = lv[0] if ext_left is None else ext_left
        er = rv[-1] if ext_right is None else ext_right
        return cls(xs, a, b, el, er)

    @classmethod
    def from_points(cls, xs, ys, ext_left=None, ext_right=None):
        """Continuous interpolation of ``(xs, ys)``."""
        return cls.from_nodes(xs, ys, ys, ext_left, ext_right)

    @classmethod
    def indicator(cls, lo: float, hi: float, height: float = 1.0):
        return cls(np.array([lo, hi]), np.array([height]), np.array([0.0]), 0.0, 0.0)

    # -- basic structure -----------------------------------------------------
    @property
    def n_pieces(self) -> int:
        return self.a.size

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.knots)

    @property
    def end_values(self) -> np.ndarray:
        """Left limits at each piece's right end."""
        return self.a + self.b * self.lengths

    def pieces(self) -> list[tuple[float, float, float, float]]:
        return [
            (float(lo), float(hi), float(a), float(b))
            for lo, hi, a, b in zip(self.knots[:-1], self.knots[1:], self.a, self.b)
        ]

    def knot_limits(self) -> tuple[np.ndarray, np.ndarray]:
        """Left and right limits at every knot."""
        left = np.concatenate([[self.ext_left], self.end_values])
        right = np.concatenate([self.a, [self.ext_right]])
        return left, right

    def jumps(self, tol: float = JUMP_TOL) -> list[tuple[float, float, float]]:
        """``(x, u(x-), u(x+))`` for each knot where the limits differ."""
        left, right = self.knot_limits()
        scale = np.maximum(1.0, np.maximum(np.abs(left), np.abs(right)))
        idx = np.nonzero(np.abs(left - right) > tol * scale)[0]
        return [(float(self.knots[i]), float(left[i]), float(right[i])) for i in idx]

    def value_bounds(self) -> tuple[float, float]:
        left, right = self.knot_limits()
        vals = np.concatenate([left, right])
        return float(vals.min()), float(vals.max())

    def sup_norm(self) -> float:
        lo, hi = self.value_bounds()
        return max(abs(lo), abs(hi))

    def total_variation(self) -> float:
        left, right = self.knot_limits()
        return float(np.sum(np.abs(self.b) * self.lengths) + np.sum(np.abs(left - right)))

    # -- evaluation ----------------------------------------------------------
    def __call__(self, x, side: str = "left"):
        return self.eval(x, side)

    def eval(self, x, side: str = "left"):
        """Evaluate one-sided limits.

        ``side="precise"`` returns the common value where both one-sided
        limits agree and ``nan`` where ``x`` is not a Lebesgue point.
        """
        x = np.asarray(x, dtype=float)
        if side == "precise":
            lv = self.eval(x, "left")
            rv = self.eval(x, "right")
            scale = np.maximum(1.0, np.abs(lv))
            return np.where(np.abs(lv - rv) <= JUMP_TOL * scale, lv, np.nan)
        if side == "left":
            idx = np.searchsorted(self.knots, x, side="left") - 1
        elif side == "right":
            idx = np.searchsorted(self.knots, x, side="right") - 1
        else:
            raise ValueError(f"side must be left, right or precise, not {side!r}")
        n = self.n_pieces
        inside = (idx >= 0) & (idx < n)
        j = np.clip(idx, 0, max(n - 1, 0))
        if n:
            val = self.a[j] + self.b[j] * (x - self.knots[j])
        else:
            val = np.zeros_like(x)
        out = np.where(idx < 0, self.ext_left, np.where(inside, val, self.ext_right))
        return out[()] if out.ndim == 0 else out

    # -- integrals -----------------------------------------------------------
    def antiderivative(self, x):
        """``int_{x_0}^x u`` (negative for ``x < x_0``)."""
        x = np.asarray(x, dtype=float)
        k0 = self.knots[0]
        n = self.n_pieces
        idx = np.searchsorted(self.knots, x, side="left") - 1
        j = np.clip(idx, 0, max(n - 1, 0))
        if n:
            s = x - self.knots[j]
            inner = self._cum[j] + self.a[j] * s + 0.5 * self.b[j] * s * s
        else:
            inner = np.zeros_like(x)
        out = np.where(
            idx < 0,
            self.ext_left * (x - k0),
            np.where(idx >= n, self._cum[-1] + self.ext_right * (x - self.knots[-1]), inner),
        )
        return out[()] if out.ndim == 0 else out

    def integrate(self, lo, hi):
        return self.antiderivative(hi) - self.antiderivative(lo)

    def primitive(self, base: float = 0.0, offset: float = 0.0) -> "PiecewisePrimitive":
        return PiecewisePrimitive(self, float(base), float(offset))

    # -- re-gridding and algebra ---------------------------------------------
    def on_knots(self, knots) -> tuple[np.ndarray, np.ndarray]:
        """``(a, b)`` of this profile on the pieces of a finer knot vector."""
        knots = np.asarray(knots, dtype=float)
        if knots.size < 2:
            return np.empty(0), np.empty(0)
        lo = knots[:-1]
        mid = 0.5 * (lo + knots[1:])
        idx = np.searchsorted(self.knots, mid, side="right") - 1
        n = self.n_pieces
        j = np.clip(idx, 0, max(n - 1, 0))
        if n:
            a_in = self.a[j] + self.b[j] * (lo - self.knots[j])
            b_in = self.b[j]
        else:
            a_in = b_in = np.zeros_like(lo)
        a = np.where(idx < 0, self.ext_left, np.where(idx >= n, self.ext_right, a_in))
        b = np.where((idx < 0) | (idx >= n), 0.0, b_in)
        return a, b

    def refine(self, extra) -> "PiecewiseProfile":
        knots = np.union1d(self.knots, np.asarray(extra, dtype=float))
        a, b = self.on_knots(knots)
        return PiecewiseProfile(knots, a, b, self.ext_left, self.ext_right)

    @staticmethod
    def combine(profiles: Sequence["PiecewiseProfile"], coeffs: Sequence[float]) -> "PiecewiseProfile":
        """Exact linear combination ``sum_k coeffs[k] * profiles[k]``."""
        knots = _union_knots(profiles)
        a = np.zeros(knots.size - 1)
        b = np.zeros(knots.size - 1)
        el = er = 0.0
        for p, c in zip(profiles, coeffs):
            pa, pb = p.on_knots(knots)
            a += c * pa
            b += c * pb
            el += c * p.ext_left
            er += c * p.ext_right
        return PiecewiseProfile(knots, a, b, el, er)

    def __add__(self, other):
        if isinstance(other, PiecewiseProfile):
            return PiecewiseProfile.combine([self, other], [1.0, 1.0])
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, PiecewiseProfile):
            return PiecewiseProfile.combine([self, other], [1.0, -1.0])
        return NotImplemented

    def __mul__(self, c):
        c = float(c)
        return PiecewiseProfile(self.knots, c * self.a, c * self.b, c * self.ext_left, c * self.ext_right)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def splice(self, lo: float, hi: float, other: "PiecewiseProfile") -> "PiecewiseProfile":
        """This profile outside ``]lo, hi]`` and ``other`` inside."""
        inner = other.knots[(other.knots > lo) & (other.knots < hi)]
        outer = self.knots[(self.knots < lo) | (self.knots > hi)]
        knots = np.union1d(np.union1d(inner, outer), [lo, hi])
        a1, b1 = self.on_knots(knots)
        a2, b2 = other.on_knots(knots)
        mid = 0.5 * (knots[:-1] + knots[1:])
        use = (mid > lo) & (mid < hi)
        return PiecewiseProfile(
            knots, np.where(use, a2, a1), np.where(use, b2, b1), self.ext_left, self.ext_right
        )

    def reflect(self) -> "PiecewiseProfile":
        """``x -> u(-x)``; the representative at knots becomes right continuous."""
        knots = -self.knots[::-1]
        a = self.end_values[::-1]
        b = -self.b[::-1]
        return PiecewiseProfile(knots, a, b, self.ext_right, self.ext_left)

    def simplify(self, tol: float = 1e-13) -> "PiecewiseProfile":
        """Merge adjacent pieces that continue each other linearly."""
        if self.n_pieces < 2:
            return self
        keep = [0]
        ends = self.end_values
        for k in range(1, self.n_pieces):
            j = keep[-1]
            scale = max(1.0, abs(self.a[k]))
            same_slope = abs(self.b[k] - self.b[j]) <= tol * max(1.0, abs(self.b[j]))
            continuous = abs(ends[k - 1] - self.a[k]) <= tol * scale
            if not (same_slope and continuous):
                keep.append(k)
        keep = np.array(keep)
        knots = np.concatenate([self.knots[keep], [self.knots[-1]]])
        return PiecewiseProfile(knots, self.a[keep], self.b[keep], self.ext_left, self.ext_right)

    # -- sampling and serialization -----------------------------------------
    def sample(self, lo: float, hi: float, dx: float):
        """Rows ``(x, left, right)`` on a uniform grid."""
        n = int(np.floor((hi - lo) / dx + 1e-9)) + 1
        xs = lo + dx * np.arange(n)
        return xs, self.eval(xs, "left"), self.eval(xs, "right")

    def to_dict(self) -> dict:
        out = {
            "pieces": [
                {"x0": float(lo), "x1": float(hi), "a": float(a), "b": float(b)}
                for lo, hi, a, b in self.pieces()
            ],
            "ext_left": float(self.ext_left),
            "ext_right": float(self.ext_right),
        }
        if not self.n_pieces:
            out["x0"] = float(self.knots[0])
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "PiecewiseProfile":
        pieces = data.get("pieces")
        if pieces is None:
            raise ValueError('profile needs a "pieces" list')
        if not pieces:
            if "x0" not in data:
                raise ValueError('a profile with no pieces needs "x0"')
            return cls.step(data["x0"], data["ext_left"], data["ext_right"])
        rows = []
        for k, p in enumerate(pieces):
            try:
                rows.append((p["x0"], p["x1"], p["a"], p.get("b", 0.0)))
            except KeyError as err:
                raise ValueError(f"piece {k} lacks field {err.args[0]!r}") from None
        return cls.from_pieces(rows, data.get("ext_left"), data.get("ext_right"))

    def allclose(self, other: "PiecewiseProfile", atol: float = 1e-12) -> bool:
        return sup_distance(self, other) <= atol

    def __repr__(self):
        return (
            f"PiecewiseProfile({self.n_pieces} pieces on [{self.knots[0]:g}, {self.knots[-1]:g}],"
            f" ext=({self.ext_left:g}, {self.ext_right:g}))"
        )


def _union_knots(profiles) -> np.ndarray:
    knots = profiles[0].knots
    for p in profiles[1:]:
        knots = np.union1d(knots, p.knots)
    return knots


@dataclass(frozen=True, eq=False)
class PiecewisePrimitive:
    """``U(x) = int_base^x profile + offset``; Lipschitz with constant ``sup|profile|``."""

    profile: PiecewiseProfile
    base: float = 0.0
    offset: float = 0.0

    def __call__(self, x):
        return self.profile.antiderivative(x) - self.profile.antiderivative(self.base) + self.offset

    @property
    def knots(self) -> np.ndarray:
        return self.profile.knots

    @property
    def lipschitz(self) -> float:
        return self.profile.sup_norm()

    def shifted(self, c: float) -> "PiecewisePrimitive":
        return PiecewisePrimitive(self.profile, self.base, self.offset + float(c))

    def rebased(self, base: float) -> "PiecewisePrimitive":
        """Same function, expressed with a different base point."""
        return PiecewisePrimitive(self.profile, float(base), float(self(base)))


def integrate(prof: PiecewiseProfile, a: float, b: float) -> float:
    return float(prof.integrate(a, b))


def primitive(prof: PiecewiseProfile, base: float = 0.0, offset: float = 0.0) -> PiecewisePrimitive:
    return prof.primitive(base, offset)


def _window_pieces(pa, pb, a, b):
    knots = _union_knots([pa, pb])
    knots = np.union1d(knots[(knots > a) & (knots < b)], [a, b])
    a1, b1 = pa.on_knots(knots)
    a2, b2 = pb.on_knots(knots)
    return np.diff(knots), a1, b1, a2, b2


def l1_distance(pa: PiecewiseProfile, pb: PiecewiseProfile, a: float, b: float) -> float:
    """Exact ``int_a^b |pa - pb|``."""
    if b < a:
        raise ValueError("need a <= b")
    if b == a:
        return 0.0
    h, a1, b1, a2, b2 = _window_pieces(pa, pb, a, b)
    d0 = a1 - a2
    d1 = d0 + (b1 - b2) * h
    same = d0 * d1 >= 0
    area_same = 0.5 * h * np.abs(d0 + d1)
    with np.errstate(divide="ignore", invalid="ignore"):
        area_split = 0.5 * h * (d0 * d0 + d1 * d1) / (np.abs(d0) + np.abs(d1))
    area = np.where(same, area_same, area_split)
    return float(np.sum(area))


def inner_product(pa: PiecewiseProfile, pb: PiecewiseProfile, a: float, b: float) -> float:
    """Exact ``int_a^b pa * pb``."""
    h, a1, b1, a2, b2 = _window_pieces(pa, pb, a, b)
    return float(np.sum(a1 * a2 * h + 0.5 * (a1 * b2 + b1 * a2) * h**2 + b1 * b2 * h**3 / 3.0))


def sup_distance(pa: PiecewiseProfile, pb: PiecewiseProfile) -> float:
    """``sup |pa - pb|`` over the real line."""
    d = pa - pb
    return d.sup_norm()
