"""Seeded random targets and the brute-force pairwise Oleinik oracle."""
from __future__ import annotations

import math

import numpy as np

from .flux import ConvexFlux, burgers
from .piecewise import PiecewiseProfile

__all__ = [
    "corpus_generate",
    "violating_targets",
    "pairwise_oleinik",
]

SLOPE_CAP = 0.95
VALUE_BOUND = 1.5


def _curvature_max(flux: ConvexFlux, lo: float, hi: float) -> float:
    return float(np.max(flux.ddf(np.linspace(lo, hi, 64))))


def _random_target(rng, flux, T, jumps: bool, span: float) -> PiecewiseProfile | None:
    vlo = max(-VALUE_BOUND, flux.u_min)
    vhi = min(VALUE_BOUND, flux.u_max)
    n = int(rng.integers(1, 7))
    knots = np.sort(rng.uniform(-span, span, n + 1))
    while np.any(np.diff(knots) < 0.2):
        knots = np.sort(rng.uniform(-span, span, n + 1))
    v = float(rng.uniform(0.5 * vlo, 0.5 * vhi))
    pieces = []
    jumped = False
    for k in range(n):
        h = knots[k + 1] - knots[k]
        if k > 0 and jumps and (rng.random() < 0.6 or (k == n - 1 and not jumped)):
            drop = float(rng.uniform(0.1, 1.0))
            if v - drop >= vlo:
                v -= drop
                jumped = True
        b = float(rng.uniform(-1.5, 1.5))
        end = float(np.clip(v + b * h, vlo, vhi))
        b = (end - v) / h
        if b > 0:
            # the growth of f'(w) must stay below SLOPE_CAP / T
            cap = SLOPE_CAP / (T * _curvature_max(flux, v, end))
            if b > cap:
                b = cap
                end = v + b * h
        pieces.append((knots[k], knots[k + 1], v, b))
        v = end
    if jumps and not jumped:
        return None
    return PiecewiseProfile.from_pieces(pieces, pieces[0][2], v)


def corpus_generate(
    seed: int,
    count: int,
    flux: ConvexFlux | None = None,
    T: float = 1.0,
    span: float = 2.5,
    jump_free_every: int = 4,
) -> list[PiecewiseProfile]:
    """``count`` admissible targets: slopes of ``f'(w)`` below ``0.95/T``, only downward jumps.

    Every ``jump_free_every``-th target is continuous; all others carry at
    least one jump.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    flux = flux or burgers()
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        w = None
        while w is None:  # a jumpy draw that never found room to drop is redrawn
            w = _random_target(rng, flux, T, jumps=(i % jump_free_every != 0), span=span)
        out.append(w)
    return out


def violating_targets(seed: int, count: int, T: float = 1.0) -> list[PiecewiseProfile]:
    """Burgers targets breaking the Oleinik bound: steep rises or upward jumps.

    Slope violations rise at ``>= 1.5/T`` over length ``>= 1``; upward jumps
    are ``>= 0.3``, so a pairwise sampler finds them with high probability.
    """
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        x0 = float(rng.uniform(-2.0, 1.0))
        base = float(rng.uniform(-1.0, 0.0))
        if i % 2 == 0:
            length = float(rng.uniform(1.0, 1.5))
            slope = float(rng.uniform(1.5, 2.0)) / T
            top = base + slope * length
            w = PiecewiseProfile.from_pieces([(x0, x0 + length, base, slope)], base, top)
        else:
            rise = float(rng.uniform(0.3, 1.0))
            w = PiecewiseProfile.from_pieces(
                [(x0, x0 + 1.0, base, -0.1), (x0 + 1.0, x0 + 2.0, base - 0.1 + rise, 0.0)],
                base,
                base - 0.1 + rise,
            )
        out.append(w)
    return out


def pairwise_oleinik(
    w: PiecewiseProfile,
    flux: ConvexFlux,
    T: float,
    n_pairs: int = 10_000,
    L: float = 5.0,
    seed: int = 0,
    tol: float = 1e-12,
) -> bool:
    """Brute force: ``p(x) <= p(x + d)`` on random pairs, ``d`` log-uniform in ``[1e-6, 2L]``."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-L, L, n_pairs)
    d = np.exp(rng.uniform(math.log(1e-6), math.log(2 * L), n_pairs))

    def p(z):
        return z - T * flux.df(w(z))

    return bool(np.all(p(x) <= p(x + d) + tol))
