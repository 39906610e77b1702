"""File formats: flux and profile JSON, CSV samplers, deterministic JSON output."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .flux import ConvexFlux, FluxError, flux_from_dict
from .piecewise import PiecewiseProfile

__all__ = [
    "SCHEMA",
    "InputError",
    "dumps",
    "load_json",
    "load_profile",
    "load_flux",
    "parse_grid",
    "profile_csv",
    "potential_csv",
]

SCHEMA = "backtrace/1"


class InputError(ValueError):
    """Malformed input file, with location information in the message."""


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "%.17g" % x if math.isfinite(x) else "null"
    if isinstance(x, str):
        return json.dumps(x, ensure_ascii=False)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj: dict) -> str:
    """JSON text with every float at 17 significant digits; infinities become null."""
    body = {"schema": SCHEMA}
    body.update(obj)
    return _fmt(body) + "\n"


def load_json(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise InputError(f"{path}: line {err.lineno}, column {err.colno}: {err.msg}") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: top level must be an object")
    return data


def load_profile(path) -> PiecewiseProfile:
    data = load_json(path)
    try:
        return PiecewiseProfile.from_dict(data)
    except (ValueError, TypeError, KeyError) as err:
        raise InputError(f"{path}: {err}") from None


def load_flux(path) -> ConvexFlux:
    data = load_json(path)
    try:
        return flux_from_dict(data)
    except (FluxError, ValueError, TypeError, KeyError) as err:
        raise InputError(f"{path}: field error: {err}") from None


def parse_grid(spec: str) -> np.ndarray:
    """``"lo:hi:dx"`` to the node array ``lo, lo + dx, ..., hi``."""
    try:
        lo, hi, dx = (float(v) for v in spec.split(":"))
    except ValueError:
        raise InputError(f"grid spec {spec!r} is not lo:hi:dx") from None
    if not (hi > lo and dx > 0):
        raise InputError(f"grid spec {spec!r} is degenerate (need lo < hi, dx > 0)")
    n = int(math.floor((hi - lo) / dx + 1e-9))
    return lo + dx * np.arange(n + 1)


def _num(x: float) -> str:
    return "%.17g" % float(x)


def profile_csv(xs, left, right) -> str:
    rows = ["x,value_left,value_right"]
    rows += [f"{_num(x)},{_num(l)},{_num(r)}" for x, l, r in zip(xs, left, right)]
    return "\n".join(rows) + "\n"


def potential_csv(xs, U) -> str:
    rows = ["x,U"] + [f"{_num(x)},{_num(u)}" for x, u in zip(xs, U)]
    return "\n".join(rows) + "\n"
