"""Command-line front end.

Exit codes: 0 success, 1 malformed input or command line, 2 inadmissible
target (the Oleinik witness is printed), 3 membership refuted under
``--expect-member``, 4 any other argument or construction error, 5 corpus
self-test failures.
"""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import inverse as inv
from .corpus import corpus_generate, pairwise_oleinik, violating_targets
from .flux import burgers
from .io import (
    InputError,
    dumps,
    load_flux,
    load_profile,
    parse_grid,
    potential_csv,
    profile_csv,
)
from .laxhopf import evolve_cl, evolve_cl_profile, evolve_hj
from .oleinik import InadmissibleError, build_pmap, check_oleinik, partition
from .oracle import evolve_fv
from .piecewise import l1_distance

EXIT_INPUT = 1
EXIT_INADMISSIBLE = 2
EXIT_REFUTED = 3
EXIT_ERROR = 4
EXIT_CORPUS = 5


def _threads() -> int:
    raw = os.environ.get("BACKTRACE_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _flux(args):
    return load_flux(args.flux) if args.flux else burgers()


def _witness_json(verdict) -> dict:
    return {
        "verdict": False,
        "reason": verdict.reason,
        "witness": list(verdict.witness) if verdict.witness else None,
        "margin": verdict.margin,
    }


def _problem(args, target_path):
    target = load_profile(target_path)
    return inv.InverseProblem(target, _flux(args), args.T, tol=getattr(args, "tol", None))


def _profile_out(prof, args) -> str:
    if args.out == "csv":
        lo, hi = args.window
        xs = parse_grid(f"{lo}:{hi}:{args.dx}")
        return profile_csv(xs, prof(xs, "left"), prof(xs, "right"))
    return dumps(prof.to_dict())


# -- commands -------------------------------------------------------------------
def cmd_partition(args) -> int:
    w = load_profile(args.profile)
    pm = build_pmap(w, _flux(args), args.T)
    verdict = check_oleinik(pm)
    if not verdict:
        _emit(dumps(_witness_json(verdict)), args.output)
        return EXIT_INADMISSIBLE
    part = partition(pm)
    body = {
        "verdict": True,
        "xi": [{"lo": lo, "hi": hi} for lo, hi in part.xi_merged()],
        "xii": [{"x": x, "lo": lo, "hi": hi} for x, lo, hi in part.xii],
        "exceptional": list(part.exceptional),
    }
    _emit(dumps(body), args.output)
    return 0


def cmd_evolve(args) -> int:
    u0 = load_profile(args.profile)
    flux = _flux(args)
    xs = parse_grid(args.grid)
    if args.mode == "cl":
        left, right = evolve_cl(u0, flux, args.t, xs)
        if args.out == "csv":
            text = profile_csv(xs, left, right)
        else:
            text = dumps({"t": args.t, "x": xs, "value_left": left, "value_right": right})
    else:
        U = evolve_hj(u0.primitive(0.0), flux, args.t, xs)
        text = potential_csv(xs, U) if args.out == "csv" else dumps({"t": args.t, "x": xs, "U": U})
    _emit(text, args.output)
    return 0


def cmd_construct(args) -> int:
    prob = _problem(args, args.target)
    if args.kind == "extremal":
        prof = prob.extremal
    elif args.kind == "reverse":
        prof = inv.construct_extremal_reverse(prob)
    else:
        if args.jump_x is None:
            if not prob.jumps:
                raise ValueError("target has no jump to prolong")
            args.jump_x = prob.jumps[0][0]
        prof = inv.construct_sharp(prob, args.jump_x)
    _emit(_profile_out(prof, args), args.output)
    return 0


def cmd_member(args) -> int:
    prob = _problem(args, args.target)
    u0 = load_profile(args.candidate)
    reports = {}
    if args.form in ("cl", "both"):
        reports["cl"] = inv.membership_cl(prob, u0)
    if args.form in ("hj", "both"):
        reports["hj"] = inv.membership_hj(prob, inv.member_primitive(prob, u0))
    verdict = all(r.verdict for r in reports.values())
    body = {"verdict": verdict, "reports": {k: r.to_dict() for k, r in reports.items()}}
    _emit(dumps(body), args.output)
    if args.expect_member and not verdict:
        return EXIT_REFUTED
    return 0


def cmd_face(args) -> int:
    prob = _problem(args, args.target)
    u0 = load_profile(args.candidate)
    family = inv.tent_family(prob, u0, args.N)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for k, v in enumerate(family):
        with open(out / f"v{k}.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dumps(v.to_dict()))
    params = inv.face_parameters(prob, u0)
    _emit(dumps({"N": args.N, "x": params.x, "y": params.y, "eta": params.eta, "eps": params.eps,
                 "files": [f"v{k}.json" for k in range(len(family))]}), args.output)
    return 0


def cmd_spoiler(args) -> int:
    prob = _problem(args, args.target)
    u0 = load_profile(args.candidate) if args.candidate else prob.extremal
    if args.kind == "negative":
        x = args.jump_x if args.jump_x is not None else (prob.jumps[0][0] if prob.jumps else None)
        if x is None:
            raise ValueError("target has no jump; use --kind bump")
        prof = inv.spoiler_negative(prob, u0, x, args.n)
    else:
        prof = inv.spoiler_bump(prob, u0, args.n, args.center)
    _emit(_profile_out(prof, args), args.output)
    return 0


def cmd_oracle(args) -> int:
    u0 = load_profile(args.profile)
    lo, hi = args.window
    sol = evolve_fv(u0, _flux(args), args.T, args.dx, lo, hi, cfl=args.cfl)
    if args.out == "csv":
        centers = 0.5 * (sol.knots[:-1] + sol.knots[1:])
        keep = (centers >= lo) & (centers <= hi)
        text = profile_csv(centers[keep], sol.a[keep], sol.a[keep])
    else:
        text = dumps(sol.to_dict())
    _emit(text, args.output)
    return 0


def _corpus_row(w, flux, T, L):
    prob = inv.InverseProblem(w, flux, T)
    e = prob.extremal
    r = inv.construct_extremal_reverse(prob)
    rt = l1_distance(evolve_cl_profile(e, flux, T, -L, L), w, -L, L)
    members = [e]
    if prob.jumps:
        members.append(inv.construct_sharp(prob, prob.jumps[0][0]))
    memb = all(inv.membership_cl(prob, m).verdict and inv.membership_hj(prob, inv.member_primitive(prob, m)).verdict
               for m in members)
    spoil = inv.membership_cl(prob, inv.spoiler_bump(prob, e, 10)).certified_fail
    if prob.jumps:
        spoil = spoil and inv.membership_cl(prob, inv.spoiler_negative(prob, e, prob.jumps[0][0], 10)).certified_fail
    single = (inv.uniqueness_probe(prob) == "singleton") == (not w.jumps())
    return {
        "round_trip": rt <= 1e-4,
        "construction_equality": l1_distance(e, r, -L, L) <= 1e-6,
        "membership": memb,
        "spoilers_refuted": spoil,
        "singleton_criterion": single,
    }


def cmd_corpus(args) -> int:
    flux = burgers()
    T, L = 1.0, 5.0
    targets = corpus_generate(args.seed, args.count)
    bad = violating_targets(args.seed, max(1, args.count // 2))
    rows = {"attainability": 0}
    total = {"attainability": len(targets) + len(bad)}
    for w, expect in [(w, True) for w in targets] + [(w, False) for w in bad]:
        verdict = check_oleinik(build_pmap(w, flux, T)).admissible
        if verdict == expect == pairwise_oleinik(w, flux, T, seed=args.seed):
            rows["attainability"] += 1
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(lambda w: _corpus_row(w, flux, T, L), targets))
    for res in results:
        for k, ok in res.items():
            rows[k] = rows.get(k, 0) + int(ok)
            total[k] = total.get(k, 0) + 1
    lines = [f"{'check':<24}{'passed':>8}{'total':>8}"]
    for k in rows:
        lines.append(f"{k:<24}{rows[k]:>8}{total[k]:>8}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0 if all(rows[k] == total[k] for k in rows) else EXIT_CORPUS


# -- parser -----------------------------------------------------------------------
def _window(text: str):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("window must be lo:hi") from None
    if not hi > lo:
        raise argparse.ArgumentTypeError("window must have lo < hi")
    return lo, hi


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


class _Parser(argparse.ArgumentParser):
    """Usage errors are malformed input, so they exit 1 rather than argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


RANGE_OPTIONS = ("--grid", "--window")


def _glue_ranges(argv):
    """``--grid -1:1:0.1`` would read as an option; glue it to ``--grid=-1:1:0.1``."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in RANGE_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-") and ":" in argv[i + 1]:
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="backtrace", description="Initial data reaching a target profile.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, horizon="T"):
        p.add_argument("--flux", help="flux JSON (default: Burgers)")
        p.add_argument(f"--{horizon}", type=_positive, default=1.0, dest=horizon)
        p.add_argument("--output", "-o", help="write here instead of stdout")

    def profile_output(p):
        p.add_argument("--out", choices=("json", "csv"), default="json")
        p.add_argument("--window", type=_window, default=(-5.0, 5.0), help="CSV range lo:hi")
        p.add_argument("--dx", type=_positive, default=1e-3, help="CSV spacing")

    p = sub.add_parser("partition", help="attainability verdict and initial-line partition")
    p.add_argument("--profile", required=True)
    common(p)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("evolve", help="forward solution at time t")
    p.add_argument("--profile", required=True)
    p.add_argument("--mode", choices=("cl", "hj"), default="cl")
    p.add_argument("--grid", default="-5:5:0.001", help="lo:hi:dx")
    p.add_argument("--out", choices=("csv", "json"), default="csv")
    common(p, horizon="t")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("construct", help="build a datum reaching the target")
    p.add_argument("--kind", choices=("extremal", "reverse", "sharp"), default="extremal")
    p.add_argument("--target", required=True)
    p.add_argument("--jump-x", type=float, default=None)
    common(p)
    profile_output(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("member", help="test whether a datum reaches the target")
    p.add_argument("--candidate", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--form", choices=("cl", "hj", "both"), default="both")
    p.add_argument("--tol", type=_positive, default=None)
    p.add_argument("--expect-member", action="store_true")
    common(p)
    p.set_defaults(func=cmd_member)

    p = sub.add_parser("face", help="N+1 members averaging to the candidate")
    p.add_argument("--candidate", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--out-dir", required=True)
    common(p)
    p.set_defaults(func=cmd_face)

    p = sub.add_parser("spoiler", help="a nearby non-member")
    p.add_argument("--kind", choices=("negative", "bump"), default="negative")
    p.add_argument("--candidate", help="member to perturb (default: extremal datum)")
    p.add_argument("--target", required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--jump-x", type=float, default=None)
    p.add_argument("--center", type=float, default=None)
    common(p)
    profile_output(p)
    p.set_defaults(func=cmd_spoiler)

    p = sub.add_parser("oracle", help="Godunov reference solution")
    p.add_argument("--profile", required=True)
    p.add_argument("--dx", type=_positive, default=1e-3)
    p.add_argument("--cfl", type=_positive, default=0.9)
    p.add_argument("--window", type=_window, default=(-5.0, 5.0))
    p.add_argument("--out", choices=("csv", "json"), default="csv")
    common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("corpus", help="self-test on a seeded random corpus")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--count", type=int, default=8)
    p.set_defaults(func=cmd_corpus)
    return ap


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    args = build_parser().parse_args(_glue_ranges([str(a) for a in argv]))
    try:
        return args.func(args)
    except (InputError, FileNotFoundError) as err:
        print(f"backtrace: input error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except InadmissibleError as err:
        if err.verdict is not None:
            sys.stdout.write(dumps(_witness_json(err.verdict)))
        print(f"backtrace: {err}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except ValueError as err:
        print(f"backtrace: error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
