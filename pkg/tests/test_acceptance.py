"""The twelve acceptance criteria, at their stated tolerances.

Each test records one ``criterion N: PASS|FAIL ...`` line (printed in the
terminal summary) before asserting.
"""
import numpy as np
import pytest

from backtrace.corpus import corpus_generate, pairwise_oleinik, violating_targets
from backtrace.flux import burgers
from backtrace.inverse import (
    InverseProblem,
    NoFaceError,
    cone_combination,
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
from backtrace.laxhopf import evolve_cl_profile, evolve_hj, lift_cl_to_hj, s_value
from backtrace.oleinik import build_pmap, check_oleinik
from backtrace.oracle import evolve_fv
from backtrace.piecewise import PiecewiseProfile, l1_distance

from conftest import ACCEPTANCE

T, L = 1.0, 5.0
THETAS = (0.0, 0.5, 1.0, 3.0, 7.0)


def record(n, ok, detail):
    ACCEPTANCE.append(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


class Entry:
    def __init__(self, w):
        self.w = w
        self.prob = InverseProblem(w, burgers(), T)
        self.ustar = self.prob.extremal
        self.sharps = [construct_sharp(self.prob, x) for x, _, _ in self.prob.jumps]

    def members(self):
        """Every constructed member: vertex, sharp data, cone points, tents."""
        out = [("extremal", self.ustar)]
        for k, s in enumerate(self.sharps):
            out.append((f"sharp{k}", s))
            out += [(f"cone{k}-{th}", cone_combination(self.prob, s, th)) for th in THETAS]
        if self.sharps:
            out += [(f"tent{k}", v) for k, v in enumerate(tent_family(self.prob, self.sharps[0], 3))]
        return out


@pytest.fixture(scope="module")
def corpus():
    return [Entry(w) for w in corpus_generate(7, 20)]


@pytest.fixture(scope="module")
def shock_prob():
    return InverseProblem(PiecewiseProfile.step(0.0, 1.0, 0.0), burgers(), T)


def test_criterion_01_attainability_gate():
    f = burgers()
    cases = [(w, True) for w in corpus_generate(101, 50)] + [(w, False) for w in violating_targets(101, 20)]
    right = 0
    for i, (w, expected) in enumerate(cases):
        verdict = check_oleinik(build_pmap(w, f, T)).admissible
        oracle = pairwise_oleinik(w, f, T, n_pairs=10_000, L=L, seed=i)
        right += verdict == oracle == expected
    record(1, right == len(cases), f"{right}/{len(cases)} verdicts agree with the pairwise oracle")


def test_criterion_02_round_trip(corpus):
    lax = [l1_distance(evolve_cl_profile(e.ustar, burgers(), T, -L, L), e.w, -L, L) for e in corpus]
    fv = [l1_distance(evolve_fv(e.ustar, burgers(), T, 1e-3, -L, L), e.w, -L, L) for e in corpus]
    ok = max(lax) <= 1e-4 and max(fv) <= 1e-2
    record(2, ok, f"max L1 Lax-Hopf {max(lax):.2e} (<= 1e-4), Godunov dx=1e-3 {max(fv):.2e} (<= 1e-2)")


def test_criterion_03_construction_equality(corpus):
    d = [l1_distance(e.ustar, construct_extremal_reverse(e.prob), -L, L) for e in corpus]
    record(3, max(d) <= 1e-6, f"max L1 pullback vs reverse {max(d):.2e} (<= 1e-6)")


def test_criterion_04_membership(corpus):
    bad_member, bad_spoiler, disagree, n_members, n_spoilers = [], [], 0, 0, 0
    for i, e in enumerate(corpus):
        for name, m in e.members():
            n_members += 1
            cl = membership_cl(e.prob, m)
            hj = membership_hj(e.prob, member_primitive(e.prob, m))
            if not (cl.verdict and hj.verdict):
                bad_member.append((i, name))
            disagree += cl.verdict != hj.verdict
        spoilers = [spoiler_negative(e.prob, e.ustar, x, 10) for x, _, _ in e.prob.jumps]
        spoilers.append(spoiler_bump(e.prob, e.ustar, 10))
        for sp in spoilers:
            n_spoilers += 1
            cl = membership_cl(e.prob, sp)
            hj = membership_hj(e.prob, member_primitive(e.prob, sp))
            if not (cl.certified_fail and hj.certified_fail):
                bad_spoiler.append(i)
            disagree += cl.verdict != hj.verdict
    ok = not bad_member and not bad_spoiler and disagree == 0
    record(4, ok, f"{n_members} members pass, {n_spoilers} spoilers certified-fail, "
                  f"{len(bad_member)}+{len(bad_spoiler)} exceptions, {disagree} CL/HJ disagreements")


def test_criterion_05_face_structure(shock_prob):
    sharp = construct_sharp(shock_prob, 0.0)
    xs = np.union1d(np.linspace(-1.5, 0.5, 20001), sharp.knots)
    worst_avg, min_eig = 0.0, np.inf
    for N in range(1, 6):
        fam = tent_family(shock_prob, sharp, N)
        avg = sum(v(xs) for v in fam) / (N + 1)
        worst_avg = max(worst_avg, float(np.max(np.abs(avg - sharp(xs)))))
        D = np.array([(v - fam[0])(xs) for v in fam[1:]])
        min_eig = min(min_eig, float(np.linalg.eigvalsh(D @ D.T).min()))
    record(5, worst_avg <= 1e-12 and min_eig > 0,
           f"average identity error {worst_avg:.1e} (<= 1e-12), smallest Gram eigenvalue {min_eig:.2e} (> 0)")


def test_criterion_06_vertex_uniqueness(corpus):
    vertex_ok = 0
    faces, face_ok = 0, 0
    for e in corpus:
        try:
            tent_family(e.prob, e.ustar, 2)
        except NoFaceError:
            vertex_ok += 1
        if not e.sharps:
            continue
        for name, m in e.members():
            if name == "extremal" or name.endswith("-0.0"):
                continue  # theta = 0 is the vertex itself
            faces += 1
            try:
                tent_family(e.prob, m, 2)
                face_ok += 1
            except NoFaceError:
                pass
    ok = vertex_ok == len(corpus) and face_ok == faces
    record(6, ok, f"vertex has no face on {vertex_ok}/{len(corpus)} targets; "
                  f"tents built for {face_ok}/{faces} other members")


def test_criterion_07_singleton(corpus):
    right = sum((uniqueness_probe(e.prob) == "singleton") == (not e.w.jumps()) for e in corpus)
    n_free = sum(not e.w.jumps() for e in corpus)
    record(7, right == len(corpus), f"{right}/{len(corpus)} correct ({n_free} jump-free targets)")


def test_criterion_08_submodularity(corpus):
    rng = np.random.default_rng(88)
    U0 = corpus[1].ustar.primitive(0.0)
    n = 10_000
    x = np.sort(rng.uniform(-L, L, (n, 2)), axis=1)
    y = np.sort(rng.uniform(-L, L, (n, 2)), axis=1)
    f = burgers()
    lhs = s_value(U0, f, T, x[:, 0], y[:, 0]) + s_value(U0, f, T, x[:, 1], y[:, 1])
    rhs = s_value(U0, f, T, x[:, 0], y[:, 1]) + s_value(U0, f, T, x[:, 1], y[:, 0])
    margin = rhs - lhs
    strict = (x[:, 0] < x[:, 1]) & (y[:, 0] < y[:, 1])
    record(8, bool(np.all(margin[strict] > 0)) and strict.sum() == n,
           f"{int((margin > 0).sum())}/{n} quadruples strict, min margin {margin.min():.2e}")


def test_criterion_09_closedness(corpus):
    checked, ok = 0, True
    theta_star = 2.0
    for e in corpus:
        for s in e.sharps:
            limit = cone_combination(e.prob, s, theta_star)
            dists = []
            for n in (1, 10, 100, 1000):
                m = cone_combination(e.prob, s, theta_star - 1.0 / n)
                ok &= membership_cl(e.prob, m).verdict
                dists.append(l1_distance(m, limit, -2 * L, 2 * L))
            ok &= bool(np.all(np.diff(dists) < 0)) and dists[-1] <= 1e-2 * dists[0]
            ok &= membership_cl(e.prob, limit).verdict
            ok &= membership_hj(e.prob, member_primitive(e.prob, limit)).verdict
            checked += 1
    record(9, ok and checked > 0, f"{checked} member sequences converge in L1 to members")


def test_criterion_10_empty_interior(corpus):
    refuted, total, worst_norm = 0, 0, 0.0
    for e in corpus:
        for _, m in e.members():
            for n in (10, 100):
                sp = spoiler_bump(e.prob, m, n)
                norm = l1_distance(sp, m, -4 * L, 4 * L)
                worst_norm = max(worst_norm, norm * n)
                total += 1
                refuted += membership_cl(e.prob, sp).certified_fail and norm <= 2 / n + 1e-12
    record(10, refuted == total, f"{refuted}/{total} bump perturbations refuted, max n*||bump|| = {worst_norm:.3f} (<= 2)")


def test_criterion_11_partition_measure(corpus):
    ok = True
    worst = ""
    for e in corpus:
        part = e.prob.partition
        rest = part.complement(-L, L)
        points = [a for a, b in rest if b - a <= 1e-12]
        bound = e.w.n_pieces + 2 + len(e.w.jumps())
        if len(points) != len(rest) or len(points) > bound:
            ok = False
            worst = f"; target with {len(rest)} leftover pieces vs bound {bound}"
    record(11, ok, f"complement of X_i and X_ii in [-L, L] is a finite point set on all {len(corpus)} targets{worst}")


def test_criterion_12_solver_cross_validation():
    f = burgers()
    dx = 1e-3
    shock = PiecewiseProfile.step(0.0, 1.0, 0.0)
    rare = PiecewiseProfile.step(0.0, 0.0, 1.0)
    exact_rare = PiecewiseProfile.from_pieces([(0.0, 1.0, 0.0, 1.0)], 0.0, 1.0)

    lax_shock = evolve_cl_profile(shock, f, 1.0, -2, 2, dx=dx)
    pos_lax = [x for x, _, _ in lax_shock.jumps(1e-3)]
    fv_shock = evolve_fv(shock, f, 1.0, dx, -2, 2)
    centers = fv_shock.knots[:-1] + 0.5 * dx
    i = np.nonzero((fv_shock.a[:-1] >= 0.5) & (fv_shock.a[1:] < 0.5))[0][0]
    pos_fv = centers[i] + 0.5 * dx
    d_shock = max(abs(pos_lax[0] - 0.5) if len(pos_lax) == 1 else np.inf, abs(pos_fv - 0.5))

    e_lax = l1_distance(evolve_cl_profile(rare, f, 1.0, -2, 3, dx=dx), exact_rare, -2, 3)
    e_fv = l1_distance(evolve_fv(rare, f, 1.0, dx, -2, 3), exact_rare, -2, 3)

    xs = np.linspace(-3, 3, 1000)
    lifted = lift_cl_to_hj(shock, f, 1.0, xs, gamma=-2.0, c=0.0)
    direct = evolve_hj(shock.primitive(-2.0), f, 1.0, xs)
    d_hj = float(np.max(np.abs(lifted - direct)))
    ok = d_shock <= dx and max(e_lax, e_fv) <= 1e-2 and d_hj <= 1e-5
    record(12, ok, f"shock position error {d_shock:.1e} (<= {dx}), rarefaction L1 Lax-Hopf {e_lax:.1e} "
                   f"Godunov {e_fv:.1e} (<= 1e-2), lift vs HJ {d_hj:.1e} (<= 1e-5)")
