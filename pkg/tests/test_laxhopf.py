import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from backtrace.flux import burgers
from backtrace.laxhopf import (
    evolve_cl,
    evolve_cl_profile,
    evolve_hj,
    lift_cl_to_hj,
    minimize,
    s_value,
    variational_state,
)
from backtrace.oracle import evolve_fv
from backtrace.piecewise import PiecewiseProfile, l1_distance

from conftest import cosh_flux
from strategies import profiles


def test_s_value_examples(f_burgers):
    zero = PiecewiseProfile.constant(0.0).primitive(0.0)
    ys = np.linspace(-2, 2, 9)
    assert np.allclose(s_value(zero, f_burgers, 1.0, 0.7, ys), (0.7 - ys) ** 2 / 2)
    one = PiecewiseProfile.constant(1.0).primitive(0.0)
    assert np.allclose(s_value(one, f_burgers, 1.0, 0.0, ys), ys**2 / 2 + ys)
    st_ = variational_state(one, f_burgers, 1.0, 0.0)
    assert st_.minimizer_y == pytest.approx(-1.0, abs=1e-14)
    assert st_.state_u == pytest.approx(1.0, abs=1e-14)
    assert st_.value_s == pytest.approx(-0.5, abs=1e-14)
    assert s_value(zero, cosh_flux(), 0.8, 0.3, 0.3) == 0.0


def test_s_value_speed_range(f_cosh):
    zero = PiecewiseProfile.constant(0.0).primitive(0.0)
    with pytest.raises(ValueError):
        s_value(zero, f_cosh, 1.0, 10.0, 0.0)


def test_shock_at_half(f_burgers, shock):
    left, right = evolve_cl(shock, f_burgers, 1.0, [0.4, 0.5, 0.6])
    assert list(left) == [1.0, 1.0, 0.0]
    assert list(right) == [1.0, 0.0, 0.0]
    prof = evolve_cl_profile(shock, f_burgers, 1.0, -2.0, 2.0)
    assert [x for x, _, _ in prof.jumps()] == [pytest.approx(0.5, abs=1e-9)]


def test_rarefaction_fan(f_burgers):
    u0 = PiecewiseProfile.step(0.0, 0.0, 1.0)
    xs = np.linspace(-1, 2, 301)
    left, right = evolve_cl(u0, f_burgers, 1.0, xs)
    assert np.allclose(left, np.clip(xs, 0, 1), atol=1e-14)
    assert np.array_equal(left, right)


def test_constants_invariant(f_burgers, f_cosh):
    for f in (f_burgers, f_cosh):
        left, right = evolve_cl(PiecewiseProfile.constant(0.6), f, 2.5, np.linspace(-3, 3, 13))
        assert np.allclose(left, 0.6, atol=1e-12) and np.allclose(right, 0.6, atol=1e-12)


def test_time_must_be_positive(f_burgers, shock):
    with pytest.raises(ValueError):
        evolve_cl(shock, f_burgers, 0.0, [0.0])
    with pytest.raises(ValueError):
        lift_cl_to_hj(shock, f_burgers, -1.0, [0.0])


def test_smallest_minimizer_at_shock(f_burgers, shock):
    y_lo, y_hi, _ = minimize(shock.primitive(0.0), f_burgers, 1.0, [0.5])
    assert y_lo[0] == pytest.approx(-0.5, abs=1e-14)
    assert y_hi[0] == pytest.approx(0.5, abs=1e-14)


def test_hj_examples(f_burgers):
    xs = np.linspace(-2, 2, 41)
    assert np.allclose(evolve_hj(PiecewiseProfile.constant(0.0).primitive(0.0), f_burgers, 1.3, xs), 0.0)
    U = evolve_hj(PiecewiseProfile.constant(1.0).primitive(0.0), f_burgers, 0.7, xs)
    assert np.allclose(U, xs - 0.35, atol=1e-14)


def test_hj_derivative_matches_cl_rarefaction(f_burgers):
    u0 = PiecewiseProfile.step(0.0, 0.0, 1.0)
    U0 = u0.primitive(0.0)
    # central differences straddling the fan edges x = 0, 1 see the kink, so stay off them
    xs = np.linspace(-0.9, 1.9, 57) + 0.013
    h = 1e-4
    dU = (evolve_hj(U0, f_burgers, 1.0, xs + h) - evolve_hj(U0, f_burgers, 1.0, xs - h)) / (2 * h)
    left, _ = evolve_cl(u0, f_burgers, 1.0, xs)
    assert np.max(np.abs(dU - left)) <= 1e-6


def test_lift_examples(f_burgers, shock):
    xs = np.linspace(-2, 2, 11)
    assert np.allclose(lift_cl_to_hj(PiecewiseProfile.constant(0.0), f_burgers, 1.0, xs), 0.0, atol=1e-14)
    U = lift_cl_to_hj(PiecewiseProfile.constant(1.0), f_burgers, 1.0, xs)
    assert np.allclose(U, xs - 0.5, atol=1e-12)
    xs = np.linspace(-3, 3, 1000)
    lifted = lift_cl_to_hj(shock, f_burgers, 1.0, xs, gamma=-2.0, c=0.0, dt=1e-3)
    direct = evolve_hj(shock.primitive(-2.0), f_burgers, 1.0, xs)
    assert np.max(np.abs(lifted - direct)) <= 1e-5


def test_lift_along_moving_path(f_burgers, shock):
    xs = np.linspace(-2, 2, 21)
    times = np.linspace(0, 1, 101)
    path = (times, -1.5 + 0.3 * times)
    lifted = lift_cl_to_hj(shock, f_burgers, 1.0, xs, gamma=path)
    direct = evolve_hj(shock.primitive(-1.5), f_burgers, 1.0, xs)
    assert np.max(np.abs(lifted - direct)) <= 1e-5
    with pytest.raises(ValueError):
        lift_cl_to_hj(shock, f_burgers, 1.0, xs, gamma=(np.array([0.0, 0.5, 1.0]), np.array([0.0, 1e7, 0.0])))


def test_cosh_shock_speed_matches_godunov(f_cosh):
    u0 = PiecewiseProfile.step(0.0, 1.0, -0.5)
    speed = (f_cosh.f(-0.5) - f_cosh.f(1.0)) / (-1.5)
    prof = evolve_cl_profile(u0, f_cosh, 1.0, -3, 3, dx=2e-3)
    jumps = [x for x, l, r in prof.jumps(1e-3)]
    assert jumps == [pytest.approx(float(speed), abs=1e-8)]
    fv = evolve_fv(u0, f_cosh, 1.0, 1e-3, -3, 3)
    assert l1_distance(fv, prof, -3, 3) <= 1e-2


@settings(max_examples=15, deadline=None)
@given(profiles(max_pieces=4, bound=1.0), st.floats(0.2, 0.8), st.floats(0.2, 0.8))
def test_semigroup(u0, t1, t2):
    f = burgers()
    L = 3.0
    big = L + 2 * (t1 + t2) + 4
    mid = evolve_cl_profile(u0, f, t1, -big, big)
    two_step = evolve_cl_profile(mid, f, t2, -L, L)
    one_step = evolve_cl_profile(u0, f, t1 + t2, -L, L)
    assert l1_distance(two_step, one_step, -L, L) <= 2e-6


@settings(max_examples=25, deadline=None)
@given(profiles(max_pieces=5, bound=1.5), st.floats(0.3, 2.0), st.integers(0, 1000))
def test_oleinik_decay_of_solutions(u0, t, seed):
    for f in (burgers(), cosh_flux()):
        rng = np.random.default_rng(seed)
        x = rng.uniform(-4, 4, 400)
        y = np.exp(rng.uniform(np.log(1e-4), np.log(4), 400))
        ul, _ = evolve_cl(u0, f, t, x)
        ur, _ = evolve_cl(u0, f, t, x + y)
        assert np.all(f.df(ur) - f.df(ul) <= y / t + 1e-8)


def test_conservation_with_vertical_boundaries(f_burgers):
    u0 = PiecewiseProfile.from_pieces([(-1, 0, 1.0, 0.0)], 0.0, 0.0)
    a, b, t1, t2 = -0.5, 0.8, 0.2, 1.0

    def mass(t):
        return evolve_cl_profile(u0, f_burgers, t, -3, 3).integrate(a, b)

    n = 400
    taus = np.linspace(t1, t2, n + 1)
    ua = np.array([evolve_cl(u0, f_burgers, tau, [a])[1][0] for tau in taus])
    ub = np.array([evolve_cl(u0, f_burgers, tau, [b])[1][0] for tau in taus])
    vals = f_burgers.f(ua) - f_burgers.f(ub)
    wts = np.ones(n + 1)
    wts[1:-1:2] = 4
    wts[2:-1:2] = 2
    flux_in = (t2 - t1) / n / 3 * np.sum(wts * vals)
    assert mass(t2) - mass(t1) == pytest.approx(flux_in, abs=1e-5)


@settings(max_examples=20, deadline=None)
@given(profiles(max_pieces=4, bound=1.2), profiles(max_pieces=3, bound=0.6, span=1.5), st.floats(0.2, 1.5))
def test_l1_contraction(u, bump, t):
    f = burgers()
    bump = PiecewiseProfile(bump.knots, bump.a, bump.b, 0.0, 0.0)
    v = u + bump
    L = 3 + 2 * t * 3
    su = evolve_cl_profile(u, f, t, -L, L)
    sv = evolve_cl_profile(v, f, t, -L, L)
    assert l1_distance(su, sv, -L, L) <= l1_distance(u, v, -L, L) + 1e-6


def test_submodularity_random_quadruples():
    rng = np.random.default_rng(8)
    for f in (burgers(), cosh_flux()):
        U0 = PiecewiseProfile.from_pieces([(-1, 1, 0.3, -0.2)], 0.3, -0.1).primitive(0.0)
        T = 1.0
        n = 10_000
        x = np.sort(rng.uniform(-1, 1, (n, 2)), axis=1)
        y = np.sort(rng.uniform(-1, 1, (n, 2)), axis=1)
        keep = (x[:, 0] < x[:, 1]) & (y[:, 0] < y[:, 1])
        x, y = x[keep], y[keep]
        lhs = s_value(U0, f, T, x[:, 0], y[:, 0]) + s_value(U0, f, T, x[:, 1], y[:, 1])
        rhs = s_value(U0, f, T, x[:, 0], y[:, 1]) + s_value(U0, f, T, x[:, 1], y[:, 0])
        assert np.all(rhs - lhs > 0)
