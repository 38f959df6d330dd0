import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from dlab import explicit_families as fam
from dlab.errors import DivergenceError, DomainError, NonConvergenceError, ResonanceError
from dlab.evolvers import EquationSpec, residual, residual_of_profile
from dlab.spectral_core import Field, Grid1D, mass, sobolev_norm

from .conftest import gaussian


# profiles w ----------------------------------------------------------------------


@pytest.mark.parametrize("kappa", [0, 1, 2, 4])
def test_vanishing_profile_has_zero_low_moments(kappa):
    w = fam.vanishing_profile(1.0, kappa)
    for j in range(kappa):
        val, _ = integrate.quad(lambda y: y**j * w(np.array([y]))[0], -12, 12)
        assert abs(val) < 1e-10
    y = np.linspace(-3, 3, 7)
    h = 1e-6
    np.testing.assert_allclose(w.derivative(y), (w(y + h) - w(y - h)) / (2 * h), atol=1e-6)


def test_profile_eps_and_sampling():
    w = fam.gaussian_profile(0.3)
    g = Grid1D(64, 10)
    assert w.sample(g).real
    np.testing.assert_allclose(w.with_eps(1.0)(g.x) * 0.3, w(g.x))


# ODE profile and line family --------------------------------------------------------


def test_ode_profile_solves_the_ode_exactly():
    g = Grid1D(256, 20)
    w = fam.gaussian_profile(0.7)
    for s in (0.05, 0.5, 1.0):
        v = fam.ode_profile(w, 1.3, s, g)
        rhs = -1j / s * np.abs(v.samples) ** 2 * v.samples
        np.testing.assert_allclose(fam.ode_profile_s_derivative(w, 1.3, s, g).samples, rhs, atol=1e-14)
    with pytest.raises(DomainError):
        fam.ode_profile(w, 1.0, 0.0, g)


def test_nls_profile_time_derivative_matches_finite_differences():
    g = Grid1D(1024, 60)
    prof = fam.NlsLineProfile(fam.gaussian_profile(0.4), 1.0, g)
    t, h = 2.0, 1e-4
    fd = (prof(t + h).samples - prof(t - h).samples) / (2 * h)
    np.testing.assert_allclose(prof.time_derivative(t).samples, fd, atol=1e-7)


def test_nls_profile_residual_decays():
    g = Grid1D(2048, 120)
    prof = fam.NlsLineProfile(fam.gaussian_profile(0.3), 1.0, g)
    times = [1.0, 2.0, 4.0, 8.0, 16.0]
    res = residual_of_profile(EquationSpec.nls(), prof, times).values
    slope = np.polyfit(np.log1p(times), np.log(res), 1)[0]
    assert slope <= -1.2


def test_exact_pc_construction():
    w = fam.gaussian_profile(0.05)
    g = Grid1D(1024, 40)
    traj = fam.construct_exact_pc(w, 1.0, grid=g, save_every=20)
    # satisfies the PC_NLS equation it was built from
    assert residual(EquationSpec.pc_nls(), traj).interior().max() < 1e-4
    ratios = [
        math.sqrt(mass(v - fam.ode_profile(w, 1.0, s, g))) / s
        for s, v in zip(traj.times, traj.states)
        if s >= 1 / 32
    ]
    assert max(ratios) / min(ratios) < 8
    other = fam.construct_exact_pc(w, 1.1, grid=g, save_every=20)
    lip = max(math.sqrt(mass(a - b)) for a, b in zip(traj.states, other.states)) / 0.1
    assert lip <= 10 * math.sqrt(mass(w.sample(g)))


def test_exact_pc_trivial_and_failing_cases():
    g = Grid1D(256, 40)
    zero = fam.construct_exact_pc(fam.gaussian_profile(0.0), 1.0, grid=g, save_every=100)
    assert all(s.max_abs() == 0 for s in zero.states)
    with pytest.raises(NonConvergenceError):
        fam.construct_exact_pc(fam.gaussian_profile(3.0), 1.0, grid=Grid1D(1024, 40), save_every=100)
    with pytest.raises(DomainError):
        fam.construct_exact_pc(fam.gaussian_profile(0.1), 1.0, s_start=1e-3)


def test_decoherence_curve_against_quadrature():
    w = fam.gaussian_profile(0.1)
    for s, d in fam.decoherence_curve(w, 1.0, 1.2, [1.0, 1e-3]):
        L = math.log(s)
        f = lambda y: abs(0.1 * math.exp(-y * y)) ** 2 * abs(
            np.exp(-1j * 0.01 * math.exp(-2 * y * y) * L) - 1.2 * np.exp(-1j * 1.44 * 0.01 * math.exp(-2 * y * y) * L)
        ) ** 2
        ref = math.sqrt(integrate.quad(f, -np.inf, np.inf, epsabs=1e-16)[0])
        assert d == pytest.approx(ref, abs=1e-9)
    assert fam.decoherence_crossing(w, 1.0, 1.0) == math.inf


# long-time mKdV profile ----------------------------------------------------------


def test_muchado_profile_basics():
    prof = fam.MuchadoProfile(fam.gaussian_profile(), 0.1, 16.0)
    with pytest.raises(DomainError):
        prof(1.5)
    norms = [sobolev_norm(prof(t), 0.25) for t in (2.0, 8.0, 32.0)]
    assert max(norms) / min(norms) < 4
    t = 4.0
    ratio = prof.harmonic(t, 3).max_abs() / prof.harmonic(t, 1).max_abs()
    assert ratio == pytest.approx(0.25 * 0.1**2 * 16.0**-3 / t, rel=1e-3)


def test_muchado_analytic_derivative_matches_fd():
    N, t, h = 8.0, 4.0, 1e-6
    grid = fam.muchado_grid(N, t)
    prof = fam.MuchadoProfile(fam.gaussian_profile(), 0.1, N, grid_fn=lambda _: grid)
    fd = (prof(t + h).samples - prof(t - h).samples) / (2 * h)
    scale = np.abs(fd).max()
    np.testing.assert_allclose(prof.time_derivative(t).samples, fd, atol=1e-5 * scale)


# small dispersion, supercritical datum ------------------------------------------------


def test_small_dispersion_profile_is_exact_without_dispersion():
    g = Grid1D(128, 20)
    f = fam.small_dispersion_profile(fam.gaussian_profile(0.8), 1.0, 0.7, g)
    np.testing.assert_allclose(np.abs(f.samples), 0.8 * np.exp(-g.x**2), atol=1e-15)


def test_supercritical_scaling():
    p = fam.supercritical_params(-1.0, 0.1)
    assert p.gamma == 3.0
    assert p.lam == pytest.approx(1e-3)
    with pytest.raises(DomainError):
        fam.supercritical_params(-0.25, 0.1)
    with pytest.warns(fam.SupercriticalWarning):
        fam.supercritical_datum(fam.gaussian_profile(), 1.0, 0.1, -1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fam.supercritical_datum(fam.vanishing_profile(1.0, 4), 1.0, 0.1, -1.0)


# periodic families ----------------------------------------------------------------


def test_plane_wave_closed_form():
    u = fam.periodic_plane_wave(8, 0.7, 0.3)
    x = u.grid.x
    np.testing.assert_allclose(u.samples, 0.7 * np.exp(1j * (8 * x + (64 + 0.49) * 0.3)))
    with pytest.raises(DomainError):
        fam.periodic_plane_wave(40, 1.0, 0.0, Grid1D.torus(64))


def test_odesystem_first_sweep_oracle_and_residual():
    sol = fam.solve_odesystem(16, 0.5, 9)
    # by hand: sigma = 6 N b1^2 and, keeping b1 and b3 in c_3 = b1^3 + 6 b1^2 b3,
    # b3 = 2 N b1^3 / (-8 N^3 + sigma - 12 N b1^2)
    N, b1 = 16, 0.5
    assert sol.sigma == pytest.approx(6 * N * b1**2, rel=1e-3)
    assert sol.b(3) == pytest.approx(2 * N * b1**3 / (-8 * N**3 + 6 * N * b1**2 - 12 * N * b1**2), rel=1e-4)
    assert sol.residual_norm < 1e-12
    assert 0.5 * 6 * 16 * 0.25 <= sol.sigma <= 2 * 6 * 16 * 0.25
    assert abs(sol.b(5)) < abs(sol.b(3)) * 1e-3


def test_odesystem_wave_solves_mkdv():
    sol = fam.solve_odesystem(4, 0.5, 9)
    prof = fam.PeriodicMkdvProfile(sol)
    res = residual_of_profile(EquationSpec.mkdv(), prof, [0.0, 0.3])
    # harmonics beyond k_max = 9 are truncated, which sets the floor
    assert res.values.max() < 1e-8 * sobolev_norm(prof.time_derivative(0.0), 0.0)


def test_odesystem_csv_round_trip(tmp_path):
    sol = fam.solve_odesystem(8, 0.5, 7)
    sol.to_csv(tmp_path / "b.csv")
    back = fam.OdeSystemSolution.from_csv(tmp_path / "b.csv")
    assert back.sigma == sol.sigma and back.k_max == 7
    assert all(back.b(k) == sol.b(k) for k in range(1, 8, 2))


def test_odesystem_rejects_bad_input():
    with pytest.raises(DomainError):
        fam.solve_odesystem(8, 0.0)
    with pytest.raises(ValueError):
        fam.solve_odesystem(8, 0.5, k_max=4)
    with pytest.raises((DivergenceError, ResonanceError)):
        fam.solve_odesystem(2, 40.0)


def test_periodic_separation_trivial_and_exact():
    same = fam.separation_time_periodic("NLS", 8, 1.0, 1.0, -0.25)
    assert not same.separated and same.measured == math.inf
    sep = fam.separation_time_periodic("NLS", 8, 1.0, 1.1, -0.25)
    # the crossing solves | a - a' e^{i theta} | = (a + a')/2 with theta = (a'^2 - a^2) t
    a, a2 = 8**0.25, 1.1 * 8**0.25
    theta = math.acos((a * a + a2 * a2 - (a + a2) ** 2 / 4) / (2 * a * a2))
    assert sep.measured == pytest.approx(theta / (a2 * a2 - a * a), rel=1e-10)
    assert fam.separation_time_periodic("MKDV", 8, 1.0, 1.0, 0.0).separated is False
