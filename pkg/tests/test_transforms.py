import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dlab.errors import DomainError, HypothesisViolationError, ResolutionError
from dlab.evolvers import EquationSpec, evolve
from dlab.spectral_core import Field, Grid1D, mass, sobolev_norm
from dlab.transforms import (
    EmbedParams,
    ModulationParams,
    embedding_grid,
    galilean_boost,
    modulate,
    modulated_sobolev_norm,
    modulation_bound_ratio,
    nls_to_mkdv_embed,
    pc_forward,
    pc_inverse,
    scale_kdv,
    scale_mkdv,
    scale_nls,
    translate,
)

from .conftest import gaussian

LINE = Grid1D(512, 40)


def test_modulated_norm_matches_a_sampled_field():
    u = gaussian(Grid1D(256, 20))
    p = ModulationParams(amplitude=0.5, carrier=6.0, width=0.8, center=0.3)
    big = Grid1D(1024, 20)
    v = modulate(u, p, target=big)
    for s in (-0.5, 0.0, 1.0):
        assert modulated_sobolev_norm(u, s, p) == pytest.approx(sobolev_norm(v, s), rel=1e-9)


def test_modulate_reports_unresolved_carrier():
    u = gaussian(Grid1D(64, 20))
    with pytest.raises(ResolutionError, match="carrier"):
        modulate(u, ModulationParams(1.0, carrier=9.0, width=1.0))


def test_modulation_regimes():
    u = gaussian(LINE)
    r = modulation_bound_ratio(u, ModulationParams(1.0, 50.0, 1.0), 0.5)
    assert r.regime == "i" and 0.5 < r.ratio < 2
    r2 = modulation_bound_ratio(u, ModulationParams(1.0, 50.0, 1.0), -0.25, sigma=0.5)
    assert r2.regime == "ii" and 0.5 < r2.lower_ratio < 2
    with pytest.raises(HypothesisViolationError):
        modulation_bound_ratio(u, ModulationParams(1.0, 50.0, 1.0), -0.25, sigma=0.1)


@given(st.floats(0.05, 3.0))
def test_pc_round_trip(t):
    u = gaussian(Grid1D(1024, 40), 0.5, center=0.5) * np.exp(0.4j * Grid1D(1024, 40).x)
    v, s = pc_forward(u, t, check=False)
    back = pc_inverse(v, s, target=u.grid, check=False).field
    np.testing.assert_allclose(back.samples, u.samples, atol=1e-12)
    assert mass(v) == pytest.approx(mass(u), rel=1e-12)


def test_pc_at_t0_is_the_chirp():
    u = gaussian(LINE)
    v, s = pc_forward(u, 0.0)
    assert s == 1.0
    np.testing.assert_allclose(v.samples, np.exp(1j * LINE.x**2 / 4) * u.samples)
    with pytest.raises(DomainError):
        pc_forward(u, -1.0)
    with pytest.raises(DomainError):
        pc_inverse(u, 0.0)


def test_pc_conjugates_nls_to_pc_nls():
    # NLS from t=0 to t=1 is PC_NLS from s=1/2 to s=1 read backwards
    g = Grid1D(2048, 96)
    u0 = gaussian(g, 0.3)
    u1 = evolve(EquationSpec.nls(), u0, 0.0, 1.0, 1e-3, save_every=10**9).final
    v_half = pc_forward(u1, 1.0).field
    v_one = evolve(EquationSpec.pc_nls(), v_half, 0.5, 1.0, 1e-4, save_every=10**9).final
    back = pc_inverse(v_one, 1.0, check=False).field
    expected = gaussian(back.grid, 0.3)
    assert np.sqrt(mass(back - expected)) < 1e-6


def test_translate_and_boost_oracles():
    u = gaussian(LINE)
    np.testing.assert_allclose(translate(u, 1.5).samples, np.exp(-((LINE.x + 1.5) ** 2)), atol=1e-12)
    b = galilean_boost(u, 2.0, 0.0)
    np.testing.assert_allclose(b.samples, np.exp(1j * LINE.x) * u.samples, atol=1e-12)


def test_galilean_covariance_of_nls():
    g = Grid1D(512, 60)
    u0 = gaussian(g, 0.5)
    alpha, T = 1.5, 0.5
    u = evolve(EquationSpec.nls(), u0, 0.0, T, 5e-4, save_every=10**9).final
    w = evolve(EquationSpec.nls(), galilean_boost(u0, alpha, 0.0), 0.0, T, 5e-4, save_every=10**9).final
    assert np.sqrt(mass(w - galilean_boost(u, alpha, T))) < 1e-6


@pytest.mark.parametrize("scale,amp,time", [(scale_nls, 1, 2), (scale_mkdv, 1, 3), (scale_kdv, 2, 3)])
def test_scaling_exact_on_grid(scale, amp, time):
    u = gaussian(LINE, real=True)
    out, t = scale(u, 2.0, 0.5)
    assert t == pytest.approx(0.5 * 2.0**time)
    np.testing.assert_allclose(out.samples, u.samples / 2.0**amp)
    np.testing.assert_allclose(out.grid.x, 2.0 * LINE.x)
    with pytest.raises(DomainError):
        scale(u, 1000.0)


def test_kdv_scaling_covariance():
    g = Grid1D(256, 40)
    u0 = gaussian(g, 0.3, real=True)
    lam, T = 2.0, 0.1
    s0, _ = scale_kdv(u0, lam)
    direct = evolve(EquationSpec.kdv(), s0, 0.0, T * lam**3, 1e-3, save_every=10**9).final
    via = scale_kdv(evolve(EquationSpec.kdv(), u0, 0.0, T, 1e-3 / lam**3, save_every=10**9).final, lam).field
    assert np.sqrt(mass(direct - via)) < 1e-8


def test_embedding_has_the_advertised_envelope():
    g = Grid1D(256, 24)
    u = gaussian(g, 0.3) * np.exp(0.2j * g.x)
    N = 8.0
    V = nls_to_mkdv_embed(u, EmbedParams(N, 0.0))
    assert V.real
    assert V.grid.box_length == pytest.approx(g.box_length * np.sqrt(3 * N))
    z = V.grid.x
    env = 0.3 * np.exp(-((z / np.sqrt(3 * N)) ** 2)) * np.exp(0.2j * z / np.sqrt(3 * N))
    np.testing.assert_allclose(V.samples.real, np.sqrt(2 / (3 * N)) * (np.exp(1j * N * z) * env).real, atol=1e-12)
    assert embedding_grid(g, N).nyquist >= 4.5 * N
    lab = nls_to_mkdv_embed(u, EmbedParams(N, 0.01, frame="lab"))
    co = nls_to_mkdv_embed(u, EmbedParams(N, 0.01))
    np.testing.assert_allclose(translate(lab, -3 * N**2 * 0.01).samples, co.samples, atol=1e-10)
