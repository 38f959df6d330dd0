import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dlab.errors import InvalidCutoffError, ResolutionError, UnsupportedOrderError
from dlab.fieldio import read_field_binary, read_field_csv, write_field_binary, write_field_csv
from dlab.spectral_core import (
    Field,
    Grid1D,
    antiderivative_highpass,
    band_project,
    check_resolved,
    dealias,
    evaluate_at,
    from_spectrum,
    homogeneous_sobolev_norm,
    inner,
    mass,
    resample,
    sobolev_norm,
    spectral_derivative,
)

from .conftest import gaussian

TORUS = Grid1D.torus(64)


def random_field(seed: int, grid: Grid1D = TORUS, modes: int = 12, real: bool = False) -> Field:
    rng = np.random.default_rng(seed)
    spec = np.zeros(grid.num_points, dtype=complex)
    k = np.r_[0:modes, -modes + 1 : 0]
    spec[k] = rng.normal(size=k.size) + 1j * rng.normal(size=k.size)
    f = from_spectrum(grid, spec)
    return Field(grid, f.samples.real, real=True) if real else f


seeds = st.integers(0, 2**32 - 1)


# oracles ---------------------------------------------------------------------


@pytest.mark.parametrize("s", [-0.75, -0.25, 0.0, 0.5, 1.0, 2.0])
def test_single_mode_norm_closed_form(s):
    N, a = 5, 0.7 - 0.2j
    f = Field(TORUS, a * np.exp(1j * N * TORUS.x))
    assert sobolev_norm(f, s) == pytest.approx(np.sqrt(2 * np.pi) * abs(a) * (1 + N * N) ** (s / 2), rel=1e-12)


def test_derivatives_of_trig_polynomial():
    f = Field(TORUS, np.sin(3 * TORUS.x), real=True)
    expected = {1: 3 * np.cos(3 * TORUS.x), 2: -9 * np.sin(3 * TORUS.x), 3: -27 * np.cos(3 * TORUS.x),
                4: 81 * np.sin(3 * TORUS.x)}
    for order, ref in expected.items():
        # rounding grows like nyquist^order
        np.testing.assert_allclose(spectral_derivative(f, order).samples.real, ref, atol=1e-9)


def test_gaussian_l2_matches_integral():
    g = Grid1D(256, 40)
    assert mass(gaussian(g)) == pytest.approx(np.sqrt(np.pi / 2), rel=1e-13)


def test_homogeneous_norm_ignores_mean():
    f = Field(TORUS, 3.0 + np.cos(2 * TORUS.x))
    assert homogeneous_sobolev_norm(f, 1.0) == pytest.approx(np.sqrt(np.pi) * 2, rel=1e-12)


def test_evaluate_at_reproduces_nodes_and_decays_outside():
    g = Grid1D(128, 20)
    f = gaussian(g)
    np.testing.assert_allclose(evaluate_at(f, g.x), f.samples, atol=1e-12)
    assert np.allclose(evaluate_at(f, [0.123]), np.exp(-0.123**2), atol=1e-12)
    assert evaluate_at(f, [15.0], periodic=False)[0] == 0


# properties --------------------------------------------------------------------


@given(seeds)
def test_parseval(seed):
    f = random_field(seed)
    assert sobolev_norm(f, 0.0) ** 2 == pytest.approx(mass(f), rel=1e-12)
    assert inner(f, f).real == pytest.approx(mass(f), rel=1e-12)


@given(seeds, st.floats(-2, 2), st.floats(0.01, 2))
def test_norm_monotone_in_s(seed, s, ds):
    f = random_field(seed)
    assert sobolev_norm(f, s) <= sobolev_norm(f, s + ds) * (1 + 1e-12)


@given(seeds, st.floats(-1, 2), st.integers(1, 4))
def test_derivative_bound(seed, s, order):
    f = random_field(seed)
    assert sobolev_norm(spectral_derivative(f, order), s - order) <= sobolev_norm(f, s) * (1 + 1e-12)


@given(seeds, st.floats(0, 10), st.floats(0, 20))
def test_band_projection_idempotent_and_self_adjoint(seed, lo, width):
    f, g = random_field(seed), random_field(seed + 1)
    P = lambda h: band_project(h, lo, lo + width)
    np.testing.assert_allclose(P(P(f)).samples, P(f).samples, atol=1e-12)
    assert inner(P(f), g) == pytest.approx(inner(f, P(g)), abs=1e-10)


@given(seeds)
def test_dealias_idempotent_and_reality_preserving(seed):
    f = random_field(seed, real=True)
    d = dealias(f)
    assert d.real and np.all(d.samples.imag == 0)
    np.testing.assert_allclose(dealias(d).samples, d.samples, atol=1e-12)


@given(seeds, st.integers(1, 4))
def test_real_fields_stay_real_under_derivatives(seed, order):
    f = random_field(seed, real=True)
    d = spectral_derivative(f, order)
    assert d.real and np.all(d.samples.imag == 0)


@given(seeds)
def test_resample_round_trip(seed):
    f = random_field(seed)
    up = resample(f, 256)
    np.testing.assert_allclose(resample(up, 64).samples, f.samples, atol=1e-12)
    assert sobolev_norm(up, 1.0) == pytest.approx(sobolev_norm(f, 1.0), rel=1e-12)


@given(seeds, st.sampled_from([1.0, 2.0, 4.0]))
def test_highpass_antiderivative_inverts_derivative(seed, cutoff):
    f = random_field(seed)
    hp = band_project(f, cutoff)
    # Nyquist carries no odd derivative, so drop it from the comparison
    back = antiderivative_highpass(spectral_derivative(f, 1), cutoff)
    keep = np.abs(TORUS.wavenumbers) < TORUS.nyquist
    np.testing.assert_allclose((back.spectrum() - hp.spectrum())[keep], 0, atol=1e-10)


# errors ------------------------------------------------------------------------


def test_grid_and_field_validation():
    with pytest.raises(ValueError):
        Grid1D(100, 1.0)
    with pytest.raises(ValueError):
        Grid1D(64, -1.0)
    with pytest.raises(ValueError):
        Field(TORUS, np.ones(10))
    with pytest.raises(ValueError):
        Field(TORUS, 1j * np.ones(64), real=True)


def test_unsupported_order_and_bad_cutoffs():
    f = random_field(0)
    with pytest.raises(UnsupportedOrderError):
        spectral_derivative(f, 5)
    with pytest.raises(InvalidCutoffError):
        band_project(f, 3.0, 1.0)
    with pytest.raises(InvalidCutoffError):
        antiderivative_highpass(f, 0.0)


def test_under_resolution_is_reported():
    g = Grid1D(64, 2 * np.pi)
    with pytest.raises(ResolutionError):
        check_resolved(Field(g, np.exp(1j * 30 * g.x)), "carrier")
    with pytest.raises(ResolutionError):
        check_resolved(gaussian(Grid1D(256, 4), width=2.0), "wide bump", decaying=True)


def test_field_files_round_trip(tmp_path):
    g = Grid1D(64, 10)
    f = gaussian(g, 0.5) * np.exp(0.3j * g.x)
    write_field_csv(f, tmp_path / "f.csv")
    np.testing.assert_array_equal(read_field_csv(tmp_path / "f.csv", g.box_length).samples, f.samples)
    write_field_binary(f, tmp_path / "f.bin")
    back = read_field_binary(tmp_path / "f.bin", g.x_min)
    np.testing.assert_array_equal(back.samples, f.samples)
    assert back.grid.same_as(g)
