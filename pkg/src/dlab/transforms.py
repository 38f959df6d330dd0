"""Exact symmetry maps and the NLS to mKdV embedding, acting on sampled fields.

Equation conventions used throughout the package:

    NLS    -i u_t + u_xx = |u|^2 u
    mKdV   u_t + u_xxx = 6 u^2 u_x
    KdV    u_t + u_xxx = 6 u u_x
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, HypothesisViolationError, ResolutionError
from .spectral_core import (
    Field,
    Grid1D,
    check_resolved,
    evaluate_at,
    from_spectrum,
    resample,
    sobolev_norm,
)


@dataclass(frozen=True)
class ModulationParams:
    """v(x) = amplitude * exp(i carrier x) * u((x - center) / width)."""

    amplitude: complex = 1.0
    carrier: float = 0.0
    width: float = 1.0
    center: float = 0.0

    def __post_init__(self):
        if self.carrier < 0 or not self.width > 0:
            raise ValueError("carrier must be >= 0 and width > 0")

    @property
    def carrier_width(self) -> float:
        return self.carrier * self.width


@dataclass(frozen=True)
class EmbedParams:
    carrier: float
    time: float = 0.0
    frame: str = "comoving"

    def __post_init__(self):
        if not self.carrier > 0:
            raise ValueError("carrier must be positive")
        if self.frame not in ("comoving", "lab"):
            raise ValueError("frame must be 'comoving' or 'lab'")


class Rescaled(NamedTuple):
    field: Field
    time: float


class BoundRatio(NamedTuple):
    ratio: float
    regime: str
    lower_ratio: float


def modulate(
    u: Field,
    p: ModulationParams,
    target: Grid1D | None = None,
    periodic: bool = False,
    tol: float = 1e-8,
) -> Field:
    """Sample A e^{iMx} u((x - x0)/tau) on ``target`` (default: u's grid).

    u is read as a whole-line function (zero outside its box) unless
    ``periodic`` is set.
    """
    grid = target or u.grid
    x = grid.x
    if p.width == 1.0 and p.center == 0.0 and grid.same_as(u.grid):
        inner_vals = u.samples
    else:
        inner_vals = evaluate_at(u, (x - p.center) / p.width, periodic=periodic)
    out = Field(grid, p.amplitude * np.exp(1j * p.carrier * x) * inner_vals)
    try:
        check_resolved(out, "modulate", tol)
    except ResolutionError as exc:
        raise ResolutionError(
            f"{exc}; carrier={p.carrier:g} width={p.width:g} exceed grid Nyquist {grid.nyquist:g}"
        ) from None
    return out


def modulated_sobolev_norm(u: Field, s: float, p: ModulationParams) -> float:
    """||A e^{iMx} u((x-x0)/tau)||_{H^s} computed on u's own spectrum.

    Uses v_hat(xi) = A tau e^{-i xi x0} u_hat(tau (xi - M)), so
    ||v||^2 = |A|^2 tau (1/L) sum_k (1 + (M + xi_k / tau)^2)^s |u_hat_k|^2.
    No grid for v is needed, which keeps very large carriers affordable.
    """
    xi = u.grid.wavenumbers
    w = (1.0 + (p.carrier + xi / p.width) ** 2) ** s
    val = abs(p.amplitude) ** 2 * p.width * np.sum(w * np.abs(u.spectrum()) ** 2)
    return float(np.sqrt(val / u.grid.box_length))


def modulation_bound_ratio(u: Field, p: ModulationParams, s: float, sigma: float = 0.0) -> BoundRatio:
    """Ratio of ||v||_{H^s} to the modulation bound |A| tau^{1/2} M^s ||u||.

    Regimes: "i" when s >= 0 and M tau >= 1 (reference norm H^s); "ii" when
    -1/2 < s < 0, sigma >= |s| and tau M^{1 + s/sigma} >= 1 (reference norm
    H^sigma). ``lower_ratio`` divides by the L^2 norm instead, the quantity
    bounded below in the large-M tau limit.
    """
    M, tau = p.carrier, p.width
    if s >= 0 and M * tau >= 1:
        regime, ref = "i", sobolev_norm(u, s)
    elif -0.5 < s < 0 and sigma >= abs(s) and M > 0 and tau * M ** (1 + s / sigma) >= 1:
        regime, ref = "ii", sobolev_norm(u, sigma)
    else:
        raise HypothesisViolationError(
            f"no modulation regime applies for s={s}, sigma={sigma}, M={M}, tau={tau}"
        )
    v_norm = modulated_sobolev_norm(u, s, p)
    scale = abs(p.amplitude) * np.sqrt(tau) * M**s
    return BoundRatio(
        v_norm / (scale * ref), regime, v_norm / (scale * sobolev_norm(u, 0.0))
    )


def translate(u: Field, shift: float) -> Field:
    """u(x + shift) by Fourier phase."""
    return from_spectrum(u.grid, u.spectrum() * np.exp(1j * u.grid.wavenumbers * shift), u.real)


def galilean_boost(u: Field, alpha: float, t: float, tol: float = 1e-8) -> Field:
    """e^{i alpha x/2} e^{i alpha^2 t/4} u(t, x + alpha t) for NLS data at time t."""
    if alpha == 0:
        return u
    shifted = translate(u, alpha * t).samples
    x = u.grid.x
    out = Field(u.grid, np.exp(0.5j * alpha * x + 0.25j * alpha**2 * t) * shifted)
    return check_resolved(out, f"galilean_boost(alpha={alpha:g})", tol)


def _rescale(u: Field, lam: float, amp_power: float, t_in: float, time_power: float) -> Rescaled:
    if not 2.0**-8 <= lam <= 2.0**8:
        raise DomainError(f"scaling factor {lam} outside [2^-8, 2^8]")
    # x / lambda on the stretched grid lands exactly on the old nodes
    grid = u.grid.scaled(lam)
    return Rescaled(Field(grid, u.samples * lam**-amp_power, u.real), t_in * lam**time_power)


def scale_nls(u: Field, lam: float, t_in: float = 0.0) -> Rescaled:
    """lambda^{-1} u(t/lambda^2, x/lambda): box grows by lambda, time by lambda^2."""
    return _rescale(u, lam, 1.0, t_in, 2.0)


def scale_mkdv(u: Field, lam: float, t_in: float = 0.0) -> Rescaled:
    """lambda^{-1} u(t/lambda^3, x/lambda)."""
    return _rescale(u, lam, 1.0, t_in, 3.0)


def scale_kdv(u: Field, lam: float, t_in: float = 0.0) -> Rescaled:
    """lambda^{-2} u(t/lambda^3, x/lambda); H-dot^{-3/2} is the invariant norm."""
    return _rescale(u, lam, 2.0, t_in, 3.0)


class PcForward(NamedTuple):
    field: Field
    s: float


class PcInverse(NamedTuple):
    field: Field
    t: float


def pc_forward(u: Field, t: float, tol: float = 1e-8, check: bool = True) -> PcForward:
    """v(s, y) = s^{-1/2} exp(i y^2 / 4s) u(t, y/s) with s = 1/(t+1).

    The output grid is u's grid scaled by s, so no interpolation occurs.
    """
    if t < 0:
        raise DomainError(f"pseudo-conformal map needs t >= 0, got {t}")
    s = 1.0 / (t + 1.0)
    grid = u.grid.scaled(s)
    y = grid.x
    v = Field(grid, s**-0.5 * np.exp(1j * y * y / (4 * s)) * u.samples)
    if check:
        check_resolved(v, f"pc_forward(t={t:g})", tol)
    return PcForward(v, s)


def pc_inverse(
    v: Field, s: float, target: Grid1D | None = None, tol: float = 1e-8, check: bool = True
) -> PcInverse:
    """u(t, x) = (1+t)^{-1/2} exp(-i x^2 / 4(t+1)) v(s, x/(t+1)) with t = 1/s - 1.

    ``target`` lets callers name the x-grid explicitly; it must be v's grid
    scaled by 1/s (this is checked) and is used verbatim to avoid rounding
    drift in the box length.
    """
    if not 0 < s <= 1:
        raise DomainError(f"s must lie in (0, 1], got {s}")
    t = 1.0 / s - 1.0
    grid = v.grid.scaled(1.0 / s)
    if target is not None:
        if not grid.same_as(target, rtol=1e-10):
            raise ValueError("target grid is not the 1/s dilation of v's grid")
        grid = target
    x = grid.x
    u = Field(grid, s**0.5 * np.exp(-1j * x * x * s / 4) * v.samples)
    if check:
        check_resolved(u, f"pc_inverse(s={s:g})", tol)
    return PcInverse(u, t)


def embedding_grid(envelope: Grid1D, carrier: float, harmonics: float = 4.5) -> Grid1D:
    """z-grid for the embedding: dilated envelope box, Nyquist above ``harmonics`` * N."""
    c = np.sqrt(3 * carrier)
    box = envelope.box_length * c
    need = harmonics * carrier * box / np.pi
    n = max(envelope.num_points, 1 << int(np.ceil(np.log2(need))))
    return Grid1D(n, box, envelope.x_min * c)


def embed_envelope(u: Field, carrier: float, target: Grid1D | None = None) -> tuple[Grid1D, np.ndarray]:
    """u(z / sqrt(3N)) on the z-grid, by zero-padded trigonometric interpolation."""
    grid = target or embedding_grid(u.grid, carrier)
    c = np.sqrt(3 * carrier)
    if not grid.same_as(u.grid.scaled(c).with_points(grid.num_points), rtol=1e-10):
        raise ValueError("target grid must be the sqrt(3N) dilation of the envelope grid")
    return grid, resample(u, grid.num_points).samples


def nls_to_mkdv_embed(u: Field, p: EmbedParams, target: Grid1D | None = None, tol: float = 1e-8) -> Field:
    """Real mKdV field sqrt(2/3N) Re[e^{iNx} e^{iN^3 t} u(t, (x + 3N^2 t)/sqrt(3N))].

    In the default co-moving frame the result is returned as a function of
    z = x + 3N^2 t, where it reads sqrt(2/3N) Re[e^{iNz} e^{-2iN^3 t} u(t, z/sqrt(3N))]
    and stays centered on the grid. ``frame="lab"`` translates back to x.
    """
    N, t = p.carrier, p.time
    grid, env = embed_envelope(u, N, target)
    z = grid.x
    vals = np.sqrt(2 / (3 * N)) * (np.exp(1j * N * z - 2j * N**3 * t) * env).real
    out = Field(grid, vals, real=True)
    if p.frame == "lab":
        out = translate(out, 3 * N**2 * t)
    try:
        check_resolved(out, "nls_to_mkdv_embed", tol)
    except ResolutionError as exc:
        raise ResolutionError(f"{exc}; carrier N={N:g}, Nyquist {grid.nyquist:g}") from None
    return out
