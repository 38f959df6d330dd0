"""Miura maps, the high-pass fixed-point inverse, and the H^{-3/4} KdV pipeline.

M(v) = v_x + v^2 carries real mKdV solutions to KdV solutions. The
generalized map M(v, w) = v_x + v^2 + w is inverted by iterating
v <- d_x^{-1} P (u - v^2) with P the projection onto |xi| >= C_A, and then
setting w = (1 - P)(u - v^2). Evolving (v, w) under the coupled system

    v_t + v_xxx = 6 (v^2 + w) v_x,    w_t + w_xxx = 6 (v^2 + w) w_x

and mapping back gives KdV solutions.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import CutoffTooSmallError, DomainError
from .evolvers import EquationSpec, Trajectory, evolve
from .spectral_core import (
    Field,
    antiderivative_highpass,
    dealias,
    from_spectrum,
    highpass_mask,
    sobolev_norm,
    spectral_derivative,
)

ROUGH_INDEX = -0.75


class MiuraPair(NamedTuple):
    v: Field
    w: Field


def _square(v: Field, dealiased: bool) -> Field:
    sq = v * v
    return dealias(sq) if dealiased else sq


def miura(v: Field, dealiased: bool = True, focusing: bool = False) -> Field:
    """v_x + v^2, or v_x + i v^2 for the focusing variant."""
    sq = _square(v, dealiased)
    if focusing:
        sq = sq * 1j
    return spectral_derivative(v, 1) + sq


def gen_miura(p: MiuraPair, dealiased: bool = True) -> Field:
    return miura(p.v, dealiased) + p.w


def gardner_pair(y: Field, a: float, b: float) -> MiuraPair:
    """(v, w) = (a y, b y), so gen_miura gives a y_x + a^2 y^2 + b y."""
    return MiuraPair(y * a, y * b)


class InversionResult(NamedTuple):
    pair: MiuraPair
    iterations: int
    cutoff: float
    roundtrip_error: float


def _lowpass(f: Field, cutoff: float) -> Field:
    keep = ~highpass_mask(f.grid, cutoff)
    return from_spectrum(f.grid, f.spectrum() * keep, f.real)


def _iterate(u: Field, cutoff: float, v: Field, dealiased: bool) -> Field:
    return antiderivative_highpass(u - _square(v, dealiased), cutoff)


def choose_cutoff(u: Field, dealiased: bool = True, probes: int = 5) -> float:
    """Smallest power of two C_A whose first ``probes`` iterations each contract by 2."""
    c = 1.0
    while c < u.grid.nyquist:
        if c >= 2 * np.pi / u.grid.box_length:
            v = Field.zeros(u.grid, u.real)
            prev = None
            good = True
            for _ in range(probes + 1):
                nxt = _iterate(u, c, v, dealiased)
                step = sobolev_norm(nxt - v, 0.25)
                v = nxt
                if prev is not None and step > 0.5 * prev and step > 1e-14 * (1 + sobolev_norm(v, 0.25)):
                    good = False
                    break
                prev = step
            if good:
                return c
        c *= 2
    raise CutoffTooSmallError(c / 2, "no cutoff below Nyquist contracts")


def invert_gen_miura(
    u: Field,
    A: float | None = None,
    cutoff: float | None = None,
    tol: float = 1e-10,
    max_iter: int = 30,
    dealiased: bool = True,
) -> InversionResult:
    """Find (v, w) with v supported on |xi| >= C_A, w on |xi| < C_A and M(v, w) = u.

    Convergence is measured by the round-trip error ||M(v, w) - u||_{H^{-3/4}}.
    """
    if A is not None and sobolev_norm(u, ROUGH_INDEX) > A:
        raise DomainError(f"||u||_H^-3/4 = {sobolev_norm(u, ROUGH_INDEX):.3g} exceeds A = {A:g}")
    if cutoff is None:
        cutoff = choose_cutoff(u, dealiased)
    v = Field.zeros(u.grid, u.real)
    err = np.inf
    for it in range(1, max_iter + 1):
        # a diverging iteration overflows; it is reported below as non-contraction
        with np.errstate(over="ignore", invalid="ignore"):
            v = _iterate(u, cutoff, v, dealiased)
            w = _lowpass(u - _square(v, dealiased), cutoff)
            err = sobolev_norm(gen_miura(MiuraPair(v, w), dealiased) - u, ROUGH_INDEX)
        if err < tol:
            return InversionResult(MiuraPair(v, w), it, cutoff, err)
        if not np.isfinite(err):
            break
    raise CutoffTooSmallError(cutoff, f"round-trip error {err:.3e} after {max_iter} iterations")


def kdv_endpoint_solve(
    u0: Field,
    A: float | None,
    T: float,
    dt: float,
    cutoff: float | None = None,
    save_every: int = 1,
    tol: float = 1e-10,
) -> tuple[Trajectory, InversionResult]:
    """KdV solution from u0 via inversion, the coupled mKdV system, and M(v, w)."""
    inv = invert_gen_miura(u0, A, cutoff, tol=tol)
    system = evolve(EquationSpec.mkdv_system(), tuple(inv.pair), 0.0, T, dt, save_every)
    states = [gen_miura(MiuraPair(*pair)) for pair in system.states]
    traj = Trajectory(EquationSpec.kdv(), system.times, states, system.step_size, system.scheme_order)
    return traj, inv
