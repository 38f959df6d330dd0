"""Closed-form solution families and the fixed-point constructions built on them.

Profiles are callables in time: ``profile(t)`` returns a Field, and those
that can also supply an exact ``time_derivative(t)``. The analytic
derivative matters for carriers of frequency N with phase rates ~N^3, where
finite differences in time lose all accuracy.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import eval_hermite

from .errors import DivergenceError, DomainError, NonConvergenceError, ResonanceError
from .evolvers import EquationSpec, Trajectory, evolve
from .spectral_core import Field, Grid1D, check_resolved, mass, sobolev_norm, spectral_derivative
from .transforms import pc_inverse


# ----------------------------------------------------------------------------
# profile shapes


@dataclass(frozen=True)
class ProfileW:
    """w(y) = eps * shape(y) for a smooth, rapidly decaying shape.

    ``kappa`` is the order to which the Fourier transform vanishes at 0.
    ``shape_derivative`` is d shape / dy when known in closed form.
    """

    shape: Callable[[np.ndarray], np.ndarray]
    eps: float = 1.0
    parity: str = "none"
    kappa: int = 0
    name: str = "custom"
    shape_derivative: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)

    def __call__(self, y) -> np.ndarray:
        return self.eps * np.asarray(self.shape(np.asarray(y, dtype=float)))

    def derivative(self, y) -> np.ndarray:
        if self.shape_derivative is None:
            raise NotImplementedError(f"profile {self.name} has no closed-form derivative")
        return self.eps * np.asarray(self.shape_derivative(np.asarray(y, dtype=float)))

    def with_eps(self, eps: float) -> ProfileW:
        return ProfileW(self.shape, eps, self.parity, self.kappa, self.name, self.shape_derivative)

    def sample(self, grid: Grid1D) -> Field:
        vals = self(grid.x)
        return Field(grid, vals, real=not np.iscomplexobj(vals))


def gaussian_profile(eps: float = 1.0) -> ProfileW:
    return ProfileW(
        lambda y: np.exp(-y * y), eps, "even", 0, "gaussian", lambda y: -2 * y * np.exp(-y * y)
    )


def odd_gaussian_profile(eps: float = 1.0) -> ProfileW:
    return ProfileW(
        lambda y: y * np.exp(-y * y),
        eps,
        "odd",
        1,
        "odd_gaussian",
        lambda y: (1 - 2 * y * y) * np.exp(-y * y),
    )


def vanishing_profile(eps: float = 1.0, kappa: int = 4) -> ProfileW:
    """Normalized kappa-th derivative of e^{-y^2}, so its transform is O(|xi|^kappa) at 0.

    d^k/dy^k e^{-y^2} = (-1)^k H_k(y) e^{-y^2}; dividing by sqrt(2^k k!) keeps
    the amplitude of order one.
    """
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    c = (-1) ** kappa / math.sqrt(2.0**kappa * math.factorial(kappa))

    def shape(y):
        return c * eval_hermite(kappa, y) * np.exp(-y * y)

    def dshape(y):
        lower = 2 * kappa * eval_hermite(kappa - 1, y) if kappa > 0 else 0.0
        return c * (lower - 2 * y * eval_hermite(kappa, y)) * np.exp(-y * y)

    parity = "even" if kappa % 2 == 0 else "odd"
    return ProfileW(shape, eps, parity, kappa, f"vanishing{kappa}", dshape)


PROFILES = {
    "gaussian": gaussian_profile,
    "odd_gaussian": odd_gaussian_profile,
    "vanishing": vanishing_profile,
}


@dataclass(frozen=True)
class FamilyParams:
    """Parameters selecting one member of a solution family."""

    N: float = 0.0
    lam: float = 1.0
    a: complex = 1.0
    eps: float = 1.0
    delta: float | None = None
    s: float = 0.0
    profile: str = "gaussian"


class AnalyticProfile:
    """Wrap value and derivative callables into a profile object."""

    def __init__(self, value: Callable[[float], Field], derivative: Callable[[float], Field] | None = None):
        self._value = value
        if derivative is not None:
            self.time_derivative = derivative

    def __call__(self, t: float) -> Field:
        return self._value(t)


# ----------------------------------------------------------------------------
# ODE profile and the pseudo-conformal line family


def ode_profile(w: ProfileW, a: complex, s: float, grid: Grid1D) -> Field:
    """v(s, y) = a w(y) exp(-i |a w(y)|^2 log s), exact for i v_s = s^{-1}|v|^2 v."""
    if not s > 0:
        raise DomainError(f"ode_profile needs s > 0, got {s}")
    aw = a * w(grid.x)
    return Field(grid, aw * np.exp(-1j * np.abs(aw) ** 2 * np.log(s)))


def ode_profile_s_derivative(w: ProfileW, a: complex, s: float, grid: Grid1D) -> Field:
    v = ode_profile(w, a, s, grid)
    return v * (-1j * np.abs(a * w(grid.x)) ** 2 / s)


def default_profile_grid() -> Grid1D:
    return Grid1D(1024, 40.0)


def decoherence_distance(w: ProfileW, a: complex, a2: complex, log_s, grid: Grid1D | None = None) -> np.ndarray:
    """L^2_y distance between the ODE profiles of a w and a2 w, as a function of log s."""
    grid = grid or default_profile_grid()
    y = grid.x
    wy = w(y)
    w2 = np.abs(wy) ** 2
    out = []
    for ell in np.atleast_1d(np.asarray(log_s, dtype=float)):
        diff = a * wy * np.exp(-1j * abs(a) ** 2 * w2 * ell) - a2 * wy * np.exp(
            -1j * abs(a2) ** 2 * w2 * ell
        )
        out.append(np.sqrt(np.sum(np.abs(diff) ** 2) * grid.dx))
    return np.array(out)


def decoherence_curve(
    w: ProfileW, a: complex, a2: complex, s_grid, grid: Grid1D | None = None
) -> list[tuple[float, float]]:
    s_arr = np.asarray(s_grid, dtype=float)
    if np.any(s_arr <= 0):
        raise DomainError("decoherence curve needs s > 0")
    d = decoherence_distance(w, a, a2, np.log(s_arr), grid)
    return list(zip(s_arr.tolist(), d.tolist()))


def decoherence_crossing(
    w: ProfileW,
    a: complex,
    a2: complex,
    fraction: float = 0.5,
    grid: Grid1D | None = None,
    max_log: float = 1e8,
) -> float:
    """-log s at which the distance first reaches fraction * (|a| + |a2|) ||w||_{L^2}.

    Returned as L = -log s* > 0 because s* itself underflows for small eps.
    Returns inf if the threshold is never reached up to ``max_log``.
    """
    from scipy.optimize import brentq

    grid = grid or default_profile_grid()
    wnorm = math.sqrt(mass(w.sample(grid)))
    target = fraction * (abs(a) + abs(a2)) * wnorm
    f = lambda L: decoherence_distance(w, a, a2, [-L], grid)[0] - target
    if f(0.0) >= 0:
        return 0.0
    # the distance first rises on the scale 1/(|a^2 - a2^2| max|w|^2)
    rate = abs(abs(a) ** 2 - abs(a2) ** 2) * float(np.max(np.abs(w(grid.x)) ** 2))
    if rate == 0:
        return math.inf
    step = 0.05 / rate
    lo = 0.0
    while lo < max_log:
        hi = lo + step
        if f(hi) >= 0:
            return float(brentq(f, lo, hi, xtol=1e-12 * max(1.0, hi), rtol=1e-12))
        lo = hi
    return math.inf


class NlsLineProfile:
    """u^[aw](t, x) = pc_inverse(ode_profile(aw, s = 1/(1+t))) on a fixed x-grid."""

    def __init__(self, w: ProfileW, a: complex, grid: Grid1D):
        self.w, self.a, self.grid = w, a, grid

    def _y_grid(self, t: float) -> tuple[Grid1D, float]:
        s = 1.0 / (1.0 + t)
        return self.grid.scaled(s), s

    def __call__(self, t: float) -> Field:
        if t < 0:
            raise DomainError("nls_profile needs t >= 0")
        ygrid, s = self._y_grid(t)
        v = ode_profile(self.w, self.a, s, ygrid)
        return pc_inverse(v, s, target=self.grid, check=False).field

    def time_derivative(self, t: float) -> Field:
        # u = s^{1/2} e^{-i x^2 s/4} v(s, x s): differentiate in t with ds/dt = -s^2
        ygrid, s = self._y_grid(t)
        x = self.grid.x
        y = ygrid.x
        aw = self.a * self.w(y)
        daw = self.a * self.w.derivative(y)
        amp2 = np.abs(aw) ** 2
        phase = np.exp(-1j * amp2 * np.log(s))
        v = aw * phase
        # dv/ds at fixed x: partial_s v + y/s * partial_y v
        dv_dy = daw * phase - 1j * np.log(s) * 2 * np.real(np.conj(aw) * daw) * v
        dv_ds = -1j * amp2 / s * v + (y / s) * dv_dy
        pref = s**0.5 * np.exp(-1j * x * x * s / 4)
        du_ds = pref * ((0.5 / s - 1j * x * x / 4) * v + dv_ds)
        return Field(self.grid, -(s**2) * du_ds)


def nls_profile(w: ProfileW, a: complex, t: float, grid: Grid1D) -> Field:
    """u^[aw] at time t, sampled on ``grid``."""
    return NlsLineProfile(w, a, grid)(t)


def construct_exact_pc(
    w: ProfileW,
    a: complex,
    s_start: float = 1.0 / 64,
    s_end: float = 1.0,
    grid: Grid1D | None = None,
    dlog: float = 2e-3,
    save_every: int = 10,
) -> Trajectory:
    """Exact solution of i v_s + v_yy = s^{-1}|v|^2 v that matches a w e^{-i|aw|^2 log s} as s -> 0.

    Integrates the equation for v = v^[aw] + phi from s_start with phi = 0,
    which is the same fixed point as the phi-equation started there. The
    contraction regime is monitored through ||phi||_{H^1} < |a| ||w/eps||_{H^1}/2.
    """
    if s_start < 1.0 / 64 - 1e-15:
        raise DomainError("s_start below the supported minimum 1/64")
    if not s_start < s_end <= 1:
        raise DomainError("need s_start < s_end <= 1")
    grid = grid or default_profile_grid()
    eq = EquationSpec.pc_nls()
    v0 = ode_profile(w, a, s_start, grid)
    traj = evolve(eq, v0, s_start, s_end, dlog, save_every=save_every)
    # contraction of s^{-1}F(phi) needs phi small in absolute size; the eps-free
    # shape sets that scale (the linear part of phi is ~ eps s ||w''||, any eps)
    scale = abs(a) * sobolev_norm(Field(grid, w.with_eps(1.0)(grid.x)), 1.0)
    for s, v in zip(traj.times, traj.states):
        phi = v - ode_profile(w, a, s, grid)
        size = sobolev_norm(phi, 1.0)
        if scale > 0 and size >= 0.5 * scale:
            raise NonConvergenceError(
                f"correction left the contraction ball at s={s:.4g}: "
                f"||phi||_H1={size:.3e} vs |a| ||w/eps||_H1/2={0.5 * scale:.3e}; reduce eps"
            )
    return traj


# ----------------------------------------------------------------------------
# long-time mKdV profile


def muchado_grid(N: float, t: float, window: float = 6.5, harmonics: float = 5.0) -> Grid1D:
    """x-window covering |z| <= window, centered on the packet at x = -3 N^2 t."""
    width = 2 * window * math.sqrt(N) * t
    n = 1 << max(3, int(math.ceil(math.log2(harmonics * N * width / math.pi))))
    return Grid1D(n, width, -3 * N**2 * t - width / 2)


class MuchadoProfile:
    """Approximate real mKdV solution 2 Re(v_1 + v_3) riding at x ~ -3 N^2 t.

    v_k = eps^|k| N^{(2-3|k|)/2} t^{-|k|/2} exp(i k phi) phi_k(z), with
    z = (x + 3 N^2 t) / (N^{1/2} t), phi = Phi + eps^2 log(t) phi_tilde(z),
    Phi = -(-4 x^3 / 27 t)^{1/2}, phi_tilde = 6 q^{1/2} w^2, q = 1 - z / (3 N^{3/2}),
    phi_1 = w and phi_3 = -w^3 / (4 q). The grid moves with the packet.
    """

    def __init__(
        self,
        w: ProfileW,
        eps: float,
        N: float,
        third_harmonic: bool = True,
        window: float = 6.5,
        grid_fn: Callable[[float], Grid1D] | None = None,
        zero_right_half: bool = False,
    ):
        self.w, self.eps, self.N = w.with_eps(1.0), eps, N
        # on wide fixed grids the packet is negligible at x >= 0; set it to 0 there
        self.zero_right_half = zero_right_half
        self.third_harmonic = third_harmonic
        self.window = window
        self.grid_fn = grid_fn or (lambda t: muchado_grid(N, t, window))

    def _pieces(self, t: float, grid: Grid1D):
        if t < 2:
            raise DomainError(f"the long-time profile is defined for t >= 2, got {t}")
        N, eps = self.N, self.eps
        x = grid.x
        keep = x < 0
        if not keep.all():
            if not self.zero_right_half:
                raise DomainError("co-moving window reaches x >= 0; enlarge N or shrink the window")
            x = np.where(keep, x, -1.0)
        rN = math.sqrt(N)
        z = (x + 3 * N**2 * t) / (rN * t)
        z_t = -x / (rN * t * t)
        w, wp = self.w(z) * keep, self.w.derivative(z) * keep
        q = 1 - z / (3 * N**1.5)
        q_z = -1 / (3 * N**1.5)
        Phi = -np.sqrt(-4 * x**3 / (27 * t))
        Phi_t = (-x / (3 * t)) ** 1.5
        tilde = 6 * np.sqrt(q) * w * w
        tilde_z = 6 * (0.5 * q_z / np.sqrt(q) * w * w + np.sqrt(q) * 2 * w * wp)
        logt = math.log(t)
        phi = Phi + eps**2 * tilde * logt
        phi_t = Phi_t + eps**2 * (tilde_z * z_t * logt + tilde / t)
        modes = [(1, w, wp)]
        if self.third_harmonic:
            modes.append((3, -0.25 * w**3 / q, -0.25 * (3 * w * w * wp / q - w**3 * q_z / q**2)))
        return z_t, phi, phi_t, modes

    def harmonic(self, t: float, k: int) -> Field:
        """The complex harmonic v_k alone (k = 1 or 3)."""
        grid = self.grid_fn(t)
        _, phi, _, modes = self._pieces(t, grid)
        for kk, amp, _ in modes:
            if kk == k:
                c = self.eps**k * self.N ** ((2 - 3 * k) / 2) * t ** (-k / 2)
                return Field(grid, c * np.exp(1j * k * phi) * amp)
        raise ValueError(f"harmonic {k} not present")

    def __call__(self, t: float) -> Field:
        grid = self.grid_fn(t)
        _, phi, _, modes = self._pieces(t, grid)
        total = np.zeros(grid.num_points)
        for k, amp, _ in modes:
            c = self.eps**k * self.N ** ((2 - 3 * k) / 2) * t ** (-k / 2)
            total += 2 * (c * np.exp(1j * k * phi) * amp).real
        return Field(grid, total, real=True)

    def time_derivative(self, t: float) -> Field:
        grid = self.grid_fn(t)
        z_t, phi, phi_t, modes = self._pieces(t, grid)
        total = np.zeros(grid.num_points)
        for k, amp, amp_z in modes:
            c = self.eps**k * self.N ** ((2 - 3 * k) / 2)
            e = np.exp(1j * k * phi)
            d = c * e * (
                -0.5 * k * t ** (-0.5 * k - 1) * amp
                + t ** (-0.5 * k) * (1j * k * phi_t * amp + amp_z * z_t)
            )
            total += 2 * d.real
        return Field(grid, total, real=True)


def muchado_profile(w: ProfileW, eps: float, N: float, t: float, third_harmonic: bool = True) -> Field:
    return MuchadoProfile(w, eps, N, third_harmonic)(t)


# ----------------------------------------------------------------------------
# small dispersion and the supercritical datum


def small_dispersion_profile(w: ProfileW, a: complex, t: float, grid: Grid1D) -> Field:
    """f e^{i t |f|^2} with f = a w: exact once the dispersion is dropped."""
    f = a * w(grid.x)
    return Field(grid, f * np.exp(1j * t * np.abs(f) ** 2))


class SupercriticalParams(NamedTuple):
    gamma: float
    lam: float


def supercritical_params(s: float, delta: float) -> SupercriticalParams:
    """gamma = (1 - 2s)/(-1 - 2s) and lambda = delta^gamma, for s < -1/2."""
    if s >= -0.5:
        raise DomainError(f"supercritical scaling needs s < -1/2, got {s}")
    if not 0 < delta <= 1:
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    gamma = (1 - 2 * s) / (-1 - 2 * s)
    return SupercriticalParams(gamma, delta**gamma)


class SupercriticalWarning(UserWarning):
    pass


def supercritical_datum(
    w: ProfileW, a: complex, delta: float, s: float, base_grid: Grid1D | None = None
) -> Field:
    """delta^{-gamma} a w(delta^{1-gamma} x) on the base grid compressed by delta^{gamma-1}.

    The H^s norm of this datum has a finite delta -> 0 limit only if
    |w_hat|^2 |xi|^{2s} is integrable at 0, i.e. kappa > -s - 1/2; otherwise a
    SupercriticalWarning is issued.
    """
    gamma, _ = supercritical_params(s, delta)
    if w.kappa <= -s - 0.5:
        warnings.warn(
            f"profile vanishes to order {w.kappa} at xi = 0; the H^{s} norm of the datum "
            "does not stabilize as delta -> 0",
            SupercriticalWarning,
            stacklevel=2,
        )
    base = base_grid or Grid1D(2048, 60.0)
    grid = base.scaled(delta ** (gamma - 1))
    vals = delta ** (-gamma) * a * w(base.x)
    return Field(grid, vals, real=bool(np.isrealobj(vals) or np.all(np.imag(vals) == 0)))


# ----------------------------------------------------------------------------
# periodic families


def periodic_plane_wave(N: int, a: complex, t: float, grid: Grid1D | None = None) -> Field:
    """a exp(i(N x + N^2 t + |a|^2 t)), an exact solution of -i u_t + u_xx = |u|^2 u."""
    grid = grid or Grid1D.torus(max(16, 1 << int(math.ceil(math.log2(4 * abs(N) + 8)))))
    if abs(N) >= grid.nyquist:
        raise DomainError(f"carrier {N} is not below the grid Nyquist {grid.nyquist:g}")
    omega = N**2 + abs(a) ** 2
    return Field(grid, a * np.exp(1j * (N * grid.x + omega * t)))


class PlaneWaveProfile:
    def __init__(self, N: int, a: complex, grid: Grid1D | None = None):
        self.N, self.a = N, a
        self.grid = periodic_plane_wave(N, a, 0.0, grid).grid

    def __call__(self, t: float) -> Field:
        return periodic_plane_wave(self.N, self.a, t, self.grid)

    def time_derivative(self, t: float) -> Field:
        return self(t) * (1j * (self.N**2 + abs(self.a) ** 2))


@dataclass(frozen=True)
class OdeSystemSolution:
    """Coefficients of the travelling periodic mKdV wave sum_k b_k e^{i k psi}, psi = N x + (N^3 + sigma) t."""

    N: int
    sigma: float
    coefficients: dict
    k_max: int
    residual_norm: float
    iterations: int = 0

    def b(self, k: int) -> float:
        return self.coefficients.get(abs(k), 0.0)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"# N={self.N}\n# sigma={self.sigma!r}\n# residual={self.residual_norm!r}\n")
            fh.write("k,b_k\n")
            for k in range(-self.k_max, self.k_max + 1, 2):
                fh.write(f"{k},{self.b(k)!r}\n")

    @classmethod
    def from_csv(cls, path) -> OdeSystemSolution:
        head, coeffs = {}, {}
        for line in open(path):
            line = line.strip()
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                head[key] = val
            elif line and not line.startswith("k,"):
                k, b = line.split(",")
                coeffs[abs(int(k))] = float(b)
        k_max = max(coeffs)
        return cls(int(head["N"]), float(head["sigma"]), coeffs, k_max, float(head["residual"]))


def _cubic_convolution(b_full: np.ndarray) -> np.ndarray:
    """Ordered triple sums c_k = sum_{k1+k2+k3=k} b_k1 b_k2 b_k3 on index -3K..3K."""
    return np.convolve(np.convolve(b_full, b_full), b_full)


def _full_sequence(b: dict, k_max: int) -> np.ndarray:
    out = np.zeros(2 * k_max + 1)
    for k, val in b.items():
        out[k_max + k] = val
        out[k_max - k] = val
    return out


def _odesystem_mismatch(N: int, sigma: float, b: dict, k_max: int) -> float:
    c = _cubic_convolution(_full_sequence(b, k_max))
    off = 3 * k_max
    worst = 0.0
    for k in range(1, k_max + 1, 2):
        den = N**3 * (1 - k * k) + sigma
        worst = max(worst, abs(den * b[k] - 2 * N * c[off + k]) / abs(den))
    return worst


def solve_odesystem(
    N: int, b1: float, k_max: int = 9, tol: float = 1e-14, max_iter: int = 200
) -> OdeSystemSolution:
    """Fixed point for the coefficients of a travelling wave of u_t + u_xxx = 6 u^2 u_x.

    Substituting u = sum b_k e^{ik psi} gives, for odd k with b_{-k} = b_k,
        (N^3 (1 - k^2) + sigma) b_k = 2 N c_k,   c_k = sum_{k1+k2+k3=k} b_k1 b_k2 b_k3,
    where k = 1 fixes sigma = 2 N c_1 / b_1. Sweeps update sigma and then
    b_3, b_5, ... in place (Gauss-Seidel order).
    """
    if not b1 > 0:
        raise DomainError("b1 must be positive")
    if k_max < 1 or k_max % 2 == 0:
        raise ValueError("k_max must be a positive odd integer")
    b = {k: 0.0 for k in range(1, k_max + 1, 2)}
    b[1] = float(b1)
    off = 3 * k_max
    sigma = 0.0
    changes: list[float] = []
    for it in range(1, max_iter + 1):
        old = dict(b)
        old_sigma = sigma
        sigma = float(2 * N * _cubic_convolution(_full_sequence(b, k_max))[off + 1] / b1)
        for k in range(3, k_max + 1, 2):
            den = N**3 * (1 - k * k) + sigma
            if abs(den) < 1e-8 * N**3:
                raise ResonanceError(f"denominator for k={k} vanishes (sigma={sigma:g})")
            b[k] = float(2 * N * _cubic_convolution(_full_sequence(b, k_max))[off + k] / den)
        change = max(max(abs(b[k] - old[k]) for k in b), abs(sigma - old_sigma) / (N**3))
        changes.append(change)
        if len(changes) >= 4 and all(changes[-i] > changes[-i - 1] for i in range(1, 4)):
            raise DivergenceError(f"coefficient updates grew for 3 sweeps (last {change:.3e})")
        if change < tol:
            break
    else:
        raise DivergenceError(f"no convergence in {max_iter} sweeps (last change {changes[-1]:.3e})")
    return OdeSystemSolution(N, sigma, b, k_max, float(_odesystem_mismatch(N, sigma, b, k_max)), it)


def periodic_grid_for(N: int, k_max: int, harmonics: int = 3) -> Grid1D:
    """Torus grid whose Nyquist exceeds ``harmonics`` * k_max * N."""
    need = 2 * harmonics * k_max * N + 2
    return Grid1D.torus(max(16, 1 << int(math.ceil(math.log2(need)))))


class PeriodicMkdvProfile:
    def __init__(self, sol: OdeSystemSolution, grid: Grid1D | None = None):
        self.sol = sol
        self.grid = grid or periodic_grid_for(sol.N, sol.k_max)
        if sol.k_max * sol.N >= self.grid.nyquist:
            raise DomainError("k_max N is not below the grid Nyquist")

    def _terms(self, t: float):
        sol = self.sol
        rate = sol.N**3 + sol.sigma
        psi = sol.N * self.grid.x + rate * t
        for k in range(1, sol.k_max + 1, 2):
            yield k, rate, 2 * sol.b(k) * np.cos(k * psi), -2 * sol.b(k) * k * rate * np.sin(k * psi)

    def __call__(self, t: float) -> Field:
        vals = sum(term for _, _, term, _ in self._terms(t))
        return Field(self.grid, vals, real=True)

    def time_derivative(self, t: float) -> Field:
        vals = sum(d for _, _, _, d in self._terms(t))
        return Field(self.grid, vals, real=True)


def periodic_mkdv_solution(sol: OdeSystemSolution, t: float, grid: Grid1D | None = None) -> Field:
    return PeriodicMkdvProfile(sol, grid)(t)


# ----------------------------------------------------------------------------
# separation times for the periodic families


class SeparationTimes(NamedTuple):
    predicted: float
    measured: float
    separated: bool


def _first_crossing(g: Callable[[float], float], t_grid: np.ndarray) -> float | None:
    """First t in t_grid with g(t) >= 0, refined by bisection against the previous sample."""
    from scipy.optimize import brentq

    prev = t_grid[0]
    if g(prev) >= 0:
        return float(prev)
    for t in t_grid[1:]:
        if g(t) >= 0:
            return float(brentq(g, prev, t, xtol=1e-14 * max(1.0, t), rtol=1e-13))
        prev = t
    return None


def nls_plane_wave_distance(N: int, a: complex, a2: complex, s: float, t: float) -> float:
    """||u_{N,a}(t) - u_{N,a2}(t)||_{H^s} in closed form (one Fourier mode)."""
    diff = a * np.exp(1j * abs(a) ** 2 * t) - a2 * np.exp(1j * abs(a2) ** 2 * t)
    return float(np.sqrt(2 * np.pi) * (1 + N * N) ** (s / 2) * abs(diff))


def mkdv_family_distance(sol: OdeSystemSolution, sol2: OdeSystemSolution, s: float, t: float) -> float:
    """Closed-form H^s distance of two periodic mKdV waves with the same carrier N."""
    if sol.N != sol2.N:
        raise ValueError("families must share the carrier")
    N = sol.N
    total = 0.0
    for k in range(1, max(sol.k_max, sol2.k_max) + 1, 2):
        d = sol.b(k) * np.exp(1j * k * sol.sigma * t) - sol2.b(k) * np.exp(1j * k * sol2.sigma * t)
        total += 2 * (1 + (k * N) ** 2) ** s * abs(d) ** 2
    return float(np.sqrt(2 * np.pi * total))


def mkdv_family_norm(sol: OdeSystemSolution, s: float) -> float:
    N = sol.N
    tot = sum(2 * (1 + (k * N) ** 2) ** s * sol.b(k) ** 2 for k in range(1, sol.k_max + 1, 2))
    return float(np.sqrt(2 * np.pi * tot))


def separation_time_periodic(
    kind: str,
    N: int,
    amp: float,
    amp2: float,
    s: float,
    t_grid: np.ndarray | None = None,
    k_max: int = 9,
    horizon: float | None = None,
) -> SeparationTimes:
    """Predicted and measured separation times for two periodic family members.

    amp, amp2 are alpha, alpha' (NLS: a = alpha N^{-s}) or beta, beta' (mKdV:
    b_1 = beta N^{-s}). Separation means ||u - u'||_{H^s} >= (||u|| + ||u'||)/2;
    the measured time is the first crossing on ``t_grid``, refined by bisection.
    Predictions use C = pi: pi |alpha - alpha'|^{-2} N^{2s} for NLS and
    pi |beta - beta'|^{-2} N^{2s - 1} for mKdV.
    """
    kind = kind.upper()
    if amp == amp2:
        return SeparationTimes(math.inf, math.inf, False)
    gap = abs(amp - amp2) ** -2
    if kind == "NLS":
        predicted = math.pi * gap * N ** (2 * s)
        a, a2 = amp * N ** (-s), amp2 * N ** (-s)
        n1 = nls_plane_wave_distance(N, a, 0.0, s, 0.0)
        n2 = nls_plane_wave_distance(N, a2, 0.0, s, 0.0)
        g = lambda t: nls_plane_wave_distance(N, a, a2, s, t) - 0.5 * (n1 + n2)
        natural = math.pi / abs(abs(a) ** 2 - abs(a2) ** 2)
    elif kind == "MKDV":
        predicted = math.pi * gap * N ** (2 * s - 1)
        sol = solve_odesystem(N, amp * N ** (-s), k_max)
        sol2 = solve_odesystem(N, amp2 * N ** (-s), k_max)
        n1, n2 = mkdv_family_norm(sol, s), mkdv_family_norm(sol2, s)
        g = lambda t: mkdv_family_distance(sol, sol2, s, t) - 0.5 * (n1 + n2)
        natural = math.pi / abs(sol.sigma - sol2.sigma)
    else:
        raise ValueError("kind must be NLS or MKDV")
    if t_grid is None:
        horizon = horizon or 4 * natural
        t_grid = np.linspace(0.0, horizon, 4001)
    hit = _first_crossing(g, np.asarray(t_grid, dtype=float))
    if hit is None:
        return SeparationTimes(predicted, math.inf, False)
    return SeparationTimes(predicted, hit, True)
