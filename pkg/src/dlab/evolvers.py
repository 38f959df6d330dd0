"""Time integration of the dispersive equations and residual/conservation diagnostics.

Schrodinger-type equations (NLS, small-dispersion NLS and the
pseudo-conformal equation i v_s + v_yy = s^{-1}|v|^2 v) use Strang splitting
whose nonlinear substep is the exact pointwise phase rotation. KdV-type
equations (mKdV, KdV, the coupled mKdV system) use the integrating-factor
RK4 scheme in Fourier variables with 2/3-rule dealiasing of the nonlinear term.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator, NamedTuple, Sequence, Union

import numpy as np

from .errors import BlowUpError, DomainError, InsufficientDataError
from .fieldio import read_field_binary, read_manifest, write_field_binary, write_manifest
from .spectral_core import (
    Field,
    Grid1D,
    dealias_mask,
    mass,
    sobolev_norm,
    spectral_derivative,
)

State = Union[Field, tuple]


class Kind(str, enum.Enum):
    NLS = "NLS"
    SMALL_DISP_NLS = "SMALL_DISP_NLS"
    MKDV = "MKDV"
    KDV = "KDV"
    MKDV_SYSTEM = "MKDV_SYSTEM"
    PC_NLS = "PC_NLS"


_SCHRODINGER = (Kind.NLS, Kind.SMALL_DISP_NLS, Kind.PC_NLS)


@dataclass(frozen=True)
class EquationSpec:
    """Which equation to integrate.

    ``delta`` is the dispersion parameter of -i v_t + delta^2 v_xx = |v|^2 v.
    ``frame_speed`` c adds a transport term c u_x to KdV-type equations, i.e.
    the equation is written in the frame z = x + c t.
    """

    kind: Kind
    delta: float | None = None
    frame_speed: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is Kind.SMALL_DISP_NLS:
            if self.delta is None or not 0 < self.delta <= 1:
                raise ValueError("SMALL_DISP_NLS needs 0 < delta <= 1")
        elif self.delta is not None:
            raise ValueError(f"delta is only meaningful for SMALL_DISP_NLS, not {self.kind.value}")
        if self.frame_speed and self.kind in _SCHRODINGER:
            raise ValueError("frame_speed applies to KdV-type equations only")

    @property
    def field_arity(self) -> int:
        return 2 if self.kind is Kind.MKDV_SYSTEM else 1

    @property
    def scheme_order(self) -> int:
        return 2 if self.kind in _SCHRODINGER else 4

    @classmethod
    def nls(cls) -> EquationSpec:
        return cls(Kind.NLS)

    @classmethod
    def small_dispersion(cls, delta: float) -> EquationSpec:
        return cls(Kind.SMALL_DISP_NLS, delta)

    @classmethod
    def pc_nls(cls) -> EquationSpec:
        return cls(Kind.PC_NLS)

    @classmethod
    def mkdv(cls, frame_speed: float = 0.0) -> EquationSpec:
        return cls(Kind.MKDV, frame_speed=frame_speed)

    @classmethod
    def kdv(cls, frame_speed: float = 0.0) -> EquationSpec:
        return cls(Kind.KDV, frame_speed=frame_speed)

    @classmethod
    def mkdv_system(cls, frame_speed: float = 0.0) -> EquationSpec:
        return cls(Kind.MKDV_SYSTEM, frame_speed=frame_speed)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time samples of one solution. States are Fields, or (v, w) pairs for the system."""

    equation: EquationSpec
    times: np.ndarray
    states: tuple
    step_size: float
    scheme_order: int

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if len(times) != len(self.states):
            raise ValueError("times and states differ in length")
        d = np.diff(times)
        if len(d) and not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("trajectory times must be strictly monotone")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", tuple(self.states))

    def __len__(self) -> int:
        return len(self.states)

    @property
    def grid(self) -> Grid1D:
        first = self.states[0]
        return first[0].grid if isinstance(first, tuple) else first.grid

    @property
    def final(self) -> State:
        return self.states[-1]

    def state_at(self, t: float, atol: float = 1e-12) -> State:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > atol * max(1.0, abs(t)):
            raise KeyError(f"no sample at t={t}")
        return self.states[i]


def _components(state: State) -> tuple[Field, ...]:
    return tuple(state) if isinstance(state, tuple) else (state,)


def _time_nodes(eq: EquationSpec, t0: float, t1: float, dt: float) -> np.ndarray:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if eq.kind is Kind.PC_NLS:
        if t0 <= 0 or t1 <= 0:
            raise DomainError("PC_NLS integrates in s > 0")
        span = np.log(t1 / t0)
        n = max(1, int(np.ceil(abs(span) / dt - 1e-9)))
        nodes = t0 * np.exp(np.linspace(0.0, span, n + 1))
    else:
        n = max(1, int(np.ceil(abs(t1 - t0) / dt - 1e-9)))
        nodes = np.linspace(t0, t1, n + 1)
    nodes[0], nodes[-1] = t0, t1
    return nodes


def _save_indices(n_steps: int, save_every: int) -> set[int]:
    idx = set(range(0, n_steps + 1, save_every))
    idx.add(n_steps)
    return idx


def _blowup(vals: np.ndarray, ceiling: float, t: float) -> None:
    if not np.all(np.isfinite(vals)) or np.max(np.abs(vals)) > ceiling:
        raise BlowUpError("solution blew up", t)


def evolve(
    eq: EquationSpec,
    initial: State,
    t0: float,
    t1: float,
    dt: float,
    save_every: int = 1,
    blowup_factor: float = 1e6,
) -> Trajectory:
    """Integrate ``eq`` from t0 to t1 (either direction) with nominal step dt.

    The step actually used divides the interval evenly. For PC_NLS the
    variable is s and dt is the step in log s, so steps shrink with s.
    Every ``save_every``-th step (and the last) is stored.
    """
    if eq.field_arity == 2 and not (isinstance(initial, tuple) and len(initial) == 2):
        raise ValueError("MKDV_SYSTEM needs a (v, w) pair")
    if eq.field_arity == 1 and isinstance(initial, tuple):
        raise ValueError(f"{eq.kind.value} takes a single field")
    nodes = _time_nodes(eq, t0, t1, dt)
    comps = _components(initial)
    peak0 = max(c.max_abs() for c in comps)
    ceiling = blowup_factor * peak0 if peak0 > 0 else np.inf
    stepper = _strang if eq.kind in _SCHRODINGER else _ifrk4
    times, states = stepper(eq, comps, nodes, _save_indices(len(nodes) - 1, save_every), ceiling)
    h = float(abs(nodes[1] - nodes[0])) if eq.kind is not Kind.PC_NLS else float(dt)
    return Trajectory(eq, times, states, h, eq.scheme_order)


def _strang(eq, comps, nodes, save, ceiling):
    (u0,) = comps
    grid = u0.grid
    xi2 = grid.wavenumbers ** 2
    disp = {Kind.NLS: 1.0, Kind.SMALL_DISP_NLS: (eq.delta or 0.0) ** 2, Kind.PC_NLS: -1.0}[eq.kind]
    u = u0.samples.copy()
    times, states = [nodes[0]], [u0]
    half = None
    uniform = eq.kind is not Kind.PC_NLS
    if uniform:
        half = np.exp(0.5j * disp * xi2 * (nodes[1] - nodes[0]))
    for i in range(1, len(nodes)):
        a, b = nodes[i - 1], nodes[i]
        if not uniform:
            half = np.exp(0.5j * disp * xi2 * (b - a))
        u = np.fft.ifft(half * np.fft.fft(u))
        amp2 = (u * np.conj(u)).real
        if eq.kind is Kind.PC_NLS:
            u = u * np.exp(-1j * amp2 * np.log(b / a))
        else:
            u = u * np.exp(1j * amp2 * (b - a))
        u = np.fft.ifft(half * np.fft.fft(u))
        if i in save or i % 16 == 0:
            _blowup(u, ceiling, a)
        if i in save:
            times.append(b)
            states.append(Field(grid, u))
    return np.array(times), states


def _kdv_linear_symbol(eq: EquationSpec, grid: Grid1D) -> np.ndarray:
    xi = grid.wavenumbers.copy()
    xi[grid.num_points // 2] = 0.0
    # u_t = -u_xxx - c u_x + N(u)  ->  i xi^3 - i c xi
    return 1j * xi**3 - 1j * eq.frame_speed * xi


def _kdv_nonlinearity(eq: EquationSpec, grid: Grid1D, real: bool) -> Callable:
    ik = 1j * grid.wavenumbers
    ik[grid.num_points // 2] = 0.0
    keep = dealias_mask(grid)
    fft, ifft = np.fft.fft, np.fft.ifft

    def phys(a):
        out = ifft(a, axis=-1)
        return out.real if real else out

    if eq.kind is Kind.MKDV:
        return lambda U: keep * 2 * ik * fft(phys(U) ** 3)
    if eq.kind is Kind.KDV:
        return lambda U: keep * 3 * ik * fft(phys(U) ** 2)

    def system(U):
        v, w = phys(U)
        factor = 6 * (v * v + w)
        dv, dw = phys(ik * U)
        return keep * fft(np.stack([factor * dv, factor * dw]), axis=-1)

    return system


def _ifrk4(eq, comps, nodes, save, ceiling):
    grid = comps[0].grid
    real = all(c.real for c in comps)
    U = np.stack([np.fft.fft(c.samples) for c in comps])
    if eq.field_arity == 1:
        U = U[0]
    L = _kdv_linear_symbol(eq, grid)
    nonlin = _kdv_nonlinearity(eq, grid, real)
    h = nodes[1] - nodes[0]
    E = np.exp(0.5 * h * L)
    E2 = E * E

    def to_state(U):
        if eq.field_arity == 1:
            return Field(grid, np.fft.ifft(U), real)
        return tuple(Field(grid, np.fft.ifft(Uc), real) for Uc in U)

    times, states = [nodes[0]], [comps[0] if eq.field_arity == 1 else tuple(comps)]
    for i in range(1, len(nodes)):
        k1 = h * nonlin(U)
        k2 = h * nonlin(E * (U + 0.5 * k1))
        k3 = h * nonlin(E * U + 0.5 * k2)
        k4 = h * nonlin(E2 * U + E * k3)
        U = E2 * U + (E2 * k1 + 2 * E * (k2 + k3) + k4) / 6.0
        if i in save or i % 16 == 0:
            _blowup(np.fft.ifft(U, axis=-1), ceiling, nodes[i - 1])
        if i in save:
            times.append(nodes[i])
            states.append(to_state(U))
    return np.array(times), states


# ----------------------------------------------------------------------------
# residuals


def equation_rhs(eq: EquationSpec, state: State, t: float) -> State:
    """F in u_t = F(u), evaluated spectrally without dealiasing."""
    d = spectral_derivative
    k = eq.kind
    if k in (Kind.NLS, Kind.SMALL_DISP_NLS):
        u = state
        disp = 1.0 if k is Kind.NLS else eq.delta**2
        vals = 1j * (np.abs(u.samples) ** 2 * u.samples - disp * d(u, 2).samples)
        return Field(u.grid, vals)
    if k is Kind.PC_NLS:
        if t <= 0:
            raise DomainError("PC_NLS right-hand side needs s > 0")
        v = state
        vals = 1j * d(v, 2).samples - 1j / t * np.abs(v.samples) ** 2 * v.samples
        return Field(v.grid, vals)
    c = eq.frame_speed
    if k in (Kind.MKDV, Kind.KDV):
        u = state
        ux = d(u, 1).samples
        nl = 6 * u.samples**2 * ux if k is Kind.MKDV else 6 * u.samples * ux
        return Field(u.grid, -d(u, 3).samples - c * ux + nl, u.real)
    v, w = state
    factor = 6 * (v.samples**2 + w.samples)
    out = []
    for f in (v, w):
        fx = d(f, 1).samples
        out.append(Field(f.grid, -d(f, 3).samples - c * fx + factor * fx, f.real))
    return tuple(out)


def fd_weights(z: float, x: np.ndarray, m: int) -> np.ndarray:
    """Fornberg finite-difference weights at z from nodes x, for derivatives 0..m.

    Returns an array of shape (len(x), m + 1).
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


class ResidualSeries(NamedTuple):
    """Residual norms per time; ``low_accuracy`` marks one-sided stencils."""

    times: np.ndarray
    values: np.ndarray
    low_accuracy: np.ndarray

    def __iter__(self) -> Iterator:  # type: ignore[override]
        return iter(zip(self.times.tolist(), self.values.tolist()))

    def interior(self) -> np.ndarray:
        return self.values[~self.low_accuracy]


def _combine(state_a: State, state_b: State, fa: complex, fb: complex) -> State:
    if isinstance(state_a, tuple):
        return tuple(x * fa + y * fb for x, y in zip(state_a, state_b))
    return state_a * fa + state_b * fb


def _state_norm(state: State, s: float) -> float:
    return float(np.sqrt(sum(sobolev_norm(c, s) ** 2 for c in _components(state))))


def _fd_derivative(times: np.ndarray, states: Sequence[State], i: int, order: int) -> tuple[State, bool]:
    n = len(times)
    width = min(order + 1, n)
    lo = min(max(0, i - width // 2), n - width)
    idx = range(lo, lo + width)
    w = fd_weights(times[i], times[lo : lo + width], 1)[:, 1]
    acc = None
    for weight, j in zip(w, idx):
        term = _scale_state(states[j], weight)
        acc = term if acc is None else _combine(acc, term, 1.0, 1.0)
    centered = width == order + 1 and i - lo == width // 2
    return acc, not centered


def _scale_state(state: State, factor: float) -> State:
    if isinstance(state, tuple):
        return tuple(c * factor for c in state)
    return state * factor


def time_derivative(traj: Trajectory, index: int, fd_order: int = 8) -> tuple[State, bool]:
    """Finite-difference d/dt of the trajectory at sample ``index``; flag marks one-sided stencils."""
    return _fd_derivative(traj.times, traj.states, index, fd_order)


def residual(eq: EquationSpec, traj: Trajectory, s: float = 0.0, fd_order: int = 8) -> ResidualSeries:
    """||d_t u - F(u)||_{H^s} at every sample, d_t by finite differences in time."""
    if len(traj) < 3:
        raise InsufficientDataError("residual needs at least 3 time samples")
    vals, flags = [], []
    for i, t in enumerate(traj.times):
        dudt, low = _fd_derivative(traj.times, traj.states, i, fd_order)
        r = _combine(dudt, equation_rhs(eq, traj.states[i], t), 1.0, -1.0)
        vals.append(_state_norm(r, s))
        flags.append(low)
    return ResidualSeries(traj.times.copy(), np.array(vals), np.array(flags))


def residual_of_profile(
    eq: EquationSpec,
    profile: Callable[[float], State],
    times: Sequence[float],
    s: float = 0.0,
    h: float = 1e-3,
    fd_order: int = 8,
) -> ResidualSeries:
    """Residual of a closed-form profile at the requested times.

    If ``profile`` has a ``time_derivative(t)`` method it is used; otherwise
    d_t is a centered ``fd_order`` stencil of spacing ``h`` around each time,
    so the profile must be defined on [t - fd_order h / 2, t + fd_order h / 2].
    """
    exact_dt = getattr(profile, "time_derivative", None)
    half = fd_order // 2
    offsets = h * np.arange(-half, half + 1)
    weights = fd_weights(0.0, offsets, 1)[:, 1]
    vals = []
    for t in times:
        u = profile(t)
        if exact_dt is not None:
            dudt = exact_dt(t)
        else:
            dudt = None
            for wgt, off in zip(weights, offsets):
                if wgt == 0.0:
                    continue
                term = _scale_state(profile(t + off), wgt)
                dudt = term if dudt is None else _combine(dudt, term, 1.0, 1.0)
        vals.append(_state_norm(_combine(dudt, equation_rhs(eq, u, t), 1.0, -1.0), s))
    t_arr = np.asarray(times, dtype=float)
    return ResidualSeries(t_arr, np.array(vals), np.zeros(len(t_arr), dtype=bool))


# ----------------------------------------------------------------------------
# conserved quantities


def energy(eq: EquationSpec, state: State) -> float | None:
    """The conserved Hamiltonian of ``eq`` (None when the flow has none)."""
    k = eq.kind
    if k in (Kind.NLS, Kind.SMALL_DISP_NLS):
        u = state
        disp = 1.0 if k is Kind.NLS else eq.delta**2
        return disp * mass(spectral_derivative(u, 1)) + 0.5 * float(np.sum(np.abs(u.samples) ** 4) * u.grid.dx)
    if k is Kind.MKDV:
        u = state
        return mass(spectral_derivative(u, 1)) + float(np.sum(np.abs(u.samples) ** 4) * u.grid.dx)
    if k is Kind.KDV:
        u = state
        cubic = np.sum(u.samples**3) * u.grid.dx
        quad = 0.5 * np.sum(spectral_derivative(u, 1).samples ** 2) * u.grid.dx
        val = quad + cubic
        return float(val.real) if u.real else complex(val)
    return None


class ConservationReport(NamedTuple):
    mass_drift: float | None
    energy_drift: float | None
    masses: np.ndarray | None
    energies: np.ndarray | None


def _relative_drift(series: np.ndarray) -> float:
    ref = abs(series[0])
    dev = float(np.max(np.abs(series - series[0])))
    return dev / ref if ref > 0 else dev


def conservation_report(traj: Trajectory) -> ConservationReport:
    """Maximum relative drift of mass and energy over the trajectory."""
    if len(traj) < 2:
        raise InsufficientDataError("conservation report needs at least 2 samples")
    eq = traj.equation
    if eq.kind is Kind.MKDV_SYSTEM:
        return ConservationReport(None, None, None, None)
    masses = np.array([mass(u) for u in traj.states])
    mass_drift = _relative_drift(masses)
    if eq.kind is Kind.PC_NLS:
        return ConservationReport(mass_drift, None, masses, None)
    energies = np.array([energy(eq, u) for u in traj.states])
    return ConservationReport(mass_drift, _relative_drift(energies), masses, energies)


# ----------------------------------------------------------------------------
# serialization


def save_trajectory(traj: Trajectory, directory: str | Path) -> Path:
    """One binary dump per component and sample, plus manifest.txt."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for i, state in enumerate(traj.states):
        for c, comp in enumerate(_components(state)):
            write_field_binary(comp, out / f"state_{i:05d}_{c}.bin")
    g = traj.grid
    first = _components(traj.states[0])
    write_manifest(
        out / "manifest.txt",
        {
            "equation": traj.equation.kind.value,
            "delta": traj.equation.delta if traj.equation.delta is not None else "",
            "frame_speed": repr(traj.equation.frame_speed),
            "dt": repr(traj.step_size),
            "scheme_order": traj.scheme_order,
            "num_points": g.num_points,
            "box_length": repr(g.box_length),
            "x_min": repr(g.x_min),
            "real": int(all(c.real for c in first)),
            "components": len(first),
            "num_samples": len(traj),
            "times": ",".join(repr(float(t)) for t in traj.times),
        },
    )
    return out


def load_trajectory(directory: str | Path) -> Trajectory:
    d = Path(directory)
    m = read_manifest(d / "manifest.txt")
    eq = EquationSpec(
        Kind(m["equation"]),
        float(m["delta"]) if m["delta"] else None,
        float(m["frame_speed"]),
    )
    real = bool(int(m["real"]))
    x_min = float(m["x_min"])
    ncomp = int(m["components"])
    states = []
    for i in range(int(m["num_samples"])):
        comps = tuple(
            read_field_binary(d / f"state_{i:05d}_{c}.bin", x_min, real) for c in range(ncomp)
        )
        states.append(comps if ncomp == 2 else comps[0])
    times = np.array([float(t) for t in m["times"].split(",")])
    return Trajectory(eq, times, states, float(m["dt"]), int(m["scheme_order"]))
