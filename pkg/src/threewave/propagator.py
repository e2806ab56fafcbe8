"""Time evolution of the three-wave system i dt u + A u = f(u).

The linear flow is exact per Fourier mode on periodic Cartesian grids
(component i is multiplied by exp(-i kappa_i |k|^2 t)) and a Crank-Nicolson
solve of the radial Laplacian d_rr + (5/r) d_r on the 6-D radial grid.  The
full flow composes the linear propagator with the pointwise coupling ODE

    dt u1 = i conj(u2) u3,   dt u2 = i conj(u1) u3,   dt u3 = i u1 u2,

in Strang order linear(dt/2) o nonlinear(dt) o linear(dt/2).  The nonlinear
stage integrates with a classical explicit Runge-Kutta step (order 4 by
default, order 2 available), subdividing when amplitude growth needs it and
halting the run at the configured dt floor.  Blow-up is detected, not
resolved: the run halts once the gradient norm grows by the configured
factor, or on non-finite values.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .fields import ComplexField3, KappaTriple
from .grids import CartesianGrid, RadialGrid6
from .observables import ObservableRecord, VirialWeight, observe, quadratic_weight


class DtFloorReached(RuntimeError):
    """Nonlinear substep subdivision fell below the configured dt floor."""


class DomainEscapeWarning(RuntimeWarning):
    """Significant mass reached the outer radial boundary; later times suspect."""


@dataclass(frozen=True)
class StepScheme:
    """Time-stepping configuration.

    ``strang_spectral`` runs on Cartesian grids, ``radial_imex`` on the radial
    6-D grid; both are globally second order in dt.  The halt policy combines
    a gradient-growth factor with a dt floor for the nonlinear subdivision.
    """

    dt: float
    method: str = "radial_imex"
    substep_order: int = 4
    halt_growth_factor: float = 1e3
    dt_floor: float | None = None
    nonlinear_cap: float = 0.5

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError("dt must be positive")
        if self.method not in ("strang_spectral", "radial_imex"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.substep_order not in (2, 4):
            raise ValueError("substep_order must be 2 or 4")
        if self.nonlinear_cap <= 0:
            raise ValueError("nonlinear_cap must be positive")

    @property
    def effective_dt_floor(self) -> float:
        return self.dt * 1e-6 if self.dt_floor is None else self.dt_floor

    def validate_grid(self, grid) -> None:
        if self.method == "strang_spectral" and not isinstance(grid, CartesianGrid):
            raise ValueError("strang_spectral runs on CartesianGrid only")
        if self.method == "radial_imex" and not isinstance(grid, RadialGrid6):
            raise ValueError("radial_imex runs on RadialGrid6 only")


@dataclass
class Trajectory:
    """Per-step observable records plus the final state and halt status."""

    records: list
    dt: float
    kappa: KappaTriple
    weight: VirialWeight
    final_state: ComplexField3
    halt_reason: str  # completed | blowup_halt | nonfinite
    halt_detail: str = ""
    snapshots: list = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def _nonlinear_rhs(u1, u2, u3):
    return (
        1j * np.conj(u2) * u3,
        1j * np.conj(u1) * u3,
        1j * (u1 * u2),
    )


def _rk4(comps, h):
    k1 = _nonlinear_rhs(*comps)
    k2 = _nonlinear_rhs(*(c + 0.5 * h * d for c, d in zip(comps, k1)))
    k3 = _nonlinear_rhs(*(c + 0.5 * h * d for c, d in zip(comps, k2)))
    k4 = _nonlinear_rhs(*(c + h * d for c, d in zip(comps, k3)))
    return tuple(
        c + h / 6.0 * (a + 2.0 * b + 2.0 * cc + d)
        for c, a, b, cc, d in zip(comps, k1, k2, k3, k4)
    )


def _heun(comps, h):
    k1 = _nonlinear_rhs(*comps)
    pred = tuple(c + h * d for c, d in zip(comps, k1))
    k2 = _nonlinear_rhs(*pred)
    return tuple(c + 0.5 * h * (a + b) for c, a, b in zip(comps, k1, k2))


def _nonlinear_stage(comps, dt, order, cap, dt_floor):
    """Integrate the pointwise ODE over dt (either sign), subdividing as
    amplitude demands."""
    stepper = _rk4 if order == 4 else _heun
    sign = 1.0 if dt >= 0 else -1.0
    total = abs(dt)
    tau = 0.0
    while tau < total:
        remaining = total - tau
        amp = max(np.max(np.abs(c)) if c.size else 0.0 for c in comps)
        h = remaining if amp * remaining <= cap else cap / amp
        if not np.isfinite(h) or h < dt_floor:
            raise DtFloorReached(
                f"nonlinear substep {h:.3e} fell below dt floor {dt_floor:.3e}"
            )
        comps = stepper(comps, sign * h)
        tau += h
    return comps


def nonlinear_substep(u: ComplexField3, dt: float, order: int = 4) -> ComplexField3:
    """Flow of the pointwise coupling ODE over dt at every node."""
    comps = _nonlinear_stage(u.components, dt, order, cap=0.5, dt_floor=dt * 1e-12)
    out = ComplexField3(u.grid, *comps)
    if not out.is_finite():
        raise RuntimeError("nonlinear substep produced non-finite values")
    return out


class _CrankNicolson:
    """Per-component Crank-Nicolson propagator for one fixed radial step size."""

    def __init__(self, grid: RadialGrid6, k: KappaTriple, dt_step: float):
        sub, diag, sup = grid.laplacian_diagonals()
        self._solvers = []
        for kappa in k.as_tuple:
            z = 0.5j * kappa * dt_step
            ab = np.zeros((3, grid.num_points), dtype=complex)
            ab[0] = -z * sup
            ab[1] = 1.0 - z * diag
            ab[2] = -z * sub
            plus = (z * sub, 1.0 + z * diag, z * sup)
            self._solvers.append((ab, plus))

    def apply(self, comps):
        out = []
        for (ab, (psub, pdiag, psup)), c in zip(self._solvers, comps):
            rhs = pdiag * c
            rhs[:-1] += psup[1:] * c[1:]
            rhs[1:] += psub[:-1] * c[:-1]
            out.append(solve_banded((1, 1), ab, rhs))
        return tuple(out)


def _cartesian_phases(grid: CartesianGrid, k: KappaTriple, t: float):
    return tuple(np.exp(-1j * kappa * grid.k_squared * t) for kappa in k.as_tuple)


def linear_flow(u: ComplexField3, t: float, k: KappaTriple) -> ComplexField3:
    """Diagonal Schrodinger flow: exact per mode (Cartesian), one
    Crank-Nicolson step (radial)."""
    grid = u.grid
    if t == 0.0:
        return u.copy()
    if isinstance(grid, CartesianGrid):
        comps = [
            np.fft.ifftn(np.fft.fftn(c) * phase)
            for c, phase in zip(u.components, _cartesian_phases(grid, k, t))
        ]
        return ComplexField3(grid, *comps)
    cn = _CrankNicolson(grid, k, t)
    return ComplexField3(grid, *cn.apply(u.components))


class _StrangStepper:
    """One Strang step with the half-step linear propagator built once."""

    def __init__(self, grid, k: KappaTriple, scheme: StepScheme, nonlinear: bool = True):
        self.scheme = scheme
        self.nonlinear = nonlinear
        if isinstance(grid, CartesianGrid):
            phases = _cartesian_phases(grid, k, 0.5 * scheme.dt)
            self._half = lambda comps: tuple(
                np.fft.ifftn(np.fft.fftn(c) * p) for c, p in zip(comps, phases)
            )
        else:
            cn = _CrankNicolson(grid, k, 0.5 * scheme.dt)
            self._half = cn.apply

    def __call__(self, comps):
        comps = self._half(comps)
        if self.nonlinear:
            comps = _nonlinear_stage(
                comps,
                self.scheme.dt,
                self.scheme.substep_order,
                self.scheme.nonlinear_cap,
                self.scheme.effective_dt_floor,
            )
        return self._half(comps)


def strang_step(u: ComplexField3, dt: float, k: KappaTriple, order: int = 4) -> ComplexField3:
    """linear(dt/2) o nonlinear(dt) o linear(dt/2) on u's grid, either time direction."""
    if dt == 0.0:
        return u.copy()
    grid = u.grid
    if isinstance(grid, CartesianGrid):
        phases = _cartesian_phases(grid, k, 0.5 * dt)
        half = lambda comps: tuple(
            np.fft.ifftn(np.fft.fftn(c) * p) for c, p in zip(comps, phases)
        )
    else:
        half = _CrankNicolson(grid, k, 0.5 * dt).apply
    comps = half(u.components)
    comps = _nonlinear_stage(comps, dt, order, cap=0.5, dt_floor=abs(dt) * 1e-12)
    comps = half(comps)
    return ComplexField3(grid, *comps)


def evolve(
    u0: ComplexField3,
    T: float,
    scheme: StepScheme,
    k: KappaTriple,
    weight: VirialWeight | None = None,
    nonlinearity_enabled: bool = True,
    snapshot_stride: int = 0,
) -> Trajectory:
    """March u0 to horizon T, recording observables at every accepted step.

    The horizon is rounded to a whole number of steps.  Early termination via
    the halt policy is an ordinary terminal status carried in the trajectory,
    never an exception.
    """
    if not T > 0:
        raise ValueError("horizon T must be positive")
    scheme.validate_grid(u0.grid)
    if weight is None:
        weight = quadratic_weight(u0.grid)
    n_steps = max(1, round(T / scheme.dt))
    stepper = _StrangStepper(u0.grid, k, scheme, nonlinear=nonlinearity_enabled)

    state = u0.copy()
    records = [observe(state, k, t=0.0, weight=weight)]
    snapshots = [(0.0, state.copy())] if snapshot_stride else []
    kinetic0 = max(records[0].kinetic, np.finfo(float).tiny)
    halt_reason, halt_detail = "completed", ""

    comps = state.components
    for j in range(1, n_steps + 1):
        try:
            comps = stepper(comps)
        except DtFloorReached as exc:
            halt_reason, halt_detail = "blowup_halt", f"dt_floor at t={j * scheme.dt:.6g}: {exc}"
            break
        t = j * scheme.dt
        if not all(np.all(np.isfinite(c.view(float))) for c in comps):
            halt_reason, halt_detail = "nonfinite", f"non-finite state at t={t:.6g}"
            break
        state = ComplexField3(u0.grid, *comps)
        rec = observe(state, k, t=t, weight=weight)
        records.append(rec)
        if snapshot_stride and j % snapshot_stride == 0:
            snapshots.append((t, state.copy()))
        if np.sqrt(rec.kinetic / kinetic0) > scheme.halt_growth_factor:
            halt_reason = "blowup_halt"
            halt_detail = f"gradient_growth at t={t:.6g}"
            break

    return Trajectory(
        records=records,
        dt=scheme.dt,
        kappa=k,
        weight=weight,
        final_state=state,
        halt_reason=halt_reason,
        halt_detail=halt_detail,
        snapshots=snapshots,
    )


def dispersive_decay_probe(
    g: ComplexField3,
    times,
    k: KappaTriple,
    dt: float = 0.01,
    escape_shell: float = 0.9,
    escape_tolerance: float = 1e-3,
) -> list:
    """Sup-norms of the linear radial evolution at the requested times.

    Warns (DomainEscapeWarning) once the outer shell r > escape_shell * R
    holds more than escape_tolerance of the initial mass, which invalidates
    later entries.
    """
    grid = g.grid
    if not isinstance(grid, RadialGrid6):
        raise ValueError("dispersive_decay_probe runs on RadialGrid6")
    times = sorted(float(t) for t in times)
    if times and times[0] < 0:
        raise ValueError("times must be nonnegative")

    from .observables import mass as total_mass
    from .observables import sup_norm

    mass0 = max(total_mass(g), np.finfo(float).tiny)
    shell = grid.nodes > escape_shell * grid.outer_radius

    comps = tuple(c.copy() for c in g.components)
    t_now = 0.0
    out = []
    warned = False
    for t_req in times:
        span = t_req - t_now
        if span > 0:
            n = max(1, int(np.ceil(span / dt)))
            cn = _CrankNicolson(grid, k, span / n)
            for _ in range(n):
                comps = cn.apply(comps)
            t_now = t_req
        state = ComplexField3(grid, *comps)
        out.append((t_req, sup_norm(state)))
        shell_mass = sum(
            float(np.real(np.sum(grid.weights[shell] * np.abs(c[shell]) ** 2)))
            for c in comps
        )
        if not warned and shell_mass > escape_tolerance * mass0:
            warnings.warn(
                f"mass fraction {shell_mass / mass0:.2e} beyond r = "
                f"{escape_shell:g} R at t = {t_req:g}; later sup-norms are suspect",
                DomainEscapeWarning,
                stacklevel=2,
            )
            warned = True
    return out
