"""Discrete evaluation of every monitored functional of the three-wave system.

Conserved quantities (resonant flow conserves all four; a non-resonant flow
still conserves M, E, P but generally not Lambda):

    M      = 1/2 ||u1||^2 + 1/2 ||u2||^2 + ||u3||^2
    Lambda = ||u1||^2/(2 k1) + ||u2||^2/(2 k2) + ||u3||^2/(2 k3)
    K      = k1/2 ||grad u1||^2 + k2/2 ||grad u2||^2 + k3/2 ||grad u3||^2
    V      = Re int conj(u1) conj(u2) u3
    E      = K - V
    P      = Im int (conj(u1) grad u1 + conj(u2) grad u2 + conj(u3) grad u3)

Virial quantities for a weight a(x):

    V1 = int (k2 k3 |u1|^2 + k1 k3 |u2|^2 + k1 k2 |u3|^2) a
    V2 = 2 Im int (conj(u1) grad u1 + conj(u2) grad u2 + conj(u3) grad u3) . grad a

along the flow dV1/dt = k1 k2 k3 V2 - 2 (anomaly) Im int conj(u1 u2) u3 a, and,
for the quadratic weight a = |x|^2 under mass-resonance in d = 6,

    V1'' = 8 k1 k2 k3 [2 K - 3 V].

Weights come in two kinds: ``quadratic`` (a = |x|^2) and ``truncated``
(a = R^2 chi(|x|^2/R^2) with chi smooth, concave, linear on [0,1] and equal
to 2 beyond 3), the latter enabling the radial blow-up monitor without a
finite-variance assumption.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fields import ComplexField3, KappaTriple
from .grids import CartesianGrid, Grid, RadialGrid6


# ---------------------------------------------------------------------------
# cutoff profile chi for the truncated weight
#
# chi' descends 1 -> 0 on [1, 3] through the cubic Hermite step, so chi is
# C^2, concave, exactly r on [0, 1] and exactly 2 beyond 3.


def _smoothstep(s):
    return 3.0 * s**2 - 2.0 * s**3


def chi(r):
    r = np.asarray(r, dtype=float)
    s = np.clip((r - 1.0) / 2.0, 0.0, 1.0)
    mid = r - 2.0 * (s**3 - 0.5 * s**4)
    return np.where(r <= 1.0, r, np.where(r >= 3.0, 2.0, mid))


def chi_d1(r):
    r = np.asarray(r, dtype=float)
    s = np.clip((r - 1.0) / 2.0, 0.0, 1.0)
    return np.where((r > 1.0) & (r < 3.0), 1.0 - _smoothstep(s), np.where(r <= 1.0, 1.0, 0.0))


def chi_d2(r):
    r = np.asarray(r, dtype=float)
    s = np.clip((r - 1.0) / 2.0, 0.0, 1.0)
    return np.where((r > 1.0) & (r < 3.0), -3.0 * s * (1.0 - s), 0.0)


def chi_d3(r):
    r = np.asarray(r, dtype=float)
    s = np.clip((r - 1.0) / 2.0, 0.0, 1.0)
    return np.where((r > 1.0) & (r < 3.0), (6.0 * s - 3.0) / 2.0, 0.0)


def chi_d4(r):
    r = np.asarray(r, dtype=float)
    return np.where((r > 1.0) & (r < 3.0), 1.5, 0.0)


def _ambient_dim(grid: Grid) -> int:
    return 6 if isinstance(grid, RadialGrid6) else grid.dim


@dataclass(frozen=True, eq=False)
class VirialWeight:
    """Weight a(x) sampled on a grid, with every derivative the virial math needs.

    grad a = grad_scale * x, and the Hessian contraction against a radial
    direction is hessian_radial = a''(r).
    """

    kind: str
    grid: Grid
    truncation_radius: float | None
    a: np.ndarray
    grad_scale: np.ndarray
    hessian_radial: np.ndarray
    delta_a: np.ndarray
    bilaplacian_a: np.ndarray
    hessian_aniso: np.ndarray  # coefficient of |x . grad u|^2 beyond the isotropic part

    @classmethod
    def quadratic(cls, grid: Grid) -> "VirialWeight":
        r2 = grid.radius_squared
        d = _ambient_dim(grid)
        ones = np.ones_like(r2)
        return cls(
            kind="quadratic",
            grid=grid,
            truncation_radius=None,
            a=r2,
            grad_scale=2.0 * ones,
            hessian_radial=2.0 * ones,
            delta_a=2.0 * d * ones,
            bilaplacian_a=np.zeros_like(r2),
            hessian_aniso=np.zeros_like(r2),
        )

    @classmethod
    def truncated(cls, grid: Grid, truncation_radius: float) -> "VirialWeight":
        if not (np.isfinite(truncation_radius) and truncation_radius > 0):
            raise ValueError("truncation_radius must be positive")
        R = float(truncation_radius)
        q = grid.radius_squared / R**2
        d = _ambient_dim(grid)
        c1, c2, c3, c4 = chi_d1(q), chi_d2(q), chi_d3(q), chi_d4(q)
        bilap = (2.0 * d * ((2.0 * d + 4.0) * c2 + 4.0 * q * c3)
                 + 4.0 * q * ((2.0 * d + 8.0) * c3 + 4.0 * q * c4)) / R**2
        return cls(
            kind="truncated",
            grid=grid,
            truncation_radius=R,
            a=R**2 * chi(q),
            grad_scale=2.0 * c1,
            hessian_radial=2.0 * c1 + 4.0 * q * c2,
            delta_a=2.0 * d * c1 + 4.0 * q * c2,
            bilaplacian_a=bilap,
            hessian_aniso=4.0 * c2 / R**2,
        )


@lru_cache(maxsize=8)
def quadratic_weight(grid: Grid) -> VirialWeight:
    return VirialWeight.quadratic(grid)


# ---------------------------------------------------------------------------
# functionals


def _norm_sq(grid: Grid, c: np.ndarray) -> float:
    return float(np.real(grid.integrate(np.abs(c) ** 2)))


def mass(u: ComplexField3) -> float:
    g = u.grid
    return 0.5 * _norm_sq(g, u.u1) + 0.5 * _norm_sq(g, u.u2) + _norm_sq(g, u.u3)


def lambda_invariant(u: ComplexField3, k: KappaTriple) -> float:
    g = u.grid
    return sum(
        _norm_sq(g, c) / (2.0 * kappa) for c, kappa in zip(u.components, k.as_tuple)
    )


def kinetic(u: ComplexField3, k: KappaTriple) -> float:
    g = u.grid
    if isinstance(g, CartesianGrid):
        return sum(
            0.5 * kappa * g.grad_norm_sq(c) for c, kappa in zip(u.components, k.as_tuple)
        )
    return sum(0.5 * kappa * g.h1_form(c) for c, kappa in zip(u.components, k.as_tuple))


def potential(u: ComplexField3) -> float:
    return float(np.real(u.grid.integrate(np.conj(u.u1) * np.conj(u.u2) * u.u3)))


def energy(u: ComplexField3, k: KappaTriple) -> float:
    return kinetic(u, k) - potential(u)


def momentum(u: ComplexField3) -> np.ndarray:
    """Im int sum_i conj(u^i) grad u^i; identically zero on a radial grid."""
    g = u.grid
    if isinstance(g, RadialGrid6):
        return np.zeros(6)
    out = np.zeros(g.dim)
    scale = g.cell_volume / g.total_points
    for c in u.components:
        power = np.abs(np.fft.fftn(c)) ** 2
        for axis, kax in enumerate(g.wavenumbers):
            out[axis] += scale * np.sum(kax * power)
    return out


def sup_norm(u: ComplexField3) -> float:
    return max(float(np.max(np.abs(c))) for c in u.components)


def l3_norm(u: ComplexField3) -> float:
    g = u.grid
    total = sum(float(np.real(g.integrate(np.abs(c) ** 3))) for c in u.components)
    return total ** (1.0 / 3.0)


def l4x_norm(u: ComplexField3) -> float:
    g = u.grid
    total = sum(float(np.real(g.integrate(np.abs(c) ** 4))) for c in u.components)
    return total**0.25


def scattering_increment(u: ComplexField3, dt: float) -> float:
    """Left-endpoint increment dt * sum_i ||u^i||_{L4}^4 of the scattering size."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    return dt * l4x_norm(u) ** 4


# ---------------------------------------------------------------------------
# virial quantities


def _radial_advection(u: ComplexField3) -> list:
    """x . grad u^i for each component."""
    g = u.grid
    if isinstance(g, RadialGrid6):
        return [g.nodes * g.radial_derivative(c) for c in u.components]
    out = []
    for c in u.components:
        acc = np.zeros(g.shape, dtype=complex)
        for x, du in zip(g.coordinates, g.gradient(c)):
            acc = acc + x * du
        out.append(acc)
    return out


def virial_v1(u: ComplexField3, k: KappaTriple, w: VirialWeight) -> float:
    k1, k2, k3 = k.as_tuple
    density = (
        k2 * k3 * np.abs(u.u1) ** 2
        + k1 * k3 * np.abs(u.u2) ** 2
        + k1 * k2 * np.abs(u.u3) ** 2
    )
    return float(np.real(u.grid.integrate(density * w.a)))


def virial_v2(u: ComplexField3, w: VirialWeight) -> float:
    acc = np.zeros(u.grid.shape, dtype=complex)
    for c, adv in zip(u.components, _radial_advection(u)):
        acc = acc + np.conj(c) * adv
    return float(2.0 * np.imag(u.grid.integrate(w.grad_scale * acc)))


def virial_rhs(u: ComplexField3, k: KappaTriple) -> float:
    """8 k1 k2 k3 [2K - 3V]: the mass-resonant d = 6 value of V1'' at a = |x|^2."""
    return 8.0 * k.product * (2.0 * kinetic(u, k) - 3.0 * potential(u))


def virial_v1_rate(u: ComplexField3, k: KappaTriple, w: VirialWeight) -> float:
    """dV1/dt = k1 k2 k3 V2 - 2 (anomaly) Im int conj(u1 u2) u3 a.

    The anomaly term vanishes exactly at mass-resonance.
    """
    cross = np.imag(u.grid.integrate(np.conj(u.u1) * np.conj(u.u2) * u.u3 * w.a))
    return k.product * virial_v2(u, w) - 2.0 * k.anomaly * float(cross)


def virial_v2_rate(u: ComplexField3, k: KappaTriple, w: VirialWeight) -> float:
    """dV2/dt: Hessian term minus bi-Laplacian term minus 2 Re int conj(u1 u2) u3 Delta(a)."""
    g = u.grid
    hess = 0.0
    if isinstance(g, RadialGrid6):
        for kappa, c in zip(k.as_tuple, u.components):
            du = g.radial_derivative(c)
            hess += 4.0 * kappa * float(np.real(g.integrate(w.hessian_radial * np.abs(du) ** 2)))
    else:
        for kappa, c in zip(k.as_tuple, u.components):
            grads = g.gradient(c)
            iso = np.zeros(g.shape)
            for dc in grads:
                iso = iso + np.abs(dc) ** 2
            aniso = np.zeros(g.shape, dtype=complex)
            for x, dc in zip(g.coordinates, grads):
                aniso = aniso + x * dc
            hess += 4.0 * kappa * float(
                np.real(g.integrate(w.grad_scale * iso + w.hessian_aniso * np.abs(aniso) ** 2))
            )
    k1, k2, k3 = k.as_tuple
    mass_density = k1 * np.abs(u.u1) ** 2 + k2 * np.abs(u.u2) ** 2 + k3 * np.abs(u.u3) ** 2
    bilap_term = float(np.real(g.integrate(mass_density * w.bilaplacian_a)))
    cross = float(np.real(g.integrate(np.conj(u.u1) * np.conj(u.u2) * u.u3 * w.delta_a)))
    return hess - bilap_term - 2.0 * cross


# ---------------------------------------------------------------------------
# records


@dataclass(frozen=True, eq=False)
class ObservableRecord:
    """One time-slice of all monitored functionals."""

    t: float
    mass: float
    lambda_inv: float
    kinetic: float
    potential: float
    energy: float
    momentum: np.ndarray
    sup_norm: float
    l3_norm: float
    l4x_norm: float
    virial_v1: float
    virial_v2: float


def observe(
    u: ComplexField3,
    k: KappaTriple,
    t: float = 0.0,
    weight: VirialWeight | None = None,
) -> ObservableRecord:
    if weight is None:
        weight = quadratic_weight(u.grid)
    kin = kinetic(u, k)
    pot = potential(u)
    return ObservableRecord(
        t=float(t),
        mass=mass(u),
        lambda_inv=lambda_invariant(u, k),
        kinetic=kin,
        potential=pot,
        energy=kin - pot,
        momentum=momentum(u),
        sup_norm=sup_norm(u),
        l3_norm=l3_norm(u),
        l4x_norm=l4x_norm(u),
        virial_v1=virial_v1(u, k, weight),
        virial_v2=virial_v2(u, weight),
    )


def second_difference(values: np.ndarray, dt: float) -> np.ndarray:
    """Centered second difference of a uniformly sampled series; NaN endpoints."""
    values = np.asarray(values, dtype=float)
    out = np.full_like(values, np.nan)
    if values.size >= 3:
        out[1:-1] = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / dt**2
    return out


def accumulate_scattering(times: np.ndarray, l4x_norms: np.ndarray) -> np.ndarray:
    """Left-endpoint accumulation of the scattering size along a trajectory."""
    times = np.asarray(times, dtype=float)
    l4 = np.asarray(l4x_norms, dtype=float)
    out = np.zeros_like(times)
    if times.size >= 2:
        increments = np.diff(times) * l4[:-1] ** 4
        out[1:] = np.cumsum(increments)
    return out
