"""State representation and pointwise/symmetry transforms of the three-wave system

    i dt u + A u = f(u),   A = diag(kappa1, kappa2, kappa3) Laplacian,
    f(u) = (-conj(u2) u3, -conj(u1) u3, -u1 u2),

with the coefficient triple validated against the mass-resonance relation
1/kappa3 = 1/kappa1 + 1/kappa2 (equivalently, vanishing of the anomaly
kappa2 kappa3 + kappa1 kappa3 - kappa1 kappa2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.ndimage import map_coordinates

from .grids import CartesianGrid, Grid, RadialGrid6

RESONANCE_RTOL = 1e-12  # resonant triples are constructed analytically


class NonFiniteFieldError(ValueError):
    """A field contains NaN or Inf; never ignored silently."""


def resonance_anomaly(k1, k2, k3):
    """kappa2 kappa3 + kappa1 kappa3 - kappa1 kappa2; zero exactly at resonance."""
    return k2 * k3 + k1 * k3 - k1 * k2


def resonance_residual(k1, k2, k3):
    """|1/k3 - 1/k1 - 1/k2| relative to max(1/k_i)."""
    inv = np.stack([1.0 / np.asarray(k1, float), 1.0 / np.asarray(k2, float), 1.0 / np.asarray(k3, float)])
    return np.abs(inv[2] - inv[0] - inv[1]) / np.max(inv, axis=0)


@dataclass(frozen=True)
class KappaTriple:
    """Positive dispersion coefficients with derived resonance data."""

    kappa1: float
    kappa2: float
    kappa3: float
    anomaly: float = field(init=False)
    is_resonant: bool = field(init=False)

    def __post_init__(self):
        ks = (self.kappa1, self.kappa2, self.kappa3)
        if not all(np.isfinite(k) and k > 0 for k in ks):
            raise ValueError(f"dispersion coefficients must be positive and finite, got {ks}")
        object.__setattr__(self, "anomaly", float(resonance_anomaly(*ks)))
        object.__setattr__(
            self, "is_resonant", bool(resonance_residual(*ks) <= RESONANCE_RTOL)
        )

    @property
    def as_tuple(self) -> tuple:
        return (self.kappa1, self.kappa2, self.kappa3)

    @property
    def product(self) -> float:
        return self.kappa1 * self.kappa2 * self.kappa3


def validate_kappa(k1: float, k2: float, k3: float) -> KappaTriple:
    """Validate a coefficient triple and populate its resonance data."""
    return KappaTriple(float(k1), float(k2), float(k3))


@dataclass
class ComplexField3:
    """Three complex sample vectors sharing one grid: the state u = (u1, u2, u3)."""

    grid: Grid
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray

    def __post_init__(self):
        for name in ("u1", "u2", "u3"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.shape != self.grid.shape:
                raise ValueError(
                    f"{name} has shape {arr.shape}, grid expects {self.grid.shape}"
                )
            setattr(self, name, arr)

    @property
    def components(self) -> tuple:
        return (self.u1, self.u2, self.u3)

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(c.view(float))) for c in self.components)

    def copy(self) -> "ComplexField3":
        return ComplexField3(self.grid, self.u1.copy(), self.u2.copy(), self.u3.copy())


def ensure_finite(u: ComplexField3, context: str = "field") -> ComplexField3:
    if not u.is_finite():
        raise NonFiniteFieldError(f"non-finite values detected in {context}")
    return u


def nonlinearity(u: ComplexField3) -> ComplexField3:
    """Pointwise coupling f(u) = (-conj(u2) u3, -conj(u1) u3, -u1 u2)."""
    ensure_finite(u, "nonlinearity input")
    return ComplexField3(
        u.grid,
        -np.conj(u.u2) * u.u3,
        -np.conj(u.u1) * u.u3,
        -u.u1 * u.u2,
    )


def _resample_cartesian(grid: CartesianGrid, values: np.ndarray, lam: float) -> np.ndarray:
    # sample values at lam * x by cubic interpolation, zero outside the box
    idx1d = (lam * grid.axis_coordinates + 0.5 * grid.box_length) / grid.spacing
    mesh = np.meshgrid(*([idx1d] * grid.dim), indexing="ij")
    coords = np.stack(mesh)
    re = map_coordinates(values.real, coords, order=3, mode="constant", cval=0.0)
    im = map_coordinates(values.imag, coords, order=3, mode="constant", cval=0.0)
    return re + 1j * im


def _resample_radial(grid: RadialGrid6, values: np.ndarray, lam: float) -> np.ndarray:
    # even extension through r = 0 so the spline sees a smooth radial profile
    r = grid.nodes
    r_ext = np.concatenate([-r[::-1], r])
    out = np.zeros(grid.num_points, dtype=complex)
    target = lam * r
    inside = target <= r[-1]
    for part, view in (("real", values.real), ("imag", values.imag)):
        v_ext = np.concatenate([view[::-1], view])
        spline = CubicSpline(r_ext, v_ext)
        sampled = spline(target[inside])
        if part == "real":
            out[inside] += sampled
        else:
            out[inside] += 1j * sampled
    return out


def rescale(u: ComplexField3, lam: float) -> ComplexField3:
    """Critical rescaling lam^2 u(lam x); kinetic-invariant in d = 6.

    Interpolatory, for initial-data preparation only -- never inside the
    time loop.
    """
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError(f"scaling factor must be positive, got {lam}")
    if lam == 1.0:
        return u.copy()
    grid = u.grid
    if isinstance(grid, CartesianGrid):
        comps = [lam**2 * _resample_cartesian(grid, c, lam) for c in u.components]
    else:
        comps = [lam**2 * _resample_radial(grid, c, lam) for c in u.components]
    return ComplexField3(grid, *comps)


def galilean_boost(
    u: ComplexField3, xi: Sequence[float], t: float, k: KappaTriple
) -> ComplexField3:
    """Boost u^xi: component i gains exp(i x.xi/kappa_i) exp(-i t |xi|^2/kappa_i)
    and, for t != 0, the argument shift x -> x - 2 t xi.

    The transform is a symmetry of the system only under mass-resonance, but
    the map itself is defined for any triple.  Requires a Cartesian grid; a
    boost breaks radial symmetry.
    """
    grid = u.grid
    if not isinstance(grid, CartesianGrid):
        raise ValueError("galilean_boost requires a Cartesian grid")
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (grid.dim,):
        raise ValueError(f"xi must have length {grid.dim}, got shape {xi.shape}")
    xi_sq = float(np.dot(xi, xi))
    x_dot_xi = np.zeros(grid.shape)
    for axis, c in enumerate(grid.coordinates):
        x_dot_xi = x_dot_xi + xi[axis] * c
    comps = []
    for kappa, comp in zip(k.as_tuple, u.components):
        shifted = grid.translate(comp, 2.0 * t * xi) if t != 0.0 else comp
        comps.append(np.exp(1j * (x_dot_xi - t * xi_sq) / kappa) * shifted)
    return ComplexField3(grid, *comps)


def make_gaussian_triple(
    grid: Grid,
    amplitudes: Sequence[float],
    width: float,
    phases: Sequence[float] = (0.0, 0.0, 0.0),
) -> ComplexField3:
    """Deterministic factory u^i = a_i exp(i theta_i) exp(-|x|^2 / (2 sigma^2))."""
    if not (np.isfinite(width) and width > 0):
        raise ValueError(f"width must be positive, got {width}")
    if len(amplitudes) != 3 or len(phases) != 3:
        raise ValueError("amplitudes and phases must have three entries")
    envelope = np.exp(-grid.radius_squared / (2.0 * width**2))
    comps = [a * np.exp(1j * th) * envelope for a, th in zip(amplitudes, phases)]
    return ComplexField3(grid, *comps)
