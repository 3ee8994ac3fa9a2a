"""Uniform 1-D grid, unit system, and elementary field operations.

Everything downstream works in the fixed unit system hbar = m = g*n0 = 1,
so the speed of sound c0, the healing length xi and the chemical potential
mu0 of the unperturbed condensate are all unity.  The only free physical
parameter is the dilution n0*xi (atoms per healing length), which sets the
relative size of quantum fluctuations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "Units",
    "Boundary",
    "GridSpec",
    "ComplexField",
    "make_grid",
    "momentum_grid",
    "spatial_integral",
]


@dataclass(frozen=True)
class Units:
    """Fixed internal unit system (hbar = m = g*n0 = 1).

    n0_xi is the dilution parameter: the condensate density expressed in
    atoms per healing length.  It only enters through the interaction
    constant g = 1/n0 and the initial density n0 = n0_xi (xi = 1).
    """

    n0_xi: float = 10.0
    hbar: float = field(default=1.0, init=False)
    mass: float = field(default=1.0, init=False)
    g_times_n0: float = field(default=1.0, init=False)

    def __post_init__(self):
        if self.n0_xi <= 0:
            raise ValueError(f"n0_xi must be positive, got {self.n0_xi}")

    @property
    def n0(self) -> float:
        return self.n0_xi

    @property
    def g(self) -> float:
        return self.g_times_n0 / self.n0

    @property
    def c0(self) -> float:
        return np.sqrt(self.g_times_n0 / self.mass)

    @property
    def xi(self) -> float:
        return self.hbar / (self.mass * self.c0)

    @property
    def mu0(self) -> float:
        return self.g_times_n0


class Boundary(Enum):
    PERIODIC = "periodic"
    HARD_WALL = "hard_wall"


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid with x = 0 exactly on a site (drain placement)."""

    n_sites: int
    dx: float
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        if self.n_sites < 8:
            raise ValueError(f"n_sites must be >= 8, got {self.n_sites}")
        if self.n_sites % 2 != 0:
            raise ValueError(f"n_sites must be even, got {self.n_sites}")
        if not self.dx > 0:
            raise ValueError(f"dx must be positive, got {self.dx}")

    @property
    def origin_index(self) -> int:
        return self.n_sites // 2

    @property
    def length(self) -> float:
        return self.n_sites * self.dx

    @property
    def positions(self) -> np.ndarray:
        return (np.arange(self.n_sites) - self.origin_index) * self.dx

    def index_of(self, x: float) -> int:
        """Grid index of position x; x must sit on a site."""
        j = x / self.dx + self.origin_index
        j_round = int(round(j))
        if abs(j - j_round) > 1e-9 or not (0 <= j_round < self.n_sites):
            raise ValueError(f"position {x} is not on a grid site")
        return j_round


def make_grid(n_sites: int, dx: float, boundary=Boundary.PERIODIC) -> GridSpec:
    """Build a grid spanning [-n_sites/2*dx, (n_sites/2 - 1)*dx]."""
    if isinstance(boundary, str):
        boundary = Boundary(boundary)
    return GridSpec(n_sites=int(n_sites), dx=float(dx), boundary=boundary)


def momentum_grid(grid: GridSpec) -> np.ndarray:
    """Wavenumbers in FFT ordering: 0, positive k, then negative k.

    The Nyquist wavenumber -pi/dx appears exactly once (index n/2); k = 0
    appears exactly once (index 0).  max |k| = pi/dx.
    """
    return 2.0 * np.pi * np.fft.fftfreq(grid.n_sites, d=grid.dx)


def spatial_integral(field_samples: np.ndarray, grid: GridSpec) -> float:
    """Riemann sum sum_j f_j * dx over the grid."""
    f = np.asarray(field_samples)
    if f.shape[-1] != grid.n_sites:
        raise ValueError(
            f"sample length {f.shape[-1]} does not match grid ({grid.n_sites} sites)"
        )
    return f.sum(axis=-1) * grid.dx


@dataclass
class ComplexField:
    """Complex field on a grid; one Wigner trajectory state.

    values may be a single field (n_sites,) or a trajectory batch
    (n_traj, n_sites); either way the last axis is space.
    """

    values: np.ndarray
    grid: GridSpec
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape[-1] != self.grid.n_sites:
            raise ValueError(
                f"field length {self.values.shape[-1]} does not match grid "
                f"({self.grid.n_sites} sites)"
            )

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def weyl_norm(self) -> np.ndarray | float:
        """N_W = sum |psi_j|^2 dx (finite, non-negative by construction)."""
        return spatial_integral(self.density, self.grid)

    def copy(self) -> "ComplexField":
        return ComplexField(self.values.copy(), self.grid, self.time)
