"""Spatial grid, wave-function container, Gaussian preparation, and the
basic observables (norm, probability flux, momentum moments).

Atomic units throughout: hbar = m = 1.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidExtentError,
    ProbeRangeError,
    SupportError,
    ZeroNormError,
)

HBAR = 1.0
MASS = 1.0

# Relative probability mass tolerated in the outermost grid cells of a
# freshly prepared state.  Keeps hard-wall reflections out of long runs.
BOUNDARY_MASS_TOL = 1e-12

# Central first derivative.  For flux this is the lattice-consistent
# choice: Im(psi_i* (psi_{i+1}-psi_{i-1}))/(2 dx) equals the mean of the
# two half-cell currents of the discrete continuity equation, so
# time-integrated flux matches transported mass exactly; higher-order
# stencils read the continuum current and break that balance by the
# group-velocity mismatch (~3% at p dx = 0.4).  Padded to 7 points to
# share the probe-margin convention with the step kernel.
_D1_STENCIL = np.array([0.0, 0.0, -30.0, 0.0, 30.0, 0.0, 0.0]) / 60.0


@dataclass
class Grid:
    """Uniform 1D spatial lattice on [x_min, x_max] with n_points nodes."""

    x_min: float
    x_max: float
    n_points: int
    dx: float = field(init=False)
    x: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_points < 3:
            raise InvalidExtentError(f"need at least 3 grid points, got {self.n_points}")
        if not self.x_max > self.x_min:
            raise InvalidExtentError(f"x_max={self.x_max} must exceed x_min={self.x_min}")
        self.dx = (self.x_max - self.x_min) / (self.n_points - 1)
        self.x = np.linspace(self.x_min, self.x_max, self.n_points)

    def index_of(self, x_pos: float) -> int:
        """Nearest grid index to a physical position."""
        return int(round((x_pos - self.x_min) / self.dx))


def make_grid(x_min: float, x_max: float, n_points: int) -> Grid:
    """Build a uniform grid; raises InvalidExtentError on bad parameters."""
    return Grid(x_min, x_max, n_points)


@dataclass
class WaveFunction:
    """Complex amplitudes on a grid at a given time."""

    grid: Grid
    psi: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=np.complex128)
        if self.psi.shape != (self.grid.n_points,):
            raise ValueError(
                f"amplitude array has shape {self.psi.shape}, "
                f"grid has {self.grid.n_points} points"
            )

    def copy(self) -> "WaveFunction":
        return WaveFunction(self.grid, self.psi.copy(), self.time)


@dataclass(frozen=True)
class GaussianPrep:
    """Minimum-uncertainty Gaussian packet parameters.

    x0, p0 are the center position and momentum; var_x the spatial
    variance of |psi|^2, so Dx*Dp = hbar/2 holds at preparation.
    """

    x0: float
    p0: float
    var_x: float

    def __post_init__(self):
        if self.var_x <= 0:
            raise ValueError(f"var_x must be positive, got {self.var_x}")


def prepare_gaussian(grid: Grid, prep: GaussianPrep) -> WaveFunction:
    """Normalized Gaussian packet exp(-(x-x0)^2/(4 var_x) + i p0 x) at t=0.

    The packet must sit well inside the grid: both edges at least
    8*sqrt(var_x) away from x0, and the relative mass in the outermost
    cells below BOUNDARY_MASS_TOL.
    """
    width = np.sqrt(prep.var_x)
    if prep.x0 - grid.x_min < 8 * width or grid.x_max - prep.x0 < 8 * width:
        raise SupportError(
            f"packet at x0={prep.x0} (width {width:.3g}) too close to grid "
            f"edges [{grid.x_min}, {grid.x_max}]"
        )
    psi = np.exp(-((grid.x - prep.x0) ** 2) / (4 * prep.var_x) + 1j * prep.p0 * grid.x)
    wf = WaveFunction(grid, psi, time=0.0)
    total = norm(wf)
    wf.psi /= np.sqrt(total)

    dens = np.abs(wf.psi) ** 2
    edge_mass = (dens[0] + dens[1] + dens[-2] + dens[-1]) * grid.dx
    if edge_mass > BOUNDARY_MASS_TOL:
        raise SupportError(
            f"boundary mass {edge_mass:.3e} exceeds tolerance {BOUNDARY_MASS_TOL}"
        )
    return wf


def norm(psi: WaveFunction) -> float:
    """Total probability: trapezoidal integral of |psi|^2 over the grid."""
    return float(np.trapezoid(np.abs(psi.psi) ** 2, dx=psi.grid.dx))


def flux(psi: WaveFunction, x_probe: float) -> float:
    """Probability current J = (hbar/m) Im(psi* dpsi/dx) at a probe point.

    The probe snaps to the nearest grid node; positive J means rightward
    flow.  Central differencing keeps the current consistent with the
    discrete continuity equation (see _D1_STENCIL); the probe must sit at
    least 3 cells inside the grid.
    """
    g = psi.grid
    idx = g.index_of(x_probe)
    if idx < 3 or idx > g.n_points - 4:
        raise ProbeRangeError(
            f"probe at x={x_probe} (index {idx}) too close to grid edge"
        )
    dpsi = np.dot(_D1_STENCIL, psi.psi[idx - 3 : idx + 4]) / g.dx
    return float((HBAR / MASS) * np.imag(np.conj(psi.psi[idx]) * dpsi))


def momentum_grid(grid: Grid) -> np.ndarray:
    """FFT momentum values matching this grid's sampling."""
    return 2 * np.pi * np.fft.fftfreq(grid.n_points, d=grid.dx) * HBAR


def momentum_moments(psi: WaveFunction) -> tuple[float, float]:
    """Mean momentum and second moment <p>, <p^2> of a state.

    Computed spectrally: the state's interior support makes the periodic
    FFT representation exact to machine precision, whereas low-order
    difference stencils bias <p> of a p=8 packet by percents at the
    production grid spacing.  <p^2> comes from |p psi_k|^2 and is
    therefore real and nonnegative by construction.
    """
    total = norm(psi)
    if total < 1e-30:
        raise ZeroNormError("state has (numerically) zero norm")
    phi = np.fft.fft(psi.psi)
    weights = np.abs(phi) ** 2
    wsum = weights.sum()
    p = momentum_grid(psi.grid)
    mean = float(np.dot(p, weights) / wsum)
    second = float(np.dot(p * p, weights) / wsum)
    return mean, second


def position_moments(psi: WaveFunction) -> tuple[float, float]:
    """Mean position and spatial variance of |psi|^2."""
    g = psi.grid
    dens = np.abs(psi.psi) ** 2
    total = np.trapezoid(dens, dx=g.dx)
    if total < 1e-30:
        raise ZeroNormError("state has (numerically) zero norm")
    mean = float(np.trapezoid(g.x * dens, dx=g.dx) / total)
    var = float(np.trapezoid((g.x - mean) ** 2 * dens, dx=g.dx) / total)
    return mean, var


def norm_beyond(psi: WaveFunction, x_cut: float) -> float:
    """Probability mass located to the right of x_cut (trapezoid rule)."""
    g = psi.grid
    idx = g.index_of(x_cut)
    idx = max(0, min(idx, g.n_points - 1))
    dens = np.abs(psi.psi[idx:]) ** 2
    if dens.size < 2:
        return 0.0
    return float(np.trapezoid(dens, dx=g.dx))
