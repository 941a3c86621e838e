"""Detector models.

Passage detector (A): the absorber removes norm from the propagated
channel; the click-time density is the normalized absorption rate, and a
click collapses the state by the track-formation rule psi -> g psi / |g psi|
(the window multiplies the wave, keeping memory of the incident state).

Arrival detector (B): a perfect absorber at the right barrier edge,
modeled by the normalized flux of the freely evolving (detector-off)
state; its time-integrated flux is the branch transmittance.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ExcessiveBackflowError,
    HorizonWarning,
    ZeroAbsorptionError,
    ZeroOverlapError,
    ZeroTransmissionError,
)
from .numerics import WaveFunction, norm_beyond
from .propagate import (
    DetectionSeries,
    DetectorSpec,
    PotentialSpec,
    PropagatorConfig,
    StopRule,
    run,
)

# A run's final 5% must change N by less than this for N(t_end) to stand
# in for N(infinity).
_TAIL_TOL = 1e-6

# Backflow budget: clipped negative flux above this fraction of the
# positive integral invalidates the normalized-flux arrival model.
_BACKFLOW_LIMIT = 0.01


@dataclass
class ClickDensity:
    """Normalized detection-time density on a time grid.

    `efficiency` is the total firing probability this density was
    normalized by: absorbed norm for a passage detector, time-integrated
    flux (the transmittance) for an arrival detector.
    """

    times: np.ndarray
    density: np.ndarray
    efficiency: float
    clipped_fraction: float = 0.0
    tail_converged: bool = True

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.times))

    def cumulative(self) -> np.ndarray:
        """CDF on `times` (starts at 0, ends at ~1)."""
        cdf = np.concatenate(
            ([0.0], np.cumsum(0.5 * (self.density[1:] + self.density[:-1]) * np.diff(self.times)))
        )
        return cdf


def click_density(series: DetectionSeries, min_absorption: float = 1e-10) -> ClickDensity:
    """Detection-time density of the passage detector from the norm record.

    density(t) = (-dN/dt) / (N(0) - N(t_end)), with dN/dt by centered
    differences (one-sided at the endpoints); efficiency = N(0) - N(t_end).
    """
    if series.norm is None:
        raise ValueError("series carries no norm record")
    n = series.norm
    t = series.times
    if n.size < 3:
        raise ValueError("need at least 3 norm samples")
    rises = np.diff(n)
    # The Cayley step is contractive for s >= 0, so anything beyond
    # roundoff accumulation signals a broken absorber.
    if rises.max() > 1e-9 * n[0]:
        raise ValueError("norm record is not non-increasing")

    absorbed = float(n[0] - n[-1])
    if absorbed < min_absorption:
        raise ZeroAbsorptionError(
            f"detector absorbed only {absorbed:.3e} (< {min_absorption:.0e}); "
            "no click statistics available"
        )

    rate = np.empty_like(n)
    rate[1:-1] = (n[2:] - n[:-2]) / (t[2:] - t[:-2])
    rate[0] = (n[1] - n[0]) / (t[1] - t[0])
    rate[-1] = (n[-1] - n[-2]) / (t[-1] - t[-2])
    density = np.maximum(-rate, 0.0) / absorbed

    tail = max(3, int(0.05 * n.size))
    tail_converged = bool(abs(n[-1] - n[-tail]) < _TAIL_TOL)
    return ClickDensity(
        times=t.copy(),
        density=density,
        efficiency=absorbed,
        tail_converged=tail_converged,
    )


def collapse(psi_at_ta: WaveFunction, detector: DetectorSpec) -> WaveFunction:
    """Track-formation collapse: g(x) psi(x) / sqrt(int g^2 |psi|^2 dx).

    The result is unit-normalized with the time stamp preserved.  Raises
    ZeroOverlapError when the packet has no support under the window.
    """
    g = detector.window(psi_at_ta.grid.x)
    weighted = g * psi_at_ta.psi
    overlap = float(np.trapezoid(np.abs(weighted) ** 2, dx=psi_at_ta.grid.dx))
    if overlap < 1e-30:
        raise ZeroOverlapError(
            f"state has no support under the detector window at a={detector.a}"
        )
    return WaveFunction(psi_at_ta.grid, weighted / np.sqrt(overlap), psi_at_ta.time)


def arrival_density(
    series: DetectionSeries,
    b: float,
    min_transmission: float = 1e-10,
) -> ClickDensity:
    """Arrival-time density at probe b: normalized positive flux.

    Negative flux samples (backflow) are clipped to zero before
    normalization, with the clipped fraction recorded; the run fails if
    the clipped content exceeds 1% of the positive integral.  The
    unnormalized positive integral is reported as the transmittance in
    the `efficiency` field.
    """
    j = series.flux_at(b)
    t = series.times
    pos = np.clip(j, 0.0, None)
    neg = np.clip(-j, 0.0, None)
    pos_integral = float(np.trapezoid(pos, t))
    neg_integral = float(np.trapezoid(neg, t))
    if pos_integral < min_transmission:
        raise ZeroTransmissionError(
            f"integrated flux at b={b} is {pos_integral:.3e} (< {min_transmission:.0e})"
        )
    clipped = neg_integral / pos_integral
    if clipped > _BACKFLOW_LIMIT:
        raise ExcessiveBackflowError(
            f"clipped backflow fraction {clipped:.3e} exceeds {_BACKFLOW_LIMIT}"
        )
    return ClickDensity(
        times=t.copy(),
        density=pos / pos_integral,
        efficiency=pos_integral,
        clipped_fraction=clipped,
    )


def transmittance(
    psi_at_ta: WaveFunction,
    spec: PotentialSpec,
    cfg: PropagatorConfig,
    t_horizon: float,
    *,
    decay_rel: float = 1e-6,
) -> float:
    """P(E_b | t_a): probability that the collapsed state crosses the
    right barrier edge within the horizon.

    Propagates the state with the passage detector off, integrating the
    flux at b = barrier_left + barrier_width; cross-validated against the
    spatial norm beyond b at the end of the run.  Warns if the flux has
    not decayed by the horizon.
    """
    if spec.active_detector() is not None:
        raise ValueError("passage detector must be deactivated after its click")
    b = spec.barrier_right
    final, series = run(
        psi_at_ta,
        spec,
        cfg,
        psi_at_ta.time + t_horizon,
        probes=(b,),
        record_norm=False,
        stop=StopRule(probe=b, rel=decay_rel),
    )
    j = series.flux_at(b)
    peak = float(np.abs(j).max())
    if peak > 0 and abs(j[-1]) > decay_rel * peak and series.times[-1] >= psi_at_ta.time + t_horizon - cfg.dt:
        warnings.warn(
            f"flux at b={b} had not decayed below {decay_rel} of its peak "
            f"by the horizon t={series.times[-1]:.2f}",
            HorizonWarning,
            stacklevel=2,
        )
    t_flux = float(np.trapezoid(np.clip(j, 0.0, None), series.times))
    t_norm = norm_beyond(final, b)
    if abs(t_flux - t_norm) > max(1e-3, 0.05 * t_norm):
        warnings.warn(
            f"flux-integrated transmittance {t_flux:.4e} disagrees with the "
            f"spatial norm beyond b ({t_norm:.4e})",
            HorizonWarning,
            stacklevel=2,
        )
    return t_flux


def transmittance_cross_check(final: WaveFunction, series: DetectionSeries, b: float) -> tuple[float, float, float]:
    """(flux-integrated T, spatial-norm T, clipped fraction) for a
    completed branch run; shared by the sweep pipeline."""
    j = series.flux_at(b)
    pos = float(np.trapezoid(np.clip(j, 0.0, None), series.times))
    neg = float(np.trapezoid(np.clip(-j, 0.0, None), series.times))
    clip_frac = neg / pos if pos > 0 else 0.0
    return pos, norm_beyond(final, b), clip_frac
