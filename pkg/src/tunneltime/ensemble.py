"""Ensemble-level statistics over detected branches.

The detection-time average (D) weights quantities computed per collapsed
branch (Q) by the click-time density; combined they give the double
average used for the post-detection momentum mean and width.  The
Bayesian chain over (t_a, t_b) yields the conditional traversal-time
distribution P(tau | both detectors fired) and its mean.  The legacy
two-average time tau_T comes from first moments of the incident and
outgoing currents of a detector-free run.
"""

from dataclasses import dataclass

import numpy as np

from .detect import ClickDensity
from .errors import (
    AllReflectedError,
    EmptyEnsembleError,
    NonpositiveDenominatorError,
    TauGridCoverageError,
)
from .numerics import WaveFunction, momentum_moments
from .propagate import DetectionSeries

# Branches transmitting less than this are treated as numerical noise
# and excluded from the tau accumulation (they still count in
# P(E_b|E_a)).  The conservative midpoint current integrates mass to
# ~1e-13, and the deep-tunneling sweep relies on genuine 1e-9-scale
# tail transmissions, so the floor sits well below those signals.
TRANSMITTANCE_FLOOR = 1e-12

# Weighted arrival mass allowed to fall beyond the tau grid.
_COVERAGE_TOL = 1e-3


@dataclass
class ClickSample:
    """One sampled passage-detector click and its collapsed branch.

    `weight` carries the quadrature weight of the click-time average.
    `transmittance` and `arrival` are filled once the branch has been
    propagated to the arrival detector (None for momentum-only studies).
    """

    t_a: float
    weight: float
    collapsed_state: WaveFunction | None
    transmittance: float | None = None
    arrival: ClickDensity | None = None


@dataclass
class TraversalResult:
    """Discretized P(tau|E_b) with its mean and the chain diagnostics."""

    tau_grid: np.ndarray
    density: np.ndarray
    mean_tau: float
    p_b_given_a: float
    config: dict | None = None


def sample_click_quantiles(click: ClickDensity, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Equal-probability quantile sampling of the click-time density.

    Returns m click times at the (i+1/2)/m quantiles of P(t_a|E_a), each
    carrying weight 1/m; this concentrates branch propagations where the
    detection mass lives.
    """
    if m < 1:
        raise ValueError(f"need at least one sample, got m={m}")
    cdf = click.cumulative()
    total = cdf[-1]
    if total <= 0:
        raise EmptyEnsembleError("click density integrates to zero")
    targets = (np.arange(m) + 0.5) / m * total
    t_a = np.interp(targets, cdf, click.times)
    return t_a, np.full(m, 1.0 / m)


def dq_momentum_stats(samples: list[ClickSample]) -> tuple[float, float]:
    """Double-average momentum mean and width over detected branches.

    Returns (DQp, Delta_DQ) where DQp is the click-weighted mean of the
    per-branch quantum expectations and Delta_DQ the square root of the
    ensemble variance DQ[p^2] - (DQp)^2.
    """
    if not samples:
        raise EmptyEnsembleError("no click samples")
    weights = np.array([s.weight for s in samples])
    wsum = weights.sum()
    if wsum <= 0:
        raise EmptyEnsembleError("click samples carry zero total weight")
    means = np.empty(len(samples))
    seconds = np.empty(len(samples))
    for i, s in enumerate(samples):
        means[i], seconds[i] = momentum_moments(s.collapsed_state)
    dqp = float(np.dot(weights, means) / wsum)
    second = float(np.dot(weights, seconds) / wsum)
    var = max(second - dqp**2, 0.0)
    return dqp, float(np.sqrt(var))


def p_b_given_a(samples: list[ClickSample]) -> float:
    """P(E_b|E_a): click-weighted mean of the branch transmittances."""
    if not samples:
        raise EmptyEnsembleError("no click samples")
    weights = np.array([s.weight for s in samples])
    wsum = weights.sum()
    if wsum <= 0:
        raise EmptyEnsembleError("click samples carry zero total weight")
    trans = np.array([s.transmittance for s in samples], dtype=float)
    if np.any(np.isnan(trans)):
        raise ValueError("every sample needs a transmittance")
    return float(np.dot(weights, trans) / wsum)


def traversal_distribution(
    samples: list[ClickSample],
    tau_grid: np.ndarray,
    config: dict | None = None,
) -> TraversalResult:
    """Conditional traversal-time distribution over doubly detected pairs.

    P(tau|E_b) is the transmittance-weighted average of the branch
    arrival densities evaluated at t_a + tau, renormalized on tau_grid;
    branches below TRANSMITTANCE_FLOOR are excluded from the density (but
    not from P(E_b|E_a)).
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    if tau_grid.size < 2:
        raise ValueError("tau grid needs at least two points")
    p_b = p_b_given_a(samples)

    included = [
        s
        for s in samples
        if s.transmittance is not None
        and s.transmittance >= TRANSMITTANCE_FLOOR
        and s.arrival is not None
    ]
    if not included:
        raise AllReflectedError("every branch was reflected (or excluded as noise)")

    tau_end = tau_grid[-1]
    acc = np.zeros_like(tau_grid)
    wt_total = 0.0
    outside = 0.0
    for s in included:
        wt = s.weight * s.transmittance
        cdf = s.arrival.cumulative()
        mass_in = float(np.interp(s.t_a + tau_end, s.arrival.times, cdf, right=cdf[-1]))
        outside += wt * (cdf[-1] - mass_in)
        acc += wt * np.interp(
            s.t_a + tau_grid, s.arrival.times, s.arrival.density, left=0.0, right=0.0
        )
        wt_total += wt
    if outside > _COVERAGE_TOL * wt_total:
        raise TauGridCoverageError(
            f"weighted arrival mass {outside / wt_total:.3e} falls beyond "
            f"tau={tau_end}; extend the tau grid"
        )

    density = acc / wt_total
    z = float(np.trapezoid(density, tau_grid))
    if z <= 0:
        raise AllReflectedError("traversal density vanished on the tau grid")
    density /= z
    mean_tau = float(np.trapezoid(tau_grid * density, tau_grid))
    return TraversalResult(
        tau_grid=tau_grid,
        density=density,
        mean_tau=mean_tau,
        p_b_given_a=p_b,
        config=config,
    )


def flux_cutoff_time(series: DetectionSeries, probe: float, rel: float = 1e-6) -> float:
    """First time after the flux peak at `probe` where |J| drops below
    rel times the peak; operationalizes 'before the reflected flow'."""
    j = series.flux_at(probe)
    ipk = int(np.argmax(j))
    peak = j[ipk]
    if peak <= 0:
        raise NonpositiveDenominatorError(f"no positive flux peak at x={probe}")
    below = np.nonzero(np.abs(j[ipk:]) < rel * peak)[0]
    if below.size == 0:
        raise ValueError(
            f"flux at x={probe} never decayed below {rel} of its peak; run longer"
        )
    return float(series.times[ipk + below[0]])


def tau_T(
    incident: DetectionSeries,
    a: float,
    outgoing: DetectionSeries,
    b: float,
    t_c: float,
) -> float:
    """Two-average traversal time: <t>_out at b minus <t>_in at a.

    <t>_in is the first moment of the current at a restricted to [0, t_c]
    (the incident passage only); <t>_out the first moment of the full
    outgoing current at b.  Unlike the per-particle tau this can be
    negative.
    """
    j_a = incident.flux_at(a)
    t_in_grid = incident.times
    mask = t_in_grid <= t_c
    if mask.sum() < 2:
        raise NonpositiveDenominatorError(f"no incident samples before t_c={t_c}")
    den_in = float(np.trapezoid(j_a[mask], t_in_grid[mask]))
    if den_in <= 0:
        raise NonpositiveDenominatorError(f"incident current integral {den_in:.3e} <= 0")
    mean_in = float(np.trapezoid(j_a[mask] * t_in_grid[mask], t_in_grid[mask])) / den_in

    j_b = outgoing.flux_at(b)
    t_out_grid = outgoing.times
    den_out = float(np.trapezoid(j_b, t_out_grid))
    if den_out <= 0:
        raise NonpositiveDenominatorError(f"outgoing current integral {den_out:.3e} <= 0")
    mean_out = float(np.trapezoid(j_b * t_out_grid, t_out_grid)) / den_out
    return mean_out - mean_in
