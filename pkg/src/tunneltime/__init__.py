"""tunneltime: two-detector barrier traversal-time simulation.

1D wave packets propagate through a square barrier under a complex
detector potential (Crank-Nicolson, atomic units); the track-formation
collapse rule is applied at sampled detection times; and the conditional
traversal-time distribution between the passage and arrival clicks is
assembled with its mean, alongside momentum back-action statistics.
"""

__version__ = "0.1.0"

from .numerics import (
    HBAR,
    MASS,
    GaussianPrep,
    Grid,
    WaveFunction,
    flux,
    make_grid,
    momentum_grid,
    momentum_moments,
    norm,
    norm_beyond,
    position_moments,
    prepare_gaussian,
)
from .propagate import (
    CrankNicolson,
    DetectionSeries,
    DetectorSpec,
    PotentialSpec,
    PropagatorConfig,
    StopRule,
    capture_states,
    evaluate_potential,
    run,
    step,
)
from .detect import (
    ClickDensity,
    arrival_density,
    click_density,
    collapse,
    transmittance,
)
from .ensemble import (
    ClickSample,
    TraversalResult,
    dq_momentum_stats,
    flux_cutoff_time,
    p_b_given_a,
    sample_click_quantiles,
    tau_T,
    traversal_distribution,
)
from .experiments import (
    Scenario,
    SweepResult,
    default_d_values,
    default_sigma_values,
    figure1_point,
    figure2_point,
    run_figure1,
    run_figure2,
    run_single,
    single_to_sweep,
    write_results,
)
from . import errors

__all__ = [
    "HBAR",
    "MASS",
    "Grid",
    "WaveFunction",
    "GaussianPrep",
    "make_grid",
    "prepare_gaussian",
    "norm",
    "norm_beyond",
    "flux",
    "momentum_grid",
    "momentum_moments",
    "position_moments",
    "DetectorSpec",
    "PotentialSpec",
    "PropagatorConfig",
    "DetectionSeries",
    "StopRule",
    "CrankNicolson",
    "evaluate_potential",
    "step",
    "run",
    "capture_states",
    "ClickDensity",
    "click_density",
    "collapse",
    "arrival_density",
    "transmittance",
    "ClickSample",
    "TraversalResult",
    "dq_momentum_stats",
    "p_b_given_a",
    "traversal_distribution",
    "tau_T",
    "flux_cutoff_time",
    "sample_click_quantiles",
    "Scenario",
    "SweepResult",
    "run_figure1",
    "run_figure2",
    "run_single",
    "single_to_sweep",
    "figure1_point",
    "figure2_point",
    "write_results",
    "default_sigma_values",
    "default_d_values",
    "errors",
]
