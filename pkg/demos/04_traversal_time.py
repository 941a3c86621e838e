"""One full traversal-time measurement.

Pipeline for a single barrier width: detect at a=50 (wide weak
detector), collapse at sampled click times, propagate each branch to the
right barrier edge, and assemble the conditional delay distribution
P(tau | both detectors clicked) with its mean.  The two-average
reference time from incident/outgoing currents is computed alongside.
"""

import numpy as np

from tunneltime import Scenario, run_single
from tunneltime.experiments import _tau_t_for_width

scenario = Scenario(barrier_width=1.0, m_samples=24)

result, diag = run_single(scenario)
print(f"barrier width d = {scenario.barrier_width}")
print(f"  detector efficiency      = {diag['efficiency']:.4f}")
print(f"  P(B clicks | A clicked)  = {result.p_b_given_a:.3e}")
print(f"  mean traversal time      = {result.mean_tau:.4f}")
print(f"  branches transmitting    = {diag['n_transmitting']} (flux/norm gap {diag['max_fluxnorm_gap']:.1e})")

tau_ref = _tau_t_for_width(scenario, scenario.barrier_width)
print(f"  two-average reference    = {tau_ref:.4f}  (always below the conditional mean)")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(result.tau_grid, result.density, "-")
    ax.axvline(result.mean_tau, linestyle="--", color="k", label=f"mean = {result.mean_tau:.2f}")
    ax.set_xlim(0, 12)
    ax.set_xlabel("traversal time tau (a.u.)")
    ax.set_ylabel("P(tau | doubly detected)")
    ax.legend()
    fig.tight_layout()
    fig.savefig("demo04_tau_density.png", dpi=120)
    print("saved demo04_tau_density.png")
except ImportError:
    pass
