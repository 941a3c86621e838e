"""Wave-packet basics: prepare the standard Gaussian, check its moments,
and watch it propagate freely.

The working units are atomic (hbar = m = 1).  The packet matches the
standard scenario of this project: center x0=20, momentum p0=8, spatial
variance 9/4.
"""

import numpy as np

from tunneltime import (
    GaussianPrep,
    PotentialSpec,
    PropagatorConfig,
    flux,
    make_grid,
    momentum_moments,
    norm,
    position_moments,
    prepare_gaussian,
    run,
)

grid = make_grid(0.0, 400.0, 8001)
psi = prepare_gaussian(grid, GaussianPrep(x0=20.0, p0=8.0, var_x=2.25))

mean_x, var_x = position_moments(psi)
mean_p, second_p = momentum_moments(psi)
print("prepared packet:")
print(f"  norm           = {norm(psi):.12f}")
print(f"  <x>  = {mean_x:.6f}   var(x) = {var_x:.6f}")
print(f"  <p>  = {mean_p:.6f}   var(p) = {second_p - mean_p**2:.6f}")
print(f"  uncertainty product Dx*Dp = {np.sqrt(var_x * (second_p - mean_p**2)):.6f}  (minimum 0.5)")
print(f"  flux at the center = {flux(psi, 20.0):.6f}  (~ p0/sqrt(2 pi var_x) = {8/np.sqrt(2*np.pi*2.25):.6f})")

print("\nfree propagation to t = 10:")
final, series = run(psi, PotentialSpec(), PropagatorConfig(), 10.0, probes=(60.0,))
mean_x, var_x = position_moments(final)
print(f"  norm drift |N-1| = {abs(series.norm[-1] - 1.0):.2e}")
print(f"  <x>(10) = {mean_x:.3f}  (ballistic estimate x0 + p0 t = {20 + 80})")
print(f"  var(x)(10) = {var_x:.3f}  (spreading estimate {2.25 + 100/9:.3f})")
crossed = np.trapezoid(series.flux_at(60.0), series.times)
print(f"  probability that crossed x=60: {crossed:.6f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(grid.x, np.abs(psi.psi) ** 2, label="t = 0")
    ax.plot(grid.x, np.abs(final.psi) ** 2, label="t = 10")
    ax.set_xlim(0, 160)
    ax.set_xlabel("x (a.u.)")
    ax.set_ylabel("|psi|^2")
    ax.legend()
    fig.tight_layout()
    fig.savefig("demo01_packet.png", dpi=120)
    print("\nsaved demo01_packet.png")
except ImportError:
    pass
