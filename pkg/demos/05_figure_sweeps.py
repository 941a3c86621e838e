"""Reduced versions of the two headline sweeps, with CSV output and
(if the figures package is installed) rendered plots.

The full-resolution sweeps run from the command line:

    tunneltime figure1 --out results --create-out
    tunneltime figure2 --out results --create-out --workers 2
    render --kind fig1 --in results/figure1.csv --out results/figure1.svg
    render --kind fig2 --in results/figure2.csv --out results/figure2.svg

This demo shrinks the grids so it finishes in a few minutes.
"""

import shutil
import subprocess
from pathlib import Path

from tunneltime import Scenario, run_figure1, run_figure2, write_results

out = Path("demo_results")
out.mkdir(exist_ok=True)

scenario = Scenario(m_samples=12, workers=2)

print("momentum-width sweep (5 widths x 2 intensities)...")
fig1 = run_figure1(sigma_values=[0.2, 0.5, 1.0, 2.2, 4.5], scenario=scenario)
write_results(fig1, out / "figure1.csv")
for row in fig1.rows:
    print(
        f"  s={row['s']:>4g} sigma={row['sigma']:>4g}: width={row['delta_dq']:.3f} "
        f"efficiency={row['efficiency']:.3f} [{row['status']}]"
    )

print("\ntraversal-time sweep (4 widths)...")
fig2 = run_figure2(d_values=[0.5, 1.5, 3.0, 5.0], scenario=scenario)
write_results(fig2, out / "figure2.csv")
for row in fig2.rows:
    print(
        f"  d={row['d']:>4g}: tau1={row['tau1']:.3f} tau2={row['tau2']:.3f} "
        f"tau_T={row['tau_T']:.3f} [{row['status']}]"
    )

if shutil.which("render"):
    for kind, name in (("fig1", "figure1"), ("fig2", "figure2")):
        subprocess.run(
            ["render", "--kind", kind, "--in", str(out / f"{name}.csv"),
             "--out", str(out / f"{name}.svg")],
            check=False,
        )
    print(f"\nfigures rendered into {out}/")
else:
    print("\n(install the figures package for `render`)")
