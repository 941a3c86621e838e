"""CSV-to-figure rendering.

Line styles follow the source material's captions: the momentum-width
plot draws s=1 solid and s=10 dashed with a dash-dotted reference line;
the traversal-time plot draws tau1 dashed, tau2 dash-dotted, and tau_T
solid.  Rows flagged with a non-ok status render as gaps.  SVG output is
byte-stable (fixed hash salt, no date metadata).
"""

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

matplotlib.rcParams["svg.hashsalt"] = "tunnelfigs"


class SchemaError(ValueError):
    """CSV header does not match the declared figure kind."""


class EmptyDataError(ValueError):
    """CSV carries no data rows."""


SCHEMAS = {
    "fig1": ("s", "sigma", "dq_mean_p", "delta_dq", "efficiency", "status"),
    "fig2": (
        "d",
        "tau1",
        "tau2",
        "tau_T",
        "p_b_given_a_1",
        "p_b_given_a_2",
        "clip_frac_1",
        "clip_frac_2",
        "status",
    ),
    "tau-density": ("tau", "density"),
}


@dataclass(frozen=True)
class FigureSpec:
    input_csv: Path
    output_image: Path
    kind: str  # fig1 | fig2 | tau-density

    def __post_init__(self):
        if self.kind not in SCHEMAS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; choose from {sorted(SCHEMAS)}")


def _read_rows(path: Path, kind: str) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = tuple(reader.fieldnames or ())
        expected = SCHEMAS[kind]
        if header != expected:
            raise SchemaError(
                f"{path} header {header} does not match the {kind} schema {expected}"
            )
        rows = list(reader)
    if not rows:
        raise EmptyDataError(f"{path} has no data rows")
    return rows


def _value(row: dict, key: str) -> float:
    """Numeric cell, with failed rows mapped to gaps."""
    if row.get("status", "ok") != "ok":
        return math.nan
    try:
        return float(row[key])
    except (TypeError, ValueError):
        return math.nan


def _sidecar_meta(csv_path: Path) -> dict:
    sidecar = csv_path.with_suffix(".json")
    if sidecar.is_file():
        try:
            return json.loads(sidecar.read_text(encoding="utf-8")).get("meta", {})
        except (json.JSONDecodeError, OSError):
            return {}
    return {}


def _render_fig1(ax, rows, meta):
    styles = {1.0: "-", 10.0: "--"}
    fallback = ["-", "--", ":"]
    s_values = sorted({float(r["s"]) for r in rows})
    for i, s in enumerate(s_values):
        branch = sorted((r for r in rows if float(r["s"]) == s), key=lambda r: float(r["sigma"]))
        sigma = [float(r["sigma"]) for r in branch]
        width = [_value(r, "delta_dq") for r in branch]
        ax.plot(sigma, width, styles.get(s, fallback[i % 3]), label=f"s = {s:g}")
    ref = meta.get("ref_delta_p")
    if ref is not None:
        ax.axhline(float(ref), linestyle="-.", color="k", label="incident width")
    ax.set_xscale("log")
    ax.set_xlabel("detector width sigma (a.u.)")
    ax.set_ylabel("post-detection momentum width (a.u.)")
    ax.legend()


def _render_fig2(ax, rows):
    rows = sorted(rows, key=lambda r: float(r["d"]))
    d = [float(r["d"]) for r in rows]
    for key, style, label in (
        ("tau1", "--", "wide detector"),
        ("tau2", "-.", "narrow detector"),
        ("tau_T", "-", "two-average time"),
    ):
        ax.plot(d, [_value(r, key) for r in rows], style, label=label)
    ax.set_xlabel("barrier width d (a.u.)")
    ax.set_ylabel("mean traversal time (a.u.)")
    ax.legend()


def _render_tau_density(ax, rows):
    tau = [float(r["tau"]) for r in rows]
    dens = [float(r["density"]) for r in rows]
    ax.plot(tau, dens, "-")
    ax.set_xlabel("traversal time tau (a.u.)")
    ax.set_ylabel("probability density (1/a.u.)")


def render_figure(spec: FigureSpec):
    """Build the matplotlib Figure for a spec (no file output)."""
    rows = _read_rows(Path(spec.input_csv), spec.kind)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if spec.kind == "fig1":
        _render_fig1(ax, rows, _sidecar_meta(Path(spec.input_csv)))
    elif spec.kind == "fig2":
        _render_fig2(ax, rows)
    else:
        _render_tau_density(ax, rows)
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> Path:
    """Render the figure to spec.output_image (SVG for vector output,
    anything matplotlib supports otherwise) and return the path."""
    fig = render_figure(spec)
    out = Path(spec.output_image)
    try:
        fig.savefig(out, metadata={"Date": None} if out.suffix == ".svg" else None)
    finally:
        plt.close(fig)
    return out
