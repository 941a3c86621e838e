"""Command-line front end.

Commands: figure1, figure2, single.  Configuration comes from an optional
flat key=value file (with # comments) plus repeatable --set KEY=VALUE
overrides, applied last-wins.  Exit codes: 0 success, 1 scientific
failure (flagged rows / all-reflected), 2 configuration error, 3 I/O
error.  All quantities are in atomic units (hbar = m = 1).
"""

import argparse
import logging
import sys
from dataclasses import fields, replace
from pathlib import Path

from .errors import ConfigError, SimulationError
from .experiments import (
    Scenario,
    run_figure1,
    run_figure2,
    run_single,
    single_to_sweep,
    write_results,
)

log = logging.getLogger(__name__)

# Override keys beyond the Scenario fields: sweep lists and short aliases.
_SWEEP_KEYS = {
    "d_values": "comma-separated barrier widths for the figure2 sweep",
    "sigma_values": "comma-separated detector widths for the figure1 sweep",
    "s_values": "comma-separated detector intensities for the figure1 sweep",
}
_ALIASES = {
    "d": "single barrier width (sets barrier_width and a one-point figure2 sweep)",
    "s": "single detector intensity (sets detector_s and a one-point s sweep)",
    "sigma": "single detector width (sets detector_sigma and a one-point sigma sweep)",
}

_FIELD_HELP = {
    "x0": "initial packet center position",
    "p0": "initial packet momentum",
    "var_x": "initial spatial variance (length^2)",
    "barrier_left": "left barrier edge position",
    "barrier_height": "barrier height (energy)",
    "barrier_width": "barrier width d (length)",
    "detector_a": "passage detector position a",
    "detector_s": "detector intensity for single runs",
    "detector_sigma": "detector width for single runs",
    "a1_s": "figure2 wide-detector intensity",
    "a1_sigma": "figure2 wide-detector width",
    "a2_s": "figure2 narrow-detector intensity",
    "a2_sigma": "figure2 narrow-detector width",
    "x_min": "grid left edge",
    "x_max": "grid right edge",
    "n_points": "grid point count",
    "dt": "time step",
    "p_max": "fastest momentum the grid must resolve",
    "m_samples": "click-time quantile sample count M",
    "t_end_fig1": "figure1 absorber-run length (time)",
    "t_end_main": "figure2 absorber-run length (time)",
    "t_end_free": "detector-free reference-run length (time)",
    "t_horizon": "branch propagation horizon (time)",
    "branch_min_time": "minimum branch run length before early stop (time)",
    "flux_decay_rel": "relative flux decay threshold for early stop",
    "workers": "parallel sweep workers",
}


def _scenario_field_types() -> dict[str, type]:
    return {f.name: f.type for f in fields(Scenario)}


def _known_keys() -> list[str]:
    return list(_FIELD_HELP) + list(_SWEEP_KEYS) + list(_ALIASES)


def parse_config_file(path: Path) -> dict[str, str]:
    """Flat KEY=VALUE lines; blank lines and # comments ignored."""
    raw: dict[str, str] = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected KEY=VALUE, got {line!r}")
        key, value = stripped.split("=", 1)
        raw[key.strip()] = value.strip()
    return raw


def _parse_value(key: str, text: str):
    if key in _SWEEP_KEYS:
        try:
            return [float(v) for v in text.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad list value for {key}: {text!r}") from exc
    if key in _ALIASES:
        try:
            return float(text)
        except ValueError as exc:
            raise ConfigError(f"bad numeric value for {key}: {text!r}") from exc
    ftypes = _scenario_field_types()
    if key not in ftypes:
        raise ConfigError(f"unknown override key: {key!r} (see --help for the key list)")
    want_int = ftypes[key] in (int, "int")
    try:
        return int(text) if want_int else float(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc


def build_settings(args) -> tuple[Scenario, dict]:
    """Merge config file and --set overrides into a Scenario plus sweep
    lists; raises ConfigError on any unknown key or bad value."""
    raw: dict[str, str] = {}
    if args.config is not None:
        raw.update(parse_config_file(Path(args.config)))
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()

    scenario_kwargs: dict = {}
    sweeps: dict = {}
    for key, text in raw.items():
        value = _parse_value(key, text)
        if key in _SWEEP_KEYS:
            sweeps[key] = value
        elif key == "d":
            scenario_kwargs["barrier_width"] = value
            sweeps.setdefault("d_values", [value])
        elif key == "s":
            scenario_kwargs["detector_s"] = value
            sweeps.setdefault("s_values", [value])
        elif key == "sigma":
            scenario_kwargs["detector_sigma"] = value
            sweeps.setdefault("sigma_values", [value])
        else:
            scenario_kwargs[key] = value
    if args.workers is not None:
        scenario_kwargs["workers"] = args.workers
    try:
        scenario = replace(Scenario(), **scenario_kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad scenario parameters: {exc}") from exc
    return scenario, sweeps


def _resolve_out_dir(args) -> Path:
    out = Path(args.out)
    if not out.is_dir():
        if args.create_out:
            out.mkdir(parents=True, exist_ok=True)
        else:
            raise OSError(f"output directory {out} does not exist (use --create-out)")
    return out


def _write(result, path: Path) -> None:
    try:
        write_results(result, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def cmd_figure1(args) -> int:
    scenario, sweeps = build_settings(args)
    out = _resolve_out_dir(args)
    result = run_figure1(
        sigma_values=sweeps.get("sigma_values"),
        s_values=sweeps.get("s_values", (1.0, 10.0)),
        scenario=scenario,
    )
    _write(result, out / "figure1.csv")
    bad = [r for r in result.rows if r["status"] != "ok"]
    for r in bad:
        log.warning("flagged row s=%g sigma=%g: %s", r["s"], r["sigma"], r["status"])
    print(f"figure1: {len(result.rows)} rows ({len(bad)} flagged) -> {out / 'figure1.csv'}")
    return 1 if bad else 0


def cmd_figure2(args) -> int:
    scenario, sweeps = build_settings(args)
    out = _resolve_out_dir(args)
    result = run_figure2(d_values=sweeps.get("d_values"), scenario=scenario)
    _write(result, out / "figure2.csv")
    bad = [r for r in result.rows if r["status"] != "ok"]
    for r in bad:
        log.warning("flagged row d=%g: %s", r["d"], r["status"])
    print(f"figure2: {len(result.rows)} rows ({len(bad)} flagged) -> {out / 'figure2.csv'}")
    return 1 if bad else 0


def cmd_single(args) -> int:
    scenario, _ = build_settings(args)
    out = _resolve_out_dir(args)
    try:
        result, diag = run_single(scenario)
    except SimulationError as exc:
        print(f"single run failed: {exc}", file=sys.stderr)
        return 1
    sweep = single_to_sweep(result, diag, scenario)
    _write(sweep, out / "single_tau_density.csv")
    print(
        f"single: mean_tau={result.mean_tau:.6g} p_b_given_a={result.p_b_given_a:.6g} "
        f"-> {out / 'single_tau_density.csv'}"
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    key_lines = ["override keys (atomic units, hbar = m = 1):"]
    for key, help_text in _FIELD_HELP.items():
        default = getattr(Scenario(), key)
        key_lines.append(f"  {key:<16} {help_text} [default {default}]")
    for key, help_text in {**_SWEEP_KEYS, **_ALIASES}.items():
        key_lines.append(f"  {key:<16} {help_text}")
    parser = argparse.ArgumentParser(
        prog="tunneltime",
        description="Two-detector barrier traversal-time simulations.",
        epilog="\n".join(key_lines),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, doc in (
        ("figure1", cmd_figure1, "momentum width vs detector width sweep"),
        ("figure2", cmd_figure2, "mean traversal time vs barrier width sweep"),
        ("single", cmd_single, "one configuration: full traversal-time density"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", help="flat KEY=VALUE config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument(
            "--set", action="append", metavar="KEY=VALUE",
            help="override one key (repeatable, last wins)",
        )
        p.add_argument("--workers", type=int, help="parallel sweep workers")
        p.add_argument("--create-out", action="store_true", help="create the output directory")
        p.add_argument("-v", "--verbose", action="count", default=0,
                       help="-v progress, -vv per-branch detail")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING
    if args.verbose == 1:
        level = logging.INFO
    elif args.verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
