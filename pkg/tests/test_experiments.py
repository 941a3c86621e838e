"""Sweep drivers, persistence, and determinism."""

import json

import numpy as np
import pytest

from tunneltime import (
    Scenario,
    SweepResult,
    run_figure1,
    run_figure2,
    run_single,
    single_to_sweep,
    write_results,
)


def tiny_scenario(**over):
    """Small grid and sample count: fast but physically meaningful."""
    base = dict(
        x_min=0.0,
        x_max=200.0,
        n_points=4001,
        m_samples=4,
        t_end_fig1=8.0,
        t_end_main=9.0,
        t_end_free=14.0,
        t_horizon=15.0,
        workers=1,
    )
    base.update(over)
    return Scenario(**base)


class TestWriteResults:
    def test_empty_sweep_header_only(self, tmp_path):
        result = SweepResult(kind="figure1")
        path = tmp_path / "figure1.csv"
        write_results(result, path)
        assert path.read_text() == "s,sigma,dq_mean_p,delta_dq,efficiency,status\n"
        sidecar = json.loads(path.with_suffix(".json").read_text())
        assert sidecar["kind"] == "figure1"
        assert sidecar["row_extras"] == []

    def test_one_row_roundtrip(self, tmp_path):
        result = SweepResult(kind="figure2")
        row = {
            "d": 0.25, "tau1": 3.791640804627192, "tau2": 2.9142011834319525,
            "tau_T": 3.5555555555555554, "p_b_given_a_1": 0.123456789012345678,
            "p_b_given_a_2": 0.25, "clip_frac_1": 0.0, "clip_frac_2": 1e-9,
            "status": "ok",
        }
        result.rows.append(row)
        result.extras.append({"note": 1})
        path = tmp_path / "figure2.csv"
        write_results(result, path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "d,tau1,tau2,tau_T,p_b_given_a_1,p_b_given_a_2,clip_frac_1,clip_frac_2,status"
        assert len(lines) == 2
        fields = lines[1].split(",")
        # 17 significant digits survive the text round trip exactly
        for text, key in zip(fields, result.columns):
            if key == "status":
                assert text == "ok"
            else:
                assert float(text) == row[key]

    def test_nan_serialization_for_failed_rows(self, tmp_path):
        result = SweepResult(kind="figure1")
        result.rows.append({
            "s": 0.0, "sigma": 2.0, "dq_mean_p": np.nan, "delta_dq": np.nan,
            "efficiency": np.nan, "status": "zero-absorption",
        })
        result.extras.append({})
        path = tmp_path / "f.csv"
        write_results(result, path)
        line = path.read_text().strip().split("\n")[1]
        assert line == "0,2,nan,nan,nan,zero-absorption"


class TestFigure1Sweep:
    def test_structure_and_failure_isolation(self):
        sc = tiny_scenario()
        result = run_figure1(sigma_values=[2.0], s_values=[0.0, 1.0], scenario=sc)
        assert result.kind == "figure1"
        assert len(result.rows) == 2
        by_s = {r["s"]: r for r in result.rows}
        assert by_s[0.0]["status"] == "zero-absorption"
        assert np.isnan(by_s[0.0]["delta_dq"])
        ok = by_s[1.0]
        assert ok["status"] == "ok"
        assert 0.0 < ok["efficiency"] < 1.0
        assert ok["dq_mean_p"] == pytest.approx(8.0, rel=0.01)
        assert ok["delta_dq"] > 0.3
        assert result.meta["ref_delta_p"] == pytest.approx(1.0 / 3.0, rel=1e-6)
        assert result.meta["scenario"]["n_points"] == 4001

    def test_bitwise_determinism(self, tmp_path):
        sc = tiny_scenario()
        paths = []
        for tag in ("a", "b"):
            result = run_figure1(sigma_values=[1.5], s_values=[1.0], scenario=sc)
            path = tmp_path / f"fig1_{tag}.csv"
            write_results(result, path)
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()
        assert (
            paths[0].with_suffix(".json").read_bytes()
            == paths[1].with_suffix(".json").read_bytes()
        )


class TestFigure2Sweep:
    def test_single_width_pipeline(self):
        sc = tiny_scenario()
        result = run_figure2(d_values=[0.5], scenario=sc)
        assert len(result.rows) == 1
        row = result.rows[0]
        assert row["status"] == "ok"
        for key in ("tau1", "tau2", "tau_T"):
            assert row[key] > 0
        assert 0.0 < row["p_b_given_a_1"] <= 1.0
        assert 0.0 < row["p_b_given_a_2"] <= 1.0
        assert row["clip_frac_1"] < 0.01 and row["clip_frac_2"] < 0.01
        extras = result.extras[0]
        assert "detector_1" in extras and "detector_2" in extras
        assert extras["detector_1"]["max_fluxnorm_gap"] < 1e-3

    def test_failure_does_not_abort_sweep(self):
        # barrier too tall for anything to transmit: the row is flagged
        sc = tiny_scenario(barrier_height=1e4)
        result = run_figure2(d_values=[2.0], scenario=sc)
        assert len(result.rows) == 1
        assert result.rows[0]["status"] != "ok"


class TestRunSingle:
    def test_density_table(self, tmp_path):
        sc = tiny_scenario(barrier_width=0.5)
        result, diag = run_single(sc)
        tau = result.tau_grid
        assert np.all(result.density >= 0)
        assert np.trapezoid(result.density, tau) == pytest.approx(1.0, abs=1e-4)
        assert result.mean_tau > 0
        sweep = single_to_sweep(result, diag, sc)
        path = tmp_path / "single_tau_density.csv"
        write_results(sweep, path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "tau,density"
        assert len(lines) == len(tau) + 1
