"""Figure rendering from the shipped CSV schemas."""

import json
import math

import pytest

from tunnelfigs import EmptyDataError, FigureSpec, SchemaError, render, render_figure
from tunnelfigs.cli import main

FIG1_HEADER = "s,sigma,dq_mean_p,delta_dq,efficiency,status"
FIG2_HEADER = "d,tau1,tau2,tau_T,p_b_given_a_1,p_b_given_a_2,clip_frac_1,clip_frac_2,status"


def write_fig1(path, with_sidecar=True, rows=None):
    rows = rows if rows is not None else [
        "1,0.2,7.99,3.55,0.044,ok",
        "1,1.0,7.99,0.78,0.2,ok",
        "1,4.5,7.99,0.37,0.64,ok",
        "10,0.2,8.17,4.52,0.97,ok",
        "10,1.0,8.0,1.1,1.0,ok",
        "10,4.5,8.0,0.52,1.0,ok",
    ]
    path.write_text(FIG1_HEADER + "\n" + "\n".join(rows) + "\n")
    if with_sidecar:
        path.with_suffix(".json").write_text(
            json.dumps({"kind": "figure1", "meta": {"ref_delta_p": 1.0 / 3.0}})
        )
    return path


def write_fig2(path, rows=None):
    rows = rows if rows is not None else [
        "0.5,3.94,3.51,3.79,0.007,0.11,0,0,ok",
        "1,3.86,3.6,3.66,2e-05,0.11,0,0,ok",
        "2,4.67,4.02,3.35,3e-09,0.11,0,0,ok",
        "4,8.06,4.21,7.74,9e-10,0.108,0,0,ok",
    ]
    path.write_text(FIG2_HEADER + "\n" + "\n".join(rows) + "\n")
    return path


def write_tau(path):
    lines = ["tau,density"] + [f"{0.02 * i},{math.exp(-((0.02 * i - 4) ** 2))}" for i in range(400)]
    path.write_text("\n".join(lines) + "\n")
    return path


class TestFig1:
    def test_curves_and_styles(self, tmp_path):
        csv = write_fig1(tmp_path / "figure1.csv")
        fig = render_figure(FigureSpec(csv, tmp_path / "f.svg", "fig1"))
        ax = fig.axes[0]
        # two sweep curves plus the reference line
        assert len(ax.lines) == 3
        styles = [line.get_linestyle() for line in ax.lines]
        assert styles == ["-", "--", "-."]
        assert ax.get_xscale() == "log"

    def test_reference_line_value_from_sidecar(self, tmp_path):
        csv = write_fig1(tmp_path / "figure1.csv")
        fig = render_figure(FigureSpec(csv, tmp_path / "f.svg", "fig1"))
        ref_line = fig.axes[0].lines[-1]
        assert ref_line.get_ydata()[0] == pytest.approx(1.0 / 3.0)

    def test_without_sidecar_no_reference(self, tmp_path):
        csv = write_fig1(tmp_path / "figure1.csv", with_sidecar=False)
        fig = render_figure(FigureSpec(csv, tmp_path / "f.svg", "fig1"))
        assert len(fig.axes[0].lines) == 2


class TestFig2:
    def test_three_curves_with_caption_styles(self, tmp_path):
        csv = write_fig2(tmp_path / "figure2.csv")
        fig = render_figure(FigureSpec(csv, tmp_path / "f.svg", "fig2"))
        ax = fig.axes[0]
        assert len(ax.lines) == 3
        assert [line.get_linestyle() for line in ax.lines] == ["--", "-.", "-"]

    def test_failed_rows_become_gaps(self, tmp_path):
        rows = [
            "0.5,3.94,3.51,3.79,0.007,0.11,0,0,ok",
            "1,nan,nan,nan,nan,nan,nan,nan,all-reflected",
            "2,4.67,4.02,3.35,3e-09,0.11,0,0,ok",
        ]
        csv = write_fig2(tmp_path / "figure2.csv", rows=rows)
        fig = render_figure(FigureSpec(csv, tmp_path / "f.svg", "fig2"))
        ydata = fig.axes[0].lines[0].get_ydata()
        assert math.isnan(ydata[1]) and not math.isnan(ydata[0])


class TestTauDensity:
    def test_single_curve(self, tmp_path):
        csv = write_tau(tmp_path / "single_tau_density.csv")
        fig = render_figure(FigureSpec(csv, tmp_path / "f.svg", "tau-density"))
        assert len(fig.axes[0].lines) == 1


class TestErrors:
    def test_header_only_is_empty_data(self, tmp_path):
        csv = tmp_path / "figure1.csv"
        csv.write_text(FIG1_HEADER + "\n")
        with pytest.raises(EmptyDataError):
            render(FigureSpec(csv, tmp_path / "f.svg", "fig1"))

    def test_schema_mismatch(self, tmp_path):
        csv = write_fig2(tmp_path / "figure2.csv")
        with pytest.raises(SchemaError):
            render(FigureSpec(csv, tmp_path / "f.svg", "fig1"))

    def test_unknown_kind(self, tmp_path):
        with pytest.raises(SchemaError):
            FigureSpec(tmp_path / "x.csv", tmp_path / "f.svg", "fig3")


class TestByteStability:
    def test_svg_identical_across_runs(self, tmp_path):
        csv = write_fig1(tmp_path / "figure1.csv")
        out1 = render(FigureSpec(csv, tmp_path / "a.svg", "fig1"))
        out2 = render(FigureSpec(csv, tmp_path / "b.svg", "fig1"))
        assert out1.read_bytes() == out2.read_bytes()

    def test_fig2_svg_stable(self, tmp_path):
        csv = write_fig2(tmp_path / "figure2.csv")
        out1 = render(FigureSpec(csv, tmp_path / "a.svg", "fig2"))
        out2 = render(FigureSpec(csv, tmp_path / "b.svg", "fig2"))
        assert out1.read_bytes() == out2.read_bytes()


class TestCli:
    def test_render_command(self, tmp_path, capsys):
        csv = write_fig2(tmp_path / "figure2.csv")
        rc = main(["--kind", "fig2", "--in", str(csv), "--out", str(tmp_path / "fig2.svg")])
        assert rc == 0
        assert (tmp_path / "fig2.svg").is_file()

    def test_missing_input_is_io_error(self, tmp_path):
        rc = main(["--kind", "fig2", "--in", str(tmp_path / "nope.csv"),
                   "--out", str(tmp_path / "f.svg")])
        assert rc == 3

    def test_schema_error_exit_code(self, tmp_path):
        csv = write_fig1(tmp_path / "figure1.csv")
        rc = main(["--kind", "fig2", "--in", str(csv), "--out", str(tmp_path / "f.svg")])
        assert rc == 2

    def test_empty_data_exit_code(self, tmp_path):
        csv = tmp_path / "figure1.csv"
        csv.write_text(FIG1_HEADER + "\n")
        rc = main(["--kind", "fig1", "--in", str(csv), "--out", str(tmp_path / "f.svg")])
        assert rc == 2
