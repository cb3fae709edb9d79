import subprocess
import sys
from pathlib import Path

import pytest

import figures as fig_mod
from figures import FIGURES, RenderError, build_figure, read_table, render_all

SCRIPT = Path(__file__).resolve().parents[1] / "render_all.py"


def write_csv_set(d: Path) -> None:
    """A tiny but schema-complete CSV set."""
    d.mkdir(parents=True, exist_ok=True)
    (d / "fig1a.csv").write_text(
        "y1,d_linear,d_rt\n-10,0,0.2\n0,0.5,0.5\n10,1,0.8\n"
    )
    (d / "fig1b.csv").write_text(
        "y1,difference\n-10,-0.2\n0,0\n10,0.2\n"
    )
    (d / "fig2.csv").write_text(
        "gamma,d_linear,d_rt,d_threshold0,d_coinflip\n"
        "-5,1.5,2.5,3.5,11\n0,9.375,9.375,9.375,9.375\n5,1.5,2.5,3.5,11\n"
    )
    (d / "fig3.csv").write_text(
        "beta_hat,k_tilde,k_bar\n0.5,0.5,1.3\n1,1,1.46\n2,2,2.2\n"
    )
    rows = ["gamma,cost_kind,cost_scale,d_threshold0,d_rt,d_linear"]
    for kind in ("constant", "linear", "quadratic"):
        for scale in (1.0, 5.0):
            for g, a, b, c in [(-5, 3.5, 2.5 + scale, 1.5), (0, 9.375, 9.375 + scale, 10.0)]:
                rows.append(f"{g},{kind},{scale},{a},{b},{c}")
    (d / "cost_panels.csv").write_text("\n".join(rows) + "\n")
    rows = ["x2,gamma,regret_plugin,regret_linear,mc_se,seed"]
    for x2 in (7.9, 12.0):
        for g, r in [(-5, 2.0), (0, 9.5), (5, 2.0)]:
            rows.append(f"{x2},{g},{r},{r - 0.1},0.001,0")
    (d / "plugin_panels.csv").write_text("\n".join(rows) + "\n")


@pytest.fixture()
def csv_dir(tmp_path):
    d = tmp_path / "csv"
    write_csv_set(d)
    return d


class TestRenderAll:
    def test_five_pngs(self, csv_dir, tmp_path):
        out = tmp_path / "png"
        written = render_all(csv_dir, out)
        assert len(written) == 5
        for path in written:
            assert path.exists() and path.stat().st_size > 0
        assert sorted(p.name for p in written) == [
            "cost_panels.png", "fig1.png", "fig2.png", "fig3.png", "plugin_panels.png",
        ]

    def test_missing_file_diagnostic(self, csv_dir, tmp_path):
        (csv_dir / "fig2.csv").unlink()
        with pytest.raises(RenderError, match="fig2.csv"):
            render_all(csv_dir, tmp_path / "png")

    def test_empty_body_diagnostic(self, csv_dir, tmp_path):
        (csv_dir / "fig3.csv").write_text("beta_hat,k_tilde,k_bar\n")
        with pytest.raises(RenderError, match="no data rows"):
            render_all(csv_dir, tmp_path / "png")

    def test_script_interface(self, csv_dir, tmp_path):
        out = tmp_path / "png"
        res = subprocess.run(
            [sys.executable, str(SCRIPT), "--csv-dir", str(csv_dir), "--out-dir", str(out)],
            capture_output=True, text=True,
        )
        assert res.returncode == 0, res.stderr
        assert len(list(out.glob("*.png"))) == 5

    def test_script_missing_file_exit_code(self, csv_dir, tmp_path):
        (csv_dir / "plugin_panels.csv").unlink()
        res = subprocess.run(
            [sys.executable, str(SCRIPT), "--csv-dir", str(csv_dir),
             "--out-dir", str(tmp_path / "png")],
            capture_output=True, text=True,
        )
        assert res.returncode == 1
        assert "plugin_panels.csv" in res.stderr


class TestPlottedSeriesMatchColumns:
    def test_regret_figure_checksum(self, csv_dir):
        t = read_table(csv_dir / "fig2.csv")
        fig = build_figure(FIGURES[1], csv_dir)
        lines = fig.axes[0].get_lines()
        for line, col in zip(lines, ("d_linear", "d_rt", "d_threshold0", "d_coinflip")):
            assert list(line.get_xdata()) == t["gamma"]
            assert list(line.get_ydata()) == t[col]
        fig_mod.plt.close(fig)

    def test_rules_figure_checksum(self, csv_dir):
        a = read_table(csv_dir / "fig1a.csv")
        b = read_table(csv_dir / "fig1b.csv")
        fig = build_figure(FIGURES[0], csv_dir)
        panel_a, panel_b = fig.axes
        for line, col in zip(panel_a.get_lines(), ("d_linear", "d_rt")):
            assert list(line.get_ydata()) == a[col]
        assert list(panel_b.get_lines()[0].get_ydata()) == b["difference"]
        fig_mod.plt.close(fig)

    def test_breakdown_figure_checksum(self, csv_dir):
        t = read_table(csv_dir / "fig3.csv")
        fig = build_figure(FIGURES[2], csv_dir)
        for line, col in zip(fig.axes[0].get_lines(), ("k_bar", "k_tilde")):
            assert list(line.get_xdata()) == t["beta_hat"]
            assert list(line.get_ydata()) == t[col]
        fig_mod.plt.close(fig)

    def test_cost_figure_checksum(self, csv_dir):
        t = read_table(csv_dir / "cost_panels.csv")
        fig = build_figure(FIGURES[3], csv_dir)
        kinds = ("constant", "linear", "quadratic")
        scales = (1.0, 5.0)
        axes = [ax for ax in fig.axes]
        for i, kind in enumerate(kinds):
            for j, scale in enumerate(scales):
                ax = axes[i * len(scales) + j]
                idx = [m for m in range(len(t["gamma"]))
                       if t["cost_kind"][m] == kind and t["cost_scale"][m] == scale]
                for line, col in zip(ax.get_lines(), ("d_threshold0", "d_rt", "d_linear")):
                    assert list(line.get_ydata()) == [t[col][m] for m in idx]
        fig_mod.plt.close(fig)

    def test_plugin_figure_checksum(self, csv_dir):
        t = read_table(csv_dir / "plugin_panels.csv")
        fig = build_figure(FIGURES[4], csv_dir)
        for j, x2 in enumerate((7.9, 12.0)):
            idx = [m for m in range(len(t["gamma"])) if t["x2"][m] == x2]
            lines = fig.axes[j].get_lines()
            for line, col in zip(lines, ("regret_plugin", "regret_linear")):
                assert list(line.get_ydata()) == [t[col][m] for m in idx]
        fig_mod.plt.close(fig)
