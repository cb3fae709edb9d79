"""Figure builders for the CSV tables emitted by `mmrkit figures`.

Rendering never recomputes any mathematics: every plotted series is a
column read verbatim from a CSV file, and the tests check the plotted
line data against those columns. Series styles follow the conventions
used throughout: the linear ramp is blue/solid, the smooth rule is
red/dotted, the hard threshold black/solid, and the coin flip
green/dashed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

#: column -> (color, linestyle)
STYLES = {
    "d_linear": ("tab:blue", "solid"),
    "d_rt": ("tab:red", "dotted"),
    "d_threshold0": ("black", "solid"),
    "d_coinflip": ("tab:green", "dashed"),
    "regret_plugin": ("tab:purple", "solid"),
    "regret_linear": ("tab:blue", "solid"),
    "k_bar": ("black", "solid"),
    "k_tilde": ("black", "dashed"),
    "difference": ("tab:purple", "solid"),
}

LABELS = {
    "d_linear": "linear ramp",
    "d_rt": "smooth rule",
    "d_threshold0": "threshold",
    "d_coinflip": "coin flip",
    "regret_plugin": "plug-in rule",
    "regret_linear": "linear ramp",
    "k_bar": "decision breakdown",
    "k_tilde": "naive breakdown",
    "difference": "ramp minus smooth",
}


class RenderError(RuntimeError):
    """Raised when an input table is missing or empty."""


@dataclass(frozen=True)
class FigureSpec:
    """One output figure: its input tables, target file, and axis labels."""

    name: str
    csv_names: tuple[str, ...]
    output_name: str
    xlabel: str
    ylabel: str


FIGURES = (
    FigureSpec("rules", ("fig1a.csv", "fig1b.csv"), "fig1.png",
               "nearest signal", "assigned share"),
    FigureSpec("regret", ("fig2.csv",), "fig2.png",
               "nearest signal mean", "profiled regret"),
    FigureSpec("breakdown", ("fig3.csv",), "fig3.png",
               "estimated effect", "breakdown point"),
    FigureSpec("cost", ("cost_panels.csv",), "cost_panels.png",
               "nearest signal mean", "net-of-cost profiled regret"),
    FigureSpec("plugin", ("plugin_panels.csv",), "plugin_panels.png",
               "nearest signal mean", "profiled regret"),
)


def read_table(path: Path) -> dict[str, list]:
    """Columns of a CSV file; raises RenderError on missing/empty input."""
    if not path.is_file():
        raise RenderError(f"missing input file: {path.name}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise RenderError(f"no data rows in {path.name}") from None
        rows = list(reader)
    if not rows:
        raise RenderError(f"no data rows in {path.name}")
    cols: dict[str, list] = {name: [] for name in header}
    for row in rows:
        for name, cell in zip(header, row):
            try:
                cols[name].append(float(cell))
            except ValueError:
                cols[name].append(cell)
    return cols


def _line(ax, x, y, column: str) -> None:
    color, style = STYLES.get(column, ("tab:gray", "solid"))
    ax.plot(x, y, color=color, linestyle=style, label=LABELS.get(column, column))


def build_rules_figure(tables) -> plt.Figure:
    fig, (ax_a, ax_b) = plt.subplots(1, 2, figsize=(10, 4))
    a, b = tables
    for col in ("d_linear", "d_rt"):
        _line(ax_a, a["y1"], a[col], col)
    _line(ax_b, b["y1"], b["difference"], "difference")
    ax_a.legend()
    return fig


def build_regret_figure(tables) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(7, 5))
    (t,) = tables
    for col in ("d_linear", "d_rt", "d_threshold0", "d_coinflip"):
        _line(ax, t["gamma"], t[col], col)
    ax.legend()
    return fig


def build_breakdown_figure(tables) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(6, 5))
    (t,) = tables
    for col in ("k_bar", "k_tilde"):
        _line(ax, t["beta_hat"], t[col], col)
    ax.legend()
    return fig


def build_cost_figure(tables) -> plt.Figure:
    (t,) = tables
    kinds, scales = [], []
    for kind in t["cost_kind"]:
        if kind not in kinds:
            kinds.append(kind)
    for scale in t["cost_scale"]:
        if scale not in scales:
            scales.append(scale)
    fig, axes = plt.subplots(len(kinds), len(scales),
                             figsize=(5 * len(scales), 3.5 * len(kinds)),
                             squeeze=False)
    for i, kind in enumerate(kinds):
        for j, scale in enumerate(scales):
            ax = axes[i][j]
            idx = [m for m in range(len(t["gamma"]))
                   if t["cost_kind"][m] == kind and t["cost_scale"][m] == scale]
            x = [t["gamma"][m] for m in idx]
            for col in ("d_threshold0", "d_rt", "d_linear"):
                _line(ax, x, [t[col][m] for m in idx], col)
            ax.set_title(f"{kind} cost, c={scale:g}")
    axes[0][0].legend()
    return fig


def build_plugin_figure(tables) -> plt.Figure:
    (t,) = tables
    panels = []
    for x2 in t["x2"]:
        if x2 not in panels:
            panels.append(x2)
    fig, axes = plt.subplots(1, len(panels), figsize=(5 * len(panels), 4),
                             squeeze=False)
    for j, x2 in enumerate(panels):
        ax = axes[0][j]
        idx = [m for m in range(len(t["gamma"])) if t["x2"][m] == x2]
        x = [t["gamma"][m] for m in idx]
        for col in ("regret_plugin", "regret_linear"):
            _line(ax, x, [t[col][m] for m in idx], col)
        ax.set_title(f"second unit at x2={x2:g}")
    axes[0][0].legend()
    return fig


_BUILDERS = {
    "rules": build_rules_figure,
    "regret": build_regret_figure,
    "breakdown": build_breakdown_figure,
    "cost": build_cost_figure,
    "plugin": build_plugin_figure,
}


def build_figure(spec: FigureSpec, csv_dir: Path) -> plt.Figure:
    tables = [read_table(Path(csv_dir) / name) for name in spec.csv_names]
    fig = _BUILDERS[spec.name](tables)
    for ax in fig.axes:
        ax.set_xlabel(spec.xlabel)
        ax.set_ylabel(spec.ylabel)
    return fig


def render_all(csv_dir, out_dir) -> list[Path]:
    """Render every figure; returns the written PNG paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for spec in FIGURES:
        fig = build_figure(spec, Path(csv_dir))
        target = out / spec.output_name
        fig.savefig(target, dpi=150)
        plt.close(fig)
        written.append(target)
    return written
