"""Command-line interface.

Subcommands: solve, figures, breakdown, late, regret-curve. Each takes a
JSON config (studies carry vectors, so flags alone will not do); --out and
--seed override the config's scalar fields. Exit codes: 2 for invalid
configs, 3 for solver failures.

CSV contract: one-line header, comma separation, '.' decimal separator,
9 significant digits. Outputs are byte-identical across runs for the same
config and seed, including the quasi-Monte-Carlo stream. MMRKIT_THREADS
caps per-curve parallelism.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import breakdown as _breakdown
from . import late as _late
from . import mmr as _mmr
from . import regret as _regret
from .errors import InvalidConfig, MmrkitError
from .identified_set import StudySet
from .rules import (
    CoinFlip,
    Linear,
    RtSmooth,
    Threshold,
    evaluate,
    rule_from_json,
    rule_to_json,
    study_from_json,
)

_DEFAULTS = {
    "gamma_grid": {"lo": -30.0, "hi": 30.0, "n": 601},
    "fig1_grid": {"lo": -40.0, "hi": 40.0, "n": 801},
    "fig3": {"sigma": 1.0, "beta_grid": {"lo": 0.1, "hi": 5.0, "n": 50}},
    "cost_grid": {"lo": -30.0, "hi": 30.0, "n": 241},
    "cost_scales": [1.0, 5.0],
    "plugin": {
        "x2": [7.9, 12.0],
        "grid": {"lo": -30.0, "hi": 30.0, "n": 121},
        "points_log2": 13,
        "replicates": 8,
        "inner_grid": 21,
    },
}


def _fmt(x: float) -> str:
    return f"{float(x):.9g}"


def _grid(spec) -> np.ndarray:
    try:
        lo, hi, n = float(spec["lo"]), float(spec["hi"]), int(spec["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidConfig(f"grid spec needs numeric lo/hi/n: {exc}") from exc
    if n < 2 or not lo < hi:
        raise InvalidConfig(f"grid spec needs n >= 2 and lo < hi, got {spec}")
    return np.linspace(lo, hi, n)


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise InvalidConfig("config root must be a JSON object")
    return cfg


def _study(cfg: dict) -> StudySet:
    spec = cfg.get("study")
    if spec is None:
        raise InvalidConfig("config is missing the 'study' object")
    try:
        return study_from_json(spec)
    except (KeyError, TypeError, ValueError, MmrkitError) as exc:
        raise InvalidConfig(f"invalid study: {exc}") from exc


def _out_dir(cfg: dict, args) -> Path:
    out = args.out or cfg.get("output_dir") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _seed(cfg: dict, args) -> int:
    if args.seed is not None:
        return int(args.seed)
    return int(cfg.get("seed", 0))


def _workers() -> int:
    raw = os.environ.get("MMRKIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(
        ",".join(v if isinstance(v, str) else _fmt(v) for v in row) for row in rows
    )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _emit(obj: dict) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


# -- subcommands --------------------------------------------------------------

def cmd_solve(cfg: dict, args) -> None:
    study = _study(cfg)
    sol = _mmr.solve(study)
    report = {
        "regime": sol.regime.value,
        "k": sol.k,
        "regime_cut": _mmr.REGIME_COEF * study.sigma1,
        "rho_star": sol.rho_star,
        "sigma_tilde": sol.sigma_tilde,
        "m0_star": sol.m0_star,
        "weights": list(sol.weights) if sol.weights is not None else None,
        "mmr_value": sol.mmr_value,
        "rules": [rule_to_json(r) for r in sol.rules],
    }
    _emit(report)
    if args.out:
        path = _out_dir(cfg, args) / "solution.json"
        path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _figure_rules(sol: _mmr.MmrSolution):
    if sol.regime is not _mmr.Regime.LARGE_ID:
        raise InvalidConfig("figure replication needs a large-identified-set study")
    linear = Linear(sol.rho_star)
    rt = RtSmooth(sol.sigma_tilde)
    return linear, rt


def cmd_figures(cfg: dict, args) -> None:
    study = _study(cfg)
    out = _out_dir(cfg, args)
    seed = _seed(cfg, args)
    sol = _mmr.solve(study)
    linear, rt = _figure_rules(sol)
    threshold, coin = Threshold(c=0.0), CoinFlip()
    workers = _workers()
    written = []

    # fig1a/fig1b: rule actions and their difference over the index grid
    y_grid = _grid(cfg.get("fig1_grid", _DEFAULTS["fig1_grid"]))
    lin_vals = [evaluate(linear, float(y)) for y in y_grid]
    rt_vals = [evaluate(rt, float(y)) for y in y_grid]
    _write_csv(out / "fig1a.csv", "y1,d_linear,d_rt", zip(y_grid, lin_vals, rt_vals))
    _write_csv(
        out / "fig1b.csv",
        "y1,difference",
        zip(y_grid, (a - b for a, b in zip(lin_vals, rt_vals))),
    )
    written += ["fig1a.csv", "fig1b.csv"]

    # fig2: four-rule profiled regret curves
    g_grid = _grid(cfg.get("gamma_grid", _DEFAULTS["gamma_grid"]))
    curves = _regret.regret_curve([linear, rt, threshold, coin], study, g_grid, workers=workers)
    _write_csv(
        out / "fig2.csv",
        "gamma,d_linear,d_rt,d_threshold0,d_coinflip",
        zip(g_grid, *(c.regret for c in curves)),
    )
    written.append("fig2.csv")

    # fig3: breakdown curves
    f3 = cfg.get("fig3", _DEFAULTS["fig3"])
    rows = _breakdown.breakdown_curve(float(f3.get("sigma", 1.0)), _grid(f3["beta_grid"]))
    _write_csv(out / "fig3.csv", "beta_hat,k_tilde,k_bar", rows)
    written.append("fig3.csv")

    # cost panels: three cost families x two scales, three rules each
    c_grid = _grid(cfg.get("cost_grid", _DEFAULTS["cost_grid"]))
    scales = [float(c) for c in cfg.get("cost_scales", _DEFAULTS["cost_scales"])]
    kinds = [("constant", _regret.ConstantCost), ("linear", _regret.LinearCost),
             ("quadratic", _regret.QuadraticCost)]
    cost_rows = []
    for kind_name, kind in kinds:
        for scale in scales:
            cost = kind(scale)
            curves = _regret.regret_curve(
                [threshold, rt, linear], study, c_grid, cost=cost, workers=workers
            )
            for i, g in enumerate(c_grid):
                cost_rows.append(
                    (g, kind_name, scale,
                     curves[0].regret[i], curves[1].regret[i], curves[2].regret[i])
                )
    _write_csv(
        out / "cost_panels.csv",
        "gamma,cost_kind,cost_scale,d_threshold0,d_rt,d_linear",
        cost_rows,
    )
    written.append("cost_panels.csv")

    # plug-in panels: Monte Carlo curves for variants of the second signal
    pl = {**_DEFAULTS["plugin"], **cfg.get("plugin", {})}
    p_grid = _grid(pl["grid"])
    qmc_cfg = _regret.QmcConfig(
        seed=seed, points_log2=int(pl["points_log2"]), replicates=int(pl["replicates"])
    )
    plug_rows = []
    base = cfg["study"]
    for x2 in pl["x2"]:
        variant = study_from_json({**base, "x": [base["x"][0], x2], "sigma": base["sigma"]})
        vsol = _mmr.solve(variant)
        vlin = Linear(vsol.rho_star)
        curve, ses = _regret.plugin_regret_curve(
            variant, p_grid, qmc_cfg, inner_grid=int(pl["inner_grid"])
        )
        lin_curve = _regret.regret_curve([vlin], variant, p_grid)[0]
        for i, g in enumerate(p_grid):
            plug_rows.append((x2, g, curve.regret[i], lin_curve.regret[i], ses[i], seed))
    _write_csv(
        out / "plugin_panels.csv",
        "x2,gamma,regret_plugin,regret_linear,mc_se,seed",
        plug_rows,
    )
    written.append("plugin_panels.csv")

    _emit({"written": written, "out_dir": str(out), "seed": seed})


def cmd_breakdown(cfg: dict, args) -> None:
    spec = cfg.get("breakdown", cfg.get("fig3", _DEFAULTS["fig3"]))
    sigma = float(spec.get("sigma", 1.0))
    rows = _breakdown.breakdown_curve(sigma, _grid(spec["beta_grid"]))
    out = _out_dir(cfg, args)
    _write_csv(out / "breakdown.csv", "beta_hat,k_tilde,k_bar", rows)
    _emit({"written": ["breakdown.csv"], "out_dir": str(out), "rows": len(rows), "sigma": sigma})


def cmd_late(cfg: dict, args) -> None:
    spec = cfg.get("late")
    if spec is None:
        raise InvalidConfig("config is missing the 'late' object")
    try:
        inputs = _late.LateInputs(
            alpha=float(spec["alpha"]), mu1=float(spec["mu1"]), mu2=float(spec["mu2"])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidConfig(f"invalid late inputs: {exc}") from exc
    bounds = _late.late_bounds(inputs)
    report = {
        "alpha": inputs.alpha,
        "mu1": inputs.mu1,
        "mu2": inputs.mu2,
        "lower": bounds.lower,
        "upper": bounds.upper,
        "nontrivial": _late.late_nontrivial(inputs),
    }
    _emit(report)
    if args.out:
        path = _out_dir(cfg, args) / "late.json"
        path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_regret_curve(cfg: dict, args) -> None:
    study = _study(cfg)
    rule_specs = cfg.get("rules")
    if not rule_specs:
        raise InvalidConfig("config needs a nonempty 'rules' array")
    try:
        rules = [rule_from_json(r, study) for r in rule_specs]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidConfig(f"invalid rule: {exc}") from exc

    cost = None
    cost_spec = cfg.get("cost")
    if cost_spec is not None:
        kinds = {"constant": _regret.ConstantCost, "linear": _regret.LinearCost,
                 "quadratic": _regret.QuadraticCost}
        try:
            cost = kinds[cost_spec["kind"]](float(cost_spec["c"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConfig(f"invalid cost spec: {exc}") from exc

    grid = _grid(cfg.get("gamma_grid", _DEFAULTS["gamma_grid"]))
    curves = _regret.regret_curve(rules, study, grid, cost=cost, workers=_workers())
    labels = []
    for c in curves:
        label, i = c.rule_label, 2
        while label in labels:
            label, i = f"{c.rule_label}_{i}", i + 1
        labels.append(label)
    out = _out_dir(cfg, args)
    _write_csv(
        out / "regret_curve.csv",
        "gamma," + ",".join(labels),
        zip(grid, *(c.regret for c in curves)),
    )
    _emit({"written": ["regret_curve.csv"], "out_dir": str(out), "rules": labels})


_COMMANDS = {
    "solve": cmd_solve,
    "figures": cmd_figures,
    "breakdown": cmd_breakdown,
    "late": cmd_late,
    "regret-curve": cmd_regret_curve,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mmrkit",
        description="Minimax-regret treatment choice under partial identification",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a JSON config")
        p.add_argument("--out", default=None, help="output directory for files")
        p.add_argument("--seed", type=int, default=None, help="seed for Monte Carlo streams")

    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        _COMMANDS[args.command](cfg, args)
    except InvalidConfig as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MmrkitError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
