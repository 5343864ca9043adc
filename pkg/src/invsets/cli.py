"""Command line interface.

Subcommands
-----------
gen       write synthetic data for one scenario
scb       simultaneous confidence band from samples or training data
cs        invert a band CSV into inner/outer confidence sets
simulate  Monte Carlo coverage experiment from a config file
corr      pairwise estimator correlation summary from a config file
configs   list the bundled experiment configs

Every run writes its outputs plus a manifest.json into --out. All files
except the manifest are byte-identical across reruns with the same
inputs; timestamps and wall time live only in the manifest.

Exit codes: 0 success, 2 usage error, 3 invalid data or config,
4 numerical failure, 5 unexpected internal error.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import asdict
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.special import expit

from . import __version__
from .bootstrap import BootstrapConfig, multiplier_scb, regression_scb
from .datagen import (GenSpec, gen_coefficients, gen_dense_1d, gen_dense_2d,
                      gen_regression)
from .domain import Band, Field, IndexSet, threshold_set
from .errors import (EXIT_DATA, EXIT_INTERNAL, EXIT_NUMERIC, EXIT_OK,
                     EXIT_USAGE, InvsetsError, NumericError, ValidationError)
from .fileio import (load_config, read_band_csv, read_design_csv,
                     read_field_csv, read_samples_csv, write_band_csv,
                     write_design_csv, write_field_csv, write_indexset_csv,
                     write_json, write_manifest, write_maxstat_csv,
                     write_samples_csv)
from .inversion import interval_cs, lower_excursion_cs, upper_excursion_cs
from .regression import logistic_fit, ols_fit, predict_with_sd
from .simharness import (ExperimentConfig, correlation_density, run_coverage,
                         run_grid_proximity_study, run_levels_sweep)

__all__ = ["build_parser", "main", "run"]


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


class _Manifest:
    """Collects inputs/outputs and writes manifest.json on close."""

    def __init__(self, out: Path, command: str, params: dict):
        self.out = out
        self.command = command
        self.params = params
        self.inputs: list[Path] = []
        self.outputs: list[Path] = []
        self.started = _utcnow()
        self.t0 = time.perf_counter()

    def add_input(self, path) -> Path:
        self.inputs.append(Path(path))
        return Path(path)

    def add_output(self, name: str) -> Path:
        path = self.out / name
        self.outputs.append(path)
        return path

    def close(self) -> None:
        write_manifest(self.out, self.command, self.params, self.inputs,
                       self.outputs, self.started, _utcnow(),
                       round(time.perf_counter() - self.t0, 3))


# ---------------------------------------------------------------- gen

def _cmd_gen(args) -> int:
    out = _out_dir(args)
    knobs = {}
    for name in ("noise_var", "m_coef", "rho", "grid_points", "grid_step"):
        val = getattr(args, name)
        if val is not None:
            knobs[name] = val
    spec = GenSpec(scenario=args.scenario, n=args.n, seed=args.seed, **knobs)
    man = _Manifest(out, "gen", {**asdict(spec), "rep": args.rep})

    if spec.scenario in ("dense1d", "dense2d"):
        gen = gen_dense_1d if spec.scenario == "dense1d" else gen_dense_2d
        samples, truth = gen(spec, args.rep)
        write_samples_csv(man.add_output("samples.csv"), samples, truth.domain)
        write_field_csv(man.add_output("truth.csv"), truth)
    elif spec.scenario in ("regression_linear", "regression_logistic"):
        X, y, xt, truth = gen_regression(spec, args.rep)
        write_design_csv(man.add_output("train.csv"), X, y)
        write_design_csv(man.add_output("grid.csv"), xt)
        write_field_csv(man.add_output("truth.csv"), truth)
    else:
        X, y, truth = gen_coefficients(spec, args.rep)
        write_design_csv(man.add_output("train.csv"), X, y)
        write_field_csv(man.add_output("truth.csv"), truth)
    man.close()
    return EXIT_OK


# ---------------------------------------------------------------- scb

def _band_meta(band: Band, dist, model: str, functional: str) -> dict:
    return {
        "alpha": band.alpha,
        "quantile": dist.quantile,
        "n_boot": int(dist.values.size),
        "model": model,
        "functional": functional,
    }


def _cmd_scb(args) -> int:
    out = _out_dir(args)
    boot = BootstrapConfig(n_boot=args.n_boot, alpha=args.alpha,
                           seed=args.seed, multiplier=args.multiplier)
    params = {"alpha": args.alpha, "n_boot": args.n_boot, "seed": args.seed,
              "multiplier": args.multiplier}

    if args.samples is not None:
        if args.domain is None:
            raise ValidationError("--samples requires --domain (a field CSV "
                                  "defining the evaluation points)")
        if args.train is not None:
            raise ValidationError("pass either --samples or --train, not both")
        man = _Manifest(out, "scb", {**params, "route": "functional_mean"})
        domain = read_field_csv(man.add_input(args.domain)).domain
        samples = read_samples_csv(man.add_input(args.samples))
        band, dist = multiplier_scb(samples, boot, domain)
        n = samples.shape[0]
        estimate = samples.mean(axis=0)
        sd = samples.std(axis=0, ddof=1) / np.sqrt(n)
        meta = _band_meta(band, dist, "functional_mean", "mean")
    elif args.train is not None:
        man = _Manifest(out, "scb", {
            **params, "route": "regression", "model": args.model,
            "functional": args.functional, "response": args.response})
        X, y = read_design_csv(man.add_input(args.train), response=args.response)
        if y is None:
            raise ValidationError("training CSV must include the response column")
        xt = None
        domain = None
        if args.functional == "mean_prediction":
            if args.grid is None:
                raise ValidationError("mean_prediction requires --grid")
            xt, _ = read_design_csv(man.add_input(args.grid))
            if args.domain is not None:
                domain = read_field_csv(man.add_input(args.domain)).domain
        band, dist = regression_scb(X, y, boot, xt, args.model,
                                    args.functional, domain)
        fit = ols_fit(X, y) if args.model == "linear" else logistic_fit(X, y)
        pred = predict_with_sd(fit, xt, args.functional, band.domain)
        estimate, sd = pred.mean, pred.sd
        meta = _band_meta(band, dist, args.model, args.functional)
        if args.model == "logistic" and args.functional == "mean_prediction":
            # band and estimate on the response scale, sd stays on the
            # linear-predictor scale where the band was formed
            estimate = expit(estimate)
            meta["sd_scale"] = "linear_predictor"
    else:
        raise ValidationError("scb needs --samples (dense route) or --train "
                              "(regression route)")

    write_band_csv(man.add_output("band.csv"), band, estimate, sd)
    write_maxstat_csv(man.add_output("maxstat.csv"), dist.values)
    write_json(man.add_output("band_meta.json"), meta)
    man.close()
    return EXIT_OK


# ----------------------------------------------------------------- cs

def _parse_levels(text: str) -> list[float]:
    try:
        vals = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ValidationError(f"bad --levels value {text!r}") from None
    if not vals:
        raise ValidationError("--levels is empty")
    return vals


def _parse_intervals(text: str) -> list[tuple[float, float]]:
    pairs = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        lo, sep, hi = tok.partition(":")
        if not sep:
            raise ValidationError(f"bad interval {tok!r}, expected lo:hi")
        try:
            pairs.append((float(lo), float(hi)))
        except ValueError:
            raise ValidationError(f"bad interval {tok!r}") from None
    if not pairs:
        raise ValidationError("--intervals is empty")
    return pairs


def _cmd_cs(args) -> int:
    if args.levels is None and args.intervals is None:
        raise ValidationError("cs needs --levels and/or --intervals")
    out = _out_dir(args)
    man = _Manifest(out, "cs", {
        "alpha": args.alpha, "direction": args.direction,
        "levels": args.levels, "intervals": args.intervals})
    band, estimate, _ = read_band_csv(man.add_input(args.band), alpha=args.alpha)
    est_field = Field(band.domain, estimate)

    summary = {"alpha": args.alpha, "domain_size": band.domain.size,
               "levels": [], "intervals": []}
    directions = ["ge", "le"] if args.direction == "both" else [args.direction]
    idx = 0
    if args.levels is not None:
        for level in _parse_levels(args.levels):
            for direction in directions:
                make = (upper_excursion_cs if direction == "ge"
                        else lower_excursion_cs)
                cs = make(band, level)
                plug = threshold_set(est_field, level, direction)
                name = f"cs_{idx:02d}.csv"
                write_indexset_csv(
                    man.add_output(name),
                    {"inner": cs.inner, "estimate_set": plug, "outer": cs.outer},
                    band.domain)
                summary["levels"].append({
                    "file": name, "level": level, "direction": direction,
                    "inner_count": cs.inner.count,
                    "estimate_count": plug.count,
                    "outer_count": cs.outer.count,
                })
                idx += 1
    if args.intervals is not None:
        for lo, hi in _parse_intervals(args.intervals):
            cs = interval_cs(band, lo, hi)
            plug = IndexSet(band.domain, (estimate >= lo) & (estimate <= hi))
            name = f"cs_{idx:02d}.csv"
            write_indexset_csv(
                man.add_output(name),
                {"inner": cs.inner, "estimate_set": plug, "outer": cs.outer},
                band.domain)
            summary["intervals"].append({
                "file": name, "lo": lo, "hi": hi,
                "inner_count": cs.inner.count,
                "estimate_count": plug.count,
                "outer_count": cs.outer.count,
            })
            idx += 1
    write_json(man.add_output("cs_summary.json"), summary)
    man.close()
    return EXIT_OK


# ----------------------------------------------------------- simulate

def _resolve_config(ref: str) -> Path:
    path = Path(ref)
    if path.exists():
        return path
    name = ref if ref.endswith((".toml", ".json")) else ref + ".toml"
    try:
        bundled = resources.files("invsets.configs") / name
        if bundled.is_file():
            return Path(str(bundled))
    except (ModuleNotFoundError, TypeError):
        pass
    raise ValidationError(
        f"config {ref!r} is neither a file nor a bundled config; "
        f"run 'invsets configs' to list bundled names")


def _experiment_from_config(doc: dict, args) -> tuple[ExperimentConfig, str]:
    for key in ("gen", "run"):
        if key in doc and not isinstance(doc[key], dict):
            raise ValidationError(f"config section [{key}] must be a table")
    seed = args.seed if args.seed is not None else doc.get("seed")
    if seed is None:
        raise ValidationError("a seed is required: pass --seed or set "
                              "'seed' in the config")
    seed = int(seed)
    kind = doc.get("kind", "coverage")
    if kind not in ("coverage", "levels_sweep", "grid_proximity"):
        raise ValidationError(f"unknown experiment kind {kind!r}")

    gen_doc = dict(doc.get("gen", {}))
    boot_doc = dict(doc.get("boot", {}))
    run_doc = dict(doc.get("run", {}))
    if "scenario" not in gen_doc or "n" not in gen_doc:
        raise ValidationError("config needs gen.scenario and gen.n")
    gen_doc.setdefault("seed", seed)
    boot_doc.setdefault("seed", seed)
    threads = getattr(args, "threads", None)
    if threads is not None:
        run_doc["threads"] = threads
    try:
        gen = GenSpec(**gen_doc)
        boot = BootstrapConfig(**boot_doc)
        cfg = ExperimentConfig(gen=gen, boot=boot, **run_doc)
    except TypeError as err:
        raise ValidationError(f"bad config field: {err}") from err
    return cfg, kind


def _coverage_rows(metrics: dict, prefix: dict) -> list[dict]:
    rows = []
    for event, cell in metrics.items():
        rows.append({**prefix, "event": event, "events": cell["events"],
                     "coverage": cell["coverage"], "stderr": cell["stderr"]})
    return rows


def _write_rows_csv(path, rows: list[dict]) -> None:
    import csv
    cols = list(rows[0].keys())
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else str(v)
                        for v in (row[c] for c in cols)])


def _plot_sweep(path, rows, alpha: float) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ks = [r["levels"] for r in rows]
    cov = [100.0 * r["coverage"] for r in rows]
    err = [100.0 * r["stderr"] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(ks, cov, yerr=err, marker="o", capsize=3)
    ax.axhline(100.0 * (1.0 - alpha), linestyle="--", linewidth=1.0)
    ax.set_xscale("log")
    ax.set_xlabel("number of levels")
    ax.set_ylabel("coverage (%)")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _cmd_simulate(args) -> int:
    out = _out_dir(args)
    cfg_path = _resolve_config(args.config)
    doc = load_config(cfg_path)
    cfg, kind = _experiment_from_config(doc, args)
    man = _Manifest(out, "simulate", {"config": str(cfg_path), "kind": kind,
                                      "seed": cfg.gen.seed,
                                      "threads": cfg.threads})
    man.add_input(cfg_path)

    if kind == "coverage":
        report = run_coverage(cfg)
    elif kind == "levels_sweep":
        report = run_levels_sweep(cfg)
    else:
        report = run_grid_proximity_study(cfg)

    write_json(man.add_output("report.json"), report.to_dict())
    if report.metrics:
        _write_rows_csv(man.add_output("coverage.csv"),
                        _coverage_rows(report.metrics, {}))
    if report.grid_study:
        rows = []
        for block in report.grid_study:
            rows.extend(_coverage_rows(block["metrics"],
                                       {"grid_points": block["grid_points"]}))
            for srow in block["levels_sweep"]:
                rows.append({"grid_points": block["grid_points"],
                             "event": f"levels_{srow['levels']}",
                             "events": srow["events"],
                             "coverage": srow["coverage"],
                             "stderr": srow["stderr"]})
        _write_rows_csv(man.add_output("coverage.csv"), rows)
    if report.levels_sweep:
        _write_rows_csv(man.add_output("levels_sweep.csv"), report.levels_sweep)
        if args.plot:
            _plot_sweep(man.add_output("coverage_vs_levels.svg"),
                        report.levels_sweep, cfg.boot.alpha)
    man.close()
    return EXIT_OK


# ---------------------------------------------------------------- corr

def _cmd_corr(args) -> int:
    out = _out_dir(args)
    cfg_path = _resolve_config(args.config)
    doc = load_config(cfg_path)
    cfg, _ = _experiment_from_config(doc, args)
    man = _Manifest(out, "corr", {"config": str(cfg_path), "seed": cfg.gen.seed})
    man.add_input(cfg_path)
    summary = correlation_density(cfg, rep=args.rep)
    hist = summary["hist_abs"]
    rows = [{"bin_lo": hist["edges"][i], "bin_hi": hist["edges"][i + 1],
             "count": hist["counts"][i]} for i in range(len(hist["counts"]))]
    write_json(man.add_output("corr.json"), summary)
    _write_rows_csv(man.add_output("corr_hist.csv"), rows)
    man.close()
    return EXIT_OK


def _cmd_configs(args) -> int:
    names = sorted(
        entry.name for entry in resources.files("invsets.configs").iterdir()
        if entry.name.endswith((".toml", ".json")))
    for name in names:
        print(name)
    return EXIT_OK


# --------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invsets",
        description="Simultaneous confidence bands and inverse-set "
                    "confidence sets.")
    parser.add_argument("--version", action="version",
                        version=f"invsets {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate synthetic data")
    p.add_argument("--scenario", required=True,
                   choices=["dense1d", "dense2d", "regression_linear",
                            "regression_logistic", "coefficients"])
    p.add_argument("--n", type=int, required=True, help="sample size")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--rep", type=int, default=0,
                   help="replication index within the seed's stream")
    p.add_argument("--noise-var", dest="noise_var", type=float, default=None)
    p.add_argument("--m-coef", dest="m_coef", type=int, default=None,
                   help="coefficient count for the coefficients scenario")
    p.add_argument("--rho", type=float, default=None,
                   help="AR(1) design correlation for the coefficients scenario")
    p.add_argument("--grid-points", dest="grid_points", type=int, default=None)
    p.add_argument("--grid-step", dest="grid_step", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("scb", help="simultaneous confidence band")
    p.add_argument("--samples", default=None,
                   help="dense route: CSV of sample paths, one row per path")
    p.add_argument("--domain", default=None,
                   help="field CSV whose coordinates define the evaluation "
                        "points (values ignored)")
    p.add_argument("--train", default=None,
                   help="regression route: design CSV with a response column")
    p.add_argument("--response", default="y")
    p.add_argument("--model", choices=["linear", "logistic"], default="linear")
    p.add_argument("--functional", choices=["mean_prediction", "coefficients"],
                   default="mean_prediction")
    p.add_argument("--grid", default=None,
                   help="design CSV of evaluation rows for mean_prediction")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--n-boot", dest="n_boot", type=int, default=1000)
    p.add_argument("--multiplier", choices=["rademacher", "gaussian"],
                   default="rademacher")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_scb)

    p = sub.add_parser("cs", help="invert a band into confidence sets")
    p.add_argument("--band", required=True, help="band CSV from scb")
    p.add_argument("--alpha", type=float, default=0.05,
                   help="level the band was built at (metadata only)")
    p.add_argument("--levels", default=None,
                   help="comma separated excursion levels")
    p.add_argument("--direction", choices=["ge", "le", "both"], default="ge")
    p.add_argument("--intervals", default=None,
                   help="comma separated lo:hi pairs")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cs)

    p = sub.add_parser("simulate", help="Monte Carlo coverage experiment")
    p.add_argument("--config", required=True,
                   help="config file path or bundled config name")
    p.add_argument("--seed", type=int, default=None,
                   help="overrides the config seed")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--plot", action="store_true",
                   help="write an SVG of coverage vs level count")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("corr", help="estimator correlation summary")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--rep", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_corr)

    p = sub.add_parser("configs", help="list bundled configs")
    p.set_defaults(func=_cmd_configs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ValidationError as err:
        print(f"invsets: error: {err}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as err:
        print(f"invsets: numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except InvsetsError as err:  # pragma: no cover - defensive
        print(f"invsets: error: {err}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as err:  # noqa: BLE001 - CLI boundary
        print(f"invsets: internal error: {type(err).__name__}: {err}",
              file=sys.stderr)
        return EXIT_INTERNAL


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
