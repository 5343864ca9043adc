"""Monte Carlo coverage harness.

Each replication generates fresh data, builds a band, and evaluates the
band event plus the simultaneous containment events for upper/lower
excursion sets and interval sets over configured level grids. Counts
are aggregated into a CoverageReport whose JSON form is byte-identical
across reruns and thread counts: every replication draws from its own
RNG streams and the reduction is a commutative integer sum.

The logical chain is checked replication by replication, not just in
aggregate: the band event must equal containment over the breakpoint
level set, and whenever the band event holds every finite-level
containment event must hold too. A violation raises immediately since
it can only be a bug, never randomness.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .bootstrap import BootstrapConfig, multiplier_scb, regression_scb
from .datagen import (
    GenSpec,
    gen_coefficients,
    gen_dense_1d,
    gen_dense_2d,
    gen_regression,
)
from .domain import Band, Field
from .errors import NumericError, ValidationError
from .inversion import (
    breakpoint_levels,
    containment_event_interval_grid,
    containment_event_lower,
    containment_event_upper,
    sci_event,
)
from .regression import logistic_fit, ols_fit, pairwise_prediction_correlations

__all__ = [
    "ExperimentConfig",
    "CoverageReport",
    "mc_stderr",
    "run_coverage",
    "run_levels_sweep",
    "run_grid_proximity_study",
    "correlation_density",
]

_EVENTS = ("sci", "upper", "lower", "interval")
_BOOT_TAG = 0xB007
_GRID_TAG = 0x6752


@dataclass(frozen=True)
class ExperimentConfig:
    """Config for one coverage experiment."""

    gen: GenSpec
    boot: BootstrapConfig
    n_reps: int
    levels: int = 1000
    level_policy: str = "equidistant"
    explicit_levels: tuple[float, ...] = ()
    interval_step: float = 0.005
    levels_sweep: tuple[int, ...] = ()
    grid_points_sweep: tuple[int, ...] = ()
    threads: int = 1
    max_failed_frac: float = 0.01

    def __post_init__(self):
        if self.n_reps < 1:
            raise ValidationError("n_reps must be positive")
        if self.level_policy not in ("equidistant", "explicit", "breakpoints"):
            raise ValidationError(f"unknown level policy {self.level_policy!r}")
        if self.level_policy == "equidistant" and self.levels < 1:
            raise ValidationError("levels must be positive")
        if self.level_policy == "explicit" and not self.explicit_levels:
            raise ValidationError("explicit level policy needs explicit_levels")
        if self.interval_step <= 0.0:
            raise ValidationError("interval_step must be positive")
        if self.threads < 1:
            raise ValidationError("threads must be positive")
        if not (0.0 <= self.max_failed_frac < 1.0):
            raise ValidationError("max_failed_frac must be in [0, 1)")
        object.__setattr__(self, "explicit_levels",
                           tuple(float(v) for v in self.explicit_levels))
        object.__setattr__(self, "levels_sweep",
                           tuple(int(v) for v in self.levels_sweep))
        object.__setattr__(self, "grid_points_sweep",
                           tuple(int(v) for v in self.grid_points_sweep))


@dataclass
class CoverageReport:
    """Aggregated coverage counts; see to_dict for the JSON layout."""

    kind: str
    config: dict
    n_reps: int
    n_failed: int
    n_effective: int
    failure_counts: dict
    metrics: dict
    levels_sweep: list = field(default_factory=list)
    grid_study: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "config": self.config,
            "n_reps": self.n_reps,
            "n_failed": self.n_failed,
            "n_effective": self.n_effective,
            "failure_counts": self.failure_counts,
            "metrics": self.metrics,
        }
        if self.levels_sweep:
            out["levels_sweep"] = self.levels_sweep
        if self.grid_study:
            out["grid_study"] = self.grid_study
        return out


def mc_stderr(p: float, n: int) -> float:
    """Binomial Monte Carlo standard error sqrt(p(1-p)/n)."""
    if n <= 0:
        return float("nan")
    return math.sqrt(p * (1.0 - p) / n)


def _derive_seed(*parts: int) -> int:
    ss = np.random.SeedSequence(tuple(int(p) & 0xFFFFFFFFFFFFFFFF for p in parts))
    return int(ss.generate_state(1, np.uint64)[0])


def _build_band(gen: GenSpec, boot: BootstrapConfig, rep: int):
    """One replication's band and truth field."""
    if gen.scenario == "dense1d":
        samples, truth = gen_dense_1d(gen, rep)
        band, _ = multiplier_scb(samples, boot, truth.domain)
    elif gen.scenario == "dense2d":
        samples, truth = gen_dense_2d(gen, rep)
        band, _ = multiplier_scb(samples, boot, truth.domain)
    elif gen.scenario in ("regression_linear", "regression_logistic"):
        X, y, xt, truth = gen_regression(gen, rep)
        model = "linear" if gen.scenario == "regression_linear" else "logistic"
        band, _ = regression_scb(X, y, boot, xt, model, "mean_prediction",
                                 truth.domain)
    elif gen.scenario == "coefficients":
        X, y, truth = gen_coefficients(gen, rep)
        band, _ = regression_scb(X, y, boot, model="linear",
                                 functional="coefficients", domain=truth.domain)
    else:  # pragma: no cover - GenSpec already validates
        raise ValidationError(f"unknown scenario {gen.scenario!r}")
    return band, truth


def _equidistant_levels(truth: np.ndarray, k: int) -> np.ndarray:
    return np.unique(np.linspace(truth.min(), truth.max(), k))


def _interval_values(truth: np.ndarray, step: float) -> np.ndarray:
    lo = float(truth.min())
    hi = float(truth.max())
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def _rep_levels(cfg: ExperimentConfig, band: Band, truth: Field) -> np.ndarray:
    if cfg.level_policy == "equidistant":
        return _equidistant_levels(truth.values, cfg.levels)
    if cfg.level_policy == "explicit":
        return np.asarray(cfg.explicit_levels)
    return breakpoint_levels(band, truth)


def _rep_outcome(cfg: ExperimentConfig, rep: int) -> dict:
    boot = replace(cfg.boot, seed=_derive_seed(cfg.boot.seed, _BOOT_TAG, rep))
    try:
        band, truth = _build_band(cfg.gen, boot, rep)
    except NumericError as err:
        return {"failed": type(err).__name__}

    sci = sci_event(band, truth)
    over_breakpoints = containment_event_upper(
        band, truth, breakpoint_levels(band, truth))
    if over_breakpoints != sci:
        raise RuntimeError(
            "internal inconsistency: breakpoint containment disagrees with "
            f"the band event in replication {rep}")

    levels = _rep_levels(cfg, band, truth)
    events = {
        "sci": sci,
        "upper": containment_event_upper(band, truth, levels),
        "lower": containment_event_lower(band, truth, levels),
        "interval": containment_event_interval_grid(
            band, truth, _interval_values(truth.values, cfg.interval_step)),
    }
    sweep = {}
    for k in cfg.levels_sweep:
        sweep[k] = containment_event_upper(
            band, truth, _equidistant_levels(truth.values, k))
    if sci and not (all(events.values()) and all(sweep.values())):
        raise RuntimeError(
            "internal inconsistency: band event held but a finite-level "
            f"containment event failed in replication {rep}")
    return {"events": events, "sweep": sweep}


def _star(args):
    return _rep_outcome(*args)


def _run_reps(cfg: ExperimentConfig) -> list[dict]:
    if cfg.threads == 1:
        return [_rep_outcome(cfg, rep) for rep in range(cfg.n_reps)]
    jobs = [(cfg, rep) for rep in range(cfg.n_reps)]
    chunk = max(1, cfg.n_reps // (cfg.threads * 8))
    with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(_star, jobs, chunksize=chunk))


def _aggregate(cfg: ExperimentConfig, outcomes: list[dict]):
    failures: dict[str, int] = {}
    counts = {name: 0 for name in _EVENTS}
    sweep_counts = {k: 0 for k in cfg.levels_sweep}
    n_eff = 0
    for out in outcomes:
        if "failed" in out:
            failures[out["failed"]] = failures.get(out["failed"], 0) + 1
            continue
        n_eff += 1
        for name in _EVENTS:
            counts[name] += bool(out["events"][name])
        for k in cfg.levels_sweep:
            sweep_counts[k] += bool(out["sweep"][k])
    n_failed = len(outcomes) - n_eff
    if n_failed > cfg.max_failed_frac * len(outcomes):
        raise NumericError(
            f"{n_failed} of {len(outcomes)} replications failed, above the "
            f"{cfg.max_failed_frac:.1%} budget: {failures}")
    metrics = {}
    for name in _EVENTS:
        cov = counts[name] / n_eff if n_eff else float("nan")
        metrics[name] = {
            "events": counts[name],
            "coverage": cov,
            "stderr": mc_stderr(cov, n_eff),
        }
    sweep_rows = []
    for k in cfg.levels_sweep:
        cov = sweep_counts[k] / n_eff if n_eff else float("nan")
        sweep_rows.append({
            "levels": k,
            "events": sweep_counts[k],
            "coverage": cov,
            "stderr": mc_stderr(cov, n_eff),
        })
    return metrics, sweep_rows, failures, n_failed, n_eff


def run_coverage(cfg: ExperimentConfig) -> CoverageReport:
    """Coverage of the band event and the three containment events."""
    outcomes = _run_reps(cfg)
    metrics, sweep_rows, failures, n_failed, n_eff = _aggregate(cfg, outcomes)
    return CoverageReport(
        kind="coverage",
        config=asdict(cfg),
        n_reps=cfg.n_reps,
        n_failed=n_failed,
        n_effective=n_eff,
        failure_counts=failures,
        metrics=metrics,
        levels_sweep=sweep_rows,
    )


def run_levels_sweep(cfg: ExperimentConfig) -> CoverageReport:
    """Coverage against level-set size; requires a non-empty levels_sweep."""
    if not cfg.levels_sweep:
        raise ValidationError("levels_sweep must not be empty")
    report = run_coverage(cfg)
    report.kind = "levels_sweep"
    return report


def run_grid_proximity_study(cfg: ExperimentConfig) -> CoverageReport:
    """Coverage across evaluation-grid sizes at a fixed grid step.

    Each grid size runs its own replication block with seeds derived
    from (seed, grid size), so blocks are independent.
    """
    if not cfg.grid_points_sweep:
        raise ValidationError("grid_points_sweep must not be empty")
    if cfg.gen.scenario not in ("regression_linear", "regression_logistic"):
        raise ValidationError("grid proximity study needs a regression scenario")
    step = cfg.gen.grid_step if cfg.gen.grid_step is not None else 0.02
    rows = []
    total_failed = 0
    for k in cfg.grid_points_sweep:
        sub = replace(
            cfg,
            gen=replace(cfg.gen, grid_points=k, grid_step=step,
                        seed=_derive_seed(cfg.gen.seed, _GRID_TAG, k)),
            boot=replace(cfg.boot, seed=_derive_seed(cfg.boot.seed, _GRID_TAG, k)),
            grid_points_sweep=(),
        )
        outcomes = _run_reps(sub)
        metrics, sweep_rows, failures, n_failed, n_eff = _aggregate(sub, outcomes)
        total_failed += n_failed
        rows.append({
            "grid_points": k,
            "n_reps": sub.n_reps,
            "n_failed": n_failed,
            "n_effective": n_eff,
            "failure_counts": failures,
            "metrics": metrics,
            "levels_sweep": sweep_rows,
        })
    return CoverageReport(
        kind="grid_proximity",
        config=asdict(cfg),
        n_reps=cfg.n_reps * len(cfg.grid_points_sweep),
        n_failed=total_failed,
        n_effective=cfg.n_reps * len(cfg.grid_points_sweep) - total_failed,
        failure_counts={},
        metrics={},
        grid_study=rows,
    )


def correlation_density(cfg: ExperimentConfig, rep: int = 0) -> dict:
    """Pairwise estimator correlations for one fitted replication.

    Coefficient scenario: correlations between coefficient estimates.
    Regression scenarios: correlations between grid predictions.
    """
    gen = cfg.gen
    if gen.scenario == "coefficients":
        X, y, truth = gen_coefficients(gen, rep)
        fit = ols_fit(X, y)
        cors = pairwise_prediction_correlations(fit, np.eye(len(truth.values)))
    elif gen.scenario in ("regression_linear", "regression_logistic"):
        X, y, xt, truth = gen_regression(gen, rep)
        fit = ols_fit(X, y) if gen.scenario == "regression_linear" else logistic_fit(X, y)
        cors = pairwise_prediction_correlations(fit, xt, seed=cfg.boot.seed)
    else:
        raise ValidationError(
            "correlation density is defined for the regression and "
            "coefficient scenarios")
    abs_cors = np.abs(cors)
    hist, edges = np.histogram(abs_cors, bins=20, range=(0.0, 1.0))
    return {
        "scenario": gen.scenario,
        "n_pairs": int(cors.size),
        "mean": float(np.mean(cors)),
        "median": float(np.median(cors)),
        "mean_abs": float(np.mean(abs_cors)),
        "median_abs": float(np.median(abs_cors)),
        "quantiles_abs": {
            "q05": float(np.quantile(abs_cors, 0.05)),
            "q25": float(np.quantile(abs_cors, 0.25)),
            "q75": float(np.quantile(abs_cors, 0.75)),
            "q95": float(np.quantile(abs_cors, 0.95)),
        },
        "hist_abs": {
            "edges": [float(v) for v in edges],
            "counts": [int(v) for v in hist],
        },
    }
