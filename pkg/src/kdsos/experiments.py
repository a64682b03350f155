"""Preset experiment suites and reporting.

Presets (all knobs overridable so CI can run reduced versions):

* ``figure3``       : bandwidth sweep of the mean Hamming error plus the
                      tuning score on the benchmark scenario.
* ``figure4_gamma`` : tuned estimator vs the singleton (bandwidth 0) and
                      all (bandwidth 1) baselines across switching rates.
* ``figure4_rho``   : the same comparison across network densities.
* ``alignability``  : Monte-Carlo alignability rates in a fast- and a
                      slow-switching two-community regime.
* ``audit``         : decomposition-identity residuals on random instances.

Trial seeds derive from the master seed by fixed stream arithmetic, so any
subset of trials can be reproduced in isolation.
"""
from __future__ import annotations

import inspect
import json
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .aggregation import DebiasedAggregator, KernelSpec
from .audit import decomposition_audit
from .estimator import kd_sos
from .exceptions import ValidationError
from .memberships import (
    DynamicClustering,
    MembershipSequence,
    alignable_sequence,
    community_sizes,
    confusion_matrix,
    hamming_error,
)
from .seeding import derive_rng, derive_seed
from .simulate import (
    ConnectivitySchedule,
    ScenarioConfig,
    benchmark_initial_sizes,
    generate_scenario,
    simulate_memberships_bernoulli,
    stationary_markov_transition,
    uniform_switch_transition,
)
from .tuning import tune_bandwidth

PRESETS = ("figure3", "figure4_gamma", "figure4_rho", "alignability", "audit")

# fixed seed streams per preset: (scenario, fit)
_STREAMS = {
    "figure3": (10, 11),
    "figure4_gamma": (20, 21),
    "figure4_rho": (30, 31),
    "audit": (40, 41),
    "alignability": (50, 51),
}


@dataclass
class ExperimentReport:
    preset: str
    config: dict
    payload: dict
    timing_seconds: float = 0.0


def mean_hamming(labels, truth_labels, n_communities: int) -> float:
    """Relative Hamming error against the truth, averaged over time points."""
    labels = np.asarray(labels)
    truth_labels = np.asarray(truth_labels)
    if labels.shape != truth_labels.shape:
        raise ValidationError("label arrays must share a shape")
    errs = [
        hamming_error(labels[t], truth_labels[t], n_communities)
        for t in range(labels.shape[0])
    ]
    return float(np.mean(errs))


def _benchmark_scenario(n, n_steps, gamma, rho, seed) -> ScenarioConfig:
    return ScenarioConfig(
        n=n,
        n_communities=3,
        n_steps=n_steps,
        gamma=gamma,
        rho=rho,
        process="bernoulli",
        transition=stationary_markov_transition(gamma),
        initial_sizes=benchmark_initial_sizes(n),
        connectivity=ConnectivitySchedule.benchmark(),
        seed=seed,
    )


def _stderr(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / np.sqrt(values.size))


def run_figure3(
    n: int = 500,
    n_steps: int = 50,
    rho: float = 0.3,
    gamma: float = 0.01,
    trials: int = 25,
    grid=None,
    adjustment: float = 2.0,
    n_restarts: int = 20,
    max_iter: int = 100,
    seed: int = 0,
) -> ExperimentReport:
    """Mean Hamming error and tuning score as functions of the bandwidth."""
    start = time.perf_counter()
    K = 3
    T = n_steps
    if grid is None:
        grid = np.arange(1, 16) / T
    grid = np.asarray(grid, dtype=np.float64)
    rs = np.concatenate(([0.0], grid))
    scen_stream, fit_stream = _STREAMS["figure3"]

    hamming = np.empty((trials, rs.size))
    scores = np.empty((trials, grid.size))
    chosen = np.empty(trials)
    for trial in range(trials):
        cfg = _benchmark_scenario(n, T, gamma, rho, derive_seed(seed, scen_stream, trial))
        series, truth = generate_scenario(cfg)
        aggregator = DebiasedAggregator(series)
        fit_seed = derive_seed(seed, fit_stream, trial)
        for ri, r in enumerate(rs):
            clustering = kd_sos(
                series, K, KernelSpec("box", float(r)), fit_seed,
                aggregator=aggregator, n_restarts=n_restarts, max_iter=max_iter,
            )
            hamming[trial, ri] = mean_hamming(clustering.labels, truth.memberships.labels, K)
        table = tune_bandwidth(series, grid, K, adjustment, aggregator=aggregator)
        scores[trial] = table.scores
        chosen[trial] = table.chosen

    mean_h = hamming.mean(axis=0)
    mean_s = scores.mean(axis=0)
    # oracle minimizer over the positive grid; ties to the smaller bandwidth
    pos = mean_h[1:]
    argmin_idx = int(np.flatnonzero(pos == pos.min())[0])
    # modal tuner choice, ties to the smaller bandwidth
    uniq, counts = np.unique(chosen, return_counts=True)
    modal = float(uniq[np.flatnonzero(counts == counts.max())[0]])
    score_argmin = float(grid[int(np.flatnonzero(mean_s == mean_s.min())[0])])

    payload = {
        "bandwidth_grid": grid.tolist(),
        "hamming_curve": {
            "r": rs.tolist(),
            "mean": mean_h.tolist(),
            "stderr": [_stderr(hamming[:, i]) for i in range(rs.size)],
        },
        "score_curve": {
            "r": grid.tolist(),
            "mean": mean_s.tolist(),
            "stderr": [_stderr(scores[:, i]) for i in range(grid.size)],
        },
        "chosen_per_trial": chosen.tolist(),
        "modal_chosen": modal,
        "score_curve_argmin": score_argmin,
        "hamming_argmin": float(grid[argmin_idx]),
        "hamming_at_argmin": float(pos[argmin_idx]),
        "hamming_at_zero": float(mean_h[0]),
        "panels": [
            {
                "name": "bandwidth_sweep",
                "x_label": "bandwidth",
                "y_label": "mean Hamming error",
                "y2_label": "tuning score",
                "x": grid.tolist(),
                "curves": [
                    {"label": "hamming", "values": mean_h[1:].tolist(), "axis": "left"},
                    {"label": "score", "values": mean_s.tolist(), "axis": "right"},
                ],
                "markers": [
                    {"curve": "hamming", "x": float(grid[argmin_idx])},
                    {"curve": "score", "x": score_argmin},
                ],
            }
        ],
    }
    config = {
        "preset": "figure3", "n": n, "n_steps": T, "n_communities": K, "rho": rho,
        "gamma": gamma, "trials": trials, "grid": grid.tolist(),
        "adjustment": adjustment, "n_restarts": n_restarts, "max_iter": max_iter,
        "seed": seed,
    }
    return ExperimentReport("figure3", config, payload, time.perf_counter() - start)


def _method_comparison(
    preset: str,
    sweep_name: str,
    sweep_values,
    scenario_of,
    trials: int,
    tune_grid,
    adjustment: float,
    n_restarts: int,
    max_iter: int,
    seed: int,
) -> tuple[list[dict], dict]:
    K = 3
    scen_stream, fit_stream = _STREAMS[preset]
    rows: list[dict] = []
    curves: dict[str, list[float]] = {"kdsos": [], "singleton": [], "all": []}
    for vi, value in enumerate(sweep_values):
        errs = {m: np.empty(trials) for m in ("kdsos", "singleton", "all")}
        chosen = np.empty(trials)
        for trial in range(trials):
            cfg = scenario_of(value, derive_seed(seed, scen_stream, vi, trial))
            series, truth = generate_scenario(cfg)
            aggregator = DebiasedAggregator(series)
            fit_seed = derive_seed(seed, fit_stream, vi, trial)
            table = tune_bandwidth(series, tune_grid, K, adjustment, aggregator=aggregator)
            chosen[trial] = table.chosen
            for method, r in (("kdsos", table.chosen), ("singleton", 0.0), ("all", 1.0)):
                clustering = kd_sos(
                    series, K, KernelSpec("box", float(r)), fit_seed,
                    aggregator=aggregator, n_restarts=n_restarts, max_iter=max_iter,
                )
                errs[method][trial] = mean_hamming(
                    clustering.labels, truth.memberships.labels, K
                )
        for method in ("kdsos", "singleton", "all"):
            rows.append(
                {
                    sweep_name: float(value),
                    "method": method,
                    "mean_hamming": float(errs[method].mean()),
                    "stderr": _stderr(errs[method]),
                    "n_trials": trials,
                }
            )
            curves[method].append(float(errs[method].mean()))
        rows.append(
            {
                sweep_name: float(value),
                "method": "kdsos_chosen_bandwidth",
                "mean_hamming": float(chosen.mean()),
                "stderr": _stderr(chosen),
                "n_trials": trials,
            }
        )
    panel = {
        "name": f"methods_vs_{sweep_name}",
        "x_label": sweep_name,
        "y_label": "mean Hamming error",
        "x": [float(v) for v in sweep_values],
        "curves": [
            {"label": m, "values": curves[m], "axis": "left"}
            for m in ("kdsos", "singleton", "all")
        ],
        "markers": [
            {"curve": m, "x": float(np.asarray(sweep_values)[int(np.argmin(curves[m]))])}
            for m in ("kdsos", "singleton", "all")
        ],
    }
    return rows, panel


def run_figure4_gamma(
    n: int = 500,
    n_steps: int = 50,
    rho: float = 0.5,
    gammas=None,
    trials: int = 50,
    tune_grid=None,
    adjustment: float = 2.0,
    n_restarts: int = 20,
    max_iter: int = 100,
    seed: int = 0,
) -> ExperimentReport:
    """Method comparison while the switching rate sweeps 0 to 0.1."""
    start = time.perf_counter()
    if gammas is None:
        gammas = np.round(np.arange(0.0, 0.11, 0.01), 10)
    gammas = np.asarray(gammas, dtype=np.float64)
    if tune_grid is None:
        tune_grid = np.arange(1, 11) / n_steps

    rows, panel = _method_comparison(
        "figure4_gamma", "gamma", gammas,
        lambda g, s: _benchmark_scenario(n, n_steps, float(g), rho, s),
        trials, tune_grid, adjustment, n_restarts, max_iter, seed,
    )
    config = {
        "preset": "figure4_gamma", "n": n, "n_steps": n_steps, "n_communities": 3,
        "rho": rho, "gammas": gammas.tolist(), "trials": trials,
        "tune_grid": np.asarray(tune_grid).tolist(), "adjustment": adjustment,
        "n_restarts": n_restarts, "max_iter": max_iter, "seed": seed,
    }
    payload = {"methods": rows, "panels": [panel]}
    return ExperimentReport("figure4_gamma", config, payload, time.perf_counter() - start)


def run_figure4_rho(
    n: int = 500,
    n_steps: int = 50,
    gamma: float = 0.05,
    rhos=None,
    trials: int = 50,
    tune_grid=None,
    adjustment: float = 2.0,
    n_restarts: int = 20,
    max_iter: int = 100,
    seed: int = 0,
) -> ExperimentReport:
    """Method comparison while the density sweeps 0.2 to 1."""
    start = time.perf_counter()
    if rhos is None:
        rhos = np.round(np.arange(0.2, 1.01, 0.1), 10)
    rhos = np.asarray(rhos, dtype=np.float64)
    if tune_grid is None:
        tune_grid = np.arange(1, 11) / n_steps

    rows, panel = _method_comparison(
        "figure4_rho", "rho", rhos,
        lambda r, s: _benchmark_scenario(n, n_steps, gamma, float(r), s),
        trials, tune_grid, adjustment, n_restarts, max_iter, seed,
    )
    config = {
        "preset": "figure4_rho", "n": n, "n_steps": n_steps, "n_communities": 3,
        "gamma": gamma, "rhos": rhos.tolist(), "trials": trials,
        "tune_grid": np.asarray(tune_grid).tolist(), "adjustment": adjustment,
        "n_restarts": n_restarts, "max_iter": max_iter, "seed": seed,
    }
    payload = {"methods": rows, "panels": [panel]}
    return ExperimentReport("figure4_rho", config, payload, time.perf_counter() - start)


#: (per-step switch probability, n, T, number of sequences)
ALIGNABILITY_REGIMES = {
    "fast": (0.7, 100, 10, 200),
    "slow": (0.001, 500, 50, 500),
}


def run_alignability(seed: int = 0, regimes: dict | None = None) -> ExperimentReport:
    """Monte-Carlo fraction of two-community label sequences that fail the
    consecutive-pair alignability check."""
    start = time.perf_counter()
    if regimes is None:
        regimes = ALIGNABILITY_REGIMES
    scen_stream, _ = _STREAMS["alignability"]
    rows = []
    for ri, (name, (p_step, n, T, count)) in enumerate(sorted(regimes.items())):
        failures = 0
        for i in range(count):
            cfg = ScenarioConfig(
                n=n, n_communities=2, n_steps=T,
                gamma=p_step * T, rho=0.5, process="bernoulli",
                transition=uniform_switch_transition(2, p_step),
                initial_sizes=[n // 2, n - n // 2],
                seed=derive_seed(seed, scen_stream, ri, i),
            )
            seq = simulate_memberships_bernoulli(cfg)
            ok, _ = alignable_sequence(seq)
            failures += 0 if ok else 1
        fraction = failures / count
        rows.append(
            {
                "regime": name,
                "switch_probability": p_step,
                "n": n,
                "n_steps": T,
                "n_sequences": count,
                "non_alignable_fraction": fraction,
                "stderr": float(np.sqrt(max(fraction * (1 - fraction), 0.0) / count)),
            }
        )
    config = {
        "preset": "alignability", "seed": seed,
        "regimes": {k: list(v) for k, v in sorted(regimes.items())},
    }
    return ExperimentReport(
        "alignability", config, {"regimes": rows, "panels": []},
        time.perf_counter() - start,
    )


def run_audit(instances: int = 100, max_n: int = 60, max_steps: int = 8,
              seed: int = 0) -> ExperimentReport:
    """Decomposition-identity residuals on random instances."""
    start = time.perf_counter()
    scen_stream, fit_stream = _STREAMS["audit"]
    rows = []
    for i in range(instances):
        params = derive_rng(seed, fit_stream, i)
        n = int(params.integers(10, max_n + 1))
        T = int(params.integers(2, max_steps + 1))
        K = int(params.integers(2, 5))
        rho = float(params.uniform(0.2, 1.0))
        p_step = float(params.uniform(0.0, 0.5))
        R = params.random((K, K))
        B = (R + R.T) / 2
        r_steps = int(params.integers(0, T + 1))
        t_index = int(params.integers(1, T + 1))
        cfg = ScenarioConfig(
            n=n, n_communities=K, n_steps=T, gamma=p_step * T, rho=rho,
            process="bernoulli", transition=uniform_switch_transition(K, p_step),
            connectivity=ConnectivitySchedule.constant(B),
            seed=derive_seed(seed, scen_stream, i),
        )
        series, truth = generate_scenario(cfg, keep_probabilities=True)
        terms = decomposition_audit(series, truth, t_index, r_steps / T)
        rows.append(
            {
                "instance": i, "n": n, "n_steps": T, "n_communities": K,
                "rho": rho, "bandwidth": r_steps / T, "t_index": t_index,
                "aggregate_norm": terms.aggregate_norm,
                "residual": terms.residual,
                "relative_residual": terms.relative_residual,
                "residual_fixed_center": terms.residual_fixed_center,
            }
        )
    max_rel = max(r["relative_residual"] for r in rows)
    config = {
        "preset": "audit", "instances": instances, "max_n": max_n,
        "max_steps": max_steps, "seed": seed,
    }
    payload = {"instances": rows, "max_relative_residual": max_rel, "panels": []}
    return ExperimentReport("audit", config, payload, time.perf_counter() - start)


_RUNNERS = {
    "figure3": run_figure3,
    "figure4_gamma": run_figure4_gamma,
    "figure4_rho": run_figure4_rho,
    "alignability": run_alignability,
    "audit": run_audit,
}


def run_experiment(preset: str, **overrides) -> ExperimentReport:
    """Dispatch a preset by name; overrides must match the preset's knobs."""
    if preset not in _RUNNERS:
        raise ValidationError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
    runner = _RUNNERS[preset]
    allowed = set(inspect.signature(runner).parameters)
    unknown = set(overrides) - allowed
    if unknown:
        raise ValidationError(
            f"unknown override(s) {sorted(unknown)} for preset {preset!r}; "
            f"allowed: {sorted(allowed)}"
        )
    return runner(**overrides)


@dataclass
class TransitionSummary:
    """Per-step flows between aligned communities.

    ``counts[t][k][l]`` is the number of nodes moving from community k+1 at
    step t+1 to community l+1 at step t+2 (1-based steps); each row of
    counts sums to the source community's size.  ``percentages`` scales rows
    by those sizes (zero rows for empty communities).
    """

    counts: np.ndarray
    percentages: np.ndarray
    source_sizes: np.ndarray
    aligned: bool = True
    warnings: list[str] = field(default_factory=list)


def summarize_transitions(clustering, n_communities: int | None = None) -> TransitionSummary:
    """Exit/entry percentages between aligned communities per step."""
    if isinstance(clustering, DynamicClustering):
        labels = clustering.labels
        K = clustering.aligned.n_communities
        certified = clustering.alignable
    elif isinstance(clustering, MembershipSequence):
        labels = clustering.labels
        K = clustering.n_communities
        certified, _ = alignable_sequence(clustering) if clustering.n_steps >= 2 else (True, None)
    else:
        labels = np.asarray(clustering)
        if n_communities is None:
            raise ValidationError("n_communities is required for a bare label array")
        K = int(n_communities)
        certified, _ = alignable_sequence(labels, K) if labels.shape[0] >= 2 else (True, None)
    if labels.ndim != 2 or labels.shape[0] < 2:
        raise ValidationError("need at least two time points to summarize transitions")
    notes = []
    if not certified:
        notes.append("input sequence is not alignable; community tracking may be ambiguous")
        warnings.warn(notes[-1], stacklevel=2)
    T = labels.shape[0]
    counts = np.empty((T - 1, K, K), dtype=np.int64)
    sizes = np.empty((T - 1, K), dtype=np.int64)
    pct = np.zeros((T - 1, K, K))
    for t in range(T - 1):
        counts[t] = confusion_matrix(labels[t], labels[t + 1], K)
        sizes[t] = community_sizes(labels[t], K)
        nz = sizes[t] > 0
        pct[t, nz] = 100.0 * counts[t, nz] / sizes[t, nz, None]
    return TransitionSummary(
        counts=counts, percentages=pct, source_sizes=sizes,
        aligned=bool(certified), warnings=notes,
    )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def report_json(report: ExperimentReport) -> str:
    """Deterministic JSON serialization (timing is excluded; it goes to a
    plain-text log so repeated runs stay byte-identical)."""
    doc = {"preset": report.preset, "config": report.config, "payload": report.payload}
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n"


def panel_csv(panel: dict) -> str:
    header = ",".join(["x"] + [c["label"] for c in panel["curves"]])
    lines = [header]
    for i, x in enumerate(panel["x"]):
        cells = [repr(float(x))] + [repr(float(c["values"][i])) for c in panel["curves"]]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_report(report: ExperimentReport, outdir) -> list[Path]:
    """Write report.json, per-panel CSVs and the timing log; returns the
    deterministic files written (timing.log is excluded from the list)."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    path = outdir / "report.json"
    path.write_text(report_json(report), encoding="utf-8")
    written.append(path)
    for panel in report.payload.get("panels", []):
        path = outdir / f"{report.preset}_{panel['name']}.csv"
        path.write_text(panel_csv(panel), encoding="utf-8")
        written.append(path)
    (outdir / "timing.log").write_text(
        f"elapsed_seconds {report.timing_seconds:.3f}\n", encoding="utf-8"
    )
    return written
