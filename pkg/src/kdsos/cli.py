"""Command-line interface.

Subcommands: ``simulate``, ``fit``, ``tune``, ``audit``, ``experiment``,
``summarize``.  A single JSON config document can drive everything; any flag
overrides the matching config key, and the effective configuration is echoed
into every report for provenance.

Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .estimator import KDSoS
from .exceptions import NumericalError, ValidationError
from .experiments import (
    PRESETS,
    _jsonable,
    run_audit,
    run_experiment,
    summarize_transitions,
    write_report,
)
from .plots import emit_plots
from .series import load_series, save_series
from .simulate import (
    ConnectivitySchedule,
    ScenarioConfig,
    benchmark_initial_sizes,
    generate_scenario,
    stationary_markov_transition,
)
from .tuning import BandwidthScoreTable, tune_bandwidth

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError:
        raise
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    return doc


def scenario_from_dict(doc: dict, seed_override=None) -> ScenarioConfig:
    """Build a ScenarioConfig from the config file's ``scenario`` block.

    ``transition``, ``connectivity`` and ``initial_sizes`` accept the string
    ``"benchmark"`` for the built-in three-community presets, an explicit
    value, or null for the defaults.
    """
    try:
        n = int(doc["n"])
        n_communities = int(doc["n_communities"])
        n_steps = int(doc["n_steps"])
        rho = float(doc["rho"])
    except KeyError as exc:
        raise ValidationError(f"scenario config is missing required key {exc}") from None
    gamma = float(doc.get("gamma", 0.0))

    transition = doc.get("transition")
    if transition == "benchmark":
        if n_communities != 3:
            raise ValidationError("the benchmark transition needs n_communities = 3")
        transition = stationary_markov_transition(gamma)
    elif transition is not None:
        transition = np.asarray(transition, dtype=np.float64)

    connectivity = doc.get("connectivity")
    if connectivity == "benchmark":
        if n_communities != 3:
            raise ValidationError("the benchmark connectivity needs n_communities = 3")
        connectivity = ConnectivitySchedule.benchmark()
    elif isinstance(connectivity, dict):
        try:
            connectivity = ConnectivitySchedule(
                mode=connectivity["mode"],
                matrices=[np.asarray(M, dtype=np.float64) for M in connectivity["matrices"]],
            )
        except KeyError as exc:
            raise ValidationError(f"connectivity config is missing key {exc}") from None
    elif connectivity is not None:
        raise ValidationError("connectivity must be 'benchmark', an object, or null")

    initial_sizes = doc.get("initial_sizes")
    if initial_sizes == "benchmark":
        if n_communities != 3:
            raise ValidationError("the benchmark initial sizes need n_communities = 3")
        initial_sizes = benchmark_initial_sizes(n)

    seed = doc.get("seed", 0) if seed_override is None else seed_override
    return ScenarioConfig(
        n=n,
        n_communities=n_communities,
        n_steps=n_steps,
        gamma=gamma,
        rho=rho,
        process=doc.get("process", "bernoulli"),
        transition=transition,
        initial_sizes=initial_sizes,
        connectivity=connectivity,
        seed=seed,
    )


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _write_memberships_csv(path: Path, labels: np.ndarray) -> None:
    lines = ["t_index,node,community"]
    for t in range(labels.shape[0]):
        for i in range(labels.shape[1]):
            lines.append(f"{t + 1},{i},{int(labels[t, i])}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_memberships_csv(path) -> np.ndarray:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError:
        raise
    if not lines or lines[0].strip() != "t_index,node,community":
        raise ValidationError(f"{path}: expected header 't_index,node,community'")
    entries = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ValidationError(f"{path}:{lineno}: expected 3 comma-separated fields")
        try:
            entries.append(tuple(int(p) for p in parts))
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: non-integer field") from None
    if not entries:
        raise ValidationError(f"{path}: no membership rows")
    T = max(e[0] for e in entries)
    n = max(e[1] for e in entries) + 1
    labels = np.zeros((T, n), dtype=np.int64)
    for t, i, c in entries:
        if t < 1 or i < 0:
            raise ValidationError(f"{path}: invalid indices t={t}, node={i}")
        labels[t - 1, i] = c
    if np.any(labels < 1):
        raise ValidationError(f"{path}: missing (t_index, node) entries")
    return labels


def _write_scores_csv(path: Path, table: BandwidthScoreTable) -> None:
    lines = ["r,theta"]
    for r, s in zip(table.grid, table.scores):
        lines.append(f"{float(r)!r},{float(s)!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_grid(text: str) -> np.ndarray:
    try:
        grid = np.array([float(v) for v in text.split(",") if v.strip() != ""])
    except ValueError:
        raise ValidationError(f"--grid must be comma-separated floats, got {text!r}") from None
    if grid.size == 0:
        raise ValidationError("--grid must be non-empty")
    return grid


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    scenario_doc = config.get("scenario")
    if scenario_doc is None:
        raise ValidationError("simulate needs a config file with a 'scenario' block")
    cfg = scenario_from_dict(scenario_doc, seed_override=args.seed)
    if cfg.connectivity is None:
        raise ValidationError("simulate needs a connectivity schedule in the scenario block")
    series, truth = generate_scenario(cfg)
    out = _outdir(args)
    save_series(series, out / "series.txt")
    _write_memberships_csv(out / "memberships.csv", truth.memberships.labels)
    echo = {
        "command": "simulate",
        "config": {
            "n": cfg.n, "n_communities": cfg.n_communities, "n_steps": cfg.n_steps,
            "gamma": cfg.gamma, "rho": cfg.rho, "process": cfg.process,
            "transition": cfg.transition, "initial_sizes": cfg.initial_sizes,
            "connectivity": {
                "mode": cfg.connectivity.mode,
                "matrices": cfg.connectivity.matrices,
            },
            "seed": cfg.seed,
        },
        "outputs": ["series.txt", "memberships.csv"],
    }
    _write_json(out / "report.json", echo)
    print(f"wrote {out / 'series.txt'} ({series.n_steps} snapshots, {series.n_nodes} nodes)")
    return EXIT_OK


def _estimator_settings(args, config: dict) -> dict:
    block = dict(config.get("estimator", {}))
    if args.k is not None:
        block["n_communities"] = args.k
    if getattr(args, "kernel", None) is not None:
        block["kernel"] = args.kernel
    if getattr(args, "r", None) is not None:
        block["bandwidth"] = args.r
    if getattr(args, "tune", False):
        block["bandwidth"] = "tune"
    if getattr(args, "grid", None) is not None:
        block["grid"] = _parse_grid(args.grid).tolist()
    if getattr(args, "adjust", None) is not None:
        block["adjustment"] = args.adjust
    if args.seed is not None:
        block["random_state"] = args.seed
    block.setdefault("n_communities", 2)
    block.setdefault("kernel", "box")
    block.setdefault("bandwidth", "tune")
    block.setdefault("adjustment", 2.0)
    block.setdefault("grid", None)
    block.setdefault("n_restarts", 20)
    block.setdefault("max_iter", 100)
    block.setdefault("random_state", 0)
    return block


def cmd_fit(args) -> int:
    config = _load_config(args.config)
    settings = _estimator_settings(args, config)
    series = load_series(args.series)
    est = KDSoS(
        n_communities=int(settings["n_communities"]),
        kernel=settings["kernel"],
        bandwidth=settings["bandwidth"],
        tune_grid=settings["grid"],
        adjustment=float(settings["adjustment"]),
        n_restarts=int(settings["n_restarts"]),
        max_iter=int(settings["max_iter"]),
        random_state=int(settings["random_state"]),
    )
    est.fit(series)
    out = _outdir(args)
    _write_memberships_csv(out / "memberships.csv", est.labels_)
    if est.score_table_ is not None:
        _write_scores_csv(out / "scores.csv", est.score_table_)
    report = {
        "command": "fit",
        "config": {**settings, "series": str(args.series)},
        "bandwidth": est.bandwidth_,
        "tuned": est.score_table_ is not None,
        "alignable": est.alignable_,
        "first_misaligned_step": est.clustering_.first_misaligned_step,
        "permutations": [p for p in est.permutations_],
        "eigenvalues": est.eigenvalues_,
        "degenerate_gaps": est.degenerate_gaps_,
    }
    _write_json(out / "report.json", report)
    print(f"fit: bandwidth={est.bandwidth_} alignable={est.alignable_} -> {out}")
    return EXIT_OK


def cmd_tune(args) -> int:
    config = _load_config(args.config)
    settings = _estimator_settings(args, config)
    series = load_series(args.series)
    grid = settings["grid"]
    table = tune_bandwidth(
        series,
        grid=None if grid is None else np.asarray(grid, dtype=np.float64),
        n_communities=int(settings["n_communities"]),
        adjustment=float(settings["adjustment"]),
    )
    out = _outdir(args)
    _write_scores_csv(out / "scores.csv", table)
    report = {
        "command": "tune",
        "config": {**settings, "series": str(args.series)},
        "chosen": table.chosen,
        "grid": table.grid,
        "scores": table.scores,
        "n_skipped": table.n_skipped,
    }
    _write_json(out / "report.json", report)
    print(f"tune: chosen bandwidth {table.chosen} -> {out}")
    return EXIT_OK


def cmd_audit(args) -> int:
    config = _load_config(args.config)
    block = dict(config.get("audit", {}))
    if args.instances is not None:
        block["instances"] = args.instances
    if args.seed is not None:
        block["seed"] = args.seed
    report = run_audit(**block)
    out = _outdir(args)
    write_report(report, out)
    max_rel = report.payload["max_relative_residual"]
    print(f"audit: max relative residual {max_rel:.3e} over "
          f"{report.config['instances']} instances -> {out}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    config = _load_config(args.config)
    block = dict(config.get("experiment", {}))
    preset = args.preset or block.pop("preset", None)
    if preset is None:
        raise ValidationError(f"--preset is required (one of {', '.join(PRESETS)})")
    block.pop("preset", None)
    for flag, key in (("n", "n"), ("t_steps", "n_steps"), ("trials", "trials"),
                      ("rho", "rho"), ("gamma", "gamma"), ("adjust", "adjustment"),
                      ("seed", "seed")):
        value = getattr(args, flag, None)
        if value is not None:
            block[key] = value
    if getattr(args, "grid", None) is not None:
        grid = _parse_grid(args.grid).tolist()
        block["tune_grid" if preset.startswith("figure4") else "grid"] = grid
    report = run_experiment(preset, **block)
    out = _outdir(args)
    written = write_report(report, out)
    written += emit_plots(report, out)
    print(f"experiment {preset}: wrote {len(written)} files -> {out}")
    return EXIT_OK


def cmd_summarize(args) -> int:
    labels = _read_memberships_csv(args.memberships)
    k = args.k if args.k is not None else int(labels.max())
    summary = summarize_transitions(labels, n_communities=k)
    out = _outdir(args)
    lines = ["t_index,from_community,to_community,count,percent"]
    T1, K, _ = summary.counts.shape
    for t in range(T1):
        for a in range(K):
            for b in range(K):
                lines.append(
                    f"{t + 1},{a + 1},{b + 1},{int(summary.counts[t, a, b])},"
                    f"{float(summary.percentages[t, a, b])!r}"
                )
    (out / "transitions.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    if not summary.aligned:
        print("warning: sequence is not alignable; percentages may mix communities",
              file=sys.stderr)
    print(f"summarize: {T1} steps, {K} communities -> {out / 'transitions.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kdsos",
        description="Dynamic community detection on network sequences "
                    "(simulation, estimation, tuning, experiments).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument("--out", default="out", help="output directory (default: ./out)")

    p = sub.add_parser("simulate", help="generate a scenario and write its snapshot file")
    common(p)

    p = sub.add_parser("fit", help="estimate aligned communities for a snapshot file")
    common(p)
    p.add_argument("--series", required=True, help="snapshot edge-list file")
    p.add_argument("--k", type=int, help="number of communities")
    p.add_argument("--kernel", choices=["box", "gaussian"], help="aggregation kernel")
    p.add_argument("--r", type=float, help="bandwidth in [0, 1]")
    p.add_argument("--tune", action="store_true", help="select the bandwidth by tuning")
    p.add_argument("--grid", help="comma-separated candidate bandwidths")
    p.add_argument("--adjust", type=float, help="tuning window adjustment factor (default 2)")

    p = sub.add_parser("tune", help="score candidate bandwidths for a snapshot file")
    common(p)
    p.add_argument("--series", required=True)
    p.add_argument("--k", type=int, help="number of communities")
    p.add_argument("--grid", help="comma-separated candidate bandwidths")
    p.add_argument("--adjust", type=float, help="tuning window adjustment factor (default 2)")

    p = sub.add_parser("audit", help="decomposition-identity residuals on random instances")
    common(p)
    p.add_argument("--instances", type=int, help="number of random instances (default 100)")

    p = sub.add_parser("experiment", help="run a preset suite")
    common(p)
    p.add_argument("--preset", choices=list(PRESETS), help="preset name")
    p.add_argument("--n", type=int, help="node count override")
    p.add_argument("--t-steps", dest="t_steps", type=int, help="time point count override")
    p.add_argument("--trials", type=int, help="trial count override")
    p.add_argument("--rho", type=float, help="density override")
    p.add_argument("--gamma", type=float, help="switching rate override")
    p.add_argument("--grid", help="bandwidth grid override (comma-separated)")
    p.add_argument("--adjust", type=float, help="tuning adjustment override")

    p = sub.add_parser("summarize", help="per-step community transition percentages")
    common(p)
    p.add_argument("--memberships", required=True, help="memberships.csv from fit/simulate")
    p.add_argument("--k", type=int, help="number of communities")

    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "tune": cmd_tune,
    "audit": cmd_audit,
    "experiment": cmd_experiment,
    "summarize": cmd_summarize,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
