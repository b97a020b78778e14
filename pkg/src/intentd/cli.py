"""Command-line pipeline: simulate -> dataset -> train -> evaluate -> compare,
plus replay for recorded logs and serve for live teleoperation.

Exit codes: 0 success, 2 usage/validation error, 3 runtime failure. The
INTENTD_LOG environment variable sets the diagnostic level (DEBUG, INFO,
WARNING, ...).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__, features, metrics
from .baseline import BaselineParams
from .forest import (
    CodecError,
    ForestHyperparams,
    load_model_file,
    save_model_file,
    train as train_forest,
)
from .inference import prediction_records, stream_trial
from .manifest import write_manifest
from .planner import GridPlanner
from .sim import ScriptError, generate_campaign
from .world import ScenarioSpec, ScriptNoise, load_fixture, load_scenario

log = logging.getLogger("intentd")


def _configure_logging() -> None:
    level = os.environ.get("INTENTD_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _resolve_scenario(args) -> ScenarioSpec:
    if getattr(args, "scenario_file", None):
        return load_scenario(args.scenario_file)
    if getattr(args, "scenario", None) is None:
        raise ValueError("a scenario is required: pass --scenario ID or --scenario-file PATH")
    return load_fixture(args.scenario)


def _add_scenario_flags(p: argparse.ArgumentParser, required: bool = False) -> None:
    p.add_argument("--scenario", type=int, default=None,
                   help="built-in scenario id (1-4)")
    p.add_argument("--scenario-file", default=None,
                   help="path to a custom scenario JSON (overrides --scenario)")


def _add_boir_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--boir-kappa", type=float, default=2.0,
                   help="baseline heading concentration (default 2.0)")
    p.add_argument("--boir-lambda", type=float, default=1.5,
                   help="baseline path-progress weight per meter (default 1.5)")
    p.add_argument("--boir-self-transition", type=float, default=0.95,
                   help="baseline self-transition probability (default 0.95)")


def _baseline_params(args) -> BaselineParams:
    return BaselineParams(
        kappa=args.boir_kappa, lam=getattr(args, "boir_lambda"),
        self_transition=args.boir_self_transition,
    )


def _trial_files(trials_dir: Path) -> list[Path]:
    files = sorted(trials_dir.glob("*.jsonl"))
    if not files:
        raise ValueError(f"no trial logs (*.jsonl) found in {trials_dir}")
    return files


# --- subcommands ------------------------------------------------------------

def cmd_simulate(args) -> int:
    spec = _resolve_scenario(args)
    if args.heading_sd is not None or args.speed_sd is not None or args.pause_prob is not None:
        noise = spec.script.noise
        noise = ScriptNoise(
            heading_sd=noise.heading_sd if args.heading_sd is None else args.heading_sd,
            speed_sd=noise.speed_sd if args.speed_sd is None else args.speed_sd,
            pause_prob=noise.pause_prob if args.pause_prob is None else args.pause_prob,
        )
        from dataclasses import replace
        spec = replace(spec, script=replace(spec.script, noise=noise))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = generate_campaign(spec, args.trials, args.seed, timeout=args.timeout)
    paths = []
    for rec in records:
        path = out / f"trial_{rec.trial_id:03d}.jsonl"
        features.write_trajectory_jsonl(path, rec.samples)
        paths.append(path)
    completed = sum(1 for r in records if r.outcome == "completed")
    log.info("simulated %d trials (%d completed)", len(records), completed)
    write_manifest(
        out, "simulate",
        params={"scenario": spec.id, "trials": args.trials, "seed": args.seed,
                "timeout": args.timeout, "dt": 0.1,
                "outcomes": {r.trial_id: r.outcome for r in records},
                "trial_seeds": {r.trial_id: r.seed for r in records}},
        inputs=[], outputs=paths,
    )
    print(f"wrote {len(paths)} trial logs to {out}")
    return 0


def cmd_dataset(args) -> int:
    trials_dir = Path(args.trials)
    files = _trial_files(trials_dir)
    all_trials = [features.read_trajectory_jsonl(p) for p in files]
    scenario_id = all_trials[0][0].scenario_id
    if getattr(args, "scenario_file", None) or getattr(args, "scenario", None) is not None:
        spec = _resolve_scenario(args)
    else:
        spec = load_fixture(scenario_id)
    per_trial = [features.label_and_flatten(t, spec.goal_set, k=args.window)
                 for t in all_trials]

    if args.sample_level:
        split = features.split_instances_stratified(
            [inst for t in per_trial for inst in t], ratio=args.ratio, seed=args.split_seed)
    else:
        split = features.split_by_trial(per_trial, ratio=args.ratio, seed=args.split_seed)
    train_bal = features.balance(split.train, (args.balance_seed, 0))
    test_bal = features.balance(split.test, (args.balance_seed, 1))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train_csv, test_csv = out / "train.csv", out / "test.csv"
    features.write_dataset_csv(train_csv, train_bal, split.n_goals)
    features.write_dataset_csv(test_csv, test_bal, split.n_goals)

    split_doc = {
        "mode": split.metadata.get("split_mode", "instance"),
        "scenario_id": spec.id,
        "n_goals": split.n_goals,
        "window": args.window,
        "ratio": args.ratio,
        "split_seed": args.split_seed,
        "balance_seed": args.balance_seed,
        "train_files": [files[i].name for i in split.metadata.get("train_trials", [])],
        "test_files": [files[i].name for i in split.metadata.get("test_trials", [])],
    }
    split_json = out / "split.json"
    with open(split_json, "w", encoding="utf-8") as f:
        json.dump(split_doc, f, indent=2)
        f.write("\n")
    write_manifest(
        out, "dataset",
        params={k: v for k, v in split_doc.items() if k not in ("train_files", "test_files")},
        inputs=files, outputs=[train_csv, test_csv, split_json],
    )
    print(f"wrote {train_csv} ({len(train_bal)} rows), {test_csv} ({len(test_bal)} rows)")
    return 0


def cmd_train(args) -> int:
    dataset_dir = Path(args.dataset) if args.dataset else None
    train_csv = Path(args.train_csv) if args.train_csv else dataset_dir / "train.csv"
    instances, n_goals = features.read_dataset_csv(train_csv)
    scenario_id = None
    if dataset_dir and (dataset_dir / "split.json").exists():
        with open(dataset_dir / "split.json", encoding="utf-8") as f:
            scenario_id = json.load(f).get("scenario_id")
    hp = ForestHyperparams(
        n_trees=args.trees, max_depth=args.max_depth,
        min_samples_split=args.min_samples_split, min_samples_leaf=args.min_samples_leaf,
        features_per_split=args.features_per_split, seed=args.seed,
    )
    model = train_forest(instances, hp, scenario_id=scenario_id)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model_file(model, out)
    write_manifest(
        out.parent, "train",
        params={"trees": hp.n_trees, "max_depth": hp.max_depth,
                "min_samples_split": hp.min_samples_split,
                "min_samples_leaf": hp.min_samples_leaf,
                "features_per_split": hp.features_per_split, "seed": hp.seed,
                "n_goals": n_goals, "scenario_id": scenario_id,
                "n_instances": len(instances)},
        inputs=[train_csv], outputs=[out],
        name=out.name + ".manifest.json",
    )
    print(f"trained {hp.n_trees}-tree forest on {len(instances)} instances -> {out}")
    return 0


def _evaluate_trials(args, spec: ScenarioSpec, files: list[Path]):
    methods = ["mloii", "boir"] if args.method == "both" else [args.method]
    model = None
    if "mloii" in methods:
        if not args.model:
            raise ValueError("--model is required for method mloii")
        model = load_model_file(args.model)
        if model.n_goals != spec.n_goals:
            raise ValueError(
                f"model expects {model.n_goals} goals, scenario {spec.id} has {spec.n_goals}")
    planner = GridPlanner(spec.map) if "boir" in methods else None
    params = _baseline_params(args)
    per_trial = []
    for path in files:
        samples = features.read_trajectory_jsonl(path)
        estimates = stream_trial(samples, spec.goal_set, model=model, planner=planner,
                                 baseline_params=params, window=args.window)
        trial_id = samples[0].trial_id
        for method in methods:
            records = prediction_records(samples, estimates, method)
            per_trial.append(metrics.trial_metrics(
                trial_id, records, spec.n_goals, method,
                include_unnormalized=args.conventional_logloss))
    return per_trial, model


def cmd_evaluate(args) -> int:
    spec = _resolve_scenario(args)
    trials_dir = Path(args.trials)
    files = _trial_files(trials_dir)
    if args.split:
        with open(args.split, encoding="utf-8") as f:
            split_doc = json.load(f)
        names = set(split_doc.get("test_files", []))
        if not names:
            raise ValueError(f"{args.split} lists no test trials (sample-level split?)")
        files = [p for p in files if p.name in names]
        if not files:
            raise ValueError("no trial files match the split's test set")
    per_trial, _ = _evaluate_trials(args, spec, files)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="\n") as f:
        f.write(metrics.trial_metrics_to_csv(per_trial))
    write_manifest(
        out.parent, "evaluate",
        params={"scenario": spec.id, "method": args.method, "window": args.window,
                "boir_kappa": args.boir_kappa, "boir_lambda": args.boir_lambda,
                "boir_self_transition": args.boir_self_transition,
                "model": str(args.model) if args.model else None,
                "split": str(args.split) if args.split else None},
        inputs=files + ([Path(args.model)] if args.model else []),
        outputs=[out],
        name=out.name + ".manifest.json",
    )
    print(f"wrote per-trial metrics for {len(files)} trials -> {out}")
    return 0


def cmd_compare(args) -> int:
    with open(args.metrics, encoding="utf-8") as f:
        per_trial = metrics.trial_metrics_from_csv(f.read())
    mloii = [m for m in per_trial if m.source == "mloii"]
    boir = [m for m in per_trial if m.source == "boir"]
    if not mloii or not boir:
        raise ValueError("metrics CSV must contain both mloii and boir rows to compare")
    rows = metrics.compare_methods(mloii, boir, test=args.test, scenario=args.scenario)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="\n") as f:
        f.write(metrics.report_to_csv(rows))
    write_manifest(
        out.parent, "compare",
        params={"test": args.test, "scenario": args.scenario,
                "n_trials": len(mloii)},
        inputs=[Path(args.metrics)], outputs=[out],
        name=out.name + ".manifest.json",
    )
    print(f"wrote comparison report -> {out}")
    return 0


def _estimate_to_json(est) -> dict | None:
    if est is None:
        return None
    return {"probabilities": list(est.probabilities), "predicted": est.predicted}


def cmd_replay(args) -> int:
    samples = features.read_trajectory_jsonl(args.log)
    if getattr(args, "scenario_file", None) or getattr(args, "scenario", None) is not None:
        spec = _resolve_scenario(args)
    else:
        spec = load_fixture(samples[0].scenario_id)
    methods = ["mloii", "boir"] if args.method == "both" else [args.method]
    model = None
    if "mloii" in methods:
        if not args.model:
            raise ValueError("--model is required for method mloii")
        model = load_model_file(args.model)
        if model.n_goals != spec.n_goals:
            raise ValueError(
                f"model expects {model.n_goals} goals, scenario {spec.id} has {spec.n_goals}")
    planner = GridPlanner(spec.map) if "boir" in methods else None
    estimates = stream_trial(samples, spec.goal_set, model=model, planner=planner,
                             baseline_params=_baseline_params(args), window=args.window)
    sink = open(args.out, "w", encoding="utf-8", newline="\n") if args.out else sys.stdout
    try:
        for est in estimates:
            doc = {"frame": est.frame, "t": est.t,
                   "mloii": _estimate_to_json(est.mloii),
                   "boir": _estimate_to_json(est.boir)}
            sink.write(json.dumps(doc, separators=(",", ":")) + "\n")
    finally:
        if sink is not sys.stdout:
            sink.close()
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    spec = _resolve_scenario(args) if (args.scenario or args.scenario_file) else None
    model = load_model_file(args.model) if args.model else None
    app = create_app(model=model, default_scenario=spec,
                     sessions_dir=args.sessions_dir, static_dir=args.static,
                     baseline_params=_baseline_params(args))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# --- argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="intentd",
        description="Operator intent inference toolkit: simulate, train, evaluate, serve.")
    p.add_argument("--version", action="version", version=f"intentd {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate synthetic-operator trial logs")
    _add_scenario_flags(s)
    s.add_argument("--trials", type=int, default=40)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--out", required=True)
    s.add_argument("--timeout", type=float, default=180.0)
    s.add_argument("--heading-sd", type=float, default=None,
                   help="override script heading noise sd [rad]")
    s.add_argument("--speed-sd", type=float, default=None,
                   help="override script speed noise fraction")
    s.add_argument("--pause-prob", type=float, default=None,
                   help="override per-second pause probability")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("dataset", help="build balanced train/test CSVs from trial logs")
    s.add_argument("--trials", required=True, help="directory of trial JSONL files")
    s.add_argument("--out", required=True)
    _add_scenario_flags(s)
    s.add_argument("--window", type=int, default=5)
    s.add_argument("--ratio", type=float, default=0.7)
    s.add_argument("--split-seed", type=int, default=13)
    s.add_argument("--balance-seed", type=int, default=7)
    s.add_argument("--sample-level", action="store_true",
                   help="split at sample level instead of whole trials")
    s.set_defaults(func=cmd_dataset)

    s = sub.add_parser("train", help="train the random-forest model")
    s.add_argument("--dataset", default=None, help="dataset directory (train.csv + split.json)")
    s.add_argument("--train-csv", default=None, help="explicit training CSV path")
    s.add_argument("--out", required=True)
    s.add_argument("--trees", type=int, default=50)
    s.add_argument("--max-depth", type=int, default=16)
    s.add_argument("--min-samples-split", type=int, default=2)
    s.add_argument("--min-samples-leaf", type=int, default=1)
    s.add_argument("--features-per-split", type=int, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("evaluate", help="replay trials through the estimators and score them")
    s.add_argument("--trials", required=True)
    s.add_argument("--out", required=True)
    _add_scenario_flags(s)
    s.add_argument("--model", default=None)
    s.add_argument("--method", choices=["mloii", "boir", "both"], default="both")
    s.add_argument("--split", default=None, help="split.json; evaluate only its test trials")
    s.add_argument("--window", type=int, default=5)
    s.add_argument("--conventional-logloss", action="store_true",
                   help="also emit the un-normalized -ln(p_true) column")
    _add_boir_flags(s)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("compare", help="descriptive statistics and paired tests between methods")
    s.add_argument("--metrics", required=True, help="per-trial metrics CSV from evaluate")
    s.add_argument("--out", required=True)
    s.add_argument("--test", choices=["t", "wilcoxon"], default="t")
    s.add_argument("--scenario", type=int, default=None)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("replay", help="stream estimates for a recorded trial log")
    s.add_argument("--log", required=True)
    s.add_argument("--model", default=None)
    _add_scenario_flags(s)
    s.add_argument("--method", choices=["mloii", "boir", "both"], default="both")
    s.add_argument("--window", type=int, default=5)
    s.add_argument("--out", default=None, help="output JSONL (default: stdout)")
    _add_boir_flags(s)
    s.set_defaults(func=cmd_replay)

    s = sub.add_parser("serve", help="run the live teleoperation WebSocket service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8080)
    s.add_argument("--model", default=None)
    _add_scenario_flags(s)
    s.add_argument("--sessions-dir", default="sessions")
    s.add_argument("--static", default=None, help="directory of console assets to serve at /")
    _add_boir_flags(s)
    s.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, CodecError, ScriptError, FileNotFoundError) as e:
        print(f"intentd {args.command}: error: {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 3
    except Exception as e:  # runtime failure
        log.exception("unhandled failure")
        print(f"intentd {args.command}: failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
