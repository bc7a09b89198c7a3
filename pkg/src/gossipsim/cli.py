"""Command line front end.

Subcommands:

* simulate: scalar trajectories with full state snapshots per checkpoint.
* experiment: many trials on the vectorized engine, aggregated measures.
* sweep: repeat an experiment along one numeric config entry, one
  subdirectory per axis value (aggregate plus analytic report each).
* check: analytic report (critical measure, contraction, named conditions).
* oracle: brute-force validation of the closed-form one-slot expectation.

`--out DIR` names a run directory. It is created if missing, a
`manifest.json` is written into it before any trial starts and finalized
afterwards, so interrupted runs leave a record of what was attempted.
Without `--out` results go to stdout and no manifest is written.

Exit codes: 0 on success, 2 for configuration problems (bad config file,
bad flags, violated model assumptions), 3 for runtime failures (including
a failed oracle comparison).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import EventProbabilities
from .errors import BadParameterError, ConfigError, RuntimeFailure
from .graph import validate
from .montecarlo import (
    ExperimentConfig,
    aggregate_json_dict,
    config_from_dict,
    config_hash,
    config_to_dict,
    run_experiment,
    run_trial,
    set_by_path,
    sweep,
    write_aggregate_csv,
    write_trajectory_csv,
)
from .theory import (
    DEFAULT_HORIZON,
    _json_safe,
    expected_second_moment_matrix,
    one_slot_expectation_enumerated,
    theory_report,
)

ORACLE_TOL = 1e-12


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _load_config(args) -> tuple[ExperimentConfig, Path]:
    path = Path(args.config)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise BadParameterError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise BadParameterError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise BadParameterError(f"config {path} must be a JSON object")
    for item in getattr(args, "set", None) or []:
        key, sep, raw_value = item.partition("=")
        if not sep:
            raise BadParameterError(f"--set needs PATH=VALUE, got {item!r}")
        try:
            value = json.loads(raw_value)
        except json.JSONDecodeError:
            value = raw_value
        set_by_path(raw, key.strip(), value)
    if getattr(args, "seed", None) is not None:
        raw["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        raw["trials"] = args.trials
    if getattr(args, "steps", None) is not None:
        raw["steps"] = args.steps
    args.raw_config = raw
    return config_from_dict(raw, base_dir=path.parent), path


def _prepare_run_dir(args, command: str, cfg: ExperimentConfig, cfg_path: Path,
                     outputs: list[str]) -> tuple[Path | None, Path | None]:
    """Create the run directory and write its manifest before any trial runs.

    `outputs` lists the file names (relative to the run directory) the
    command intends to produce. Returns (run_dir, manifest_path), both None
    when the command writes to stdout.
    """
    if not getattr(args, "out", None):
        return None, None
    run_dir = Path(args.out)
    run_dir.mkdir(parents=True, exist_ok=True)
    manifest = run_dir / "manifest.json"
    doc = {
        "command": command,
        "packageVersion": __version__,
        "configPath": str(cfg_path),
        "configHash": config_hash(cfg),
        "seed": cfg.base_seed,
        "config": config_to_dict(cfg),
        "outputs": outputs,
        "startedAt": _now(),
        "finishedAt": None,
    }
    manifest.write_text(json.dumps(doc, indent=2) + "\n")
    return run_dir, manifest


def _finish_manifest(manifest: Path | None) -> None:
    if manifest is None:
        return
    doc = json.loads(manifest.read_text())
    doc["finishedAt"] = _now()
    manifest.write_text(json.dumps(doc, indent=2) + "\n")


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        path.write_text(text if text.endswith("\n") else text + "\n")


def _cmd_simulate(args) -> int:
    cfg, cfg_path = _load_config(args)
    data_name = f"trajectory.{args.format}"
    run_dir, manifest = _prepare_run_dir(args, "simulate", cfg, cfg_path, [data_name])
    trials = [run_trial(cfg, t) for t in range(cfg.trials)]
    target = None if run_dir is None else run_dir / data_name
    if args.format == "csv":
        if target is None:
            buf = io.StringIO()
            w = csv.writer(buf)
            w.writerow(["trial", "k"] + [f"x_{i + 1}" for i in range(cfg.matrix.n)]
                       + ["H", "h", "spread", "L"])
            for tr in trials:
                for state, sample in zip(tr.states, tr.samples):
                    w.writerow([tr.trial, state.k] + [float(v) for v in state.x]
                               + [sample.x_max, sample.x_min, sample.spread,
                                  sample.dispersion])
            sys.stdout.write(buf.getvalue())
        else:
            write_trajectory_csv(trials, cfg.matrix.n, target)
    else:
        doc = {
            "configHash": config_hash(cfg),
            "trials": [
                {
                    "trial": tr.trial,
                    "classification": tr.classification.value,
                    "divergedAt": tr.diverged_at,
                    "rows": [
                        {"k": st.k, "x": [float(v) for v in st.x],
                         "H": sm.x_max, "h": sm.x_min,
                         "spread": sm.spread, "L": sm.dispersion}
                        for st, sm in zip(tr.states, tr.samples)
                    ],
                }
                for tr in trials
            ],
        }
        _emit(json.dumps(_json_safe(doc), indent=2), target)
    _finish_manifest(manifest)
    return 0


def _write_aggregate_rows(fh, result) -> None:
    w = csv.writer(fh)
    w.writerow(["k", "meanL", "varL", "ciL", "meanSpread", "varSpread",
                "ciSpread", "nAgreed", "nDiverged", "nUndecided"])
    for idx, k in enumerate(result.checkpoints):
        w.writerow([k, result.mean_l[idx], result.var_l[idx], result.ci_l[idx],
                    result.mean_spread[idx], result.var_spread[idx],
                    result.ci_spread[idx], result.counts["nAgreed"],
                    result.counts["nDiverged"], result.counts["nUndecided"]])


def _cmd_experiment(args) -> int:
    cfg, cfg_path = _load_config(args)
    data_name = f"aggregate.{args.format}"
    run_dir, manifest = _prepare_run_dir(args, "experiment", cfg, cfg_path, [data_name])
    result = run_experiment(cfg)
    if args.format == "csv":
        if run_dir is None:
            buf = io.StringIO()
            _write_aggregate_rows(buf, result)
            sys.stdout.write(buf.getvalue())
        else:
            write_aggregate_csv(result, run_dir / data_name)
    else:
        _emit(json.dumps(aggregate_json_dict(result), indent=2),
              None if run_dir is None else run_dir / data_name)
    _finish_manifest(manifest)
    return 0


def _cmd_sweep(args) -> int:
    cfg, cfg_path = _load_config(args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise BadParameterError(f"--values must be comma-separated numbers, got {args.values!r}")
    if not values:
        raise BadParameterError("--values is empty")
    summary_name = f"sweep.{args.format}"
    point_dirs = [f"{args.axis}={v!r}" for v in values]
    outputs = [summary_name]
    for d in point_dirs:
        outputs += [f"{d}/aggregate.{args.format}", f"{d}/theory.json"]
    run_dir, manifest = _prepare_run_dir(args, "sweep", cfg, cfg_path, outputs)
    points = sweep(args.raw_config, args.axis, values, base_dir=cfg_path.parent)

    if run_dir is not None:
        for pt, d in zip(points, point_dirs):
            sub = run_dir / d
            sub.mkdir(exist_ok=True)
            if args.format == "csv":
                write_aggregate_csv(pt.result, sub / "aggregate.csv")
            else:
                (sub / "aggregate.json").write_text(
                    json.dumps(aggregate_json_dict(pt.result), indent=2) + "\n")
            (sub / "theory.json").write_text(
                json.dumps(_json_safe(pt.report.to_json_dict()), indent=2) + "\n")

    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["value", "k", "meanL", "varL", "ciL", "meanSpread",
                    "varSpread", "ciSpread", "nAgreed", "nDiverged", "nUndecided"])
        for pt in points:
            r = pt.result
            idx = len(r.checkpoints) - 1
            w.writerow([pt.value, r.checkpoints[idx], r.mean_l[idx], r.var_l[idx],
                        r.ci_l[idx], r.mean_spread[idx], r.var_spread[idx],
                        r.ci_spread[idx], r.counts["nAgreed"],
                        r.counts["nDiverged"], r.counts["nUndecided"]])
        _emit(buf.getvalue(), None if run_dir is None else run_dir / summary_name)
    else:
        doc = {
            "axis": args.axis,
            "points": [
                {
                    "value": pt.value,
                    "configHash": pt.result.config_hash,
                    "counts": pt.result.counts,
                    "final": aggregate_json_dict(pt.result)["rows"][-1],
                    "D0": pt.report.d0,
                    "conditions": [
                        {"id": cid.value, "status": v.status}
                        for cid, v in pt.report.conditions
                    ],
                }
                for pt in points
            ],
        }
        _emit(json.dumps(_json_safe(doc), indent=2),
              None if run_dir is None else run_dir / summary_name)
    _finish_manifest(manifest)
    return 0


def _cmd_check(args) -> int:
    cfg, cfg_path = _load_config(args)
    data_name = f"theory.{args.format}"
    run_dir, manifest = _prepare_run_dir(args, "check", cfg, cfg_path, [data_name])
    report = theory_report(cfg, horizon=args.horizon)
    target = None if run_dir is None else run_dir / data_name
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["id", "status", "claim", "caveats"])
        for cid, v in report.conditions:
            w.writerow([cid.value, v.status, v.detail.get("claim", ""), v.caveats])
        _emit(buf.getvalue(), target)
    else:
        _emit(json.dumps(report.to_json_dict(), indent=2), target)
    _finish_manifest(manifest)
    return 0


def _random_oracle_case(rng: np.random.Generator):
    n = int(rng.integers(3, 5))
    entries = rng.random((n, n))
    entries[rng.random((n, n)) < 0.2] = 0.0
    np.fill_diagonal(entries, 0.0)
    for i in range(n):
        if entries[i].sum() == 0.0:
            entries[i, (i + 1) % n] = 1.0
    entries /= entries.sum(axis=1, keepdims=True)
    matrix = validate(entries)
    w = rng.dirichlet((1.0, 1.0, 1.0))
    probs = EventProbabilities(alpha=float(w[0]), beta=float(w[1]), gamma=float(w[2]))
    t = float(rng.uniform(0.01, 0.99))
    s = float(rng.uniform(0.0, 2.0))
    return matrix, probs, t, s


def _cmd_oracle(args) -> int:
    rng = np.random.default_rng(args.seed)
    cases = []
    if args.config:
        cfg, _ = _load_config(args)
        if cfg.matrix.n > 4:
            raise BadParameterError(
                "oracle enumeration only supports n <= 4 (the outcome space "
                "grows too fast beyond that)")
        if cfg.mode.variant != "symmetric":
            raise BadParameterError(
                "the closed form under test describes coupled updates; "
                "use a symmetric config")
        t = cfg.schedule_t.applied(cfg.k0)
        s = cfg.schedule_s.applied(cfg.k0)
        cases.append((cfg.matrix, cfg.probabilities, t, s))
    else:
        for _ in range(args.draws):
            cases.append(_random_oracle_case(rng))

    max_diff = 0.0
    count = 0
    for matrix, probs, t, s in cases:
        em = expected_second_moment_matrix(matrix, probs, t, s)
        for _ in range(args.states):
            x = rng.normal(0.0, 3.0, matrix.n)
            ref = float(x.mean()) if count % 2 == 0 else float(rng.normal())
            xc = x - ref
            closed = float(xc @ em @ xc)
            brute = one_slot_expectation_enumerated(matrix, probs, t, s, x, ref)
            max_diff = max(max_diff, abs(closed - brute))
            count += 1
    line = (f"oracle: {count} evaluations over {len(cases)} parameter draws, "
            f"max discrepancy {max_diff:.3e}")
    if max_diff <= ORACLE_TOL:
        print(f"{line}: PASS")
        return 0
    print(f"{line}: FAIL (tolerance {ORACLE_TOL:.1e})", file=sys.stderr)
    raise RuntimeFailure(
        f"closed form disagrees with enumeration by {max_diff:.3e}")


def _add_common(p: argparse.ArgumentParser, with_trials: bool = True) -> None:
    p.add_argument("--config", required=True, help="path to a JSON config")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    if with_trials:
        p.add_argument("--trials", type=int, default=None, help="override trial count")
        p.add_argument("--steps", type=int, default=None, help="override step count")
    p.add_argument("--set", action="append", metavar="PATH=VALUE",
                   help="override one config entry by dotted path, e.g. "
                        "schedules.T.value=0.25 (repeatable)")
    p.add_argument("--out", default=None, metavar="DIR",
                   help="run directory for results and manifest (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gossipsim",
        description="simulate randomized gossip with misbehaving nodes and "
                    "check the matching analytic conditions")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="full trajectories with state snapshots")
    _add_common(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("experiment", help="aggregate measures over many trials")
    _add_common(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("sweep", help="repeat an experiment along one config entry")
    _add_common(p)
    p.add_argument("--axis", required=True,
                   help="dotted config path to vary, e.g. schedules.S.value")
    p.add_argument("--values", required=True, help="comma-separated numbers")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("check", help="analytic report for a config")
    _add_common(p, with_trials=False)
    p.add_argument("--horizon", type=int, default=DEFAULT_HORIZON,
                   help="numeric horizon for partial sums and grid searches")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("oracle", help="validate the closed-form one-slot "
                                      "expectation against brute enumeration")
    p.add_argument("--config", default=None,
                   help="optional config whose matrix/weights to check (n <= 4)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--draws", type=int, default=20, help="random parameter draws")
    p.add_argument("--states", type=int, default=100, help="random states per draw")
    p.set_defaults(func=_cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeFailure as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - last-resort CLI boundary
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
