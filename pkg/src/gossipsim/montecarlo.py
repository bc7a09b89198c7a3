"""Monte Carlo experiments over many independent trajectories.

Reproducibility contract: trial t of an experiment with seed s draws from
`Philox(key=[s, t])`, consuming uniforms in the fixed per-slot order defined
in `dynamics` (plus one optional vector of initial values before the first
slot). The scalar path (`run_trial`) and the vectorized engine
(`run_trials`) follow the same consumption order and use the same arithmetic
expressions, so their trajectories and measures agree bit for bit; the
vectorized engine is what `run_experiment` uses. Per-trial streams also make
results independent of chunking and of the GOSSIP_THREADS thread count.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from copy import deepcopy
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import (
    OVERFLOW_LIMIT,
    S_CLIP,
    T_CLIP,
    EventProbabilities,
    Schedule,
    UpdateMode,
    run_trajectory,
)
from .errors import BadAxisError, BadParameterError
from .graph import SelectionMatrix, generate, import_matrix_csv, import_matrix_json, \
    induced_graph, is_weakly_connected, validate
from .metrics import Classification, classify, measure
from .theory import _json_safe, theory_report

__all__ = [
    "InitialState",
    "ExperimentConfig",
    "TrialResult",
    "TrialMatrices",
    "ExperimentResult",
    "SweepPoint",
    "default_checkpoints",
    "config_from_dict",
    "config_to_dict",
    "config_hash",
    "run_trial",
    "run_trials",
    "run_experiment",
    "sweep",
    "set_by_path",
    "write_aggregate_csv",
    "aggregate_json_dict",
    "write_trajectory_csv",
    "THREADS_ENV",
]

THREADS_ENV = "GOSSIP_THREADS"
CHUNK_TRIALS = 256
STEP_BLOCK = 1024
HEAVY_TAIL_KURTOSIS = 10.0
DEFAULT_EPS_AGREE = 1e-6
BIG_M_FACTOR = 1e6


@dataclass(frozen=True)
class InitialState:
    """How each trial's starting vector is produced.

    kind "ramp": x_i = i for i = 1..n (deterministic).
    kind "explicit": the given values (deterministic).
    kind "uniform": i.i.d. uniform on [low, high); consumes n draws from the
    trial's stream before the first slot.
    """

    kind: str
    low: float = 0.0
    high: float = 1.0
    values: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind == "uniform":
            for name, v in (("low", self.low), ("high", self.high)):
                if not math.isfinite(v):
                    raise BadParameterError(f"initial {name} must be finite, got {v}")
            if self.high < self.low:
                raise BadParameterError("initial high must be >= low")
        elif self.kind == "explicit":
            if not self.values:
                raise BadParameterError("explicit initial state needs values")
            if any(not math.isfinite(v) for v in self.values):
                raise BadParameterError("initial values must be finite")
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        elif self.kind != "ramp":
            raise BadParameterError(f"unknown initial state kind {self.kind!r}")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "ramp":
            return np.arange(1, n + 1, dtype=float)
        if self.kind == "explicit":
            return np.array(self.values, dtype=float)
        return self.low + (self.high - self.low) * rng.random(n)

    def spread_bound(self, n: int) -> float:
        if self.kind == "explicit":
            return max(self.values) - min(self.values)
        if self.kind == "ramp":
            return float(n - 1)
        return self.high - self.low


def default_checkpoints(k0: int, steps: int) -> tuple[int, ...]:
    """Slot indices {0, 1, 2, 4, ...} up to and including the last slot,
    shifted by k0. Geometric spacing keeps long runs cheap to record."""
    pts = {0, steps}
    v = 1
    while v < steps:
        pts.add(v)
        v *= 2
    return tuple(sorted(k0 + p for p in pts))


@dataclass
class ExperimentConfig:
    """Fully resolved description of one experiment.

    Construction validates everything up front: the matrix must induce a
    weakly connected graph (assumption A1), checkpoints must fall in
    [k0, k0 + steps], the seed must fit the counter-based RNG key. Optional
    fields are resolved to concrete values so the config hash pins down the
    exact run.
    """

    matrix: SelectionMatrix
    mode: UpdateMode
    probabilities: EventProbabilities
    schedule_t: Schedule
    schedule_s: Schedule
    initial: InitialState
    steps: int
    trials: int = 1
    k0: int = 0
    base_seed: int = 0
    checkpoints: tuple[int, ...] | None = None
    eps_agree: float = DEFAULT_EPS_AGREE
    big_m: float | None = None

    def __post_init__(self) -> None:
        if not is_weakly_connected(induced_graph(self.matrix)):
            raise BadParameterError(
                "selection matrix must induce a weakly connected graph (assumption A1)")
        if not isinstance(self.steps, (int, np.integer)) or self.steps < 0:
            raise BadParameterError(f"steps must be a nonnegative integer, got {self.steps}")
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise BadParameterError(f"trials must be a positive integer, got {self.trials}")
        if not isinstance(self.k0, (int, np.integer)):
            raise BadParameterError(f"k0 must be an integer, got {self.k0}")
        if not isinstance(self.base_seed, (int, np.integer)) \
                or not 0 <= self.base_seed < 2 ** 64:
            raise BadParameterError("seed must be an integer in [0, 2^64)")
        if self.initial.kind == "explicit" and len(self.initial.values) != self.matrix.n:
            raise BadParameterError(
                f"initial values have length {len(self.initial.values)}, need {self.matrix.n}")
        if not self.eps_agree > 0.0:
            raise BadParameterError(f"epsAgree must be positive, got {self.eps_agree}")

        if self.checkpoints is None:
            self.checkpoints = default_checkpoints(self.k0, self.steps)
        else:
            cps = sorted({int(c) for c in self.checkpoints} | {self.k0, self.k0 + self.steps})
            for c in cps:
                if not self.k0 <= c <= self.k0 + self.steps:
                    raise BadParameterError(
                        f"checkpoint {c} outside [{self.k0}, {self.k0 + self.steps}]")
            self.checkpoints = tuple(cps)

        if self.big_m is None:
            bound = self.initial.spread_bound(self.matrix.n)
            self.big_m = BIG_M_FACTOR * bound if bound > 0.0 else BIG_M_FACTOR
        if not self.big_m > 0.0:
            raise BadParameterError(f"bigM must be positive, got {self.big_m}")

        self.steps = int(self.steps)
        self.trials = int(self.trials)
        self.k0 = int(self.k0)
        self.base_seed = int(self.base_seed)


# ---------------------------------------------------------------------------
# config (de)serialization
# ---------------------------------------------------------------------------

_GENERATOR_KEYS = {"p": "p", "m": "m", "kNn": "k_nn", "pRewire": "p_rewire"}


def _matrix_from_dict(d: dict, base_dir: Path | None) -> SelectionMatrix:
    kind = d.get("kind", "explicit")
    if kind == "explicit":
        if "rows" not in d:
            raise BadParameterError("matrix kind 'explicit' needs 'rows'")
        return validate(d["rows"])
    if kind == "file":
        path = Path(d["path"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        if path.suffix.lower() == ".json":
            return import_matrix_json(path)
        return import_matrix_csv(path)
    params = {}
    for key, kwarg in _GENERATOR_KEYS.items():
        if key in d:
            params[kwarg] = d[key]
    known = {"kind", "n", "seed"} | set(_GENERATOR_KEYS)
    unknown = set(d) - known
    if unknown:
        raise BadParameterError(f"unknown matrix keys: {sorted(unknown)}")
    return generate(kind, d["n"], seed=d.get("seed"), **params)


def _schedule_from_dict(d: dict, clip: tuple[float, float]) -> Schedule:
    kind = d.get("kind", "constant")
    if kind == "constant":
        return Schedule.constant(d["value"], clip=clip)
    if kind == "explicit":
        return Schedule.explicit(d.get("values", ()), d["tail"], clip=clip)
    if kind == "power":
        return Schedule.power(d["c"], d["p"], clip=clip)
    if kind == "geometric":
        return Schedule.geometric(d["c"], d["r"], clip=clip)
    raise BadParameterError(f"unknown schedule kind {kind!r}")


def _schedule_to_dict(s: Schedule) -> dict:
    if s.kind == "constant":
        return {"kind": "constant", "value": s.value}
    if s.kind == "explicit":
        return {"kind": "explicit", "values": list(s.values), "tail": s.tail_value}
    if s.kind == "power":
        return {"kind": "power", "c": s.c, "p": s.p}
    return {"kind": "geometric", "c": s.c, "r": s.r}


def _initial_from_dict(d: dict) -> InitialState:
    kind = d.get("kind", "ramp")
    if kind == "explicit":
        return InitialState(kind="explicit", values=tuple(d["values"]))
    if kind == "uniform":
        return InitialState(kind="uniform", low=d.get("low", 0.0), high=d.get("high", 1.0))
    return InitialState(kind=kind)


_CONFIG_KEYS = {
    "matrix", "mode", "probabilities", "schedules", "initial",
    "steps", "trials", "k0", "seed", "checkpoints", "epsAgree", "bigM",
}


def config_from_dict(d: dict, base_dir: str | Path | None = None) -> ExperimentConfig:
    """Build a config from its JSON form. Unknown keys are rejected so typos
    fail loudly instead of silently running the defaults."""
    unknown = set(d) - _CONFIG_KEYS
    if unknown:
        raise BadParameterError(f"unknown config keys: {sorted(unknown)}")
    for required in ("matrix", "probabilities", "schedules", "steps"):
        if required not in d:
            raise BadParameterError(f"config is missing {required!r}")
    sched_d = d["schedules"]
    if not isinstance(sched_d, dict) or "T" not in sched_d or "S" not in sched_d:
        raise BadParameterError("config 'schedules' needs both 'T' and 'S' entries")
    base = Path(base_dir) if base_dir is not None else None
    mode_d = d.get("mode", {})
    mode = UpdateMode(variant=mode_d.get("variant", "symmetric"),
                      active_rule=mode_d.get("activeRule", "uniform"))
    probs_d = d["probabilities"]
    probs = EventProbabilities(alpha=probs_d.get("alpha", 0.0),
                               beta=probs_d.get("beta", 0.0),
                               gamma=probs_d.get("gamma", 0.0))
    cps = d.get("checkpoints")
    return ExperimentConfig(
        matrix=_matrix_from_dict(d["matrix"], base),
        mode=mode,
        probabilities=probs,
        schedule_t=_schedule_from_dict(sched_d["T"], T_CLIP),
        schedule_s=_schedule_from_dict(sched_d["S"], S_CLIP),
        initial=_initial_from_dict(d.get("initial", {"kind": "ramp"})),
        steps=d["steps"],
        trials=d.get("trials", 1),
        k0=d.get("k0", 0),
        base_seed=d.get("seed", 0),
        checkpoints=None if cps is None else tuple(cps),
        eps_agree=d.get("epsAgree", DEFAULT_EPS_AGREE),
        big_m=d.get("bigM"),
    )


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Canonical resolved form: inline matrix rows, resolved checkpoints and
    thresholds. Feeding this back to `config_from_dict` reproduces the run."""
    mode: dict = {"variant": cfg.mode.variant}
    if cfg.mode.variant == "asymmetric":
        mode["activeRule"] = cfg.mode.active_rule
    initial: dict = {"kind": cfg.initial.kind}
    if cfg.initial.kind == "explicit":
        initial["values"] = list(cfg.initial.values)
    elif cfg.initial.kind == "uniform":
        initial["low"] = cfg.initial.low
        initial["high"] = cfg.initial.high
    return {
        "matrix": {"kind": "explicit", "rows": cfg.matrix.entries.tolist()},
        "mode": mode,
        "probabilities": {"alpha": cfg.probabilities.alpha,
                          "beta": cfg.probabilities.beta,
                          "gamma": cfg.probabilities.gamma},
        "schedules": {"T": _schedule_to_dict(cfg.schedule_t),
                      "S": _schedule_to_dict(cfg.schedule_s)},
        "initial": initial,
        "steps": cfg.steps,
        "trials": cfg.trials,
        "k0": cfg.k0,
        "seed": cfg.base_seed,
        "checkpoints": list(cfg.checkpoints),
        "epsAgree": cfg.eps_agree,
        "bigM": cfg.big_m,
    }


def config_hash(cfg: ExperimentConfig) -> str:
    """64-bit FNV-1a over the canonical JSON form, as 16 hex digits."""
    blob = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    h = 0xCBF29CE484222325
    for byte in blob.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


# ---------------------------------------------------------------------------
# scalar reference path
# ---------------------------------------------------------------------------

def _trial_rng(base_seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[base_seed, trial]))


@dataclass
class TrialResult:
    trial: int
    states: list
    samples: list
    classification: Classification
    diverged_at: int | None
    clipped_slots: int


def run_trial(config: ExperimentConfig, trial: int) -> TrialResult:
    """Run one trial on the scalar path, with full state snapshots."""
    rng = _trial_rng(config.base_seed, trial)
    x0 = config.initial.sample(config.matrix.n, rng)
    traj = run_trajectory(config.matrix, config.mode, config.probabilities,
                          config.schedule_t, config.schedule_s, x0,
                          config.k0, config.steps, rng,
                          checkpoints=config.checkpoints)
    reference = float(x0.mean())
    samples = [measure(st.x, st.k, reference) for st in traj.states]
    cls = classify(samples, config.eps_agree, config.big_m, nonfinite=traj.diverged)
    return TrialResult(trial=trial, states=traj.states, samples=samples,
                       classification=cls, diverged_at=traj.diverged_at,
                       clipped_slots=traj.clipped_slots)


# ---------------------------------------------------------------------------
# vectorized engine
# ---------------------------------------------------------------------------

@dataclass
class TrialMatrices:
    """Per-trial, per-checkpoint measures for a whole experiment."""

    checkpoints: tuple[int, ...]
    dispersion: np.ndarray  # (trials, checkpoints)
    spread: np.ndarray      # (trials, checkpoints)
    diverged_at: np.ndarray  # (trials,), -1 when the state stayed finite


def _simulate_chunk(cfg: ExperimentConfig, lo: int, hi: int,
                    l_out: np.ndarray, s_out: np.ndarray,
                    div_out: np.ndarray) -> None:
    """Advance trials [lo, hi) together, one slot at a time across the chunk.

    Mirrors the scalar path exactly: same per-trial streams, same consumption
    order, same update expressions, same freeze-on-overflow semantics.
    """
    n = cfg.matrix.n
    m = hi - lo
    cps = cfg.checkpoints
    rngs = [_trial_rng(cfg.base_seed, t) for t in range(lo, hi)]
    x = np.empty((m, n), dtype=float)
    for r in range(m):
        x[r] = cfg.initial.sample(n, rngs[r])
    refs = x.mean(axis=1)

    cdfs = cfg.matrix.row_cdfs()
    thr = cfg.probabilities.thresholds()
    d = cfg.mode.draws_per_slot
    symmetric = cfg.mode.variant == "symmetric"
    rule = cfg.mode.active_rule

    alive = np.ones(m, dtype=bool)
    alive_idx = np.arange(m)
    diverged_at = np.full(m, -1, dtype=np.int64)

    ci = 0

    def record() -> None:
        l_out[lo:hi, ci] = ((x - refs[:, None]) ** 2).sum(axis=1)
        s_out[lo:hi, ci] = x.max(axis=1) - x.min(axis=1)

    if cps[ci] == cfg.k0:
        record()
        ci += 1

    k = cfg.k0
    end = cfg.k0 + cfg.steps
    while k < end:
        b = min(STEP_BLOCK, end - k)
        u = np.empty((m, b, d))
        for r in alive_idx:
            u[r] = rngs[r].random((b, d))
        t_vals = [cfg.schedule_t.applied(kk) for kk in range(k, k + b)]
        s_vals = [cfg.schedule_s.applied(kk) for kk in range(k, k + b)]
        for step in range(b):
            kk = k + step
            if alive_idx.size:
                ua = u[alive_idx, step, :]
                t = t_vals[step]
                s = s_vals[step]
                i = np.minimum((ua[:, 0] * n).astype(np.int64), n - 1)
                j = (cdfs[i] <= ua[:, 1, None]).sum(axis=1)
                e = (ua[:, 2] >= thr[0]).astype(np.int64) \
                    + (ua[:, 2] >= thr[1]).astype(np.int64)
                xi = x[alive_idx, i]
                xj = x[alive_idx, j]
                with np.errstate(over="ignore", invalid="ignore"):
                    att_i = (1.0 - t) * xi + t * xj
                    rep_i = (1.0 + s) * xi - s * xj
                    att_j = (1.0 - t) * xj + t * xi
                    rep_j = (1.0 + s) * xj - s * xi
                if symmetric:
                    e_i = e
                    e_j = e
                else:
                    if rule == "initiator":
                        active_i = np.ones(alive_idx.size, dtype=bool)
                    elif rule == "responder":
                        active_i = np.zeros(alive_idx.size, dtype=bool)
                    else:
                        active_i = ua[:, 3] < 0.5
                    e_i = np.where(active_i, e, 1)
                    e_j = np.where(active_i, 1, e)
                new_i = np.where(e_i == 0, att_i, np.where(e_i == 2, rep_i, xi))
                new_j = np.where(e_j == 0, att_j, np.where(e_j == 2, rep_j, xj))
                ok = (np.abs(new_i) <= OVERFLOW_LIMIT) & (np.abs(new_j) <= OVERFLOW_LIMIT)
                if ok.all():
                    x[alive_idx, i] = new_i
                    x[alive_idx, j] = new_j
                else:
                    good = alive_idx[ok]
                    x[good, i[ok]] = new_i[ok]
                    x[good, j[ok]] = new_j[ok]
                    bad = alive_idx[~ok]
                    diverged_at[bad] = kk + 1
                    alive[bad] = False
                    alive_idx = np.nonzero(alive)[0]
            if ci < len(cps) and kk + 1 == cps[ci]:
                record()
                ci += 1
        k += b

    div_out[lo:hi] = diverged_at


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return 1
    try:
        count = int(raw)
    except ValueError:
        raise BadParameterError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if count < 1:
        raise BadParameterError(f"{THREADS_ENV} must be >= 1, got {count}")
    return count


def run_trials(config: ExperimentConfig) -> TrialMatrices:
    """Run every trial on the vectorized engine.

    Trials are split into fixed chunks; each chunk writes disjoint row slices
    of preallocated result arrays, so the outcome is identical whether chunks
    run sequentially or on the GOSSIP_THREADS thread pool.
    """
    trials = config.trials
    ncp = len(config.checkpoints)
    l_mat = np.empty((trials, ncp))
    s_mat = np.empty((trials, ncp))
    div = np.empty(trials, dtype=np.int64)
    bounds = [(lo, min(lo + CHUNK_TRIALS, trials))
              for lo in range(0, trials, CHUNK_TRIALS)]
    threads = _thread_count()
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda be: _simulate_chunk(config, be[0], be[1],
                                                     l_mat, s_mat, div), bounds))
    else:
        for lo, hi in bounds:
            _simulate_chunk(config, lo, hi, l_mat, s_mat, div)
    return TrialMatrices(checkpoints=config.checkpoints, dispersion=l_mat,
                         spread=s_mat, diverged_at=div)


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------

@dataclass
class ExperimentResult:
    config_hash: str
    checkpoints: tuple[int, ...]
    trials: int
    mean_l: np.ndarray
    var_l: np.ndarray
    ci_l: np.ndarray
    mean_spread: np.ndarray
    var_spread: np.ndarray
    ci_spread: np.ndarray
    counts: dict
    classifications: list
    diverged_at: np.ndarray
    heavy_tail_checkpoints: list


def classify_trials(config: ExperimentConfig, mats: TrialMatrices) -> list[Classification]:
    """Vectorized version of `metrics.classify`, same comparisons."""
    if not (config.big_m > mats.spread[:, 0]).all():
        worst = float(mats.spread[:, 0].max())
        raise BadParameterError(
            f"big_m ({config.big_m}) must exceed the initial spread ({worst})")
    diverged = (mats.diverged_at >= 0) | (mats.spread > config.big_m).any(axis=1)
    agreed = ~diverged & (mats.spread[:, -1] < config.eps_agree)
    out = []
    for div, agr in zip(diverged, agreed):
        if div:
            out.append(Classification.DIVERGED)
        elif agr:
            out.append(Classification.AGREED)
        else:
            out.append(Classification.UNDECIDED)
    return out


def _excess_kurtosis(columns: np.ndarray) -> np.ndarray:
    centered = columns - columns.mean(axis=0)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        m2 = (centered ** 2).mean(axis=0)
        m4 = (centered ** 4).mean(axis=0)
        kurt = np.where(m2 > 0.0, m4 / np.where(m2 > 0.0, m2, 1.0) ** 2 - 3.0, 0.0)
    return np.where(np.isfinite(kurt), kurt, np.inf)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    mats = run_trials(config)
    classifications = classify_trials(config, mats)
    counts = {
        "nAgreed": sum(1 for c in classifications if c is Classification.AGREED),
        "nDiverged": sum(1 for c in classifications if c is Classification.DIVERGED),
        "nUndecided": sum(1 for c in classifications if c is Classification.UNDECIDED),
    }
    trials = config.trials

    def stats(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        with np.errstate(over="ignore", invalid="ignore"):
            mean = matrix.mean(axis=0)
            var = matrix.var(axis=0, ddof=1) if trials > 1 else np.zeros(matrix.shape[1])
            ci = 1.96 * np.sqrt(var / trials)
        return mean, var, ci

    mean_l, var_l, ci_l = stats(mats.dispersion)
    mean_s, var_s, ci_s = stats(mats.spread)
    kurt = _excess_kurtosis(mats.dispersion) if trials > 3 else np.zeros(len(config.checkpoints))
    heavy = [int(k) for k, flag in zip(config.checkpoints, kurt > HEAVY_TAIL_KURTOSIS) if flag]
    return ExperimentResult(
        config_hash=config_hash(config),
        checkpoints=config.checkpoints,
        trials=trials,
        mean_l=mean_l, var_l=var_l, ci_l=ci_l,
        mean_spread=mean_s, var_spread=var_s, ci_spread=ci_s,
        counts=counts,
        classifications=classifications,
        diverged_at=mats.diverged_at,
        heavy_tail_checkpoints=heavy,
    )


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

@dataclass
class SweepPoint:
    value: float
    result: ExperimentResult
    report: object  # TheoryReport


def set_by_path(d: dict, path: str, value) -> None:
    """Set a dotted path like "schedules.S.value" inside a config dict.

    Every component except the last must already exist and be an object; the
    final key may be new (that is how optional keys get switched on).
    """
    parts = path.split(".")
    if not path or any(p == "" for p in parts):
        raise BadAxisError(f"bad config path {path!r}")
    cur = d
    for p in parts[:-1]:
        if not isinstance(cur, dict) or p not in cur:
            raise BadAxisError(f"config path {path!r} not found")
        cur = cur[p]
    if not isinstance(cur, dict):
        raise BadAxisError(f"config path {path!r} does not point into an object")
    cur[parts[-1]] = value


def sweep(config_dict: dict, axis: str, values, horizon: int | None = None,
          base_dir: str | Path | None = None) -> list[SweepPoint]:
    """Re-run an experiment for each value of one numeric config entry.

    The seed is left untouched, so every sweep point uses common random
    numbers and differences across points are not noise re-draws. Each point
    also carries the analytic report for its config.
    """
    points = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise BadAxisError(f"sweep values must be finite numbers, got {v!r}")
        d = deepcopy(config_dict)
        set_by_path(d, axis, v)
        cfg = config_from_dict(d, base_dir=base_dir)
        result = run_experiment(cfg)
        report = theory_report(cfg) if horizon is None else theory_report(cfg, horizon)
        points.append(SweepPoint(value=float(v), result=result, report=report))
    return points


# ---------------------------------------------------------------------------
# output writers
# ---------------------------------------------------------------------------

_AGG_COLUMNS = ["k", "meanL", "varL", "ciL", "meanSpread", "varSpread",
                "ciSpread", "nAgreed", "nDiverged", "nUndecided"]


def write_aggregate_csv(result: ExperimentResult, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_AGG_COLUMNS)
        for idx, k in enumerate(result.checkpoints):
            w.writerow([
                k,
                result.mean_l[idx], result.var_l[idx], result.ci_l[idx],
                result.mean_spread[idx], result.var_spread[idx], result.ci_spread[idx],
                result.counts["nAgreed"], result.counts["nDiverged"],
                result.counts["nUndecided"],
            ])


def aggregate_json_dict(result: ExperimentResult) -> dict:
    rows = []
    for idx, k in enumerate(result.checkpoints):
        rows.append({
            "k": int(k),
            "meanL": result.mean_l[idx],
            "varL": result.var_l[idx],
            "ciL": result.ci_l[idx],
            "meanSpread": result.mean_spread[idx],
            "varSpread": result.var_spread[idx],
            "ciSpread": result.ci_spread[idx],
        })
    return _json_safe({
        "configHash": result.config_hash,
        "trials": result.trials,
        "counts": result.counts,
        "heavyTailCheckpoints": result.heavy_tail_checkpoints,
        "rows": rows,
    })


def write_trajectory_csv(trials: list[TrialResult], n: int, path: str | Path) -> None:
    header = ["trial", "k"] + [f"x_{i + 1}" for i in range(n)] \
        + ["H", "h", "spread", "L"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for tr in trials:
            for state, sample in zip(tr.states, tr.samples):
                w.writerow([tr.trial, state.k] + [float(v) for v in state.x]
                           + [sample.x_max, sample.x_min, sample.spread,
                              sample.dispersion])
