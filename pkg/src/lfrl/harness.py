"""Train / evaluate / plot-data orchestration and file output.

Every CSV starts with a ``# config_hash=<hash> seed=<seed>`` line followed by
a header row.  JSON outputs carry the same two fields.
"""

from __future__ import annotations

import copy
import csv
import json
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import RunConfig
from .controllers import BaselineAgent
from .env import COLLISION, LOG_HEADER, TIME_CAP, DrivingEnv
from .metrics import (
    HEADWAY_FILTER,
    TTC_FILTER,
    EpisodeRecord,
    MetricsReport,
    aggregate_runs,
    episode_report,
    format_table,
)
from .ppo.trainer import config_dict, load_checkpoint, save_checkpoint, train_loop

log = logging.getLogger(__name__)

CURVE_HEADER = ["iter", "steps", "mean_ep_reward", "clip_frac", "value_loss"]
EPISODE_SUMMARY_HEADER = ["episode", "seed", "termination", "survival_time", "major_infractions",
                          "lateral_deviation", "orientation_deviation", "collision", "ttc_min", "headway_median"]


# -- csv helpers ---------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header, rows, config_hash: str, seed) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={config_hash} seed={seed}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path):
    """Return ``(meta, header, rows)``; rows are lists of strings."""
    meta = {}
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            for tok in line[1:].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    meta[k] = v
        elif line:
            body.append(line)
    if not body:
        return meta, [], []
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]


def read_columns(path) -> tuple[dict, dict]:
    """Columns as float arrays; columns holding text stay as string arrays."""
    meta, header, rows = read_csv(path)
    cols = {}
    for i, h in enumerate(header):
        raw = [r[i] for r in rows]
        try:
            cols[h] = np.array([float(x) for x in raw])
        except ValueError:
            cols[h] = np.array(raw)
    return meta, cols


def _write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


# -- episodes ------------------------------------------------------------


@dataclass
class EpisodeResult:
    seed: int
    rows: list
    record: EpisodeRecord
    return_: float


def run_episode(env: DrivingEnv, act, seed) -> EpisodeResult:
    """Roll one episode; ``act(obs, env)`` returns the action."""
    obs = env.reset(seed)
    rows, truth = [], []
    total = 0.0
    done = False
    info = {"reason": "none"}
    while not done:
        obs, _, terminated, truncated, info = env.step(act(obs, env))
        b, tr = info["breakdown"], info["truth"]
        total += b.total
        rows.append(env.log_row(b))
        truth.append({
            "t": env.world.t, "gap": math.nan if tr.gap is None else tr.gap, "dv": tr.dv,
            "v_ego": tr.v_ego, "d_delta": tr.d_delta, "theta_delta": tr.theta_delta,
            "in_drivable": tr.in_drivable,
        })
        done = terminated or truncated
    record = EpisodeRecord.from_rows(truth, env.config.dt, info["reason"])
    return EpisodeResult(seed, rows, record, total)


def baseline_actor(cfg: RunConfig):
    agent = BaselineAgent(cfg.idm, cfg.pd, cfg.vehicle)

    def act(obs, env):
        tr = env.truth()
        gap = math.inf if tr.gap is None else tr.gap
        return agent.act(tr.v_ego, tr.dv, gap, tr.d_delta, tr.theta_delta)

    return act


def policy_actor(policy, deterministic: bool = True, rng=None):
    if deterministic:
        return lambda obs, env: policy.act_deterministic(obs)
    rng = rng if rng is not None else np.random.default_rng(0)
    return lambda obs, env: policy.sample(obs, rng)[0]


def run_episodes(cfg: RunConfig, act, leader: str, n: int, seed0: int) -> list[EpisodeResult]:
    env = DrivingEnv(cfg.env_config(leader), cfg.build_track())
    return [run_episode(env, act, seed0 + i) for i in range(n)]


def is_clean(rec: EpisodeRecord, t_cap: float) -> bool:
    """Full-length episode that never left the drivable area."""
    return rec.termination == TIME_CAP and bool(np.all(rec.in_drivable)) and rec.t[-1] >= t_cap - 1e-9


def validation_score(results: list[EpisodeResult], t_cap: float) -> tuple:
    """Rank by clean episodes, then collisions avoided, then mean reward."""
    clean = int(sum(is_clean(r.record, t_cap) for r in results))
    collisions = int(sum(r.record.termination == COLLISION for r in results))
    return clean, -collisions, float(np.mean([r.return_ for r in results]))


# -- train ---------------------------------------------------------------


def cmd_train(cfg: RunConfig, seeds=None, steps: int | None = None, out=None) -> dict:
    """Train one policy per seed; keep the final and the best-validated checkpoints.

    Returns a summary dict with the per-seed records and the overall best seed.
    """
    seeds = list(cfg.run.seeds if seeds is None else seeds)
    ppo_cfg = cfg.ppo if steps is None else replace(cfg.ppo, total_steps=int(steps))
    cfg = replace(cfg, ppo=ppo_cfg)
    out = Path(out) if out is not None else cfg.out_dir()
    h = cfg.hash()
    env_cfg = cfg.env_config("ou")
    track = cfg.build_track()
    summary = {"config_hash": h, "seeds": {}, "best_seed": None}
    best_overall = None

    for seed in seeds:
        sel = {"score": None, "iter": -1, "policy": None, "critic": None}
        val_rows = []

        def on_iter(state, rec, sel=sel, val_rows=val_rows):
            it = rec["iter"]
            last = it == ppo_cfg.total_steps // ppo_cfg.steps_per_iter - 1
            if cfg.select.every <= 0 or ((it + 1) % cfg.select.every and not last):
                return
            res = run_episodes(cfg, policy_actor(state.policy), "ou", cfg.select.episodes, cfg.select.seed)
            score = validation_score(res, env_cfg.t_cap)
            val_rows.append([it, rec["steps"], *score])
            if sel["score"] is None or score > sel["score"]:
                sel.update(score=score, iter=it, policy=copy.deepcopy(state.policy),
                           critic=copy.deepcopy(state.critic))

        policy, critic, records = train_loop(lambda: DrivingEnv(env_cfg, track), ppo_cfg, seed, on_iter)
        seed_dir = out / "train" / f"seed_{seed}"
        write_csv(seed_dir / "curve.csv", CURVE_HEADER,
                  ([r[k] for k in CURVE_HEADER] for r in records), h, seed)
        write_csv(seed_dir / "validation.csv", ["iter", "steps", "clean", "neg_collisions", "mean_reward"],
                  val_rows, h, seed)
        meta = {"config_hash": h, "seed": seed, "ppo": config_dict(ppo_cfg)}
        save_checkpoint(seed_dir / "checkpoint.json", policy, critic, dict(meta, iter=len(records) - 1))
        if sel["policy"] is None:
            sel.update(score=(0, 0, -math.inf), iter=len(records) - 1, policy=policy, critic=critic)
        save_checkpoint(seed_dir / "best.json", sel["policy"], sel["critic"],
                        dict(meta, iter=sel["iter"], validation=list(sel["score"])))
        summary["seeds"][seed] = {"records": records, "best_iter": sel["iter"], "best_score": sel["score"],
                                  "dir": str(seed_dir)}
        if best_overall is None or sel["score"] > best_overall[0]:
            best_overall = (sel["score"], seed, sel)
        log.info("seed %s done: best iter %d score %s", seed, sel["iter"], sel["score"])

    score, seed, sel = best_overall
    save_checkpoint(out / "train" / "best_checkpoint.json", sel["policy"], sel["critic"],
                    {"config_hash": h, "seed": seed, "iter": sel["iter"], "validation": list(score),
                     "ppo": config_dict(ppo_cfg)})
    summary["best_seed"] = seed
    summary["best_checkpoint"] = str(out / "train" / "best_checkpoint.json")
    return summary


# -- eval ----------------------------------------------------------------


def episode_summary_row(i: int, res: EpisodeResult, l_leader: float, t_cap: float) -> list:
    rep, ttc, hw = episode_report(res.record, l_leader, t_cap)
    return [i, res.seed, res.record.termination, rep.survival_time, rep.major_infractions,
            rep.lateral_deviation, rep.orientation_deviation, rep.collisions,
            float(ttc.min()) if ttc.size else math.nan, float(np.median(hw)) if hw.size else math.nan]


def evaluate(cfg: RunConfig, agent: str, leader: str, policy=None, episodes: int | None = None,
             seed0: int | None = None) -> tuple[MetricsReport, list[EpisodeResult]]:
    n = cfg.eval.episodes if episodes is None else episodes
    seed0 = cfg.eval.seed if seed0 is None else seed0
    if agent == "baseline":
        act = baseline_actor(cfg)
    else:
        if policy is None:
            raise ValueError("the drl agent needs a policy checkpoint")
        act = policy_actor(policy, cfg.eval.deterministic, np.random.default_rng(seed0))
    results = run_episodes(cfg, act, leader, n, seed0)
    report = aggregate_runs([r.record for r in results], cfg.vehicle.body_length, cfg.env.t_cap)
    return report, results


def cmd_eval(cfg: RunConfig, agent: str | None = None, leader: str | None = None, episodes: int | None = None,
             checkpoint=None, seed: int | None = None, out=None) -> dict:
    """Evaluate one or both followers; write logs, per-episode summary, report and table."""
    agent = agent or cfg.eval.agent
    leader = leader or cfg.eval.leader
    seed0 = cfg.eval.seed if seed is None else seed
    out = Path(out) if out is not None else cfg.out_dir()
    h = cfg.hash()
    agents = ["baseline", "drl"] if agent == "both" else [agent]
    policy = None
    if "drl" in agents:
        ck = checkpoint or cfg.eval.checkpoint
        if not ck:
            raise ValueError("--checkpoint is required for the drl agent")
        policy, _, _ = load_checkpoint(ck, obs_dim=DrivingEnv.obs_dim, act_dim=2)
    reports = {}
    for name in agents:
        report, results = evaluate(cfg, name, leader, policy if name == "drl" else None, episodes, seed0)
        d = out / "eval" / f"{name}_{leader}"
        for i, res in enumerate(results):
            write_csv(d / f"episode_{i:03d}.csv", LOG_HEADER, res.rows, h, res.seed)
        write_csv(d / "episodes.csv", EPISODE_SUMMARY_HEADER,
                  [episode_summary_row(i, r, cfg.vehicle.body_length, cfg.env.t_cap) for i, r in enumerate(results)],
                  h, seed0)
        _write_json(d / "report.json", {"config_hash": h, "seed": seed0, "agent": name, "leader": leader,
                                        "report": report.to_dict()})
        reports[name] = report
    table = format_table(reports)
    tpath = out / "eval" / f"table_{'_'.join(agents)}_{leader}.txt"
    tpath.write_text(f"# config_hash={h} seed={seed0}\n" + table)
    return {"reports": reports, "table": table, "dir": str(out / "eval")}


# -- plot data -----------------------------------------------------------


def histogram_rows(values, width: float, upper: float) -> list:
    """``[lo, hi, count]`` rows covering ``[0, upper)``; empty input gives no rows."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return []
    n_bins = int(math.ceil(upper / width - 1e-9))
    edges = np.arange(n_bins + 1) * width
    counts, _ = np.histogram(values, bins=edges)
    return [[float(edges[i]), float(edges[i + 1]), int(counts[i])] for i in range(n_bins)]


def samples_from_log(cols: dict, l_leader: float):
    """Filtered TTC and headway samples from an episode log's columns."""
    gap, ve, vl = cols["gap"], cols["ego_v"], cols["lead_v"]
    dv = ve - vl
    has = np.isfinite(gap)
    closing = has & (dv > 0) & (gap > 0)
    ttc = gap[closing] / dv[closing]
    moving = has & (ve > 1e-3)
    hw = (gap[moving] + l_leader) / ve[moving]
    return ttc[ttc < TTC_FILTER], hw[hw < HEADWAY_FILTER]


def aggregate_curves(curves: list[dict]) -> list:
    """Per-iteration mean and population std of ``mean_ep_reward`` across seeds."""
    if not curves:
        return []
    n = min(len(c["iter"]) for c in curves)
    rows = []
    for i in range(n):
        vals = np.array([c["mean_ep_reward"][i] for c in curves])
        ok = vals[np.isfinite(vals)]
        mean = float(ok.mean()) if ok.size else math.nan
        std = float(ok.std()) if ok.size else math.nan
        rows.append([int(curves[0]["iter"][i]), int(curves[0]["steps"][i]), mean, std, int(ok.size)])
    return rows


def _collect(paths, name):
    found = []
    for p in map(Path, paths):
        if p.is_dir():
            found.extend(sorted(p.rglob(name)))
        elif p.match(name):
            found.append(p)
    return found


def cmd_plot_data(cfg: RunConfig, inputs, out=None) -> dict:
    """Speed traces, TTC/headway histograms and the multi-seed learning curve."""
    out = Path(out) if out is not None else cfg.out_dir()
    h = cfg.hash()
    d = out / "plot"
    logs = _collect(inputs, "episode_*.csv")
    curves = _collect(inputs, "curve.csv")
    missing = [str(p) for p in map(Path, inputs) if not p.exists()]
    if missing:
        raise FileNotFoundError(f"input not found: {', '.join(missing)}")
    ttcs, hws = [], []
    written = []
    for p in logs:
        meta, cols = read_columns(p)
        tag = f"{p.parent.name}_{p.stem}"
        written.append(write_csv(d / f"speed_{tag}.csv", ["t", "leader_v", "ego_v"],
                                 zip(cols["t"], cols["lead_v"], cols["ego_v"]), h, meta.get("seed", "")))
        ttc, hw = samples_from_log(cols, cfg.vehicle.body_length)
        ttcs.append(ttc)
        hws.append(hw)
    ttc = np.concatenate(ttcs) if ttcs else np.empty(0)
    hw = np.concatenate(hws) if hws else np.empty(0)
    written.append(write_csv(d / "ttc_hist.csv", ["bin_lo", "bin_hi", "count"],
                             histogram_rows(ttc, cfg.plot.ttc_bin, TTC_FILTER), h, ""))
    written.append(write_csv(d / "headway_hist.csv", ["bin_lo", "bin_hi", "count"],
                             histogram_rows(hw, cfg.plot.headway_bin, HEADWAY_FILTER), h, ""))
    curve_cols = [read_columns(p)[1] for p in curves]
    seeds = ",".join(read_csv(p)[0].get("seed", "?") for p in curves)
    written.append(write_csv(d / "learning_curve.csv", ["iter", "steps", "mean", "std", "n_seeds"],
                             aggregate_curves(curve_cols), h, seeds))
    return {"files": [str(p) for p in written], "ttc_samples": int(ttc.size), "headway_samples": int(hw.size)}
