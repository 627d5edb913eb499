"""Surrogate-safety and lane-keeping evaluation metrics."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import EmptySeries
from .reward import EPS_V

TTC_FILTER = 10.0
HEADWAY_FILTER = 5.0


@dataclass
class EpisodeRecord:
    """Per-step ground truth for one episode (rows are post-step states)."""

    t: np.ndarray
    gap: np.ndarray
    dv: np.ndarray
    v_ego: np.ndarray
    d_delta: np.ndarray
    theta_delta: np.ndarray
    in_drivable: np.ndarray
    dt: float
    termination: str = "none"

    def __post_init__(self):
        n = len(self.t)
        for name in ("gap", "dv", "v_ego", "d_delta", "theta_delta", "in_drivable"):
            arr = np.asarray(getattr(self, name))
            if len(arr) != n:
                raise ValueError(f"EpisodeRecord.{name} has length {len(arr)}, expected {n}")
            setattr(self, name, arr)
        self.t = np.asarray(self.t, dtype=float)

    @classmethod
    def from_rows(cls, rows, dt, termination="none"):
        """Build from dict rows with keys matching the field names."""
        cols = {k: np.array([r[k] for r in rows]) for k in ("t", "gap", "dv", "v_ego", "d_delta", "theta_delta", "in_drivable")}
        return cls(dt=dt, termination=termination, **cols)


@dataclass
class SummaryStats:
    min: float
    mean: float
    median: float
    std: float
    max: float
    n: int


@dataclass
class MetricsReport:
    ttc: SummaryStats | None
    headway: SummaryStats | None
    survival_time: float
    lateral_deviation: float
    orientation_deviation: float
    major_infractions: float
    episodes: int = 1
    collisions: int = 0
    meta: dict = field(default_factory=lambda: {"std": "population", "ttc_filter_s": TTC_FILTER,
                                                 "headway_filter_s": HEADWAY_FILTER, "order": "filter-then-stat"})

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, **kw)


def ttc_headway_series(record: EpisodeRecord, l_leader: float, filtered: bool = True):
    """TTC where the gap is closing and headway where the ego moves.

    With ``filtered`` (default) only TTC < 10 s and headway < 5 s are kept.
    Steps without a leader (NaN gap) are skipped.
    """
    gap, dv, v = record.gap.astype(float), record.dv.astype(float), record.v_ego.astype(float)
    has = np.isfinite(gap)
    closing = has & (dv > 0) & (gap > 0)
    ttc = gap[closing] / dv[closing]
    moving = has & (v > EPS_V)
    hw = (gap[moving] + l_leader) / v[moving]
    if filtered:
        ttc = ttc[ttc < TTC_FILTER]
        hw = hw[hw < HEADWAY_FILTER]
    return ttc, hw


def summary_stats(series) -> SummaryStats:
    x = np.asarray(series, dtype=float)
    if x.size == 0:
        raise EmptySeries("summary statistics of an empty series")
    return SummaryStats(float(x.min()), float(x.mean()), float(np.median(x)), float(x.std()), float(x.max()), int(x.size))


def deviation_integrals(record: EpisodeRecord) -> tuple[float, float]:
    """Rectangle-rule integrals of |d_delta| and |theta_delta| over the episode."""
    return (float(np.sum(np.abs(record.d_delta)) * record.dt),
            float(np.sum(np.abs(record.theta_delta)) * record.dt))


def infractions_and_survival(record: EpisodeRecord, t_cap: float = 50.0) -> tuple[float, float]:
    outside = int(np.count_nonzero(~record.in_drivable.astype(bool)))
    i_m = outside * record.dt
    t_s = float(record.t[-1]) if len(record.t) else 0.0
    return i_m, min(t_s, t_cap)


def episode_report(record: EpisodeRecord, l_leader: float, t_cap: float = 50.0) -> tuple[MetricsReport, np.ndarray, np.ndarray]:
    """Single-episode report plus its filtered TTC and headway samples."""
    ttc, hw = ttc_headway_series(record, l_leader)
    dl, dphi = deviation_integrals(record)
    i_m, t_s = infractions_and_survival(record, t_cap)
    rep = MetricsReport(
        summary_stats(ttc) if ttc.size else None,
        summary_stats(hw) if hw.size else None,
        t_s, dl, dphi, i_m, 1, int(record.termination == "collision"),
    )
    return rep, ttc, hw


def aggregate_runs(records, l_leader: float, t_cap: float = 50.0) -> MetricsReport:
    """Median of per-episode scalars; TTC/headway stats pool all filtered samples."""
    records = list(records)
    if not records:
        raise EmptySeries("no episodes to aggregate")
    reps, ttcs, hws = zip(*(episode_report(r, l_leader, t_cap) for r in records))
    ttc = np.concatenate(ttcs)
    hw = np.concatenate(hws)
    return MetricsReport(
        summary_stats(ttc) if ttc.size else None,
        summary_stats(hw) if hw.size else None,
        float(np.median([r.survival_time for r in reps])),
        float(np.median([r.lateral_deviation for r in reps])),
        float(np.median([r.orientation_deviation for r in reps])),
        float(np.median([r.major_infractions for r in reps])),
        len(reps),
        sum(r.collisions for r in reps),
    )


_ROWS = [
    ("TTC [s]", "Min.", lambda r: r.ttc and r.ttc.min),
    ("", "Mean", lambda r: r.ttc and r.ttc.mean),
    ("", "Med.", lambda r: r.ttc and r.ttc.median),
    ("", "Std.", lambda r: r.ttc and r.ttc.std),
    ("Time headway [s]", "Min.", lambda r: r.headway and r.headway.min),
    ("", "Mean", lambda r: r.headway and r.headway.mean),
    ("", "Med.", lambda r: r.headway and r.headway.median),
    ("", "Std.", lambda r: r.headway and r.headway.std),
    ("Survival time T_s [s]", "", lambda r: r.survival_time),
    ("Lateral deviation [m*s]", "", lambda r: r.lateral_deviation),
    ("Orient. deviation [rad*s]", "", lambda r: r.orientation_deviation),
    ("Major infractions i_m [s]", "", lambda r: r.major_infractions),
]


def format_table(reports: dict) -> str:
    """Plain-text table, one column per agent, rows as in the evaluation tables."""
    names = list(reports)
    head = f"{'Performance metric':<27}{'':<6}" + "".join(f"{n:>14}" for n in names)
    lines = [head, "-" * len(head)]
    for group, label, get in _ROWS:
        cells = []
        for n in names:
            val = get(reports[n])
            cells.append(f"{'-':>14}" if val is None else f"{val:>14.2f}")
        lines.append(f"{group:<27}{label:<6}" + "".join(cells))
    return "\n".join(lines) + "\n"

