"""Spectral-efficiency, fairness, turning-angle and latency statistics.

Only inner cells feed the statistics. Two SE conventions are reported:

* per-active: a cell's SE is the mean over every (slot, active user) sample;
* per-U: each slot contributes the sum of active users' SE divided by the
  number of users in the cell, idle slots included.

The system SE is the mean of the cell SEs over inner cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def jain_index(rates) -> float:
    rates = np.asarray(rates, dtype=float)
    if rates.size == 0:
        raise ValueError("jain_index of an empty rate list")
    if np.any(rates < 0):
        raise ValueError("rates must be non-negative")
    total_sq = float(np.sum(rates**2))
    if total_sq == 0.0:
        raise ValueError("jain_index undefined when every rate is zero")
    return float(np.sum(rates) ** 2 / (rates.size * total_sq))


def mean_user_rates(se, band, dt: float, horizon: float | None = None):
    """Per-user average of ``SE * b_u`` over the horizon (bps).

    ``se``/``band`` are ``(slots, users)``; slots without an allocation count
    as zero rate.
    """
    se = np.asarray(se, dtype=float)
    band = np.asarray(band, dtype=float)
    if horizon is None:
        horizon = se.shape[0] * dt
    rate = np.where(band > 0, np.nan_to_num(se) * band, 0.0)
    return rate.sum(axis=0) * dt / horizon


def _heading_diff_deg(a, b):
    d = np.abs(np.degrees(a) - np.degrees(b)) % 360.0
    return np.minimum(d, 360.0 - d)


def turning_angle_stats(heading_sequences) -> float | None:
    """Mean absolute heading change between consecutive moving slots (degrees).

    Each sequence is one drone's per-slot heading in radians, NaN while
    hovering. Only pairs of adjacent slots in which the drone moved both times
    count. None when there is no such pair.
    """
    total, count = 0.0, 0
    for seq in heading_sequences:
        seq = np.asarray(seq, dtype=float)
        if seq.size < 2:
            continue
        prev, nxt = seq[:-1], seq[1:]
        ok = ~(np.isnan(prev) | np.isnan(nxt))
        if np.any(ok):
            total += float(np.sum(_heading_diff_deg(prev[ok], nxt[ok])))
            count += int(np.sum(ok))
    return total / count if count else None


def transmission_time_stats(requests) -> float | None:
    times = [r.completed_at - r.requested_at for r in requests if r.completed_at is not None]
    return float(np.mean(times)) if times else None


def cell_se(se, user_cells, cells, users_per_cell: int):
    """Per-cell SE under both conventions; NaN when a cell never had a sample."""
    se = np.asarray(se, dtype=float)
    per_active, per_u = [], []
    for c in cells:
        cols = se[:, np.asarray(user_cells) == c]
        samples = cols[~np.isnan(cols)]
        per_active.append(float(samples.mean()) if samples.size else math.nan)
        per_u.append(float(np.nansum(cols) / (users_per_cell * se.shape[0])))
    return np.array(per_active), np.array(per_u)


@dataclass
class RunSummary:
    run: int
    seed: int
    system_se: float
    system_se_per_u: float
    jain: float | None
    mean_transmission_time: float | None
    mean_turning_angle: float | None
    completed_requests: int


def summarize_run(trace) -> RunSummary:
    inner = list(trace.inner_cells)
    per_active, per_u = cell_se(trace.se, trace.user_cells, inner, trace.config.users_per_cell)
    users = np.flatnonzero(np.isin(trace.user_cells, inner))
    rates = mean_user_rates(trace.se[:, users], trace.band[:, users], trace.config.slot, trace.horizon)
    jain = jain_index(rates) if np.any(rates > 0) else None
    inner_set = set(inner)
    requests = [r for r in trace.requests if r.cell_id in inner_set]
    done = [r for r in requests if r.completed_at is not None]
    return RunSummary(
        run=trace.run,
        seed=trace.seed,
        system_se=float(np.nanmean(per_active)) if np.any(~np.isnan(per_active)) else math.nan,
        system_se_per_u=float(np.mean(per_u)),
        jain=jain,
        mean_transmission_time=transmission_time_stats(done),
        mean_turning_angle=turning_angle_stats(trace.heading[:, inner].T),
        completed_requests=len(done),
    )


def _mean_defined(values):
    values = [v for v in values if v is not None and not math.isnan(v)]
    return float(np.mean(values)) if values else None


@dataclass
class SummaryStats:
    system_se: float
    system_se_per_u: float
    jain: float | None
    mean_transmission_time: float | None
    mean_turning_angle: float | None
    se_ratio_vs_hover: float | None = None
    transmission_time_ratio_vs_hover: float | None = None
    per_run: list = field(default_factory=list)

    def with_baseline(self, hover: "SummaryStats") -> "SummaryStats":
        self.se_ratio_vs_hover = self.system_se / hover.system_se
        if self.mean_transmission_time is not None and hover.mean_transmission_time:
            self.transmission_time_ratio_vs_hover = (
                self.mean_transmission_time / hover.mean_transmission_time)
        return self


def aggregate(runs) -> SummaryStats:
    """Unweighted mean over replications of each per-run statistic."""
    return SummaryStats(
        system_se=_mean_defined(r.system_se for r in runs),
        system_se_per_u=_mean_defined(r.system_se_per_u for r in runs),
        jain=_mean_defined(r.jain for r in runs),
        mean_transmission_time=_mean_defined(r.mean_transmission_time for r in runs),
        mean_turning_angle=_mean_defined(r.mean_turning_angle for r in runs),
        per_run=list(runs),
    )
