"""Team-level spatial coordination metrics and their windowed time series.

Three whole-mission metrics, each in [0, 1]:

- exploration diversity: mean pairwise Jensen-Shannon divergence between the
  players' occupancy distributions, regardless of role;
- movement specialization: entropy similarity of the two role-pooled
  distributions times one minus the Jaccard overlap of the role cell sets;
- proximity adaptation: normalized absolute change of the mean cross-role
  distance between the two mission halves (split at tick floor(T/2)).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import CompositionError, GridSpec, Role, TeamCoordError, TeamSession, team_roles_partition
from .occupancy import (
    OccupancyDistribution,
    cell_indices,
    coarsen_grid,
    entropy_similarity,
    jaccard_overlap,
    jensen_shannon_divergence,
    occupancy_of,
    shannon_entropy,
    visited_cells,
)


class TooShortSessionError(TeamCoordError):
    """Session does not span enough ticks for the requested computation."""


class UnsupportedMetricError(TeamCoordError):
    """Unknown time-series metric tag."""


class WindowTooLargeError(TeamCoordError):
    """Sliding window longer than the session."""


class SeriesMetric(Enum):
    SED = "sed"
    SMS = "sms"
    SPA_ROLLING = "spa_rolling"
    INTER_ROLE_DISTANCE = "inter_role_distance"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class CoordinationMetrics:
    """The (SED, SMS, SPA) triple for one session."""

    sed: float
    sms: float
    spa: float


@dataclass(frozen=True)
class MetricTimeSeries:
    metric: SeriesMetric
    window_ticks: int
    values: tuple[tuple[float, float], ...]  # (progress fraction, value)

    def progress(self) -> np.ndarray:
        return np.array([p for p, _ in self.values])

    def series(self) -> np.ndarray:
        return np.array([v for _, v in self.values])


def spatial_exploration_diversity(session: TeamSession, grid: GridSpec | None = None,
                                  coarsen: int = 1) -> float:
    """Mean JSD over all unordered player pairs; 0 when everyone moves alike."""
    grid = grid or session.grid
    if len(session.players) < 2:
        raise CompositionError("exploration diversity needs at least two players")
    dists = [occupancy_of(p, grid, coarsen) for p in session.players]
    pairs = list(itertools.combinations(dists, 2))
    return float(np.mean([jensen_shannon_divergence(a, b) for a, b in pairs]))


def spatial_movement_specialization(session: TeamSession, grid: GridSpec | None = None,
                                    coarsen: int = 1) -> float:
    """Entropy similarity of role-pooled occupancy times (1 - cell overlap)."""
    grid = grid or session.grid
    part = team_roles_partition(session)
    p_med = occupancy_of(part[Role.MEDIC], grid, coarsen)
    p_eng = occupancy_of(part[Role.ENGINEER], grid, coarsen)
    e_s = entropy_similarity(shannon_entropy(p_med), shannon_entropy(p_eng))
    overlap = jaccard_overlap(visited_cells(part[Role.MEDIC], grid, coarsen),
                              visited_cells(part[Role.ENGINEER], grid, coarsen))
    return e_s * (1.0 - overlap)


def cross_role_distances(session: TeamSession, distance: str = "euclidean") -> np.ndarray:
    """Per-tick mean distance over the four medic-engineer pairs.

    Euclidean by default; pass distance="manhattan" for taxicab geometry.
    """
    part = team_roles_partition(session)
    med = np.stack([p.xy for p in part[Role.MEDIC]]).astype(float)  # (2, T, 2)
    eng = np.stack([p.xy for p in part[Role.ENGINEER]]).astype(float)
    diff = med[:, None, :, :] - eng[None, :, :, :]  # (2, 2, T, 2)
    if distance == "euclidean":
        d = np.sqrt((diff ** 2).sum(axis=-1))
    elif distance == "manhattan":
        d = np.abs(diff).sum(axis=-1)
    else:
        raise ValueError(f"unknown distance {distance!r}")
    return d.mean(axis=(0, 1))  # (T,)


def spatial_proximity_adaptation(session: TeamSession, distance: str = "euclidean") -> float:
    """|D2 - D1| / max(D1, D2) over the two mission halves; 0 if both are 0."""
    d = cross_role_distances(session, distance)
    t = d.size
    if t < 2:
        raise TooShortSessionError(f"proximity adaptation needs >= 2 ticks, got {t}")
    half = t // 2
    d1 = float(d[:half].mean())
    d2 = float(d[half:].mean())
    top = abs(d2 - d1)
    bottom = max(d1, d2)
    return 0.0 if bottom == 0.0 else top / bottom


def coordination_metrics(session: TeamSession, grid: GridSpec | None = None, coarsen: int = 1,
                         distance: str = "euclidean") -> CoordinationMetrics:
    return CoordinationMetrics(
        sed=spatial_exploration_diversity(session, grid, coarsen),
        sms=spatial_movement_specialization(session, grid, coarsen),
        spa=spatial_proximity_adaptation(session, distance),
    )


def _moving_average(values: np.ndarray, k: int) -> np.ndarray:
    """Centered moving average of k points, shrinking near the edges."""
    if k <= 1:
        return values
    half = k // 2
    out = np.empty_like(values, dtype=float)
    for i in range(values.size):
        lo = max(0, i - half)
        hi = min(values.size, i + half + 1)
        out[i] = values[lo:hi].mean()
    return out


def _window_distribution(idx: np.ndarray, grid: GridSpec) -> OccupancyDistribution:
    counts = np.bincount(idx, minlength=grid.n_cells)
    return OccupancyDistribution(grid, counts / idx.size)


def metric_time_series(session: TeamSession, metric: SeriesMetric | str,
                       window_ticks: int = 20, smooth_ticks: int = 5,
                       grid: GridSpec | None = None, coarsen: int = 1,
                       distance: str = "euclidean") -> MetricTimeSeries:
    """Sliding-window series of a metric across mission progress.

    SED and SMS are recomputed over each window of samples; the cross-role
    distance is averaged per window; the rolling adaptation compares each
    window against the previous one. Values are smoothed with a centered
    moving average of `smooth_ticks` points, and the x axis is the window's
    end tick divided by the nominal mission tick count, so the red cutoff
    lands exactly at its mission-progress fraction.
    """
    if isinstance(metric, str):
        try:
            metric = SeriesMetric(metric)
        except ValueError:
            raise UnsupportedMetricError(f"unknown metric {metric!r}") from None
    if not isinstance(metric, SeriesMetric):
        raise UnsupportedMetricError(f"unknown metric {metric!r}")
    if window_ticks < 2:
        raise ValueError("window_ticks must be >= 2")
    if smooth_ticks < 1:
        raise ValueError("smooth_ticks must be >= 1")
    grid = grid or session.grid
    t_total = session.n_ticks
    if window_ticks > t_total:
        raise WindowTooLargeError(f"window of {window_ticks} ticks exceeds session of {t_total}")

    cg = coarsen_grid(grid, coarsen) if coarsen > 1 else grid
    ends = np.arange(window_ticks - 1, t_total)

    if metric in (SeriesMetric.SED, SeriesMetric.SMS):
        if metric is SeriesMetric.SED:
            per_player = [cell_indices(p, grid, coarsen) for p in session.players]
        else:
            part = team_roles_partition(session)
            role_idx = {
                role: [cell_indices(p, grid, coarsen) for p in part[role]]
                for role in (Role.MEDIC, Role.ENGINEER)
            }
        vals = np.empty(ends.size)
        for k, e in enumerate(ends):
            s = e - window_ticks + 1
            if metric is SeriesMetric.SED:
                dists = [_window_distribution(idx[s:e + 1], cg) for idx in per_player]
                vals[k] = np.mean([jensen_shannon_divergence(a, b)
                                   for a, b in itertools.combinations(dists, 2)])
            else:
                pooled = {role: np.concatenate([idx[s:e + 1] for idx in role_idx[role]])
                          for role in role_idx}
                h = {role: shannon_entropy(_window_distribution(pooled[role], cg))
                     for role in pooled}
                e_s = entropy_similarity(h[Role.MEDIC], h[Role.ENGINEER])
                overlap = jaccard_overlap(set(np.unique(pooled[Role.MEDIC]).tolist()),
                                          set(np.unique(pooled[Role.ENGINEER]).tolist()))
                vals[k] = e_s * (1.0 - overlap)
    else:
        d = cross_role_distances(session, distance)
        csum = np.concatenate([[0.0], np.cumsum(d)])
        means = (csum[ends + 1] - csum[ends + 1 - window_ticks]) / window_ticks
        if metric is SeriesMetric.INTER_ROLE_DISTANCE:
            vals = means
        else:  # rolling adaptation between consecutive windows
            if means.size < 2:
                raise WindowTooLargeError("rolling adaptation needs at least two windows")
            prev, cur = means[:-1], means[1:]
            bottom = np.maximum(prev, cur)
            with np.errstate(invalid="ignore"):
                vals = np.where(bottom > 0, np.abs(cur - prev) / np.where(bottom > 0, bottom, 1.0), 0.0)
            ends = ends[1:]

    vals = _moving_average(np.asarray(vals, dtype=float), smooth_ticks)
    progress = ends / session.nominal_ticks
    return MetricTimeSeries(metric, window_ticks, tuple(zip(progress.tolist(), vals.tolist())))
