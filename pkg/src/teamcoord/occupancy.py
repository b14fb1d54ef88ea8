"""Grid occupancy distributions and the information-theoretic kernels on them.

Occupancy is strictly sample-count based: p(cell) = visits / total samples,
which equals dwell time at a fixed sampling interval. All logarithms are
base 2, so entropies are in bits and the Jensen-Shannon divergence is
bounded by 1 exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import GridSpec, PlayerTrajectory, TeamCoordError


class EmptyInputError(TeamCoordError):
    """No trajectory samples to build a distribution from."""


class EmptyDistributionError(TeamCoordError):
    """Operation on an all-zero distribution."""


class GridMismatchError(TeamCoordError):
    """Two distributions do not live on the same grid."""


_SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class OccupancyDistribution:
    """Normalized visit-frequency distribution over the cells of a grid."""

    grid: GridSpec
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.shape != (self.grid.n_cells,):
            raise ValueError(f"expected {self.grid.n_cells} probabilities, got shape {p.shape}")
        if np.any(p < 0):
            raise ValueError("probabilities must be non-negative")
        total = float(p.sum())
        if total != 0.0 and abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"probabilities sum to {total}, not 1")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "probabilities", p)

    @property
    def is_empty(self) -> bool:
        return not self.probabilities.any()

    def support(self) -> np.ndarray:
        """Indices of cells with positive mass."""
        return np.flatnonzero(self.probabilities > 0)


@dataclass(frozen=True)
class CellSet:
    """Set of visited grid cells, by row-major index."""

    grid: GridSpec
    cells: frozenset[int]

    def __post_init__(self):
        bad = [c for c in self.cells if not 0 <= c < self.grid.n_cells]
        if bad:
            raise ValueError(f"cell indices {sorted(bad)[:5]} outside grid of {self.grid.n_cells} cells")


def coarsen_grid(grid: GridSpec, factor: int) -> GridSpec:
    """Grid obtained by pooling factor x factor tile blocks into one cell."""
    if factor < 1:
        raise ValueError("coarsening factor must be >= 1")
    return GridSpec(-(-grid.width // factor), -(-grid.height // factor))


def _as_trajectories(trajectories) -> list[PlayerTrajectory]:
    if isinstance(trajectories, PlayerTrajectory):
        return [trajectories]
    return list(trajectories)


def cell_indices(traj: PlayerTrajectory, grid: GridSpec, coarsen: int = 1) -> np.ndarray:
    """Per-tick cell index of one trajectory, on the (possibly coarsened) grid."""
    xs, ys = traj.xy[:, 0], traj.xy[:, 1]
    if xs.size and (xs.min() < 0 or ys.min() < 0 or xs.max() >= grid.width or ys.max() >= grid.height):
        raise ValueError(f"trajectory {traj.player_id!r} leaves the {grid.width}x{grid.height} grid")
    if coarsen == 1:
        return ys * grid.width + xs
    cg = coarsen_grid(grid, coarsen)
    return (ys // coarsen) * cg.width + (xs // coarsen)


def occupancy_of(
    trajectories: PlayerTrajectory | Iterable[PlayerTrajectory],
    grid: GridSpec,
    coarsen: int = 1,
) -> OccupancyDistribution:
    """Visit-frequency distribution of one trajectory or a pooled group.

    Passing several trajectories pools their samples, which is how a role's
    characteristic movement pattern is built from its two players.
    """
    trajs = _as_trajectories(trajectories)
    target = coarsen_grid(grid, coarsen) if coarsen > 1 else grid
    counts = np.zeros(target.n_cells, dtype=np.int64)
    total = 0
    for t in trajs:
        idx = cell_indices(t, grid, coarsen)
        counts += np.bincount(idx, minlength=target.n_cells)
        total += idx.size
    if total == 0:
        raise EmptyInputError("no samples across input trajectories")
    return OccupancyDistribution(target, counts / total)


def visited_cells(
    trajectories: PlayerTrajectory | Iterable[PlayerTrajectory],
    grid: GridSpec,
    coarsen: int = 1,
) -> CellSet:
    """Set of grid cells visited at least once by any of the trajectories."""
    trajs = _as_trajectories(trajectories)
    target = coarsen_grid(grid, coarsen) if coarsen > 1 else grid
    cells: set[int] = set()
    for t in trajs:
        cells.update(np.unique(cell_indices(t, grid, coarsen)).tolist())
    return CellSet(target, frozenset(cells))


def shannon_entropy(dist: OccupancyDistribution) -> float:
    """Entropy in bits; 0 for a point mass."""
    if dist.is_empty:
        raise EmptyDistributionError("entropy of an all-zero distribution")
    p = dist.probabilities[dist.probabilities > 0]
    return float(-(p * np.log2(p)).sum())


def jensen_shannon_divergence(p: OccupancyDistribution, q: OccupancyDistribution) -> float:
    """JSD(p, q) in base 2, so the result lies in [0, 1].

    Computed as the mean of KL(p||m) and KL(q||m) with m the equal mixture;
    cells where an argument has zero mass contribute nothing to its sum.
    """
    if p.grid != q.grid:
        raise GridMismatchError(f"grids differ: {p.grid} vs {q.grid}")
    if p.is_empty or q.is_empty:
        raise EmptyDistributionError("JSD of an all-zero distribution")
    pp, qq = p.probabilities, q.probabilities
    m = 0.5 * (pp + qq)
    sp = pp > 0
    sq = qq > 0
    kl_pm = float((pp[sp] * np.log2(pp[sp] / m[sp])).sum())
    kl_qm = float((qq[sq] * np.log2(qq[sq] / m[sq])).sum())
    jsd = 0.5 * kl_pm + 0.5 * kl_qm
    return min(1.0, max(0.0, jsd))


def jaccard_overlap(a: CellSet | frozenset | set, b: CellSet | frozenset | set) -> float:
    """|a n b| / |a u b|, defined as 0 when both sets are empty."""
    sa = a.cells if isinstance(a, CellSet) else a
    sb = b.cells if isinstance(b, CellSet) else b
    union = len(sa | sb)
    if union == 0:
        return 0.0
    return len(sa & sb) / union


def entropy_similarity(h1: float, h2: float) -> float:
    """1 - |h1 - h2| / max(h1, h2); two zero entropies count as fully similar.

    The ratio is 0/0 when both distributions are point masses; two point
    masses have identical complexity, hence 1.
    """
    if h1 < 0 or h2 < 0:
        raise ValueError("entropies must be non-negative")
    hi = max(h1, h2)
    if hi == 0.0:
        return 1.0
    return 1.0 - abs(h1 - h2) / hi
