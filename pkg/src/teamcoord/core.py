"""Core domain model: grids, roles, trajectories, rescue events, sessions.

Everything here is immutable value data. Cross-field consistency is the job
of `validate_session`, which reports violations as data instead of raising,
so malformed logs can be loaded and inspected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np


class TeamCoordError(Exception):
    """Base class for domain errors raised by this package."""


class CompositionError(TeamCoordError):
    """Team is not two medics plus two engineers."""


class DuplicateIdError(TeamCoordError):
    """Two players share a player_id."""


class Role(Enum):
    MEDIC = "medic"
    ENGINEER = "engineer"

    def __str__(self) -> str:
        return self.value


class VictimType(Enum):
    GREEN = "green"
    YELLOW = "yellow"
    RED = "red"

    def __str__(self) -> str:
        return self.value

    @property
    def performance_weight(self) -> int:
        """Weight of one rescue in the team performance score."""
        return _PERFORMANCE_WEIGHTS[self]

    @property
    def in_game_points(self) -> int:
        """Points displayed to players in-game (a separate scale from
        performance_weight)."""
        return _IN_GAME_POINTS[self]


_PERFORMANCE_WEIGHTS = {VictimType.GREEN: 10, VictimType.YELLOW: 30, VictimType.RED: 60}
_IN_GAME_POINTS = {VictimType.GREEN: 10, VictimType.YELLOW: 20, VictimType.RED: 30}


class ActionTag(Enum):
    """What a player did during one tick."""

    MOVE = "move"
    WAIT = "wait"
    RESCUE = "rescue"
    CLEAR = "clear"
    OPEN = "open"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class GridSpec:
    """Rectangular cell grid. Cells are indexed row-major: index = y*width + x."""

    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.width}x{self.height}")

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    def contains(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def cell_index(self, x: int, y: int) -> int:
        if not self.contains(x, y):
            raise ValueError(f"({x}, {y}) outside {self.width}x{self.height} grid")
        return y * self.width + x

    def cell_xy(self, index: int) -> tuple[int, int]:
        if not 0 <= index < self.n_cells:
            raise ValueError(f"cell index {index} outside grid of {self.n_cells} cells")
        return index % self.width, index // self.width


@dataclass(frozen=True)
class Position:
    x: int
    y: int

    def manhattan(self, other: "Position") -> int:
        return abs(self.x - other.x) + abs(self.y - other.y)

    def euclidean(self, other: "Position") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def chebyshev(self, other: "Position") -> int:
        return max(abs(self.x - other.x), abs(self.y - other.y))

    def is_adjacent4(self, other: "Position") -> bool:
        """Strict 4-neighborhood: the cell itself does not count."""
        return self.manhattan(other) == 1

    def neighbors4(self) -> tuple["Position", ...]:
        x, y = self.x, self.y
        return (Position(x, y - 1), Position(x + 1, y), Position(x, y + 1), Position(x - 1, y))


@dataclass(frozen=True, slots=True)
class TrajectorySample:
    """One logged (tick, player) observation.

    `target` is the cell acted on (move destination, victim cell, rubble or
    door cell); None for waits.
    """

    tick: int
    time_s: float
    position: Position
    action: ActionTag | None = None
    target: Position | None = None


@dataclass(frozen=True)
class PlayerTrajectory:
    player_id: str
    role: Role
    samples: tuple[TrajectorySample, ...]

    @cached_property
    def xy(self) -> np.ndarray:
        """(T, 2) int array of positions, one row per tick."""
        out = np.empty((len(self.samples), 2), dtype=np.int64)
        for i, s in enumerate(self.samples):
            out[i, 0] = s.position.x
            out[i, 1] = s.position.y
        out.flags.writeable = False
        return out

    @property
    def n_ticks(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class RescueEvent:
    time_s: float
    victim_type: VictimType
    victim_cell: Position
    actor_ids: tuple[str, ...]


@dataclass(frozen=True)
class TeamSession:
    """One team's mission record: trajectories plus the rescue event log."""

    session_id: str
    grid: GridSpec
    players: tuple[PlayerTrajectory, ...]
    events: tuple[RescueEvent, ...] = ()
    mission_duration_s: float = 300.0
    red_cutoff_s: float = 180.0
    sample_interval_s: float = 3.0

    @property
    def n_ticks(self) -> int:
        return self.players[0].n_ticks if self.players else 0

    @property
    def nominal_ticks(self) -> int:
        """Tick count implied by the mission clock (100 for the defaults)."""
        return max(self.n_ticks, int(round(self.mission_duration_s / self.sample_interval_s)))


# Violation codes emitted by validate_session.
PLAYER_COUNT = "PLAYER_COUNT"
ROLE_COMPOSITION = "ROLE_COMPOSITION"
DUPLICATE_ID = "DUPLICATE_ID"
TICK_ALIGNMENT = "TICK_ALIGNMENT"
DISCONTINUITY = "DISCONTINUITY"
POSITION_BOUNDS = "POSITION_BOUNDS"
TIME_MISMATCH = "TIME_MISMATCH"
EVENT_TIME = "EVENT_TIME"
EVENT_ACTOR = "EVENT_ACTOR"
RED_CUTOFF = "RED_CUTOFF"
RED_ACTORS = "RED_ACTORS"
CONFIG = "CONFIG"

_TIME_TOL = 1e-9


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


def validate_session(session: TeamSession) -> list[Violation]:
    """Check every session invariant; an empty report means the session is valid.

    Violations are data, not exceptions: a session with three players or a
    teleporting trajectory still validates, it just validates badly.
    """
    out: list[Violation] = []
    grid = session.grid

    if session.sample_interval_s <= 0 or session.mission_duration_s <= 0:
        out.append(Violation(CONFIG, "sample interval and mission duration must be positive"))
    if not 0 < session.red_cutoff_s <= session.mission_duration_s:
        out.append(Violation(CONFIG, "red cutoff must lie inside the mission duration"))

    players = session.players
    if len(players) != 4:
        out.append(Violation(PLAYER_COUNT, f"expected 4 players, found {len(players)}"))

    ids = [p.player_id for p in players]
    for pid in sorted({i for i in ids if ids.count(i) > 1}):
        out.append(Violation(DUPLICATE_ID, f"player_id {pid!r} appears more than once"))

    n_medics = sum(p.role is Role.MEDIC for p in players)
    n_engineers = sum(p.role is Role.ENGINEER for p in players)
    if len(players) == 4 and (n_medics, n_engineers) != (2, 2):
        out.append(Violation(
            ROLE_COMPOSITION,
            f"expected 2 medics + 2 engineers, found {n_medics} + {n_engineers}"))

    tick_counts = {p.n_ticks for p in players}
    if len(tick_counts) > 1:
        out.append(Violation(TICK_ALIGNMENT, f"trajectories disagree on tick count: {sorted(tick_counts)}"))

    for p in players:
        prev = None
        for i, s in enumerate(p.samples):
            if i == 0 and s.tick != 0:
                out.append(Violation(DISCONTINUITY, f"player {p.player_id}: first tick is {s.tick}, not 0"))
            elif prev is not None and s.tick != prev.tick + 1:
                out.append(Violation(
                    DISCONTINUITY,
                    f"player {p.player_id}: tick jumps from {prev.tick} to {s.tick}"))
            if abs(s.time_s - s.tick * session.sample_interval_s) > _TIME_TOL:
                out.append(Violation(
                    TIME_MISMATCH,
                    f"player {p.player_id} tick {s.tick}: time_s {s.time_s} != tick * interval"))
            if not grid.contains(s.position.x, s.position.y):
                out.append(Violation(
                    POSITION_BOUNDS,
                    f"player {p.player_id} tick {s.tick}: position ({s.position.x}, {s.position.y}) off grid"))
            if prev is not None and s.position.manhattan(prev.position) > 1:
                out.append(Violation(
                    DISCONTINUITY,
                    f"player {p.player_id} tick {s.tick}: moved {prev.position} -> {s.position} in one tick"))
            prev = s

    by_id = {p.player_id: p for p in players}
    for k, e in enumerate(session.events):
        if not 0 <= e.time_s < session.mission_duration_s:
            out.append(Violation(EVENT_TIME, f"event {k}: time {e.time_s}s outside mission"))
            continue
        if not grid.contains(e.victim_cell.x, e.victim_cell.y):
            out.append(Violation(POSITION_BOUNDS, f"event {k}: victim cell off grid"))
        unknown = [a for a in e.actor_ids if a not in by_id]
        if not e.actor_ids or unknown:
            out.append(Violation(EVENT_ACTOR, f"event {k}: unknown or missing actors {unknown}"))
            continue
        if e.victim_type is VictimType.RED:
            if e.time_s >= session.red_cutoff_s:
                out.append(Violation(RED_CUTOFF, f"event {k}: red rescue at {e.time_s}s, cutoff {session.red_cutoff_s}s"))
            actors = [by_id[a] for a in e.actor_ids]
            tick = int(round(e.time_s / session.sample_interval_s))
            adjacent = []
            for a in actors:
                if tick >= a.n_ticks:
                    break
                if a.samples[tick].position.is_adjacent4(e.victim_cell):
                    adjacent.append(a)
            roles = {a.role for a in adjacent}
            if roles != {Role.MEDIC, Role.ENGINEER}:
                out.append(Violation(
                    RED_ACTORS,
                    f"event {k}: red rescue needs a medic and an engineer adjacent at tick {tick}"))
    return out


def team_roles_partition(session: TeamSession) -> dict[Role, list[PlayerTrajectory]]:
    """Split the four players by role; raises unless the team is 2 + 2."""
    ids = [p.player_id for p in session.players]
    if len(set(ids)) != len(ids):
        raise DuplicateIdError(f"duplicate player ids in session {session.session_id!r}")
    part: dict[Role, list[PlayerTrajectory]] = {Role.MEDIC: [], Role.ENGINEER: []}
    for p in session.players:
        part[p.role].append(p)
    if len(part[Role.MEDIC]) != 2 or len(part[Role.ENGINEER]) != 2:
        raise CompositionError(
            f"session {session.session_id!r} has {len(part[Role.MEDIC])} medics and "
            f"{len(part[Role.ENGINEER])} engineers, need 2 + 2")
    return part
