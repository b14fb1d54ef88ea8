"""Tick-based search-and-rescue world: map specification, state, step rules.

One action per agent per tick, resolved atomically against the start-of-tick
state: a rubble cell cleared this tick only unblocks its victim next tick,
and movement cannot pass a door opened this tick. Conflicting rescues of the
same victim resolve by agent index. Agents may share cells; they all start
on the common start cell.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from ..core import (
    ActionTag,
    CompositionError,
    GridSpec,
    Position,
    RescueEvent,
    Role,
    TeamCoordError,
    TeamSession,
    TrajectorySample,
    PlayerTrajectory,
    VictimType,
    validate_session,
)
from ..outcomes import MapMeta


class InvalidMapError(TeamCoordError):
    """Map specification breaks a structural invariant."""


class MalformedActionError(TeamCoordError):
    """Agent action is not one of the known kinds."""


@dataclass(frozen=True)
class Victim:
    cell: Position
    kind: VictimType


@dataclass(frozen=True)
class MapSpec:
    """Static world: walls, doors, rubble, victims and the mission clock.

    Rubble blocks both movement and the rescue of the yellow victim under
    it; closed doors block movement until an engineer opens them.
    """

    name: str
    grid: GridSpec
    walls: frozenset[Position]
    doors: frozenset[Position]
    rubble: frozenset[Position]
    victims: tuple[Victim, ...]
    start: Position
    mission_duration_s: float = 300.0
    red_cutoff_s: float = 180.0
    fov_radius: int = 5

    def problems(self) -> list[str]:
        out = []
        g = self.grid
        for label, cells in (("wall", self.walls), ("door", self.doors), ("rubble", self.rubble)):
            for c in cells:
                if not g.contains(c.x, c.y):
                    out.append(f"{label} at ({c.x}, {c.y}) outside grid")
        if self.walls & self.doors:
            out.append("door cells overlap walls")
        if self.rubble & self.walls or self.rubble & self.doors:
            out.append("rubble cells overlap walls or doors")
        seen_cells = set()
        for v in self.victims:
            c = v.cell
            if not g.contains(c.x, c.y):
                out.append(f"victim at ({c.x}, {c.y}) outside grid")
                continue
            if c in seen_cells:
                out.append(f"two victims share cell ({c.x}, {c.y})")
            seen_cells.add(c)
            if c in self.walls or c in self.doors:
                out.append(f"victim at ({c.x}, {c.y}) on a wall or door")
            if v.kind is VictimType.YELLOW and c not in self.rubble:
                out.append(f"yellow victim at ({c.x}, {c.y}) has no rubble")
            if v.kind is not VictimType.YELLOW and c in self.rubble:
                out.append(f"{v.kind} victim at ({c.x}, {c.y}) buried under rubble")
        s = self.start
        if not g.contains(s.x, s.y):
            out.append("start cell outside grid")
        elif s in self.walls or s in self.doors or s in self.rubble or s in seen_cells:
            out.append("start cell not traversable")
        if not 0 < self.red_cutoff_s <= self.mission_duration_s:
            out.append("red cutoff outside mission duration")
        if self.fov_radius < 1:
            out.append("field of view radius must be at least 1")
        return out

    def validate(self) -> None:
        problems = self.problems()
        if problems:
            raise InvalidMapError(f"map {self.name!r}: " + "; ".join(problems))

    @cached_property
    def wall_mask(self) -> np.ndarray:
        mask = np.zeros(self.grid.n_cells, dtype=bool)
        for c in self.walls:
            mask[self.grid.cell_index(c.x, c.y)] = True
        mask.flags.writeable = False
        return mask

    @cached_property
    def neighbor_table(self) -> np.ndarray:
        """(n_cells, 4) in-grid neighbor indices, -1 where off-grid."""
        g = self.grid
        table = np.full((g.n_cells, 4), -1, dtype=np.int32)
        for y in range(g.height):
            for x in range(g.width):
                i = g.cell_index(x, y)
                for k, (dx, dy) in enumerate(((0, -1), (1, 0), (0, 1), (-1, 0))):
                    if g.contains(x + dx, y + dy):
                        table[i, k] = g.cell_index(x + dx, y + dy)
        table.flags.writeable = False
        return table

    @cached_property
    def neighbor_lists(self) -> tuple[tuple[int, ...], ...]:
        """neighbor_table as plain tuples, the fast path for flood fills."""
        return tuple(tuple(int(nb) for nb in row if nb >= 0) for row in self.neighbor_table)


def map_meta(spec: MapSpec) -> MapMeta:
    """Task inventory for collective-intelligence normalization.

    Medics may rescue every victim; engineers may rescue greens, assist red
    rescues, clear rubble and open doors.
    """
    kinds = [v.kind for v in spec.victims]
    greens = kinds.count(VictimType.GREEN)
    reds = kinds.count(VictimType.RED)
    return MapMeta(
        traversable_cells=spec.grid.n_cells - len(spec.walls),
        max_tasks={
            Role.MEDIC: len(spec.victims),
            Role.ENGINEER: greens + reds + len(spec.rubble) + len(spec.doors),
        },
    )


@dataclass(frozen=True)
class AgentAction:
    kind: ActionTag
    target: Position | None = None


WAIT_ACTION = AgentAction(ActionTag.WAIT)


@dataclass(frozen=True)
class AgentState:
    player_id: str
    role: Role
    pos: Position


@dataclass(frozen=True)
class WorldState:
    spec: MapSpec
    tick: int
    agents: tuple[AgentState, ...]
    victims: tuple[Victim, ...]
    rubble: frozenset[Position]
    closed_doors: frozenset[Position]
    events: tuple[RescueEvent, ...] = ()
    sample_interval_s: float = 3.0

    @property
    def time_s(self) -> float:
        return self.tick * self.sample_interval_s

    def traversable(self, pos: Position) -> bool:
        return (self.spec.grid.contains(pos.x, pos.y)
                and pos not in self.spec.walls
                and pos not in self.closed_doors
                and pos not in self.rubble)


def initial_state(spec: MapSpec, agents: tuple[AgentState, ...],
                  sample_interval_s: float = 3.0) -> WorldState:
    return WorldState(spec=spec, tick=0, agents=agents, victims=spec.victims,
                      rubble=spec.rubble, closed_doors=spec.doors,
                      sample_interval_s=sample_interval_s)


def step(state: WorldState, actions) -> WorldState:
    """Advance one tick; illegal actions degrade to waits."""
    new_state, _ = step_resolved(state, actions)
    return new_state


def step_resolved(state: WorldState, actions) -> tuple[WorldState, tuple[AgentAction, ...]]:
    """Like `step`, but also reports what each agent actually did."""
    if len(actions) != len(state.agents):
        raise MalformedActionError(f"{len(actions)} actions for {len(state.agents)} agents")
    for act in actions:
        if not isinstance(act, AgentAction) or not isinstance(act.kind, ActionTag):
            raise MalformedActionError(f"not an agent action: {act!r}")

    victims = {v.cell: v.kind for v in state.victims}
    rubble = set(state.rubble)
    doors = set(state.closed_doors)
    events = list(state.events)
    resolved: list[AgentAction] = [WAIT_ACTION] * len(actions)
    t = state.time_s

    # Act phase, in agent-index order. Victim removal is visible within the
    # tick (conflict resolution); terrain checks use the start-of-tick state.
    for i, (agent, act) in enumerate(zip(state.agents, actions)):
        if act.kind in (ActionTag.MOVE, ActionTag.WAIT):
            continue
        tgt = act.target
        if tgt is None or agent.pos.manhattan(tgt) != 1:
            continue
        if act.kind is ActionTag.RESCUE:
            kind = victims.get(tgt)
            if kind is None:
                continue
            if agent.role is Role.ENGINEER and kind is not VictimType.GREEN:
                continue
            if kind is VictimType.YELLOW and tgt in state.rubble:
                continue
            if kind is VictimType.RED:
                if t >= state.spec.red_cutoff_s:
                    continue
                helper = next((a for a in state.agents
                               if a.role is Role.ENGINEER and a.pos.manhattan(tgt) == 1), None)
                if helper is None:
                    continue
                actors = (agent.player_id, helper.player_id)
            else:
                actors = (agent.player_id,)
            del victims[tgt]
            events.append(RescueEvent(time_s=t, victim_type=kind, victim_cell=tgt,
                                      actor_ids=actors))
            resolved[i] = act
        elif act.kind is ActionTag.CLEAR:
            if agent.role is Role.ENGINEER and tgt in rubble:
                rubble.discard(tgt)
                resolved[i] = act
        elif act.kind is ActionTag.OPEN:
            if agent.role is Role.ENGINEER and tgt in doors:
                doors.discard(tgt)
                resolved[i] = act

    # Move phase against start-of-tick terrain; agents may share cells.
    new_agents = []
    for i, (agent, act) in enumerate(zip(state.agents, actions)):
        pos = agent.pos
        if act.kind is ActionTag.MOVE and act.target is not None:
            tgt = act.target
            if pos.manhattan(tgt) == 1 and state.traversable(tgt):
                pos = tgt
                resolved[i] = act
        new_agents.append(replace(agent, pos=pos))

    remaining = tuple(v for v in state.victims if v.cell in victims)
    new_state = WorldState(spec=state.spec, tick=state.tick + 1, agents=tuple(new_agents),
                           victims=remaining, rubble=frozenset(rubble),
                           closed_doors=frozenset(doors), events=tuple(events),
                           sample_interval_s=state.sample_interval_s)
    return new_state, tuple(resolved)


def run_mission(spec: MapSpec, policies, seed: int, session_id: str | None = None,
                sample_interval_s: float = 3.0) -> TeamSession:
    """Run one full mission and return its validated session record.

    `policies` is a sequence of four (role, AgentPolicy) pairs, two medics
    and two engineers. Fixed (map, policies, seed) reproduces the mission
    bit for bit. Player ids are derived from roles in input order.
    """
    from .policies import build_controllers  # deferred: policies import world types

    spec.validate()
    roles = [role for role, _ in policies]
    if len(policies) != 4 or roles.count(Role.MEDIC) != 2 or roles.count(Role.ENGINEER) != 2:
        raise CompositionError("run_mission needs exactly 2 medic and 2 engineer policies")

    counters = {Role.MEDIC: 0, Role.ENGINEER: 0}
    agents = []
    for role, _ in policies:
        counters[role] += 1
        agents.append(AgentState(player_id=f"{role.value}{counters[role]}", role=role,
                                 pos=spec.start))
    agents = tuple(agents)

    controllers = build_controllers(policies, spec, seed)
    n_ticks = int(round(spec.mission_duration_s / sample_interval_s))
    state = initial_state(spec, agents, sample_interval_s)
    samples: list[list[TrajectorySample]] = [[] for _ in agents]

    for t in range(n_ticks):
        victims_by_cell = {v.cell: v.kind for v in state.victims}
        for c in controllers:
            c.observe(state, victims_by_cell)
        actions = [c.act(state, victims_by_cell) for c in controllers]
        new_state, resolved = step_resolved(state, actions)
        for i, agent in enumerate(state.agents):
            act = resolved[i]
            samples[i].append(TrajectorySample(
                tick=t, time_s=t * sample_interval_s, position=agent.pos,
                action=act.kind, target=act.target))
        state = new_state

    players = tuple(
        PlayerTrajectory(player_id=a.player_id, role=a.role, samples=tuple(samples[i]))
        for i, a in enumerate(agents))
    session = TeamSession(
        session_id=session_id or f"{spec.name}-{seed}",
        grid=spec.grid, players=players, events=state.events,
        mission_duration_s=spec.mission_duration_s, red_cutoff_s=spec.red_cutoff_s,
        sample_interval_s=sample_interval_s)
    report = validate_session(session)
    if report:  # a violation here is a simulator bug, not user error
        raise AssertionError(f"simulator produced an invalid session: {report[:3]}")
    return session
