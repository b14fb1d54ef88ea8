"""Bit-exact file formats: session logs, map manifests, metric tables.

A session is stored as a line-delimited log (one JSON object per tick and
player, ordered by tick then player id) plus a sidecar manifest carrying the
grid, the roster, the mission clock and the rescue events. Maps and metric
tables are single JSON / CSV files. All writers emit LF newlines and
locale-independent number formatting, and every format round-trips exactly.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .core import (
    ActionTag,
    GridSpec,
    PlayerTrajectory,
    Position,
    RescueEvent,
    Role,
    TeamCoordError,
    TeamSession,
    TrajectorySample,
    VictimType,
    validate_session,
)
from .outcomes import MapMeta
from .sim.world import MapSpec, Victim

FORMAT_VERSION = 1

METRICS_COLUMNS = ("session_id", "sed", "sms", "spa", "ci", "performance")


class SessionFormatError(TeamCoordError):
    """Malformed file; carries the offending path and line when known."""

    def __init__(self, message: str, path=None, line: int | None = None):
        where = str(path) if path is not None else "<stream>"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


class SessionValidationError(TeamCoordError):
    """File parsed but the session breaks invariants; the report says how."""

    def __init__(self, path, report):
        super().__init__(f"{path}: invalid session: " + "; ".join(str(v) for v in report[:5]))
        self.report = report


def fmt_float(x: float) -> str:
    # shortest form preserving the exact binary value; never fewer meaningful
    # digits than the value carries
    return format(float(x), ".17g")


def manifest_path_for(log_path) -> Path:
    p = Path(log_path)
    if p.suffix == ".jsonl":
        return p.with_suffix(".manifest.json")
    return Path(str(p) + ".manifest.json")


# ---------------------------------------------------------------------------
# Sessions


def write_session(session: TeamSession, log_path, map_meta: MapMeta | None = None) -> tuple[Path, Path]:
    """Write the trajectory log and its manifest; returns both paths."""
    log_path = Path(log_path)
    manifest_path = manifest_path_for(log_path)

    lines = []
    order = sorted(range(len(session.players)), key=lambda i: session.players[i].player_id)
    n_ticks = session.n_ticks
    for tick in range(n_ticks):
        for i in order:
            p = session.players[i]
            s = p.samples[tick]
            record = {
                "session_id": session.session_id,
                "tick": s.tick,
                "time_s": s.time_s,
                "player_id": p.player_id,
                "role": p.role.value,
                "x": s.position.x,
                "y": s.position.y,
                "action": s.action.value if s.action is not None else None,
            }
            if s.target is not None:
                record["target_x"] = s.target.x
                record["target_y"] = s.target.y
            lines.append(json.dumps(record, sort_keys=True, separators=(",", ":")))

    manifest = {
        "format_version": FORMAT_VERSION,
        "session_id": session.session_id,
        "grid": {"width": session.grid.width, "height": session.grid.height},
        "mission_duration_s": session.mission_duration_s,
        "red_cutoff_s": session.red_cutoff_s,
        "sample_interval_s": session.sample_interval_s,
        "players": [{"player_id": p.player_id, "role": p.role.value} for p in session.players],
        "events": [
            {
                "time_s": e.time_s,
                "victim_type": e.victim_type.value,
                "x": e.victim_cell.x,
                "y": e.victim_cell.y,
                "actor_ids": list(e.actor_ids),
            }
            for e in session.events
        ],
    }
    if map_meta is not None:
        manifest["map_meta"] = {
            "traversable_cells": map_meta.traversable_cells,
            "max_tasks": {role.value: n for role, n in sorted(map_meta.max_tasks.items(),
                                                              key=lambda kv: kv[0].value)},
        }

    log_path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n",
                             encoding="utf-8")
    return log_path, manifest_path


def _require(condition: bool, message: str, path, line=None):
    if not condition:
        raise SessionFormatError(message, path, line)


def read_session(log_path, validate: bool = True) -> TeamSession:
    """Parse a session log plus manifest; validates unless told otherwise."""
    log_path = Path(log_path)
    manifest_path = manifest_path_for(log_path)
    if not manifest_path.exists():
        raise SessionFormatError("missing manifest", manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SessionFormatError(f"bad manifest JSON: {exc}", manifest_path) from exc

    for key in ("format_version", "session_id", "grid", "players", "events",
                "mission_duration_s", "red_cutoff_s", "sample_interval_s"):
        _require(key in manifest, f"manifest missing {key!r}", manifest_path)
    _require(manifest["format_version"] == FORMAT_VERSION,
             f"unsupported format_version {manifest['format_version']!r}", manifest_path)
    session_id = manifest["session_id"]
    grid = GridSpec(int(manifest["grid"]["width"]), int(manifest["grid"]["height"]))

    roster: dict[str, Role] = {}
    for entry in manifest["players"]:
        pid = entry["player_id"]
        _require(pid not in roster, f"player {pid!r} listed twice", manifest_path)
        try:
            roster[pid] = Role(entry["role"])
        except ValueError:
            raise SessionFormatError(f"unknown role {entry['role']!r}", manifest_path) from None

    samples: dict[str, dict[int, TrajectorySample]] = {pid: {} for pid in roster}
    if not log_path.exists():
        raise SessionFormatError("missing log file", log_path)
    with log_path.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SessionFormatError(f"bad record: {exc}", log_path, lineno) from exc
            for key in ("session_id", "tick", "time_s", "player_id", "role", "x", "y", "action"):
                _require(key in rec, f"record missing {key!r}", log_path, lineno)
            _require(rec["session_id"] == session_id, "session_id differs from manifest",
                     log_path, lineno)
            pid = rec["player_id"]
            _require(pid in roster, f"player {pid!r} not in manifest roster", log_path, lineno)
            _require(Role(rec["role"]) is roster[pid], f"role mismatch for {pid!r}",
                     log_path, lineno)
            action = None if rec["action"] is None else ActionTag(rec["action"])
            target = None
            if "target_x" in rec or "target_y" in rec:
                _require("target_x" in rec and "target_y" in rec,
                         "target needs both coordinates", log_path, lineno)
                target = Position(int(rec["target_x"]), int(rec["target_y"]))
            tick = int(rec["tick"])
            _require(tick not in samples[pid], f"duplicate tick {tick} for {pid!r}",
                     log_path, lineno)
            samples[pid][tick] = TrajectorySample(
                tick=tick, time_s=float(rec["time_s"]),
                position=Position(int(rec["x"]), int(rec["y"])),
                action=action, target=target)

    players = tuple(
        PlayerTrajectory(player_id=pid, role=roster[pid],
                         samples=tuple(s for _, s in sorted(samples[pid].items())))
        for pid in roster)

    events = []
    for entry in manifest["events"]:
        events.append(RescueEvent(
            time_s=float(entry["time_s"]),
            victim_type=VictimType(entry["victim_type"]),
            victim_cell=Position(int(entry["x"]), int(entry["y"])),
            actor_ids=tuple(entry["actor_ids"])))

    session = TeamSession(
        session_id=session_id, grid=grid, players=players, events=tuple(events),
        mission_duration_s=float(manifest["mission_duration_s"]),
        red_cutoff_s=float(manifest["red_cutoff_s"]),
        sample_interval_s=float(manifest["sample_interval_s"]))
    if validate:
        report = validate_session(session)
        if report:
            raise SessionValidationError(log_path, report)
    return session


def read_map_meta(log_path) -> MapMeta | None:
    """The task inventory embedded in a session manifest, if present."""
    manifest_path = manifest_path_for(log_path)
    if not manifest_path.exists():
        return None
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    raw = manifest.get("map_meta")
    if raw is None:
        return None
    return MapMeta(
        traversable_cells=int(raw["traversable_cells"]),
        max_tasks={Role(k): int(v) for k, v in raw["max_tasks"].items()})


# ---------------------------------------------------------------------------
# Maps


def write_map(spec: MapSpec, path) -> Path:
    path = Path(path)
    def cells(values):
        return sorted([[c.x, c.y] for c in values])
    doc = {
        "format_version": FORMAT_VERSION,
        "name": spec.name,
        "width": spec.grid.width,
        "height": spec.grid.height,
        "walls": cells(spec.walls),
        "doors": cells(spec.doors),
        "rubble": cells(spec.rubble),
        "victims": [{"x": v.cell.x, "y": v.cell.y, "type": v.kind.value}
                    for v in spec.victims],
        "start": [spec.start.x, spec.start.y],
        "mission_duration_s": spec.mission_duration_s,
        "red_cutoff_s": spec.red_cutoff_s,
        "fov_radius": spec.fov_radius,
    }
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def read_map(path) -> MapSpec:
    path = Path(path)
    if not path.exists():
        raise SessionFormatError("missing map file", path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SessionFormatError(f"bad map JSON: {exc}", path) from exc
    for key in ("format_version", "name", "width", "height", "walls", "doors", "rubble",
                "victims", "start", "mission_duration_s", "red_cutoff_s", "fov_radius"):
        _require(key in doc, f"map missing {key!r}", path)
    _require(doc["format_version"] == FORMAT_VERSION,
             f"unsupported format_version {doc['format_version']!r}", path)
    spec = MapSpec(
        name=doc["name"],
        grid=GridSpec(int(doc["width"]), int(doc["height"])),
        walls=frozenset(Position(x, y) for x, y in doc["walls"]),
        doors=frozenset(Position(x, y) for x, y in doc["doors"]),
        rubble=frozenset(Position(x, y) for x, y in doc["rubble"]),
        victims=tuple(Victim(Position(int(v["x"]), int(v["y"])), VictimType(v["type"]))
                      for v in doc["victims"]),
        start=Position(int(doc["start"][0]), int(doc["start"][1])),
        mission_duration_s=float(doc["mission_duration_s"]),
        red_cutoff_s=float(doc["red_cutoff_s"]),
        fov_radius=int(doc["fov_radius"]))
    spec.validate()
    return spec


# ---------------------------------------------------------------------------
# Metric tables


@dataclass(frozen=True)
class MetricsTableRow:
    session_id: str
    sed: float
    sms: float
    spa: float
    ci: float
    performance: int


def write_metrics_table(rows: Iterable[MetricsTableRow], path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRICS_COLUMNS)
        for r in rows:
            writer.writerow([r.session_id, fmt_float(r.sed), fmt_float(r.sms),
                             fmt_float(r.spa), fmt_float(r.ci), str(int(r.performance))])
    return path


def read_metrics_table(path) -> list[MetricsTableRow]:
    path = Path(path)
    if not path.exists():
        raise SessionFormatError("missing metrics table", path)
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SessionFormatError("empty file, expected a header", path) from None
        _require(tuple(header) == METRICS_COLUMNS,
                 f"bad header {header!r}, expected {list(METRICS_COLUMNS)}", path, 1)
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            _require(len(rec) == len(METRICS_COLUMNS), f"expected {len(METRICS_COLUMNS)} fields",
                     path, lineno)
            try:
                rows.append(MetricsTableRow(
                    session_id=rec[0], sed=float(rec[1]), sms=float(rec[2]),
                    spa=float(rec[3]), ci=float(rec[4]), performance=int(rec[5])))
            except ValueError as exc:
                raise SessionFormatError(f"bad number: {exc}", path, lineno) from exc
    return rows
