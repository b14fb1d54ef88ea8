import numpy as np
import pytest

from teamcoord.core import DISCONTINUITY, Role
from teamcoord.session_io import (
    MetricsTableRow,
    SessionFormatError,
    SessionValidationError,
    fmt_float,
    manifest_path_for,
    read_map,
    read_map_meta,
    read_metrics_table,
    read_session,
    write_map,
    write_metrics_table,
    write_session,
)
from teamcoord.sim import AgentPolicy, PolicyKind, builtin_map, builtin_maps, map_meta, run_mission

from helpers import random_session

POLICIES = [(Role.MEDIC, AgentPolicy(PolicyKind.GREEDY))] * 2 + \
           [(Role.ENGINEER, AgentPolicy(PolicyKind.GREEDY))] * 2


@pytest.fixture(scope="module")
def sim_session():
    return run_mission(builtin_map("small"), POLICIES, seed=5)


def test_session_roundtrip_from_simulator(tmp_path, sim_session):
    log = tmp_path / "s.jsonl"
    write_session(sim_session, log)
    assert read_session(log) == sim_session


def test_session_roundtrip_random_sessions(tmp_path):
    rng = np.random.default_rng(13)
    for i in range(25):
        s = random_session(rng, n_ticks=8, session_id=f"case{i}")
        log = tmp_path / f"{i}.jsonl"
        write_session(s, log)
        assert read_session(log) == s


def test_session_files_byte_deterministic(tmp_path, sim_session):
    a, am = write_session(sim_session, tmp_path / "a.jsonl")
    b, bm = write_session(sim_session, tmp_path / "b.jsonl")
    assert a.read_bytes() == b.read_bytes()
    assert am.read_bytes() == bm.read_bytes()
    assert b"\r" not in a.read_bytes()


def test_map_meta_embedding(tmp_path, sim_session):
    meta = map_meta(builtin_map("small"))
    log = tmp_path / "s.jsonl"
    write_session(sim_session, log, map_meta=meta)
    assert read_map_meta(log) == meta
    bare = tmp_path / "bare.jsonl"
    write_session(sim_session, bare)
    assert read_map_meta(bare) is None


def test_truncated_line_reports_line_number(tmp_path, sim_session):
    log, _ = write_session(sim_session, tmp_path / "s.jsonl")
    lines = log.read_text().splitlines()
    lines[6] = lines[6][: len(lines[6]) // 2]
    log.write_text("\n".join(lines) + "\n")
    with pytest.raises(SessionFormatError) as exc:
        read_session(log)
    assert exc.value.line == 7
    assert "s.jsonl:7" in str(exc.value)


def test_missing_manifest_is_an_error(tmp_path, sim_session):
    log, manifest = write_session(sim_session, tmp_path / "s.jsonl")
    manifest.unlink()
    with pytest.raises(SessionFormatError):
        read_session(log)


def test_skipped_tick_surfaces_validation_report(tmp_path, sim_session):
    log, _ = write_session(sim_session, tmp_path / "s.jsonl")
    lines = log.read_text().splitlines()
    # drop all four player lines of tick 3
    kept = [ln for ln in lines if '"tick":3,' not in ln]
    log.write_text("\n".join(kept) + "\n")
    with pytest.raises(SessionValidationError) as exc:
        read_session(log)
    assert any(v.code == DISCONTINUITY for v in exc.value.report)
    # the permissive mode still loads it for inspection
    session = read_session(log, validate=False)
    assert session.n_ticks == sim_session.n_ticks - 1


def test_map_roundtrip_and_determinism(tmp_path):
    for spec in builtin_maps():
        p1 = write_map(spec, tmp_path / f"{spec.name}1.json")
        p2 = write_map(spec, tmp_path / f"{spec.name}2.json")
        assert p1.read_bytes() == p2.read_bytes()
        assert read_map(p1) == spec


def test_map_rejects_bad_payload(tmp_path):
    p = tmp_path / "m.json"
    p.write_text("{}")
    with pytest.raises(SessionFormatError):
        read_map(p)
    p.write_text("not json")
    with pytest.raises(SessionFormatError):
        read_map(p)


def test_metrics_table_empty_is_header_only(tmp_path):
    p = write_metrics_table([], tmp_path / "m.csv")
    assert p.read_text() == "session_id,sed,sms,spa,ci,performance\n"
    assert read_metrics_table(p) == []


def test_metrics_table_roundtrip_single_row(tmp_path):
    row = MetricsTableRow("s1", sed=1 / 3, sms=0.5249999999999999, spa=0.0, ci=0.1234567891234,
                          performance=220)
    p = write_metrics_table([row], tmp_path / "m.csv")
    assert read_metrics_table(p) == [row]


def test_metrics_table_34_rows_is_35_lines(tmp_path):
    rng = np.random.default_rng(7)
    rows = [MetricsTableRow(f"t{i:02d}", *rng.random(4), performance=int(rng.integers(500)))
            for i in range(34)]
    p = write_metrics_table(rows, tmp_path / "m.csv")
    assert len(p.read_text().splitlines()) == 35
    assert read_metrics_table(p) == rows


def test_metrics_table_bad_header_and_numbers(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("who,sed,sms,spa,ci,performance\n")
    with pytest.raises(SessionFormatError):
        read_metrics_table(p)
    p.write_text("session_id,sed,sms,spa,ci,performance\ns1,a,b,c,d,e\n")
    with pytest.raises(SessionFormatError) as exc:
        read_metrics_table(p)
    assert exc.value.line == 2


def test_fmt_float_round_trips_exactly():
    rng = np.random.default_rng(3)
    values = list(rng.random(200)) + [0.0, 1.0, 1 / 3, 0.1, 1e-17, 123456.789]
    for v in values:
        assert float(fmt_float(v)) == v


def test_manifest_path_convention():
    assert manifest_path_for("runs/a.jsonl").name == "a.manifest.json"
    assert manifest_path_for("runs/a.log").name == "a.log.manifest.json"
