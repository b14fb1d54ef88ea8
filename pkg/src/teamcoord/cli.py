"""Command-line pipelines: simulate corpora, extract metric tables, run the
statistical analyses, and export temporal trends.

Exit codes are stable so shell pipelines can branch: 0 success, 1 I/O or
unreadable inputs, 2 usage (bad flags, missing columns, too few sessions),
3 domain validation (unknown maps, bad policies, invalid sessions). Every
command is deterministic for fixed flags and inputs.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from .core import TeamCoordError
from .metrics import (
    SeriesMetric,
    WindowTooLargeError,
    coordination_metrics,
    metric_time_series,
)
from .outcomes import collective_intelligence, team_performance
from .session_io import (
    MetricsTableRow,
    SessionFormatError,
    fmt_float,
    read_map,
    read_map_meta,
    read_session,
    write_metrics_table,
    write_session,
)
from .sim import AgentPolicy, PolicyKind, builtin_maps, map_meta, run_mission
from .stats import (
    DegenerateDataError,
    bootstrap_mediation,
    one_way_anova,
    ols,
    performance_groups,
    PerformanceGroup,
    quadratic_fit,
    spearman,
)
from .core import Role

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3

METRIC_VARS = ("sed", "sms", "spa", "ci", "performance")


class UsageError(Exception):
    """Post-parse flag/input problems that map to exit code 2."""


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("TEAMCOORD_OUT") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_map(name_or_path: str):
    for spec in builtin_maps():
        if spec.name == name_or_path:
            return spec
    path = Path(name_or_path)
    if path.exists():
        return read_map(path)
    known = ", ".join(m.name for m in builtin_maps())
    raise TeamCoordError(f"unknown map {name_or_path!r} (built-ins: {known})")


def _parse_policies(spec_text: str, params: dict) -> list[tuple[Role, AgentPolicy]]:
    entries = [e.strip() for e in spec_text.split(",") if e.strip()]
    if len(entries) == 1 and ":" not in entries[0]:
        entries = [f"medic:{entries[0]}", f"medic:{entries[0]}",
                   f"engineer:{entries[0]}", f"engineer:{entries[0]}"]
    if len(entries) != 4:
        raise UsageError("policies must be one kind or four role:kind entries")
    out = []
    for e in entries:
        if ":" not in e:
            raise UsageError(f"policy entry {e!r} is not role:kind")
        role_text, kind_text = e.split(":", 1)
        try:
            role = Role(role_text.strip())
        except ValueError:
            raise TeamCoordError(f"unknown role {role_text!r}") from None
        try:
            kind = PolicyKind(kind_text.strip())
        except ValueError:
            known = ", ".join(k.value for k in PolicyKind)
            raise TeamCoordError(f"unknown policy {kind_text!r} (known: {known})") from None
        out.append((role, AgentPolicy(kind, params)))
    return out


def _parse_params(pairs) -> dict:
    params = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise UsageError(f"policy parameter {pair!r} is not key=value")
        key, value = pair.split("=", 1)
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f"policy parameter {pair!r} is not numeric") from None
    return params


def _policy_slug(policies) -> str:
    kinds = {p.kind for _, p in policies}
    return next(iter(kinds)).value if len(kinds) == 1 else "mixed"


def cmd_simulate(args) -> int:
    if args.runs < 1:
        raise UsageError("--runs must be at least 1")
    spec = _load_map(args.map)
    policies = _parse_policies(args.policies, _parse_params(args.policy_param))
    out_dir = _out_dir(args)
    meta = map_meta(spec)
    slug = _policy_slug(policies)
    for i in range(args.runs):
        seed = args.seed + i
        session_id = f"{spec.name}-{slug}-s{seed:05d}"
        session = run_mission(spec, policies, seed=seed, session_id=session_id)
        log_path, _ = write_session(session, out_dir / f"{session_id}.jsonl", map_meta=meta)
        perf = team_performance(session.events)
        rescues = ",".join(f"{k.value}={v}" for k, v in sorted(perf.rescues.items(),
                                                               key=lambda kv: kv[0].value))
        print(f"{session_id} points={perf.points} rescues[{rescues}] log={log_path}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    fallback_meta = map_meta(_load_map(args.map)) if args.map else None
    rows = []
    failures = []
    for path in args.sessions:
        try:
            session = read_session(path)
        except TeamCoordError as exc:
            failures.append(f"{path}: {exc}")
            continue
        meta = read_map_meta(path) or fallback_meta
        if meta is None:
            raise UsageError(f"{path}: no embedded map metadata; pass --map")
        m = coordination_metrics(session, coarsen=args.coarsen)
        ci = collective_intelligence(session, meta)
        perf = team_performance(session.events)
        rows.append(MetricsTableRow(session_id=session.session_id, sed=m.sed, sms=m.sms,
                                    spa=m.spa, ci=ci.team_ci, performance=perf.points))
    for failure in failures:
        print(f"error: {failure}", file=sys.stderr)
    rows.sort(key=lambda r: r.session_id)
    if args.out:
        write_metrics_table(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("session_id", "sed", "sms", "spa", "ci", "performance"))
        for r in rows:
            writer.writerow([r.session_id, fmt_float(r.sed), fmt_float(r.sms), fmt_float(r.spa),
                             fmt_float(r.ci), str(r.performance)])
        sys.stdout.write(buf.getvalue())
    return EXIT_IO if failures else EXIT_OK


# ---------------------------------------------------------------------------
# stats command


def _read_table(path: str) -> list[dict]:
    p = Path(path)
    if not p.exists():
        raise SessionFormatError("missing table", p)
    with p.open(encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _columns(rows: list[dict], names) -> dict[str, np.ndarray]:
    if not rows:
        raise UsageError("table has no data rows")
    missing = [n for n in names if n not in rows[0]]
    if missing:
        raise UsageError(f"table lacks columns: {', '.join(missing)}")
    out = {}
    for n in names:
        try:
            out[n] = np.array([float(r[n]) for r in rows])
        except ValueError as exc:
            raise UsageError(f"column {n!r} is not numeric: {exc}") from None
    return out


def _session_ids(rows: list[dict]) -> list[str]:
    if "session_id" not in rows[0]:
        raise UsageError("table lacks columns: session_id")
    return [r["session_id"] for r in rows]


def _analysis_correlations(rows, args):
    cols = _columns(rows, METRIC_VARS)
    out = []
    for a in METRIC_VARS:
        for b in METRIC_VARS:
            if a == b:
                out.append({"var_a": a, "var_b": b, "rho": 1.0, "p_value": 0.0,
                            "n": len(rows)})
                continue
            try:
                r = spearman(cols[a], cols[b])
                out.append({"var_a": a, "var_b": b, "rho": r.rho, "p_value": r.p_value,
                            "n": r.n})
            except DegenerateDataError:  # a constant column: correlation undefined
                out.append({"var_a": a, "var_b": b, "rho": float("nan"),
                            "p_value": float("nan"), "n": len(rows)})
    return out, ("var_a", "var_b", "rho", "p_value", "n")


def _analysis_regression(rows, args):
    cols = _columns(rows, METRIC_VARS)
    X = np.column_stack([np.ones(len(rows)), cols["sed"], cols["sms"], cols["spa"]])
    out = []
    for response in ("ci", "performance"):
        res = ols(cols[response], X)
        for name, coef, p in zip(("intercept", "sed", "sms", "spa"),
                                 res.coefficients, res.coef_p_values):
            out.append({"response": response, "term": name, "coefficient": coef,
                        "p_value": p, "r_squared": res.r_squared,
                        "f_stat": res.f_stat, "f_p_value": res.f_p_value})
    return out, ("response", "term", "coefficient", "p_value", "r_squared", "f_stat", "f_p_value")


def _analysis_quadratic(rows, args):
    cols = _columns(rows, METRIC_VARS)
    out = []
    for metric in ("sed", "sms", "spa"):
        fit = quadratic_fit(cols[metric], cols["performance"])
        out.append({
            "metric": metric, "constant": fit.c0, "linear": fit.c1, "quadratic": fit.c2,
            "constant_p": fit.p_values[0], "linear_p": fit.p_values[1],
            "quadratic_p": fit.p_values[2], "r_squared": fit.r_squared,
            "f_stat": fit.f_stat, "f_p_value": fit.f_p_value,
            "optimal_value": fit.vertex_x,
            "pattern": "inverted-u" if fit.inverted_u else "u-or-flat",
        })
    return out, ("metric", "constant", "linear", "quadratic", "constant_p", "linear_p",
                 "quadratic_p", "r_squared", "f_stat", "f_p_value", "optimal_value", "pattern")


def _analysis_mediation(rows, args):
    cols = _columns(rows, METRIC_VARS)
    out = []
    for metric in ("sed", "sms", "spa"):
        res = bootstrap_mediation(cols[metric], cols["ci"], cols["performance"],
                                  resamples=args.resamples, seed=args.seed)
        out.append({
            "metric": metric, "a": res.a, "b": res.b, "c_total": res.c_total,
            "c_prime": res.c_prime, "indirect": res.indirect_point,
            "ci_low": res.ci_low, "ci_high": res.ci_high,
            "significant": res.significant,
            "pct_mediated": res.pct_mediated if res.pct_mediated is not None else "",
            "resamples": res.resamples, "seed": res.seed,
        })
    return out, ("metric", "a", "b", "c_total", "c_prime", "indirect", "ci_low", "ci_high",
                 "significant", "pct_mediated", "resamples", "seed")


def _analysis_groups(rows, args):
    cols = _columns(rows, ("performance",))
    ids = _session_ids(rows)
    assignment = performance_groups(dict(zip(ids, cols["performance"])))
    out = [{"session_id": sid, "group": assignment.groups[sid].value,
            "performance": score}
           for sid, score in sorted(zip(ids, cols["performance"]))]
    return out, ("session_id", "group", "performance")


def _analysis_anova(rows, args):
    """Group teams 25/50/25 by each metric and test performance across groups."""
    cols = _columns(rows, ("sed", "sms", "spa", "performance"))
    ids = _session_ids(rows)
    out = []
    for metric in ("sed", "sms", "spa"):
        assignment = performance_groups(dict(zip(ids, cols[metric])))
        by_group = {g: [] for g in PerformanceGroup}
        for sid, perf in zip(ids, cols["performance"]):
            by_group[assignment.groups[sid]].append(perf)
        res = one_way_anova([by_group[PerformanceGroup.BOTTOM25],
                             by_group[PerformanceGroup.MIDDLE50],
                             by_group[PerformanceGroup.TOP25]])
        out.append({
            "metric": metric,
            "mean_low": float(np.mean(by_group[PerformanceGroup.BOTTOM25])),
            "mean_middle": float(np.mean(by_group[PerformanceGroup.MIDDLE50])),
            "mean_high": float(np.mean(by_group[PerformanceGroup.TOP25])),
            "f_stat": res.f, "p_value": res.p_value,
            "df_between": res.df_between, "df_within": res.df_within,
        })
    return out, ("metric", "mean_low", "mean_middle", "mean_high", "f_stat", "p_value",
                 "df_between", "df_within")


_ANALYSES = {
    "correlations": _analysis_correlations,
    "regression": _analysis_regression,
    "quadratic": _analysis_quadratic,
    "mediation": _analysis_mediation,
    "groups": _analysis_groups,
    "timeless-anova": _analysis_anova,
}


def _format_value(v, human: bool) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.4f}" if human else fmt_float(v)
    return str(v)


def _render(rows: list[dict], columns, fmt: str) -> str:
    if fmt == "json-lines":
        return "".join(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n" for r in rows)
    if fmt == "markdown":
        head = "| " + " | ".join(columns) + " |"
        sep = "| " + " | ".join("---" for _ in columns) + " |"
        body = ["| " + " | ".join(_format_value(r[c], True) for c in columns) + " |"
                for r in rows]
        return "\n".join([head, sep, *body]) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_format_value(r[c], False) for c in columns])
    return buf.getvalue()


def cmd_stats(args) -> int:
    rows = _read_table(args.table)
    analysis = _ANALYSES[args.analysis]
    out_rows, columns = analysis(rows, args)
    text = _render(out_rows, columns, args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.analysis} report to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_timeseries(args) -> int:
    if len(args.sessions) < 4:
        raise UsageError("timeseries needs at least 4 sessions for grouping")
    sessions = []
    for path in args.sessions:
        try:
            sessions.append(read_session(path))
        except TeamCoordError as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return EXIT_IO
    scores = {s.session_id: float(team_performance(s.events).points) for s in sessions}
    assignment = performance_groups(scores)
    cutoff_fraction = sessions[0].red_cutoff_s / sessions[0].mission_duration_s

    wanted = {PerformanceGroup.TOP25: "top25", PerformanceGroup.BOTTOM25: "bottom25"}
    bins: dict[tuple[str, float], list[float]] = {}
    for s in sessions:
        group = assignment.groups[s.session_id]
        if group not in wanted:
            continue
        try:
            ts = metric_time_series(s, args.metric, window_ticks=args.window,
                                    smooth_ticks=args.smooth)
        except WindowTooLargeError as exc:
            raise UsageError(str(exc)) from None
        for progress, value in ts.values:
            bins.setdefault((wanted[group], round(progress, 9)), []).append(value)

    out_rows = [
        {"metric": str(args.metric), "group": group, "progress": progress,
         "value": float(np.mean(vals)),
         "phase": "pre-cutoff" if progress < cutoff_fraction else "post-cutoff"}
        for (group, progress), vals in sorted(bins.items())
    ]
    text = _render(out_rows, ("metric", "group", "progress", "value", "phase"), args.format)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {len(out_rows)} rows to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teamcoord",
        description="Simulate grid search-and-rescue missions, score spatial "
                    "coordination, and run the analysis pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run seeded missions and write session logs")
    p_sim.add_argument("--map", required=True, help="built-in map name or map JSON path")
    p_sim.add_argument("--policies", default="coordinated",
                       help="one policy kind for all agents, or four role:kind entries")
    p_sim.add_argument("--policy-param", action="append", metavar="KEY=VALUE",
                       help="numeric policy parameter, repeatable")
    p_sim.add_argument("--runs", type=int, default=1)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", help="output directory (default $TEAMCOORD_OUT or .)")
    p_sim.set_defaults(func=cmd_simulate)

    p_met = sub.add_parser("metrics", help="compute the per-session metric table")
    p_met.add_argument("sessions", nargs="+", help="session log paths (.jsonl)")
    p_met.add_argument("--coarsen", type=int, default=1,
                       help="pool k x k tile blocks before computing occupancy")
    p_met.add_argument("--map", help="map JSON for sessions without embedded metadata")
    p_met.add_argument("--out", help="output CSV path (default stdout)")
    p_met.set_defaults(func=cmd_metrics)

    p_sta = sub.add_parser("stats", help="run an analysis over a metric table")
    p_sta.add_argument("--table", required=True, help="metric table CSV")
    p_sta.add_argument("--analysis", required=True, choices=sorted(_ANALYSES))
    p_sta.add_argument("--resamples", type=int, default=5000)
    p_sta.add_argument("--seed", type=int, default=0)
    p_sta.add_argument("--format", choices=("csv", "json-lines", "markdown"), default="csv")
    p_sta.add_argument("--out", help="output path (default stdout)")
    p_sta.set_defaults(func=cmd_stats)

    p_ts = sub.add_parser("timeseries",
                          help="averaged top/bottom-group metric trends over mission progress")
    p_ts.add_argument("sessions", nargs="+", help="session log paths (.jsonl)")
    p_ts.add_argument("--metric", required=True,
                      choices=[m.value for m in SeriesMetric])
    p_ts.add_argument("--window", type=int, default=20)
    p_ts.add_argument("--smooth", type=int, default=5)
    p_ts.add_argument("--format", choices=("csv", "json-lines", "markdown"), default="csv")
    p_ts.add_argument("--out", help="output path (default stdout)")
    p_ts.set_defaults(func=cmd_timeseries)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 0 for --help, 2 for usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SessionFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TeamCoordError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    sys.exit(main())
