"""Command line entry point: run, sweep, oracle, validate.

Exit codes: 0 success, 1 oracle violation, 2 missing scenario file,
3 schema or argument error in the scenario, 4 failure while running.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Optional, Sequence

from . import __version__, oracles, scenario, tracker
from .metrics import METRIC_COLUMNS, EpisodeMetrics, aggregate

EXIT_OK = 0
EXIT_ORACLE = 1
EXIT_MISSING = 2
EXIT_SCHEMA = 3
EXIT_RUNTIME = 4

SUMMARY_STATS = ("mean", "sd", "min", "max")


class CliError(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def _load(path: str, overrides: Sequence[str]) -> dict:
    p = Path(path)
    if not p.is_file():
        raise CliError(EXIT_MISSING, f"scenario file not found: {path}")
    try:
        doc = scenario.load(p)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_SCHEMA, f"(document): not valid JSON: {exc}") from exc
    except OSError as exc:
        raise CliError(EXIT_MISSING, f"cannot read {path}: {exc}") from exc
    try:
        scenario.validate_document(doc)
        doc = scenario.apply_overrides(doc, list(overrides))
    except scenario.ScenarioError as exc:
        raise CliError(EXIT_SCHEMA, str(exc)) from exc
    return doc


def _build(doc: dict) -> scenario.Scenario:
    try:
        return scenario.build(doc)
    except scenario.ScenarioError as exc:
        raise CliError(EXIT_SCHEMA, str(exc)) from exc


def _select_configs(sc: scenario.Scenario, wanted: Optional[Sequence[str]]) -> list[str]:
    names = sorted(sc.configs)
    if not wanted:
        return names
    unknown = sorted(set(wanted) - set(names))
    if unknown:
        raise CliError(EXIT_SCHEMA, f"strategies.configs: unknown config(s) {', '.join(unknown)}")
    return sorted(set(wanted))


_WORKER_CACHE: dict[str, scenario.Scenario] = {}


def _episode_job(doc: dict, config: str, seed: int, want_trace: bool) -> tuple[dict, Optional[str]]:
    key = scenario.digest(doc)
    sc = _WORKER_CACHE.get(key)
    if sc is None:
        sc = _WORKER_CACHE[key] = scenario.build(doc)
    metrics, trace = tracker.run_episode(sc, config, seed, keep_trace=want_trace)
    return metrics.__dict__.copy(), (trace.dumps() if want_trace else None)


def _run_jobs(jobs: list[tuple[dict, str, int, bool]], workers: int) -> list[tuple[dict, Optional[str]]]:
    try:
        if workers <= 1 or len(jobs) <= 1:
            return [_episode_job(*job) for job in jobs]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_episode_job, *zip(*jobs)))
    except CliError:
        raise
    except Exception as exc:  # any failure inside an episode
        raise CliError(EXIT_RUNTIME, f"episode failed: {type(exc).__name__}: {exc}") from exc


def _table(groups: list[tuple[Optional[Any], str, list[tuple[int, EpisodeMetrics]]]], sweep: bool):
    """Episode rows sorted by (value, config, seed), then summary rows."""
    lead = ["row_type"] + (["value"] if sweep else []) + ["config", "seed"]
    columns = lead + list(METRIC_COLUMNS)
    rows, summaries = [], []
    for value, config, episodes in groups:
        for seed, m in sorted(episodes, key=lambda e: e[0]):
            row = {"row_type": "episode", "config": config, "seed": seed, **m.scalars()}
            if sweep:
                row["value"] = value
            rows.append(row)
        summary = aggregate(m for _, m in episodes)
        for stat in SUMMARY_STATS:
            row = {"row_type": stat, "config": config, "seed": None}
            if sweep:
                row["value"] = value
            for name in METRIC_COLUMNS:
                row[name] = getattr(summary[name], stat)
            summaries.append(row)
    return columns, rows + summaries


def _csv_text(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _write_outputs(out: Path, columns, rows, traces: dict[str, str], report: dict) -> dict:
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "metrics.csv").write_bytes(_csv_text(columns, rows).encode("utf-8"))
        doc = {"columns": columns, "sd_kind": "population", "rows": [{c: r.get(c) for c in columns} for r in rows]}
        (out / "metrics.json").write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
        if traces:
            (out / "traces").mkdir(exist_ok=True)
            for name, text in sorted(traces.items()):
                (out / "traces" / name).write_bytes(text.encode("utf-8"))
        report = {**report, "csv": "metrics.csv", "json": "metrics.json",
                  "traces": [f"traces/{n}" for n in sorted(traces)]}
        (out / "report.json").write_text(json.dumps(report, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_RUNTIME, f"cannot write outputs to {out}: {exc}") from exc
    return report


def _episodes(doc: dict, configs: list[str], seeds: list[int], want_trace: bool, jobs: int):
    keys = [(c, s) for c in configs for s in seeds]
    results = _run_jobs([(doc, c, s, want_trace) for c, s in keys], jobs)
    per_config: dict[str, list[tuple[int, EpisodeMetrics]]] = {c: [] for c in configs}
    traces = {}
    for (c, s), (fields, trace) in zip(keys, results):
        per_config[c].append((s, EpisodeMetrics(**fields)))
        if trace is not None:
            traces[(c, s)] = trace
    return per_config, traces


def cmd_run(args) -> int:
    doc = _load(args.scenario, args.set)
    sc = _build(doc)
    configs = _select_configs(sc, args.config)
    per_config, traces = _episodes(doc, configs, sc.seeds, args.trace, args.jobs)
    columns, rows = _table([(None, c, per_config[c]) for c in configs], sweep=False)
    named = {f"{c}__seed{s}.ndjson": t for (c, s), t in traces.items()}
    report = {"scenario": sc.name, "digest": scenario.digest(doc), "version": __version__,
              "seeds": list(sc.seeds), "configs": configs}
    _write_outputs(Path(args.out), columns, rows, named, report)
    print(f"{len(rows)} rows ({len(configs)} configs x {len(sc.seeds)} seeds + summaries) -> {args.out}")
    return EXIT_OK


def _parse_values(raw: Sequence[str]) -> list[float]:
    items = [v for chunk in raw for v in chunk.split(",") if v.strip()]
    if not items:
        raise CliError(EXIT_SCHEMA, "sweep needs at least one value")
    out = []
    for v in items:
        try:
            out.append(json.loads(v))
        except json.JSONDecodeError:
            raise CliError(EXIT_SCHEMA, f"sweep value {v!r} is not a number") from None
        if isinstance(out[-1], bool) or not isinstance(out[-1], (int, float)):
            raise CliError(EXIT_SCHEMA, f"sweep value {v!r} is not a number")
    return out


def cmd_sweep(args) -> int:
    values = _parse_values(args.values)
    base = _load(args.scenario, args.set)
    try:
        current = scenario.get_path(base, args.param)
    except (KeyError, IndexError, ValueError, TypeError):
        raise CliError(EXIT_SCHEMA, f"{args.param}: no such field") from None
    if isinstance(current, bool) or not isinstance(current, (int, float)):
        raise CliError(EXIT_SCHEMA, f"{args.param}: field is not numeric")
    groups, named, seeds, configs = [], {}, None, None
    docs = []
    for value in values:
        doc = scenario.apply_overrides(base, [f"{args.param}={json.dumps(value)}"])
        sc = _build(doc)
        configs = _select_configs(sc, args.config)
        if seeds is None:
            seeds = list(sc.seeds)
        docs.append(doc)
    # one shared seed list keeps the runs paired across values
    for i, (value, doc) in enumerate(zip(values, docs)):
        per_config, traces = _episodes(doc, configs, seeds, args.trace, args.jobs)
        groups += [(value, c, per_config[c]) for c in configs]
        named.update({f"v{i}__{c}__seed{s}.ndjson": t for (c, s), t in traces.items()})
    columns, rows = _table(groups, sweep=True)
    report = {"scenario": base.get("name", ""), "digest": scenario.digest(base), "version": __version__,
              "seeds": seeds, "configs": configs, "parameter": args.param, "values": values}
    _write_outputs(Path(args.out), columns, rows, named, report)
    print(f"{len(rows)} rows ({len(values)} values x {len(configs)} configs x {len(seeds)} seeds + summaries)"
          f" -> {args.out}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.trials < 1:
        raise CliError(EXIT_SCHEMA, "--trials must be at least 1")
    report = oracles.run_oracle(args.check, args.trials, args.seed)
    body = report.to_dict()
    if args.out:
        try:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            (Path(args.out) / f"oracle_{args.check}.json").write_text(json.dumps(body, indent=1) + "\n",
                                                                     encoding="utf-8")
        except OSError as exc:
            raise CliError(EXIT_RUNTIME, f"cannot write oracle report: {exc}") from exc
    print(f"oracle {args.check}: {report.passed}/{report.trials} passed, max deviation {report.max_deviation!r}")
    if report.stats:
        print(json.dumps(report.stats, sort_keys=True))
    if not report.ok:
        for failure in report.failures:
            print(json.dumps(failure, sort_keys=True), file=sys.stderr)
        return EXIT_ORACLE
    return EXIT_OK


def cmd_validate(args) -> int:
    doc = _load(args.scenario, args.set)
    sc = _build(doc)
    print(f"{args.scenario}: valid ({sc.name}, {len(sc.configs)} configs, {len(sc.seeds)} seeds,"
          f" digest {scenario.digest(doc)[:12]})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="airtrack", description="UAV-aided urban target tracking simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("scenario", help="scenario JSON file")
        p.add_argument("--set", action="append", default=[], metavar="PATH=VALUE",
                       help="override a scenario field (repeatable)")
        if out_required is not None:
            p.add_argument("--out", required=out_required, help="output directory")
            p.add_argument("--trace", action="store_true", help="write one NDJSON event trace per episode")
            p.add_argument("--jobs", type=int, default=1, help="parallel episode workers")
            p.add_argument("--config", action="append", help="only run this strategy config (repeatable)")

    p = sub.add_parser("run", help="run every configured (config, seed) episode")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run once per value of a numeric scenario field, paired seeds")
    common(p)
    p.add_argument("--param", required=True, help="dotted path of a numeric field")
    p.add_argument("--values", nargs="*", default=[], help="values, space or comma separated")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="compare a strategy with its brute-force optimum")
    p.add_argument("check", choices=sorted(oracles.CHECKS))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="directory for the JSON report")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("validate", help="check a scenario against the schema")
    common(p, out_required=None)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
