"""Command-line front end: ``dayahead {synth,run,plot,validate-data}``.

Exit codes: 0 success, 2 bad configuration or arguments, 3 bad input data,
4 one or more scenario runs failed, 5 file system errors.  Failures also
print a JSON error summary on stderr (and ``errors.json`` for ``run``).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .config import OUTPUT_ENV, RunConfig, load_run_config, load_synth_config, parse_run_config, read_yaml
from .errors import ConfigError, DayAheadError, ReportError
from .features import build_dataset
from .ingest import FILENAMES, SCHEMAS, DataBundle, SynthConfig, file_digest, generate_synthetic, read_bundle, write_bundle
from .plot import write_svg
from .report import ScenarioReport, read_report
from .scenarios import ScenarioConfig, run_scenario, seasonal_naive_report
from .tables import summary_tables, tables_csv, tables_text

log = logging.getLogger("dayahead")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUN, EXIT_IO = 0, 2, 3, 4, 5
MANIFEST_VERSION = 1


class CommandError(Exception):
    def __init__(self, code: int, errors: list[dict]):
        super().__init__(errors[0]["message"] if errors else "")
        self.code = code
        self.errors = errors


def _error(exc: BaseException, **extra) -> dict:
    return {"type": type(exc).__name__, "message": str(exc), **extra}


def job_label(cfg: ScenarioConfig) -> str:
    return f"{cfg.kind}_{'+'.join(cfg.features)}_{cfg.architecture}_seed{cfg.train.seed}"


def data_digests(data_dir) -> dict:
    return {FILENAMES[k]: file_digest(Path(data_dir) / FILENAMES[k]) for k in SCHEMAS}


# --------------------------------------------------------------------------- synth


def cmd_synth(config: Optional[str], out_dir, seed: Optional[int] = None) -> dict:
    cfg = load_synth_config(config) if config else SynthConfig()
    if seed is not None:
        cfg = SynthConfig(**{**asdict(cfg), "seed": seed})
    try:
        manifest = write_bundle(generate_synthetic(cfg), out_dir, cfg)
    except OSError as e:
        raise CommandError(EXIT_IO, [_error(e, path=str(out_dir))]) from e
    log.info("wrote synthetic bundle to %s", out_dir)
    return manifest


# --------------------------------------------------------------------------- run


def execute_job(data: DataBundle, cfg: ScenarioConfig) -> tuple[Optional[str], Optional[dict], float]:
    """Run one scenario; returns (report JSON, error, seconds).  Safe in a worker process."""
    t0 = time.perf_counter()
    try:
        text = run_scenario(data, cfg).dumps()
        return text, None, time.perf_counter() - t0
    except DayAheadError as e:
        return None, _error(e), time.perf_counter() - t0


def _run_jobs(data: DataBundle, jobs: Sequence[ScenarioConfig], workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [execute_job(data, cfg) for cfg in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(execute_job, data, cfg) for cfg in jobs]
        return [f.result() for f in futures]


def load_run_source(path) -> tuple[RunConfig, Optional[dict]]:
    """A YAML run config, or a ``manifest.json`` from an earlier run."""
    path = Path(path)
    if path.suffix == ".json":
        try:
            manifest = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"{path}: cannot read manifest ({e})") from e
        if not isinstance(manifest, dict) or manifest.get("manifest_version") != MANIFEST_VERSION:
            raise ConfigError(f"{path}: not a run manifest (manifest_version {MANIFEST_VERSION} expected)")
        return parse_run_config(manifest["config"], manifest["base_dir"]), manifest
    read_yaml(path)  # surface YAML errors with the path
    return load_run_config(path), None


def cmd_run(config_path, out_dir=None, seed: Optional[int] = None, workers: Optional[int] = None) -> dict:
    timings = {}
    t0 = time.perf_counter()
    try:
        rc, previous = load_run_source(config_path)
    except ConfigError as e:
        raise CommandError(EXIT_CONFIG, [_error(e)]) from e
    if seed is not None:
        src = {**rc.source, "seeds": [seed]}
        rc = parse_run_config(src, Path(config_path).parent if previous is None else previous["base_dir"])
    n_workers = workers or rc.workers

    try:
        digests = data_digests(rc.data_dir)
        data = read_bundle(rc.data_dir)
    except OSError as e:
        raise CommandError(EXIT_IO, [_error(e, path=str(rc.data_dir))]) from e
    except DayAheadError as e:
        raise CommandError(EXIT_DATA, [_error(e, path=str(rc.data_dir))]) from e
    if previous is not None and previous.get("data_digests") != digests:
        changed = sorted(k for k in digests if previous.get("data_digests", {}).get(k) != digests[k])
        raise CommandError(EXIT_DATA, [{"type": "DigestMismatch",
                                        "message": f"input files differ from the manifest: {', '.join(changed)}"}])
    timings["load_data"] = time.perf_counter() - t0

    jobs = rc.scenario_configs()
    labels = [job_label(j) for j in jobs]
    log.info("running %d scenario jobs with %d worker(s)", len(jobs), n_workers)
    results = _run_jobs(data, jobs, n_workers)

    out = rc.resolve_output(out_dir)
    rep_dir = out / "reports"
    try:
        rep_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise CommandError(EXIT_IO, [_error(e, path=str(rep_dir))]) from e
    reports, errors, report_digests = [], [], {}
    timings["jobs"] = {}
    for label, (text, err, secs) in zip(labels, results):
        timings["jobs"][label] = secs
        if err is not None:
            errors.append({**err, "job": label})
            continue
        rep = ScenarioReport.from_dict(json.loads(text))
        _write_report(rep_dir, label, rep, text)
        reports.append(rep)
        report_digests[label] = file_digest(rep_dir / f"{label}.json")
    if rc.naive_baseline:
        t1 = time.perf_counter()
        try:
            rep = seasonal_naive_report(build_dataset(data, ["weather"]), rc.split)
            text = rep.dumps()
            _write_report(rep_dir, "seasonal-naive", rep, text)
            reports.append(rep)
            report_digests["seasonal-naive"] = file_digest(rep_dir / "seasonal-naive.json")
        except DayAheadError as e:
            errors.append({**_error(e), "job": "seasonal-naive"})
        timings["seasonal_naive"] = time.perf_counter() - t1

    t1 = time.perf_counter()
    tables = summary_tables(reports)
    (out / "summary.txt").write_text(tables_text(tables), encoding="utf-8")
    (out / "summary.csv").write_text(tables_csv(tables), encoding="utf-8")
    timings["summary"] = time.perf_counter() - t1
    timings["total"] = time.perf_counter() - t0

    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "tool_version": __version__,
        "python": sys.version.split()[0],
        "config": rc.source,
        "base_dir": str(Path(config_path).resolve().parent) if previous is None else previous["base_dir"],
        "data_dir": str(rc.data_dir),
        "data_digests": digests,
        "seeds": list(rc.seeds),
        "jobs": labels,
        "reports": report_digests,
        "timings_s": timings,
        "status": "ok" if not errors else "failed",
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    if errors:
        (out / "errors.json").write_text(json.dumps({"errors": errors}, indent=1) + "\n", encoding="utf-8")
        raise CommandError(EXIT_RUN, errors)
    if tables:
        print(tables_text(tables), end="")
    return manifest


def _write_report(rep_dir: Path, label: str, rep: ScenarioReport, text: str) -> None:
    (rep_dir / f"{label}.json").write_text(text, encoding="utf-8")
    rep.write_daily_csv(rep_dir / f"{label}_daily_mape.csv")


# --------------------------------------------------------------------------- plot / validate


def cmd_plot(report_paths: Sequence[str], out_svg, title: Optional[str] = None) -> None:
    try:
        reports = [read_report(p) for p in report_paths]
    except OSError as e:
        raise CommandError(EXIT_IO, [_error(e)]) from e
    except ReportError as e:
        raise CommandError(EXIT_DATA, [_error(e)]) from e
    if title is None:
        kinds = sorted({r.kind for r in reports})
        title = f"Daily MAPE: {', '.join(kinds)}" if kinds else "Daily MAPE"
    try:
        write_svg(reports, out_svg, title)
    except ReportError as e:
        raise CommandError(EXIT_DATA, [_error(e)]) from e


def cmd_validate_data(data_dir) -> dict:
    data_dir = Path(data_dir)
    try:
        bundle = read_bundle(data_dir)
    except OSError as e:
        raise CommandError(EXIT_IO, [_error(e, path=str(data_dir))]) from e
    except DayAheadError as e:
        raise CommandError(EXIT_DATA, [_error(e, path=str(data_dir))]) from e
    summary = {"load": _describe(bundle.load)}
    for kind in ("weather", "covid", "mobility"):
        for s in getattr(bundle, kind):
            summary[s.name] = _describe(s)
    return summary


def _describe(s) -> dict:
    if hasattr(s, "start_date"):
        return {"start": str(s.start_date), "days": len(s.values)}
    return {"start": str(s.start), "end": str(s.end), "hours": len(s.values)}


# --------------------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dayahead", description="Day-ahead load forecasting experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a synthetic regime-shift data bundle")
    s.add_argument("--config", help="YAML file with synthetic generator fields")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--seed", type=int)

    r = sub.add_parser("run", help="run scenarios from a YAML config or an earlier manifest.json")
    r.add_argument("config")
    r.add_argument("--out", help=f"output directory (default: config output_dir, ${OUTPUT_ENV}, ./runs)")
    r.add_argument("--seed", type=int, help="run only this seed")
    r.add_argument("--workers", type=int)

    g = sub.add_parser("plot", help="daily MAPE chart from one or more reports")
    g.add_argument("reports", nargs="*")
    g.add_argument("--out", required=True)
    g.add_argument("--title")

    v = sub.add_parser("validate-data", help="schema and gap check of a data directory")
    v.add_argument("data_dir")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        if args.command == "synth":
            manifest = cmd_synth(args.config, args.out, args.seed)
            print(json.dumps(manifest["files"], indent=1, sort_keys=True))
        elif args.command == "run":
            cmd_run(args.config, args.out, args.seed, args.workers)
        elif args.command == "plot":
            cmd_plot(args.reports, args.out, args.title)
        elif args.command == "validate-data":
            print(json.dumps(cmd_validate_data(args.data_dir), indent=1))
    except CommandError as e:
        err = e
    except ConfigError as e:
        err = CommandError(EXIT_CONFIG, [_error(e)])
    else:
        return EXIT_OK
    print(json.dumps({"status": "error", "command": args.command, "exit_code": err.code, "errors": err.errors},
                     indent=1), file=sys.stderr)
    return err.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
