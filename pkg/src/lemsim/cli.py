"""Command-line front end: generate, run, sweep, metrics.

Sweeps parallelize at scenario granularity only, so results are
byte-identical for any --jobs value, and the sweep manifest is replaced
atomically after every scenario so an interrupted sweep can resume.
"""
from __future__ import annotations

import argparse
import json
import logging
import multiprocessing
import os
import sys
from pathlib import Path

from .core import (ConfigError, Scenario, SimConfig, config_dict,
                   validate_config)
from .engine import load_run, persist_run, run_scenario
from .metrics import (DEFAULT_PEAK_FRACTION, MetricsError, pair_metrics,
                      summary_row, write_metrics_json, write_summary_csv)
from .profiles import ProfileError, ProfileSet
from .scenarios import (build_profiles, enumerate_scenarios, manifest_dict,
                        raw_scenario_count)

log = logging.getLogger("lemsim")

_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING,
               "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    wanted = os.environ.get("LEMSIM_LOG", "warn").lower()
    level = _LOG_LEVELS.get(wanted)
    logging.basicConfig(level=level or logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if level is None and wanted not in _LOG_LEVELS:
        log.warning("LEMSIM_LOG=%r not in %s; using warn",
                    wanted, sorted(_LOG_LEVELS))


def _load_config(path: str) -> SimConfig:
    with open(path) as fh:
        return validate_config(json.load(fh))


def _scenario_from_manifest(manifest: dict, config: SimConfig,
                            seed: int | None) -> Scenario:
    by_name = {t.name: t for t in config.topologies}
    name = manifest["topology"]
    if name not in by_name:
        raise ConfigError(f"manifest topology {name!r} not in config")
    shares = manifest["shares"]
    return Scenario(by_name[name], shares["pv"], shares["ev"], shares["hp"],
                    manifest["seed"] if seed is None else seed,
                    tuple(manifest["weeks"]))


def _profiles_for(scenario: Scenario, config: SimConfig) -> ProfileSet:
    return build_profiles(scenario.topology, scenario.seed, config.devices,
                          weeks=config.weeks)


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    config = _load_config(args.config)
    scenarios = enumerate_scenarios(config.topologies, config.weeks,
                                    config.seed, config.share_triples)
    raw = raw_scenario_count(config.topologies, config.share_triples)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    echo = config_dict(config)
    for scenario in scenarios:
        manifest = manifest_dict(scenario)
        manifest["config"] = echo
        with (out / f"{scenario.scenario_id}.json").open("w") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    log.info("wrote %d manifests to %s", len(scenarios), out)
    print(f"{raw} raw / {len(scenarios)} runnable")
    return 0


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def cmd_run(args) -> int:
    with open(args.scenario) as fh:
        manifest = json.load(fh)
    config = validate_config(manifest.get("config", {}))
    scenario = _scenario_from_manifest(manifest, config, args.seed)
    profiles = _profiles_for(scenario, config)
    result = run_scenario(scenario, profiles, config,
                          lem_enabled=args.lem == "on")
    persist_run(result, args.out)
    log.info("run %s lem=%s -> %s", scenario.scenario_id, args.lem, args.out)
    print(args.out)
    return 0


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _scenario_job(payload: dict) -> tuple[str, dict | None, str | None]:
    """Run one scenario twice (LEM on/off) and report its summary row.

    Runs inside a worker process; everything it needs arrives as plain
    JSON-ready data, and errors come back as strings so one bad scenario
    cannot poison the pool.
    """
    sid = payload["manifest"]["id"]
    try:
        config = validate_config(payload["config"])
        scenario = _scenario_from_manifest(payload["manifest"], config, None)
        profiles = _profiles_for(scenario, config)
        run_dir = Path(payload["run_dir"])
        result_on = run_scenario(scenario, profiles, config, lem_enabled=True)
        persist_run(result_on, run_dir / "with")
        result_off = run_scenario(scenario, profiles, config,
                                  lem_enabled=False)
        persist_run(result_off, run_dir / "without")
        pair = pair_metrics(result_on, result_off)
        write_metrics_json(pair, run_dir / "metrics.json")
        row = summary_row(scenario.topology.name,
                          (scenario.share_pv, scenario.share_ev,
                           scenario.share_hp), pair)
        return sid, row, None
    except Exception as exc:  # noqa: BLE001 - reported via the manifest
        return sid, None, f"{type(exc).__name__}: {exc}"


def _write_sweep_manifest(path: Path, entries: dict[str, dict]) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w") as fh:
        json.dump({"entries": list(entries.values())}, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def _recovered_row(scenario: Scenario, run_dir: Path) -> dict:
    with (run_dir / "metrics.json").open() as fh:
        pair = json.load(fh)
    return summary_row(scenario.topology.name,
                       (scenario.share_pv, scenario.share_ev,
                        scenario.share_hp), pair)


def cmd_sweep(args) -> int:
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    config = _load_config(args.config)
    scenarios = enumerate_scenarios(config.topologies, config.weeks,
                                    config.seed, config.share_triples)
    out = Path(args.out)
    (out / "runs").mkdir(parents=True, exist_ok=True)
    manifest_path = out / "manifest.json"

    previous: dict[str, dict] = {}
    if args.resume and manifest_path.exists():
        with manifest_path.open() as fh:
            previous = {e["id"]: e for e in json.load(fh)["entries"]}

    echo = config_dict(config)
    entries: dict[str, dict] = {}
    rows: dict[str, dict] = {}
    todo = []
    for scenario in scenarios:
        sid = scenario.scenario_id
        result_rel = f"runs/{sid}"
        if previous.get(sid, {}).get("status") == "done":
            entries[sid] = previous[sid]
            rows[sid] = _recovered_row(scenario, out / result_rel)
            continue
        entries[sid] = {"id": sid, "status": "pending", "result": result_rel}
        manifest = manifest_dict(scenario)
        todo.append({"manifest": manifest, "config": echo,
                     "run_dir": str(out / result_rel)})
    _write_sweep_manifest(manifest_path, entries)
    log.info("sweep: %d scenarios, %d to run, jobs=%d",
             len(scenarios), len(todo), args.jobs)

    by_sid = {s.scenario_id: s for s in scenarios}

    def record(sid: str, row: dict | None, error: str | None) -> None:
        if row is not None:
            entries[sid]["status"] = "done"
            rows[sid] = row
        else:
            entries[sid] = {**entries[sid], "status": "failed", "error": error}
            log.error("scenario %s failed: %s", sid, error)
        _write_sweep_manifest(manifest_path, entries)

    if args.jobs == 1 or len(todo) <= 1:
        for payload in todo:
            record(*_scenario_job(payload))
    else:
        with multiprocessing.Pool(args.jobs) as pool:
            for sid, row, error in pool.imap_unordered(_scenario_job, todo):
                record(sid, row, error)

    ordered = sorted(rows, key=lambda sid: (by_sid[sid].topology.name,
                                            by_sid[sid].share_pv,
                                            by_sid[sid].share_ev,
                                            by_sid[sid].share_hp))
    write_summary_csv([rows[sid] for sid in ordered], out / "summary.csv")
    failed = sum(1 for e in entries.values() if e["status"] == "failed")
    print(f"{len(rows)} done / {failed} failed -> {out / 'summary.csv'}")
    return 0 if failed == 0 else 1


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def cmd_metrics(args) -> int:
    run_with = load_run(args.with_dir)
    run_without = load_run(args.without_dir)
    payload = pair_metrics(run_with, run_without, fraction=args.fraction)
    write_metrics_json(payload, args.out)
    print(args.out)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lemsim",
        description="Local energy market simulation: scenario generation, "
                    "runs, sweeps, and outcome metrics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="write scenario manifests")
    p_gen.add_argument("--config", required=True, help="config JSON file")
    p_gen.add_argument("--out", required=True, help="manifest directory")
    p_gen.set_defaults(func=cmd_generate)

    p_run = sub.add_parser("run", help="simulate one scenario")
    p_run.add_argument("--scenario", required=True,
                       help="scenario manifest JSON file")
    p_run.add_argument("--lem", required=True, choices=("on", "off"))
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the manifest seed")
    p_run.add_argument("--out", required=True, help="run output directory")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run every scenario twice")
    p_sweep.add_argument("--config", required=True, help="config JSON file")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--resume", action="store_true",
                         help="skip scenarios already done in the manifest")
    p_sweep.add_argument("--out", required=True, help="sweep directory")
    p_sweep.set_defaults(func=cmd_sweep)

    p_met = sub.add_parser("metrics", help="compare a LEM on/off run pair")
    p_met.add_argument("--with", dest="with_dir", required=True,
                       help="run directory with the market enabled")
    p_met.add_argument("--without", dest="without_dir", required=True,
                       help="run directory with the market disabled")
    p_met.add_argument("--fraction", type=float,
                       default=DEFAULT_PEAK_FRACTION,
                       help="peak fraction for the power metric")
    p_met.add_argument("--out", required=True, help="metrics JSON path")
    p_met.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ProfileError, MetricsError,
            FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
