"""Command-line interface.

Four subcommands: ``analyze`` one trace, ``fleet`` for a whole manifest,
``synth`` to generate a reproducible synthetic corpus, and ``catalog`` to
inspect CPU data. Results go to stdout as JSON (or plain text where noted);
errors go to stderr as a one-object JSON document.

Exit codes: 0 success, 2 bad arguments or malformed input, 3 not enough
days of data for peak estimation, 4 every machine in a fleet failed.
Option precedence: command-line flag, then ``--config`` file, then the
built-in default. The ``MIGRENT_CATALOG`` environment variable supplies a
catalog path when ``--catalog`` is absent; the bundled fictional catalog is
the last resort.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import fleet as fleet_mod
from . import synth as synth_mod
from .catalog import bundled_catalog, compute_ce, lift_and_shift_fraction, load_catalog
from .energy import DEFAULT_IDLE_FRACTION, DEFAULT_LINEAR_MIX, EnergyModel
from .errors import FleetError, InsufficientDataError, MigrentError
from .report import dumps_stable
from .scenarios import BASELINES, BASELINE_LIFT_AND_SHIFT, MachineRecord, analyze_machine
from .trace import (
    DEFAULT_MIN_DAYS,
    DEFAULT_PERCENTILE,
    DEFAULT_WINDOW_SECONDS,
    parse_trace,
)

ENV_CATALOG = "MIGRENT_CATALOG"

DEFAULT_TARGETS = (0.5, 0.6, 0.7, 0.8, 0.9)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INSUFFICIENT_DATA = 3
EXIT_ALL_FAILED = 4

_DEFAULTS = {
    "catalog": None,
    "cloud_ref": None,
    "targets": DEFAULT_TARGETS,
    "baseline": BASELINE_LIFT_AND_SHIFT,
    "idle_fraction": DEFAULT_IDLE_FRACTION,
    "linear_mix": DEFAULT_LINEAR_MIX,
    "window_seconds": DEFAULT_WINDOW_SECONDS,
    "percentile": DEFAULT_PERCENTILE,
    "min_days": DEFAULT_MIN_DAYS,
    "jobs": os.cpu_count() or 1,
}


def _parse_targets(raw) -> tuple[float, ...]:
    if isinstance(raw, str):
        parts = [p for p in raw.split(",") if p.strip()]
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise MigrentError(f"targets must be comma-separated numbers, got {raw!r}") from None
    elif isinstance(raw, (list, tuple)):
        values = [float(v) for v in raw]
    else:
        raise MigrentError(f"targets must be a list or comma-separated string, got {raw!r}")
    if not values:
        raise MigrentError("at least one target utilization is required")
    for v in values:
        if not 0.0 < v <= 1.0:
            raise MigrentError(f"target utilization must be in (0, 1], got {v}")
    return tuple(values)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as stream:
            config = json.load(stream)
    except OSError as exc:
        raise MigrentError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MigrentError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise MigrentError(f"config {path} must hold a JSON object")
    unknown = sorted(set(config) - set(_DEFAULTS))
    if unknown:
        raise MigrentError(f"config {path} has unknown keys: {', '.join(unknown)}")
    return config


class _Settings:
    """Flag > config file > default resolution for the shared options."""

    def __init__(self, args: argparse.Namespace):
        config = _load_config(getattr(args, "config", None))

        def pick(key):
            value = getattr(args, key, None)
            if value is None:
                value = config.get(key, _DEFAULTS[key])
            return value

        self.catalog_path = pick("catalog")
        if self.catalog_path is None:
            self.catalog_path = os.environ.get(ENV_CATALOG) or None
        self.cloud_ref = pick("cloud_ref")
        self.targets = _parse_targets(pick("targets"))
        self.baseline = str(pick("baseline"))
        if self.baseline not in BASELINES:
            raise MigrentError(f"baseline must be one of {BASELINES}, got {self.baseline!r}")
        self.idle_fraction = float(pick("idle_fraction"))
        self.linear_mix = float(pick("linear_mix"))
        self.window_seconds = float(pick("window_seconds"))
        self.percentile = float(pick("percentile"))
        self.min_days = int(pick("min_days"))
        self.jobs = int(pick("jobs"))
        if self.jobs < 1:
            raise MigrentError(f"jobs must be at least 1, got {self.jobs}")

    def load_catalog(self):
        if self.catalog_path is None:
            return bundled_catalog(self.cloud_ref)
        return load_catalog(self.catalog_path, self.cloud_ref)

    def energy_model(self) -> EnergyModel:
        try:
            return EnergyModel(self.idle_fraction, self.linear_mix)
        except ValueError as exc:
            raise MigrentError(str(exc)) from None


def _add_shared_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("shared options")
    group.add_argument("--catalog", help=f"catalog CSV path (default: ${ENV_CATALOG} or the bundled catalog)")
    group.add_argument("--cloud-ref", dest="cloud_ref", help="cloud reference CPU model (default: newest cloud entry)")
    group.add_argument("--targets", help="comma-separated target utilizations (default: 0.5,0.6,0.7,0.8,0.9)")
    group.add_argument("--baseline", choices=BASELINES, default=None,
                       help="denominator for auto-scaling fractions (default: lift-and-shift)")
    group.add_argument("--idle-fraction", dest="idle_fraction", type=float, default=None,
                       help="relative power at zero utilization (default: 0.33)")
    group.add_argument("--linear-mix", dest="linear_mix", type=float, default=None,
                       help="linear share of the loaded power curve (default: 0.36)")
    group.add_argument("--window-seconds", dest="window_seconds", type=float, default=None,
                       help="smoothing window for peak estimation (default: 300)")
    group.add_argument("--percentile", type=float, default=None,
                       help="percentile of daily maxima used as the peak (default: 95)")
    group.add_argument("--min-days", dest="min_days", type=int, default=None,
                       help="minimum days of data required (default: 7)")
    group.add_argument("--config", help="JSON file supplying defaults for the shared options")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="migrent",
        description="Estimate energy-consumption changes from moving workloads to cloud instances.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser("analyze", help="analyze one machine's utilization trace")
    p_analyze.add_argument("trace", help="trace CSV (timestamp,cpu_utilization_percent)")
    p_analyze.add_argument("cpu_model", help="the machine's CPU model, as named in the catalog")
    p_analyze.add_argument("--machine-id", dest="machine_id", help="identifier in the report (default: trace file stem)")
    p_analyze.add_argument("--datacenter", help="datacenter identifier in the report")
    _add_shared_options(p_analyze)

    p_fleet = sub.add_parser("fleet", help="analyze every machine in a manifest")
    p_fleet.add_argument("manifest", help="manifest CSV (machine_id,trace_path,cpu_model,datacenter_id)")
    p_fleet.add_argument("--emit-csv", dest="emit_csv", metavar="DIR",
                         help="also write CDF/table CSVs into DIR")
    p_fleet.add_argument("--jobs", type=int, default=None, help="worker processes (default: 1)")
    _add_shared_options(p_fleet)

    p_synth = sub.add_parser("synth", help="generate a synthetic fleet corpus")
    p_synth.add_argument("--out", required=True, help="output directory for traces and manifest")
    p_synth.add_argument("--seed", type=int, default=0, help="fleet seed (default: 0)")
    p_synth.add_argument("--machines", type=int, default=20, help="number of machines (default: 20)")
    p_synth.add_argument("--datacenters", type=int, default=5, help="number of datacenters (default: 5)")
    p_synth.add_argument("--start", default=synth_mod.DEFAULT_START,
                         help=f"trace start timestamp (default: {synth_mod.DEFAULT_START})")
    p_synth.add_argument("--duration-days", dest="duration_days", metavar="LO[,HI]",
                         help="trace length range in days (default: 10,15)")
    p_synth.add_argument("--base-util", dest="base_util", metavar="LO[,HI]",
                         help="base utilization range (default: 0.05,0.6)")
    p_synth.add_argument("--growth", metavar="LO[,HI]", help="per-day growth range (default: 0,0.015)")
    p_synth.add_argument("--refresh-days", dest="refresh_days", metavar="LO[,HI]",
                         help="hardware refresh period range in days (default: 30,120)")
    p_synth.add_argument("--diurnal", metavar="LO[,HI]", help="day/night amplitude range (default: 0,0.3)")
    p_synth.add_argument("--noise", metavar="LO[,HI]", help="sample noise stddev range (default: 0.005,0.05)")
    p_synth.add_argument("--periods", metavar="P[,P]", help="allowed sample periods in seconds (default: 20,30)")
    _add_shared_options(p_synth)

    p_cat = sub.add_parser("catalog", help="inspect the CPU catalog")
    cat_sub = p_cat.add_subparsers(dest="catalog_command", required=True)
    c_list = cat_sub.add_parser("list", help="list model names")
    _add_shared_options(c_list)
    c_show = cat_sub.add_parser("show", help="show one model as JSON")
    c_show.add_argument("model")
    _add_shared_options(c_show)
    c_ce = cat_sub.add_parser("ce", help="lift-and-shift fraction of a model vs the cloud reference")
    c_ce.add_argument("on_prem", help="on-premise CPU model")
    c_ce.add_argument("cloud", nargs="?", help="cloud CPU model (default: the catalog's cloud reference)")
    _add_shared_options(c_ce)

    return parser


def _ensure_writable_dir(path: str) -> Path:
    """Create the output directory up front so failures precede the compute."""
    target = Path(path)
    try:
        target.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise MigrentError(f"cannot create output directory {target}: {exc}") from exc
    if not os.access(target, os.W_OK):
        raise MigrentError(f"output directory {target} is not writable")
    return target


def _pair(raw: str | None, cast=float) -> tuple | None:
    if raw is None:
        return None
    parts = [p.strip() for p in str(raw).split(",") if p.strip()]
    try:
        values = [cast(p) for p in parts]
    except ValueError:
        raise MigrentError(f"expected numbers, got {raw!r}") from None
    if len(values) == 1:
        return (values[0], values[0])
    if len(values) == 2:
        return tuple(values)
    raise MigrentError(f"expected LO or LO,HI, got {raw!r}")


def cmd_analyze(args: argparse.Namespace) -> int:
    settings = _Settings(args)
    catalog = settings.load_catalog()
    model = settings.energy_model()
    trace_path = Path(args.trace)
    machine_id = args.machine_id or trace_path.stem
    trace = parse_trace(trace_path, machine_id=machine_id)
    record = MachineRecord(machine_id, trace, args.cpu_model, args.datacenter)
    report = analyze_machine(
        record,
        settings.targets,
        model,
        catalog,
        baseline=settings.baseline,
        window_seconds=settings.window_seconds,
        percentile=settings.percentile,
        min_days=settings.min_days,
    )
    sys.stdout.write(dumps_stable(report.to_dict()))
    return EXIT_OK


def cmd_fleet(args: argparse.Namespace) -> int:
    settings = _Settings(args)
    catalog = settings.load_catalog()
    model = settings.energy_model()
    manifest_path = Path(args.manifest)
    entries = fleet_mod.load_manifest(manifest_path)
    csv_dir = _ensure_writable_dir(args.emit_csv) if args.emit_csv else None
    report = fleet_mod.analyze_manifest(
        entries,
        manifest_path.parent,
        catalog,
        model,
        settings.targets,
        baseline=settings.baseline,
        jobs=settings.jobs,
        window_seconds=settings.window_seconds,
        percentile=settings.percentile,
        min_days=settings.min_days,
    )
    if csv_dir is not None:
        fleet_mod.write_csv_reports(report, csv_dir)
    sys.stdout.write(dumps_stable(report.to_dict()))
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    settings = _Settings(args)
    catalog = settings.load_catalog()
    _ensure_writable_dir(args.out)
    overrides = {}
    if (pair := _pair(args.duration_days, int)) is not None:
        overrides["duration_days"] = pair
    if (pair := _pair(args.base_util)) is not None:
        overrides["base_utilization"] = pair
    if (pair := _pair(args.growth)) is not None:
        overrides["growth_per_day"] = pair
    if (pair := _pair(args.refresh_days, int)) is not None:
        overrides["refresh_days"] = pair
    if (pair := _pair(args.diurnal)) is not None:
        overrides["diurnal_amplitude"] = pair
    if (pair := _pair(args.noise)) is not None:
        overrides["noise_stddev"] = pair
    if args.periods is not None:
        overrides["sample_periods"] = tuple(
            int(p) for p in str(args.periods).split(",") if p.strip()
        )
    try:
        ranges = synth_mod.ParamRanges(**overrides)
        machines = synth_mod.generate_fleet(
            args.seed, args.machines, args.datacenters, ranges, catalog
        )
    except ValueError as exc:
        raise MigrentError(str(exc)) from None
    manifest = synth_mod.write_fleet(machines, args.out, start=args.start)
    datacenters = len({m.datacenter_id for m in machines})
    print(f"wrote {len(machines)} traces across {datacenters} datacenters; manifest at {manifest}")
    return EXIT_OK


def cmd_catalog(args: argparse.Namespace) -> int:
    settings = _Settings(args)
    catalog = settings.load_catalog()
    if args.catalog_command == "list":
        for name in catalog.model_names():
            marker = " (cloud reference)" if name == catalog.cloud_reference else ""
            print(f"{name}{marker}")
        return EXIT_OK
    if args.catalog_command == "show":
        spec = catalog.lookup(args.model)
        payload = spec.to_dict()
        payload["ce"] = compute_ce(spec)
        sys.stdout.write(dumps_stable(payload))
        return EXIT_OK
    on_prem = catalog.lookup(args.on_prem)
    cloud = catalog.lookup(args.cloud) if args.cloud else catalog.cloud_spec
    print(f"{lift_and_shift_fraction(on_prem, cloud):.6g}")
    return EXIT_OK


_COMMANDS = {
    "analyze": cmd_analyze,
    "fleet": cmd_fleet,
    "synth": cmd_synth,
    "catalog": cmd_catalog,
}


def _fail(code: int, exc: Exception) -> int:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    sys.stderr.write(json.dumps(payload) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except InsufficientDataError as exc:
        return _fail(EXIT_INSUFFICIENT_DATA, exc)
    except FleetError as exc:
        return _fail(EXIT_ALL_FAILED, exc)
    except (MigrentError, ValueError) as exc:
        return _fail(EXIT_USAGE, exc)
    except OSError as exc:
        return _fail(EXIT_USAGE, exc)


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
