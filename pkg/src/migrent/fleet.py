"""Fleet-level analysis: manifests, aggregation, and distribution curves.

A fleet is described by a manifest CSV listing one machine per row with the
path of its utilization trace, its CPU model, and the datacenter it lives
in. Machines that cannot be analyzed (missing trace, unknown CPU, too few
days of data) are excluded with a reason instead of failing the run; only a
fleet where *every* machine fails raises.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .catalog import Catalog
from .energy import EnergyModel
from .errors import FleetError, ManifestError, MigrentError
from .scenarios import (
    BASELINE_LIFT_AND_SHIFT,
    SCENARIO_NAMES,
    MachineRecord,
    ScenarioReport,
    analyze_machine,
)
from .trace import (
    DEFAULT_MIN_DAYS,
    DEFAULT_PERCENTILE,
    DEFAULT_WINDOW_SECONDS,
    nearest_rank,
    parse_trace,
)

MANIFEST_COLUMNS = ("machine_id", "trace_path", "cpu_model", "datacenter_id")

DEFAULT_SIZE_BINS = 7


@dataclass(frozen=True)
class ManifestEntry:
    machine_id: str
    trace_path: str
    cpu_model: str
    datacenter_id: str


@dataclass(frozen=True)
class Exclusion:
    """A machine dropped from a fleet run, and why."""

    machine_id: str
    reason: str

    def to_dict(self) -> dict:
        return {"machine_id": self.machine_id, "reason": self.reason}


def load_manifest(source) -> list[ManifestEntry]:
    """Parse a fleet manifest CSV; machine ids must be unique."""
    if hasattr(source, "read"):
        return _load_manifest_stream(source)
    path = Path(source)
    try:
        stream = path.open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    with stream:
        return _load_manifest_stream(stream)


def _load_manifest_stream(stream) -> list[ManifestEntry]:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ManifestError("manifest file is empty") from None
    if tuple(h.strip() for h in header) != MANIFEST_COLUMNS:
        raise ManifestError(
            f"line 1: expected header {','.join(MANIFEST_COLUMNS)!r}, got {','.join(header)!r}"
        )
    entries: list[ManifestEntry] = []
    seen: dict[str, int] = {}
    for line, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(MANIFEST_COLUMNS):
            raise ManifestError(f"line {line}: expected {len(MANIFEST_COLUMNS)} fields, got {len(row)}")
        machine_id = row[0].strip()
        if not machine_id:
            raise ManifestError(f"line {line}: machine_id must be non-empty")
        if machine_id in seen:
            raise ManifestError(
                f"line {line}: duplicate machine_id {machine_id!r} (first on line {seen[machine_id]})"
            )
        seen[machine_id] = line
        entries.append(ManifestEntry(machine_id, row[1].strip(), row[2].strip(), row[3].strip()))
    if not entries:
        raise ManifestError("manifest has no data rows")
    return entries


def write_manifest(entries: Iterable[ManifestEntry], dest) -> None:
    path = Path(dest)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(MANIFEST_COLUMNS)
        for e in entries:
            writer.writerow((e.machine_id, e.trace_path, e.cpu_model, e.datacenter_id))


def _analyze_entry(task) -> tuple[str, ScenarioReport | None, str | None]:
    """Worker for one manifest row; returns (machine_id, report, error)."""
    entry, base_dir, catalog, model, targets, baseline, window_seconds, percentile, min_days = task
    try:
        trace_path = Path(base_dir) / entry.trace_path
        trace = parse_trace(trace_path, machine_id=entry.machine_id)
        record = MachineRecord(entry.machine_id, trace, entry.cpu_model, entry.datacenter_id)
        report = analyze_machine(
            record,
            targets,
            model,
            catalog,
            baseline=baseline,
            window_seconds=window_seconds,
            percentile=percentile,
            min_days=min_days,
        )
        return entry.machine_id, report, None
    except MigrentError as exc:
        return entry.machine_id, None, str(exc)


@dataclass(frozen=True)
class FleetReport:
    """Aggregated fleet results plus the per-machine reports behind them."""

    baseline: str
    targets: tuple[float, ...]
    reports: tuple[ScenarioReport, ...]
    exclusions: tuple[Exclusion, ...]
    means: tuple[dict, ...]
    size_bins: tuple[dict, ...]
    utilization_by_release: tuple[dict, ...]
    cdfs: Mapping[tuple[str, float], list[tuple[float, float]]]

    def to_dict(self) -> dict:
        return {
            "baseline": self.baseline,
            "targets": list(self.targets),
            "machines_analyzed": len(self.reports),
            "machines_excluded": len(self.exclusions),
            "mean_table": [dict(m) for m in self.means],
            "size_bins": [dict(b) for b in self.size_bins],
            "utilization_by_release": [dict(r) for r in self.utilization_by_release],
            "exclusions": [e.to_dict() for e in self.exclusions],
            "machines": [r.to_dict() for r in self.reports],
        }


def cdf(values: Sequence[float]) -> list[tuple[float, float]]:
    """Empirical CDF points (value, cumulative probability).

    Sorted ascending; repeated values collapse to one point carrying the
    highest probability. The last point always has probability 1.
    """
    data = np.sort(np.asarray(values, dtype=np.float64))
    if data.size == 0:
        raise MigrentError("cdf needs at least one value")
    probs = np.arange(1, data.size + 1) / data.size
    keep = np.concatenate((data[1:] != data[:-1], [True]))
    return [(float(v), float(p)) for v, p in zip(data[keep], probs[keep])]


def _machine_values(reports, scenario: str, target: float) -> list[float]:
    out = []
    for report in reports:
        value = report.scenario_value(scenario, target)
        if value is not None:
            out.append(value)
    return out


def _group_by_datacenter(reports) -> dict[str, list[ScenarioReport]]:
    groups: dict[str, list[ScenarioReport]] = {}
    for report in reports:
        dc = report.datacenter_id or "unknown"
        groups.setdefault(dc, []).append(report)
    return groups


def aggregate(
    reports: Sequence[ScenarioReport],
    exclusions: Sequence[Exclusion],
    targets: Sequence[float],
    catalog: Catalog,
    baseline: str = BASELINE_LIFT_AND_SHIFT,
    bin_count: int = DEFAULT_SIZE_BINS,
) -> FleetReport:
    """Build the fleet-level summary from per-machine reports.

    Machine means average over machines that have a value for the scenario;
    datacenter means first average within each datacenter, then across
    datacenters, so a huge datacenter cannot drown out the small ones.
    """
    if not reports:
        raise FleetError("no machines to aggregate", exclusions)
    reports = tuple(sorted(reports, key=lambda r: r.machine_id))
    targets = tuple(float(t) for t in targets)
    by_dc = _group_by_datacenter(reports)

    means = []
    cdfs: dict[tuple[str, float], list[tuple[float, float]]] = {}
    for target in targets:
        for scenario in SCENARIO_NAMES:
            values = _machine_values(reports, scenario, target)
            dc_means = []
            for dc_reports in by_dc.values():
                dc_values = _machine_values(dc_reports, scenario, target)
                if dc_values:
                    dc_means.append(float(np.mean(dc_values)))
            means.append(
                {
                    "target": target,
                    "scenario": scenario,
                    "machine_mean": float(np.mean(values)) if values else None,
                    "datacenter_mean": float(np.mean(dc_means)) if dc_means else None,
                    "machines": len(values),
                }
            )
            if values:
                cdfs[(scenario, target)] = cdf(values)

    size_bins = group_by_size(reports, bin_count)
    by_release = utilization_by_release(reports, catalog)

    return FleetReport(
        baseline=baseline,
        targets=targets,
        reports=reports,
        exclusions=tuple(exclusions),
        means=tuple(means),
        size_bins=tuple(size_bins),
        utilization_by_release=tuple(by_release),
        cdfs=cdfs,
    )


def group_by_size(reports: Sequence[ScenarioReport], bin_count: int = DEFAULT_SIZE_BINS) -> list[dict]:
    """Datacenters grouped into contiguous bins by machine count.

    Datacenters are sorted by machine count and split into ``bin_count``
    near-equal groups, earlier bins taking the remainder; bins that would
    be empty are omitted. Each bin reports the spread of its datacenters'
    mean lift-and-shift fraction, showing whether bigger datacenters run
    newer hardware.
    """
    if bin_count < 1:
        raise ValueError(f"bin_count must be at least 1, got {bin_count}")
    by_dc = _group_by_datacenter(reports)
    dc_rows = []
    for dc in sorted(by_dc):
        dc_reports = by_dc[dc]
        dc_rows.append((len(dc_reports), dc, float(np.mean([r.lift_and_shift for r in dc_reports]))))
    dc_rows.sort(key=lambda row: (row[0], row[1]))

    n = len(dc_rows)
    bins = min(bin_count, n)
    base, remainder = divmod(n, bins)
    out = []
    cursor = 0
    for b in range(bins):
        width = base + (1 if b < remainder else 0)
        chunk = dc_rows[cursor:cursor + width]
        cursor += width
        fractions = [row[2] for row in chunk]
        out.append(
            {
                "bin": b + 1,
                "datacenters": len(chunk),
                "machines": sum(row[0] for row in chunk),
                "mean": float(np.mean(fractions)),
                "min": float(np.min(fractions)),
                "max": float(np.max(fractions)),
            }
        )
    return out


def utilization_by_release(reports: Sequence[ScenarioReport], catalog: Catalog) -> list[dict]:
    """Peak-utilization spread grouped by the on-premise CPU's release year."""
    by_year: dict[int, list[float]] = {}
    for report in reports:
        year = catalog.lookup(report.cpu_model).release_date.year
        by_year.setdefault(year, []).append(report.peak_utilization)
    out = []
    for year in sorted(by_year):
        peaks = by_year[year]
        out.append(
            {
                "release_year": year,
                "machines": len(peaks),
                "mean": float(np.mean(peaks)),
                "p10": nearest_rank(peaks, 10.0),
                "p25": nearest_rank(peaks, 25.0),
                "p75": nearest_rank(peaks, 75.0),
                "p90": nearest_rank(peaks, 90.0),
            }
        )
    return out


def analyze_manifest(
    entries: Sequence[ManifestEntry],
    base_dir,
    catalog: Catalog,
    model: EnergyModel,
    targets: Sequence[float],
    baseline: str = BASELINE_LIFT_AND_SHIFT,
    jobs: int = 1,
    window_seconds: float = DEFAULT_WINDOW_SECONDS,
    percentile: float = DEFAULT_PERCENTILE,
    min_days: int = DEFAULT_MIN_DAYS,
    bin_count: int = DEFAULT_SIZE_BINS,
) -> FleetReport:
    """Analyze every machine in a manifest and aggregate the results.

    ``base_dir`` anchors relative trace paths (normally the manifest's own
    directory). With ``jobs > 1`` machines are analyzed in worker processes;
    results are identical to a sequential run.
    """
    if jobs < 1:
        raise ValueError(f"jobs must be at least 1, got {jobs}")
    tasks = [
        (entry, str(base_dir), catalog, model, tuple(targets), baseline,
         window_seconds, percentile, min_days)
        for entry in entries
    ]
    if jobs == 1 or len(tasks) <= 1:
        results = [_analyze_entry(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_analyze_entry, tasks, chunksize=8))

    reports = []
    exclusions = []
    for machine_id, report, error in results:
        if report is not None:
            reports.append(report)
        else:
            exclusions.append(Exclusion(machine_id, error))
    if not reports:
        raise FleetError(
            f"all {len(exclusions)} machines failed to analyze", exclusions
        )
    return aggregate(reports, exclusions, targets, catalog, baseline, bin_count)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with path.open("w", encoding="utf-8", newline="") as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])


def write_csv_reports(report: FleetReport, out_dir) -> list[Path]:
    """Emit the fleet aggregates as CSV files and return the paths written.

    One CDF file per scenario and target plus the mean table, the
    datacenter size bins, and the peak-utilization-by-release-year table.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "mean_table.csv"
    _write_rows(
        path,
        ("target", "scenario", "machine_mean", "datacenter_mean", "machines"),
        ((m["target"], m["scenario"], m["machine_mean"], m["datacenter_mean"], m["machines"])
         for m in report.means),
    )
    written.append(path)

    path = out / "size_bins.csv"
    _write_rows(
        path,
        ("bin", "datacenters", "machines", "mean", "min", "max"),
        ((b["bin"], b["datacenters"], b["machines"], b["mean"], b["min"], b["max"])
         for b in report.size_bins),
    )
    written.append(path)

    path = out / "util_by_release.csv"
    _write_rows(
        path,
        ("release_year", "machines", "mean", "p10", "p25", "p75", "p90"),
        ((r["release_year"], r["machines"], r["mean"], r["p10"], r["p25"], r["p75"], r["p90"])
         for r in report.utilization_by_release),
    )
    written.append(path)

    for (scenario, target), points in sorted(report.cdfs.items()):
        path = out / f"cdf_{scenario}_{target:g}.csv"
        _write_rows(path, ("value", "cumulative_probability"), points)
        written.append(path)

    return written
