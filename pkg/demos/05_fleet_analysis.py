"""A whole fleet: generate a corpus, analyze the manifest, read the tables.

The fleet workflow is file-based so it can run on real monitoring exports:
a manifest CSV lists every machine with its trace file, CPU model, and
datacenter. Here we generate a reproducible synthetic corpus first, then
analyze it and walk through the aggregate tables.

The CLI equivalent of this script:

    migrent synth --out corpus --seed 7 --machines 24 --datacenters 6 \
        --duration-days 8,12
    migrent fleet corpus/manifest.csv --emit-csv corpus/csv

Run:  python3 demos/05_fleet_analysis.py
"""

import tempfile
from pathlib import Path

from migrent import (
    EnergyModel,
    ManifestEntry,
    ParamRanges,
    analyze_manifest,
    bundled_catalog,
    generate_fleet,
    load_manifest,
    write_csv_reports,
    write_fleet,
)

catalog = bundled_catalog()
model = EnergyModel()

with tempfile.TemporaryDirectory() as tmp:
    corpus = Path(tmp) / "corpus"
    machines = generate_fleet(
        7, machines=30, datacenters=6, ranges=ParamRanges(duration_days=(8, 12)), catalog=catalog
    )
    manifest_path = write_fleet(machines, corpus)
    print(f"wrote {len(machines)} traces under {corpus}\n")

    entries = load_manifest(manifest_path)
    # Real fleets are lopsided; thin out the later datacenters so the
    # machine-weighted and datacenter-weighted means actually differ.
    keep_per_dc = {"dc000": 5, "dc001": 5, "dc002": 4, "dc003": 3, "dc004": 2, "dc005": 1}
    seen: dict[str, int] = {}
    kept = []
    for entry in entries:
        seen[entry.datacenter_id] = seen.get(entry.datacenter_id, 0) + 1
        if seen[entry.datacenter_id] <= keep_per_dc[entry.datacenter_id]:
            kept.append(entry)
    entries = kept
    # A manifest row whose trace never arrived lands in the exclusion
    # ledger instead of failing the run.
    entries.append(ManifestEntry("never-shipped", "traces/never-shipped.csv", "fx-octo-2012", "dc000"))

    fleet = analyze_manifest(
        entries, corpus, catalog, model, targets=(0.5, 0.7, 0.9), jobs=1
    )

    print(f"analyzed {len(fleet.reports)} machines, excluded {len(fleet.exclusions)}")
    for exc in fleet.exclusions:
        print(f"  excluded {exc.machine_id}: {exc.reason}")
    print()

    print("fleet means (machine-weighted vs datacenter-weighted):")
    print(f"{'target':>6} {'scenario':<18} {'machine mean':>12} {'dc mean':>9}")
    for row in fleet.means:
        if row["machine_mean"] is None:
            continue
        print(
            f"{row['target']:>6.1f} {row['scenario']:<18} {row['machine_mean']:>12.3f}"
            f" {row['datacenter_mean']:>9.3f}"
        )

    print("\ndatacenters grouped by size (mean lift-and-shift fraction per bin):")
    print(f"{'bin':>3} {'dcs':>4} {'machines':>8} {'mean':>7} {'min':>7} {'max':>7}")
    for b in fleet.size_bins:
        print(
            f"{b['bin']:>3} {b['datacenters']:>4} {b['machines']:>8}"
            f" {b['mean']:>7.3f} {b['min']:>7.3f} {b['max']:>7.3f}"
        )

    print("\npeak utilization by CPU release year (older machines run hotter):")
    print(f"{'year':>5} {'machines':>8} {'mean':>7} {'p10':>6} {'p90':>6}")
    for r in fleet.utilization_by_release:
        print(
            f"{r['release_year']:>5} {r['machines']:>8} {r['mean']:>7.3f}"
            f" {r['p10']:>6.3f} {r['p90']:>6.3f}"
        )

    points = fleet.cdfs[("combined", 0.7)]
    print("\nCDF of the combined fraction at target 0.7 (deciles):")
    step = max(len(points) // 10, 1)
    for value, prob in points[::step]:
        print(f"  {prob:>5.0%} of machines end at or below {value:.3f}")

    csv_dir = Path(tmp) / "csv"
    written = write_csv_reports(fleet, csv_dir)
    print(f"\nwrote {len(written)} CSV files for plotting, e.g. {written[0].name},"
          f" {written[-1].name}")
