"""Hardware efficiency: how much energy a CPU swap alone saves.

Every migration estimate starts from "computational efficiency": benchmark
throughput per watt of rated power. Moving a workload unchanged onto a
cloud machine scales its energy by the ratio of the two efficiencies —
before any resizing or auto-scaling enters the picture.

Run:  python3 demos/01_hardware_efficiency.py
"""

from migrent import bundled_catalog, compute_ce, lift_and_shift_fraction

catalog = bundled_catalog()
cloud = catalog.cloud_spec

print(f"catalog: {len(catalog)} models, cloud reference = {cloud.model_name}")
print(f"cloud reference efficiency: {compute_ce(cloud):.3f} score/W\n")

header = f"{'model':<18} {'released':>10} {'score':>7} {'tdp':>5} {'score/W':>8} {'energy fraction':>16}"
print(header)
print("-" * len(header))
for name in catalog.model_names():
    spec = catalog.lookup(name)
    fraction = lift_and_shift_fraction(spec, cloud)
    marker = "  <- cloud reference" if name == catalog.cloud_reference else ""
    print(
        f"{spec.model_name:<18} {spec.release_date.isoformat():>10} {spec.spec_score:>7.0f}"
        f" {spec.tdp_watts:>5.0f} {compute_ce(spec):>8.3f} {fraction:>16.3f}{marker}"
    )

print()
print("A fraction below 1 means the same work burns less energy on the cloud")
print("machine; old, inefficient CPUs benefit most. A fraction above 1 means")
print("the on-premise machine is already more efficient than the reference,")
print("so a pure lift-and-shift would cost energy.")

oldest = min(catalog, key=lambda s: s.release_date)
newest = max((s for s in catalog if not s.cloud), key=lambda s: s.release_date)
print(
    f"\nspread in this catalog: {oldest.model_name} at"
    f" {lift_and_shift_fraction(oldest, cloud):.2f} vs {newest.model_name} at"
    f" {lift_and_shift_fraction(newest, cloud):.2f}"
)
