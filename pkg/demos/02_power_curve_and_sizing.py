"""The power curve, and why running servers hotter saves energy.

A server's power draw does not scale with its load: it burns a large idle
floor doing nothing, then rises through a linear+quadratic blend to full
power. This demo plots the curve as text, shows what happens to a workload
squeezed onto a half-size machine, finds the utilization beyond which
downsizing stops paying, and recovers the curve's constants from samples.

Run:  python3 demos/02_power_curve_and_sizing.py
"""

import numpy as np

from migrent import (
    EnergyModel,
    PowerSample,
    capacity_marginal_power,
    fit,
    marginal_gain_threshold,
    relative_power,
    scaled_power,
)

model = EnergyModel()  # idle_fraction=0.33, linear_mix=0.36

print("relative power draw vs utilization")
for u in np.linspace(0.0, 1.0, 11):
    bar = "#" * int(round(relative_power(model, float(u)) * 40))
    print(f"  u={u:4.1f}  {relative_power(model, float(u)):.4f}  {bar}")

print()
print("An idle machine already draws", f"{relative_power(model, 0.0):.0%}", "of peak power.")
print("Running the same work on a smaller machine pushes utilization up and")
print("sheds idle overhead. A workload at 40% on a full-size machine:")
for capacity in (1.0, 0.8, 0.5):
    p = scaled_power(model, 0.4, capacity)
    print(f"  capacity {capacity:.1f} -> runs at {min(0.4 / capacity, 1.0):.0%}, draws {p:.4f}")

threshold = marginal_gain_threshold(model)
print()
print(f"The marginal value of extra capacity flips sign at {threshold:.4f}:")
for x in (0.5, round(threshold, 3), 0.95):
    sign = "+" if capacity_marginal_power(model, x) > 0 else "-"
    print(f"  at utilization {x:.3f}: marginal power of capacity is {sign}")
print("Below that point, extra capacity only adds idle floor; above it, the")
print("quadratic term makes the hot machine the expensive one. Sizing targets")
print("are chosen below this threshold.")

# The curve's constants can be recovered from measured (utilization, power)
# pairs, e.g. stepped-load benchmark reports for a specific server.
rng = np.random.default_rng(7)
us = np.linspace(0.0, 1.0, 21)
ps = relative_power(model, us) + rng.normal(0.0, 0.004, us.size)
fitted = fit([PowerSample(float(u), float(max(p, 1e-6))) for u, p in zip(us, ps)])
print()
print(f"fit from 21 noisy samples: idle_fraction={fitted.idle_fraction:.4f},"
      f" linear_mix={fitted.linear_mix:.4f} (true: 0.33, 0.36)")
