"""From raw samples to a sizing peak: smoothing, daily maxima, percentile.

Sizing a cloud instance off the single highest sample ever recorded would
chase measurement spikes. The pipeline here smooths each sample over a
trailing 5-minute window, takes the maximum per UTC day, and calls the
95th percentile (nearest-rank) of those daily maxima the machine's peak.

Run:  python3 demos/03_peak_estimation.py
"""

from migrent import (
    SynthParams,
    daily_maxima,
    estimate_peak,
    generate_trace,
    nearest_rank,
    smooth,
)

# A two-week trace with a day/night cycle, slow growth, and sampling noise.
params = SynthParams(
    seed=11,
    duration_days=14,
    sample_period_seconds=30,
    base_utilization=0.35,
    growth_per_day=0.01,
    diurnal_amplitude=0.15,
    noise_stddev=0.04,
)
trace = generate_trace(params, "web-frontend-07")
print(f"trace: {len(trace)} samples over {trace.duration_seconds / 86400:.0f} days")
print(f"raw sample maximum:            {trace.values.max():.4f}")

smoothed = smooth(trace, window_seconds=300.0)
print(f"after 5-minute smoothing, max: {smoothed.values.max():.4f}  (spikes averaged away)")

daily = daily_maxima(smoothed)
print("\nper-day maxima of the smoothed signal:")
for date, value in zip(daily.dates, daily.values):
    print(f"  {date}  {value:.4f}  {'#' * int(round(value * 40))}")

peak = nearest_rank(daily.values, 95.0)
print(f"\n95th-percentile (nearest-rank) of daily maxima: {peak:.4f}")
print(f"estimate_peak() wraps the whole pipeline:        {estimate_peak(trace):.4f}")

# The percentile step is what makes the estimate robust: corrupt one day
# with a runaway process and the peak barely moves, while a plain maximum
# would jump to the outlier.
spiked_values = trace.values.copy()
spiked_values[1000:1010] = 1.0
spiked = type(trace)(trace.machine_id, trace.times.copy(), spiked_values)
print(f"\nwith a 5-minute runaway burst injected on day 1:")
print(f"  plain max of smoothed signal: {smooth(spiked).values.max():.4f}")
print(f"  estimated peak:               {estimate_peak(spiked):.4f}")

# Short traces are refused rather than silently extrapolated.
short = type(trace)("new-machine", trace.times[: 3 * 2880], trace.values[: 3 * 2880])
try:
    estimate_peak(short)
except Exception as exc:
    print(f"\n3 days of data is not enough by default: {exc}")
print(f"with min_days lowered: {estimate_peak(short, min_days=3):.4f}")

# Sensitivity to the smoothing window.
print("\npeak vs smoothing window:")
for window in (60.0, 300.0, 900.0, 3600.0):
    print(f"  {window:6.0f}s -> {estimate_peak(trace, window_seconds=window):.4f}")
print("Longer windows average the diurnal crest down; 5 minutes keeps real")
print("sustained load while dropping single-sample noise.")
