"""Smoothness scoring walkthrough on synthetic curves.

Shows the Savitzky-Golay baseline, the gap statistics, and the CSV layout
the `qconv report` command produces for real run directories.
"""

import numpy as np

from qconv.metrics import (savgol_baseline, smoothness_report_rows,
                           smoothness_stats)

rng = np.random.default_rng(0)
epochs = np.arange(60)

smooth_loss = 2.2 * np.exp(-epochs / 18) + 0.4
ragged_loss = smooth_loss + 0.08 * rng.uniform(-1, 1, 60)
smooth_acc = 100 * (0.1 + 0.5 * (1 - np.exp(-epochs / 25)))
ragged_acc = smooth_acc + 4.0 * rng.uniform(-1, 1, 60)

print("baseline reproduces smooth curves (max gap on the smooth loss):",
      f"{np.abs(savgol_baseline(smooth_loss) - smooth_loss).max():.2e}")

for name, curve in [("smooth_loss", smooth_loss),
                    ("ragged_loss", ragged_loss),
                    ("smooth_accuracy_pct", smooth_acc),
                    ("ragged_accuracy_pct", ragged_acc)]:
    stats = smoothness_stats(curve)
    print(f"{name:22s} avg_l1 {stats.avg_l1:8.4f}  std {stats.std_dev:8.4f}")

print("\nreport CSV layout:")
rows = smoothness_report_rows({"demo_loss": ragged_loss,
                               "demo_accuracy": ragged_acc})
print("\n".join(rows))
