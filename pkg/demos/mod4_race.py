"""Mean square of the mod 4 prime race against its zero-sum prediction.

Prints the model constants, then the empirical statistics as x_max grows.
Both ratios drift because Y = log x_max is small; the smoothed statistic
averages from log 2 and converges slowest.

    python3 demos/mod4_race.py
"""

import math

import numpy as np

from cheblab import explicit, primesets, sieve

db = explicit.ZeroDatabase(100)
spec = primesets.parse_spec("residue q=4 classes=3")
table = sieve.build_table(10**7)
model = explicit.build_model(spec, "pi-half", db, 100, table)

print(f"nu = {model.nu}, kappa = {model.kappa}, zeros used = {model.ordinates.size}")
print(f"largest |alpha| = {np.max(np.abs(model.alpha)):.3f}")
print(f"prediction: unsmoothed {model.prediction_unsmoothed():.4f}, smoothed {model.prediction_smoothed():.4f}\n")

print(f"{'x_max':>8} {'unsmoothed':>11} {'ratio':>6} {'smoothed':>9} {'ratio':>6} {'residual':>9}")
for x_max in (1e4, 1e5, 1e6, 1e7):
    Y = math.log(x_max)
    uns = explicit.mean_square_unsmoothed(model, Y)
    smo = explicit.mean_square_smoothed(model, Y)
    print(f"{x_max:>8.0e} {uns.empirical:>11.4f} {uns.ratio:>6.2f} {smo.empirical:>9.4f} "
          f"{smo.ratio:>6.2f} {uns.residual:>9.4f}")
