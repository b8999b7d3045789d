"""
===========================
Is the upper tail Pareto?
===========================

Two quick checks on a sample: the van der Wijk ratio (mean wealth above w
divided by w), which is flat for a Pareto tail, and the goodness-of-fit
curves used to choose the fitting threshold.
"""

import numpy as np

from wealthshare.data import WeightedSample
from wealthshare.density import wijk_curve
from wealthshare.gof import scan_wmin
from wealthshare.pareto import sample as pareto_sample

rng = np.random.default_rng(3)
body = rng.lognormal(np.log(8e4), 0.9, 6000)
body = body[body < 6e5]
tail = pareto_sample(1.5, 6e5, 1200, seed=rng)
s = WeightedSample(np.concatenate([body, tail]))

thresholds = np.geomspace(5e4, 2e7, 12)
curve = wijk_curve(s, thresholds)
print("threshold      ratio   (flat at alpha/(alpha-1) = 3 in a Pareto tail)")
for t, r in zip(curve.thresholds, curve.ratios):
    print(f"{t:12,.0f}  {r:7.3f}")

# Below 6e5 the lognormal body drags the ratio up. Above it the ratio levels
# off, but under 3: with alpha=1.5 the tail mean has infinite variance and a
# finite sample usually misses the fortunes that would lift it.

ks = scan_wmin(s, "ml", "ks")
cm = scan_wmin(s, "ml", "cm")
i, j = ks.best_index(), cm.best_index()
print(f"\nKS picks w_min = {ks.candidates[i]:,.0f} (alpha {ks.alphas[i]:.3f})")
print(f"CM picks w_min = {cm.candidates[j]:,.0f} (alpha {cm.alphas[j]:.3f})")

# text plot of both criteria across the candidates, each scaled to its own peak
grid = np.geomspace(ks.candidates[0], ks.candidates[-1], 25)
idx = np.minimum(np.searchsorted(ks.candidates, grid), len(ks.candidates) - 1)
kv, cv = ks.values[idx], np.nan_to_num(cm.values[idx])
for g, a, b in zip(grid, kv / np.nanmax(kv), cv / cv.max()):
    print(f"{g:12,.0f}  KS {'#' * int(30 * a):<30}  CM {'*' * int(30 * b)}")
