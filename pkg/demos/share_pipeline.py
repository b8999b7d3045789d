"""
=====================================
From survey microdata to top shares
=====================================

A synthetic survey with five imputed versions of every household, plus a
rich list of the very top, run through the whole chain:

1) choose the fitting threshold w_min and the exponent alpha,
2) pick the transition w0 where the kernel density meets the Pareto line,
3) normalize the tail three ways and read off the top 1% share.
"""

import numpy as np

from wealthshare.data import average_implicates, combine_survey_richlist, tail_view
from wealthshare.density import kernel_density, select_bandwidth
from wealthshare.estimators import alpha_ml
from wealthshare.gof import select_wmin
from wealthshare.model import build_model, solve_w0, top_share
from wealthshare.synth import SurveySpec, synth_richlist, synth_survey

# the survey undercounts rich households by 40 percent
spec = SurveySpec(n_households=4000, undercount=0.6, seed=7)
imp = average_implicates(synth_survey(spec))
rich = synth_richlist(spec, w1=5e8)
sample = imp.averaged
print(f"{len(sample)} distinct wealth values, {sample.total_weight:.3g} households")
print(f"rich list: {rich.n_tilde:.0f} households above {rich.w1_count:.3g}")

w_min, est, fit = select_wmin(sample, "ml", "ks")
combined = alpha_ml(tail_view(combine_survey_richlist(tail_view(sample, w_min), rich), w_min))
print(f"w_min = {w_min:,.0f}   alpha survey = {est.alpha:.4f}   with rich list = {combined.alpha:.4f}")

h = select_bandwidth(sample, w_min)
kde = kernel_density(sample, h)
print(f"kernel bandwidth {h:,.0f}")

alpha = combined.alpha
for norm in ("bach", "eckerstorfer", "richlist"):
    w0 = solve_w0(sample, alpha, w_min, norm, kde, rich=rich)
    model = build_model(sample, alpha, w0, norm, w_min=w_min, rich=rich)
    shares = [top_share(model, p).share for p in (0.01, 0.05, 0.10)]
    print(f"{norm:<13} w0={w0:>12,.0f}  top1%={shares[0]:.3f}  top5%={shares[1]:.3f}  "
          f"top10%={shares[2]:.3f}")

# Anchoring the tail on the rich-list count corrects for the missing rich
# respondents, so its top 1% share comes out clearly higher.

spread = []
for label, s in imp.variants()[:-1]:
    w, e, _ = select_wmin(s, "ml", "ks")
    spread.append(e.alpha)
print("alpha across implicates:", np.round(spread, 4))
