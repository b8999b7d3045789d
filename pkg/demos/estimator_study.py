"""
==========================================
Comparing tail-exponent estimators by simulation
==========================================

Draw many Pareto samples with a known exponent, fit each one four ways,
and look at bias, spread and goodness of fit. Two distortions are
switched on in turn: a hard cutoff on the largest values (like a survey
that never reaches the very rich) and cell weights that make every sample
mimic the true distribution exactly.
"""

from wealthshare.simulation import SimConfig, run_study

variants = {
    "plain": SimConfig(n_reps=300, seed=1),
    "cutoff at 75M": SimConfig(n_reps=300, seed=1, cutoff=75e6),
    "cell weights": SimConfig(n_reps=300, seed=1, weighted=True),
    "both": SimConfig(n_reps=300, seed=1, cutoff=75e6, weighted=True),
}

for name, cfg in variants.items():
    report = run_study(cfg, workers=4)
    print(f"\n{name}  (alpha_true={cfg.alpha_true}, n={cfg.n_samples}, reps={cfg.n_reps})")
    print(f"{'method':<14}{'mean':>9}{'sd':>9}{'mse':>11}{'ks':>9}{'cm':>11}")
    for r in report.rows:
        print(f"{r.method:<14}{r.mean:9.4f}{r.sd:9.4f}{r.mse:11.6f}{r.ks:9.4f}{r.cm:11.6f}")

# The maximum likelihood fit has the lowest MSE throughout. The van der Wijk
# inversion drifts upward once the top is cut off, since the missing
# fortunes pull the tail mean down.
