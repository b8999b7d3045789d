"""Command-line front end: ``wealthshare <subcommand> [flags]``.

Every result embeds (JSON) or sits next to (CSV, ``<out>.manifest.json``) a
run manifest with the resolved configuration and input file digests.
Payloads carry no timestamps, so reruns with the same inputs are
byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .data import combine_survey_richlist, load_richlist_csv, load_survey, tail_view, write_richlist_csv
from .density import histogram_density, kernel_density, select_bandwidth, wijk_curve
from .errors import WealthShareError
from .estimators import alpha_ml, estimate
from .gof import gof, select_wmin
from .model import NORMALIZATIONS, build_model, solve_w0, top_share, w0_trace
from .simulation import SimConfig, run_study
from .synth import SurveySpec, synth_richlist, synth_survey, write_survey_csv

SHARE_SUM_CONVENTION = "body sums weighted by wealth: sum w_i n(w_i) / N"
CM_CONVENTION = "CM integrand weighted by the fitted (normalized) Pareto density"
BOUNDARY_CONVENTION = "a value exactly at w0 belongs to the body"

_SUFFIX = {"k": 1e3, "m": 1e6, "g": 1e9}


def currency(text) -> float:
    """Parse ``1.5M``, ``500k``, ``20G`` or a plain number."""
    s = str(text).strip().replace("_", "")
    mult = 1.0
    if s and s[-1].lower() in _SUFFIX:
        mult = _SUFFIX[s[-1].lower()]
        s = s[:-1]
    try:
        return float(s) * mult
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a currency amount: {text!r}") from None


def _optional_currency(text):
    return None if str(text).lower() in ("none", "off", "") else currency(text)


def _p_list(text):
    out = []
    for part in str(text).split(","):
        p = float(part)
        if not 0 < p < 1:
            raise argparse.ArgumentTypeError(f"p must lie in (0, 1): {part}")
        out.append(p)
    return out


def _digest(path):
    if path is None:
        return None
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _manifest(args, inputs, extra=None):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "format", "workers")}
    return {
        "subcommand": args.command,
        "config": cfg,
        "inputs": {k: {"path": str(v), "sha256": _digest(v)} for k, v in inputs.items() if v},
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "conventions": {
            "share_sums": SHARE_SUM_CONVENTION,
            "cm": CM_CONVENTION,
            "w0_boundary": BOUNDARY_CONVENTION,
            **(extra or {}),
        },
    }


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return None if not math.isfinite(x) else x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, Path):
        return str(x)
    return x


def _rows_csv(rows):
    buf = io.StringIO()
    if not rows:
        return ""
    cols = list(rows[0])
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(cols)
    for r in rows:
        out.writerow(["" if r.get(c) is None else (repr(r[c]) if isinstance(r[c], float) else r[c])
                      for c in cols])
    return buf.getvalue()


def emit(args, manifest, results, table):
    """Write results as JSON (manifest embedded) or CSV (manifest sidecar)."""
    manifest = _clean(manifest)
    if args.format == "json":
        text = json.dumps(_clean({"manifest": manifest, "results": results}), indent=2, sort_keys=True) + "\n"
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return
    text = _rows_csv(_clean(table))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        side = Path(str(args.out) + ".manifest.json")
        side.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text)


def _pool_map(fn, items, workers):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _rich(args):
    if not args.richlist:
        return None
    return load_richlist_csv(args.richlist, args.w1_count, args.w1_scale)


def _search_range(args):
    if args.range_min is None and args.range_max is None:
        return None
    return (-math.inf if args.range_min is None else args.range_min,
            math.inf if args.range_max is None else args.range_max)


def _fit_one(sample, args, rich):
    if args.wmin is not None:
        tail = tail_view(sample, args.wmin)
        est = estimate(tail, args.estimator)
        g = gof(tail, est.alpha, args.criterion)
        w_min = args.wmin
    else:
        w_min, est, g = select_wmin(sample, args.estimator, args.criterion, _search_range(args))
    combined = None
    if rich is not None:
        combined = alpha_ml(tail_view(combine_survey_richlist(tail_view(sample, w_min), rich), w_min)).alpha
    return w_min, est, g, combined


# --- subcommands -----------------------------------------------------------------


def cmd_fit(args):
    imp = load_survey(args.survey)
    rich = _rich(args)

    def run(item):
        label, sample = item
        try:
            w_min, est, g, combined = _fit_one(sample, args, rich)
        except WealthShareError as exc:
            return {"variant": label, "status": f"error: {exc}"}
        return {"variant": label, "status": "ok", "estimator": est.method, "criterion": g.criterion,
                "w_min": w_min, "alpha": est.alpha, "gof": g.value, "tail_count": est.tail_count,
                "alpha_combined_ml": combined, "warning": est.warning}

    rows = _pool_map(run, imp.variants(), args.workers)
    emit(args, _manifest(args, {"survey": args.survey, "richlist": args.richlist}), {"fits": rows}, rows)
    return 0 if all(r["status"] == "ok" for r in rows) else 2


def _share_variant(sample, args, rich, norms, w_max):
    w_min, est, _, combined = _fit_one(sample, args, rich)
    alpha = combined if (combined is not None and not args.survey_alpha) else est.alpha
    h = args.bandwidth if args.bandwidth is not None else select_bandwidth(sample, w_min)
    kde = kernel_density(sample, h)
    out = []
    for norm in norms:
        if args.w0 is not None:
            w0 = args.w0
        else:
            w0 = solve_w0(sample, alpha, w_min, norm, kde, rich=rich)
        model = build_model(sample, alpha, w0, norm, w_min=w_min, rich=rich, w_max=w_max)
        for p in args.p:
            s = top_share(model, p)
            out.append({"normalization": norm, "w_min": w_min, "alpha": alpha, "bandwidth": h,
                        "w0": w0, "beta_prime": model.beta_prime, "total": model.total,
                        "p": p, "w_p": s.w_p, "share": s.share, "branch": s.branch})
    return out


def cmd_share(args):
    imp = load_survey(args.survey)
    rich = _rich(args)
    norms = args.normalization or [n for n in NORMALIZATIONS if n != "richlist" or rich is not None]
    if "richlist" in norms and rich is None:
        print("error: richlist normalization needs --richlist", file=sys.stderr)
        return 1
    if args.wmax == "richlist":
        if rich is None:
            print("error: --wmax richlist needs --richlist", file=sys.stderr)
            return 1
        w_max = rich.w_max_estimate()
    else:
        w_max = None if args.wmax is None else currency(args.wmax)

    def run(item):
        label, sample = item
        try:
            return label, "ok", _share_variant(sample, args, rich, norms, w_max)
        except WealthShareError as exc:
            hint = " (try --w0 or a different --normalization)" if "sign" in str(exc) else ""
            return label, f"error: {exc}{hint}", []

    parts = _pool_map(run, imp.variants(), args.workers)
    per_variant = [{"variant": lab, **r} for lab, _, rows in parts for r in rows]
    status = {lab: st for lab, st, _ in parts}
    summary = []
    for norm in norms:
        for p in args.p:
            rows = [r for r in per_variant if r["normalization"] == norm and r["p"] == p]
            imps = [r["share"] for r in rows if r["variant"] != "avg"]
            avg = [r for r in rows if r["variant"] == "avg"]
            summary.append({"normalization": norm, "p": p,
                            "w0_avg": avg[0]["w0"] if avg else None,
                            "share_avg": avg[0]["share"] if avg else None,
                            "share_min": min(imps) if imps else None,
                            "share_max": max(imps) if imps else None})
    results = {"summary": summary, "variants": per_variant, "status": status, "w_max": w_max}
    emit(args, _manifest(args, {"survey": args.survey, "richlist": args.richlist}), results, summary)
    return 0 if all(s == "ok" for s in status.values()) else 2


def _single_sample(args):
    imp = load_survey(args.survey)
    if args.variant == "avg":
        return imp.averaged
    return imp.implicates[int(args.variant) - 1]


def cmd_wijk(args):
    if args.survey:
        sample = _single_sample(args)
    else:
        sample = _rich(args).to_sample()
    lo = args.wmin if args.wmin is not None else float(sample.values[0])
    hi = float(sample.values[-2]) if len(sample) > 1 else float(sample.values[-1])
    t = np.geomspace(max(lo, 1e-12), hi, args.points)
    curve = wijk_curve(sample, t)
    rows = [{"threshold": float(a), "ratio": float(b)} for a, b in zip(curve.thresholds, curve.ratios)]
    emit(args, _manifest(args, {"survey": args.survey, "richlist": args.richlist}), {"curve": rows}, rows)
    return 0


def cmd_density(args):
    sample = _single_sample(args)
    h = args.bandwidth if args.bandwidth is not None else select_bandwidth(
        sample, -math.inf if args.wmin is None else args.wmin)
    hist = histogram_density(sample)
    kde = kernel_density(sample, h)
    lo = args.grid_min if args.grid_min is not None else hist.support[0]
    hi = args.grid_max if args.grid_max is not None else hist.support[1]
    grid = np.linspace(lo, hi, args.points)
    hv, kv = hist(grid), kde(grid)
    rows = [{"w": float(a), "histogram": float(b), "kernel": float(c)} for a, b, c in zip(grid, hv, kv)]
    emit(args, _manifest(args, {"survey": args.survey}), {"bandwidth": h, "density": rows}, rows)
    return 0


def cmd_w0(args):
    sample = _single_sample(args)
    rich = _rich(args)
    w_min, est, _, combined = _fit_one(sample, args, rich)
    alpha = combined if (combined is not None and not args.survey_alpha) else est.alpha
    norm = (args.normalization or ["bach"])[0]
    h = args.bandwidth if args.bandwidth is not None else select_bandwidth(sample, w_min)
    kde = kernel_density(sample, h)
    status, root = "ok", None
    try:
        root = solve_w0(sample, alpha, w_min, norm, kde, rich=rich)
    except WealthShareError as exc:
        status = f"error: {exc}"
    grid, gap = w0_trace(sample, alpha, w_min, norm, kde, rich=rich)
    rows = [{"w": float(a), "gap": float(b)} for a, b in zip(grid, gap)]
    results = {"w0": root, "w_min": w_min, "alpha": alpha, "bandwidth": h, "normalization": norm,
               "status": status, "trace": rows}
    emit(args, _manifest(args, {"survey": args.survey, "richlist": args.richlist}), results, rows)
    return 0 if status == "ok" else 2


def _sim_configs(args):
    base = {}
    if args.config:
        base = json.loads(Path(args.config).read_text(encoding="utf-8"))
    for key in ("alpha_true", "w_min_gen", "n_samples", "n_reps", "seed"):
        v = getattr(args, key)
        if v is not None:
            base[key] = v
    if args.variants == "all":
        cut = args.cutoff if args.cutoff is not None else 75e6
        combos = [(None, False), (cut, False), (None, True), (cut, True)]
    else:
        combos = [(args.cutoff, args.weighted)]
    return [SimConfig(**{**base, "cutoff": c, "weighted": w,
                         "renormalize_cutoff": not args.no_renormalize}) for c, w in combos]


def cmd_simulate(args):
    reports = [run_study(cfg, workers=args.workers) for cfg in _sim_configs(args)]
    table = []
    for rep in reports:
        c = rep.config
        for r in rep.rows:
            table.append({"cutoff": c.cutoff, "weighted": c.weighted, "method": r.method,
                          "mean": r.mean, "sd": r.sd, "mse": r.mse, "ks": r.ks, "cm": r.cm,
                          "n_ok": r.n_ok, "n_failed": r.n_failed})
    results = {"reports": [rep.to_dict() for rep in reports]}
    emit(args, _manifest(args, {"config": args.config}), results, table)
    failed = sum(r["n_failed"] for r in table)
    return 0 if failed == 0 else 2


def cmd_synth(args):
    spec = SurveySpec(n_households=args.households, population=args.population, alpha=args.alpha,
                      w_tail=args.w_tail, tail_fraction=args.tail_fraction,
                      topcode=args.topcode, implicates=args.implicates,
                      undercount=args.undercount, seed=args.seed)
    outdir = Path(args.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    survey_path = outdir / "survey.csv"
    rich_path = outdir / "richlist.csv"
    write_survey_csv(synth_survey(spec), survey_path)
    write_richlist_csv(synth_richlist(spec, w1=args.w1), rich_path)
    manifest = _manifest(args, {})
    manifest["outputs"] = {"survey": {"path": str(survey_path), "sha256": _digest(survey_path)},
                           "richlist": {"path": str(rich_path), "sha256": _digest(rich_path)}}
    (outdir / "synth.manifest.json").write_text(
        json.dumps(_clean(manifest), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return 0


# --- parser -------------------------------------------------------------------------


def _add_output(p):
    p.add_argument("--out", help="output file (directory for synth); stdout if omitted")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _add_inputs(p, survey_required=True):
    p.add_argument("--survey", required=survey_required, help="survey CSV (wealth[,weight][,implicate])")
    p.add_argument("--richlist", help="rich-list CSV (wealth,households)")
    p.add_argument("--w1-count", type=currency, help="rich-list counting threshold")
    p.add_argument("--w1-scale", type=currency, help="rich-list wealth used in the w1**alpha factor")


def _add_fit(p):
    p.add_argument("--estimator", choices=("ml", "reg", "reg-intercept", "wijk"), default="ml")
    p.add_argument("--criterion", choices=("ks", "cm"), default="ks")
    p.add_argument("--wmin", type=currency, help="fix w_min instead of selecting it")
    p.add_argument("--range-min", type=currency, help="lower end of the w_min search range")
    p.add_argument("--range-max", type=currency, help="upper end of the w_min search range")
    p.add_argument("--workers", type=int, default=1)


def _add_variant(p):
    p.add_argument("--variant", default="avg", help="'avg' or implicate number 1..5")


def build_parser():
    ap = argparse.ArgumentParser(prog="wealthshare", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="select w_min and estimate alpha per implicate")
    _add_inputs(p)
    _add_fit(p)
    _add_output(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("share", help="top-p wealth shares under each normalization")
    _add_inputs(p)
    _add_fit(p)
    p.add_argument("--normalization", action="append", choices=NORMALIZATIONS)
    p.add_argument("--w0", type=currency, help="fix w0 instead of solving the continuity condition")
    p.add_argument("--wmax", help="tail truncation: amount, or 'richlist' to estimate it")
    p.add_argument("--bandwidth", type=currency)
    p.add_argument("--p", type=_p_list, default=[0.01, 0.05, 0.10])
    p.add_argument("--survey-alpha", action="store_true",
                   help="use the survey-only alpha even when a rich list is given")
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)
    p.set_defaults(func=cmd_share)

    p = sub.add_parser("wijk", help="van der Wijk ratio curve")
    _add_inputs(p, survey_required=False)
    _add_variant(p)
    p.add_argument("--wmin", type=currency, help="lowest threshold")
    p.add_argument("--points", type=int, default=200)
    _add_output(p)
    p.set_defaults(func=cmd_wijk)

    p = sub.add_parser("density", help="histogram and kernel density on a grid")
    _add_inputs(p)
    _add_variant(p)
    p.add_argument("--wmin", type=currency, help="bandwidth from values above this")
    p.add_argument("--bandwidth", type=currency)
    p.add_argument("--grid-min", type=currency)
    p.add_argument("--grid-max", type=currency)
    p.add_argument("--points", type=int, default=2000)
    _add_output(p)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("w0", help="solve the continuity condition for w0 and trace the gap")
    _add_inputs(p)
    _add_variant(p)
    _add_fit(p)
    p.add_argument("--normalization", action="append", choices=NORMALIZATIONS)
    p.add_argument("--bandwidth", type=currency)
    p.add_argument("--survey-alpha", action="store_true")
    _add_output(p)
    p.set_defaults(func=cmd_w0)

    p = sub.add_parser("simulate", help="Monte Carlo comparison of the alpha estimators")
    p.add_argument("--config", help="JSON file with SimConfig fields")
    p.add_argument("--alpha", dest="alpha_true", type=float)
    p.add_argument("--wmin-gen", dest="w_min_gen", type=currency)
    p.add_argument("--n-samples", type=int)
    p.add_argument("--reps", dest="n_reps", type=int)
    p.add_argument("--cutoff", type=_optional_currency)
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--variants", choices=("one", "all"), default="one",
                   help="'all' runs the 2x2 cutoff/weighting grid")
    p.add_argument("--no-renormalize", action="store_true",
                   help="under cutoff, do not renormalize cell masses to the accepted region")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    _add_output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("synth", help="write a synthetic survey and rich list")
    p.add_argument("--households", type=int, default=4000)
    p.add_argument("--population", type=float, default=4.0e7)
    p.add_argument("--alpha", type=float, default=1.5)
    p.add_argument("--w-tail", type=currency, default=5e5)
    p.add_argument("--tail-fraction", type=float, default=0.05)
    p.add_argument("--topcode", type=_optional_currency, default=7.6e7)
    p.add_argument("--implicates", type=int, default=5)
    p.add_argument("--undercount", type=float, default=1.0)
    p.add_argument("--w1", type=currency, default=5e8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_synth, format="json")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "estimator", None):
        args.estimator = args.estimator.replace("-", "_")
    try:
        return args.func(args)
    except (WealthShareError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
