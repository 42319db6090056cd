"""Command-line entry point.

Exit codes: 0 on success (and all verdicts passing), 1 when a verdict
fails, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import bayes, info, mle
from .errors import SynthInfoError
from .experiments import ExperimentConfig, load_csv_dataset, run_scenario, write_csv_dataset
from .experiments.report import _clean
from .experiments.scenarios import DEFAULT_CONFIGS, SCENARIOS
from .families import FAMILIES, get_family
from .synth import KIND_NAMES, grid_rotation_action, load_permutation_csv, make_kind

OUT_DIR_ENV = "SYNTHINFO_OUT_DIR"
DEFAULT_OUT_DIR = "synthinfo_out"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _out_dir(value: Optional[str]) -> Path:
    return Path(value or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT_DIR)


def _emit(payload: dict, summary: str) -> None:
    print(json.dumps(_clean(payload), indent=2, sort_keys=True))
    print(summary, file=sys.stderr)


def _kind_from_args(args, family=None):
    action = None
    if args.kind == "symmetry":
        if getattr(args, "perm", None):
            action = load_permutation_csv(args.perm, args.period)
        elif getattr(args, "grid_size", None):
            action = grid_rotation_action(args.grid_size)
        else:
            raise UsageError("symmetry needs --perm FILE or --grid-size N")
    fam = family or (get_family(args.family) if getattr(args, "family", None) else None)
    prior = None
    if args.kind == "posterior_predictive":
        prior = bayes.BetaBernoulli(args.alpha, args.beta) if fam is None or fam.name == "bernoulli" else bayes.NormalNormal(0.0, 1.0)
    return make_kind(args.kind, fam, getattr(args, "fixed_theta", None), prior=prior, action=action)


def _add_kind_args(p):
    p.add_argument("--kind", choices=KIND_NAMES, default="bootstrap")
    p.add_argument("--fixed-theta", type=float, default=0.5, help="parameter of the 'fixed' generator")
    p.add_argument("--perm", help="symmetry action as a from_index,to_index CSV")
    p.add_argument("--period", type=int, default=4)
    p.add_argument("--grid-size", type=int, help="use 90-degree rotation on binary N x N images")
    p.add_argument("--alpha", type=float, default=1.0, help="Beta prior for posterior_predictive")
    p.add_argument("--beta", type=float, default=1.0)


def _add_data_args(p, required=True, flag="--data"):
    p.add_argument(flag, required=required, help="CSV file with a header row")
    p.add_argument("--value-column", default="y")
    p.add_argument("--label-column", default=None)


# -- handlers -------------------------------------------------------------------


def cmd_families(args) -> int:
    for name, fam in sorted(FAMILIES.items()):
        lo, hi = fam.domain
        print(f"{name}\tdomain=({lo}, {hi})\tsupport={fam.support_kind}")
    return 0


def cmd_synth(args) -> int:
    family = get_family(args.family) if args.family else None
    X = load_csv_dataset(args.data, args.value_column, args.label_column)
    kind = _kind_from_args(args, family)
    from .synth import enumerate_support, fit

    d = fit(kind, X)
    if args.synth_cmd == "support":
        rows = enumerate_support(d)
        _emit({"kind": kind.name, "support": [[p, q] for p, q in rows]}, f"{len(rows)} support points")
        return 0
    S = d.sample(args.m, args.seed)
    if args.out:
        write_csv_dataset(args.out, S, args.value_column, args.label_column or "c")
        print(f"wrote {len(S)} synthetic draws to {args.out}")
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow([args.value_column] + ([args.label_column or "c"] if S.labelled else []))
        for u in S.units():
            w.writerow([u[1], u[0]] if S.labelled else [u])
        print(f"{len(S)} synthetic draws", file=sys.stderr)
    return 0


def cmd_info(args) -> int:
    family = get_family(args.family)
    kind = _kind_from_args(args, family)
    if args.info_cmd == "exact":
        dec = info.exact_decomposition(family, kind, args.theta, args.n, args.m)
        _emit(dec.to_dict(), f"i_x={dec.i_x.value:.10g} i_xs={dec.i_xs.value:.10g} "
                             f"i_s={dec.i_s.value:.10g} i_s_given_x={dec.i_s_given_x.value:.3g}")
        return 0
    est = info.mc_fisher_marginal(args.target, family, kind, args.theta, args.n, args.m, args.reps, args.seed)
    _emit({"target": args.target.upper(), "theta": args.theta, "n": args.n, "m": args.m, **est.__dict__},
          f"I_{args.target.upper()} ~= {est.value:.6g} +/- {est.std_error:.3g}")
    return 0


def cmd_mle(args) -> int:
    family = get_family(args.family)
    if args.mle_cmd == "fit":
        fit = mle.fit_mle(family, load_csv_dataset(args.data, args.value_column, support=family))
        _emit(fit.__dict__, f"theta_hat={fit.theta_hat:.10g} se={fit.standard_error:.6g}")
        return 0
    if args.mle_cmd == "pooled":
        X = load_csv_dataset(args.data, args.value_column, support=family)
        S = load_csv_dataset(args.synth, args.value_column)
        naive = mle.naive_pooled_fit(family, X, S)
        correct = mle.fit_mle(family, X)
        _emit({"naive": naive.__dict__, "real_only": correct.__dict__},
              f"naive se={naive.standard_error:.6g} vs real-only se={correct.standard_error:.6g}")
        return 0
    kind = _kind_from_args(args, family)
    rep = mle.se_calibration_report(family, kind, args.theta_true, args.n, args.k, args.reps, args.seed)
    out = _out_dir(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"calibration_n{args.n}_k{args.k}.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replicate", "theta_hat_naive", "se_naive", "se_correct", "covered"])
        for r in rep.records:
            w.writerow([r["replicate"], repr(r["theta_hat_naive"]), repr(r["se_naive"]),
                        repr(r["se_correct"]), int(r["covered"])])
    (out / f"calibration_n{args.n}_k{args.k}.json").write_text(
        json.dumps(_clean(rep.aggregates), indent=2, sort_keys=True) + "\n")
    a = rep.aggregates
    print(f"coverage naive={a['coverage_naive']:.4f} correct={a['coverage_correct']:.4f} "
          f"se ratio={a['mean_se_ratio']:.4f} (expected {a['expected_se_ratio']:.4f}) -> {path}")
    return 0


def _parse_event(text: str):
    kind, _, rest = text.partition(":")
    if kind == "next":
        return bayes.NextObservation(int(rest or 1))
    if kind == "interval":
        lo, hi = (float(v) for v in rest.split(":"))
        return bayes.ParameterInterval(lo, hi)
    raise UsageError(f"event must be next:V or interval:LO:HI, got {text!r}")


def _model(args):
    if args.model == "beta":
        return bayes.BetaBernoulli(args.alpha, args.beta)
    return bayes.NormalNormal(args.m0, args.v0)


def _hyper(post: bayes.Posterior) -> dict:
    return {**post.model.__dict__, "n_assimilated": post.n_assimilated, "mean": post.mean, "sd": post.sd}


def cmd_bayes(args) -> int:
    if args.bayes_cmd == "update":
        post = bayes.update(_model(args), load_csv_dataset(args.data, args.value_column))
        _emit(_hyper(post), f"posterior mean={post.mean:.10g} sd={post.sd:.6g}")
        return 0
    if args.bayes_cmd == "reflect":
        post = bayes.Posterior(bayes.BetaBernoulli(args.alpha, args.beta))
        lhs, rhs = bayes.reflection_check(post, _parse_event(args.event), (0, 1))
        _emit({"lhs": lhs, "rhs": rhs, "abs_diff": abs(lhs - rhs)}, f"|lhs - rhs| = {abs(lhs - rhs):.3g}")
        return 0
    if args.data:
        X = load_csv_dataset(args.data, args.value_column)
    else:
        fam = get_family("bernoulli" if args.model == "beta" else "normal_mu")
        X = fam.sample(args.theta_true, args.n, args.seed)
    out = bayes.posterior_stability_check(_model(args), X, args.k_schedule, args.seed)
    last = out["rows"][-1]
    _emit(out, f"naive sd at k={last['k']}: {last['naive_sd']:.4g} (base {out['base_sd']:.4g})")
    return 0


def cmd_experiment(args) -> int:
    if args.exp_cmd == "list":
        for name in sorted(SCENARIOS):
            print(name)
        return 0
    data: dict = {}
    if args.config:
        data.update(json.loads(Path(args.config).read_text()))
    elif args.scenario:
        data.update({"scenario": args.scenario, **DEFAULT_CONFIGS.get(args.scenario, {})})
    overrides = {k: v for k, v in vars(args).items() if k in ExperimentConfig.field_names() and v is not None}
    data.update(overrides)
    if "scenario" not in data:
        raise UsageError("need --config or --scenario")
    cfg = ExperimentConfig.from_dict(data)
    cfg.out_dir = str(_out_dir(cfg.out_dir))
    report = run_scenario(cfg)
    status = "PASS" if report.passed else "FAIL"
    failed = [v.name for v in report.verdicts if not v.passed]
    print(f"{cfg.scenario}: {status} ({len(report.verdicts) - len(failed)}/{len(report.verdicts)} verdicts)"
          + (f" failed: {', '.join(failed)}" if failed else "") + f" -> {cfg.out_dir}")
    return 0 if report.passed else 1


def cmd_report(args) -> int:
    ok = True
    for p in args.paths:
        path = Path(p)
        files = sorted(path.glob("*_report.json")) if path.is_dir() else [path]
        for f in files:
            doc = json.loads(f.read_text())
            for v in doc["verdicts"]:
                print(f"{'PASS' if v['passed'] else 'FAIL'}  {doc['config']['scenario']}.{v['name']}  value={v['value']}")
            ok &= bool(doc["passed"])
    return 0 if ok else 1


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="synthinfo", description="Synthetic-data Fisher-information toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("families", help="list distribution families")
    p.set_defaults(func=cmd_families)

    p = sub.add_parser("synth", help="fit a generator to a dataset")
    ssub = p.add_subparsers(dest="synth_cmd", required=True, parser_class=_Parser)
    for name in ("sample", "support"):
        q = ssub.add_parser(name, help=f"{name} of the fitted synthetic distribution")
        _add_data_args(q)
        _add_kind_args(q)
        q.add_argument("--family", choices=sorted(FAMILIES))
        if name == "sample":
            q.add_argument("--m", type=int, required=True)
            q.add_argument("--seed", type=int, required=True)
            q.add_argument("--out")
        q.set_defaults(func=cmd_synth)

    p = sub.add_parser("info", help="Fisher information accounting")
    isub = p.add_subparsers(dest="info_cmd", required=True, parser_class=_Parser)
    for q in (isub.add_parser("exact", help="exact decomposition by enumeration"), isub.add_parser("mc", help="Monte Carlo score-variance estimate")):
        q.add_argument("--family", choices=sorted(FAMILIES), required=True)
        _add_kind_args(q)
        q.add_argument("--theta", type=float, required=True)
        q.add_argument("--n", type=int, required=True)
        q.add_argument("--m", type=int, default=0)
        q.set_defaults(func=cmd_info)
    q.add_argument("--target", choices=["X", "S", "XS"], type=str.upper, required=True)
    q.add_argument("--reps", type=int, default=1000)
    q.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("mle", help="maximum likelihood fits")
    msub = p.add_subparsers(dest="mle_cmd", required=True, parser_class=_Parser)
    q = msub.add_parser("fit", help="MLE on real data")
    q.add_argument("--family", choices=sorted(FAMILIES), required=True)
    _add_data_args(q)
    q.set_defaults(func=cmd_mle)
    q = msub.add_parser("pooled", help="naive MLE on real plus synthetic data")
    q.add_argument("--family", choices=sorted(FAMILIES), required=True)
    _add_data_args(q)
    q.add_argument("--synth", required=True, help="CSV of synthetic draws (same value column)")
    q.set_defaults(func=cmd_mle)
    q = msub.add_parser("calibration", help="naive-pooling SE calibration study")
    q.add_argument("--family", choices=sorted(FAMILIES), default="bernoulli")
    _add_kind_args(q)
    q.add_argument("--theta-true", type=float, default=0.6)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--reps", type=int, default=2000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out-dir")
    q.set_defaults(func=cmd_mle)

    p = sub.add_parser("bayes", help="conjugate updating and reflection")
    bsub = p.add_subparsers(dest="bayes_cmd", required=True, parser_class=_Parser)
    for name, hlp in (("update", "conjugate update on a dataset"),
                      ("reflect", "check the reflection identity"),
                      ("naive", "coherent vs naive assimilation of synthetic draws")):
        q = bsub.add_parser(name, help=hlp)
        q.add_argument("--model", choices=["beta", "normal"], default="beta")
        q.add_argument("--alpha", type=float, default=1.0)
        q.add_argument("--beta", type=float, default=1.0)
        q.add_argument("--m0", type=float, default=0.0)
        q.add_argument("--v0", type=float, default=1.0)
        q.set_defaults(func=cmd_bayes)
        if name == "update":
            _add_data_args(q)
        elif name == "reflect":
            q.add_argument("--event", default="next:1", help="next:V or interval:LO:HI")
        else:
            _add_data_args(q, required=False)
            q.add_argument("--k-schedule", type=_int_list, default=[0, 50, 200, 450])
            q.add_argument("--theta-true", type=float, default=0.6)
            q.add_argument("--n", type=int, default=50)
            q.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("experiment", help="run reproducible scenarios")
    esub = p.add_subparsers(dest="exp_cmd", required=True, parser_class=_Parser)
    q = esub.add_parser("list", help="list scenarios")
    q.set_defaults(func=cmd_experiment)
    q = esub.add_parser("run", help="run one scenario from a JSON config and/or flags")
    q.add_argument("--config")
    q.add_argument("--scenario", choices=sorted(SCENARIOS))
    q.add_argument("--seed", type=int)
    q.add_argument("--family", choices=sorted(FAMILIES))
    q.add_argument("--kind", choices=KIND_NAMES)
    q.add_argument("--theta-true", dest="theta_true", type=float)
    q.add_argument("--n", type=int)
    q.add_argument("--m", type=int)
    q.add_argument("--k-schedule", dest="k_schedule", type=_int_list)
    q.add_argument("--n-reps", dest="n_reps", type=int)
    q.add_argument("--out-dir", dest="out_dir")
    q.add_argument("--theta-grid", dest="theta_grid", type=_float_list)
    q.add_argument("--n-grid", dest="n_grid", type=_int_list)
    q.add_argument("--m-grid", dest="m_grid", type=_int_list)
    q.add_argument("--rho-grid", dest="rho_grid", type=_float_list)
    q.add_argument("--fixed-theta", dest="fixed_theta", type=float)
    q.add_argument("--censoring", type=lambda s: s.lower() in ("1", "true", "yes"), default=None)
    q.add_argument("--alpha", type=float)
    q.add_argument("--beta", type=float)
    q.set_defaults(func=cmd_experiment)

    p = sub.add_parser("report", help="summarise report JSON files or directories")
    p.add_argument("paths", nargs="+")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, SynthInfoError, ValueError, OSError) as exc:
        print(f"synthinfo: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
