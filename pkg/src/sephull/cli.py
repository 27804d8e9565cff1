"""Command-line interface.

Subcommands: ``gen`` (dataset), ``hull`` (build/persist a hull), ``alpha``
(attach hull scores), ``baseline``/``exp1``/``exp2``/``exp3`` (experiments),
and ``eval`` (score a saved model, or the plain hull rule, on a dataset CSV).
"""

from __future__ import annotations

import argparse
import sys

from dataclasses import replace

from . import experiments
from .data import attach_alpha, load_csv, save_csv, generate_dataset
from .ensembles import load_model, predict_batch
from .hull import ChaApproxLabeler, load_hull, sample_hull, save_hull
from .metrics import CSV_HEADER, compute_metrics, confusion
from .states import BipartiteDims, PptExactLabeler


def _add_common(parser):
    parser.add_argument("--dims", default="2x2", help="bipartite dimensions, e.g. 2x2 or 3x3")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--out", required=True, help="output CSV path")


def _add_experiment_flags(parser):
    _add_common(parser)
    parser.add_argument("--preset", choices=("desk", "paper"), default="desk")
    parser.add_argument("--n", type=int, help="dataset size override")
    parser.add_argument("--theta", type=float, help="spectrum parameter (default 0.5)")
    parser.add_argument("--m", type=int, help="hull size override")
    parser.add_argument("--m-grid", help="comma-separated hull sizes (experiment 1)")
    parser.add_argument("--learners", type=int, help="ensemble size override")
    parser.add_argument("--max-depth", type=int, help="tree depth override")
    parser.add_argument("--train-frac", type=float, help="training fraction override")
    parser.add_argument("--reps", type=int, help="repetition count override")
    parser.add_argument("--use-smote", action="store_true", help="pad minority with SMOTE in RUSBoost")
    parser.add_argument("--alpha-cap", type=float, help="hull score cap override")


def _experiment_config(args, experiment) -> experiments.ExperimentConfig:
    dims = BipartiteDims.parse(args.dims)
    make = experiments.desk_config if args.preset == "desk" else experiments.paper_config
    cfg = make(dims, experiment, master_seed=args.seed)
    overrides = {}
    if args.n is not None:
        overrides["n"] = args.n
    if args.theta is not None:
        overrides["theta"] = args.theta
    if args.m is not None:
        overrides["m"] = args.m
    if args.m_grid is not None:
        overrides["m_grid"] = tuple(int(v) for v in args.m_grid.split(","))
    if args.learners is not None:
        overrides["n_learners"] = args.learners
    if args.max_depth is not None:
        overrides["max_depth"] = args.max_depth
    if args.train_frac is not None:
        overrides["train_fraction"] = args.train_frac
    if args.reps is not None:
        overrides["repetitions"] = args.reps
    if args.use_smote:
        overrides["use_smote"] = True
    if args.alpha_cap is not None:
        overrides["alpha_cap"] = args.alpha_cap
    return replace(cfg, **overrides) if overrides else cfg


def _cmd_gen(args) -> int:
    dims = BipartiteDims.parse(args.dims)
    if args.label_hull:
        labeler = ChaApproxLabeler(load_hull(args.label_hull))
    elif dims.d <= 6:
        labeler = PptExactLabeler()
    else:
        raise SystemExit("gen: dims with d_a*d_b > 6 need --label-hull (PPT labeling is not exact)")
    ds = generate_dataset(args.n, dims, args.theta, labeler, args.seed)
    save_csv(ds, args.out)
    pos, neg = ds.class_counts()
    print(f"wrote {ds.n} samples ({pos} separable, {neg} entangled) to {args.out}")
    return 0


def _cmd_hull(args) -> int:
    dims = BipartiteDims.parse(args.dims)
    hull = sample_hull(dims, args.m, args.seed)
    save_hull(hull, args.out)
    print(f"wrote hull m={hull.m} for dims {dims} to {args.out}")
    return 0


def _cmd_alpha(args) -> int:
    ds = load_csv(args.data)
    hull = load_hull(args.hull)
    scored = attach_alpha(ds, hull, alpha_cap=args.alpha_cap)
    save_csv(scored, args.out)
    certified = int((scored.alpha >= 1.0).sum())
    print(f"attached alpha from hull m={hull.m}; {certified}/{scored.n} rows reach alpha >= 1")
    return 0


def _cmd_eval(args) -> int:
    ds = load_csv(args.data)
    if args.model:
        model = load_model(args.model)
        predictions = predict_batch(model, ds.design_matrix())
        source = f"model {args.model}"
    else:
        if not ds.has_alpha:
            raise SystemExit("eval: dataset has no alpha column; attach one or pass --model")
        predictions = (ds.alpha >= 1.0).astype(int)
        source = "hull rule alpha >= 1"
    report = compute_metrics(confusion(predictions, ds.labels))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"# data={args.data}\n# predictor={source}\n")
        fh.write(CSV_HEADER + "\n")
        fh.write(report.csv_row() + "\n")
    print(f"{source}: oa={report.oa:.4f} aa={report.aa:.4f} f={report.f_measure:.4f} g={report.g_mean:.4f}")
    return 0


def _cmd_experiment(args, experiment) -> int:
    cfg = _experiment_config(args, experiment)
    rows = experiments.RUNNERS[experiment](cfg)
    experiments.save_results(rows, cfg, experiment, args.out)
    print(f"{experiment}: wrote {len(rows)} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sephull", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a labeled dataset CSV")
    _add_common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--label-hull", help="hull CSV for approximate labeling (required when d > 6)")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("hull", help="sample a product-state hull and save it")
    _add_common(p)
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=_cmd_hull)

    p = sub.add_parser("alpha", help="attach hull scores to a dataset CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--hull", required=True)
    p.add_argument("--alpha-cap", type=float, default=100.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_alpha)

    for name, help_text in (
        ("baseline", "bagging vs boosting on raw features"),
        ("exp1", "sweep hull size m"),
        ("exp2", "sweep training fraction"),
        ("exp3", "sweep prevalence difference"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_experiment_flags(p)
        p.set_defaults(func=lambda a, _name=name: _cmd_experiment(a, _name))

    p = sub.add_parser("eval", help="evaluate a saved model or the hull rule on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--model", help="ensemble model file (default: hull rule on the alpha column)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
