"""Command-line interface: one binary, one subcommand per pipeline stage.

Exit codes: 0 success, 1 usage/config error, 2 data/validation error,
3 internal error. Config files are JSON with a mandatory "version" key;
unknown keys are rejected so typos fail loudly. A single --seed flag drives
every random substream.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import baselines, cost_builders, csdt, ensemble, evaluation, sampling, theory
from .combiners import GaConfig
from .cost_model import CostedDataset, normalized_cost, savings, total_cost
from .csdt import CsdtConfig
from .data import (
    CsvSchema,
    RawTable,
    SplitSpec,
    dataset_from_table,
    read_table,
    split,
    write_table,
)
from .ensemble import EcsdtConfig
from .errors import ConfigError, CostForestError, ValidationError
from .evaluation import AlgorithmSpec, ExperimentSpec, f1_score, run_experiment
from .inducers import InducerConfig

CONFIG_VERSION = "1"


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit code 1)."""

    def error(self, message):
        raise ConfigError(message)


def _load_config(path: str, allowed: dict) -> dict:
    """Read a JSON config, demand the version key, reject unknown keys."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{p}: config must be a JSON object")
    if data.get("version") != CONFIG_VERSION:
        raise ConfigError(f"{p}: missing or unsupported 'version' key (need \"{CONFIG_VERSION}\")")
    _reject_unknown(data, {"version": None, **allowed}, p, prefix="")
    return data


def _reject_unknown(node: dict, allowed: dict, path: Path, prefix: str) -> None:
    for key, value in node.items():
        dotted = f"{prefix}{key}"
        if key not in allowed:
            raise ConfigError(f"{path}: unknown config key '{dotted}'")
        sub = allowed[key]
        if isinstance(sub, dict) and isinstance(value, dict):
            _reject_unknown(value, sub, path, prefix=f"{dotted}.")


_TREE_KEYS = {
    "max_depth": None, "min_samples_split": None, "min_gain": None,
    "candidate_thresholds": None, "n_quantiles": None, "pruning": None,
    "impurity": None,
}
_GA_KEYS = {
    "population": None, "generations": None, "crossover_rate": None,
    "mutation_rate": None, "mutation_sigma": None, "beta_bounds": None,
    "elitism": None, "tournament": None, "seed": None,
}
_TRAIN_CONFIG_KEYS = {
    "inducer": {"kind": None, "T": None, "n_examples": None, "n_features": None, "seed": None},
    "tree": _TREE_KEYS,
    "combiner": {"kind": None, "ga": _GA_KEYS},
}
_BENCHMARK_KEYS = {
    "repetitions": None,
    "seed": None,
    "datasets": None,    # list: element keys checked separately
    "algorithms": None,
}
_PARAMS_KEYS = {
    "fraud": {"admin_cost": None, "amount_col": None},
    "churn": {"admin_cost": None, "gamma_col": None, "offer_col": None, "clv_col": None},
    "credit": {
        "loss_given_default": None, "pi_0": None, "pi_1": None, "mean_profit": None,
        "mean_credit_line": None, "credit_line_col": None, "profit_col": None,
    },
    "marketing": {"admin_cost": None, "income_col": None},
}


def _schema_from_args(args) -> CsvSchema:
    cost_cols = tuple(c.strip() for c in args.cost_cols.split(","))
    if len(cost_cols) != 4:
        raise ConfigError("--cost-cols needs exactly four comma-separated names (tp,fp,fn,tn)")
    drop = tuple(c.strip() for c in args.drop_cols.split(",") if c.strip()) if args.drop_cols else ()
    return CsvSchema(
        label_col=args.label_col,
        cost_cols=cost_cols,
        drop_cols=drop,
        strict=not args.relaxed,
    )


def _add_schema_flags(parser) -> None:
    parser.add_argument("--label-col", default="y", help="label column name")
    parser.add_argument(
        "--cost-cols", default="c_tp,c_fp,c_fn,c_tn",
        help="four cost column names in tp,fp,fn,tn order",
    )
    parser.add_argument("--drop-cols", default="", help="comma-separated columns to ignore")
    parser.add_argument(
        "--relaxed", action="store_true",
        help="accept rows violating the reasonableness conditions",
    )


def _cmd_build_costs(args) -> int:
    domain = args.domain
    params = _load_config(args.params, _PARAMS_KEYS[domain])
    table = read_table(args.data)
    strict = not args.relaxed
    if domain == "fraud":
        p = cost_builders.FraudCostParams(
            admin_cost=params["admin_cost"],
            amount_col=params.get("amount_col", "amount"),
        )
        costs = cost_builders.build_fraud_costs(table.column(p.amount_col), p, strict)
    elif domain == "churn":
        p = cost_builders.ChurnCostParams(
            admin_cost=params["admin_cost"],
            gamma_col=params.get("gamma_col", "gamma"),
            offer_col=params.get("offer_col", "offer_cost"),
            clv_col=params.get("clv_col", "clv"),
        )
        costs = cost_builders.build_churn_costs(
            table.column(p.gamma_col), table.column(p.offer_col),
            table.column(p.clv_col), p, strict,
        )
    elif domain == "credit":
        p = cost_builders.CreditCostParams(
            loss_given_default=params["loss_given_default"],
            pi_0=params["pi_0"], pi_1=params["pi_1"],
            mean_profit=params["mean_profit"],
            mean_credit_line=params["mean_credit_line"],
            credit_line_col=params.get("credit_line_col", "credit_line"),
            profit_col=params.get("profit_col", "profit"),
        )
        costs = cost_builders.build_credit_costs(
            table.column(p.credit_line_col), table.column(p.profit_col), p, strict
        )
    else:
        p = cost_builders.MarketingCostParams(
            admin_cost=params["admin_cost"],
            income_col=params.get("income_col", "income"),
        )
        costs = cost_builders.build_marketing_costs(table.column(p.income_col), p, strict)
    cost_names = ["c_tp", "c_fp", "c_fn", "c_tn"]
    clash = [c for c in cost_names if c in table.columns]
    if clash:
        raise ValidationError(f"{args.data}: cost columns already present: {clash}")
    out = RawTable(
        columns=table.columns + cost_names,
        data=np.column_stack([table.data, costs]),
        path=args.out,
    )
    write_table(out, args.out)
    return 0


def _cmd_resample(args) -> int:
    schema = _schema_from_args(args)
    table = read_table(args.data)
    dataset = dataset_from_table(table, schema)
    method = {"u": "undersample", "r": "rejection", "o": "oversample"}[args.method]
    if method == "undersample":
        idx = sampling.undersample_indices(dataset, seed=args.seed)
    elif method == "rejection":
        idx = sampling.rejection_sample_indices(dataset, seed=args.seed)
    else:
        idx = sampling.oversample_indices(dataset)
    write_table(RawTable(table.columns, table.data[idx], args.out), args.out)
    return 0


def _train_config_from_file(path: str, seed: int | None) -> EcsdtConfig:
    data = _load_config(path, _TRAIN_CONFIG_KEYS)
    inducer_cfg = dict(data.get("inducer", {}))
    if seed is not None:
        inducer_cfg["seed"] = seed
    combiner = data.get("combiner", {})
    ga_cfg = dict(combiner.get("ga", {}))
    if seed is not None:
        ga_cfg["seed"] = seed
    try:
        return EcsdtConfig(
            inducer=InducerConfig(**inducer_cfg),
            tree=CsdtConfig(**data.get("tree", {})),
            combiner=combiner.get("kind", "wv"),
            ga=GaConfig(**ga_cfg),
        )
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _cmd_train(args) -> int:
    config = _train_config_from_file(args.config, args.seed)
    train_set = dataset_from_table(read_table(args.train), _schema_from_args(args))
    model = ensemble.train(train_set, config)
    ensemble.save(model, args.model_out)
    return 0


def _feature_matrix(table: RawTable, args, k: int) -> np.ndarray:
    schema = _schema_from_args(args)
    ignore = {schema.label_col, *schema.cost_cols, *schema.drop_cols}
    feature_cols = [c for c in table.columns if c not in ignore]
    if len(feature_cols) != k:
        raise ValidationError(
            f"{table.path}: {len(feature_cols)} feature columns but the model expects {k}"
        )
    return np.column_stack([table.column(c) for c in feature_cols])


def _cmd_predict(args) -> int:
    model = ensemble.load(args.model)
    table = read_table(args.data)
    X = _feature_matrix(table, args, model.k)
    preds = model.predict_many(X)
    with Path(args.out).open("w", encoding="utf-8") as fh:
        fh.write("prediction\n")
        fh.writelines(f"{int(p)}\n" for p in preds)
    return 0


def _cmd_evaluate(args) -> int:
    dataset = dataset_from_table(read_table(args.data), _schema_from_args(args))
    pred_table = read_table(args.pred)
    preds = pred_table.column("prediction").astype(np.int64)
    metrics = {
        "n": dataset.n,
        "total_cost": total_cost(dataset, preds),
        "normalized_cost": normalized_cost(dataset, preds),
        "savings": savings(dataset, preds),
        "f1": f1_score(dataset.y, preds),
    }
    Path(args.out).write_text(json.dumps(metrics, indent=1, sort_keys=True), encoding="utf-8")
    return 0


_ALGO_KEYS = {"family", "name", "learner", "sampling", "config"}
_DS_KEYS = {"name", "csv", "label_col", "cost_cols", "drop_cols", "strict", "split"}


def _cmd_benchmark(args) -> int:
    data = _load_config(args.spec, _BENCHMARK_KEYS)
    seed = args.seed if args.seed is not None else data.get("seed", 0)
    datasets = []
    for entry in data.get("datasets", []):
        unknown = set(entry) - _DS_KEYS
        if unknown:
            raise ConfigError(f"{args.spec}: unknown dataset keys {sorted(unknown)}")
        schema = CsvSchema(
            label_col=entry.get("label_col", "y"),
            cost_cols=tuple(entry.get("cost_cols", ["c_tp", "c_fp", "c_fn", "c_tn"])),
            drop_cols=tuple(entry.get("drop_cols", [])),
            strict=entry.get("strict", True),
        )
        dataset = dataset_from_table(read_table(entry["csv"]), schema)
        split_cfg = entry.get("split", {})
        bundle = split(dataset, SplitSpec(
            train_frac=split_cfg.get("train_frac", 0.5),
            valid_frac=split_cfg.get("valid_frac", 0.25),
            test_frac=split_cfg.get("test_frac", 0.25),
            seed=split_cfg.get("seed", seed),
        ))
        datasets.append((entry["name"], bundle))
    algorithms = []
    for entry in data.get("algorithms", []):
        unknown = set(entry) - _ALGO_KEYS
        if unknown:
            raise ConfigError(f"{args.spec}: unknown algorithm keys {sorted(unknown)}")
        algorithms.append(AlgorithmSpec(
            family=entry["family"],
            name=entry["name"],
            learner=entry["learner"],
            sampling=entry.get("sampling", "t"),
            config=entry.get("config", {}),
        ))
    spec = ExperimentSpec(
        algorithms=algorithms,
        datasets=datasets,
        repetitions=data.get("repetitions", 50),
        seed=seed,
    )
    report = run_experiment(spec, jobs=args.jobs)
    out = Path(args.out)
    if out.suffix == ".csv":
        out.write_text(report.to_csv(), encoding="utf-8")
    else:
        out.write_text(report.to_json(), encoding="utf-8")
    return 0


def _cmd_verify_theory(args) -> int:
    params = theory.TheoryParams(
        T=args.T, rho=args.rho, n_examples=args.n,
        n_trials=args.trials, seed=args.seed or 0,
    )
    closed = theory.ensemble_correct_prob(args.T, args.rho)
    mc = theory.mc_majority_correct(args.T, args.rho, args.mc_samples, seed=params.seed)
    lemma = theory.simulate_lemma1(params)
    thm = theory.simulate_theorem1(params)
    report = {
        "params": {
            "T": args.T, "rho": args.rho, "n_examples": args.n,
            "n_trials": args.trials, "seed": params.seed,
        },
        "majority_correct_prob": {
            "closed_form": closed,
            "monte_carlo": mc,
            "mc_samples": args.mc_samples,
        },
        "single_class_cost_check": {
            str(a): vars(r) for a, r in lemma.items()
        },
        "ensemble_savings_check": vars(thm),
    }
    Path(args.out).write_text(json.dumps(report, indent=1, sort_keys=True), encoding="utf-8")
    print(
        f"majority-correct prob: closed={closed:.6f} mc={mc:.6f}; "
        f"savings-gap mean={thm.mean_diff:.6f} (se {thm.se_diff:.6f}, "
        f"held {100 * thm.frac_held:.1f}%)"
    )
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="costforest", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-costs", help="append domain cost columns to a CSV")
    p.add_argument("--domain", required=True, choices=["fraud", "churn", "credit", "marketing"])
    p.add_argument("--params", required=True, help="JSON parameter file")
    p.add_argument("--data", required=True, help="input CSV")
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--relaxed", action="store_true")
    p.set_defaults(func=_cmd_build_costs)

    p = sub.add_parser("resample", help="write a u/r/o training variant of a CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--method", required=True, choices=["u", "r", "o"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_schema_flags(p)
    p.set_defaults(func=_cmd_resample)

    p = sub.add_parser("train", help="train an ensemble model")
    p.add_argument("--config", required=True, help="JSON training config")
    p.add_argument("--train", required=True, help="training CSV")
    p.add_argument("--model-out", required=True)
    p.add_argument("--seed", type=int, default=None, help="override config seeds")
    _add_schema_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="predict labels with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    _add_schema_flags(p)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="score a predictions file against a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--out", required=True)
    _add_schema_flags(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("benchmark", help="run an algorithms x datasets experiment")
    p.add_argument("--spec", required=True, help="JSON experiment spec")
    p.add_argument("--out", required=True, help="report path (.json or .csv)")
    p.add_argument("--seed", type=int, default=None, help="override the spec seed")
    p.add_argument(
        "--jobs", type=int, default=os.cpu_count() or 1,
        help="parallel cell workers (results are identical for any value)",
    )
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("verify-theory", help="Monte-Carlo check of the savings inequality")
    p.add_argument("--T", type=int, default=11)
    p.add_argument("--rho", type=float, default=0.7)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--n", type=int, default=500, help="examples per trial")
    p.add_argument("--mc-samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_verify_theory)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CostForestError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
