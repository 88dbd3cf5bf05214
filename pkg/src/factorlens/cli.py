"""Batch driver: synthetic data generation, headless analyses, API server.

Exit codes: 0 ok, 1 runtime error, 2 usage error. Every flag of the chosen
subcommand can also come from a JSON manifest via --manifest; explicit flags
win over manifest values.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import date
from pathlib import Path

from . import artifacts
from .backtest import PortfolioSpec, get_strategy, run_backtest
from .data import load_dataset, save_dataset
from .errors import FactorLensError
from .metrics import (
    METRIC_KINDS,
    SensitivityCache,
    aggregate_importance,
    compute_importances,
    stability_scores,
)
from .registry import DEFAULT_REGISTRY, FactorRegistry, format_registry, load_registry
from .rolling import partition_cycles, rolling_fit
from .solver import ElasticNetConfig
from .synthetic import (
    SyntheticConfig,
    generate_synthetic,
    synthetic_factor_names,
    synthetic_factor_types,
)

MODEL_FLAGS = {"lasso": "lasso", "lassocv": "lassocv", "elnet": "elnet"}


def _manifest_defaults(argv) -> dict:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--manifest", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.manifest:
        return {}
    path = Path(known.manifest)
    if not path.exists():
        print(f"manifest not found: {path}", file=sys.stderr)
        raise SystemExit(2)
    try:
        loaded = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        print(f"manifest is not valid JSON: {exc}", file=sys.stderr)
        raise SystemExit(2) from None
    if not isinstance(loaded, dict):
        print("manifest must be a JSON object of flag values", file=sys.stderr)
        raise SystemExit(2)
    return {k.replace("-", "_"): v for k, v in loaded.items()}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="factorlens",
        description="Rolling sparse-regression factor engine",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    gen = sub.add_parser("generate", help="write a synthetic dataset as CSVs")
    gen.add_argument("--stocks", type=int, default=10)
    gen.add_argument("--sectors", type=int, default=2)
    gen.add_argument("--days", type=int, default=330)
    gen.add_argument("--factors", type=int, default=20)
    gen.add_argument("--sparsity", type=int, default=3)
    gen.add_argument("--noise", type=float, default=0.01)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument(
        "--weight-magnitude", type=float, default=0.05,
        help="planted weight size; the default keeps compounded prices positive",
    )
    gen.add_argument("--drift", type=float, default=0.0)
    gen.add_argument("--cycle-days", type=int, default=21)
    gen.add_argument("--out", default=None)
    gen.add_argument("--manifest", default=None)

    run = sub.add_parser("run", help="fit, score, and optionally backtest")
    run.add_argument("--data", default=None, help="directory with the three CSVs")
    run.add_argument("--model", choices=sorted(MODEL_FLAGS), default="lasso")
    run.add_argument("--period", default=None, help="A..B day indices or ISO dates")
    run.add_argument("--stocks", default=None, help="comma-separated stock ids")
    run.add_argument("--sectors", default=None, help="comma-separated sector names")
    run.add_argument("--factors", default=None, help="comma-separated factor subset")
    run.add_argument("--train-days", "-T", dest="train_days", type=int, default=200)
    run.add_argument("--cycle-days", "-D", dest="cycle_days", type=int, default=21)
    run.add_argument("--lambda-ratio", type=float, default=0.1)
    run.add_argument("--metric-kind", choices=METRIC_KINDS, default="contribution")
    run.add_argument("--backtest", action="store_true")
    run.add_argument("--sensitivity", action="store_true")
    run.add_argument("--strategy", default="long_or_cash")
    run.add_argument("--horizon", type=int, default=63)
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--no-strict-factors", action="store_true")
    run.add_argument("--out", default=None)
    run.add_argument("--manifest", default=None)

    serve = sub.add_parser("serve", help="start the HTTP API")
    env = os.environ
    serve.add_argument("--host", default=env.get("FACTORLENS_HOST", "127.0.0.1"))
    serve.add_argument("--port", type=int, default=int(env.get("FACTORLENS_PORT", "8000")))
    serve.add_argument(
        "--train-days", "-T", dest="train_days", type=int,
        default=int(env.get("FACTORLENS_TRAIN_DAYS", "200")),
    )
    serve.add_argument(
        "--cycle-days", "-D", dest="cycle_days", type=int,
        default=int(env.get("FACTORLENS_CYCLE_DAYS", "21")),
    )
    serve.add_argument(
        "--lambda-ratio", type=float,
        default=float(env.get("FACTORLENS_LAMBDA_RATIO", "0.1")),
    )
    serve.add_argument(
        "--horizon", type=int, default=int(env.get("FACTORLENS_HORIZON", "63")),
    )
    serve.add_argument("--jobs", type=int, default=int(env.get("FACTORLENS_JOBS", "1")))
    serve.add_argument(
        "--cache-size", type=int, default=int(env.get("FACTORLENS_CACHE_SIZE", "128")),
    )
    serve.add_argument("--manifest", default=None)
    return parser


def _write_json(path: Path, payload) -> None:
    # exact canonical bytes: artifacts must be byte-identical to API payloads
    path.write_bytes(artifacts.canonical_json_bytes(payload))


def _write_manifest(out: Path, subcommand: str, args: argparse.Namespace, inputs: dict) -> None:
    manifest = {
        "subcommand": subcommand,
        "inputs": inputs,
        "config": {
            k: v
            for k, v in sorted(vars(args).items())
            if k not in {"subcommand", "manifest", "out"} and v is not None
        },
        "out": str(out),
        "seed": getattr(args, "seed", None),
    }
    _write_json(out / "manifest.json", manifest)


def cmd_generate(args, parser) -> int:
    if args.out is None:
        parser.error("--out is required")
    if args.sparsity > args.factors:
        parser.error(f"--sparsity {args.sparsity} exceeds --factors {args.factors}")
    if min(args.stocks, args.sectors, args.days, args.factors, args.sparsity) < 1:
        parser.error("counts must be positive")
    cfg = SyntheticConfig(
        n_stocks=args.stocks,
        n_sectors=args.sectors,
        n_days=args.days,
        n_factors=args.factors,
        sparsity=args.sparsity,
        noise_sigma=args.noise,
        seed=args.seed,
        weight_magnitude=args.weight_magnitude,
        drift_rate=args.drift,
        cycle_days=args.cycle_days,
    )
    dataset, planted = generate_synthetic(cfg)
    out = Path(args.out)
    save_dataset(dataset, out)
    truth = {
        "seed": cfg.seed,
        "config": {
            "n_stocks": cfg.n_stocks,
            "n_sectors": cfg.n_sectors,
            "n_days": cfg.n_days,
            "n_factors": cfg.n_factors,
            "sparsity": cfg.sparsity,
            "noise_sigma": cfg.noise_sigma,
            "weight_magnitude": cfg.weight_magnitude,
            "drift_rate": cfg.drift_rate,
            "cycle_days": cfg.cycle_days,
        },
        "stocks": {
            sid: {
                "support": list(p.support),
                "weights": {n: p.base_weights[n] for n in p.support},
            }
            for sid, p in sorted(planted.stocks.items())
        },
    }
    _write_json(out / "planted_weights.json", truth)
    names = synthetic_factor_names(cfg.n_factors)
    if any(n not in DEFAULT_REGISTRY for n in names):
        reg = FactorRegistry(names=names, types=synthetic_factor_types(names))
        (out / "factors.toml").write_text(format_registry(reg), encoding="utf-8")
    _write_manifest(out, "generate", args, inputs={})
    print(f"wrote dataset ({cfg.n_stocks} stocks x {cfg.n_days} days) to {out}")
    return 0


def _parse_period(text: str, dataset) -> tuple[int, int]:
    if ".." not in text:
        raise FactorLensError(f"--period must be A..B, got {text!r}")
    a, _, b = text.partition("..")
    a, b = a.strip(), b.strip()
    if a.lstrip("-").isdigit() and b.lstrip("-").isdigit():
        return int(a), int(b)
    try:
        return (
            dataset.calendar.day_of(date.fromisoformat(a)),
            dataset.calendar.day_of(date.fromisoformat(b)),
        )
    except ValueError:
        raise FactorLensError(f"--period bounds must be ints or ISO dates: {text!r}") from None


def _csv_list(text) -> list[str] | None:
    if text is None:
        return None
    items = [t.strip() for t in str(text).split(",") if t.strip()]
    return items or None


def cmd_run(args, parser) -> int:
    for flag in ("data", "period", "out"):
        if getattr(args, flag) is None:
            parser.error(f"--{flag} is required")
    data_dir = Path(args.data)
    registry = DEFAULT_REGISTRY
    bundled = data_dir / "factors.toml"
    if bundled.exists():
        registry = load_registry(bundled)
    dataset = load_dataset(
        data_dir / "prices.csv",
        data_dir / "factors.csv",
        data_dir / "sectors.csv",
        registry=registry,
        strict_factors=not args.no_strict_factors,
    )

    start, end = _parse_period(args.period, dataset)
    length = end - start + 1
    effective = (length // args.cycle_days) * args.cycle_days
    if effective <= 0:
        raise FactorLensError(
            f"period holds {length} days, shorter than one cycle of {args.cycle_days}"
        )
    if effective != length:
        print(
            f"period trimmed to {effective} days (multiple of D={args.cycle_days})",
            file=sys.stderr,
        )
    end = start + effective - 1

    stocks = _csv_list(args.stocks) or []
    for sector in _csv_list(args.sectors) or []:
        if sector not in dataset.sectors:
            raise FactorLensError(f"unknown sector {sector!r}")
        stocks.extend(dataset.sectors[sector])
    stocks = sorted(set(stocks)) if stocks else list(dataset.stock_ids())

    factor_subset = _csv_list(args.factors)
    if factor_subset is not None:
        panel = set(dataset.factors.factor_names)
        unknown = [f for f in factor_subset if f not in panel]
        if unknown:
            raise FactorLensError(f"unknown factors: {unknown}")
        factor_subset = tuple(
            n for n in dataset.factors.factor_names if n in set(factor_subset)
        )

    partition = partition_cycles(args.train_days, args.cycle_days, (start, end))
    solver_cfg = ElasticNetConfig(
        variant=MODEL_FLAGS[args.model], lambda_ratio=args.lambda_ratio
    )
    series = rolling_fit(
        dataset, stocks, partition, solver_cfg,
        factor_names=factor_subset, jobs=args.jobs,
    )

    importances = []
    for sid in sorted(series):
        importances.extend(compute_importances(series[sid]))
    sensitivities = []
    if args.sensitivity:
        cache = SensitivityCache()
        for sid in sorted(series):
            s = series[sid]
            for res in s.cycles:
                for name in s.factor_names:
                    sensitivities.append(
                        cache.get_or_compute(dataset, s, solver_cfg, res.cycle.index, name)
                    )
    aggregates = []
    for cyc in partition.cycles:
        aggregates.extend(
            aggregate_importance(
                importances, cyc.index, args.metric_kind,
                factor_order=factor_subset or dataset.factors.factor_names,
            )
        )

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "models.json", artifacts.models_payload(series))
    _write_json(
        out / "metrics.json",
        artifacts.metrics_payload(
            importances, sensitivities, stability_scores(importances)
        ),
    )

    if args.backtest:
        spec = PortfolioSpec(
            name="portfolio",
            stock_ids=tuple(stocks),
            factor_ids=factor_subset or dataset.factors.factor_names,
            period=(start, end),
            variant=MODEL_FLAGS[args.model],
        )
        result = run_backtest(
            spec, dataset, partition, config=solver_cfg,
            strategy=get_strategy(args.strategy), horizon=args.horizon,
            jobs=args.jobs,
        )
        _write_json(
            out / "backtest.json",
            artifacts.backtest_list_payload([result], dataset.calendar),
        )
        (out / "curves.csv").write_text(
            artifacts.curves_csv_text(result, dataset.calendar), encoding="utf-8"
        )

    _write_manifest(
        out, "run", args,
        inputs={"data": str(data_dir), "period": [start, end]},
    )
    print(f"wrote artifacts for {len(stocks)} stocks x {partition.n_cycles} cycles to {out}")
    return 0


def cmd_serve(args, parser) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    cfg = ServiceConfig(
        train_days=args.train_days,
        cycle_days=args.cycle_days,
        horizon=args.horizon,
        lambda_ratio=args.lambda_ratio,
        jobs=args.jobs,
        cache_size=args.cache_size,
    )
    uvicorn.run(create_app(cfg), host=args.host, port=args.port, log_level="info")
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    defaults = _manifest_defaults(argv)
    parser = build_parser()
    if defaults:
        for action in parser._subparsers._group_actions[0].choices.values():
            known = {a.dest for a in action._actions}
            action.set_defaults(**{k: v for k, v in defaults.items() if k in known})
    args = parser.parse_args(argv)
    try:
        if args.subcommand == "generate":
            return cmd_generate(args, parser)
        if args.subcommand == "run":
            return cmd_run(args, parser)
        return cmd_serve(args, parser)
    except (FactorLensError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
