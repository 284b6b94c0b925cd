from __future__ import annotations

import argparse
import json
import logging
from dataclasses import replace
from pathlib import Path
from typing import Any

import numpy as np

from .. import __version__
from ..core.config import LOG_LEVELS, DfsConfig, RunSettings
from ..core.errors import DfsError, InvalidSpec
from ..core.models import FeatureSubset, LabeledDataset, RunManifest
from ..data.loaders import LoadedData, load_dataset
from ..evaluation.harness import parse_k_grid, run_curve, tune_gamma, tune_p
from ..evaluation.metrics import redundancy_rate
from ..evaluation.synthetic import generate_synthetic, parse_synthetic_spec
from ..reporting import (
    write_curve_csv,
    write_manifest,
    write_ranking,
    write_report,
    write_solution,
    write_traces_csv,
    write_tuning,
)
from ..reporting.writers import write_json
from ..selection.scatter import compute_scatter, standardize
from ..selection.selectors import build_selector
from ..selection.solver import solve


def _add_input_flags(parser: argparse.ArgumentParser, *, allow_synthetic: bool = False) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--input", help="Path to the dataset file")
    if allow_synthetic:
        source.add_argument(
            "--synthetic",
            help="Planted dataset spec, e.g. n=200,d=50,c=3,n_informative=5",
        )
    parser.add_argument("--format", choices=["csv", "sparse"], default="csv", help="Input file format")
    parser.add_argument("--label", default="-1", help="Label column name or index (csv only; default last column)")


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out-dir", default=None, help="Directory for output files (env DFS_OUT_DIR)")
    parser.add_argument("--seed", type=int, default=None, help="Seed for randomized steps (env DFS_SEED, default 0)")
    parser.add_argument(
        "--log-level",
        default=None,
        choices=sorted(LOG_LEVELS),
        help="Logging verbosity (env DFS_LOG)",
    )


def _add_solver_flags(parser: argparse.ArgumentParser, *, gamma_required: bool) -> None:
    parser.add_argument("--gamma", type=float, required=gamma_required, default=None, help="Regularization weight")
    parser.add_argument("--p", type=float, default=1.0, help="Row-norm exponent in (0, 2]")
    parser.add_argument("--l", type=int, default=None, help="Target dimensionality (default c-1)")
    parser.add_argument("--alpha", type=float, default=None, help="Ridge added to St (default 1e-6 * tr(St) / d)")
    parser.add_argument("--zeta", type=float, default=1e-10, help="Row-norm smoothing")
    parser.add_argument("--tol", type=float, default=1e-6, help="Convergence tolerance")
    parser.add_argument("--max-iter", type=int, default=100, help="Iteration cap")
    parser.add_argument(
        "--eig-backend",
        choices=["lapack", "jacobi"],
        default="lapack",
        help="Standard symmetric eigensolver used after Cholesky reduction",
    )
    parser.add_argument(
        "--no-extrapolate",
        action="store_true",
        help="Take only plain reweighting steps (no extrapolated weight trial per iteration)",
    )
    parser.add_argument(
        "--no-standardize",
        action="store_true",
        help="Use raw feature values instead of zero-mean, unit-variance columns",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dfs_selector",
        description="Discriminative feature selection with l2,p row-sparsity regularization",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    select = commands.add_parser("select", help="Rank features with the DFS solver")
    _add_input_flags(select)
    _add_common_flags(select)
    _add_solver_flags(select, gamma_required=True)
    select.add_argument("--top", type=int, default=None, help="Number of top features to list")
    select.add_argument("--emit-traces", action="store_true", help="Write per-iteration traces as CSV")

    evaluate = commands.add_parser("eval", help="Cross-validated accuracy and redundancy curves")
    _add_input_flags(evaluate, allow_synthetic=True)
    _add_common_flags(evaluate)
    _add_solver_flags(evaluate, gamma_required=False)
    evaluate.add_argument("--method", choices=["dfs", "fisher", "random", "all"], default="dfs")
    evaluate.add_argument("--k-grid", default=None, help="start:stop[:step] or comma list (default 10:100:5)")
    evaluate.add_argument("--folds", type=int, default=None, help="Cross-validation folds (env DFS_FOLDS, default 5)")
    evaluate.add_argument("--jobs", type=int, default=None, help="Folds evaluated in parallel (env DFS_JOBS)")
    evaluate.add_argument("--abs-corr", action="store_true", help="Use absolute correlation for redundancy")

    tune = commands.add_parser("tune", help="Grid search of gamma, and optionally p, by cross-validated accuracy")
    _add_input_flags(tune, allow_synthetic=True)
    _add_common_flags(tune)
    _add_solver_flags(tune, gamma_required=False)
    tune.add_argument("--gamma-grid", default=None, help="Comma list of gamma values")
    tune.add_argument(
        "--p-grid",
        default=None,
        help="Comma list of p values; sweeps p at --gamma, or at the tuned gamma when --gamma is absent",
    )
    tune.add_argument("--k-grid", default=None, help="start:stop[:step] or comma list")
    tune.add_argument("--folds", type=int, default=None)
    tune.add_argument("--jobs", type=int, default=None)

    redundancy = commands.add_parser("redundancy", help="Redundancy rate of a feature subset")
    _add_input_flags(redundancy)
    _add_common_flags(redundancy)
    _add_solver_flags(redundancy, gamma_required=False)
    redundancy.add_argument("--features", default=None, help="Comma list of feature ids")
    redundancy.add_argument("--top", type=int, default=None, help="Use the top-k DFS features (needs --gamma)")
    redundancy.add_argument("--abs-corr", action="store_true", help="Use absolute correlation")

    check = commands.add_parser("scatter-check", help="Print max |St - Sb - Sw| for a dataset")
    _add_input_flags(check)
    _add_common_flags(check)
    check.add_argument("--no-standardize", action="store_true")
    return parser


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


def configure_logging(level: str, log_path: str = "") -> None:
    log_level = LOG_LEVELS.get(level.lower(), logging.INFO)
    formatter = logging.Formatter("%(asctime)s %(levelname)s %(message)s")

    handlers: list[logging.Handler] = [logging.StreamHandler()]
    path = (log_path or "").strip()
    if path:
        try:
            target = Path(path)
            if target.parent != Path("."):
                target.parent.mkdir(parents=True, exist_ok=True)
            handlers.append(logging.FileHandler(target, encoding="utf-8"))
        except Exception as exc:
            logging.warning("Failed to initialize log file at %s: %s", path, exc)

    root = logging.getLogger()
    root.handlers.clear()
    root.setLevel(log_level)
    for handler in handlers:
        handler.setFormatter(formatter)
        root.addHandler(handler)


def _config_from_args(args: argparse.Namespace, *, gamma: float | None = None) -> DfsConfig:
    config = DfsConfig(
        gamma=float(gamma if gamma is not None else (args.gamma if args.gamma is not None else 1.0)),
        p=args.p,
        l=args.l,
        alpha=args.alpha,
        zeta=args.zeta,
        tol=args.tol,
        max_iter=args.max_iter,
        eig_backend=args.eig_backend,
        extrapolate=not getattr(args, "no_extrapolate", False),
    )
    config.validate()
    return config


def _load_input(args: argparse.Namespace, settings: RunSettings) -> tuple[LoadedData, dict[str, Any]]:
    synthetic = getattr(args, "synthetic", None)
    if synthetic:
        spec = parse_synthetic_spec(synthetic, seed=settings.seed)
        dataset, truth = generate_synthetic(spec)
        loaded = LoadedData(dataset=dataset, path=f"synthetic:{synthetic}", format="synthetic")
        return loaded, {"synthetic_spec": spec.__dict__, "ground_truth": list(truth.indices)}
    return load_dataset(args.input, fmt=args.format, label_column=args.label), {}


def _prepared(data: LabeledDataset, args: argparse.Namespace) -> LabeledDataset:
    if getattr(args, "no_standardize", False):
        return data
    standardized, _ = standardize(data)
    return standardized


def _manifest(args: argparse.Namespace, settings: RunSettings, loaded: LoadedData, config: dict[str, Any]) -> RunManifest:
    arguments = {key: value for key, value in sorted(vars(args).items()) if key != "command"}
    return RunManifest(
        command=str(args.command),
        tool_version=__version__,
        seed=settings.seed,
        input_path=loaded.path,
        input_format=loaded.format,
        label_column=loaded.label_column,
        label_mapping=dict(loaded.label_mapping),
        config=config,
        arguments=arguments,
    )


def cli_select(args: argparse.Namespace, settings: RunSettings) -> int:
    config = _config_from_args(args)
    loaded, _ = _load_input(args, settings)
    data = _prepared(loaded.dataset, args)
    solution = solve(data, config)

    out_dir = Path(settings.out_dir)
    outputs = [
        write_ranking(out_dir / "ranking.json", solution, top=args.top, feature_names=data.feature_names),
        write_solution(out_dir / "solution.json", solution),
    ]
    if args.emit_traces:
        outputs.append(write_traces_csv(out_dir / "traces.csv", solution))

    manifest = _manifest(args, settings, loaded, {**config.to_dict(), "alpha": solution.alpha, "l": solution.l})
    manifest.outputs = [str(path) for path in outputs]
    write_manifest(out_dir / "manifest.json", manifest)

    shown = solution.top(args.top if args.top is not None else min(10, data.n_features))
    print(
        json.dumps(
            {"top": [int(i) for i in shown], "iterations": solution.iterations, "terminated_by": solution.terminated_by}
        )
    )
    return 0


def cli_eval(args: argparse.Namespace, settings: RunSettings) -> int:
    if args.method == "dfs" and args.gamma is None:
        raise InvalidSpec("--gamma is required when --method dfs")
    config = _config_from_args(args)
    loaded, extra = _load_input(args, settings)
    k_grid = parse_k_grid(args.k_grid) if args.k_grid else None
    selector = build_selector(args.method, config=config, seed=settings.seed)
    report = run_curve(
        loaded.dataset,
        selector,
        k_grid,
        settings.folds,
        settings.seed,
        jobs=settings.jobs,
        absolute_correlation=args.abs_corr,
        standardize=not args.no_standardize,
    )

    out_dir = Path(settings.out_dir)
    outputs = [write_report(out_dir / "report.json", report), write_curve_csv(out_dir / "curve.csv", report)]
    manifest = _manifest(args, settings, loaded, {**config.to_dict(), **extra})
    manifest.outputs = [str(path) for path in outputs]
    write_manifest(out_dir / "manifest.json", manifest)
    return 0


def _float_grid(text: str | None, name: str) -> list[float] | None:
    if not text:
        return None
    try:
        return [float(chunk) for chunk in text.split(",") if chunk.strip()]
    except ValueError as exc:
        raise InvalidSpec(f"invalid {name} grid {text!r}") from exc


def cli_tune(args: argparse.Namespace, settings: RunSettings) -> int:
    config = _config_from_args(args)
    loaded, extra = _load_input(args, settings)
    gamma_grid = _float_grid(args.gamma_grid, "gamma")
    p_grid = _float_grid(args.p_grid, "p")
    k_grid = parse_k_grid(args.k_grid) if args.k_grid else None
    standardize = not args.no_standardize

    out_dir = Path(settings.out_dir)
    outputs: list[Path] = []
    summary: dict[str, float] = {}
    if args.p_grid is None or args.gamma is None:
        search = tune_gamma(
            loaded.dataset,
            config,
            gamma_grid,
            k_grid,
            settings.folds,
            settings.seed,
            jobs=settings.jobs,
            standardize=standardize,
        )
        outputs.append(write_tuning(out_dir / "tuning.json", search))
        summary["best_gamma"] = search.best_gamma
        config = replace(config, gamma=search.best_gamma)
    if args.p_grid is not None:
        sweep = tune_p(
            loaded.dataset,
            config,
            p_grid,
            k_grid,
            settings.folds,
            settings.seed,
            jobs=settings.jobs,
            standardize=standardize,
        )
        outputs.append(write_tuning(out_dir / "p_tuning.json", sweep))
        summary["best_p"] = sweep.best_p

    manifest = _manifest(args, settings, loaded, {**config.to_dict(), **extra})
    manifest.outputs = [str(path) for path in outputs]
    write_manifest(out_dir / "manifest.json", manifest)
    print(json.dumps(summary, sort_keys=True))
    return 0


def cli_redundancy(args: argparse.Namespace, settings: RunSettings) -> int:
    loaded, _ = _load_input(args, settings)
    data = _prepared(loaded.dataset, args)
    config_echo: dict[str, Any] = {}
    if args.features:
        try:
            indices = [int(chunk) for chunk in args.features.split(",") if chunk.strip()]
        except ValueError as exc:
            raise InvalidSpec(f"invalid feature list {args.features!r}") from exc
    elif args.top is not None:
        if args.gamma is None:
            raise InvalidSpec("--top needs --gamma to run the DFS solver")
        config = _config_from_args(args)
        config_echo = config.to_dict()
        indices = [int(i) for i in solve(data, config).top(args.top)]
    else:
        raise InvalidSpec("pass --features or --top")

    subset = FeatureSubset(tuple(indices))
    rate = redundancy_rate(data, subset, absolute=args.abs_corr)
    out_dir = Path(settings.out_dir)
    output = write_json(
        out_dir / "redundancy.json",
        {"features": list(subset.indices), "redundancy_rate": rate, "absolute_correlation": bool(args.abs_corr)},
    )
    manifest = _manifest(args, settings, loaded, config_echo)
    manifest.outputs = [str(output)]
    write_manifest(out_dir / "manifest.json", manifest)
    print(json.dumps({"redundancy_rate": rate}))
    return 0


def cli_scatter_check(args: argparse.Namespace, settings: RunSettings) -> int:
    loaded, _ = _load_input(args, settings)
    data = _prepared(loaded.dataset, args)
    triple = compute_scatter(data, verify=False)
    gap = triple.identity_gap()
    print(
        json.dumps(
            {
                "max_abs_st_minus_sb_sw": gap,
                "st_frobenius": triple.st.frobenius(),
                "relative": gap / max(1.0, triple.st.frobenius()),
                "sb_rank": int(np.sum(np.linalg.eigvalsh(triple.sb.array) > 1e-8 * max(triple.sb.frobenius(), 1e-300))),
            }
        )
    )
    return 0


COMMANDS = {
    "select": cli_select,
    "eval": cli_eval,
    "tune": cli_tune,
    "redundancy": cli_redundancy,
    "scatter-check": cli_scatter_check,
}


def run(argv: list[str] | None = None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    settings = RunSettings.from_env(
        log_level_override=args.log_level,
        out_dir_override=args.out_dir,
        seed_override=args.seed,
        jobs_override=getattr(args, "jobs", None),
        folds_override=getattr(args, "folds", None),
    )
    configure_logging(settings.log_level, settings.log_path)

    try:
        return COMMANDS[args.command](args, settings)
    except DfsError as exc:
        logging.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    except Exception as exc:
        logging.exception("Command %s failed: %s", args.command, exc)
        return 1


if __name__ == "__main__":
    raise SystemExit(run())
