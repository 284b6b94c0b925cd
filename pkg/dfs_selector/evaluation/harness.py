from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..core.config import DEFAULT_GAMMA_GRID, DEFAULT_P_GRID, DfsConfig
from ..core.errors import DimensionMismatch, InvalidK, InvalidSpec
from ..core.models import EvalReport, FeatureSubset, GammaSearchReport, LabeledDataset, PSearchReport
from ..selection.scatter import CONSTANT_STD, fit_standardization
from ..selection.selectors import DfsSelector, FeatureSelector
from .metrics import redundancy_rate

Split = tuple[np.ndarray, np.ndarray]


def default_k_grid(n_features: int) -> list[int]:
    """10..100 step 5, clipped to the number of features."""
    grid = [k for k in range(10, 101, 5) if k <= n_features]
    return grid or [n_features]


def parse_k_grid(text: str) -> list[int]:
    """``"10:100:5"`` (inclusive range) or ``"5,10,20"``."""
    raw = text.strip()
    try:
        if ":" in raw:
            parts = [int(part) for part in raw.split(":")]
            if len(parts) not in (2, 3):
                raise InvalidSpec(f"k grid range {text!r} must be start:stop[:step]")
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else 1
            if step < 1:
                raise InvalidSpec("k grid step must be positive")
            grid = list(range(start, stop + 1, step))
        else:
            grid = [int(chunk) for chunk in raw.split(",") if chunk.strip()]
    except ValueError as exc:
        raise InvalidSpec(f"invalid k grid {text!r}") from exc
    if not grid or any(k < 1 for k in grid):
        raise InvalidSpec(f"k grid {text!r} must list positive sizes")
    return grid


def kfold_split(n: int, k: int, seed: int, labels: np.ndarray | None = None) -> list[Split]:
    """Shuffled k-fold partition of ``0..n-1``; stratified by class when labels are given.

    Samples are dealt round-robin over folds with one running counter, so fold
    sizes differ by at most one and each class is spread as evenly as possible.
    """
    if k < 2 or k > n:
        raise InvalidK(f"fold count must satisfy 2 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    assignment = np.empty(n, dtype=np.int64)
    if labels is None:
        order = rng.permutation(n)
        assignment[order] = np.arange(n) % k
    else:
        values = np.asarray(labels)
        if values.shape != (n,):
            raise DimensionMismatch(f"expected {n} labels for stratification, got shape {values.shape}")
        counter = 0
        for cls in np.unique(values):
            members = rng.permutation(np.flatnonzero(values == cls))
            assignment[members] = (counter + np.arange(members.size)) % k
            counter += members.size

    all_idx = np.arange(n)
    return [(all_idx[assignment != fold], all_idx[assignment == fold]) for fold in range(k)]


def _nearest_centroid(train_features: np.ndarray, train_labels: np.ndarray, n_classes: int, test: np.ndarray) -> np.ndarray:
    present = [cls for cls in range(n_classes) if np.any(train_labels == cls)]
    centroids = np.vstack([train_features[train_labels == cls].mean(axis=0) for cls in present])
    distances = np.sum((test[:, np.newaxis, :] - centroids[np.newaxis, :, :]) ** 2, axis=2)
    return np.asarray(present, dtype=np.int64)[np.argmin(distances, axis=1)]


def classify_nearest_centroid(train: LabeledDataset, test_features: np.ndarray) -> np.ndarray:
    """Label of the nearest class mean (Euclidean); exact ties go to the lower class id."""
    test = np.asarray(test_features, dtype=np.float64)
    if test.ndim == 1:
        test = test[np.newaxis, :]
    if test.ndim != 2 or test.shape[1] != train.n_features:
        raise DimensionMismatch(f"test features of shape {test.shape} do not match d={train.n_features}")
    return _nearest_centroid(train.features, train.labels, int(train.n_classes or 0), test)


@dataclass(frozen=True)
class _FoldResult:
    fold: int
    ranking: np.ndarray
    accuracy: tuple[float, ...]


def _evaluate_fold(
    fold: int,
    split: Split,
    data: LabeledDataset,
    selector: FeatureSelector,
    k_grid: list[int],
    standardize: bool = True,
) -> _FoldResult:
    train_idx, test_idx = split
    train = data.take_rows(train_idx)
    if standardize:
        params = fit_standardization(train.features)
        train_std = train.with_features(params.apply(train.features))
        test_std = params.apply(data.features[test_idx])
    else:
        train_std = train
        test_std = data.features[test_idx]
    test_labels = data.labels[test_idx]

    ranking = np.asarray(selector.rank(train_std), dtype=np.int64)
    accuracy: list[float] = []
    for k in k_grid:
        columns = np.sort(ranking[:k])
        predicted = _nearest_centroid(
            train_std.features[:, columns],
            train_std.labels,
            int(data.n_classes or 0),
            test_std[:, columns],
        )
        accuracy.append(float(np.mean(predicted == test_labels)))
    logging.info(
        "Fold %d (%s): train=%d test=%d accuracy@k=%s",
        fold,
        selector.name,
        train_idx.size,
        test_idx.size,
        ", ".join(f"{k}:{acc:.3f}" for k, acc in zip(k_grid, accuracy)),
    )
    return _FoldResult(fold=fold, ranking=ranking, accuracy=tuple(accuracy))


def _selector_config(selector: FeatureSelector) -> dict[str, object]:
    if isinstance(selector, DfsSelector):
        return selector.config.to_dict()
    return {}


def check_class_sizes(data: LabeledDataset) -> None:
    """Every class needs two samples so that each stratified training fold keeps it."""
    counts = np.bincount(data.labels, minlength=int(data.n_classes or 0))
    small = [int(cls) for cls in np.flatnonzero(counts < 2)]
    if small:
        detail = ", ".join(f"class {cls} has {int(counts[cls])}" for cls in small)
        raise InvalidK(f"cross-validation needs at least 2 samples per class: {detail}")


def run_curve(
    data: LabeledDataset,
    method: FeatureSelector,
    k_grid: list[int] | None = None,
    folds: int = 5,
    seed: int = 0,
    *,
    jobs: int = 1,
    splits: list[Split] | None = None,
    absolute_correlation: bool = False,
    standardize: bool = True,
) -> EvalReport:
    """Cross-validated accuracy and redundancy of a selector for each subset size.

    Standardization (unless ``standardize`` is false) and selection are fit on
    the training part of each fold only.
    """
    constant = [int(j) for j in np.flatnonzero(data.features.std(axis=0) < CONSTANT_STD)]
    kept = [j for j in range(data.n_features) if j not in set(constant)]
    if constant:
        logging.warning("Dropping constant feature columns before evaluation: %s", constant)
        if not kept:
            raise InvalidSpec("every feature column is constant")
        data = data.take_columns(kept)

    grid = list(k_grid) if k_grid is not None else default_k_grid(data.n_features)
    if not grid or max(grid) > data.n_features or min(grid) < 1:
        raise InvalidSpec(f"k grid {grid} must lie within 1..{data.n_features}")

    if splits is None:
        check_class_sizes(data)
        splits = kfold_split(data.n_samples, folds, seed, labels=data.labels)
    else:
        folds = len(splits)

    def evaluate(item: tuple[int, Split]) -> _FoldResult:
        return _evaluate_fold(item[0], item[1], data, method, grid, standardize)

    items = list(enumerate(splits))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(evaluate, items))
    else:
        results = [evaluate(item) for item in items]
    results.sort(key=lambda result: result.fold)

    params = fit_standardization(data.features)
    full_std = data.with_features(params.apply(data.features))
    accuracy_folds: list[tuple[float, ...]] = []
    accuracy_mean: list[float] = []
    redundancy: list[float | None] = []
    for position, k in enumerate(grid):
        per_fold = tuple(result.accuracy[position] for result in results)
        accuracy_folds.append(per_fold)
        accuracy_mean.append(float(np.mean(per_fold)))
        if k < 2:
            redundancy.append(None)
            continue
        rates = [
            redundancy_rate(full_std, FeatureSubset.of(result.ranking[:k]), absolute=absolute_correlation)
            for result in results
        ]
        redundancy.append(float(np.mean(rates)))

    original_ids = np.asarray(kept, dtype=np.int64)
    return EvalReport(
        method_name=method.name,
        k_grid=tuple(grid),
        accuracy_mean=tuple(accuracy_mean),
        accuracy_folds=tuple(accuracy_folds),
        redundancy=tuple(redundancy),
        fold_rankings=tuple(tuple(int(i) for i in original_ids[result.ranking]) for result in results),
        folds=folds,
        seed=seed,
        n_samples=data.n_samples,
        n_features=data.n_features,
        n_classes=int(data.n_classes or 0),
        dropped_features=tuple(constant),
        config={**_selector_config(method), "absolute_correlation": absolute_correlation, "standardize": standardize},
    )


def _grid_scores(
    data: LabeledDataset,
    configs: list[DfsConfig],
    k_grid: list[int] | None,
    folds: int,
    seed: int,
    jobs: int,
    standardize: bool,
) -> tuple[list[float], list[EvalReport]]:
    check_class_sizes(data)
    splits = kfold_split(data.n_samples, folds, seed, labels=data.labels)
    reports: list[EvalReport] = []
    scores: list[float] = []
    for config in configs:
        report = run_curve(
            data, DfsSelector(config=config), k_grid, folds, seed, jobs=jobs, splits=splits, standardize=standardize
        )
        reports.append(report)
        scores.append(float(np.mean(report.accuracy_mean)))
        logging.info("gamma=%g p=%g: mean CV accuracy %.4f", config.gamma, config.p, scores[-1])
    return scores, reports


def _best_index(grid: list[float], scores: list[float]) -> int:
    # Ties go to the smaller grid value.
    return max(range(len(grid)), key=lambda i: (scores[i], -grid[i]))


def tune_gamma(
    data: LabeledDataset,
    base_config: DfsConfig,
    gamma_grid: list[float] | None = None,
    k_grid: list[int] | None = None,
    folds: int = 5,
    seed: int = 0,
    *,
    jobs: int = 1,
    standardize: bool = True,
) -> GammaSearchReport:
    """Grid search of gamma by cross-validated accuracy averaged over the k grid."""
    grid = [float(g) for g in gamma_grid] if gamma_grid is not None else list(DEFAULT_GAMMA_GRID)
    if not grid:
        raise InvalidSpec("gamma grid is empty")
    configs = [replace(base_config, gamma=gamma) for gamma in grid]
    scores, reports = _grid_scores(data, configs, k_grid, folds, seed, jobs, standardize)
    best = _best_index(grid, scores)
    return GammaSearchReport(
        gamma_grid=tuple(grid),
        mean_accuracy=tuple(scores),
        best_gamma=grid[best],
        reports=tuple(reports),
    )


def tune_p(
    data: LabeledDataset,
    base_config: DfsConfig,
    p_grid: list[float] | None = None,
    k_grid: list[int] | None = None,
    folds: int = 5,
    seed: int = 0,
    *,
    jobs: int = 1,
    standardize: bool = True,
) -> PSearchReport:
    """Accuracy of DFS across row-norm exponents at the gamma of ``base_config``.

    All exponents share one set of folds, so differences come from the selection alone.
    """
    grid = [float(p) for p in p_grid] if p_grid is not None else list(DEFAULT_P_GRID)
    if not grid:
        raise InvalidSpec("p grid is empty")
    configs = [replace(base_config, p=p) for p in grid]
    for config in configs:
        config.validate()
    scores, reports = _grid_scores(data, configs, k_grid, folds, seed, jobs, standardize)
    best = _best_index(grid, scores)
    return PSearchReport(
        p_grid=tuple(grid),
        mean_accuracy=tuple(scores),
        best_p=grid[best],
        gamma=float(base_config.gamma),
        reports=tuple(reports),
    )
