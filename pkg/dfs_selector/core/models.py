from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

from .errors import DegenerateClass, InvalidDataset, InvalidSpec
from .linalg import SymMatrix


def _frozen(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class LabeledDataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] | None = None
    n_classes: int | None = None

    def __post_init__(self) -> None:
        features = np.array(self.features, dtype=np.float64)
        labels = np.array(self.labels)
        if features.ndim != 2:
            raise InvalidDataset(f"features must be a 2-D matrix, got {features.ndim}-D")
        n, d = features.shape
        if n < 2 or d < 1:
            raise InvalidDataset(f"dataset needs n >= 2 and d >= 1, got n={n}, d={d}")
        if labels.shape != (n,):
            raise InvalidDataset(f"expected {n} labels, got shape {labels.shape}")
        if labels.size and not np.all(np.equal(np.mod(labels, 1), 0)):
            raise InvalidDataset("labels must be integer class ids")
        labels = labels.astype(np.int64)
        if not np.all(np.isfinite(features)):
            raise InvalidDataset("feature values must be finite")
        if np.any(labels < 0):
            raise InvalidDataset("class ids must be non-negative")

        n_classes = int(self.n_classes) if self.n_classes is not None else int(labels.max()) + 1
        if n_classes < 2:
            raise InvalidDataset(f"at least two classes are required, got {n_classes}")
        if np.any(labels >= n_classes):
            raise InvalidDataset(f"class ids must lie in 0..{n_classes - 1}")
        counts = np.bincount(labels, minlength=n_classes)
        missing = [int(k) for k in np.flatnonzero(counts == 0)]
        if missing:
            raise DegenerateClass(f"classes without samples: {missing}")

        names = self.feature_names
        if names is not None:
            names = tuple(str(name) for name in names)
            if len(names) != d:
                raise InvalidDataset(f"expected {d} feature names, got {len(names)}")

        object.__setattr__(self, "features", _frozen(features))
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "n_classes", n_classes)

    @property
    def n_samples(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    @property
    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=int(self.n_classes or 0))

    def take_rows(self, indices: np.ndarray | list[int]) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(
            features=self.features[idx],
            labels=self.labels[idx],
            feature_names=self.feature_names,
            n_classes=self.n_classes,
        )

    def take_columns(self, indices: np.ndarray | list[int]) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.int64)
        names = None
        if self.feature_names is not None:
            names = tuple(self.feature_names[int(i)] for i in idx)
        return LabeledDataset(
            features=self.features[:, idx],
            labels=self.labels,
            feature_names=names,
            n_classes=self.n_classes,
        )

    def with_features(self, features: np.ndarray) -> "LabeledDataset":
        return LabeledDataset(
            features=features,
            labels=self.labels,
            feature_names=self.feature_names,
            n_classes=self.n_classes,
        )


@dataclass(frozen=True)
class StandardizationParams:
    mean: np.ndarray
    scale: np.ndarray
    constant_features: tuple[int, ...] = ()

    @property
    def has_warnings(self) -> bool:
        return bool(self.constant_features)

    def apply(self, features: np.ndarray) -> np.ndarray:
        values = np.asarray(features, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != self.mean.shape[0]:
            raise InvalidDataset(f"expected {self.mean.shape[0]} feature columns, got shape {values.shape}")
        return (values - self.mean) / self.scale


@dataclass(frozen=True)
class ScatterTriple:
    st: SymMatrix
    sb: SymMatrix
    sw: SymMatrix
    class_means: np.ndarray
    total_mean: np.ndarray
    class_counts: np.ndarray

    @property
    def order(self) -> int:
        return self.st.order

    @property
    def n_classes(self) -> int:
        return int(self.class_counts.shape[0])

    def identity_gap(self) -> float:
        """Max-abs entry of ``st - (sb + sw)``."""
        return float(np.max(np.abs(self.st.array - (self.sb.array + self.sw.array))))


@dataclass(frozen=True)
class WeightDiag:
    diag: np.ndarray

    def as_matrix(self) -> SymMatrix:
        return SymMatrix.diag(self.diag)


Termination = Literal["Converged", "MaxIter"]


@dataclass(frozen=True)
class DfsSolution:
    a_matrix: np.ndarray
    row_scores: np.ndarray
    ranking: np.ndarray
    objective_trace: tuple[float, ...]
    raw_objective_trace: tuple[float, ...]
    divergence_trace: tuple[float, ...]
    constraint_trace: tuple[float, ...]
    residual_trace: tuple[float, ...]
    eigenvalues: np.ndarray
    iterations: int
    terminated_by: Termination
    alpha: float
    l: int
    eigen_solves: int = 0

    def top(self, k: int) -> np.ndarray:
        return self.ranking[: max(0, int(k))]

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "l": self.l,
            "iterations": self.iterations,
            "eigen_solves": self.eigen_solves,
            "terminated_by": self.terminated_by,
            "row_scores": [float(value) for value in self.row_scores],
            "ranking": [int(value) for value in self.ranking],
            "objective_trace": list(self.objective_trace),
            "raw_objective_trace": list(self.raw_objective_trace),
            "divergence_trace": list(self.divergence_trace),
            "constraint_trace": list(self.constraint_trace),
            "residual_trace": list(self.residual_trace),
            "eigenvalues": [float(value) for value in self.eigenvalues],
        }


@dataclass(frozen=True)
class FeatureSubset:
    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        values = tuple(sorted(int(i) for i in self.indices))
        if len(set(values)) != len(values):
            raise InvalidSpec(f"feature subset has duplicate ids: {list(self.indices)}")
        if values and values[0] < 0:
            raise InvalidSpec("feature ids must be non-negative")
        object.__setattr__(self, "indices", values)

    @classmethod
    def of(cls, indices: Any) -> "FeatureSubset":
        return cls(tuple(int(i) for i in np.asarray(indices).ravel()))

    @property
    def size(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 200
    d: int = 50
    c: int = 2
    n_informative: int = 5
    n_redundant: int = 0
    noise_sigma: float = 1.0
    duplicate_rho: float = 0.95
    class_separation: float = 2.0
    seed: int = 0

    def validate(self) -> None:
        if self.c < 2:
            raise InvalidSpec(f"need at least two classes, got c={self.c}")
        if self.n < max(2, self.c):
            raise InvalidSpec(f"need n >= c samples, got n={self.n}, c={self.c}")
        if self.d < 1 or self.n_informative < 0 or self.n_redundant < 0:
            raise InvalidSpec("d must be positive and feature counts non-negative")
        if self.n_informative + self.n_redundant > self.d:
            raise InvalidSpec(
                f"n_informative + n_redundant ({self.n_informative + self.n_redundant}) exceeds d={self.d}"
            )
        if self.n_redundant > 0 and self.n_informative == 0:
            raise InvalidSpec("redundant copies need at least one informative source")
        if self.noise_sigma <= 0:
            raise InvalidSpec("noise_sigma must be positive")
        if not 0.0 < self.duplicate_rho < 1.0:
            raise InvalidSpec("duplicate_rho must lie in (0, 1)")
        if self.class_separation < 2.0:
            raise InvalidSpec("class_separation must be at least 2 (in units of noise_sigma)")


@dataclass(frozen=True)
class EvalReport:
    method_name: str
    k_grid: tuple[int, ...]
    accuracy_mean: tuple[float, ...]
    accuracy_folds: tuple[tuple[float, ...], ...]
    redundancy: tuple[float | None, ...]
    fold_rankings: tuple[tuple[int, ...], ...]
    folds: int
    seed: int
    n_samples: int
    n_features: int
    n_classes: int
    dropped_features: tuple[int, ...] = ()
    config: dict[str, Any] = field(default_factory=dict)
    redundancy_convention: str = "mean over folds of the redundancy rate of each fold's top-k on the full standardized data"

    def to_dict(self) -> dict[str, Any]:
        return {
            "method_name": self.method_name,
            "k_grid": list(self.k_grid),
            "accuracy": {
                "mean": list(self.accuracy_mean),
                "folds": [list(row) for row in self.accuracy_folds],
            },
            "redundancy": list(self.redundancy),
            "redundancy_convention": self.redundancy_convention,
            "fold_rankings": [list(row) for row in self.fold_rankings],
            "folds": self.folds,
            "seed": self.seed,
            "n_samples": self.n_samples,
            "n_features": self.n_features,
            "n_classes": self.n_classes,
            "dropped_features": list(self.dropped_features),
            "config": dict(self.config),
        }


@dataclass(frozen=True)
class GammaSearchReport:
    gamma_grid: tuple[float, ...]
    mean_accuracy: tuple[float, ...]
    best_gamma: float
    reports: tuple[EvalReport, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "gamma_grid": list(self.gamma_grid),
            "mean_accuracy": list(self.mean_accuracy),
            "best_gamma": self.best_gamma,
            "reports": [report.to_dict() for report in self.reports],
        }


@dataclass(frozen=True)
class PSearchReport:
    p_grid: tuple[float, ...]
    mean_accuracy: tuple[float, ...]
    best_p: float
    gamma: float
    reports: tuple[EvalReport, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "p_grid": list(self.p_grid),
            "mean_accuracy": list(self.mean_accuracy),
            "best_p": self.best_p,
            "gamma": self.gamma,
            "reports": [report.to_dict() for report in self.reports],
        }


@dataclass
class RunManifest:
    command: str
    tool_version: str
    seed: int
    input_path: str = ""
    input_format: str = ""
    label_column: str = ""
    label_mapping: dict[str, int] = field(default_factory=dict)
    config: dict[str, Any] = field(default_factory=dict)
    arguments: dict[str, Any] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    created_at: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "tool_version": self.tool_version,
            "seed": self.seed,
            "input": {
                "path": self.input_path,
                "format": self.input_format,
                "label_column": self.label_column,
                "label_mapping": dict(self.label_mapping),
            },
            "config": dict(self.config),
            "arguments": dict(self.arguments),
            "outputs": list(self.outputs),
            "created_at": self.created_at,
        }
