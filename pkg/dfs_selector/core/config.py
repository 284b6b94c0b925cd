from __future__ import annotations

import logging
import os
from dataclasses import asdict, dataclass, replace
from typing import Any

from .errors import InvalidConfig

DEFAULT_ZETA = 1e-10
DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 100
ALPHA_TRACE_FRACTION = 1e-6

DEFAULT_GAMMA_GRID = [1e-6, 1e-4, 0.01, 0.1, 1.0, 10.0, 100.0, 1e4, 1e6]
DEFAULT_P_GRID = [0.001, 0.01, 0.1, 1.0]

LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "warning": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def _env_str(name: str, default: str) -> str:
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.strip() or default


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        return default


def _env_log_level(name: str, default: str) -> str:
    text = _env_str(name, default).lower()
    if text not in LOG_LEVELS:
        return default
    return text


@dataclass(frozen=True)
class DfsConfig:
    gamma: float = 1.0
    p: float = 1.0
    l: int | None = None
    alpha: float | None = None
    zeta: float = DEFAULT_ZETA
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    eig_backend: str = "lapack"
    extrapolate: bool = True

    def validate(self) -> None:
        if not self.gamma > 0:
            raise InvalidConfig(f"gamma must be positive, got {self.gamma}")
        if not 0 < self.p <= 2:
            raise InvalidConfig(f"p must lie in (0, 2], got {self.p}")
        if self.l is not None and self.l < 1:
            raise InvalidConfig(f"l must be at least 1, got {self.l}")
        if self.alpha is not None and not self.alpha >= 0:
            raise InvalidConfig(f"alpha must be non-negative, got {self.alpha}")
        if not self.zeta > 0:
            raise InvalidConfig(f"zeta must be positive, got {self.zeta}")
        if not self.tol > 0:
            raise InvalidConfig(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise InvalidConfig(f"max_iter must be at least 1, got {self.max_iter}")
        if self.eig_backend not in {"lapack", "jacobi"}:
            raise InvalidConfig(f"eig_backend must be 'lapack' or 'jacobi', got {self.eig_backend!r}")

    def resolve(self, *, n_features: int, n_classes: int, trace_st: float) -> "DfsConfig":
        """Fill ``l`` and ``alpha`` defaults for a problem of the given shape."""
        self.validate()
        l = self.l if self.l is not None else n_classes - 1
        if l > n_features:
            raise InvalidConfig(f"l={l} exceeds the number of features d={n_features}")
        if l > n_classes - 1:
            logging.warning(
                "l=%d exceeds c-1=%d; between-class scatter has rank <= c-1 so the extra directions have no eigengap.",
                l,
                n_classes - 1,
            )
        alpha = self.alpha
        if alpha is None:
            alpha = ALPHA_TRACE_FRACTION * max(trace_st, 0.0) / max(n_features, 1)
        return replace(self, l=int(l), alpha=float(alpha))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class RunSettings:
    log_level: str = "info"
    log_path: str = ""
    out_dir: str = "dfs_out"
    seed: int = 0
    jobs: int = 1
    folds: int = 5

    @classmethod
    def from_env(
        cls,
        *,
        log_level_override: str | None = None,
        out_dir_override: str | None = None,
        seed_override: int | None = None,
        jobs_override: int | None = None,
        folds_override: int | None = None,
    ) -> "RunSettings":
        log_level = _env_log_level("DFS_LOG", "info")
        if log_level_override:
            log_level = log_level_override.strip().lower()

        out_dir = _env_str("DFS_OUT_DIR", "dfs_out")
        if out_dir_override:
            out_dir = out_dir_override

        seed = _env_int("DFS_SEED", 0)
        if seed_override is not None:
            seed = seed_override

        jobs = _env_int("DFS_JOBS", 1)
        if jobs_override is not None:
            jobs = jobs_override

        folds = _env_int("DFS_FOLDS", 5)
        if folds_override is not None:
            folds = folds_override

        return cls(
            log_level=log_level if log_level in LOG_LEVELS else "info",
            log_path=_env_str("DFS_LOG_PATH", ""),
            out_dir=out_dir,
            seed=int(seed),
            jobs=max(1, int(jobs)),
            folds=int(folds),
        )
