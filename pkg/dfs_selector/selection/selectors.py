from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from ..core.config import DfsConfig
from ..core.models import LabeledDataset
from .scatter import fisher_ratios
from .solver import rank_scores, solve


class FeatureSelector(Protocol):
    name: str

    def rank(self, data: LabeledDataset) -> np.ndarray:
        ...


@dataclass
class DfsSelector:
    config: DfsConfig = field(default_factory=DfsConfig)
    name: str = "dfs"

    def rank(self, data: LabeledDataset) -> np.ndarray:
        return np.array(solve(data, self.config).ranking)


@dataclass
class FisherScoreSelector:
    name: str = "fisher"

    def rank(self, data: LabeledDataset) -> np.ndarray:
        return rank_scores(fisher_ratios(data))


@dataclass
class RandomSelector:
    seed: int = 0
    name: str = "random"

    def rank(self, data: LabeledDataset) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        return rng.permutation(data.n_features).astype(np.int64)


@dataclass
class AllFeaturesSelector:
    name: str = "all"

    def rank(self, data: LabeledDataset) -> np.ndarray:
        return np.arange(data.n_features, dtype=np.int64)


def build_selector(method: str, *, config: DfsConfig, seed: int) -> FeatureSelector:
    key = method.strip().lower()
    if key == "dfs":
        return DfsSelector(config=config)
    if key == "fisher":
        return FisherScoreSelector()
    if key == "random":
        return RandomSelector(seed=seed)
    if key == "all":
        return AllFeaturesSelector()
    raise ValueError(f"unknown selection method: {method!r}")
