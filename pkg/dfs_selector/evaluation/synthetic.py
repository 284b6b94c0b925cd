from __future__ import annotations

import logging

import numpy as np

from ..core.errors import InvalidSpec
from ..core.models import FeatureSubset, LabeledDataset, SyntheticSpec

SPEC_FIELDS = {
    "n": int,
    "d": int,
    "c": int,
    "n_informative": int,
    "n_redundant": int,
    "noise_sigma": float,
    "duplicate_rho": float,
    "class_separation": float,
    "seed": int,
}


def parse_synthetic_spec(text: str, *, seed: int | None = None) -> SyntheticSpec:
    """Parse ``"n=200,d=50,c=3,n_informative=5"`` into a spec."""
    values: dict[str, int | float] = {}
    for chunk in text.split(","):
        token = chunk.strip()
        if not token:
            continue
        if "=" not in token:
            raise InvalidSpec(f"synthetic spec entry {token!r} is not key=value")
        key, raw = (part.strip() for part in token.split("=", 1))
        caster = SPEC_FIELDS.get(key)
        if caster is None:
            raise InvalidSpec(f"unknown synthetic spec field {key!r}; expected one of {sorted(SPEC_FIELDS)}")
        try:
            values[key] = caster(raw)
        except ValueError as exc:
            raise InvalidSpec(f"synthetic spec field {key!r} has invalid value {raw!r}") from exc
    if seed is not None and "seed" not in values:
        values["seed"] = seed
    spec = SyntheticSpec(**values)  # type: ignore[arg-type]
    spec.validate()
    return spec


def generate_synthetic(spec: SyntheticSpec) -> tuple[LabeledDataset, FeatureSubset]:
    """Planted dataset: informative columns first, then redundant copies, then noise.

    Informative columns shift their mean by ``class_separation * noise_sigma``
    between adjacent class levels (levels shuffled per feature). Redundant
    columns are ``rho * z(source) + sqrt(1 - rho^2) * noise`` with ``z`` the
    standardized source, so their correlation with the source is about ``rho``.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    labels = rng.permutation(np.arange(spec.n) % spec.c).astype(np.int64)
    sigma = spec.noise_sigma

    features = rng.normal(0.0, sigma, size=(spec.n, spec.d))
    levels = np.arange(spec.c, dtype=np.float64) * spec.class_separation * sigma
    for j in range(spec.n_informative):
        class_means = rng.permutation(levels)
        features[:, j] += class_means[labels]

    for r in range(spec.n_redundant):
        source = r % spec.n_informative
        column = features[:, source]
        spread = column.std()
        standardized = (column - column.mean()) / spread if spread > 0 else np.zeros_like(column)
        noise = rng.normal(0.0, 1.0, size=spec.n)
        rho = spec.duplicate_rho
        features[:, spec.n_informative + r] = rho * standardized + np.sqrt(1.0 - rho * rho) * noise

    names = tuple(
        [f"informative_{j}" for j in range(spec.n_informative)]
        + [f"redundant_{r}_of_{r % max(spec.n_informative, 1)}" for r in range(spec.n_redundant)]
        + [f"noise_{j}" for j in range(spec.d - spec.n_informative - spec.n_redundant)]
    )
    logging.debug(
        "Generated synthetic dataset n=%d d=%d c=%d informative=%d redundant=%d seed=%d",
        spec.n,
        spec.d,
        spec.c,
        spec.n_informative,
        spec.n_redundant,
        spec.seed,
    )
    dataset = LabeledDataset(features=features, labels=labels, feature_names=names, n_classes=spec.c)
    return dataset, FeatureSubset(tuple(range(spec.n_informative)))


def redundant_sources(spec: SyntheticSpec) -> dict[int, int]:
    """Map each redundant column id to the informative column it copies."""
    return {spec.n_informative + r: r % spec.n_informative for r in range(spec.n_redundant)}
