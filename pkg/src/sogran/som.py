"""Kohonen self-organizing maps.

Two jobs: 2-D maps compress an object table into codebook prototypes
(crisp granulation), and per-attribute 1-D maps turn real columns into
ordered symbolic levels for the rough-set stage.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .rough import DecisionSystem
from .tables import InformationTable


def factor_neurons(n_total: int) -> tuple[int, int]:
    """Factor a neuron count into the most-square grid (n1 <= n2)."""
    if n_total < 1:
        raise ValueError("neuron count must be >= 1")
    for d in range(math.isqrt(n_total), 0, -1):
        if n_total % d == 0:
            return d, n_total // d
    raise AssertionError("unreachable")  # d=1 always divides


@dataclass(frozen=True)
class SomTrainingConfig:
    """Online-training schedule: rate and radius decay as exp(-t / (epochs*n))."""

    epochs: int = 20
    initial_learning_rate: float = 0.5
    initial_radius: float | None = None  # None: half the longer grid edge
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0.0 < self.initial_learning_rate <= 1.0:
            raise ValueError("initial_learning_rate must be in (0, 1]")
        if self.initial_radius is not None and self.initial_radius <= 0:
            raise ValueError("initial_radius must be positive")


@dataclass(frozen=True)
class SomModel:
    n1: int
    n2: int
    codebook: np.ndarray
    config: SomTrainingConfig
    qe_initial: float = math.nan
    qe_final: float = math.nan

    def __post_init__(self):
        cb = np.ascontiguousarray(np.asarray(self.codebook, dtype=np.float64))
        if cb.ndim != 2 or cb.shape[0] != self.n1 * self.n2:
            raise ValueError("codebook must hold n1*n2 weight vectors")
        cb.setflags(write=False)
        object.__setattr__(self, "codebook", cb)

    @property
    def n_units(self) -> int:
        return self.n1 * self.n2

    @property
    def input_dim(self) -> int:
        return self.codebook.shape[1]

    def quantization_error(self, data) -> float:
        return kernels.quantization_error(self.codebook, _as_matrix(data, self.input_dim))

    def to_json_obj(self) -> dict:
        return {
            "n1": self.n1,
            "n2": self.n2,
            "codebook": self.codebook.tolist(),
            "config": {
                "epochs": self.config.epochs,
                "initial_learning_rate": self.config.initial_learning_rate,
                "initial_radius": self.config.initial_radius,
                "seed": self.config.seed,
            },
            "qe_initial": self.qe_initial,
            "qe_final": self.qe_final,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SomModel":
        cfg = SomTrainingConfig(**obj["config"])
        return cls(
            n1=int(obj["n1"]),
            n2=int(obj["n2"]),
            codebook=np.asarray(obj["codebook"], dtype=np.float64),
            config=cfg,
            qe_initial=float(obj.get("qe_initial", math.nan)),
            qe_final=float(obj.get("qe_final", math.nan)),
        )


def _as_matrix(data, dim: int | None = None) -> np.ndarray:
    mat = np.ascontiguousarray(np.asarray(data, dtype=np.float64))
    if mat.ndim != 2:
        raise ValueError("data must be a list of equal-length real vectors")
    if dim is not None and mat.shape[1] != dim:
        raise ValueError(f"expected vectors of dimension {dim}, got {mat.shape[1]}")
    return mat


def _grid_sqdist(n1: int, n2: int) -> np.ndarray:
    rows, cols = np.divmod(np.arange(n1 * n2), n2)
    dr = rows[:, None] - rows[None, :]
    dc = cols[:, None] - cols[None, :]
    return (dr * dr + dc * dc).astype(np.float64)


def train_som(data, grid: tuple[int, int], config: SomTrainingConfig) -> SomModel:
    """Train a map with classic online Kohonen updates.

    The codebook starts uniform-random inside the per-dimension data
    ranges (seeded), then every sample pulls its best matching unit and
    the Gaussian grid neighborhood toward itself under exponentially
    decaying learning rate and radius. The returned codebook is the
    epoch snapshot with the lowest quantization error, so the final
    error never exceeds the initialization's.
    """
    mat = _as_matrix(data)
    if mat.shape[0] == 0:
        raise ValueError("cannot train a SOM on empty data")
    n1, n2 = int(grid[0]), int(grid[1])
    if n1 < 1 or n2 < 1:
        raise ValueError("grid dimensions must be positive")
    n_units = n1 * n2
    n_samples = mat.shape[0]

    rng = np.random.default_rng(config.seed)
    lo = mat.min(axis=0)
    hi = mat.max(axis=0)
    codebook = rng.uniform(0.0, 1.0, size=(n_units, mat.shape[1])) * (hi - lo) + lo
    orders = np.stack(
        [rng.permutation(n_samples).astype(np.int64) for _ in range(config.epochs)]
    )

    grid_d2 = _grid_sqdist(n1, n2)
    sigma0 = config.initial_radius if config.initial_radius is not None else max(n1, n2) / 2.0
    time_scale = float(config.epochs * n_samples)

    qe_initial = kernels.quantization_error(codebook, mat)
    best = codebook.copy()
    best_qe = qe_initial
    for epoch in range(config.epochs):
        kernels.som_epoch(
            codebook, mat, orders[epoch], grid_d2,
            float(epoch * n_samples), time_scale,
            float(config.initial_learning_rate), float(sigma0),
        )
        qe = kernels.quantization_error(codebook, mat)
        if qe < best_qe:
            best_qe = qe
            best = codebook.copy()
    return SomModel(n1, n2, best, config, qe_initial=qe_initial, qe_final=best_qe)


def best_matching_unit(model: SomModel, x) -> int:
    """Index of the codebook vector nearest to x (ties: lowest index)."""
    vec = np.asarray(x, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != model.input_dim:
        raise ValueError(f"expected a vector of dimension {model.input_dim}")
    idx, _ = kernels.assign_bmus(model.codebook, np.ascontiguousarray(vec[None, :]))
    return int(idx[0])


def quantize_objects(model: SomModel, table: InformationTable) -> InformationTable:
    """Replace the table's objects with the codebook vectors that won them.

    The model must have been trained on the joint condition+decision
    space. Units that are never a best matching unit are dropped, so the
    result is the reduced-object set, at most one row per unit.
    """
    if model.input_dim != table.n_conditions + 1:
        raise ValueError(
            f"model dimension {model.input_dim} does not match the "
            f"condition+decision dimension {table.n_conditions + 1}"
        )
    idx, _ = kernels.assign_bmus(model.codebook, table.joint_matrix())
    alive = np.unique(idx)
    reduced = model.codebook[alive]
    return InformationTable(
        table.attribute_names, table.decision_name, reduced[:, :-1], reduced[:, -1]
    )


@dataclass(frozen=True)
class AttributeScale:
    """Sorted 1-D prototypes for one attribute; level 1 = smallest."""

    prototypes: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        p = np.asarray(self.prototypes, dtype=np.float64)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("prototypes must be a non-empty 1-D array")
        if np.any(np.diff(p) <= 0):
            raise ValueError("prototypes must be strictly ascending")
        p.setflags(write=False)
        object.__setattr__(self, "prototypes", p)

    @property
    def level_count(self) -> int:
        return self.prototypes.size

    def levels_for(self, values) -> np.ndarray:
        """Nearest-prototype level per value, ties resolved downward."""
        vals = np.asarray(values, dtype=np.float64)
        mids = (self.prototypes[:-1] + self.prototypes[1:]) / 2.0
        return np.searchsorted(mids, vals, side="left").astype(np.int64) + 1


@dataclass(frozen=True)
class DiscretizationScheme:
    attribute_names: tuple[str, ...]
    decision_name: str
    condition_scales: tuple[AttributeScale, ...]
    decision_scale: AttributeScale

    def apply_conditions(self, conditions) -> np.ndarray:
        cond = _as_matrix(conditions, len(self.attribute_names))
        out = np.empty(cond.shape, dtype=np.int64)
        for j, scale in enumerate(self.condition_scales):
            out[:, j] = scale.levels_for(cond[:, j])
        return out

    def apply_decision(self, values) -> np.ndarray:
        return self.decision_scale.levels_for(np.asarray(values, dtype=np.float64))

    def apply(self, table: InformationTable) -> DecisionSystem:
        if table.attribute_names != self.attribute_names:
            raise ValueError("table attributes do not match the scheme")
        return DecisionSystem(
            self.attribute_names,
            self.decision_name,
            self.apply_conditions(table.conditions),
            self.apply_decision(table.decisions),
        )


def _fit_scale(values: np.ndarray, levels: int, seed: int, name: str) -> AttributeScale:
    distinct = np.unique(values)
    if distinct.size < levels:
        warnings.warn(
            f"attribute {name!r} has {distinct.size} distinct values, "
            f"fewer than {levels} levels; merging",
            stacklevel=3,
        )
        return AttributeScale(distinct, degenerate=True)
    cfg = SomTrainingConfig(epochs=60, initial_learning_rate=0.5,
                            initial_radius=max(1.0, levels / 2.0), seed=seed)
    model = train_som(values[:, None], (1, levels), cfg)
    prototypes = np.sort(model.codebook[:, 0])
    unique = np.unique(prototypes)
    if unique.size < levels:
        warnings.warn(
            f"attribute {name!r}: 1-D map collapsed to {unique.size} levels",
            stacklevel=3,
        )
        return AttributeScale(unique, degenerate=True)
    return AttributeScale(prototypes)


def discretize_attributes(
    table: InformationTable, levels: int, seed: int = 0
) -> tuple[DecisionSystem, DiscretizationScheme]:
    """Discretize every attribute (conditions and decision) with 1-D maps.

    Each attribute gets its own `levels`-neuron map trained on the
    column's scalar values; sorted prototypes become the symbolic levels
    (level 1 = smallest). Attributes with fewer distinct values than
    levels degrade to merged levels with a warning. Returns the symbolic
    system plus the scheme for reuse on held-out data.
    """
    if levels < 2:
        raise ValueError("levels must be >= 2")
    if table.n_objects == 0:
        raise ValueError("cannot discretize an empty table")
    child_seeds = np.random.SeedSequence(seed).generate_state(table.n_conditions + 1)
    cond_scales = tuple(
        _fit_scale(table.conditions[:, j], levels, int(child_seeds[j]), name)
        for j, name in enumerate(table.attribute_names)
    )
    dec_scale = _fit_scale(
        table.decisions, levels, int(child_seeds[-1]), table.decision_name
    )
    scheme = DiscretizationScheme(
        table.attribute_names, table.decision_name, cond_scales, dec_scale
    )
    return scheme.apply(table), scheme
