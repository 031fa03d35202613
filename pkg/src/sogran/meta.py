"""Close-open iteration engines.

Both pipelines alternate between a closed world (model built on SOM
granules of the training data) and an open one (scoring against the
untouched test set), steering the granularity between iterations:

* SONFIS -- SOM granulation feeding a Sugeno fuzzy system, scored by
  RMSE, with random or error-driven (adaptive) neuron growth.
* SORST -- SOM granulation feeding rough-set rule induction over
  SOM-discretized attributes, scored by the classification error
  measure, with an adaptive strength factor across random selections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .metrics import PredictionRecord, error_measure, rmse
from .nfis import FuzzyRuleBase, evaluate_batch, initialize_fis, train_fis
from .rough import (
    DecisionRule,
    StrengthFactor,
    classify,
    extract_exact_rules,
    update_strength_factor,
)
from .som import (
    DiscretizationScheme,
    SomTrainingConfig,
    discretize_attributes,
    factor_neurons,
    quantize_objects,
    train_som,
)
from .tables import InformationTable

_SEED_CAP = 2**31


@dataclass(frozen=True)
class GrowthLawParams:
    """Linear neuron-growth law: next N = alpha*N + beta*error + gamma.

    The coefficients are data-set dependent; these defaults suit the
    bundled synthetic data and must be surfaced in any run config.
    """

    alpha: float = 1.0
    beta: float = 10.0
    gamma: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class MetaConfig:
    mode: str = "random"  # "random" | "adaptive"
    close_open_iterations: int = 10
    max_rules: int = 4
    neuron_range: tuple[int, int] = (4, 64)
    error_level: float = 0.0  # early stop when > 0 and error <= level
    discretization_levels: int = 3
    seed: int = 0
    selections: int = 7
    fallback_level: int = 4
    som_epochs: int = 20
    som_learning_rate: float = 0.5
    som_initial_radius: float | None = 2.0  # None: half the longer grid edge
    nfis_epochs: int = 30
    nfis_learning_rate: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "mode", str(self.mode).lower())
        object.__setattr__(
            self, "neuron_range", (int(self.neuron_range[0]), int(self.neuron_range[1]))
        )
        if self.mode not in ("random", "adaptive"):
            raise ValueError("mode must be 'random' or 'adaptive'")
        if self.close_open_iterations < 1:
            raise ValueError("close_open_iterations must be >= 1")
        if self.max_rules < 1:
            raise ValueError("max_rules must be >= 1")
        n_min, n_max = self.neuron_range
        if n_min < 2 or n_min > n_max:
            raise ValueError("neuron_range must satisfy 2 <= N_min <= N_max")
        if self.error_level < 0:
            raise ValueError("error_level must be nonnegative")
        if self.discretization_levels < 2:
            raise ValueError("discretization_levels must be >= 2")
        if self.selections < 1:
            raise ValueError("selections must be >= 1")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    neurons: int
    reduced_objects: int
    rule_count: int
    error: float
    strength_factor: float | None = None


@dataclass(frozen=True)
class RunTrace:
    algorithm: str  # "sonfis" | "sorst"
    records: tuple[TraceRecord, ...]

    def __post_init__(self):
        if len(self.records) == 0:
            raise ValueError("a trace needs at least one record")
        object.__setattr__(self, "records", tuple(self.records))

    @property
    def best_index(self) -> int:
        errors = [r.error for r in self.records]
        return errors.index(min(errors))

    @property
    def best_iteration(self) -> int:
        return self.records[self.best_index].iteration

    @property
    def best_error(self) -> float:
        return self.records[self.best_index].error

    def to_json_obj(self) -> dict:
        error_key = "rmse" if self.algorithm == "sonfis" else "em"
        rows = []
        for r in self.records:
            row = {
                "iteration": r.iteration,
                "neurons": r.neurons,
                "reduced_objects": r.reduced_objects,
                "rule_count": r.rule_count,
                error_key: r.error,
            }
            if self.algorithm == "sorst":
                row["strength_factor"] = r.strength_factor
            rows.append(row)
        return {
            "algorithm": self.algorithm,
            "records": rows,
            "best_iteration": self.best_iteration,
            "best_error": self.best_error,
        }

    def to_csv_text(self) -> str:
        if self.algorithm == "sorst":
            lines = ["iteration,neurons,reduced_objects,rule_count,strength_factor,em"]
            for r in self.records:
                lines.append(
                    f"{r.iteration},{r.neurons},{r.reduced_objects},"
                    f"{r.rule_count},{r.strength_factor!r},{r.error!r}"
                )
        else:
            lines = ["iteration,neurons,reduced_objects,rule_count,rmse"]
            for r in self.records:
                lines.append(
                    f"{r.iteration},{r.neurons},{r.reduced_objects},"
                    f"{r.rule_count},{r.error!r}"
                )
        return "\n".join(lines) + "\n"


def next_neuron_count(
    params: GrowthLawParams, n_t: int, e_t: float, bounds: tuple[int, int]
) -> int:
    """Growth law with half-up rounding, clamped into [N_min, N_max]."""
    if n_t < 1:
        raise ValueError("neuron count must be >= 1")
    raw = params.alpha * n_t + params.beta * e_t + params.gamma
    value = math.floor(raw + 0.5)
    return int(min(bounds[1], max(bounds[0], value)))


def _som_config(config: MetaConfig, seed: int) -> SomTrainingConfig:
    return SomTrainingConfig(
        epochs=config.som_epochs,
        initial_learning_rate=config.som_learning_rate,
        initial_radius=config.som_initial_radius,
        seed=seed,
    )


@dataclass(frozen=True)
class SonfisRun:
    """run_sonfis result; iterates as (best_base, trace) for tuple unpacking."""

    best_base: FuzzyRuleBase
    trace: RunTrace
    best_records: tuple[PredictionRecord, ...]

    def __iter__(self) -> Iterator:
        return iter((self.best_base, self.trace))


@dataclass(frozen=True)
class SorstRun:
    """run_sorst result; iterates as (best_rules, trace) for tuple unpacking."""

    best_rules: tuple[DecisionRule, ...]
    trace: RunTrace
    best_records: tuple[PredictionRecord, ...]
    best_scheme: DiscretizationScheme

    def __iter__(self) -> Iterator:
        return iter((self.best_rules, self.trace))


def run_sonfis(
    train: InformationTable,
    test: InformationTable,
    config: MetaConfig,
    growth: GrowthLawParams | None = None,
) -> SonfisRun:
    """Close-open loop: SOM object granulation, fuzzy-system fit, test RMSE.

    Each iteration picks a neuron count (random draw, or the growth law
    fed by the previous error in adaptive mode, starting from N_min),
    factors it into the most-square grid, trains the SOM on the joint
    condition+decision vectors, fits a Sugeno system to the reduced
    codebook objects and scores it on the untouched test set. Returns
    the minimum-RMSE rule base with the full trace; stops early only
    when error_level is positive and reached.
    """
    growth = growth if growth is not None else GrowthLawParams()
    if test.n_objects == 0:
        raise ValueError("run_sonfis needs a non-empty test table")
    n_min, n_max = config.neuron_range
    rng = np.random.default_rng(config.seed)

    records: list[TraceRecord] = []
    best_base: FuzzyRuleBase | None = None
    best_records: tuple[PredictionRecord, ...] = ()
    best_error = math.inf
    neurons = 0
    error = math.nan
    for it in range(1, config.close_open_iterations + 1):
        draw = int(rng.integers(n_min, n_max + 1))
        som_seed = int(rng.integers(_SEED_CAP))
        fis_seed = int(rng.integers(_SEED_CAP))
        if config.mode == "random":
            neurons = draw
        elif it == 1:
            neurons = n_min  # no prior error exists yet
        else:
            neurons = next_neuron_count(growth, neurons, error, config.neuron_range)
        model = train_som(train.joint_matrix(), factor_neurons(neurons),
                          _som_config(config, som_seed))
        reduced = quantize_objects(model, train)
        distinct = np.unique(reduced.conditions, axis=0).shape[0]
        rule_count = min(config.max_rules, distinct)
        base = initialize_fis(reduced, rule_count, fis_seed)
        base, _ = train_fis(base, reduced, config.nfis_epochs, config.nfis_learning_rate)
        predictions = evaluate_batch(base, test.conditions)
        test_records = tuple(
            PredictionRecord(float(a), float(p))
            for a, p in zip(test.decisions, predictions)
        )
        error = rmse(test_records)
        records.append(TraceRecord(it, neurons, reduced.n_objects, rule_count, error))
        if error < best_error:
            best_error = error
            best_base = base
            best_records = test_records
        if config.error_level > 0 and error <= config.error_level:
            break
    return SonfisRun(best_base, RunTrace("sonfis", tuple(records)), best_records)


def run_sorst(
    train: InformationTable,
    test: InformationTable,
    config: MetaConfig,
    initial_strength: StrengthFactor | None = None,
    strength_update=update_strength_factor,
) -> SorstRun:
    """Random SOM selections feeding rough-set rules under an adaptive strength factor.

    Each selection draws a neuron count, granulates the training objects,
    discretizes the reduced table (and, with the same fitted scheme, the
    test rows) by per-attribute 1-D maps, extracts exact rules at the
    current strength threshold and scores the test classification. The
    threshold then adapts to the error trend through ``strength_update``
    (replaceable; same signature as ``update_strength_factor``). An
    empty rule set is a legal outcome and scores EM = 1.
    """
    strength = initial_strength if initial_strength is not None else StrengthFactor(0.1)
    if test.n_objects == 0:
        raise ValueError("run_sorst needs a non-empty test table")
    n_min, n_max = config.neuron_range
    rng = np.random.default_rng(config.seed)

    records: list[TraceRecord] = []
    best_rules: tuple[DecisionRule, ...] = ()
    best_records: tuple[PredictionRecord, ...] = ()
    best_scheme: DiscretizationScheme | None = None
    best_error = math.inf
    previous_em: float | None = None
    for sel in range(1, config.selections + 1):
        neurons = int(rng.integers(n_min, n_max + 1))
        som_seed = int(rng.integers(_SEED_CAP))
        disc_seed = int(rng.integers(_SEED_CAP))
        model = train_som(train.joint_matrix(), factor_neurons(neurons),
                          _som_config(config, som_seed))
        reduced = quantize_objects(model, train)
        system, scheme = discretize_attributes(
            reduced, config.discretization_levels, seed=disc_seed
        )
        rules = tuple(extract_exact_rules(system, strength))
        test_levels = scheme.apply_conditions(test.conditions)
        actual_levels = scheme.apply_decision(test.decisions)
        test_records = []
        for row, actual in zip(test_levels, actual_levels):
            obj = dict(zip(test.attribute_names, row.tolist()))
            level, recognized = classify(rules, obj, config.fallback_level)
            test_records.append(PredictionRecord(float(actual), float(level), recognized))
        em = error_measure(test_records)
        records.append(
            TraceRecord(sel, neurons, reduced.n_objects, len(rules), em, strength.threshold)
        )
        if em < best_error:
            best_error = em
            best_rules = rules
            best_records = tuple(test_records)
            best_scheme = scheme
        if previous_em is not None:
            strength = strength_update(strength, em, previous_em, strength.step)
        previous_em = em
    return SorstRun(best_rules, RunTrace("sorst", tuple(records)), best_records, best_scheme)
