"""Rough-set engine over symbolic decision systems.

Indiscernibility partitions, lower/upper approximations, exact-rule
induction with greedy shortening and strength filtering, and rule-based
classification with a fallback label for unrecognized objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class DecisionSystem:
    """Symbolic object table: integer levels (>= 1) plus one decision column."""

    condition_attributes: tuple[str, ...]
    decision_attribute: str
    conditions: np.ndarray
    decisions: np.ndarray

    def __post_init__(self):
        names = tuple(str(a) for a in self.condition_attributes)
        if len(names) == 0 or len(set(names)) != len(names):
            raise ValueError("condition attributes must be unique and non-empty")
        cond = np.ascontiguousarray(np.asarray(self.conditions, dtype=np.int64))
        dec = np.ascontiguousarray(np.asarray(self.decisions, dtype=np.int64))
        if cond.ndim != 2 or cond.shape[1] != len(names):
            raise ValueError(
                f"conditions must be 2-D with {len(names)} columns, got {cond.shape}"
            )
        if dec.ndim != 1 or dec.shape[0] != cond.shape[0]:
            raise ValueError("decisions must be 1-D with one level per object")
        if cond.size and cond.min() < 1:
            raise ValueError("condition levels must be >= 1")
        if dec.size and dec.min() < 1:
            raise ValueError("decision levels must be >= 1")
        cond.setflags(write=False)
        dec.setflags(write=False)
        object.__setattr__(self, "condition_attributes", names)
        object.__setattr__(self, "decision_attribute", str(self.decision_attribute))
        object.__setattr__(self, "conditions", cond)
        object.__setattr__(self, "decisions", dec)

    @property
    def n_objects(self) -> int:
        return self.conditions.shape[0]

    def attr_indices(self, attrs: Sequence[str]) -> list[int]:
        out = []
        for a in attrs:
            if a not in self.condition_attributes:
                raise ValueError(f"unknown condition attribute {a!r}")
            out.append(self.condition_attributes.index(a))
        return out


@dataclass(frozen=True)
class DecisionRule:
    """Exact if-then rule: every matching training object shares the decision."""

    descriptors: tuple[tuple[str, int], ...]
    decision_level: int
    support: int
    strength: float
    certainty: float

    def __post_init__(self):
        if len(self.descriptors) == 0:
            raise ValueError("a rule needs at least one descriptor")
        if not 0.0 < self.strength <= 1.0:
            raise ValueError("strength must be in (0, 1]")
        if not 0.0 < self.certainty <= 1.0:
            raise ValueError("certainty must be in (0, 1]")

    def matches(self, obj: Mapping[str, int]) -> bool:
        for attr, level in self.descriptors:
            if attr not in obj:
                raise ValueError(f"object is missing condition attribute {attr!r}")
            if obj[attr] != level:
                return False
        return True

    def to_text(self, decision_name: str = "d") -> str:
        lhs = " AND ".join(f"{a}={v}" for a, v in self.descriptors)
        return (
            f"IF {lhs} THEN {decision_name}={self.decision_level} "
            f"(support {self.support}, strength {self.strength!r}, "
            f"certainty {self.certainty!r})"
        )

    def to_json_obj(self) -> dict:
        return {
            "descriptors": [[a, int(v)] for a, v in self.descriptors],
            "decision_level": int(self.decision_level),
            "support": int(self.support),
            "strength": self.strength,
            "certainty": self.certainty,
        }


@dataclass(frozen=True)
class StrengthFactor:
    """Minimum rule strength to retain, plus the adaptive-update state."""

    threshold: float
    step: float = 0.05
    direction: int = 0

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must be in [0, 1]")
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.direction not in (-1, 0, 1):
            raise ValueError("direction must be -1, 0 or 1")


def indiscernibility_classes(
    system: DecisionSystem, attrs: Sequence[str]
) -> list[list[int]]:
    """Partition object indices by equality on the chosen attributes.

    Blocks are ordered by first occurrence, indices ascending inside
    each block.
    """
    if len(attrs) == 0:
        raise ValueError("attrs must be a non-empty attribute subset")
    cols = system.attr_indices(attrs)
    blocks: dict[tuple, list[int]] = {}
    for i, row in enumerate(system.conditions[:, cols]):
        blocks.setdefault(tuple(row.tolist()), []).append(i)
    return list(blocks.values())


def lower_approximation(
    system: DecisionSystem, concept: set[int], attrs: Sequence[str]
) -> set[int]:
    """Union of the indiscernibility blocks wholly inside the concept."""
    out: set[int] = set()
    for block in indiscernibility_classes(system, attrs):
        if concept.issuperset(block):
            out.update(block)
    return out


def upper_approximation(
    system: DecisionSystem, concept: set[int], attrs: Sequence[str]
) -> set[int]:
    """Union of the indiscernibility blocks that intersect the concept."""
    out: set[int] = set()
    for block in indiscernibility_classes(system, attrs):
        if not concept.isdisjoint(block):
            out.update(block)
    return out


def _matching_mask(conditions: np.ndarray, cols: list[int], row: np.ndarray) -> np.ndarray:
    if not cols:
        return np.ones(conditions.shape[0], dtype=bool)
    return np.all(conditions[:, cols] == row[cols], axis=1)


def extract_exact_rules(
    system: DecisionSystem, strength: StrengthFactor
) -> list[DecisionRule]:
    """Induce exact rules (certainty 1) at or above the strength threshold.

    Every full-condition indiscernibility block whose members share one
    decision level yields a candidate rule, which is then shortened
    greedily: descriptors are dropped one at a time in attribute order
    as long as certainty over the whole system stays 1 (at least one
    descriptor always remains). Support and strength are recomputed on
    the final descriptors; identical rules are deduplicated.
    """
    if system.n_objects == 0:
        raise ValueError("rule extraction needs at least one object")
    n = system.n_objects
    names = system.condition_attributes
    k = len(names)
    rules: list[DecisionRule] = []
    seen: set[tuple] = set()
    for block in indiscernibility_classes(system, names):
        block_decisions = system.decisions[block]
        if np.any(block_decisions != block_decisions[0]):
            continue  # boundary region: no exact rule covers these objects
        level = int(block_decisions[0])
        base_row = system.conditions[block[0]]
        active = list(range(k))
        for j in range(k):
            if len(active) == 1:
                break
            trial = [c for c in active if c != j]
            mask = _matching_mask(system.conditions, trial, base_row)
            if np.all(system.decisions[mask] == level):
                active = trial
        mask = _matching_mask(system.conditions, active, base_row)
        support = int(mask.sum())
        descriptors = tuple((names[c], int(base_row[c])) for c in active)
        key = (descriptors, level)
        if key in seen:
            continue
        rule = DecisionRule(descriptors, level, support, support / n, 1.0)
        if rule.strength >= strength.threshold:
            seen.add(key)
            rules.append(rule)
    return rules


def classify(
    rules: Sequence[DecisionRule], obj: Mapping[str, int], fallback: int
) -> tuple[int, bool]:
    """Apply rules to one symbolic object.

    No matching rule: (fallback, False). Conflicting matches: the
    highest-strength match wins, ties resolved toward the lower decision
    level. Otherwise the unique matched decision with recognized=True.
    """
    matched = [r for r in rules if r.matches(obj)]
    if not matched:
        return int(fallback), False
    best = min(matched, key=lambda r: (-r.strength, r.decision_level))
    return best.decision_level, True


def update_strength_factor(
    current: StrengthFactor, em_now: float, em_prev: float, step: float
) -> StrengthFactor:
    """Adapt the threshold from the error trend.

    A worsening error admits more rules (threshold down by ``step``), an
    improving error prunes (up by ``step``); equality leaves the factor
    untouched. The applied step halves on every direction reversal, so
    successive changes form a convergent sequence; thread the returned
    ``.step`` into the next call. Results are clamped to [0, 1].
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if em_now > em_prev:
        direction = -1
    elif em_now < em_prev:
        direction = 1
    else:
        return current
    reversal = current.direction != 0 and direction != current.direction
    applied = step / 2.0 if reversal else step
    threshold = min(1.0, max(0.0, current.threshold + direction * applied))
    return StrengthFactor(threshold, step=applied, direction=direction)
