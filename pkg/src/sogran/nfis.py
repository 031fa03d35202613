"""First-order Sugeno fuzzy system with hybrid least-squares/gradient training.

Rules carry Gaussian premises (center, width per input) and linear
consequents. Rule generation is cluster-based: one rule per seeded
k-means cluster of the training conditions, which keeps the rule count
at the requested budget instead of exploding with a grid partition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .tables import InformationTable

RIDGE = 1e-8
WIDTH_FLOOR_FRACTION = 1e-3


@dataclass(frozen=True)
class FuzzyRuleBase:
    centers: np.ndarray  # (rules, inputs)
    widths: np.ndarray  # (rules, inputs), strictly positive
    coeffs: np.ndarray  # (rules, inputs+1), bias first
    input_ranges: np.ndarray  # (inputs, 2) training min/max per input
    input_names: tuple[str, ...] = ()

    def __post_init__(self):
        c = np.ascontiguousarray(np.asarray(self.centers, dtype=np.float64))
        w = np.ascontiguousarray(np.asarray(self.widths, dtype=np.float64))
        p = np.ascontiguousarray(np.asarray(self.coeffs, dtype=np.float64))
        r = np.ascontiguousarray(np.asarray(self.input_ranges, dtype=np.float64))
        if c.ndim != 2 or c.shape[0] < 1:
            raise ValueError("centers must be a (rules, inputs) matrix with >= 1 rule")
        if w.shape != c.shape:
            raise ValueError("widths must match the centers shape")
        if np.any(w <= 0):
            raise ValueError("every membership width must be positive")
        if p.shape != (c.shape[0], c.shape[1] + 1):
            raise ValueError("coeffs must be (rules, inputs+1) with the bias first")
        if r.shape != (c.shape[1], 2):
            raise ValueError("input_ranges must be (inputs, 2)")
        for arr in (c, w, p, r):
            arr.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "widths", w)
        object.__setattr__(self, "coeffs", p)
        object.__setattr__(self, "input_ranges", r)
        object.__setattr__(self, "input_names", tuple(self.input_names))

    @property
    def rule_count(self) -> int:
        return self.centers.shape[0]

    @property
    def input_count(self) -> int:
        return self.centers.shape[1]

    def to_json_obj(self) -> dict:
        return {
            "centers": self.centers.tolist(),
            "widths": self.widths.tolist(),
            "coeffs": self.coeffs.tolist(),
            "input_ranges": self.input_ranges.tolist(),
            "input_names": list(self.input_names),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "FuzzyRuleBase":
        return cls(
            centers=np.asarray(obj["centers"], dtype=np.float64),
            widths=np.asarray(obj["widths"], dtype=np.float64),
            coeffs=np.asarray(obj["coeffs"], dtype=np.float64),
            input_ranges=np.asarray(obj["input_ranges"], dtype=np.float64),
            input_names=tuple(obj.get("input_names", ())),
        )


def _width_floor(input_ranges: np.ndarray) -> np.ndarray:
    span = input_ranges[:, 1] - input_ranges[:, 0]
    floor = WIDTH_FLOOR_FRACTION * span
    return np.where(floor > 0, floor, 1.0)


def _kmeans(x_rows: np.ndarray, k: int, rng: np.random.Generator,
            max_iter: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Plain Lloyd iteration, deterministic given the generator state."""
    unique_rows = np.unique(x_rows, axis=0)
    if k > unique_rows.shape[0]:
        raise ValueError(
            f"rule_count {k} exceeds the {unique_rows.shape[0]} distinct training points"
        )
    centers = unique_rows[rng.choice(unique_rows.shape[0], size=k, replace=False)]
    labels = np.full(x_rows.shape[0], -1, dtype=np.int64)
    for _ in range(max_iter):
        d2 = ((x_rows[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(d2, axis=1)
        for c in range(k):
            members = new_labels == c
            if not members.any():
                # steal the point farthest from its center
                worst = int(np.argmax(d2[np.arange(len(new_labels)), new_labels]))
                new_labels[worst] = c
                members = new_labels == c
            centers[c] = x_rows[members].mean(axis=0)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return centers, labels


def initialize_fis(train: InformationTable, rule_count: int, seed: int) -> FuzzyRuleBase:
    """One rule per k-means cluster of the training conditions.

    Centers are the cluster means, widths the per-dimension cluster
    standard deviations floored at 1e-3 of the attribute range, and
    consequents start as the constant cluster-mean decision.
    """
    if train.n_objects == 0:
        raise ValueError("cannot initialize a rule base from an empty table")
    if rule_count < 1:
        raise ValueError("rule_count must be >= 1")
    x_rows = train.conditions
    rng = np.random.default_rng(seed)
    centers, labels = _kmeans(x_rows, rule_count, rng)
    input_ranges = np.column_stack([x_rows.min(axis=0), x_rows.max(axis=0)])
    floor = _width_floor(input_ranges)
    widths = np.empty_like(centers)
    coeffs = np.zeros((rule_count, train.n_conditions + 1))
    for c in range(rule_count):
        members = labels == c
        widths[c] = np.maximum(x_rows[members].std(axis=0), floor)
        coeffs[c, 0] = train.decisions[members].mean()
    return FuzzyRuleBase(centers, widths, coeffs, input_ranges, train.attribute_names)


def _forward(base: FuzzyRuleBase, x_rows: np.ndarray) -> np.ndarray:
    firing = kernels.fis_firing(base.centers, base.widths, x_rows)
    linear = x_rows @ base.coeffs[:, 1:].T + base.coeffs[:, 0]
    total = firing.sum(axis=1)
    live = total > 0.0
    out = (firing * linear).sum(axis=1) / np.where(live, total, 1.0)
    if not live.all():
        dead = ~live
        d2 = ((x_rows[dead, None, :] - base.centers[None, :, :]) ** 2).sum(axis=2)
        out[dead] = linear[dead, np.argmin(d2, axis=1)]
    return out


def evaluate_fis(base: FuzzyRuleBase, x) -> float:
    """Sugeno output: firing-strength-weighted average of the rule consequents.

    When every firing strength underflows to zero the nearest-center
    rule's consequent is used instead.
    """
    vec = np.asarray(x, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != base.input_count:
        raise ValueError(f"expected an input vector of dimension {base.input_count}")
    return float(_forward(base, np.ascontiguousarray(vec[None, :]))[0])


def evaluate_batch(base: FuzzyRuleBase, x_rows) -> np.ndarray:
    mat = np.ascontiguousarray(np.asarray(x_rows, dtype=np.float64))
    if mat.ndim != 2 or mat.shape[1] != base.input_count:
        raise ValueError(f"expected (n, {base.input_count}) inputs")
    return _forward(base, mat)


def training_rmse(base: FuzzyRuleBase, table: InformationTable) -> float:
    err = _forward(base, table.conditions) - table.decisions
    return float(np.sqrt(np.mean(err * err)))


def _solve_consequents(centers, widths, x_rows, targets) -> np.ndarray:
    firing = kernels.fis_firing(centers, widths, x_rows)
    total = firing.sum(axis=1)
    normalized = firing / np.where(total > 0.0, total, 1.0)[:, None]
    n, r = normalized.shape
    regressors = np.empty((n, r, x_rows.shape[1] + 1))
    regressors[:, :, 0] = normalized
    regressors[:, :, 1:] = normalized[:, :, None] * x_rows[:, None, :]
    phi = regressors.reshape(n, -1)
    gram = phi.T @ phi + RIDGE * np.eye(phi.shape[1])
    theta = np.linalg.solve(gram, phi.T @ targets)
    return theta.reshape(r, x_rows.shape[1] + 1)


def train_fis(
    base: FuzzyRuleBase, train: InformationTable, epochs: int, learning_rate: float
) -> tuple[FuzzyRuleBase, list[float]]:
    """Hybrid training: per epoch, a global ridge (1e-8) least-squares pass
    over the firing-strength-weighted regressors fixes the consequents, then
    one gradient step on the training MSE moves the Gaussian premises.

    Returns the best parameters seen (so the final training RMSE never
    exceeds the initial one) along with the per-epoch RMSE trace.
    """
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    if learning_rate <= 0:
        raise ValueError("learning_rate must be positive")
    if train.n_conditions != base.input_count:
        raise ValueError("training table does not match the rule base inputs")
    x_rows = train.conditions
    targets = train.decisions
    floor = _width_floor(base.input_ranges)

    centers = base.centers.copy()
    widths = base.widths.copy()
    coeffs = base.coeffs.copy()

    def snapshot() -> FuzzyRuleBase:
        return FuzzyRuleBase(
            centers.copy(), widths.copy(), coeffs.copy(),
            base.input_ranges, base.input_names,
        )

    def current_rmse() -> float:
        err = _forward(snapshot(), x_rows) - targets
        return float(np.sqrt(np.mean(err * err)))

    best = snapshot()
    best_rmse = current_rmse()
    trace: list[float] = []
    for _ in range(epochs):
        coeffs = _solve_consequents(centers, widths, x_rows, targets)
        rmse_ls = current_rmse()
        if rmse_ls < best_rmse:
            best_rmse, best = rmse_ls, snapshot()
        grad_c, grad_w = kernels.fis_premise_gradient(
            centers, widths, coeffs, x_rows, targets
        )
        centers -= learning_rate * grad_c
        widths = np.maximum(widths - learning_rate * grad_w, floor)
        rmse_epoch = current_rmse()
        if rmse_epoch < best_rmse:
            best_rmse, best = rmse_epoch, snapshot()
        trace.append(rmse_epoch)
    return best, trace


def premise_gradient(base: FuzzyRuleBase, x_rows, targets) -> tuple[np.ndarray, np.ndarray]:
    """Analytic d(MSE)/d(center), d(MSE)/d(width) over a batch."""
    mat = np.ascontiguousarray(np.asarray(x_rows, dtype=np.float64))
    t = np.ascontiguousarray(np.asarray(targets, dtype=np.float64))
    return kernels.fis_premise_gradient(base.centers, base.widths, base.coeffs, mat, t)


@dataclass(frozen=True)
class MembershipReport:
    """Plot-ready membership data: (center, width) pairs and sampled curves."""

    input_names: tuple[str, ...]
    parameters: tuple[tuple[tuple[float, float], ...], ...]  # [input][rule]
    grids: tuple[np.ndarray, ...]  # 101 sample points per input
    curves: tuple[np.ndarray, ...]  # (rules, 101) membership degrees per input

    def iter_rows(self):
        """Flatten to (input_name, rule_index, x, mu) rows for CSV export."""
        for i, name in enumerate(self.input_names):
            for r in range(self.curves[i].shape[0]):
                for x, mu in zip(self.grids[i], self.curves[i][r]):
                    yield name, r, float(x), float(mu)


def membership_report(base: FuzzyRuleBase, points: int = 101) -> MembershipReport:
    names = base.input_names or tuple(f"x{i+1}" for i in range(base.input_count))
    parameters = tuple(
        tuple((float(base.centers[r, i]), float(base.widths[r, i]))
              for r in range(base.rule_count))
        for i in range(base.input_count)
    )
    grids = []
    curves = []
    for i in range(base.input_count):
        lo, hi = base.input_ranges[i]
        xs = np.linspace(lo, hi, points)
        c = base.centers[:, i][:, None]
        w = base.widths[:, i][:, None]
        mus = np.exp(-((xs[None, :] - c) ** 2) / (2.0 * w * w))
        grids.append(xs)
        curves.append(mus)
    return MembershipReport(names, parameters, tuple(grids), tuple(curves))
