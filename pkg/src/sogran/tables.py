"""Information tables: ingestion, splitting and a synthetic process dataset.

An information table is a rectangular block of real-valued objects over
named condition attributes plus one decision attribute. All values are
immutable after construction; every operation here is a pure function of
its inputs.
"""

from __future__ import annotations

import csv
import hashlib
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

DECISION_DEFAULT = "d50"

# Hydrocyclone-flavoured default schema for the synthetic generator:
# operating pressure, feed solids fraction, spigot (underflow) diameter
# and vortex finder (overflow) diameter driving a cut-size-like decision.
DEFAULT_RANGES: dict[str, tuple[float, float]] = {
    "inlet_pressure": (50.0, 200.0),
    "feed_solids": (5.0, 35.0),
    "spigot_diameter": (10.0, 40.0),
    "vortex_finder": (20.0, 80.0),
}


@dataclass(frozen=True, eq=False)
class InformationTable:
    """Objects x attributes block with one real decision column."""

    attribute_names: tuple[str, ...]
    decision_name: str
    conditions: np.ndarray
    decisions: np.ndarray

    def __post_init__(self):
        names = tuple(str(a) for a in self.attribute_names)
        if len(names) == 0:
            raise ValueError("at least one condition attribute is required")
        if any(not a for a in names):
            raise ValueError("attribute names must be non-empty")
        if len(set(names)) != len(names) or self.decision_name in names:
            raise ValueError("attribute names must be unique")
        cond = np.ascontiguousarray(np.asarray(self.conditions, dtype=np.float64))
        dec = np.ascontiguousarray(np.asarray(self.decisions, dtype=np.float64))
        if cond.ndim != 2 or cond.shape[1] != len(names):
            raise ValueError(
                f"conditions must be 2-D with {len(names)} columns, got shape {cond.shape}"
            )
        if dec.ndim != 1 or dec.shape[0] != cond.shape[0]:
            raise ValueError("decisions must be 1-D with one value per object")
        if cond.size and not np.all(np.isfinite(cond)):
            raise ValueError("conditions contain non-finite values")
        if dec.size and not np.all(np.isfinite(dec)):
            raise ValueError("decisions contain non-finite values")
        cond.setflags(write=False)
        dec.setflags(write=False)
        object.__setattr__(self, "attribute_names", names)
        object.__setattr__(self, "decision_name", str(self.decision_name))
        object.__setattr__(self, "conditions", cond)
        object.__setattr__(self, "decisions", dec)

    @property
    def n_objects(self) -> int:
        return self.conditions.shape[0]

    @property
    def n_conditions(self) -> int:
        return self.conditions.shape[1]

    def joint_matrix(self) -> np.ndarray:
        """Condition columns with the decision appended as the last column."""
        return np.column_stack([self.conditions, self.decisions])

    def take(self, indices: Sequence[int]) -> "InformationTable":
        idx = np.asarray(indices, dtype=np.int64)
        return InformationTable(
            self.attribute_names,
            self.decision_name,
            self.conditions[idx],
            self.decisions[idx],
        )

    def checksum(self) -> str:
        h = hashlib.sha256()
        h.update("\x1f".join(self.attribute_names).encode())
        h.update(self.decision_name.encode())
        h.update(self.conditions.tobytes())
        h.update(self.decisions.tobytes())
        return h.hexdigest()

    def __eq__(self, other) -> bool:
        if not isinstance(other, InformationTable):
            return NotImplemented
        return (
            self.attribute_names == other.attribute_names
            and self.decision_name == other.decision_name
            and self.conditions.shape == other.conditions.shape
            and np.array_equal(self.conditions, other.conditions)
            and np.array_equal(self.decisions, other.decisions)
        )

    def __hash__(self):
        return hash(self.checksum())


@dataclass(frozen=True)
class SplitSpec:
    train_count: int
    test_count: int
    shuffle_seed: int | None = None

    def __post_init__(self):
        if self.train_count <= 0:
            raise ValueError("train_count must be positive")
        if self.test_count < 0:
            raise ValueError("test_count must be nonnegative")


@dataclass(frozen=True)
class SyntheticConfig:
    object_count: int
    noise_sigma: float = 0.0
    seed: int = 0
    ranges: Mapping[str, tuple[float, float]] = field(
        default_factory=lambda: dict(DEFAULT_RANGES)
    )
    decision_name: str = DECISION_DEFAULT

    def __post_init__(self):
        if self.object_count < 1:
            raise ValueError("object_count must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        if len(self.ranges) != 4:
            raise ValueError(
                "the synthetic generator models exactly four condition attributes"
            )
        for name, (lo, hi) in self.ranges.items():
            if not lo < hi:
                raise ValueError(f"range for {name!r} must satisfy min < max")

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "SyntheticConfig":
        """Build from the documented JSON shape.

        {"object_count": 169, "noise_sigma": 0.0, "seed": 7,
         "ranges": {"inlet_pressure": [50, 200], ...},
         "decision_name": "d50"}

        "ranges" and "decision_name" are optional; range order is
        positional (pressure-like, solids-like, spigot-like, vortex-like).
        """
        ranges = obj.get("ranges")
        kwargs = {}
        if ranges is not None:
            kwargs["ranges"] = {k: (float(v[0]), float(v[1])) for k, v in ranges.items()}
        if "decision_name" in obj:
            kwargs["decision_name"] = str(obj["decision_name"])
        return cls(
            object_count=int(obj["object_count"]),
            noise_sigma=float(obj.get("noise_sigma", 0.0)),
            seed=int(obj["seed"]),
            **kwargs,
        )


def cut_size_law(conditions: np.ndarray) -> np.ndarray:
    """Plitt-style power law mapping the four condition columns to a cut size.

    Columns are taken positionally as (pressure, solids fraction, spigot
    diameter, vortex finder diameter):

        d50 = vortex**1.21 * spigot**-0.71 * pressure**-0.45 * exp(0.063 * solids)
    """
    x = np.asarray(conditions, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != 4:
        raise ValueError("cut_size_law expects an (n, 4) condition block")
    pressure, solids, spigot, vortex = x[:, 0], x[:, 1], x[:, 2], x[:, 3]
    return vortex ** 1.21 * spigot ** -0.71 * pressure ** -0.45 * np.exp(0.063 * solids)


def generate_synthetic(config: SyntheticConfig) -> InformationTable:
    """Draw a synthetic process table; deterministic for a given seed."""
    rng = np.random.default_rng(config.seed)
    names = tuple(config.ranges.keys())
    cols = [
        rng.uniform(lo, hi, size=config.object_count)
        for lo, hi in config.ranges.values()
    ]
    conditions = np.column_stack(cols)
    decisions = cut_size_law(conditions)
    if config.noise_sigma > 0:
        decisions = decisions + rng.normal(0.0, config.noise_sigma, size=config.object_count)
    return InformationTable(names, config.decision_name, conditions, decisions)


def ingest_csv(path, decision_column: str, on_missing: str = "reject") -> InformationTable:
    """Read a UTF-8 comma-separated file into an information table.

    The first row is the header; ``decision_column`` names the decision
    attribute, every other column is a condition. Rows with missing cells
    are rejected (default) or dropped with a warning when
    ``on_missing="drop"``. Non-numeric cells always fail, naming the
    offending row and column.
    """
    if on_missing not in ("reject", "drop"):
        raise ValueError("on_missing must be 'reject' or 'drop'")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: file is empty, expected a header row")
        if len(set(header)) != len(header):
            dupes = sorted({h for h in header if header.count(h) > 1})
            raise ValueError(f"{path}: duplicate header names {dupes}")
        if decision_column not in header:
            raise ValueError(
                f"{path}: decision column {decision_column!r} not in header {header}"
            )
        d_pos = header.index(decision_column)
        names = tuple(h for i, h in enumerate(header) if i != d_pos)
        cond_rows: list[list[float]] = []
        dec_vals: list[float] = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) > len(header):
                raise ValueError(
                    f"{path}: row {line_no} has {len(row)} cells, header has {len(header)}"
                )
            cells = [c.strip() for c in row]
            missing = [header[i] for i, c in enumerate(cells) if not c]
            if len(cells) < len(header):
                missing.extend(header[len(cells):])
            if missing:
                if on_missing == "reject":
                    raise ValueError(
                        f"{path}: row {line_no} is missing values for {missing}"
                    )
                warnings.warn(
                    f"{path}: dropping row {line_no}, missing values for {missing}",
                    stacklevel=2,
                )
                continue
            parsed = []
            for i, cell in enumerate(cells):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}: row {line_no}, column {header[i]!r}: "
                        f"non-numeric value {cell!r}"
                    ) from None
            dec_vals.append(parsed.pop(d_pos))
            cond_rows.append(parsed)
    conditions = np.array(cond_rows, dtype=np.float64).reshape(len(cond_rows), len(names))
    return InformationTable(names, decision_column, conditions, np.array(dec_vals))


def write_csv(table: InformationTable, path) -> None:
    """Write a table in the format ``ingest_csv`` reads, decision column last.

    Floats are written with ``repr`` so ingest -> write -> ingest
    round-trips to an equal table.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(table.attribute_names) + [table.decision_name])
        for k in range(table.n_objects):
            row = [repr(float(v)) for v in table.conditions[k]]
            row.append(repr(float(table.decisions[k])))
            writer.writerow(row)


def split(table: InformationTable, spec: SplitSpec) -> tuple[InformationTable, InformationTable]:
    """Partition a table into train/test blocks.

    Without a shuffle seed the split follows the original row order
    (first ``train_count`` rows train, the next ``test_count`` test);
    with a seed the row permutation is a deterministic function of it.
    """
    total = spec.train_count + spec.test_count
    if total > table.n_objects:
        raise ValueError(
            f"split needs {total} objects, table has {table.n_objects}"
        )
    if spec.shuffle_seed is None:
        order = np.arange(table.n_objects, dtype=np.int64)
    else:
        order = np.random.default_rng(spec.shuffle_seed).permutation(table.n_objects)
    train = table.take(order[: spec.train_count])
    test = table.take(order[spec.train_count : total])
    return train, test
