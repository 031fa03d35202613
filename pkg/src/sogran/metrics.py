"""Error measures for the two pipelines.

RMSE scores numeric prediction. The classification error measure (EM)
averages squared level differences over the test objects, except that an
object no rule recognizes contributes exactly 1 -- whatever fallback
label was reported for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class PredictionRecord:
    actual: float
    predicted: float
    recognized: bool = True


def rmse(records: Sequence[PredictionRecord]) -> float:
    """Root mean square error over the records."""
    if len(records) == 0:
        raise ValueError("rmse needs at least one record")
    total = sum((r.predicted - r.actual) ** 2 for r in records)
    return math.sqrt(total / len(records))


def error_measure(records: Sequence[PredictionRecord]) -> float:
    """Mean squared level difference with a unit penalty per unrecognized object."""
    if len(records) == 0:
        raise ValueError("error_measure needs at least one record")
    total = 0.0
    for r in records:
        if r.recognized:
            total += (r.actual - r.predicted) ** 2
        else:
            total += 1.0
    return total / len(records)
