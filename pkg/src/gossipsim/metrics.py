"""Agreement and dispersion measures along a trajectory.

For a state vector x the extremes H = max x and h = min x give the spread
H - h (zero exactly at agreement). The dispersion L = sum_i (x_i - ref)^2 is
taken relative to a fixed reference, by convention the average of the initial
state; coupled updates preserve that average, so for them L is the usual
variance-style quantity around the running mean.

The sandwich bounds spread^2 / 2 <= L <= n * spread^2 hold whenever the
reference lies inside [h, H]. One-sided updates can drift the average out of
that interval, at which point the upper bound no longer applies.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import BadParameterError

__all__ = ["MeasureSample", "Classification", "measure", "classify"]


@dataclass(frozen=True)
class MeasureSample:
    k: int
    x_max: float
    x_min: float
    spread: float
    dispersion: float


class Classification(Enum):
    AGREED = "Agreed"
    DIVERGED = "Diverged"
    UNDECIDED = "Undecided"


def measure(x: np.ndarray, k: int, reference: float) -> MeasureSample:
    """Measure one snapshot. `reference` is the fixed dispersion anchor."""
    x_max = float(np.max(x))
    x_min = float(np.min(x))
    dispersion = float(((x - reference) ** 2).sum())
    return MeasureSample(k=k, x_max=x_max, x_min=x_min,
                         spread=x_max - x_min, dispersion=dispersion)


def classify(samples: list[MeasureSample], eps_agree: float, big_m: float,
             nonfinite: bool = False) -> Classification:
    """Classify a finished trajectory from its checkpointed samples.

    Diverged wins: any checkpoint with spread above big_m (or an overflow
    during stepping) marks the trial Diverged even if the spread later came
    back down. Otherwise Agreed requires the final spread strictly below
    eps_agree; everything else is Undecided.
    """
    if not samples:
        raise BadParameterError("classify needs at least one sample")
    if not eps_agree > 0.0:
        raise BadParameterError(f"eps_agree must be positive, got {eps_agree}")
    if not big_m > samples[0].spread:
        raise BadParameterError(
            f"big_m ({big_m}) must exceed the initial spread ({samples[0].spread})"
        )
    if nonfinite or any(s.spread > big_m for s in samples):
        return Classification.DIVERGED
    if samples[-1].spread < eps_agree:
        return Classification.AGREED
    return Classification.UNDECIDED
