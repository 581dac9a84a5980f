"""Generalized error rates, calibration gap, and calibrated-line diagnostics.

For a probabilistic classifier the generalized false-positive rate is the
mean score over true negatives, E[h(x) | y=0], and the generalized
false-negative rate is E[1 - h(x) | y=1]. For 0/1 scores these reduce to
the usual confusion-matrix rates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dataset import GroupData

BINNING_MODES = ("exact-unique", "fixed-width")

_COORD_SLACK = 1e-9


@dataclass(frozen=True)
class RatePoint:
    """A classifier's position in the generalized FP/FN plane."""

    c_fp: float
    c_fn: float

    def __post_init__(self) -> None:
        for name, v in (("c_fp", self.c_fp), ("c_fn", self.c_fn)):
            if not -_COORD_SLACK <= v <= 1.0 + _COORD_SLACK:
                raise ValueError(f"{name}={v} outside [0, 1]")
        # Snap float noise from affine combinations back onto the unit square.
        object.__setattr__(self, "c_fp", min(max(float(self.c_fp), 0.0), 1.0))
        object.__setattr__(self, "c_fn", min(max(float(self.c_fn), 0.0), 1.0))


class BinStat(NamedTuple):
    mean_score: float
    positive_fraction: float
    weight: float


@dataclass(frozen=True)
class CalibrationReport:
    """Score-weighted deviation between predicted and observed positives."""

    gap: float
    bin_edges: tuple[float, ...]
    per_bin: tuple[BinStat, ...]

    def to_json_dict(self) -> dict:
        return {
            "gap": self.gap,
            "bins": [
                {
                    "score": b.mean_score,
                    "positive_fraction": b.positive_fraction,
                    "weight": b.weight,
                }
                for b in self.per_bin
            ],
        }


def generalized_fp(g: GroupData) -> float:
    """Mean score among true negatives."""
    negatives = g.scores[g.labels == 0]
    if negatives.size == 0:
        raise ValueError(f"group {g.group_id!r} has no negative samples")
    return float(negatives.mean())


def generalized_fn(g: GroupData) -> float:
    """Mean complement of the score among true positives."""
    positives = g.scores[g.labels == 1]
    if positives.size == 0:
        raise ValueError(f"group {g.group_id!r} has no positive samples")
    return float((1.0 - positives).mean())


def rate_point(g: GroupData) -> RatePoint:
    return RatePoint(generalized_fp(g), generalized_fn(g))


def analytic_rates(g: GroupData) -> RatePoint:
    """Rates predicted from raw moments: (E[h] - E[h^2]) / (1 - mu) and / mu.

    The prediction is exact in population for perfectly calibrated scores;
    on miscalibrated data it is just the moment formula, not a rate.
    """
    mu = g.base_rate
    m1 = float(g.scores.mean())
    m2 = float((g.scores**2).mean())
    spread = m1 - m2
    return RatePoint(spread / (1.0 - mu), spread / mu)


def linearity_residual(g: GroupData) -> float:
    """|mu * c_fn - (1 - mu) * c_fp|, at most twice the calibration gap."""
    p = rate_point(g)
    mu = g.base_rate
    return abs(mu * p.c_fn - (1.0 - mu) * p.c_fp)


def calibration_gap(g: GroupData, binning: str = "exact-unique", bins: int = 10) -> CalibrationReport:
    """Empirical calibration gap under the requested binning.

    ``exact-unique`` treats each distinct score value as its own atom, which
    makes the gap definition exact for discrete score distributions.
    ``fixed-width`` pools scores into ``bins`` equal-width bins over [0, 1]
    (last bin right-closed) and compares each bin's mean score with its
    positive fraction.
    """
    if binning not in BINNING_MODES:
        raise ValueError(f"unknown binning {binning!r}; expected one of {BINNING_MODES}")
    if binning == "exact-unique":
        values, inverse = np.unique(g.scores, return_inverse=True)
        counts = np.bincount(inverse, minlength=values.size)
        pos = np.bincount(inverse, weights=g.labels, minlength=values.size)
        weights = counts / len(g)
        fractions = pos / counts
        gap = float(np.sum(np.abs(fractions - values) * weights))
        per_bin = tuple(
            BinStat(float(v), float(f), float(w))
            for v, f, w in zip(values, fractions, weights)
        )
        return CalibrationReport(gap, tuple(float(v) for v in values), per_bin)

    if bins < 1:
        raise ValueError("fixed-width binning needs bins >= 1")
    edges = np.linspace(0.0, 1.0, bins + 1)
    idx = np.minimum((g.scores * bins).astype(int), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    pos = np.bincount(idx, weights=g.labels, minlength=bins)
    score_sums = np.bincount(idx, weights=g.scores, minlength=bins)
    occupied = counts > 0
    weights = counts[occupied] / len(g)
    fractions = pos[occupied] / counts[occupied]
    means = score_sums[occupied] / counts[occupied]
    gap = float(np.sum(np.abs(fractions - means) * weights))
    per_bin = tuple(
        BinStat(float(m), float(f), float(w))
        for m, f, w in zip(means, fractions, weights)
    )
    return CalibrationReport(gap, tuple(float(e) for e in edges), per_bin)
