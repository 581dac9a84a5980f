"""Grouped score/label data: CSV ingestion and seeded synthetic generators.

The data model is intentionally small: a group is an ordered collection of
(score, label) samples where the score is a probabilistic classifier output
in [0, 1] and the label is the observed binary outcome. Both classes must be
present in every group so the base rate stays strictly inside (0, 1).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

CSV_HEADER = ("group", "score", "label")

FAMILIES = ("point_mass", "grid", "beta_grid")


class CsvFormatError(ValueError):
    """Input CSV does not match the ``group,score,label`` schema."""


class Sample(NamedTuple):
    score: float
    label: int


@dataclass(frozen=True, eq=False)
class GroupData:
    """Scores and binary outcomes for one population group.

    ``base_rate`` is the arithmetic mean of the labels, cached at
    construction. Arrays are copied and frozen, so instances are safe to
    share across threads.
    """

    group_id: str
    scores: np.ndarray
    labels: np.ndarray
    base_rate: float = field(init=False)

    def __post_init__(self) -> None:
        scores = np.asarray(self.scores, dtype=float).copy()
        labels = np.asarray(self.labels, dtype=np.int64).copy()
        if scores.ndim != 1 or labels.shape != scores.shape:
            raise ValueError("scores and labels must be 1-d arrays of equal length")
        if scores.size == 0:
            raise ValueError(f"group {self.group_id!r} has no samples")
        if np.any((scores < 0.0) | (scores > 1.0)):
            raise ValueError(f"group {self.group_id!r} has scores outside [0, 1]")
        if not np.all((labels == 0) | (labels == 1)):
            raise ValueError(f"group {self.group_id!r} has non-binary labels")
        mu = float(labels.sum()) / labels.size
        if not 0.0 < mu < 1.0:
            raise ValueError(
                f"group {self.group_id!r} contains a single class (base rate {mu})"
            )
        scores.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "base_rate", mu)

    def __len__(self) -> int:
        return int(self.scores.size)

    @property
    def samples(self) -> list[Sample]:
        """Samples in their original order."""
        return [Sample(float(s), int(y)) for s, y in zip(self.scores, self.labels)]


def load_csv(path: str | Path) -> list[GroupData]:
    """Read a ``group,score,label`` CSV into one GroupData per group.

    Sample order is preserved within each group. Raises CsvFormatError with
    the offending row number for schema violations, out-of-range scores,
    non-binary labels, and single-class groups.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise CsvFormatError(
                f"expected header {','.join(CSV_HEADER)!r}, got {header!r}"
            )
        by_group: dict[str, tuple[list[float], list[int]]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise CsvFormatError(f"row {lineno}: expected 3 columns, got {len(row)}")
            gid, score_text, label_text = (cell.strip() for cell in row)
            try:
                score = float(score_text)
            except ValueError:
                raise CsvFormatError(f"row {lineno}: unparseable score {score_text!r}") from None
            if not 0.0 <= score <= 1.0:
                raise CsvFormatError(f"row {lineno}: score {score_text} outside [0, 1]")
            if label_text not in ("0", "1"):
                raise CsvFormatError(f"row {lineno}: label must be 0 or 1, got {label_text!r}")
            scores, labels = by_group.setdefault(gid, ([], []))
            scores.append(score)
            labels.append(int(label_text))
        if not by_group:
            raise CsvFormatError("no data rows")
    groups = []
    for gid, (scores, labels) in by_group.items():
        if len(set(labels)) < 2:
            raise CsvFormatError(
                f"group {gid!r} contains a single class (base rate {labels[0]})"
            )
        groups.append(GroupData(gid, np.array(scores), np.array(labels)))
    return groups


def write_csv(groups: Sequence[GroupData], path: str | Path) -> None:
    """Write groups back to the CSV schema, round-tripping values exactly.

    Scores are emitted with ``repr``, which is the shortest string that
    parses back to the identical float.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for g in groups:
            for s, y in zip(g.scores, g.labels):
                writer.writerow([g.group_id, repr(float(s)), int(y)])


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one seeded synthetic group.

    Families:
      * ``point_mass``: params ``(p,)``, every score equals p.
      * ``grid``: params ``(lo, hi, k)``, scores drawn uniformly from k
        evenly spaced values in [lo, hi].
      * ``beta_grid``: params ``(a, b, bins)``, Beta(a, b) draws snapped to
        the midpoints of ``bins`` equal-width bins, keeping the support
        finite.

    ``miscalibration_shift`` offsets the label probability at each score;
    the emitted score itself is never shifted.
    """

    n: int
    family: str
    params: tuple[float, ...]
    miscalibration_shift: float = 0.0
    seed: int = 0
    group_id: str = "synth"

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        p = self.params
        if self.family == "point_mass":
            if len(p) != 1 or not 0.0 <= p[0] <= 1.0:
                raise ValueError("point_mass takes a single value in [0, 1]")
        elif self.family == "grid":
            if len(p) != 3 or not (0.0 <= p[0] <= p[1] <= 1.0) or int(p[2]) < 1:
                raise ValueError("grid takes (lo, hi, k) with 0 <= lo <= hi <= 1, k >= 1")
        else:
            if len(p) != 3 or p[0] <= 0.0 or p[1] <= 0.0 or int(p[2]) < 1:
                raise ValueError("beta_grid takes (a, b, bins) with a, b > 0, bins >= 1")


def _draw_scores(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.family == "point_mass":
        return np.full(spec.n, float(spec.params[0]))
    if spec.family == "grid":
        lo, hi, k = spec.params
        values = np.linspace(lo, hi, int(k))
        return rng.choice(values, size=spec.n)
    a, b, bins = spec.params
    bins = int(bins)
    raw = rng.beta(a, b, size=spec.n)
    idx = np.minimum((raw * bins).astype(int), bins - 1)
    return (idx + 0.5) / bins


def _generate(spec: SynthSpec) -> GroupData:
    rng = np.random.default_rng(spec.seed)
    scores = _draw_scores(spec, rng)
    probs = np.clip(scores + spec.miscalibration_shift, 0.0, 1.0)
    mean_prob = float(probs.mean())
    if mean_prob <= 0.0 or mean_prob >= 1.0:
        raise ValueError(
            "degenerate synthetic spec: labels would be single-class in expectation"
        )
    labels = (rng.random(spec.n) < probs).astype(np.int64)
    return GroupData(spec.group_id, scores, labels)


def synth_calibrated(spec: SynthSpec) -> GroupData:
    """Generate a group whose labels are Bernoulli draws at the score itself.

    The population calibration gap is zero by construction. Deterministic
    for a fixed spec (numpy PCG64 under the given seed).
    """
    if spec.miscalibration_shift != 0.0:
        raise ValueError("synth_calibrated requires miscalibration_shift == 0")
    return _generate(spec)


def synth_miscalibrated(spec: SynthSpec) -> GroupData:
    """Generate a group with labels drawn at clamp(score + shift).

    The population calibration gap equals |shift| wherever no clamping
    occurs. With shift 0 this coincides with synth_calibrated.
    """
    return _generate(spec)
