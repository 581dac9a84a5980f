"""Shared generators for randomized property tests.

``random_group`` builds discrete empirical datasets; with ``calibrated=True``
every score atom i/20 carries exactly that fraction of positives, so the
exact-unique calibration gap is identically zero. ``calibrated_distribution``
builds population-level score distributions whose mean is pinned to a target
base rate, which makes them perfectly calibrated by construction.
"""

from __future__ import annotations

import numpy as np
import pytest

from calparity.dataset import GroupData


def make_group(scores, labels, gid="g") -> GroupData:
    return GroupData(gid, np.asarray(scores, dtype=float), np.asarray(labels))


def random_group(rng: np.random.Generator, gid="g", max_atoms=8, calibrated=False) -> GroupData:
    scores: list[float] = []
    labels: list[int] = []
    if calibrated:
        k = int(rng.integers(2, max_atoms + 1))
        atoms = rng.choice(np.arange(1, 20), size=k, replace=False)
        for i in atoms:
            m = int(rng.integers(1, 4))
            count = 20 * m
            positives = int(i) * m
            scores.extend([int(i) / 20] * count)
            labels.extend([1] * positives + [0] * (count - positives))
    else:
        k = int(rng.integers(2, max_atoms + 1))
        atoms = rng.choice(np.linspace(0.02, 0.98, 49), size=k, replace=False)
        for p in atoms:
            count = int(rng.integers(3, 30))
            positives = int(round(rng.uniform() * count))
            scores.extend([float(p)] * count)
            labels.extend([1] * positives + [0] * (count - positives))
        if all(y == labels[0] for y in labels):
            labels[0] = 1 - labels[0]
    return GroupData(gid, np.array(scores), np.array(labels))


def calibrated_distribution(rng: np.random.Generator, mu: float, k=8):
    """Random discrete score distribution with mean exactly mu.

    Treated as a population: a classifier emitting score p to a p-fraction
    of positives is perfectly calibrated, and its mean score equals the
    base rate. Returns (points, weights).
    """
    points = rng.uniform(0.001, 0.999, size=k)
    raw = rng.uniform(0.1, 1.0, size=k)
    weights = raw / raw.sum()
    m = float(weights @ points)
    lam_max = 0.999 * min(1.0, mu / m, (1.0 - mu) / (1.0 - m))
    lam = rng.uniform(0.0, lam_max)
    q = (mu - lam * m) / (1.0 - lam)
    return np.append(points * 1.0, q), np.append(lam * weights, 1.0 - lam)


def distribution_rates(points: np.ndarray, weights: np.ndarray, mu: float):
    """Generalized rates of a perfectly calibrated score distribution."""
    spread = float(np.sum(weights * points * (1.0 - points)))
    return spread / (1.0 - mu), spread / mu


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
