"""Equalized-odds baseline: prediction flipping and the rate-matching LP.

The derived classifier flips thresholded predictions at random: a score on
the positive side (>= 0.5) is replaced by its complement with probability
q_p2n, a score on the negative side with probability q_n2p. Expected rates
are affine in the four flip probabilities, so matching both generalized
rates across two groups while minimizing the summed thresholded 0/1 loss
is a small linear program. It is solved exactly by enumerating the
vertices of the feasible polytope (box facets intersected with the two
equality constraints), which is trivially auditable against a grid search.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Mapping

import numpy as np

from .dataset import GroupData
from .metrics import RatePoint

RATE_MATCH_TOL = 1e-9

_PIVOT_TOL = 1e-12

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class GroupFlip:
    """Flip probabilities for one group: negative-to-positive and back."""

    q_n2p: float
    q_p2n: float

    def __post_init__(self) -> None:
        for name, v in (("q_n2p", self.q_n2p), ("q_p2n", self.q_p2n)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")


@dataclass(frozen=True)
class FlipPlan:
    """One GroupFlip per group id."""

    by_group: Mapping[str, GroupFlip]

    def __post_init__(self) -> None:
        if not self.by_group:
            raise ValueError("flip plan needs at least one group")

    def for_group(self, group_id: str) -> GroupFlip:
        try:
            return self.by_group[group_id]
        except KeyError:
            raise KeyError(f"no flip pair for group {group_id!r}") from None


@dataclass(frozen=True)
class EOSolution:
    status: str
    plan: FlipPlan | None
    rates: Mapping[str, RatePoint] | None
    objective: float | None

    def __post_init__(self) -> None:
        if self.status == STATUS_OPTIMAL:
            points = list(self.rates.values())
            if abs(points[0].c_fp - points[1].c_fp) > RATE_MATCH_TOL:
                raise ValueError("optimal solution does not match FP rates")
            if abs(points[0].c_fn - points[1].c_fn) > RATE_MATCH_TOL:
                raise ValueError("optimal solution does not match FN rates")

    def to_json_dict(self) -> dict:
        if self.status != STATUS_OPTIMAL:
            return {"status": self.status}
        return {
            "status": self.status,
            "plan": {
                gid: {"q_n2p": f.q_n2p, "q_p2n": f.q_p2n}
                for gid, f in self.plan.by_group.items()
            },
            "rates": {
                gid: {"fp": p.c_fp, "fn": p.c_fn} for gid, p in self.rates.items()
            },
            "objective": self.objective,
        }


def flipped_scores(g: GroupData, q_n2p: float, q_p2n: float) -> np.ndarray:
    """Expected score of the flipped classifier, per sample.

    Scores at exactly 0.5 count as positive predictions; their complement
    is again 0.5, so flipping never changes them.
    """
    positive_side = g.scores >= 0.5
    q = np.where(positive_side, q_p2n, q_n2p)
    return np.clip(g.scores + q * (1.0 - 2.0 * g.scores), 0.0, 1.0)


def derived_rates(g: GroupData, q_n2p: float, q_p2n: float) -> RatePoint:
    """Expected generalized rates of the flipped classifier."""
    GroupFlip(q_n2p, q_p2n)
    t = flipped_scores(g, q_n2p, q_p2n)
    c_fp = float(t[g.labels == 0].mean())
    c_fn = float((1.0 - t[g.labels == 1]).mean())
    return RatePoint(c_fp, c_fn)


def eo_calibration_damage(g: GroupData, plan: FlipPlan) -> float:
    """Exact-unique calibration gap of the flipped-output distribution.

    Each sample splits its mass between the kept score and the reflected
    score 1 - s, so flipping a calibrated group mixes samples with
    different conditional positive rates into shared score atoms.
    """
    pair = plan.for_group(g.group_id)
    positive_side = g.scores >= 0.5
    q = np.where(positive_side, pair.q_p2n, pair.q_n2p)
    values = np.concatenate([g.scores, 1.0 - g.scores])
    weights = np.concatenate([1.0 - q, q]) / len(g)
    labels = np.concatenate([g.labels, g.labels]).astype(float)
    occupied = weights > 0.0
    uniq, inverse = np.unique(values[occupied], return_inverse=True)
    w = np.bincount(inverse, weights=weights[occupied], minlength=uniq.size)
    positive_mass = np.bincount(
        inverse, weights=weights[occupied] * labels[occupied], minlength=uniq.size
    )
    return float(np.sum(np.abs(positive_mass - uniq * w)))


def _affine_rates(g: GroupData) -> tuple[float, np.ndarray, float, np.ndarray]:
    """FP and FN of the flipped classifier as affine functions of (q_n2p, q_p2n)."""
    s = g.scores
    swing = 1.0 - 2.0 * s
    negative_side = (s < 0.5).astype(float)
    positive_side = 1.0 - negative_side
    neg = g.labels == 0
    pos = g.labels == 1
    fp0 = float(s[neg].mean())
    fp_coef = np.array(
        [float((swing * negative_side)[neg].mean()), float((swing * positive_side)[neg].mean())]
    )
    fn0 = float((1.0 - s[pos]).mean())
    fn_coef = -np.array(
        [float((swing * negative_side)[pos].mean()), float((swing * positive_side)[pos].mean())]
    )
    return fp0, fp_coef, fn0, fn_coef


def _affine_loss(g: GroupData) -> tuple[float, np.ndarray]:
    """Thresholded 0/1 loss of the flipped classifier, affine in the flip pair.

    Per sample the expected positive indicator is b + q * (f - b) where b
    thresholds the original score and f thresholds its complement.
    """
    s = g.scores
    b = (s >= 0.5).astype(float)
    f = (s <= 0.5).astype(float)
    shift = f - b
    negative_side = (s < 0.5).astype(float)
    positive_side = 1.0 - negative_side
    neg = g.labels == 0
    pos = g.labels == 1
    base = float(b[neg].mean()) + float((1.0 - b)[pos].mean())
    coef = np.array(
        [
            float((shift * negative_side)[neg].mean()) - float((shift * negative_side)[pos].mean()),
            float((shift * positive_side)[neg].mean()) - float((shift * positive_side)[pos].mean()),
        ]
    )
    return base, coef


def _independent_rows(
    A: np.ndarray, b: np.ndarray, feas_tol: float
) -> tuple[np.ndarray, np.ndarray] | None:
    """Row-reduce, dropping dependent rows; None when the system is inconsistent."""
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    for i in range(A.shape[0]):
        r = A[i].astype(float).copy()
        v = float(b[i])
        for kept, kept_rhs in zip(rows, rhs):
            j = int(np.argmax(np.abs(kept)))
            factor = r[j] / kept[j]
            r = r - factor * kept
            v = v - factor * kept_rhs
        if np.max(np.abs(r)) > _PIVOT_TOL:
            rows.append(r)
            rhs.append(v)
        elif abs(v) > feas_tol:
            return None
    return np.array(rows).reshape(len(rows), A.shape[1]), np.array(rhs)


def _enumerate_vertices(A: np.ndarray, b: np.ndarray, feas_tol: float = RATE_MATCH_TOL) -> list[np.ndarray]:
    """Vertices of {q in [0,1]^n : A q = b}.

    Every vertex has at least n - rank(A) coordinates at a box bound; the
    remaining coordinates come from solving the reduced equality system.
    """
    n = A.shape[1]
    reduced = _independent_rows(A, b, feas_tol)
    if reduced is None:
        return []
    R, d = reduced
    r = R.shape[0]
    vertices: list[np.ndarray] = []
    for fixed in combinations(range(n), n - r):
        free = [j for j in range(n) if j not in fixed]
        square = R[:, free]
        if r > 0 and abs(np.linalg.det(square)) <= _PIVOT_TOL:
            continue
        for values in product((0.0, 1.0), repeat=n - r):
            q = np.empty(n)
            q[list(fixed)] = values
            if r > 0:
                q[free] = np.linalg.solve(square, d - R[:, list(fixed)] @ np.array(values))
            if np.all(q >= -feas_tol) and np.all(q <= 1.0 + feas_tol):
                q = np.clip(q, 0.0, 1.0)
                if np.max(np.abs(A @ q - b)) <= feas_tol:
                    vertices.append(q)
    return vertices


def solve_eo(g1: GroupData, g2: GroupData) -> EOSolution:
    """Flip probabilities minimizing summed 0/1 loss under equal rates.

    Constraints equalize the generalized FP and FN rates across the two
    groups; the objective is the sum of the groups' thresholded losses.
    Ties are broken toward the lexicographically smallest flip vector so
    the result is deterministic.
    """
    if g1.group_id == g2.group_id:
        raise ValueError("the two groups must have distinct ids")
    fp0_1, fp_c1, fn0_1, fn_c1 = _affine_rates(g1)
    fp0_2, fp_c2, fn0_2, fn_c2 = _affine_rates(g2)
    A = np.array(
        [
            np.concatenate([fp_c1, -fp_c2]),
            np.concatenate([fn_c1, -fn_c2]),
        ]
    )
    b = np.array([fp0_2 - fp0_1, fn0_2 - fn0_1])
    base1, coef1 = _affine_loss(g1)
    base2, coef2 = _affine_loss(g2)
    c = np.concatenate([coef1, coef2])
    c0 = base1 + base2

    vertices = _enumerate_vertices(A, b)
    if not vertices:
        return EOSolution(STATUS_INFEASIBLE, None, None, None)
    best = min(vertices, key=lambda q: (float(c @ q), tuple(q)))
    objective = c0 + float(c @ best)
    plan = FlipPlan(
        {
            g1.group_id: GroupFlip(float(best[0]), float(best[1])),
            g2.group_id: GroupFlip(float(best[2]), float(best[3])),
        }
    )
    rates = {
        g1.group_id: derived_rates(g1, float(best[0]), float(best[1])),
        g2.group_id: derived_rates(g2, float(best[2]), float(best[3])),
    }
    return EOSolution(STATUS_OPTIMAL, plan, rates, objective)
