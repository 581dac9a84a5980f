"""Cost-parity post-processing that preserves per-group calibration.

The reference group G1 keeps its classifier. The lower-cost group G2 is
degraded to match: with probability alpha a prediction is withheld and the
group's base rate is returned instead. Cost interpolates linearly in alpha
between the original classifier and the constant base-rate classifier, so

    alpha = (g1_cost - g2_cost) / (trivial2_cost - g2_cost)

equalizes the two group costs. The interpolation can only shrink the
calibration gap: the mixture's gap is (1 - alpha) times the original.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cost import CostSpec, cost
from .dataset import GroupData
from .metrics import RatePoint, rate_point

REASON_OK = "ok"
REASON_COST_ORDER = "cost_order_violated"
REASON_EXCEEDS_TRIVIAL = "exceeds_trivial"

MODE_DETERMINISTIC = "deterministic_mixture"
MODE_MONTE_CARLO = "monte_carlo"


class InfeasibleError(ValueError):
    """The equal-cost target cannot be reached for this instance."""

    def __init__(self, verdict: "FeasibilityVerdict"):
        super().__init__(f"infeasible instance: {verdict.reason}")
        self.verdict = verdict


class AlreadyTrivialError(ValueError):
    """G2 already sits at its trivial cost, so alpha is undefined (0/0)."""


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    g1_cost: float
    g2_cost: float
    trivial2_cost: float
    reason: str

    def to_json_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "g1_cost": self.g1_cost,
            "g2_cost": self.g2_cost,
            "trivial2_cost": self.trivial2_cost,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class InterpolationPlan:
    """How to mix a group's classifier with its trivial classifier.

    ``deterministic_mixture`` carries the analytic distribution only, which
    is what every expectation-level guarantee is stated against.
    ``monte_carlo`` additionally fixes a seed so the per-sample withholding
    draws are reproducible.
    """

    alpha: float
    trivial_output: float
    mode: str = MODE_DETERMINISTIC
    seed: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha {self.alpha} outside [0, 1]")
        if not 0.0 < self.trivial_output < 1.0:
            raise ValueError(f"trivial output {self.trivial_output} outside (0, 1)")
        if self.mode not in (MODE_DETERMINISTIC, MODE_MONTE_CARLO):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == MODE_MONTE_CARLO and self.seed is None:
            raise ValueError("monte_carlo mode requires a seed")

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "trivial_output": self.trivial_output,
            "mode": self.mode,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class MixtureGroup:
    """A group together with its plan and, in Monte Carlo mode, the draw.

    ``withheld`` marks the samples whose prediction was replaced by the
    trivial output, as drawn, even where the original score already equals
    the trivial output.
    """

    base: GroupData
    plan: InterpolationPlan
    realized: GroupData | None = None
    withheld: np.ndarray | None = None


def feasibility(g1_cost: float, g2_cost: float, trivial2_cost: float) -> FeasibilityVerdict:
    """Check g2_cost <= g1_cost <= trivial2_cost.

    The first inequality is the group-role convention (G1 is the costlier
    group); the second is the real feasibility boundary, since no
    calibrated classifier for G2 costs more than its trivial classifier.
    """
    for name, v in (("g1_cost", g1_cost), ("g2_cost", g2_cost), ("trivial2_cost", trivial2_cost)):
        if v < 0.0:
            raise ValueError(f"{name} must be non-negative, got {v}")
    if g1_cost < g2_cost:
        reason = REASON_COST_ORDER
    elif g1_cost > trivial2_cost:
        reason = REASON_EXCEEDS_TRIVIAL
    else:
        reason = REASON_OK
    return FeasibilityVerdict(reason == REASON_OK, g1_cost, g2_cost, trivial2_cost, reason)


def compute_alpha(g1_cost: float, g2_cost: float, trivial2_cost: float) -> float:
    """Interpolation weight that lifts G2's cost up to G1's."""
    verdict = feasibility(g1_cost, g2_cost, trivial2_cost)
    if not verdict.feasible:
        raise InfeasibleError(verdict)
    denom = trivial2_cost - g2_cost
    if denom <= 0.0:
        raise AlreadyTrivialError(
            "g2 already has trivial cost; alpha is undefined (0/0)"
        )
    return min(max((g1_cost - g2_cost) / denom, 0.0), 1.0)


def realize_mixture(g: GroupData, plan: InterpolationPlan) -> MixtureGroup:
    """Draw the withholding mask and materialize the mixed scores."""
    if plan.mode != MODE_MONTE_CARLO:
        raise ValueError("realize_mixture requires a monte_carlo plan")
    rng = np.random.default_rng(plan.seed)
    # One stream in sample order keeps the mask reproducible per seed.
    withheld = rng.random(len(g)) < plan.alpha
    scores = np.where(withheld, plan.trivial_output, g.scores)
    realized = GroupData(g.group_id, scores, g.labels)
    return MixtureGroup(g, plan, realized, withheld)


def apply_monte_carlo(g: GroupData, plan: InterpolationPlan) -> GroupData:
    """Per-sample realization: keep the score w.p. 1-alpha, else emit mu2."""
    return realize_mixture(g, plan).realized


def mixture_rate_point(g: GroupData, plan: InterpolationPlan) -> RatePoint:
    """Exact expected rates of the mixture, no sampling involved."""
    base = rate_point(g)
    a = plan.alpha
    mu = plan.trivial_output
    return RatePoint(
        (1.0 - a) * base.c_fp + a * mu,
        (1.0 - a) * base.c_fn + a * (1.0 - mu),
    )


def mixture_cost(g: GroupData, plan: InterpolationPlan, spec: CostSpec) -> float:
    """Cost of the mixture; interpolates the base and trivial costs linearly."""
    return cost(mixture_rate_point(g, plan), spec)


def mixture_calibration_gap(g: GroupData, plan: InterpolationPlan) -> float:
    """Exact-unique calibration gap of the mixture distribution.

    Scores different from the trivial output keep their per-score
    conditional statistics at weight scaled by (1 - alpha). The atom at the
    trivial output pools the surviving original mass there with the
    withheld mass, whose positive fraction is the group's label mean. When
    the trivial output is the group's base rate the pooled atom contributes
    a (1 - alpha)-scaled term as well, so the whole gap contracts by
    exactly (1 - alpha).
    """
    a = plan.alpha
    m = plan.trivial_output
    values, inverse = np.unique(g.scores, return_inverse=True)
    counts = np.bincount(inverse, minlength=values.size)
    pos = np.bincount(inverse, weights=g.labels, minlength=values.size)
    weights = counts / len(g)
    fractions = pos / counts

    keep = values != m
    gap = float(np.sum(np.abs(fractions[keep] - values[keep]) * weights[keep] * (1.0 - a)))

    at_m = ~keep
    w_orig = float(weights[at_m].sum())
    f_orig = float(fractions[at_m][0]) if w_orig > 0.0 else 0.0
    pooled_weight = (1.0 - a) * w_orig + a
    if pooled_weight > 0.0:
        # |pooled fraction - m| * pooled weight, with the division cancelled.
        pooled_positive_mass = (1.0 - a) * w_orig * f_orig + a * g.base_rate
        gap += abs(pooled_positive_mass - m * pooled_weight)
    return gap


@dataclass(frozen=True)
class AuditVerdict:
    """Result of checking a claimed improvement against the cost-error bound."""

    flagged: bool
    fp_floor: float
    fn_floor: float

    def to_json_dict(self) -> dict:
        return {"flagged": self.flagged, "fp_floor": self.fp_floor, "fn_floor": self.fn_floor}


def optimality_audit(
    candidate: RatePoint, reference: RatePoint, mu: float, delta_cal: float
) -> AuditVerdict:
    """Flag rate claims the cost-error relation rules out.

    For classifiers calibrated within delta_cal whose cost is at least the
    reference cost, neither rate can undercut the reference by more than
    4*delta_cal/(1-mu) (FP) or 4*delta_cal/mu (FN). A candidate strictly
    below either floor while claiming both conditions is impossible.
    """
    if delta_cal < 0.0:
        raise ValueError("delta_cal must be non-negative")
    if not 0.0 < mu < 1.0:
        raise ValueError(f"base rate {mu} must lie strictly inside (0, 1)")
    fp_floor = reference.c_fp - 4.0 * delta_cal / (1.0 - mu)
    fn_floor = reference.c_fn - 4.0 * delta_cal / mu
    flagged = candidate.c_fp < fp_floor or candidate.c_fn < fn_floor
    return AuditVerdict(flagged, fp_floor, fn_floor)
