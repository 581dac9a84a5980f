"""Calibration-preserving cost-parity post-processing for binary classifiers."""

from .cost import CostPair, CostSpec, Segment, calibrated_line, cost, level_curve, trivial_cost, weighted_cost_spec
from .dataset import CsvFormatError, GroupData, Sample, SynthSpec, load_csv, synth_calibrated, synth_miscalibrated, write_csv
from .eo import EOSolution, FlipPlan, GroupFlip, derived_rates, eo_calibration_damage, solve_eo
from .impossibility import (
    ConstraintMatrix,
    ExactCheck,
    ImpossibilityBound,
    approximate_bound,
    build_matrix,
    exact_impossibility_check,
)
from .metrics import (
    CalibrationReport,
    RatePoint,
    analytic_rates,
    calibration_gap,
    generalized_fn,
    generalized_fp,
    linearity_residual,
    rate_point,
)
from .parity import (
    AlreadyTrivialError,
    AuditVerdict,
    FeasibilityVerdict,
    InfeasibleError,
    InterpolationPlan,
    MixtureGroup,
    apply_monte_carlo,
    compute_alpha,
    feasibility,
    mixture_calibration_gap,
    mixture_cost,
    mixture_rate_point,
    optimality_audit,
    realize_mixture,
)
from .scene import PlaneScene, ScenePoint, build_scene

__version__ = "0.1.0"

__all__ = [
    "AlreadyTrivialError",
    "AuditVerdict",
    "CalibrationReport",
    "ConstraintMatrix",
    "CostPair",
    "CostSpec",
    "CsvFormatError",
    "EOSolution",
    "ExactCheck",
    "FeasibilityVerdict",
    "FlipPlan",
    "GroupData",
    "GroupFlip",
    "ImpossibilityBound",
    "InfeasibleError",
    "InterpolationPlan",
    "MixtureGroup",
    "PlaneScene",
    "RatePoint",
    "Sample",
    "ScenePoint",
    "Segment",
    "SynthSpec",
    "analytic_rates",
    "apply_monte_carlo",
    "approximate_bound",
    "build_matrix",
    "build_scene",
    "calibrated_line",
    "calibration_gap",
    "compute_alpha",
    "cost",
    "derived_rates",
    "eo_calibration_damage",
    "exact_impossibility_check",
    "feasibility",
    "generalized_fn",
    "generalized_fp",
    "level_curve",
    "linearity_residual",
    "load_csv",
    "mixture_calibration_gap",
    "mixture_cost",
    "mixture_rate_point",
    "optimality_audit",
    "rate_point",
    "realize_mixture",
    "solve_eo",
    "synth_calibrated",
    "synth_miscalibrated",
    "trivial_cost",
    "weighted_cost_spec",
    "write_csv",
]
