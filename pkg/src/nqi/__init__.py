"""Nondistortion quantum interrogation: feasibility, measurement design and
protocol simulation for probe/object systems."""

__version__ = "0.1.0"

from .atom import AtomParams, build_atom_spec, closed_form_witness, potting_configuration
from .criterion import (
    CompactDecomposition,
    CriterionVerdict,
    FailureReason,
    SearchConfig,
    Witness,
    check_theorem1,
    compute_Q_operators,
    kernel_intersection,
    kernel_witness,
    search_feasible_probe,
    solve_chi_for_fixed_b,
)
from .model import (
    InterrogationOperator,
    JointState,
    SystemSpec,
    apply_nondecay_projection,
    build_interrogation_operator,
    evolve_joint,
)
from .protocol import (
    MeasurementSetup,
    OutcomeReport,
    construct_measurement,
    optimize_alpha,
    simulate_single_shot,
    success_probability,
)
from .zeno import ZenoPlan, check_zeno_condition, plan_zeno, simulate_zeno

__all__ = [
    "AtomParams",
    "CompactDecomposition",
    "CriterionVerdict",
    "FailureReason",
    "InterrogationOperator",
    "JointState",
    "MeasurementSetup",
    "OutcomeReport",
    "SearchConfig",
    "SystemSpec",
    "Witness",
    "ZenoPlan",
    "apply_nondecay_projection",
    "build_atom_spec",
    "build_interrogation_operator",
    "check_theorem1",
    "check_zeno_condition",
    "closed_form_witness",
    "compute_Q_operators",
    "construct_measurement",
    "evolve_joint",
    "kernel_intersection",
    "kernel_witness",
    "optimize_alpha",
    "plan_zeno",
    "potting_configuration",
    "search_feasible_probe",
    "simulate_single_shot",
    "simulate_zeno",
    "solve_chi_for_fixed_b",
    "success_probability",
]
