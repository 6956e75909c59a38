"""Quantum gates from diabatic passages through a two-state avoided crossing."""

from .errors import (
    AccuracyError,
    DegenerateTrajectoryError,
    DiabaticError,
    DomainError,
    IntegrationError,
    NumericalError,
    ScalingFitError,
    UnknownGateError,
)
from .gatemodel import (
    GateErrorReport,
    PerturbationCoefficients,
    ScalingFit,
    ZhuNakamuraForm,
    error_scaling,
    fit_zn_form,
    gate_error,
    perturbation_coefficients,
    state_error_probability,
    zn_unitary,
)
from .model import DEFAULT_MODEL, ModelSpec, coupling_surface, coupling_w, eigensystem, energies, hamiltonian_at
from .propagator import (
    DEFAULT_SETTINGS,
    IntegratorSettings,
    PropagationResult,
    evolution_operator,
    full_evolution_operator,
    half_passage_p,
    propagate,
)
from .synthesis import (
    GATES,
    SearchSpec,
    SynthesisResult,
    compose,
    embed,
    embedded_gate,
    gate_recipe,
    synthesize,
    target_unitary,
)
from .trajectory import AdiabaticityReport, Trajectory, adiabaticity, eta, make_trajectory

__version__ = "0.1.0"
