"""Entanglement estimation with quantum reservoir networks and linear readouts."""

from __future__ import annotations

__version__ = "0.1.0"

from .cv_reservoir import CVReservoir, ReservoirConfig, build_dynamics, run_probe, sample_qn_params
from .estimator import (
    EntanglementEstimator,
    MeasurementNoise,
    NoiseModel,
    RidgeReadout,
    TrainedReadout,
    estimation_error,
    fit_error_scaling,
    ridge_fit,
    std_estimation_error,
)
from .exceptions import (
    CapacityError,
    CutoffError,
    DivergenceError,
    IntegrationError,
    ProtocolError,
    QresError,
    RankDeficiencyWarning,
    SteadyStateError,
    ValidationError,
)
from .gaussian import (
    CovarianceMatrix,
    GaussianPropagator,
    LinearDynamics,
    evolve_gaussian,
    is_physical,
    log_negativity,
    symplectic_eigenvalues,
)
from .gie import GieConfig, direct_measurement_baseline, run_gie_experiment
from .hybrid import HybridChannel, HybridConfig, HybridReservoir
from .qubit import DensityMatrix, QubitChannel, QubitReservoir, lindblad_evolve, negativity
from .states import InputEnsemble, gen_cv_input, gen_qubit_input, generate_ensemble

__all__ = [
    "CVReservoir", "ReservoirConfig", "build_dynamics", "run_probe", "sample_qn_params",
    "EntanglementEstimator", "MeasurementNoise", "NoiseModel", "RidgeReadout", "TrainedReadout",
    "estimation_error", "fit_error_scaling", "ridge_fit", "std_estimation_error",
    "CapacityError", "CutoffError", "DivergenceError", "IntegrationError", "ProtocolError",
    "QresError", "RankDeficiencyWarning", "SteadyStateError", "ValidationError",
    "CovarianceMatrix", "GaussianPropagator", "LinearDynamics", "evolve_gaussian", "is_physical",
    "log_negativity", "symplectic_eigenvalues",
    "GieConfig", "direct_measurement_baseline", "run_gie_experiment",
    "HybridChannel", "HybridConfig", "HybridReservoir",
    "DensityMatrix", "QubitChannel", "QubitReservoir", "lindblad_evolve", "negativity",
    "InputEnsemble", "gen_cv_input", "gen_qubit_input", "generate_ensemble",
]
