"""Exact and Monte Carlo convergence quantities of random local quantum circuits.

Submodules
----------
permgroup
    Symmetric group, permutation-state Gram matrices and dual frames.
moment_op
    Matrix-free Haar projectors, Hamiltonian and walk moment operators.
spectra
    Deflated eigensolvers: TPE values, Hamiltonian gaps, detectability norm.
haar_mc
    Haar sampling, circuit simulation, frame potentials, TQO experiment.
bounds
    Closed-form calculators for the analytic convergence bounds.
cli
    Command-line front end (``python -m rqcdesigns``).
"""

__version__ = "0.1.0"

from .exceptions import ConvergenceError, GuardError, ParameterError
from .permgroup import Permutation, FrameData, build_frame, enumerate_group
from .moment_op import MatrixFreeOperator, StateVector
from .spectra import (SpectralReport, detectability_norm, hamiltonian_gap,
                      rho_haar_min_eig, second_eigenvalue, tpe_value)
from .haar_mc import CircuitSample, EstimatorResult, frame_potential, tqo_experiment
from .bounds import BoundReport

__all__ = [
    "ConvergenceError", "GuardError", "ParameterError",
    "Permutation", "FrameData", "build_frame", "enumerate_group",
    "MatrixFreeOperator", "StateVector",
    "SpectralReport", "second_eigenvalue", "tpe_value", "hamiltonian_gap",
    "detectability_norm", "rho_haar_min_eig",
    "CircuitSample", "EstimatorResult", "frame_potential", "tqo_experiment",
    "BoundReport",
]
