"""Dual-cavity quantum battery simulator.

Two chains of two-level atoms, each coupled to its own cavity mode and to
each other by a collective exchange, charged by switching the interaction
on. The package builds the truncated collective basis, assembles the
sparse Hamiltonian, evolves the state with a Lanczos/Krylov propagator
(compiled kernel with a pure-numpy fallback), and extracts stored energy
and charging power, including sweeps over atom number and atom
distribution.
"""

from ._version import __version__
from .errors import (
    ConvergenceError,
    CutoffError,
    DegenerateTraceError,
    DimensionMismatchError,
    QBatteryError,
    ValidationError,
)
from .hilbert import BasisSet, BasisState, build_basis
from .model import (
    ChargingProtocol,
    ModelParams,
    build_he,
    build_hi,
    build_hq,
    build_hq_interaction,
    build_total,
    fully_inverted_state,
    initial_state,
)
from .observables import (
    ChargingSummary,
    ChargingTrace,
    capacity_bound,
    charging_power,
    energy_expectation,
    find_maxima,
    stored_energy,
)
from .propagate import (
    DensePropagator,
    PropagatorConfig,
    TimeGrid,
    evolve_trace,
    propagate_to,
)
from .experiments import (
    ConvergenceStudy,
    ScalingFit,
    SweepResult,
    SweepRow,
    charging_summary,
    convergence_study,
    fit_power_law,
    oracle_check,
    run_trace,
    split_atoms,
    sweep_exchange,
    sweep_split,
    sweep_total_atoms,
)

__all__ = [
    "__version__",
    "QBatteryError",
    "ValidationError",
    "CutoffError",
    "DimensionMismatchError",
    "ConvergenceError",
    "DegenerateTraceError",
    "BasisSet",
    "BasisState",
    "build_basis",
    "ModelParams",
    "ChargingProtocol",
    "build_hq",
    "build_hq_interaction",
    "build_he",
    "build_hi",
    "build_total",
    "initial_state",
    "fully_inverted_state",
    "TimeGrid",
    "PropagatorConfig",
    "DensePropagator",
    "propagate_to",
    "evolve_trace",
    "ChargingTrace",
    "ChargingSummary",
    "stored_energy",
    "energy_expectation",
    "charging_power",
    "find_maxima",
    "capacity_bound",
    "run_trace",
    "charging_summary",
    "SweepRow",
    "SweepResult",
    "ScalingFit",
    "ConvergenceStudy",
    "split_atoms",
    "sweep_total_atoms",
    "sweep_split",
    "sweep_exchange",
    "fit_power_law",
    "convergence_study",
    "oracle_check",
]
