"""Spectral state-space diffusion in bounded spheres with semi-permeable
boundaries, a two-sphere diode-coupled network, and a Brownian-dynamics
particle cross-check."""

from .boundary import (
    FULL_SPHERE,
    BoundaryRegion,
    ConnectionMatrix,
    FeedbackMatrix,
    build_connection_matrix,
    build_feedback_matrix,
)
from .engine import (
    GammaSchedule,
    NetworkScenario,
    ObservationPoint,
    Scenario,
    SimulationResult,
    SphereModel,
    closed_loop_eigenvalues,
    discretize,
    dominant_decay_rate,
    simulate,
    simulate_network,
    total_mass,
)
from .modes import ModeIndex, ModeSet, enumerate_modes
from .particlesim import OracleConfig, OracleResult, run_oracle
from .scenario import LoadedScenario, ScenarioError, load_scenario
from .sources import ReleaseEvent, SourceSchedule

__all__ = [
    "FULL_SPHERE", "BoundaryRegion", "ConnectionMatrix", "FeedbackMatrix",
    "build_connection_matrix", "build_feedback_matrix",
    "GammaSchedule", "NetworkScenario", "ObservationPoint", "Scenario",
    "SimulationResult", "SphereModel", "closed_loop_eigenvalues",
    "discretize", "dominant_decay_rate", "simulate", "simulate_network",
    "total_mass", "ModeIndex", "ModeSet", "enumerate_modes",
    "OracleConfig", "OracleResult", "run_oracle",
    "LoadedScenario", "ScenarioError", "load_scenario",
    "ReleaseEvent", "SourceSchedule",
]

__version__ = "0.1.0"
