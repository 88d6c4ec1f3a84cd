"""Exact simulation of multipartite GHZ entanglement purification with
photonic Faraday-rotation parity checks on trapped atoms."""
from . import faraday, ghz, protocol, qsim, resources
from .faraday import CavityParams, FaradayPhases, SingleCavityGate
from .ghz import GhzIndex, GhzMixture, LeakageError, phi
from .protocol import (ErrorMode, RoundConfig, StagnationError, iterate, monte_carlo_round,
                       recursion_step, simulate_round_exact, threshold_check)
from .resources import EfficiencyParams, default_physical_params, success_probability

__version__ = "0.1.0"

__all__ = [
    "faraday", "ghz", "protocol", "qsim", "resources",
    "CavityParams", "FaradayPhases", "SingleCavityGate",
    "GhzIndex", "GhzMixture", "LeakageError", "phi",
    "ErrorMode", "RoundConfig", "StagnationError", "iterate", "monte_carlo_round",
    "recursion_step", "simulate_round_exact", "threshold_check",
    "EfficiencyParams", "default_physical_params", "success_probability",
]
