"""Hybrid multiple access simulator.

Builds a pairwise fitness tensor over OMA, NOMA and relaying topologies
for a single cell, solves the UE partitioning with a Jonker-Volgenant
assignment, and reports the sum-rate gain over all-OMA.
"""
from .assignment import BACKEND, solve_lap_jv
from .channel import ChannelState, compute_channel_state, generate_deployment
from .config import ConfigError, Duplex, ScenarioConfig, TopologyKind, load_config
from .engine import build_fitness_tensor, evaluate, solve_hma
from .experiment import RunSpec, emit_results, run_monte_carlo

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ChannelState",
    "ConfigError",
    "Duplex",
    "RunSpec",
    "ScenarioConfig",
    "TopologyKind",
    "build_fitness_tensor",
    "compute_channel_state",
    "emit_results",
    "evaluate",
    "generate_deployment",
    "load_config",
    "run_monte_carlo",
    "solve_hma",
    "solve_lap_jv",
]
