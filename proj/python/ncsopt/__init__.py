"""Optimal gain schedules for control loops with Markov-distributed sensor and actuator delays."""

from ._core import (
    NcsError,
    DelayChain,
    Problem,
    Schedule,
    enumerate_expected_cost,
    joint_open_loop_min,
    load_config,
    parse_config,
    run_episode,
    run_monte_carlo,
    schedule_from_string,
    synthesize,
    verify,
)

__all__ = [
    "DelayChain",
    "NcsError",
    "Problem",
    "Schedule",
    "enumerate_expected_cost",
    "joint_open_loop_min",
    "load_config",
    "parse_config",
    "run_episode",
    "run_monte_carlo",
    "schedule_from_string",
    "synthesize",
    "verify",
]
