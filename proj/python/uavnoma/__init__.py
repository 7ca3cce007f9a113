"""UAV multicast trajectory and NOMA power optimization."""

from ._core import (
    InfeasibleError,
    RunOutput,
    Scenario,
    ScenarioConfig,
    ScenarioError,
    bits_to_nats,
    channel_gain,
    evaluate,
    load_scenario,
    nats_to_bits,
    objective_upper_bound,
    parse_scenario,
    run,
    save_scenario,
    sic_order,
    sweep,
    verify,
)

__all__ = [
    "InfeasibleError",
    "RunOutput",
    "Scenario",
    "ScenarioConfig",
    "ScenarioError",
    "bits_to_nats",
    "channel_gain",
    "evaluate",
    "load_scenario",
    "nats_to_bits",
    "objective_upper_bound",
    "parse_scenario",
    "run",
    "save_scenario",
    "sic_order",
    "sweep",
    "verify",
]
