"""Stochastic simulation of a regional network of EV fast-charging stations.

EV users pick a station (or give up on fast charging) with a multinomial
logit over price, detour and expected wait; stations are multi-server FCFS
queues whose prices can respond to queue length.
"""

from .config import ScenarioConfig, load_config
from .engine import Scenario, SimulationResult, run
from .metrics import RunSummary, summarize

__all__ = ["Scenario", "ScenarioConfig", "SimulationResult", "RunSummary", "load_config", "run", "summarize"]
__version__ = "0.1.0"
