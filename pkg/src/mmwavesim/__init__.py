"""mmwavesim: discrete-event simulator for beamformed mmWave cellular cells.

Library entry points live in the per-layer modules (engine, scene, channel,
phy, mac, rlc, tcp); scenario execution goes through `runner` and the
`mmwavesim` command-line tool.
"""

from .engine import PhyMacConfig, RngStreams, Simulator
from .scenario import Scenario, find_scenario, load_bundled, parse_scenario_file

__all__ = [
    "PhyMacConfig", "RngStreams", "Simulator",
    "Scenario", "find_scenario", "load_bundled", "parse_scenario_file",
]

__version__ = "0.1.0"
