"""Scenario files: flat `key = value` text with section headers, keys named
after the PHY table parameters. Arrays (buildings, waypoints) use repeated
keys. The parser rejects unknown keys by name.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from .channel import ChannelConfig, ClusterConfig, PathlossParams
from .engine import ConfigError, PhyMacConfig, phy_config_from_keys, seconds
from .rlc import (DEFAULT_AM_CAPACITY, DEFAULT_ARQ_MAX_RETX, DEFAULT_SM_BSR_BYTES,
                  DEFAULT_UM_CAPACITY, RlcMode)
from .scene import Building, MobilityTrack, Position

TRAFFIC_TYPES = ("full-buffer-dl", "full-buffer-ul", "tcp-dl", "cbr-dl", "cbr-ul", "none")


@dataclass
class UeSpec:
    position: Optional[Position] = None
    waypoints: list[tuple[int, Position]] = field(default_factory=list)
    speed_mps: float = 0.0

    def track(self) -> MobilityTrack:
        if self.waypoints:
            return MobilityTrack(self.waypoints, self.speed_mps)
        if self.position is None:
            raise ConfigError("UE has neither a position nor waypoints")
        return MobilityTrack.static(self.position)


@dataclass
class TrafficSpec:
    type: str = "full-buffer-dl"
    rate_bps: float = 1e9
    packet_bytes: int = 1400


@dataclass
class TcpSpec:
    mss: int = 1400
    ssthresh_segments: int = 6000
    buffer_bytes: int = 5 * 1024 * 1024
    init_cwnd_segments: int = 10
    rto_min_s: float = 0.2
    core_hop_delay_ms: float = 10.0   # per hop; two hops each way


@dataclass
class Scenario:
    name: str = "scenario"
    seed: int = 1
    duration_s: float = 1.0
    geometry_period_s: float = 1e-3
    sinr_sample_period_s: float = 1e-3
    traces: dict[str, bool] = field(default_factory=lambda: {
        "tb": False, "alloc": False, "rlc": True, "tcp": False,
        "sinr": True, "events": True})

    phy: PhyMacConfig = field(default_factory=PhyMacConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)

    enb_position: Position = Position(0.0, 0.0, 10.0)
    buildings: list[Building] = field(default_factory=list)
    ues: list[UeSpec] = field(default_factory=list)
    num_ues: int = 0                     # used with annulus placement
    placement: str = "explicit"          # explicit | annulus
    ue_min_distance_m: float = 20.0
    ue_max_distance_m: float = 200.0
    ue_height_m: float = 1.5

    scheduler: str = "rr"
    fixed_tti_symbols: int = 0
    max_retx: int = 3
    harq_enabled: bool = True
    qci_delay_budget_ms: float = 100.0

    dl_rlc_mode: RlcMode = RlcMode.SM
    ul_rlc_mode: RlcMode = RlcMode.SM
    am_capacity_bytes: int = DEFAULT_AM_CAPACITY
    um_capacity_bytes: int = DEFAULT_UM_CAPACITY
    arq_max_retx: int = DEFAULT_ARQ_MAX_RETX
    sm_bsr_bytes: int = DEFAULT_SM_BSR_BYTES

    traffic: TrafficSpec = field(default_factory=TrafficSpec)
    tcp: TcpSpec = field(default_factory=TcpSpec)

    enb_tx_power_dbm: float = 30.0
    ue_tx_power_dbm: float = 23.0
    enb_noise_figure_db: float = 5.0
    ue_noise_figure_db: float = 7.0
    enb_antenna: tuple[int, int] = (8, 8)
    ue_antenna: tuple[int, int] = (4, 4)

    def validate(self) -> None:
        if self.duration_s <= 0:
            raise ConfigError("Duration must be > 0")
        if self.traffic.type not in TRAFFIC_TYPES:
            raise ConfigError(f"unknown traffic type: {self.traffic.type}")
        if self.placement not in ("explicit", "annulus"):
            raise ConfigError(f"unknown UePlacement: {self.placement}")
        if self.placement == "explicit" and not self.ues:
            raise ConfigError("no UEs defined")
        if self.placement == "annulus" and self.num_ues < 1:
            raise ConfigError("annulus placement needs NumUes >= 1")
        if self.scheduler not in ("rr", "edf"):
            raise ConfigError(f"unknown scheduler: {self.scheduler}")
        if self.channel.raytrace_file:
            import os
            if not os.path.exists(self.channel.raytrace_file):
                raise ConfigError(f"ray-trace file not found: {self.channel.raytrace_file}")


def _parse_bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "on", "yes"):
        return True
    if s in ("0", "false", "off", "no"):
        return False
    raise ConfigError(f"expected boolean, got {v!r}")


def _floats(v: str, n: int, key: str) -> list[float]:
    parts = [p.strip() for p in v.split(",")]
    if len(parts) != n:
        raise ConfigError(f"{key} expects {n} comma-separated values")
    return [float(p) for p in parts]


class _Builder:
    def __init__(self, name: str) -> None:
        self.s = Scenario(name=name)
        self.phy_keys: dict[str, str] = {}
        self.chan: dict[str, object] = {}
        self.clusters: dict[str, object] = {}
        self.model = "statistical"
        self.los = [61.4, 2.0, 5.8]
        self.nlos = [72.0, 2.92, 8.7]
        self.waypoints: dict[int, list[tuple[int, Position]]] = {}
        self.speeds: dict[int, float] = {}

    def finish(self) -> Scenario:
        s = self.s
        if self.phy_keys:
            s.phy = phy_config_from_keys(self.phy_keys)
        cluster_cfg = dataclasses.replace(ClusterConfig(), **self.clusters) \
            if self.clusters else ClusterConfig()
        s.channel = dataclasses.replace(
            ChannelConfig(),
            los=PathlossParams(*self.los), nlos=PathlossParams(*self.nlos),
            clusters=cluster_cfg, **self.chan)
        for idx, wps in sorted(self.waypoints.items()):
            while len(s.ues) <= idx:
                s.ues.append(UeSpec())
            s.ues[idx].waypoints = sorted(wps)
            s.ues[idx].speed_mps = self.speeds.get(idx, 0.0)
        if self.model == "raytrace" and not s.channel.raytrace_file:
            raise ConfigError("Model = raytrace requires RayTraceFile")
        s.validate()
        return s


def _apply_key(b: _Builder, section: str, key: str, value: str) -> None:
    s = b.s
    if section == "sim":
        simple = {
            "Name": ("name", str), "Seed": ("seed", int),
            "Duration": ("duration_s", float),
            "GeometryUpdatePeriod": ("geometry_period_s", float),
            "SinrSamplePeriod": ("sinr_sample_period_s", float),
        }
        if key in simple:
            attr, conv = simple[key]
            setattr(s, attr, conv(value))
        elif key.startswith("Trace") and key[5:].lower() in s.traces:
            s.traces[key[5:].lower()] = _parse_bool(value)
        else:
            raise ConfigError(f"unknown key in [sim]: {key}")
    elif section == "phy":
        extra = {
            "EnbTxPower": ("enb_tx_power_dbm", float),
            "UeTxPower": ("ue_tx_power_dbm", float),
            "EnbNoiseFigure": ("enb_noise_figure_db", float),
            "UeNoiseFigure": ("ue_noise_figure_db", float),
        }
        if key in extra:
            attr, conv = extra[key]
            setattr(s, attr, conv(value))
        elif key in ("EnbAntenna", "UeAntenna"):
            x, y = _floats(value, 2, key)
            setattr(s, "enb_antenna" if key == "EnbAntenna" else "ue_antenna",
                    (int(x), int(y)))
        else:
            b.phy_keys[key] = value  # validated by phy_config_from_keys
    elif section == "channel":
        chan_keys = {
            "Model": None,
            "RayTraceFile": ("raytrace_file", str),
            "OutageDistance": ("outage_distance_m", float),
            "LongTermUpdatePeriod": ("long_term_update_period_s", float),
            "LongTermUpdateMode": ("long_term_update_mode", str),
            "Beamforming": ("beamforming", str),
            "PowerIterations": ("power_iterations", int),
            "CodebookSize": ("codebook_size", int),
            "PoolSize": ("pool_size", int),
            "DopplerSpeedOverride": ("doppler_speed_override_mps", float),
            "PathlossOffset": ("pathloss_offset_db", float),
            "AwgnMode": ("awgn", _parse_bool),
        }
        pl = {"LosAlpha": (b.los, 0), "LosBeta": (b.los, 1), "LosSigma": (b.los, 2),
              "NlosAlpha": (b.nlos, 0), "NlosBeta": (b.nlos, 1), "NlosSigma": (b.nlos, 2)}
        clu = {"ClusterMean": ("cluster_mean", float),
               "SubpathsPerCluster": ("subpaths_per_cluster", int),
               "AngularSpreadDeg": ("angular_spread_rad", lambda v: math.radians(float(v))),
               "DelayRmsLosNs": ("delay_rms_los_s", lambda v: float(v) * 1e-9),
               "DelayRmsNlosNs": ("delay_rms_nlos_s", lambda v: float(v) * 1e-9)}
        if key == "Model":
            if value not in ("statistical", "raytrace"):
                raise ConfigError(f"unknown channel model: {value}")
            b.model = value
        elif key in chan_keys:
            attr, conv = chan_keys[key]
            b.chan[attr] = conv(value)
        elif key in pl:
            arr, i = pl[key]
            arr[i] = float(value)
        elif key in clu:
            attr, conv = clu[key]
            b.clusters[attr] = conv(value)
        else:
            raise ConfigError(f"unknown key in [channel]: {key}")
    elif section == "scene":
        if key == "EnbPosition":
            s.enb_position = Position(*_floats(value, 3, key))
        elif key == "Building":
            v = _floats(value, 6, key)
            s.buildings.append(Building(v[0], v[1], v[2], v[3], v[4], v[5]))
        elif key == "UePosition":
            s.ues.append(UeSpec(position=Position(*_floats(value, 3, key))))
        elif key == "UeWaypoint":
            v = _floats(value, 5, key)
            idx = int(v[0])
            b.waypoints.setdefault(idx, []).append(
                (seconds(v[1]), Position(v[2], v[3], v[4])))
        elif key == "UeSpeed":
            v = _floats(value, 2, key)
            b.speeds[int(v[0])] = v[1]
        elif key == "NumUes":
            s.num_ues = int(value)
        elif key == "UePlacement":
            s.placement = value
        elif key == "UeMinDistance":
            s.ue_min_distance_m = float(value)
        elif key == "UeMaxDistance":
            s.ue_max_distance_m = float(value)
        elif key == "UeHeight":
            s.ue_height_m = float(value)
        elif key == "OutageDistance":
            b.chan["outage_distance_m"] = float(value)
        else:
            raise ConfigError(f"unknown key in [scene]: {key}")
    elif section == "mac":
        table = {"Scheduler": ("scheduler", str),
                 "FixedTti": ("fixed_tti_symbols", int),
                 "MaxRetx": ("max_retx", int),
                 "HarqEnabled": ("harq_enabled", _parse_bool),
                 "QciDelayBudgetMs": ("qci_delay_budget_ms", float)}
        if key not in table:
            raise ConfigError(f"unknown key in [mac]: {key}")
        attr, conv = table[key]
        setattr(s, attr, conv(value))
    elif section == "rlc":
        table = {"DlMode": ("dl_rlc_mode", RlcMode),
                 "UlMode": ("ul_rlc_mode", RlcMode),
                 "AmBufferBytes": ("am_capacity_bytes", int),
                 "UmBufferBytes": ("um_capacity_bytes", int),
                 "ArqMaxRetx": ("arq_max_retx", int),
                 "ArqEnabled": None,
                 "SaturationBsrBytes": ("sm_bsr_bytes", int)}
        if key not in table:
            raise ConfigError(f"unknown key in [rlc]: {key}")
        if key == "ArqEnabled":
            # disabling ARQ == zero re-deliveries
            if not _parse_bool(value):
                s.arq_max_retx = 0
            return
        attr, conv = table[key]
        try:
            setattr(s, attr, conv(value))
        except ValueError:
            raise ConfigError(f"bad value for {key}: {value}") from None
    elif section == "traffic":
        if key == "Type":
            s.traffic.type = value
        elif key == "Rate":
            s.traffic.rate_bps = float(value)
        elif key == "PacketBytes":
            s.traffic.packet_bytes = int(value)
        elif key == "CoreHopDelayMs":
            s.tcp.core_hop_delay_ms = float(value)
        elif key == "TcpMss":
            s.tcp.mss = int(value)
        elif key == "TcpSsthreshSegments":
            s.tcp.ssthresh_segments = int(value)
        elif key == "TcpBufferBytes":
            s.tcp.buffer_bytes = int(value)
        elif key == "TcpInitCwndSegments":
            s.tcp.init_cwnd_segments = int(value)
        elif key == "TcpRtoMinMs":
            s.tcp.rto_min_s = float(value) / 1e3
        else:
            raise ConfigError(f"unknown key in [traffic]: {key}")
    else:
        raise ConfigError(f"unknown section: [{section}]")


def parse_scenario_text(text: str, name: str = "scenario") -> Scenario:
    b = _Builder(name)
    section = "sim"
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        try:
            _apply_key(b, section, key, value)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    return b.finish()


def parse_scenario_file(path: str) -> Scenario:
    with open(path, "r") as f:
        text = f.read()
    import os
    return parse_scenario_text(text, name=os.path.splitext(os.path.basename(path))[0])


def load_bundled(name: str) -> Scenario:
    """Load a packaged scenario by bare name (e.g. 'mmwave-tdma')."""
    ref = resources.files("mmwavesim").joinpath("scenarios").joinpath(f"{name}.cfg")
    with ref.open("r") as f:
        return parse_scenario_text(f.read(), name=name)


def find_scenario(path_or_name: str) -> Scenario:
    import os
    if os.path.exists(path_or_name):
        return parse_scenario_file(path_or_name)
    try:
        return load_bundled(path_or_name)
    except FileNotFoundError:
        raise ConfigError(f"scenario not found: {path_or_name}") from None
