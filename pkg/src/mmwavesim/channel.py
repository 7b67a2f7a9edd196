"""Propagation and fading for beamformed mmWave links.

Covers distance pathloss with log-normal shadowing, cluster/subpath channel
realizations, time/frequency small-scale fading, beamforming-vector
computation (power iteration and sector sweep), periodic block-fading
updates for NLoS links, and ray-tracing trace ingestion.
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .antenna import AntennaArray, azimuth_codebook, spatial_signature
from .engine import NS_PER_S, SPEED_OF_LIGHT, RngStream, normal_gaussian
from .scene import ChannelState


def doppler_hz(speed_mps: float, carrier_hz: float) -> float:
    """Maximum Doppler shift f_d = v * f_c / c."""
    return speed_mps * carrier_hz / SPEED_OF_LIGHT


@dataclass(frozen=True)
class PathlossParams:
    alpha_db: float
    beta: float
    sigma_db: float

    def __post_init__(self) -> None:
        if self.sigma_db < 0:
            raise ValueError("sigma must be >= 0")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")


# 28 GHz measurement-derived defaults; configurable inputs, not constants.
DEFAULT_LOS_PARAMS = PathlossParams(61.4, 2.0, 5.8)
DEFAULT_NLOS_PARAMS = PathlossParams(72.0, 2.92, 8.7)


def pathloss_db(d_m: float, state: ChannelState, params: PathlossParams,
                shadowing_db: float = 0.0) -> float:
    """alpha + beta * 10 log10(d) + shadowing, in dB."""
    if state == ChannelState.OUTAGE:
        raise ValueError("no pathloss is defined in outage; link gain is zero")
    if d_m <= 0:
        raise ValueError(f"distance must be > 0, got {d_m}")
    return params.alpha_db + params.beta * 10.0 * math.log10(d_m) + shadowing_db


@dataclass(frozen=True)
class Subpath:
    cluster: int
    index: int
    power: float         # linear fraction of total received power
    delay_s: float
    aoa_azimuth: float
    aoa_elevation: float
    aod_azimuth: float
    aod_elevation: float


@dataclass
class ChannelRealization:
    subpaths: list[Subpath]
    state: ChannelState
    generated_at: int = 0

    def __post_init__(self) -> None:
        if not self.subpaths:
            raise ValueError("realization needs at least one subpath")
        total = sum(sp.power for sp in self.subpaths)
        if not math.isclose(total, 1.0, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"subpath powers must sum to 1, got {total}")
        if any(sp.delay_s < 0 for sp in self.subpaths):
            raise ValueError("negative subpath delay")

    @property
    def num_clusters(self) -> int:
        return 1 + max(sp.cluster for sp in self.subpaths)


@dataclass(frozen=True)
class ClusterConfig:
    """Statistical generator knobs for cluster/subpath realizations."""

    cluster_mean: float = 1.9            # Poisson rate; K = max(Poisson, 1)
    subpaths_per_cluster: int = 10
    cluster_power_decay: float = 1.0     # exp(-k * decay) profile
    power_jitter: float = 0.5            # uniform +/- fraction on cluster powers
    angular_spread_rad: float = math.radians(10.0)
    delay_rms_los_s: float = 200e-9
    delay_rms_nlos_s: float = 300e-9
    subpath_delay_scale: float = 0.1     # extra per-subpath delay, fraction of rms

    def expected_clusters(self) -> float:
        # E[max(Poisson(lam), 1)] = lam + P(Poisson = 0)
        return self.cluster_mean + math.exp(-self.cluster_mean)


def _laplacian(rng: np.random.Generator, scale: float) -> float:
    u = rng.uniform(-0.5, 0.5)
    return -scale * math.copysign(math.log1p(-2.0 * abs(u)), u)


def generate_realization(state: ChannelState, stream: RngStream,
                         cfg: ClusterConfig = ClusterConfig(),
                         center_elevation: float = 0.0,
                         generated_at: int = 0) -> ChannelRealization:
    """Draw a fresh cluster/subpath realization; deterministic given the
    stream state."""
    if state == ChannelState.OUTAGE:
        raise ValueError("cannot generate a realization for an outage link")
    rng = stream.gen
    k = max(int(rng.poisson(cfg.cluster_mean)), 1)
    rms = cfg.delay_rms_los_s if state == ChannelState.LOS else cfg.delay_rms_nlos_s

    cluster_powers = np.exp(-cfg.cluster_power_decay * np.arange(k))
    cluster_powers *= rng.uniform(1.0 - cfg.power_jitter, 1.0 + cfg.power_jitter, size=k)

    subpaths: list[Subpath] = []
    raw_powers: list[float] = []
    for c in range(k):
        c_delay = rng.exponential(rms)
        c_aoa_az = rng.uniform(-math.pi, math.pi)
        c_aod_az = rng.uniform(-math.pi, math.pi)
        sub_profile = np.exp(-0.5 * np.arange(cfg.subpaths_per_cluster))
        sub_profile *= rng.uniform(0.5, 1.5, size=cfg.subpaths_per_cluster)
        for l in range(cfg.subpaths_per_cluster):
            raw_powers.append(cluster_powers[c] * sub_profile[l])
            subpaths.append(Subpath(
                cluster=c, index=l,
                power=0.0,  # normalized below
                delay_s=c_delay + rng.exponential(cfg.subpath_delay_scale * rms),
                aoa_azimuth=c_aoa_az + _laplacian(rng, cfg.angular_spread_rad),
                aoa_elevation=center_elevation + _laplacian(rng, cfg.angular_spread_rad / 2),
                aod_azimuth=c_aod_az + _laplacian(rng, cfg.angular_spread_rad),
                aod_elevation=-center_elevation + _laplacian(rng, cfg.angular_spread_rad / 2),
            ))
    total = sum(raw_powers)
    subpaths = [Subpath(sp.cluster, sp.index, p / total, sp.delay_s,
                        sp.aoa_azimuth, sp.aoa_elevation,
                        sp.aod_azimuth, sp.aod_elevation)
                for sp, p in zip(subpaths, raw_powers)]
    return ChannelRealization(subpaths=subpaths, state=state, generated_at=generated_at)


def small_scale_gain(sp: Subpath, t_s: float, f_hz: float,
                     fd_hz: float, omega_rad: float) -> complex:
    """sqrt(P) * exp(2*pi*i*f_d*cos(omega)*t - 2*pi*i*tau*f)."""
    phase = 2.0 * math.pi * (fd_hz * math.cos(omega_rad) * t_s - sp.delay_s * f_hz)
    return math.sqrt(sp.power) * complex(math.cos(phase), math.sin(phase))


def channel_matrix(real: ChannelRealization, tx_arr: AntennaArray,
                   rx_arr: AntennaArray, t_s: float, f_hz: float,
                   fd_hz: float = 0.0, heading_rad: float = 0.0) -> np.ndarray:
    """Sum over subpaths of fading gain times the rx/tx signature outer
    product; shape (rx elements, tx elements).

    Signatures are unit-norm, so the matrix carries a sqrt(Nrx*Ntx) scale
    to keep per-element magnitudes physical (each element is a sum of
    sqrt(P) phasors); beamforming against H then yields the array gain.
    """
    h = np.zeros((rx_arr.num_elements, tx_arr.num_elements), dtype=complex)
    for sp in real.subpaths:
        g = small_scale_gain(sp, t_s, f_hz, fd_hz, sp.aoa_azimuth - heading_rad)
        u_rx = spatial_signature(rx_arr, sp.aoa_azimuth, sp.aoa_elevation)
        u_tx = spatial_signature(tx_arr, sp.aod_azimuth, sp.aod_elevation)
        h += g * np.outer(u_rx, np.conj(u_tx))
    return math.sqrt(rx_arr.num_elements * tx_arr.num_elements) * h


def power_iteration_beamforming(h: np.ndarray, iterations: int = 30
                                ) -> tuple[np.ndarray, np.ndarray, float]:
    """Dominant right/left singular vectors of H by power iteration on H^H H,
    deterministic all-ones start. Returns (tx, rx, gain = |rx^H H tx|^2)."""
    h = np.asarray(h, dtype=complex)
    if not np.any(h):
        raise ValueError("zero channel matrix")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    v = np.ones(h.shape[1], dtype=complex) / math.sqrt(h.shape[1])
    for _ in range(iterations):
        w = h.conj().T @ (h @ v)
        n = np.linalg.norm(w)
        if n == 0.0:
            break
        v = w / n
    hv = h @ v
    u = hv / np.linalg.norm(hv)
    gain = abs(np.vdot(u, hv)) ** 2
    return v, u, float(gain)


def sector_sweep_beamforming(real: ChannelRealization, tx_arr: AntennaArray,
                             rx_arr: AntennaArray, codebook_size: int,
                             t_s: float = 0.0, f_hz: float = 28e9
                             ) -> tuple[np.ndarray, np.ndarray, float]:
    """Exhaustive codebook-pair search over uniformly spaced azimuth sectors;
    ties resolved toward the lowest (tx index, rx index)."""
    h = channel_matrix(real, tx_arr, rx_arr, t_s, f_hz)
    tx_book = azimuth_codebook(tx_arr, codebook_size)
    rx_book = azimuth_codebook(rx_arr, codebook_size)
    best = (-1.0, 0, 0)
    projected = [h @ w for w in tx_book]
    for ti, hv in enumerate(projected):
        for ri, u in enumerate(rx_book):
            gain = abs(np.vdot(u, hv)) ** 2
            if gain > best[0] + 1e-15:
                best = (gain, ti, ri)
    _, ti, ri = best
    return tx_book[ti], rx_book[ri], float(best[0])


# --- ray-tracing traces -----------------------------------------------------

RAYTRACE_HEADER = ["distance_m", "path_id", "loss_db", "delay_s",
                   "aoa_el_rad", "aoa_az_rad", "aod_el_rad", "aod_az_rad"]


@dataclass(frozen=True)
class RayTraceSample:
    distance_m: float
    total_loss_db: float
    realization: ChannelRealization


class RayTraceRoute:
    """Ordered per-distance multipath samples from third-party ray tracing."""

    def __init__(self, samples: list[RayTraceSample]) -> None:
        if not samples:
            raise ValueError("empty ray-trace route")
        self.samples = samples
        self._distances = [s.distance_m for s in samples]

    def __len__(self) -> int:
        return len(self.samples)

    def lookup(self, distance_m: float) -> RayTraceSample:
        """Sample nearest to `distance_m`; ties go to the smaller distance."""
        d = self._distances
        i = bisect.bisect_left(d, distance_m)
        if i == 0:
            return self.samples[0]
        if i == len(d):
            return self.samples[-1]
        before, after = d[i - 1], d[i]
        return self.samples[i - 1] if distance_m - before <= after - distance_m \
            else self.samples[i]


def load_ray_trace(path: str) -> RayTraceRoute:
    """Parse a ray-trace CSV (one row per path, rows grouped by ascending
    distance) into per-distance channel samples."""
    groups: dict[float, list[dict[str, float]]] = {}
    order: list[float] = []
    with open(path, "r") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty ray-trace file")
        if [h.strip() for h in header] != RAYTRACE_HEADER:
            raise ValueError(f"{path}: bad header, expected {','.join(RAYTRACE_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(RAYTRACE_HEADER):
                raise ValueError(f"{path}:{lineno}: expected {len(RAYTRACE_HEADER)} fields")
            try:
                vals = {k: float(v) for k, v in zip(RAYTRACE_HEADER, row)}
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            dist = vals["distance_m"]
            if dist not in groups:
                if order and dist <= order[-1]:
                    raise ValueError(f"{path}:{lineno}: distances must ascend")
                groups[dist] = []
                order.append(dist)
            groups[dist].append(vals)

    if not order:
        raise ValueError(f"{path}: ray-trace file has no samples")

    samples = []
    for dist in order:
        rows = groups[dist]
        lin = np.array([10.0 ** (-r["loss_db"] / 10.0) for r in rows])
        total_lin = float(lin.sum())
        powers = lin / total_lin
        subpaths = [Subpath(cluster=i, index=0, power=float(p),
                            delay_s=r["delay_s"],
                            aoa_azimuth=r["aoa_az_rad"], aoa_elevation=r["aoa_el_rad"],
                            aod_azimuth=r["aod_az_rad"], aod_elevation=r["aod_el_rad"])
                    for i, (r, p) in enumerate(zip(rows, powers))]
        samples.append(RayTraceSample(
            distance_m=dist,
            total_loss_db=-10.0 * math.log10(total_lin),
            realization=ChannelRealization(subpaths=subpaths, state=ChannelState.LOS)))
    return RayTraceRoute(samples)


# --- per-link runtime state -------------------------------------------------

@dataclass(frozen=True)
class ChannelConfig:
    los: PathlossParams = DEFAULT_LOS_PARAMS
    nlos: PathlossParams = DEFAULT_NLOS_PARAMS
    outage_distance_m: float = 300.0
    clusters: ClusterConfig = ClusterConfig()
    long_term_update_period_s: float = 0.1
    long_term_update_mode: str = "fixed"          # fixed | exponential
    beamforming: str = "power"                    # power | sweep
    power_iterations: int = 30
    codebook_size: int = 16
    pool_size: int = 0                            # >0: pre-drawn realization pool
    doppler_speed_override_mps: float = -1.0      # >=0: force Doppler speed
    pathloss_offset_db: float = 0.0
    awgn: bool = False                            # flat, time-invariant channel
    raytrace_file: str = ""


class LinkChannel:
    """Runtime channel state for one TX/RX pair: pathloss and shadowing,
    current realization, beamforming vectors, and fast per-subband gains.

    The same matrix serves both directions (full reciprocity assumed).
    """

    def __init__(self, link_id: str, cfg: ChannelConfig,
                 tx_array: AntennaArray, rx_array: AntennaArray,
                 subband_freqs_hz: np.ndarray, center_freq_hz: float,
                 shadow_stream: RngStream, cluster_stream: RngStream,
                 raytrace: Optional[RayTraceRoute] = None) -> None:
        self.link_id = link_id
        self.cfg = cfg
        self.tx_array = tx_array
        self.rx_array = rx_array
        self.subband_freqs = np.asarray(subband_freqs_hz)
        self.center_freq_hz = center_freq_hz
        self._shadow_stream = shadow_stream
        self._cluster_stream = cluster_stream
        self.raytrace = raytrace

        self.state: ChannelState = ChannelState.LOS
        self.distance_m: float = 1.0
        self.center_elevation: float = 0.0
        self.speed_mps: float = 0.0
        self.heading_rad: float = 0.0
        self.realization: Optional[ChannelRealization] = None
        self.pathloss_db: float = 0.0
        self.shadowing_db: float = 0.0
        self.tx_vector: Optional[np.ndarray] = None
        self.rx_vector: Optional[np.ndarray] = None
        self.bf_gain: float = 0.0
        self.update_count = 0
        self._pool: list[ChannelRealization] = []
        self._rt_sample: Optional[RayTraceSample] = None
        # fading evaluation cache
        self._couplings: Optional[np.ndarray] = None
        self._delay_phasors: Optional[np.ndarray] = None
        self._doppler_rates: Optional[np.ndarray] = None
        self._powers: Optional[np.ndarray] = None

    # -- configuration/geometry hooks -------------------------------------

    def set_motion(self, speed_mps: float, heading_rad: Optional[float]) -> None:
        if self.cfg.doppler_speed_override_mps >= 0.0:
            self.speed_mps = self.cfg.doppler_speed_override_mps
            self.heading_rad = 0.0 if heading_rad is None else heading_rad
        else:
            self.speed_mps = speed_mps
            self.heading_rad = 0.0 if heading_rad is None else heading_rad

    def update_geometry(self, distance_m: float, state: ChannelState,
                        center_elevation: float, now: int) -> bool:
        """Apply a geometry sample; returns True when the channel state
        changed (which forces a refresh)."""
        self.distance_m = max(distance_m, 1e-3)
        self.center_elevation = center_elevation
        changed = state != self.state or self.realization is None
        self.state = state
        if state == ChannelState.OUTAGE:
            self.realization = None
            return changed
        if self.raytrace is not None:
            sample = self.raytrace.lookup(self.distance_m)
            if sample is not self._rt_sample or changed:
                self._rt_sample = sample
                self._apply_raytrace_sample(sample, now)
                return True
            return False
        if changed:
            self.refresh(now)
        else:
            self._recompute_pathloss()
        return changed

    # -- realization / beamforming lifecycle ------------------------------

    def _draw_realization(self, now: int) -> ChannelRealization:
        if self.cfg.awgn:
            sp = Subpath(cluster=0, index=0, power=1.0, delay_s=0.0,
                         aoa_azimuth=0.0, aoa_elevation=0.0,
                         aod_azimuth=0.0, aod_elevation=0.0)
            return ChannelRealization([sp], self.state, now)
        if self.cfg.pool_size > 0:
            if len(self._pool) < self.cfg.pool_size:
                self._pool.append(generate_realization(
                    self.state, self._cluster_stream, self.cfg.clusters,
                    self.center_elevation, now))
                return self._pool[-1]
            idx = int(self._cluster_stream.gen.integers(0, len(self._pool)))
            return self._pool[idx]
        return generate_realization(self.state, self._cluster_stream,
                                    self.cfg.clusters, self.center_elevation, now)

    def refresh(self, now: int) -> None:
        """Redraw shadowing + realization and recompute beamforming; used on
        state changes and NLoS long-term updates."""
        params = self.cfg.los if self.state == ChannelState.LOS else self.cfg.nlos
        sigma = 0.0 if self.cfg.awgn else params.sigma_db
        self.shadowing_db = normal_gaussian(self._shadow_stream, 0.0, sigma)
        self.realization = self._draw_realization(now)
        self._recompute_pathloss()
        self._recompute_beamforming()
        self.update_count += 1

    def _apply_raytrace_sample(self, sample: RayTraceSample, now: int) -> None:
        self.realization = sample.realization
        self.shadowing_db = 0.0
        self.pathloss_db = sample.total_loss_db + self.cfg.pathloss_offset_db
        self._recompute_beamforming(force_power=True)
        self.update_count += 1

    def _recompute_pathloss(self) -> None:
        if self.raytrace is not None:
            return
        params = self.cfg.los if self.state == ChannelState.LOS else self.cfg.nlos
        self.pathloss_db = pathloss_db(self.distance_m, self.state, params,
                                       self.shadowing_db) + self.cfg.pathloss_offset_db

    def _recompute_beamforming(self, force_power: bool = False) -> None:
        assert self.realization is not None
        if self.cfg.beamforming == "sweep" and not force_power:
            tx, rx, gain = sector_sweep_beamforming(
                self.realization, self.tx_array, self.rx_array,
                self.cfg.codebook_size, 0.0, self.center_freq_hz)
        else:
            h = channel_matrix(self.realization, self.tx_array, self.rx_array,
                               0.0, self.center_freq_hz)
            tx, rx, gain = power_iteration_beamforming(h, self.cfg.power_iterations)
        self.tx_vector, self.rx_vector, self.bf_gain = tx, rx, gain
        self.tx_array.set_beamforming_vector(tx)
        self.rx_array.set_beamforming_vector(rx)
        self._rebuild_fading_cache()

    def _rebuild_fading_cache(self) -> None:
        real = self.realization
        assert real is not None and self.tx_vector is not None and self.rx_vector is not None
        n = len(real.subpaths)
        scale = math.sqrt(self.rx_array.num_elements * self.tx_array.num_elements)
        coup = np.empty(n, dtype=complex)
        powers = np.empty(n)
        delays = np.empty(n)
        dopp = np.empty(n)
        for i, sp in enumerate(real.subpaths):
            u_rx = spatial_signature(self.rx_array, sp.aoa_azimuth, sp.aoa_elevation)
            u_tx = spatial_signature(self.tx_array, sp.aod_azimuth, sp.aod_elevation)
            coup[i] = scale * np.vdot(self.rx_vector, u_rx) * np.vdot(u_tx, self.tx_vector)
            powers[i] = sp.power
            delays[i] = sp.delay_s
            dopp[i] = math.cos(sp.aoa_azimuth - self.heading_rad)
        self._couplings = coup * np.sqrt(powers)
        self._powers = powers
        self._delay_phasors = np.exp(-2j * math.pi * np.outer(delays, self.subband_freqs))
        self._doppler_rates = 2.0 * math.pi * dopp

    # -- long-term update timing ------------------------------------------

    def next_update_delay_ns(self, timer_stream: RngStream) -> int:
        period = self.cfg.long_term_update_period_s
        if self.cfg.long_term_update_mode == "exponential":
            return max(1, int(timer_stream.gen.exponential(period) * NS_PER_S))
        return int(period * NS_PER_S)

    def long_term_update(self, now: int) -> bool:
        """Timer-driven block-fading update; replaces the realization for
        NLoS links only. Returns True when the realization changed."""
        if self.state != ChannelState.NLOS or self.realization is None:
            return False
        self.refresh(now)
        return True

    # -- gain evaluation ----------------------------------------------------

    def subband_gains(self, t_s: float) -> np.ndarray:
        """Linear power gain per subband at absolute time t: pathloss times
        the beamformed fading gain |w_rx^H H(t, f) w_tx|^2."""
        if self.state == ChannelState.OUTAGE or self.realization is None:
            return np.zeros(len(self.subband_freqs))
        fd = doppler_hz(self.speed_mps, self.center_freq_hz)
        phases = self._doppler_rates * (fd * t_s)
        weights = self._couplings * np.exp(1j * phases)
        amp = weights @ self._delay_phasors
        return 10.0 ** (-self.pathloss_db / 10.0) * np.abs(amp) ** 2

    def cross_gains(self, victim: "LinkChannel", t_s: float) -> np.ndarray:
        """Per-subband gain of this link's channel measured with this link's
        transmit vector and the victim's receive vector (interference path)."""
        if self.state == ChannelState.OUTAGE or self.realization is None:
            return np.zeros(len(self.subband_freqs))
        real = self.realization
        fd = doppler_hz(self.speed_mps, self.center_freq_hz)
        w_tx = self.tx_vector
        w_rx = victim.rx_vector
        if w_tx is None or w_rx is None:
            return np.zeros(len(self.subband_freqs))
        scale = math.sqrt(victim.rx_array.num_elements * self.tx_array.num_elements)
        amp = np.zeros(len(self.subband_freqs), dtype=complex)
        for sp in real.subpaths:
            u_rx = spatial_signature(victim.rx_array, sp.aoa_azimuth, sp.aoa_elevation)
            u_tx = spatial_signature(self.tx_array, sp.aod_azimuth, sp.aod_elevation)
            c = scale * np.vdot(w_rx, u_rx) * np.vdot(u_tx, w_tx) * math.sqrt(sp.power)
            g = c * np.exp(1j * 2.0 * math.pi * fd *
                           math.cos(sp.aoa_azimuth - self.heading_rad) * t_s)
            amp += g * np.exp(-2j * math.pi * sp.delay_s * self.subband_freqs)
        return 10.0 ** (-self.pathloss_db / 10.0) * np.abs(amp) ** 2

    def long_term_gain_linear(self) -> float:
        """Expected wideband beamformed gain with phases averaged out:
        pathloss times sum_p P_p |coupling_p|^2."""
        if self.state == ChannelState.OUTAGE or self._couplings is None:
            return 0.0
        return float(10.0 ** (-self.pathloss_db / 10.0) *
                     np.sum(np.abs(self._couplings) ** 2))
