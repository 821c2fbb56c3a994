"""Cell-level uplink simulation driving the mode-adaptation loop.

One gNB at the origin serves a small fleet of vehicles that stream LiDAR
frames upward. The model is deliberately parametric rather than
protocol-accurate:

* mobility: each vehicle loops a rectangular route at constant speed,
  seeded phase offsets spreading the fleet along the loop; only the
  distance to the gNB matters;
* channel: log-distance pathloss plus AR(1)-correlated lognormal
  shadowing, evaluated per 1 ms scheduling tick; SINR maps to a spectral
  efficiency through a threshold table (see `link`);
* traffic: one compressed frame per vehicle per frame interval, payload
  drawn around the active mode's mean, segmented into fixed-size packets;
* scheduling: per tick the cell's symbol budget is split equally among
  backlogged vehicles, redistributing whatever a draining queue cannot
  use; packets exceeding a residency bound are dropped;
* reporting: per control period the simulator aggregates the KPIs the
  agent observes (MCS, symbols, SINR, delay statistics, PRR) and
  normalizes them into an 8-entry state vector.

Everything is driven by seeded generator streams: identical (config,
seed, action sequence) reproduces identical KPI streams bit for bit.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigError
from .link import McsTable, load_mcs_table
from .modes import ApplicationMode, mode_from_id
from .reward import QosSample

# Resource elements carried by one full-band OFDM symbol, per MHz of
# bandwidth (133 resource blocks x 12 subcarriers at 50 MHz).
_RE_PER_SYMBOL_PER_MHZ = 1596.0 / 50.0

_STATE_SIZE = 8


@dataclass
class SimConfig:
    """Every knob of the simulated cell; defaults are the shipped calibration.

    The calibration is chosen so that, at the default bandwidth, a single
    vehicle can sustain the 200 KB mode but never the raw 3200 KB stream,
    and five vehicles make the 200 KB mode intermittently unsustainable.
    """

    # radio
    carrier_frequency_ghz: float = 3.5
    bandwidth_mhz: float = 50.0
    tx_power_dbm: float = 23.0
    noise_figure_db: float = 5.0
    # timing
    control_period_ms: int = 100
    episode_duration_s: float = 80.0
    tick_ms: int = 1
    frame_rate_hz: float = 10.0
    # fleet
    n_vehicles: int = 1
    rng_seed: int = 1
    # channel
    pathloss_exponent: float = 2.8
    shadowing_sigma_db: float = 4.0
    shadowing_corr: float = 0.99
    cell_radius_m: float = 240.0
    mcs_table_path: str = ""
    # mobility (rectangular loop centred on the gNB)
    route_half_length_m: float = 130.0
    route_half_width_m: float = 30.0
    speed_mps: float = 13.9
    # traffic and queueing
    packet_size_bytes: int = 1500
    queue_drop_ms: float = 400.0
    payload_cv: float = 0.10
    # scheduler
    symbols_per_tick: int = 14
    # state-vector normalization bounds
    delay_bound_ms: float = 400.0
    sinr_min_db: float = -10.0
    sinr_max_db: float = 40.0
    mcs_index_bound: int = 14

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.carrier_frequency_ghz <= 0:
            raise ConfigError("carrier_frequency_ghz must be > 0")
        if self.bandwidth_mhz <= 0:
            raise ConfigError("bandwidth_mhz must be > 0")
        if not math.isfinite(self.tx_power_dbm):
            raise ConfigError("tx_power_dbm must be finite")
        if self.noise_figure_db < 0:
            raise ConfigError("noise_figure_db must be >= 0")
        if int(self.control_period_ms) != self.control_period_ms or self.control_period_ms <= 0:
            raise ConfigError("control_period_ms must be a positive integer")
        if int(self.tick_ms) != self.tick_ms or self.tick_ms <= 0:
            raise ConfigError("tick_ms must be a positive integer")
        if self.control_period_ms % self.tick_ms != 0:
            raise ConfigError("tick_ms must divide control_period_ms")
        if self.episode_duration_s <= 0:
            raise ConfigError("episode_duration_s must be > 0")
        steps = self.episode_duration_s * 1000.0 / self.control_period_ms
        if abs(steps - round(steps)) > 1e-9 or round(steps) < 1:
            raise ConfigError("control_period_ms must divide episode_duration_s * 1000")
        if self.frame_rate_hz <= 0:
            raise ConfigError("frame_rate_hz must be > 0")
        if int(self.n_vehicles) != self.n_vehicles or self.n_vehicles < 1:
            raise ConfigError(f"n_vehicles must be a positive integer, got {self.n_vehicles}")
        if self.pathloss_exponent <= 0:
            raise ConfigError("pathloss_exponent must be > 0")
        if self.shadowing_sigma_db < 0:
            raise ConfigError("shadowing_sigma_db must be >= 0")
        if not 0.0 <= self.shadowing_corr < 1.0:
            raise ConfigError("shadowing_corr must be in [0, 1)")
        if self.route_half_length_m <= 0 or self.route_half_width_m <= 0:
            raise ConfigError("route dimensions must be > 0")
        if math.hypot(self.route_half_length_m, self.route_half_width_m) > self.cell_radius_m:
            raise ConfigError("route corner lies outside cell_radius_m")
        if self.speed_mps < 0:
            raise ConfigError("speed_mps must be >= 0")
        if self.packet_size_bytes < 1:
            raise ConfigError("packet_size_bytes must be >= 1")
        if self.queue_drop_ms <= 0:
            raise ConfigError("queue_drop_ms must be > 0")
        if self.payload_cv < 0:
            raise ConfigError("payload_cv must be >= 0")
        if self.symbols_per_tick < 1:
            raise ConfigError("symbols_per_tick must be >= 1")
        if self.delay_bound_ms <= 0:
            raise ConfigError("delay_bound_ms must be > 0")
        if self.sinr_min_db >= self.sinr_max_db:
            raise ConfigError("sinr_min_db must be < sinr_max_db")
        if self.mcs_index_bound < 1:
            raise ConfigError("mcs_index_bound must be >= 1")

    @property
    def steps_per_episode(self) -> int:
        return int(round(self.episode_duration_s * 1000.0 / self.control_period_ms))

    @property
    def ticks_per_period(self) -> int:
        return self.control_period_ms // self.tick_ms

    @property
    def re_per_symbol(self) -> int:
        return int(round(_RE_PER_SYMBOL_PER_MHZ * self.bandwidth_mhz))

    @property
    def symbol_budget_per_period(self) -> int:
        return self.symbols_per_tick * self.ticks_per_period

    @property
    def noise_dbm(self) -> float:
        return -174.0 + 10.0 * math.log10(self.bandwidth_mhz * 1e6) + self.noise_figure_db

    @property
    def pathloss_ref_db(self) -> float:
        """Free-space pathloss at 1 m for the carrier frequency."""
        f_hz = self.carrier_frequency_ghz * 1e9
        return 20.0 * math.log10(4.0 * math.pi * f_hz / 299_792_458.0)

    @property
    def route_perimeter_m(self) -> float:
        return 4.0 * (self.route_half_length_m + self.route_half_width_m)


@dataclass(frozen=True, slots=True)
class StepKpis:
    """Per-vehicle KPIs aggregated over one control period.

    Delay statistics cover packets delivered during the period, whichever
    period generated them; when nothing was delivered they saturate at the
    queue residency bound (std 0). `packets_delivered` and `prr` instead
    follow the period's own cohort: packets generated in the period that
    were also delivered before it ended.
    """

    mcs_index: int
    ofdm_symbols_used: int
    sinr_db: float
    delay_mean: float
    delay_max: float
    delay_min: float
    delay_std: float
    prr: float
    packets_generated: int
    packets_delivered: int


def state_vector(kpis: StepKpis, config: SimConfig) -> np.ndarray:
    """Min-max normalize KPIs into the fixed 8-feature agent state.

    Order: [mcs, symbols, sinr, delay_mean, delay_max, delay_min,
    delay_std, prr]; every entry clamped to [0, 1].
    """
    budget = config.symbol_budget_per_period
    sinr_span = config.sinr_max_db - config.sinr_min_db
    raw = np.array(
        [
            kpis.mcs_index / config.mcs_index_bound,
            kpis.ofdm_symbols_used / budget,
            (kpis.sinr_db - config.sinr_min_db) / sinr_span,
            kpis.delay_mean / config.delay_bound_ms,
            kpis.delay_max / config.delay_bound_ms,
            kpis.delay_min / config.delay_bound_ms,
            kpis.delay_std / config.delay_bound_ms,
            kpis.prr,
        ],
        dtype=np.float64,
    )
    return np.clip(raw, 0.0, 1.0)


class _Burst:
    """Packets of one frame sharing an arrival time, drained head-first."""

    __slots__ = ("arrival_ms", "period", "n_packets", "delivered", "head_bits", "bits_left")

    def __init__(self, arrival_ms: int, period: int, n_packets: int, full_bits: int, last_bits: int):
        self.arrival_ms = arrival_ms
        self.period = period
        self.n_packets = n_packets
        self.delivered = 0
        self.head_bits = full_bits if n_packets > 1 else last_bits
        self.bits_left = full_bits * (n_packets - 1) + last_bits


class NetworkEnv:
    """Seeded episodic simulation of the shared cell.

    Usage: construct with a config, call `reset()` for the initial
    per-vehicle states, then `step(actions)` once per control period until
    `done`. All randomness comes from streams derived from the reset seed.
    """

    def __init__(self, config: SimConfig, mcs_table: McsTable | None = None):
        config.validate()
        self.config = config
        if mcs_table is not None:
            self.mcs_table = mcs_table
        elif config.mcs_table_path:
            self.mcs_table = load_mcs_table(config.mcs_table_path)
        else:
            self.mcs_table = McsTable()
        self._full_bits = config.packet_size_bytes * 8
        self._frame_interval_ms = 1000.0 / config.frame_rate_hz
        self._ready = False

    # -- lifecycle -----------------------------------------------------

    def reset(self, seed=None) -> np.ndarray:
        """Start a fresh episode; returns the (n_vehicles, 8) initial states.

        `seed` may be an int or a numpy SeedSequence; None reuses the
        config's rng_seed. Identical seeds reproduce the episode exactly.
        The initial state is all zeros: no KPIs exist before traffic flows.
        """
        cfg = self.config
        if seed is None:
            seed = cfg.rng_seed
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        mob_ss, shadow_ss, payload_ss = ss.spawn(3)
        self._rng_shadow = np.random.default_rng(shadow_ss)
        self._rng_payload = np.random.default_rng(payload_ss)

        n = cfg.n_vehicles
        rng_mob = np.random.default_rng(mob_ss)
        self._phase_m = rng_mob.uniform(0.0, cfg.route_perimeter_m, size=n)
        shadow0 = self._rng_shadow.normal(0.0, cfg.shadowing_sigma_db, size=n)
        # lfilter carry-over state: z = rho * y[last]
        self._shadow_zi = (cfg.shadowing_corr * shadow0)[None, :]

        self._queues = [deque() for _ in range(n)]
        self._queue_bits = np.zeros(n, dtype=np.int64)
        self._step_count = 0
        self._rr_counter = 0
        self.total_generated = 0
        self.total_delivered = 0
        self.total_dropped = 0
        # ticks on which symbols were left unused while a schedulable
        # (backlogged, non-outage) vehicle still wanted them; stays 0
        self.scheduler_idle_violations = 0
        self._ready = True
        return np.zeros((n, _STATE_SIZE), dtype=np.float64)

    @property
    def done(self) -> bool:
        return self._ready and self._step_count >= self.config.steps_per_episode

    def queued_packets(self) -> int:
        """Packets currently waiting or in transmission, fleet-wide."""
        return sum(b.n_packets - b.delivered for q in self._queues for b in q)

    # -- per-period physics --------------------------------------------

    def _channel_for_period(self, period_start_ms: int):
        """Per-tick distance, SINR, MCS and efficiency arrays, shape (T, n)."""
        cfg = self.config
        n = cfg.n_vehicles
        ticks = cfg.ticks_per_period
        t_s = (period_start_ms + np.arange(ticks, dtype=np.float64) * cfg.tick_ms) / 1000.0
        s = (self._phase_m[None, :] + cfg.speed_mps * t_s[:, None]) % cfg.route_perimeter_m

        a, b = cfg.route_half_length_m, cfg.route_half_width_m
        # counterclockwise from (a, -b): right side, top, left side, bottom
        seg = np.empty_like(s)
        x = np.empty_like(s)
        y = np.empty_like(s)
        c1, c2, c3 = 2 * b, 2 * b + 2 * a, 4 * b + 2 * a
        m0 = s < c1
        m1 = (s >= c1) & (s < c2)
        m2 = (s >= c2) & (s < c3)
        m3 = s >= c3
        x[m0] = a
        y[m0] = -b + s[m0]
        x[m1] = a - (s[m1] - c1)
        y[m1] = b
        x[m2] = -a
        y[m2] = b - (s[m2] - c2)
        x[m3] = -a + (s[m3] - c3)
        y[m3] = -b
        dist = np.hypot(x, y)

        sigma = cfg.shadowing_sigma_db
        rho = cfg.shadowing_corr
        innov = self._rng_shadow.standard_normal((ticks, n)) * (sigma * math.sqrt(1.0 - rho * rho))
        shadow, self._shadow_zi = lfilter([1.0], [1.0, -rho], innov, axis=0, zi=self._shadow_zi)

        pathloss = cfg.pathloss_ref_db + 10.0 * cfg.pathloss_exponent * np.log10(
            np.maximum(dist, 1.0)
        )
        sinr_db = cfg.tx_power_dbm - pathloss + shadow - cfg.noise_dbm
        mcs_idx, eff = self.mcs_table.lookup(sinr_db)
        return sinr_db, mcs_idx, eff

    def _enqueue_frame(self, vehicle: int, arrival_ms: int, period: int, mode: ApplicationMode, gen_counts):
        cfg = self.config
        payload_kb = mode.mean_payload_kb * (
            1.0 + cfg.payload_cv * self._rng_payload.standard_normal()
        )
        payload_bytes = int(round(max(1.0, payload_kb) * 1000.0))
        n_full, rem = divmod(payload_bytes, cfg.packet_size_bytes)
        if rem:
            n_packets, last_bits = n_full + 1, rem * 8
        else:
            n_packets, last_bits = n_full, self._full_bits
        burst = _Burst(arrival_ms, period, n_packets, self._full_bits, last_bits)
        self._queues[vehicle].append(burst)
        self._queue_bits[vehicle] += burst.bits_left
        gen_counts[vehicle] += n_packets
        self.total_generated += n_packets

    def _drop_stale(self, vehicle: int, now_ms: int):
        cutoff = now_ms - self.config.queue_drop_ms
        q = self._queues[vehicle]
        while q and q[0].arrival_ms < cutoff:
            burst = q.popleft()
            self.total_dropped += burst.n_packets - burst.delivered
            self._queue_bits[vehicle] -= burst.bits_left

    def _drain(self, vehicle: int, budget_bits: int, now_end_ms: int, period: int, delays, cohort_delivered):
        q = self._queues[vehicle]
        while budget_bits > 0 and q:
            burst = q[0]
            take = min(budget_bits, burst.head_bits)
            burst.head_bits -= take
            burst.bits_left -= take
            budget_bits -= take
            self._queue_bits[vehicle] -= take
            if burst.head_bits == 0:
                delays[vehicle].append(float(now_end_ms - burst.arrival_ms))
                burst.delivered += 1
                self.total_delivered += 1
                if burst.period == period:
                    cohort_delivered[vehicle] += 1
                if burst.delivered == burst.n_packets:
                    q.popleft()
                else:
                    last = burst.delivered == burst.n_packets - 1
                    burst.head_bits = burst.bits_left if last else self._full_bits

    # -- the control-period step ---------------------------------------

    def step(self, actions: Sequence) -> tuple[np.ndarray, list[QosSample], list[StepKpis], bool]:
        """Advance one control period under the given per-vehicle modes.

        `actions` holds one ApplicationMode (or canonical mode id) per
        vehicle. Returns (states, qos_samples, kpis, done) where states is
        the (n_vehicles, 8) array of normalized features.
        """
        if not self._ready:
            raise RuntimeError("call reset() before step()")
        if self.done:
            raise RuntimeError("episode finished; call reset()")
        cfg = self.config
        n = cfg.n_vehicles
        if len(actions) != n:
            raise ValueError(f"expected {n} actions, got {len(actions)}")
        modes = [a if isinstance(a, ApplicationMode) else mode_from_id(a) for a in actions]

        period = self._step_count
        start_ms = period * cfg.control_period_ms
        end_ms = start_ms + cfg.control_period_ms
        ticks = cfg.ticks_per_period
        tick_ms = cfg.tick_ms
        re_sym = cfg.re_per_symbol

        sinr_db, mcs_idx, eff = self._channel_for_period(start_ms)

        # frame arrival tick offsets within this period (same for the fleet)
        interval = self._frame_interval_ms
        first = math.ceil(start_ms / interval - 1e-9)
        arrival_ticks = {}
        k = first
        while k * interval < end_ms - 1e-9:
            arrival_ticks.setdefault(int((k * interval - start_ms) // tick_ms), []).append(k)
            k += 1

        gen_counts = [0] * n
        cohort_delivered = [0] * n
        delays: list[list[float]] = [[] for _ in range(n)]
        symbols_used = np.zeros(n, dtype=np.int64)
        queue_bits = self._queue_bits

        for t in range(ticks):
            now_ms = start_ms + t * tick_ms
            if t in arrival_ticks:
                for _ in arrival_ticks[t]:
                    for v in range(n):
                        self._enqueue_frame(v, now_ms, period, modes[v], gen_counts)
            for v in range(n):
                if self._queues[v]:
                    self._drop_stale(v, now_ms)

            tick_eff = eff[t]
            needs = {}
            for v in range(n):
                if queue_bits[v] > 0 and tick_eff[v] > 0.0:
                    needs[v] = math.ceil(queue_bits[v] / (re_sym * tick_eff[v]))
            remaining = cfg.symbols_per_tick
            rr = self._rr_counter
            used = {}
            while remaining > 0 and needs:
                vids = sorted(needs)
                m = len(vids)
                base, extra = divmod(remaining, m)
                consumed = 0
                for i, v in enumerate(vids):
                    grant = base + (1 if (i - rr) % m < extra else 0)
                    take = min(grant, needs[v])
                    if take:
                        used[v] = used.get(v, 0) + take
                        consumed += take
                    if take >= needs[v]:
                        del needs[v]
                    else:
                        needs[v] -= take
                remaining -= consumed
                if consumed == 0:
                    break
            if remaining > 0 and needs:
                self.scheduler_idle_violations += 1
            self._rr_counter += 1

            now_end = now_ms + tick_ms
            for v, sym in used.items():
                symbols_used[v] += sym
                budget_bits = int(sym * re_sym * tick_eff[v])
                self._drain(v, budget_bits, now_end, period, delays, cohort_delivered)

        # -- aggregation ------------------------------------------------
        mean_sinr = sinr_db.mean(axis=0)
        mean_mcs = mcs_idx.mean(axis=0)
        states = np.empty((n, _STATE_SIZE), dtype=np.float64)
        kpis_out: list[StepKpis] = []
        samples: list[QosSample] = []
        for v in range(n):
            if delays[v]:
                d = np.asarray(delays[v])
                d_mean, d_max, d_min, d_std = (
                    float(d.mean()),
                    float(d.max()),
                    float(d.min()),
                    float(d.std()),
                )
            else:
                # nothing delivered: saturate at the residency bound
                d_mean = d_max = d_min = cfg.queue_drop_ms
                d_std = 0.0
            gen = gen_counts[v]
            prr = cohort_delivered[v] / gen if gen > 0 else 1.0
            kpis = StepKpis(
                mcs_index=int(round(mean_mcs[v])),
                ofdm_symbols_used=int(symbols_used[v]),
                sinr_db=float(mean_sinr[v]),
                delay_mean=d_mean,
                delay_max=d_max,
                delay_min=d_min,
                delay_std=d_std,
                prr=prr,
                packets_generated=gen,
                packets_delivered=cohort_delivered[v],
            )
            kpis_out.append(kpis)
            samples.append(QosSample(prr=prr, mean_delay_ms=d_mean, cd=modes[v].cd_sym))
            states[v] = state_vector(kpis, cfg)

        self._step_count += 1
        return states, samples, kpis_out, self.done
