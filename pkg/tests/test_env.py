import dataclasses

import numpy as np
import pytest

from pqossim.env import NetworkEnv, SimConfig, state_vector
from pqossim.errors import ConfigError
from pqossim.link import McsTable
from pqossim.modes import MODE_1450, MODE_1451, MODE_1452, MODE_RAW


def quick_cfg(**kwargs) -> SimConfig:
    defaults = dict(n_vehicles=1, episode_duration_s=2.0, rng_seed=11)
    defaults.update(kwargs)
    return SimConfig(**defaults)


def run_steps(env, actions, n_steps, seed=None):
    env.reset(seed)
    out = []
    for _ in range(n_steps):
        out.append(env.step(actions))
    return out


def test_default_episode_is_800_steps():
    assert SimConfig().steps_per_episode == 800


def test_reset_is_bit_exact_deterministic():
    cfg = quick_cfg(n_vehicles=3)
    env1, env2 = NetworkEnv(cfg), NetworkEnv(cfg)
    s1, s2 = env1.reset(99), env2.reset(99)
    assert np.array_equal(s1, s2)
    for _ in range(5):
        st1, sa1, k1, d1 = env1.step([MODE_1450] * 3)
        st2, sa2, k2, d2 = env2.step([MODE_1450] * 3)
        assert np.array_equal(st1, st2)
        assert k1 == k2
        assert sa1 == sa2
        assert d1 == d2


def test_different_seeds_differ():
    cfg = quick_cfg()
    env = NetworkEnv(cfg)
    env.reset(1)
    a = env.step([MODE_1450])[2][0]
    env.reset(2)
    b = env.step([MODE_1450])[2][0]
    assert a.sinr_db != b.sinr_db


def test_reset_returns_one_state_per_vehicle():
    cfg = quick_cfg(n_vehicles=5)
    states = NetworkEnv(cfg).reset()
    assert states.shape == (5, 8)
    assert np.all(states == 0.0)


def test_zero_vehicles_rejected():
    with pytest.raises(ConfigError):
        quick_cfg(n_vehicles=0)


def test_one_frame_per_period_at_defaults():
    # 10 Hz frames over a 100 ms period: exactly one frame, ~200 KB for
    # the 200 KB mode (134 packets nominal, 10% payload spread)
    env = NetworkEnv(quick_cfg(episode_duration_s=5.0))
    env.reset(3)
    counts = []
    for _ in range(50):
        _, _, kpis, _ = env.step([MODE_1450])
        counts.append(kpis[0].packets_generated)
    assert all(90 <= c <= 180 for c in counts), counts
    mean_kb = np.mean(counts) * env.config.packet_size_bytes / 1000.0
    assert mean_kb == pytest.approx(200.0, rel=0.05)


def test_two_frames_per_period_at_20hz():
    env = NetworkEnv(quick_cfg(frame_rate_hz=20.0))
    env.reset(4)
    _, _, kpis, _ = env.step([MODE_1452])
    # two 17 KB frames of ~12 packets each
    assert 18 <= kpis[0].packets_generated <= 32


def test_light_load_reaches_prr_one():
    env = NetworkEnv(quick_cfg())
    env.reset(5)
    for i in range(10):
        _, _, kpis, _ = env.step([MODE_1452])
        if i >= 2:
            assert kpis[0].prr == 1.0
            assert kpis[0].packets_delivered == kpis[0].packets_generated


def test_raw_mode_overloads_any_configuration():
    # 3200 KB per 100 ms is 256 Mbit/s, far above the cell ceiling: the
    # queue must grow and per-period mean delay must climb
    env = NetworkEnv(quick_cfg())
    env.reset(6)
    delays = []
    backlog = []
    for _ in range(4):
        _, _, kpis, _ = env.step([MODE_RAW])
        delays.append(kpis[0].delay_mean)
        backlog.append(env.queued_packets())
    assert all(d2 > d1 for d1, d2 in zip(delays, delays[1:])), delays
    assert all(b2 > b1 for b1, b2 in zip(backlog, backlog[1:])), backlog


def test_packet_conservation_every_period():
    env = NetworkEnv(quick_cfg(n_vehicles=3, episode_duration_s=3.0))
    env.reset(7)
    rng = np.random.default_rng(0)
    modes = [MODE_RAW, MODE_1450, MODE_1451, MODE_1452]
    done = False
    while not done:
        actions = [modes[rng.integers(4)] for _ in range(3)]
        _, _, _, done = env.step(actions)
        assert (
            env.total_generated
            == env.total_delivered + env.total_dropped + env.queued_packets()
        )
    assert env.total_dropped > 0  # raw mode must have overflowed the bound


def test_prr_bounds():
    env = NetworkEnv(quick_cfg(n_vehicles=2, episode_duration_s=3.0))
    env.reset(8)
    done = False
    while not done:
        _, _, kpis, done = env.step([MODE_RAW, MODE_1451])
        for k in kpis:
            assert 0.0 <= k.prr <= 1.0
            if k.packets_generated > 0:
                assert k.prr == k.packets_delivered / k.packets_generated


def test_work_conservation_under_congestion():
    env = NetworkEnv(quick_cfg(n_vehicles=4, episode_duration_s=3.0))
    env.reset(9)
    done = False
    while not done:
        _, _, _, done = env.step([MODE_RAW, MODE_1450, MODE_1451, MODE_1452])
    assert env.scheduler_idle_violations == 0


def test_outage_starves_queue_and_saturates_delay_features():
    # a table whose lowest threshold is unreachable keeps every vehicle in
    # outage: nothing is ever delivered
    table = McsTable(np.array([[1000.0, 1.0]]))
    cfg = quick_cfg()
    env = NetworkEnv(cfg, mcs_table=table)
    env.reset(10)
    states, samples, kpis, _ = env.step([MODE_1452])
    k = kpis[0]
    assert k.packets_delivered == 0
    assert k.prr == 0.0
    assert k.delay_mean == k.delay_max == k.delay_min == cfg.queue_drop_ms
    assert k.delay_std == 0.0
    assert k.mcs_index == 0
    assert k.ofdm_symbols_used == 0
    # outage vehicles are not schedulable, so unused budget is not a
    # work-conservation violation
    assert env.scheduler_idle_violations == 0
    assert np.all((states >= 0.0) & (states <= 1.0))


def test_state_features_always_in_unit_interval():
    env = NetworkEnv(quick_cfg(n_vehicles=2, episode_duration_s=3.0))
    env.reset(12)
    done = False
    while not done:
        states, _, _, done = env.step([MODE_RAW, MODE_1452])
        assert np.all((states >= 0.0) & (states <= 1.0))


def test_state_vector_layout():
    cfg = quick_cfg()
    env = NetworkEnv(cfg)
    env.reset(13)
    states, _, kpis, _ = env.step([MODE_1452])
    k = kpis[0]
    expected = state_vector(k, cfg)
    assert np.array_equal(states[0], expected)
    assert states.shape[1] == 8
    assert expected[7] == k.prr  # prr is native [0,1]


def test_congestion_monotonic_in_offered_load():
    # same seed, same channel: raw mode never yields lower mean delay than
    # the smallest mode
    cfg = quick_cfg(n_vehicles=2, episode_duration_s=2.0)
    light = NetworkEnv(cfg)
    heavy = NetworkEnv(cfg)
    light.reset(14)
    heavy.reset(14)
    done = False
    while not done:
        _, _, k_light, done = light.step([MODE_1452, MODE_1452])
        _, _, k_heavy, _ = heavy.step([MODE_RAW, MODE_RAW])
        for kl, kh in zip(k_light, k_heavy):
            assert kh.delay_mean >= kl.delay_mean


def test_delay_ordering_invariant():
    env = NetworkEnv(quick_cfg(n_vehicles=2, episode_duration_s=3.0))
    env.reset(15)
    done = False
    while not done:
        _, _, kpis, done = env.step([MODE_1450, MODE_1451])
        for k in kpis:
            assert k.delay_min <= k.delay_mean <= k.delay_max


def test_action_validation():
    env = NetworkEnv(quick_cfg(n_vehicles=2))
    env.reset(16)
    with pytest.raises(ValueError):
        env.step([MODE_1450])  # one action missing
    with pytest.raises(ValueError):
        env.step([MODE_1450, 9999])  # unknown mode id
    env.step([1450, 1452])  # ids are accepted


def test_step_lifecycle_errors():
    env = NetworkEnv(quick_cfg())
    with pytest.raises(RuntimeError):
        env.step([MODE_1450])
    env.reset(17)
    done = False
    while not done:
        _, _, _, done = env.step([MODE_1450])
    with pytest.raises(RuntimeError):
        env.step([MODE_1450])


def test_qos_sample_carries_mode_cd():
    env = NetworkEnv(quick_cfg(n_vehicles=3))
    env.reset(18)
    _, samples, _, _ = env.step([MODE_1450, MODE_1451, MODE_1452])
    assert [s.cd for s in samples] == [
        MODE_1450.cd_sym,
        MODE_1451.cd_sym,
        MODE_1452.cd_sym,
    ]


@pytest.mark.parametrize(
    "field,value",
    [
        ("bandwidth_mhz", 0.0),
        ("control_period_ms", 0),
        ("control_period_ms", 33),  # 33 not divisible into 2000 ms
        ("tick_ms", 3),  # does not divide 100
        ("frame_rate_hz", 0.0),
        ("pathloss_exponent", -1.0),
        ("shadowing_corr", 1.0),
        ("route_half_length_m", 500.0),  # outside cell radius
        ("packet_size_bytes", 0),
        ("queue_drop_ms", 0.0),
        ("symbols_per_tick", 0),
        ("sinr_min_db", 41.0),
    ],
)
def test_invalid_config_rejected(field, value):
    with pytest.raises(ConfigError):
        quick_cfg(**{field: value})


def test_config_independent_instances():
    # two envs over one config must not share mutable state
    cfg = quick_cfg(n_vehicles=2)
    env1, env2 = NetworkEnv(cfg), NetworkEnv(cfg)
    env1.reset(1)
    env2.reset(2)
    env1.step([MODE_RAW, MODE_RAW])
    before = env2.queued_packets()
    assert before == 0
