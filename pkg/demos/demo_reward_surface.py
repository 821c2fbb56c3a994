"""Reward shape: how the QoS/QoE weight changes what each mode is worth.

Prints the per-mode reward across delays for the two standard weights.
A period violating QoS (delay at/over 50 ms or any lost packet) earns 0
regardless of fidelity.
"""

from pqossim import CANONICAL_MODES, QosSample, RewardParams, compute_reward, normalize_reward

for alpha in (0.5, 1.0):
    params = RewardParams(alpha=alpha)
    print(f"\nalpha = {alpha}  (delay bound 50 ms, chamfer bound 45)")
    header = "delay_ms " + " ".join(f"mode{m.mode_id:>5}" for m in CANONICAL_MODES)
    print(header)
    for delay in (0.0, 10.0, 25.0, 40.0, 49.0, 50.0):
        cells = []
        for mode in CANONICAL_MODES:
            r = compute_reward(QosSample(prr=1.0, mean_delay_ms=delay, cd=mode.cd_sym), params)
            cells.append(f"{r:9.4f}")
        print(f"{delay:8.1f} " + " ".join(cells))

print("\na single lost packet zeroes the period (alpha 0.5, delay 5 ms):")
params = RewardParams(alpha=0.5)
for prr in (1.0, 0.999):
    r = compute_reward(QosSample(prr=prr, mean_delay_ms=5.0, cd=0.0), params)
    print(f"  prr={prr}: reward {r}")

print("\nreporting scale maps [0, 1] onto [-1, +1]:")
for r in (0.0, 0.2081, 0.5, 0.8783, 1.0):
    print(f"  raw {r:>6} -> normalized {normalize_reward(r):+.4f}")
