"""End-to-end training demo at desk scale (a few minutes of CPU).

Trains the agent on the quick profile with five vehicles and the
fidelity-only reward weight, then compares it against every constant
baseline under identical test-phase channel realizations.
"""

import tempfile
from pathlib import Path

from pqossim import default_config
from pqossim.config import apply_kv
from pqossim.harness import run_offline_training, run_online_training, run_test
from pqossim.policies import ConstantPolicy, DqlGreedyPolicy

config = default_config("quick")
config.sim.n_vehicles = 5
config.sim.rng_seed = 0
config.agent.rng_seed = 0
apply_kv(config, "reward.alpha", "1.0")

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    print("offline phase (constant action per episode, round-robin)...")
    agent, _ = run_offline_training(config, tmp / "off")
    print("online phase (epsilon-greedy, decaying)...")
    agent, records = run_online_training(config, tmp / "on", agent)
    late = records[-5:]
    for rec in late:
        probs = {m: round(c / len(rec.rows), 2) for m, c in sorted(rec.action_counts.items())}
        print(f"  episode {rec.episode}: eps={rec.epsilon:.2f} picks={probs}")

    print("\ntest phase, 20 episodes each, shared channel realizations:")
    print(f"{'policy':>14}  {'qos':>6}  {'median_r':>8}  {'max_r':>6}  delay_med")
    _, dql = run_test(config, tmp / "t_dql", DqlGreedyPolicy(agent.online), agent)
    rows = [dql]
    for mode_id in (0, 1450, 1451, 1452):
        _, summary = run_test(config, tmp / f"t_{mode_id}", ConstantPolicy(mode_id))
        rows.append(summary)
    for s in rows:
        print(
            f"{s.policy:>14}  {s.qos_fraction:6.3f}  {s.median_reward:8.3f}  "
            f"{s.max_reward:6.3f}  {s.delay_median:8.1f} ms"
        )
    print(f"\nDQL mode picks: { {m: round(f, 3) for m, f in dql.action_fractions.items()} }")
