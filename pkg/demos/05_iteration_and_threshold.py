"""
Repeating the round
===================

Each round squares the weights and renormalizes, so fidelities above 1/2
climb toward 1 while fidelities below 1/2 fall.
"""
import numpy as np

from ghzpurify import ghz, protocol
from ghzpurify.ghz import GhzMixture, phi

for state in protocol.iterate(GhzMixture.binary(0.8, phi(1)), rounds=4):
    print(f"round {state.rounds_done}: F = {state.fidelity:.12f}, "
          f"pairs needed ~ {state.pairs_consumed_expected:.2f}")

# With three error components, a round helps only above a threshold in F0.
for f1, f2 in ((0.1, 0.1), (0.2, 0.0), (0.3, 0.3)):
    t = protocol.threshold_check(0.35, f1, f2)
    print(f"F1={f1}, F2={f2}: bound {t.bound:.4f}, F0=0.35 purifiable: {bool(t)}")

# A sampled estimate agrees with the exact round.
mc = protocol.monte_carlo_round(GhzMixture.binary(0.8, phi(1)), trials=50_000)
print(f"Monte Carlo: acceptance {mc.acceptance_rate:.4f} +- {mc.acceptance_stderr:.4f}, "
      f"fidelity {mc.kept_fidelity:.4f} +- {mc.kept_fidelity_stderr:.4f}")
