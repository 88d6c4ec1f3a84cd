"""
One bit-flip purification round
===============================

Two copies of F |Phi+_0> + (1-F) |Phi+_1> go through the parity checks.
Keeping only runs where every party saw the same photon outcome removes
the mismatched combinations.
"""
from ghzpurify import ghz, protocol
from ghzpurify.ghz import GhzMixture, phi

m = GhzMixture.binary(0.8, phi(1))
result = protocol.simulate_round_exact(m)
print(f"input fidelity {m.fidelity}")
print(f"acceptance probability {result.p_success:.6f}")
print(f"output fidelity {result.fidelity:.10f} (16/17 = {16 / 17:.10f})")

# Every branch is kept in the result, accepted or not.
for b in result.branches:
    if b.accepted and b.branch_probability > 0.05:
        print(b.detector_pattern, b.atom_readout, f"{b.branch_probability:.4f}", b.corrections)

# The closed-form update gives the same numbers.
new, p = protocol.recursion_step(m)
print(f"recursion: F' = {new.fidelity:.10f}, p = {p:.6f}")

# A four-component mixture follows w_i -> w_i^2 / sum w^2.
m4 = ghz.general_bit_flip([0.7, 0.1, 0.1, 0.1])
print(protocol.simulate_round_exact(m4).kept)
