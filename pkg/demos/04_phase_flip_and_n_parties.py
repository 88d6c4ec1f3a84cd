"""
Phase flips and more parties
============================

Hadamards on every atom turn a phase error into a bit-flip pattern, so the
same parity checks handle F |Phi+_0> + (1-F) |Phi-_0>.
"""
from ghzpurify import protocol
from ghzpurify.ghz import GhzMixture, phi
from ghzpurify.protocol import ErrorMode, RoundConfig

m = GhzMixture.binary(0.8, phi(0, "-"))
r = protocol.simulate_round_exact(m, RoundConfig(3, ErrorMode.PHASE_FLIP))
print(f"phase-flip round: F' = {r.fidelity:.10f}, p = {r.p_success:.4f}, leakage {r.leakage:.1e}")

# The bit-flip round works the same way for any number of parties.
for n in (2, 3, 4):
    r = protocol.simulate_round_exact(GhzMixture.binary(0.8, phi(1, "+", n)))
    print(f"N = {n}: F' = {r.fidelity:.10f}, p = {r.p_success:.4f}")
