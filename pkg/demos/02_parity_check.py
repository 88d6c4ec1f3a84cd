"""
Two reflections make a parity check
===================================

A photon in (|L>+|R>)/sqrt2 bounces off two cavities. It comes back in
(|L>-|R>)/sqrt2 when the atoms agree, and unchanged when they differ.
"""
from ghzpurify import faraday, qsim
from ghzpurify.qsim import Basis, Copy, atom, photon

a1, a2 = atom(0), atom(0, Copy.SECOND)
for bits in ("00", "01", "10", "11"):
    s = qsim.tensor(faraday.plus_photon(0), qsim.basis_state([a1, a2], bits))
    s = faraday.two_cavity_action(s, photon(0), a1, a2)
    keep, flip = qsim.outcome_probabilities(s, [photon(0)], Basis.DIAGONAL)
    print(f"atoms |{bits}>: P(keep) = {keep:.3f}, P(flip) = {flip:.3f}")

# The photon never disturbs the atoms' computational values, only phases.
