"""
What it costs in the lab
========================

Detector, fiber, optics and atom-readout efficiencies multiply the
postselection probability.
"""
from ghzpurify import faraday, resources

p = resources.success_probability(3, fidelity=0.8)
print(f"P = {p:.3e} for F = 0.8 and three parties")

for n in range(2, 7):
    a = resources.success_probability(n, fidelity=0.8)
    b = resources.success_probability(n, fidelity=0.8, per_photon_losses=True)
    print(f"N = {n}: P = {a:.3e}, with fiber and optics per photon {b:.3e}")

# An 87Rb fiber cavity at 780 nm with kappa = 2 pi x 53 MHz.
cavity, _ = resources.default_physical_params()
print(f"Q = {resources.quality_factor(cavity):.3e}")
print(faraday.phases(cavity))
