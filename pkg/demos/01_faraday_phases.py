"""
Faraday rotation of a reflected photon
======================================

A photon reflected off a single-sided cavity picks up a phase that depends
on whether the atom inside couples to its polarization.
"""
import numpy as np

from ghzpurify import faraday
from ghzpurify.faraday import CavityParams

# At the ideal point the coupled reflection phase is pi and the empty-cavity
# phase is pi/2, so the polarization turns by pi/4.
ideal = CavityParams.ideal()
ph = faraday.phases(ideal)
print(f"theta = {ph.theta:.6f}, theta_0 = {ph.theta_0:.6f}, rotation = {ph.rotation:.6f}")

# The corresponding gate is diagonal in |pol>|atom>.
print("gate diagonal:", np.round(np.diag(faraday.single_cavity_gate().matrix), 12))

# Moving the probe frequency away from omega_c - kappa/2 changes the phases
# continuously; theta wraps around the branch cut at pi.
for wp in (-1.0, -0.75, -0.5, -0.25, 0.0):
    p = CavityParams(omega_c=0, omega_0=0, omega_p=wp, kappa=1, g=0.5)
    ph = faraday.phases(p)
    print(f"omega_p = {wp:+.2f}: theta = {ph.theta:+.4f}, theta_0 = {ph.theta_0:+.4f}")
