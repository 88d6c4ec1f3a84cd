"""Physical success probability of one purification attempt.

``P = P_p * T_f * eta_0 * eta_d**N * eta_a**N`` where ``P_p`` is the
postselection probability of the protocol itself. With
``per_photon_losses=True`` the fiber and optics factors are also raised to
the N-th power (one photon per party); that variant is an extension, the
default reproduces the published formula.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np
from scipy import constants

from .faraday import CavityParams

RB87_D2_WAVELENGTH = 780e-9
CAVITY_DECAY = 2 * math.pi * 53e6


@dataclass(frozen=True)
class EfficiencyParams:
    T_f: float = 0.2
    eta_0: float = 0.95
    eta_d: float = 0.28
    eta_a: float = 0.95

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not 0 <= v <= 1:
                raise ValueError(f"{f.name}={v} outside [0, 1]")


def postselection_probability(fidelity: float) -> float:
    """``F**2 + (1-F)**2``: acceptance probability for a two-component bit-flip mixture."""
    return fidelity ** 2 + (1 - fidelity) ** 2


def success_probability(n: int, eff: EfficiencyParams | None = None, *,
                        fidelity: float | None = None, mixture=None,
                        p_p: float | None = None,
                        per_photon_losses: bool = False) -> float:
    """Overall success probability for ``n`` parties.

    Exactly one of ``fidelity`` (binary bit-flip mixture), ``mixture``
    (a :class:`~ghzpurify.ghz.GhzMixture`; ``P_p = sum w_i**2``) or ``p_p``
    must be given.
    """
    if n < 2:
        raise ValueError("need at least two parties")
    given = [x is not None for x in (fidelity, mixture, p_p)]
    if sum(given) != 1:
        raise ValueError("give exactly one of fidelity=, mixture=, p_p=")
    if fidelity is not None:
        if not 0 <= fidelity <= 1:
            raise ValueError(f"fidelity {fidelity} outside [0, 1]")
        p_p = postselection_probability(fidelity)
    elif mixture is not None:
        p_p = float(np.sum(np.asarray(mixture.weights) ** 2))
    eff = EfficiencyParams() if eff is None else eff
    shared = eff.T_f * eff.eta_0
    if per_photon_losses:
        shared = shared ** n
    return p_p * shared * eff.eta_d ** n * eff.eta_a ** n


def default_physical_params(wavelength: float = RB87_D2_WAVELENGTH,
                            kappa: float = CAVITY_DECAY,
                            ) -> tuple[CavityParams, EfficiencyParams]:
    """87Rb D2 line in a fiber cavity, tuned to the ideal reflection point.

    ``gamma`` is 0: no atomic decay rate is available for this setup and
    the pure-phase regime assumes none.
    """
    omega_0 = 2 * math.pi * constants.c / wavelength
    cavity = CavityParams(omega_c=omega_0, omega_0=omega_0, omega_p=omega_0 - kappa / 2,
                          kappa=kappa, gamma=0.0, g=kappa / 2)
    return cavity, EfficiencyParams()


def quality_factor(p: CavityParams) -> float:
    """``Q = omega_c / (2 kappa)``."""
    return p.omega_c / (2 * p.kappa)
