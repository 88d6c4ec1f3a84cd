"""Photon reflection off a single-atom low-Q cavity.

The reflection coefficient of the coupled atom-cavity system and of the
empty cavity give the two phases a photon can pick up. A photon whose
polarization matches the atom's ground state (``L`` with ``g_L``, ``R`` with
``g_R``) sees the coupled phase; the mismatched combinations see the empty
cavity phase. Two such reflections in a row act as a parity check on two
atoms.

Frequencies are plain floats; rad/s or any unit shared by all six
parameters works, since only ratios enter.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import qsim
from .qsim import Kind, PureState, QubitLabel

UNIT_MODULUS_TOL = 1e-3
# Angles this close to -pi are reported as +pi. Detunings built from optical
# carrier frequencies carry rounding of order 1e-9 rad.
BRANCH_CUT_TOL = 1e-8


class SingularParametersError(ValueError):
    pass


class AbsorptionRegimeError(ValueError):
    pass


class AbsorptionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CavityParams:
    omega_c: float
    omega_0: float
    omega_p: float
    kappa: float
    gamma: float = 0.0
    g: float = 0.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.gamma < 0 or self.g < 0:
            raise ValueError("gamma and g must be non-negative")

    @classmethod
    def from_ratios(cls, cavity_detuning: float, atom_detuning: float, g: float,
                    gamma: float = 0.0, kappa: float = 1.0) -> CavityParams:
        """Build from detunings ``omega_c - omega_p`` and ``omega_0 - omega_p`` in units of ``kappa``."""
        return cls(omega_c=cavity_detuning * kappa, omega_0=atom_detuning * kappa,
                   omega_p=0.0, kappa=kappa, gamma=gamma * kappa, g=g * kappa)

    @classmethod
    def ideal(cls, kappa: float = 1.0, omega_c: float = 0.0) -> CavityParams:
        """``omega_c = omega_0``, ``omega_p = omega_c - kappa/2``, ``g = kappa/2``, ``gamma = 0``."""
        return cls(omega_c=omega_c, omega_0=omega_c, omega_p=omega_c - kappa / 2,
                   kappa=kappa, gamma=0.0, g=kappa / 2)


def reflection_coupled(p: CavityParams) -> complex:
    """Reflection coefficient ``r(omega_p)`` of the atom-cavity system."""
    cav = 1j * (p.omega_c - p.omega_p)
    at = 1j * (p.omega_0 - p.omega_p) + p.gamma / 2
    num = (cav - p.kappa / 2) * at + p.g ** 2
    den = (cav + p.kappa / 2) * at + p.g ** 2
    if abs(den) < 1e-300:
        raise SingularParametersError("reflection denominator vanishes")
    return complex(num / den)


def reflection_empty(p: CavityParams) -> complex:
    """Reflection coefficient of the cavity with no atom coupled (unit modulus)."""
    cav = 1j * (p.omega_c - p.omega_p)
    return complex((cav - p.kappa / 2) / (cav + p.kappa / 2))


def wrap_phase(x: float) -> float:
    """Map an angle into (-pi, pi]; values within BRANCH_CUT_TOL of -pi become +pi."""
    x = math.remainder(x, 2 * math.pi)
    if x <= -math.pi + BRANCH_CUT_TOL:
        return math.pi
    return min(x, math.pi)


@dataclass(frozen=True)
class FaradayPhases:
    theta: float
    theta_0: float
    rotation: float

    @classmethod
    def from_angles(cls, theta: float, theta_0: float) -> FaradayPhases:
        theta, theta_0 = wrap_phase(theta), wrap_phase(theta_0)
        return cls(theta, theta_0, (theta - theta_0) / 2)


def _check_modulus(r: complex, r0: complex, allow_absorption: bool) -> None:
    worst = max(abs(abs(r) - 1), abs(abs(r0) - 1))
    if worst <= UNIT_MODULUS_TOL:
        return
    msg = f"|r| deviates from 1 by {worst:.3g}; the photon is partly absorbed"
    if not allow_absorption:
        raise AbsorptionRegimeError(msg)
    warnings.warn(msg + "; keeping phases only", AbsorptionWarning, stacklevel=3)


def phases(p: CavityParams, allow_absorption: bool = False) -> FaradayPhases:
    r, r0 = reflection_coupled(p), reflection_empty(p)
    _check_modulus(r, r0, allow_absorption)
    return FaradayPhases.from_angles(np.angle(r), np.angle(r0))


@dataclass(frozen=True)
class SingleCavityGate:
    """Diagonal photon-atom gate.

    ``phases`` holds the four unit complex entries for
    ``|L>|g_L>, |L>|g_R>, |R>|g_L>, |R>|g_R>`` (photon is the high bit).
    """
    phases: tuple[complex, complex, complex, complex]

    def __post_init__(self):
        if len(self.phases) != 4:
            raise ValueError("a single-cavity gate has four diagonal entries")
        if any(abs(abs(z) - 1) > 1e-10 for z in self.phases):
            raise ValueError("gate entries must have unit modulus")

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(np.array(self.phases, dtype=complex))

    def phase(self, pol: int, atom_state: int) -> complex:
        return self.phases[2 * pol + atom_state]


IDEAL_GATE = SingleCavityGate((-1 + 0j, 1j, 1j, -1 + 0j))


def single_cavity_gate(p: CavityParams | None = None, *,
                       allow_absorption: bool = False) -> SingleCavityGate:
    """The photon-atom reflection gate; ``p=None`` gives the exact ideal-point gate."""
    if p is None:
        return IDEAL_GATE
    ph = phases(p, allow_absorption)
    coupled = complex(np.exp(1j * ph.theta))
    empty = complex(np.exp(1j * ph.theta_0))
    return SingleCavityGate((coupled, empty, empty, coupled))


def two_cavity_gate(gate: SingleCavityGate = IDEAL_GATE) -> np.ndarray:
    """8x8 diagonal unitary on (photon, atom 1, atom 2) for two successive reflections."""
    d = np.empty(8, dtype=complex)
    for pol in (0, 1):
        for a1 in (0, 1):
            for a2 in (0, 1):
                d[4 * pol + 2 * a1 + a2] = gate.phase(pol, a1) * gate.phase(pol, a2)
    return np.diag(d)


def two_cavity_action(s: qsim.State, photon: QubitLabel, atom_1: QubitLabel,
                      atom_2: QubitLabel,
                      gate: SingleCavityGate = IDEAL_GATE) -> qsim.State:
    """Send ``photon`` off the cavity of ``atom_1`` and then of ``atom_2``."""
    if photon.kind is not Kind.PHOTON or photon not in s.register:
        raise qsim.UnknownLabelError("the state holds no such photon")
    s = qsim.apply_local(gate.matrix, [photon, atom_1], s)
    return qsim.apply_local(gate.matrix, [photon, atom_2], s)


def plus_photon(party: int) -> PureState:
    """Photon prepared in ``(|L> + |R>)/sqrt2``."""
    return PureState((qsim.photon(party),), np.array([1, 1]) / np.sqrt(2))
