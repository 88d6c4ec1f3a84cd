import itertools
import math
import time
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ghzpurify import faraday, qsim
from ghzpurify.faraday import CavityParams
from ghzpurify.qsim import Basis, Copy, atom, photon

S2 = 1 / np.sqrt(2)
IDEAL = CavityParams.ideal()

# Single-cavity phases written out by hand: |L>|g_L> -> -1, |L>|g_R> -> i,
# |R>|g_L> -> i, |R>|g_R> -> -1.
EQ6 = {("L", "L"): -1, ("L", "R"): 1j, ("R", "L"): 1j, ("R", "R"): -1}


class TestReflection:
    def test_ideal_point(self):
        assert faraday.reflection_coupled(IDEAL) == pytest.approx(-1, abs=1e-15)
        assert faraday.reflection_empty(IDEAL) == pytest.approx(1j, abs=1e-15)

    def test_resonant_empty_cavity(self):
        p = CavityParams(omega_c=0, omega_0=0, omega_p=0, kappa=1)
        assert faraday.reflection_empty(p) == pytest.approx(-1)

    def test_overdamped_limit(self):
        p = CavityParams(omega_c=1.0, omega_0=0, omega_p=0, kappa=1e9)
        assert faraday.reflection_empty(p) == pytest.approx(-1, abs=1e-8)

    def test_g_zero_equals_empty(self):
        p = CavityParams.from_ratios(0.3, -0.7, g=0.0, gamma=0.2)
        assert faraday.reflection_coupled(p) == pytest.approx(faraday.reflection_empty(p), abs=1e-15)

    def test_resonant_strong_coupling_unit_modulus(self):
        # kappa=1, gamma=0, g=0.5, all frequencies equal: numerator g^2 = 0.25,
        # denominator (0.5)(0) + 0.25 -> r = 1
        p = CavityParams(omega_c=0, omega_0=0, omega_p=0, kappa=1, g=0.5)
        assert faraday.reflection_coupled(p) == pytest.approx(1, abs=1e-15)

    def test_singular(self):
        # den = (i*0 + 1/2)(i*0 + 0) + 0 = 0
        p = CavityParams(omega_c=0, omega_0=0, omega_p=0, kappa=1)
        with pytest.raises(faraday.SingularParametersError):
            faraday.reflection_coupled(p)

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            CavityParams(0, 0, 0, kappa=0)
        with pytest.raises(ValueError):
            CavityParams(0, 0, 0, kappa=1, gamma=-1)


finite = st.floats(-50, 50, allow_nan=False)


@given(finite, finite, st.floats(0, 20), st.floats(0.01, 20))
def test_empty_cavity_unit_modulus(dc, d0, g, kappa):
    p = CavityParams.from_ratios(dc, d0, g, kappa=kappa)
    assert abs(abs(faraday.reflection_empty(p)) - 1) < 1e-12


@given(finite, finite.filter(lambda x: abs(x) > 1e-3), st.floats(0, 20))
def test_coupled_unit_modulus_without_decay(dc, d0, g):
    p = CavityParams.from_ratios(dc, d0, g)
    assert abs(abs(faraday.reflection_coupled(p)) - 1) < 1e-12


class TestPhases:
    def test_ideal_point(self):
        ph = faraday.phases(IDEAL)
        assert ph.theta == pytest.approx(math.pi, abs=1e-10)
        assert ph.theta_0 == pytest.approx(math.pi / 2, abs=1e-10)
        assert ph.rotation == pytest.approx(math.pi / 4, abs=1e-10)

    def test_theta_reported_as_plus_pi(self):
        assert faraday.phases(IDEAL).theta > 0

    def test_wrap_range(self):
        for x in np.linspace(-10, 10, 101):
            w = faraday.wrap_phase(x)
            assert -math.pi < w <= math.pi
            assert math.isclose(math.cos(w), math.cos(x), abs_tol=1e-12)
        assert faraday.wrap_phase(-math.pi) == math.pi
        assert faraday.wrap_phase(-math.pi + 1e-9) == math.pi
        assert faraday.wrap_phase(-math.pi + 1e-6) == pytest.approx(-math.pi + 1e-6)

    def test_rotation_is_stored_half_difference(self):
        ph = faraday.phases(CavityParams.from_ratios(0.2, 0.9, 0.4))
        assert ph.rotation == (ph.theta - ph.theta_0) / 2

    def test_no_atom_no_rotation(self):
        ph = faraday.phases(CavityParams.from_ratios(0.5, 0.1, 0.0))
        assert ph.theta == ph.theta_0
        assert ph.rotation == 0

    def test_continuity_near_ideal(self):
        # finite differences in g around kappa/2 shrink linearly with the step;
        # theta sits on the branch cut, so compare angles on the circle
        base = faraday.phases(IDEAL)
        diffs = []
        for h in (1e-2, 1e-3, 1e-4):
            p = CavityParams(omega_c=0, omega_0=0, omega_p=-0.5, kappa=1, g=0.5 + h)
            ph = faraday.phases(p)
            diffs.append(abs(faraday.wrap_phase(ph.theta - base.theta))
                         + abs(faraday.wrap_phase(ph.theta_0 - base.theta_0)))
        assert diffs[0] > 0
        assert diffs[1] / diffs[0] == pytest.approx(0.1, rel=0.05)
        assert diffs[2] / diffs[1] == pytest.approx(0.1, rel=0.05)

    def test_absorption_rejected(self):
        p = CavityParams(omega_c=0, omega_0=0, omega_p=-0.5, kappa=1, g=0.5, gamma=0.3)
        with pytest.raises(faraday.AbsorptionRegimeError):
            faraday.phases(p)
        with pytest.warns(faraday.AbsorptionWarning):
            faraday.phases(p, allow_absorption=True)

    def test_weak_absorption_tolerated(self):
        p = CavityParams(omega_c=0, omega_0=0, omega_p=-0.5, kappa=1, g=0.5, gamma=1e-4)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            faraday.phases(p)

    def test_physical_units(self):
        from ghzpurify.resources import default_physical_params
        cav, _ = default_physical_params()
        ph = faraday.phases(cav)
        # optical carrier ~2.4e15 rad/s against kappa ~3.3e8: rounding at 1e-8
        assert ph.theta == pytest.approx(math.pi, abs=1e-8)
        assert ph.theta_0 == pytest.approx(math.pi / 2, abs=1e-8)
        assert ph.rotation == pytest.approx(math.pi / 4, abs=1e-8)


class TestSingleCavityGate:
    def test_ideal_entries(self):
        gate = faraday.single_cavity_gate()
        for (pol, at), z in EQ6.items():
            assert gate.phase("LR".index(pol), "LR".index(at)) == z

    def test_parameterized_matches_ideal(self):
        gate = faraday.single_cavity_gate(IDEAL)
        np.testing.assert_allclose(gate.phases, faraday.IDEAL_GATE.phases, atol=1e-15)

    def test_twice_is_identity_on_coupled(self):
        m = faraday.IDEAL_GATE.matrix
        assert (m @ m)[0, 0] == 1

    def test_mismatched_entries_share_empty_phase(self):
        p = CavityParams.from_ratios(0.1, 0.3, 0.6)
        gate = faraday.single_cavity_gate(p)
        ph = faraday.phases(p)
        assert gate.phases[1] == gate.phases[2] == pytest.approx(np.exp(1j * ph.theta_0))
        assert gate.phases[0] == gate.phases[3] == pytest.approx(np.exp(1j * ph.theta))

    def test_unit_modulus_enforced(self):
        with pytest.raises(ValueError):
            faraday.SingleCavityGate((1, 1, 1, 0.5))

    def test_absorptive_gate_needs_override(self):
        p = CavityParams(omega_c=0, omega_0=0, omega_p=-0.5, kappa=1, g=0.5, gamma=0.3)
        with pytest.raises(faraday.AbsorptionRegimeError):
            faraday.single_cavity_gate(p)


def eq7_oracle(pol: str, a1: str, a2: str) -> complex:
    return EQ6[(pol, a1)] * EQ6[(pol, a2)]


class TestTwoCavity:
    @pytest.mark.parametrize("pol,a1,a2", list(itertools.product("LR", repeat=3)))
    def test_eight_rows(self, pol, a1, a2):
        bits = "".join("01"["LR".index(c)] for c in (pol, a1, a2))
        reg = (photon(0), atom(0), atom(0, Copy.SECOND))
        s = qsim.basis_state(reg, bits)
        out = faraday.two_cavity_action(s, *reg)
        expected = np.zeros(8, complex)
        expected[int(bits, 2)] = eq7_oracle(pol, a1, a2)
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-15)

    def test_table_values(self):
        d = np.diag(faraday.two_cavity_gate())
        # L: LL +1, LR -i, RL -i, RR -1 ; R: LL -1, LR -i, RL -i, RR +1
        np.testing.assert_allclose(d, [1, -1j, -1j, -1, -1, -1j, -1j, 1], atol=1e-15)

    @pytest.mark.parametrize("atoms,flipped", [("00", True), ("11", True),
                                               ("01", False), ("10", False)])
    def test_parity_check(self, atoms, flipped):
        reg_atoms = [atom(0), atom(0, Copy.SECOND)]
        s = qsim.tensor(faraday.plus_photon(0), qsim.basis_state(reg_atoms, atoms))
        out = faraday.two_cavity_action(s, photon(0), *reg_atoms)
        photon_amps = out.amplitudes.reshape(2, 4)[:, int(atoms, 2)]
        if flipped:
            sign = photon_amps[0] / S2
            np.testing.assert_allclose(photon_amps, sign * np.array([S2, -S2]), atol=1e-12)
        else:
            np.testing.assert_allclose(photon_amps, -1j * np.array([S2, S2]), atol=1e-12)
        p = qsim.outcome_probabilities(out, [photon(0)], Basis.DIAGONAL)
        assert p[1 if flipped else 0] == pytest.approx(1, abs=1e-12)

    def test_equals_sequential_single_gates(self, rng):
        reg = (photon(0), atom(0), atom(1), atom(0, Copy.SECOND))
        v = rng.normal(size=16) + 1j * rng.normal(size=16)
        s = qsim.PureState(reg, v / np.linalg.norm(v))
        gate = faraday.single_cavity_gate(CavityParams.from_ratios(0.4, 0.2, 0.45))
        seq = qsim.apply_local(gate.matrix, [photon(0), atom(0, Copy.SECOND)],
                               qsim.apply_local(gate.matrix, [photon(0), atom(0)], s))
        out = faraday.two_cavity_action(s, photon(0), atom(0), atom(0, Copy.SECOND), gate)
        np.testing.assert_allclose(out.amplitudes, seq.amplitudes, atol=1e-12)

    def test_atoms_unchanged(self, rng):
        reg = (photon(0), atom(0), atom(0, Copy.SECOND))
        s = qsim.tensor(faraday.plus_photon(0),
                        qsim.basis_state(reg[1:], "10"))
        out = faraday.two_cavity_action(s, *reg)
        probs = qsim.outcome_probabilities(out, list(reg[1:]))
        np.testing.assert_allclose(probs, [0, 0, 1, 0], atol=1e-15)

    def test_photon_required(self):
        s = qsim.basis_state([atom(0), atom(1)], "00")
        with pytest.raises(qsim.UnknownLabelError):
            faraday.two_cavity_action(s, photon(0), atom(0), atom(1))


def test_phases_fast():
    best = min(_timed(lambda: faraday.phases(IDEAL)) for _ in range(50))
    assert best < 1e-3


def _timed(f):
    t = time.perf_counter()
    f()
    return time.perf_counter() - t
