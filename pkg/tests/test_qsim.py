import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import unitary_group

from ghzpurify import faraday, ghz, qsim
from ghzpurify.qsim import Basis, Copy, DensityMatrix, PureState, atom, photon

S2 = 1 / np.sqrt(2)


def bell() -> PureState:
    return PureState((atom(0), atom(1)), [S2, 0, 0, S2])


def random_pure(register, rng) -> PureState:
    v = rng.normal(size=2 ** len(register)) + 1j * rng.normal(size=2 ** len(register))
    return PureState(tuple(register), v / np.linalg.norm(v))


def random_density(register, rng, rank=3) -> DensityMatrix:
    p = rng.dirichlet(np.ones(rank))
    return qsim.mix((pi, random_pure(register, rng)) for pi in p)


class TestTensor:
    def test_product_basis_state(self):
        s = qsim.tensor(qsim.basis_state([atom(0)], "0"), qsim.basis_state([atom(1)], "1"))
        assert s.register == (atom(0), atom(1))
        np.testing.assert_array_equal(s.amplitudes, [0, 1, 0, 0])

    def test_separable_with_photon(self):
        a = PureState((atom(0),), [S2, S2])
        s = qsim.tensor(a, qsim.basis_state([photon(0)], "0"))
        np.testing.assert_allclose(s.amplitudes, [S2, 0, S2, 0], atol=1e-15)

    def test_two_ghz_copies_expand_to_four_terms(self):
        # |000>+|111> times |000>+|111>, register a1 b1 c1 a2 b2 c2
        s = qsim.tensor(ghz.ghz_state(ghz.phi(0)), ghz.ghz_state(ghz.phi(0), copy=Copy.SECOND))
        expected = np.zeros(64)
        for bits in ("000000", "111111", "000111", "111000"):
            expected[int(bits, 2)] = 0.5
        np.testing.assert_allclose(s.amplitudes, expected, atol=1e-15)

    def test_label_collision(self):
        with pytest.raises(qsim.LabelCollisionError):
            qsim.tensor(bell(), bell())

    def test_second_photon_rejected(self):
        p = faraday.plus_photon(0)
        with pytest.raises(qsim.QsimError):
            qsim.tensor(p, faraday.plus_photon(1))

    def test_register_limit(self):
        regs = [qsim.basis_state([atom(k)], "0") for k in range(17)]
        s = regs[0]
        with pytest.raises(qsim.RegisterOverflowError):
            for r in regs[1:]:
                s = qsim.tensor(s, r)


class TestApplyLocal:
    def test_identity(self, rng):
        s = random_pure([atom(0), atom(1)], rng)
        out = qsim.apply_local(np.eye(2), [atom(1)], s)
        np.testing.assert_allclose(out.amplitudes, s.amplitudes)

    def test_hadamard_on_gL(self):
        out = qsim.apply_local(qsim.HADAMARD, [atom(0)], qsim.basis_state([atom(0)], "0"))
        np.testing.assert_allclose(out.amplitudes, [S2, S2], atol=1e-15)

    def test_phase_flip_on_bell(self):
        out = qsim.apply_local(qsim.PAULI_Z, [atom(1)], bell())
        np.testing.assert_allclose(out.amplitudes, [S2, 0, 0, -S2], atol=1e-15)

    def test_target_order_matters(self):
        cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
        s = qsim.basis_state([atom(0), atom(1)], "10")
        assert qsim.apply_local(cnot, [atom(0), atom(1)], s).amplitudes[3] == 1
        assert qsim.apply_local(cnot, [atom(1), atom(0)], s).amplitudes[2] == 1

    def test_non_unitary_rejected(self):
        with pytest.raises(qsim.NonUnitaryError):
            qsim.apply_local(np.diag([1, 0.5]), [atom(0)], bell())

    def test_unknown_label(self):
        with pytest.raises(qsim.UnknownLabelError):
            qsim.apply_local(qsim.PAULI_X, [atom(2)], bell())

    def test_matches_full_kron_operator(self, rng):
        reg = [atom(0), atom(1), atom(2)]
        s = random_pure(reg, rng)
        u = unitary_group.rvs(2, random_state=1)
        full = np.kron(np.kron(np.eye(2), u), np.eye(2))
        out = qsim.apply_local(u, [atom(1)], s)
        np.testing.assert_allclose(out.amplitudes, full @ s.amplitudes, atol=1e-13)


class TestMeasure:
    def test_certain_outcome(self):
        rec, post = qsim.measure(qsim.basis_state([atom(0), atom(1)], "01"), [atom(0)],
                                 outcome="0")
        assert rec.probability == pytest.approx(1)
        np.testing.assert_allclose(post.amplitudes, [0, 1])

    def test_bell_marginal(self):
        rec, post = qsim.measure(bell(), [atom(0)], outcome="0")
        assert rec.probability == pytest.approx(0.5, abs=1e-12)
        assert post.register == (atom(1),)
        np.testing.assert_allclose(post.amplitudes, [1, 0], atol=1e-15)

    def test_impossible_branch(self):
        with pytest.raises(qsim.ImpossibleBranchError):
            qsim.measure(qsim.basis_state([atom(0)], "0"), [atom(0)], outcome="1")

    def test_even_parity_flips_photon(self):
        # photon (|L>+|R>)/sqrt2 after two reflections off |g_L g_L>
        s = qsim.tensor(faraday.plus_photon(0), qsim.basis_state([atom(0), atom(0, Copy.SECOND)], "00"))
        s = faraday.two_cavity_action(s, photon(0), atom(0), atom(0, Copy.SECOND))
        probs = qsim.outcome_probabilities(s, [photon(0)], Basis.DIAGONAL)
        np.testing.assert_allclose(probs, [0, 1], atol=1e-15)

    def test_sampling_is_seeded(self):
        reg = [atom(0), atom(1), atom(2)]
        s = random_pure(reg, np.random.default_rng(3))
        a = [qsim.measure(s, reg, rng=np.random.default_rng(9))[0].outcomes for _ in range(3)]
        assert len(set(a)) == 1

    def test_sampled_frequencies(self):
        s = PureState((atom(0),), [np.sqrt(0.3), np.sqrt(0.7)])
        g = np.random.default_rng(1)
        ones = sum(qsim.measure(s, [atom(0)], rng=g)[0].outcomes == "1" for _ in range(4000))
        assert abs(ones / 4000 - 0.7) < 4 * np.sqrt(0.21 / 4000)

    def test_density_matches_pure(self, rng):
        reg = [atom(0), atom(1), atom(2)]
        s = random_pure(reg, rng)
        for outcome in ("00", "01", "10", "11"):
            rp, pp = qsim.measure(s, [atom(2), atom(0)], Basis.DIAGONAL, outcome=outcome)
            rd, pd = qsim.measure(s.to_density(), [atom(2), atom(0)], Basis.DIAGONAL,
                                  outcome=outcome)
            assert rp.probability == pytest.approx(rd.probability, abs=1e-12)
            np.testing.assert_allclose(pd.matrix, pp.to_density().matrix, atol=1e-12)

    def test_probabilities_in_target_order(self):
        s = qsim.basis_state([atom(0), atom(1), atom(2)], "001")
        p = qsim.outcome_probabilities(s, [atom(2), atom(0)])
        np.testing.assert_allclose(p, [0, 0, 1, 0])


class TestPartialTrace:
    def test_product_state(self, rng):
        a = random_density([atom(0)], rng, rank=2)
        b = random_density([atom(1)], rng, rank=2)
        red = qsim.partial_trace([atom(0)], qsim.tensor(a, b))
        np.testing.assert_allclose(red.matrix, a.matrix, atol=1e-13)

    def test_bell_marginal_is_maximally_mixed(self):
        red = qsim.partial_trace([atom(1)], bell())
        np.testing.assert_allclose(red.matrix, np.eye(2) / 2, atol=1e-15)

    def test_accepted_six_atom_state(self):
        # (|000000> + |111111>)/sqrt2 over a1 b1 c1 a2 b2 c2: dropping copy 2
        # leaves the classical mixture of |000> and |111>, fidelity 1/2 with GHZ
        reg = qsim.atoms(3) + qsim.atoms(3, Copy.SECOND)
        amps = np.zeros(64)
        amps[0] = amps[63] = S2
        red = qsim.partial_trace(qsim.atoms(3), PureState(reg, amps))
        expected = np.zeros((8, 8))
        expected[0, 0] = expected[7, 7] = 0.5
        np.testing.assert_allclose(red.matrix, expected, atol=1e-15)
        assert qsim.fidelity(red, ghz.ghz_state(ghz.phi(0))) == pytest.approx(0.5)

    def test_keep_all_is_identity(self, rng):
        d = random_density([atom(0), atom(1)], rng)
        np.testing.assert_allclose(qsim.partial_trace(d.register, d).matrix, d.matrix)

    def test_keep_order(self, rng):
        a = random_density([atom(0)], rng, rank=2)
        b = random_density([atom(1)], rng, rank=2)
        red = qsim.partial_trace([atom(1), atom(0)], qsim.tensor(a, b))
        np.testing.assert_allclose(red.matrix, np.kron(b.matrix, a.matrix), atol=1e-13)

    def test_empty_keep(self):
        with pytest.raises(qsim.QsimError):
            qsim.partial_trace([], bell())


class TestFidelity:
    def test_self(self, rng):
        s = random_pure([atom(0), atom(1)], rng)
        assert qsim.fidelity(s.to_density(), s) == pytest.approx(1, abs=1e-12)

    def test_maximally_mixed(self):
        d = DensityMatrix(qsim.atoms(3), np.eye(8) / 8)
        assert qsim.fidelity(d, ghz.ghz_state(ghz.phi(0))) == pytest.approx(0.125)

    def test_shape_mismatch(self):
        with pytest.raises(qsim.QsimError):
            qsim.fidelity(bell().to_density(), ghz.ghz_state(ghz.phi(0)))


class TestDump:
    def test_round_trip_pure(self, rng, tmp_path):
        s = random_pure([atom(0), photon(0)], rng)
        qsim.dump(s, tmp_path / "s.tsv")
        back = qsim.load(tmp_path / "s.tsv", s.register)
        np.testing.assert_array_equal(back.amplitudes, s.amplitudes)

    def test_format(self):
        text = qsim.dumps(PureState((atom(0),), [1, 0]))
        assert text == "0\t1.0\t0.0\n1\t0.0\t0.0\n"

    def test_round_trip_density(self, rng):
        d = random_density([atom(0), atom(1)], rng)
        back = qsim.loads(qsim.dumps(d), d.register, density=True)
        np.testing.assert_array_equal(back.matrix, d.matrix)


seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


@given(seeds, st.integers(1, 3))
def test_unitary_preserves_norm_and_trace(seed, k):
    g = np.random.default_rng(seed)
    reg = qsim.atoms(4)
    targets = list(g.permutation(reg)[:k])
    u = unitary_group.rvs(2 ** k, random_state=seed)
    s = random_pure(reg, g)
    d = random_density(reg, g)
    assert abs(qsim.apply_local(u, targets, s).norm - 1) < 1e-12
    assert abs(qsim.apply_local(u, targets, d).trace - 1) < 1e-12


@given(seeds)
def test_inverse_undoes(seed):
    g = np.random.default_rng(seed)
    reg = qsim.atoms(3)
    targets = list(g.permutation(reg)[:2])
    u = unitary_group.rvs(4, random_state=seed)
    d = random_density(reg, g)
    back = qsim.apply_local(u.conj().T, targets, qsim.apply_local(u, targets, d))
    np.testing.assert_allclose(back.matrix, d.matrix, atol=1e-10)


@given(seeds)
def test_branch_probabilities_sum_to_one(seed):
    g = np.random.default_rng(seed)
    reg = qsim.atoms(3)
    d = random_density(reg, g)
    total = 0.0
    for bits in ("00", "01", "10", "11"):
        try:
            total += qsim.measure(d, reg[:2], Basis.DIAGONAL, outcome=bits)[0].probability
        except qsim.ImpossibleBranchError:
            pass
    assert abs(total - 1) < 1e-10


@given(seeds)
def test_density_path_equals_ensemble_path(seed):
    g = np.random.default_rng(seed)
    reg = qsim.atoms(3)
    members = [random_pure(reg, g) for _ in range(3)]
    p = g.dirichlet(np.ones(3))
    u = unitary_group.rvs(4, random_state=seed)
    targets = [reg[2], reg[0]]
    mixed_then_evolved = qsim.apply_local(u, targets, qsim.mix(zip(p, members)))
    evolved_then_mixed = qsim.mix((pi, qsim.apply_local(u, targets, m))
                                  for pi, m in zip(p, members))
    np.testing.assert_allclose(mixed_then_evolved.matrix, evolved_then_mixed.matrix, atol=1e-10)
