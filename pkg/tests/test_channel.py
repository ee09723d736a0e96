import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmc.channel import (
    BeamSplitterChannel,
    ChoiMatrix,
    beam_splitter_permutation,
    beam_splitter_unitary,
    choi_from_kraus,
    complement_identity_check,
    convolve,
    convolve_complement,
    degradation_witness,
    displace,
    iterate_convolution,
    phase_inversion,
    stinespring_isometry,
)
from qmc.linalg import frobenius_distance, partial_trace, von_neumann_entropy
from qmc.states import (
    DensityMatrix,
    preset_state,
    random_density_matrix,
    random_pure_state,
    stabilizer_family,
)
from qmc.weyl import (
    BSParams,
    QuditParams,
    WeylIndex,
    characteristic_function,
    random_clifford,
    weyl_operator,
    wigner_function,
)

P7 = QuditParams(7)
BS72 = BSParams(P7, 2, 2)
P13 = QuditParams(13)
BS13 = BSParams(P13, 2, 6)


def two_ket_mixture(params, kets):
    m = np.zeros((params.dim, params.dim), dtype=complex)
    for k in kets:
        m[k % params.dim, k % params.dim] = 1.0 / len(kets)
    return DensityMatrix(params, m)


class TestUnitary:
    def test_trivial_weights_give_identity(self):
        u = beam_splitter_unitary(BSParams(P7, 1, 0))
        assert np.array_equal(u, np.eye(49).astype(complex))

    def test_index_map_balanced(self):
        perm = beam_splitter_permutation(BS72)
        for i in range(7):
            for j in range(7):
                expected = ((2 * i + 2 * j) % 7) * 7 + ((-2 * i + 2 * j) % 7)
                assert perm[i * 7 + j] == expected

    def test_unitarity_all_d7_pairs(self):
        from qmc.weyl import valid_st_pairs

        for bs in valid_st_pairs(P7):
            u = beam_splitter_unitary(bs)
            assert np.array_equal(u @ u.conj().T, np.eye(49).astype(complex))

    def test_covariance_random_labels(self, rng):
        u = beam_splitter_unitary(BS72)
        for _ in range(6):
            pa, qa, pb, qb = (int(v) for v in rng.integers(0, 7, size=4))
            wa = weyl_operator(P7, WeylIndex.make(P7, pa, qa))
            wb = weyl_operator(P7, WeylIndex.make(P7, pb, qb))
            lhs = u @ np.kron(wa, wb) @ u.conj().T
            wa2 = weyl_operator(P7, WeylIndex.make(P7, 2 * pa + 2 * pb, 2 * qa + 2 * qb))
            wb2 = weyl_operator(P7, WeylIndex.make(P7, -2 * pa + 2 * pb, -2 * qa + 2 * qb))
            assert np.max(np.abs(lhs - np.kron(wa2, wb2))) <= 1e-12


class TestApply:
    def test_vacuum_in_vacuum_out(self):
        env = preset_state("ket-zero", P7)
        chan = BeamSplitterChannel(BS72, env)
        out = chan.apply(env)
        assert frobenius_distance(out, env) <= 1e-12

    def test_explicit_d13_instantiation(self):
        env = preset_state("uniform-01", P13)
        chan = BeamSplitterChannel(BS13, env)
        rho = two_ket_mixture(P13, [0, 9])
        out = chan.apply(rho)
        expected = two_ket_mixture(P13, [0, 6, 5, 11]).matrix
        assert frobenius_distance(out, expected) <= 1e-12
        comp = chan.apply_complement(rho)
        expected_comp = np.zeros((13, 13), dtype=complex)
        expected_comp[0, 0] = 0.5
        expected_comp[11, 11] = 0.25
        expected_comp[2, 2] = 0.25
        assert frobenius_distance(comp, expected_comp) <= 1e-12

    def test_weyl_covariance_of_channel(self, rng):
        env = random_density_matrix(P7, rng)
        chan = BeamSplitterChannel(BS72, env)
        rho = random_density_matrix(P7, rng)
        for _ in range(4):
            x = WeylIndex.make(P7, int(rng.integers(7)), int(rng.integers(7)))
            lhs = chan.apply(displace(rho, x))
            rhs = displace(chan.apply(rho), x.scale(2, 7))
            assert frobenius_distance(lhs, rhs) <= 1e-11

    def test_pure_global_state_balances_entropies(self, rng):
        env = random_pure_state(P7, rng)
        rho = random_pure_state(P7, rng)
        chan = BeamSplitterChannel(BS72, env)
        s_out = von_neumann_entropy(chan.apply(rho).matrix)
        s_comp = von_neumann_entropy(chan.apply_complement(rho).matrix)
        assert abs(s_out - s_comp) <= 1e-9

    def test_dimension_mismatch(self):
        env = preset_state("ket-zero", P7)
        chan = BeamSplitterChannel(BS72, env)
        with pytest.raises(ValueError, match="layout"):
            chan.apply(preset_state("ket-zero", P13))


class TestConvolution:
    def test_table_multiplication_rule(self, rng):
        rho = random_density_matrix(P7, rng)
        sig = random_density_matrix(P7, rng)
        out_table = characteristic_function(convolve(BS72, rho, sig))
        rt = characteristic_function(rho)
        st_ = characteristic_function(sig)
        worst = 0.0
        for p in range(7):
            for q in range(7):
                x = WeylIndex.make(P7, p, q)
                lhs = out_table.value(x)
                rhs = rt.value(x.scale(2, 7)) * st_.value(x.scale(2, 7))
                worst = max(worst, abs(lhs - rhs))
        assert worst <= 1e-10

    def test_complement_table_rule(self, rng):
        rho = random_density_matrix(P7, rng)
        sig = random_density_matrix(P7, rng)
        out_table = characteristic_function(convolve_complement(BS72, rho, sig))
        rt = characteristic_function(rho)
        st_ = characteristic_function(sig)
        for p in range(7):
            for q in range(7):
                x = WeylIndex.make(P7, p, q)
                lhs = out_table.value(x)
                rhs = rt.value(x.scale(-2, 7)) * st_.value(x.scale(2, 7))
                assert abs(lhs - rhs) <= 1e-10

    def test_stabilizer_closure(self, rng):
        family = stabilizer_family(P7)
        for _ in range(12):
            i, j = rng.integers(0, len(family), size=2)
            out = convolve(BS72, family.state_at(int(i)), family.state_at(int(j)))
            _, dist = family.nearest_member_distance(out)
            assert dist <= 1e-9

    def test_balanced_convolution_has_nonnegative_wigner(self, rng):
        rho = random_density_matrix(P7, rng)
        sig = random_density_matrix(P7, rng)
        out = convolve(BS72, rho, sig)
        assert wigner_function(out).min() >= -1e-10

    def test_entropy_growth(self, rng):
        for _ in range(5):
            rho = random_density_matrix(P7, rng)
            sig = random_density_matrix(P7, rng)
            s_rho = von_neumann_entropy(rho.matrix)
            s_sig = von_neumann_entropy(sig.matrix)
            assert von_neumann_entropy(convolve(BS72, rho, sig).matrix) >= max(s_rho, s_sig) - 1e-9
            assert von_neumann_entropy(convolve_complement(BS72, rho, sig).matrix) >= s_sig - 1e-9

    def test_clifford_compatibility_spectra(self, rng):
        u = random_clifford(P7, seed=31)
        rho = random_density_matrix(P7, rng)
        sig = random_density_matrix(P7, rng)
        plain = np.linalg.eigvalsh(convolve(BS72, rho, sig).matrix)
        rotated = np.linalg.eigvalsh(
            convolve(BS72, rho.conjugated(u), sig.conjugated(u)).matrix
        )
        assert np.max(np.abs(plain - rotated)) <= 1e-9


class TestIterateConvolution:
    def test_zero_mean_stabilizer_is_fixed_point(self):
        # exact fixed points are the zero-mean members (characteristic values
        # in {0, 1}); displaced members wander through the family instead
        family = stabilizer_family(P7)
        for idx, member in enumerate(family.members):
            if all(abs(char - 1.0) <= 1e-12 for _, char in member.generators):
                trace = iterate_convolution(BS72, family.state_at(idx), 10)
                assert all(dist <= 1e-12 for _, dist in trace)

    def test_displaced_stabilizer_stays_in_family(self):
        family = stabilizer_family(P7)
        state = family.state_at(3)  # character is a nontrivial root of unity
        out = state
        for _ in range(3):
            out = convolve(BS72, out, state)
            _, dist = family.nearest_member_distance(out)
            assert dist <= 1e-9

    def test_uniform_01_respects_contraction_bound(self):
        rho = preset_state("uniform-01", P7)
        mags = np.abs(characteristic_function(rho).values)
        m_star = mags[mags < 1.0 - 1e-9].max()
        assert m_star == pytest.approx(math.cos(math.pi / 7), abs=1e-12)
        trace = iterate_convolution(BS72, rho, 20)
        assert trace[-1][1] <= m_star**20 + 1e-12
        for step, dist in trace:
            assert dist <= m_star**step + 1e-12

    def test_random_state_contracts_below_threshold(self, rng):
        rho = random_density_matrix(P7, rng)
        trace = iterate_convolution(BS72, rho, 80)
        dists = [dist for _, dist in trace]
        assert all(b <= a + 1e-12 for a, b in zip(dists, dists[1:]))
        crossing = next(i for i, d in enumerate(dists) if d <= 1e-9)
        assert all(b < a for a, b in zip(dists[:crossing], dists[1 : crossing + 1]))


class TestChoi:
    def test_identity_channel_choi_is_entangled_projector(self):
        chan = BeamSplitterChannel(BSParams(P7, 1, 0), preset_state("ket-zero", P7))
        choi = chan.choi()
        phi = np.eye(7, dtype=complex).reshape(-1) / math.sqrt(7)
        assert frobenius_distance(choi.matrix, np.outer(phi, phi.conj())) <= 1e-12

    def test_random_environments_are_cptp(self, rng):
        for _ in range(50):
            env = random_density_matrix(P7, rng)
            chan = BeamSplitterChannel(BS72, env)
            chan.choi()  # constructor validates PSD and trace preservation
            chan.choi(complement=True)

    def test_complement_matches_stinespring_route(self, rng):
        env = random_pure_state(P7, rng)
        chan = BeamSplitterChannel(BS72, env)
        v = stinespring_isometry(chan)
        assert np.max(np.abs(v.conj().T @ v - np.eye(7))) <= 1e-12
        kraus = [v.reshape(7, 7, 7)[a] for a in range(7)]  # <a|_out-A blocks on B
        via_kraus = choi_from_kraus(kraus, 7)
        direct = chan.choi(complement=True)
        assert frobenius_distance(via_kraus.matrix, direct.matrix) <= 1e-11

    def test_choi_validation_rejects_bad_matrix(self):
        with pytest.raises(ValueError, match="negative"):
            ChoiMatrix(2, 2, -np.eye(4))


class TestComplementIdentity:
    def test_random_environments_d7(self, rng):
        for _ in range(5):
            rep = complement_identity_check(BS72, random_density_matrix(P7, rng))
            assert rep.passed, rep.frobenius_distance

    def test_random_environments_d13(self, rng):
        rep = complement_identity_check(BS13, random_density_matrix(P13, rng))
        assert rep.passed

    def test_maximally_mixed_environment(self):
        rep = complement_identity_check(BS72, preset_state("maximally-mixed", P7))
        assert rep.passed


class TestDegradationWitness:
    def test_symmetric_two_ket(self):
        rep = degradation_witness(BS72, preset_state("symmetric-pm1", P7))
        assert rep.passed and rep.degradable and rep.anti_degradable

    def test_zero_mean_stabilizer(self):
        rep = degradation_witness(BS72, preset_state("ket-zero", P7))
        assert rep.passed

    def test_displaced_symmetric_state(self):
        shift = WeylIndex.make(P7, 1, 0)
        env = displace(preset_state("symmetric-pm1", P7), shift)
        rep = degradation_witness(BS72, env, displacement=shift)
        assert rep.passed

    def test_unbalanced_weights_rejected(self):
        with pytest.raises(ValueError, match="differ mod"):
            degradation_witness(BSParams(P7, 2, 5), preset_state("symmetric-pm1", P7))

    def test_asymmetric_environment_rejected(self):
        with pytest.raises(ValueError, match="parity symmetric"):
            degradation_witness(BS72, preset_state("uniform-01", P7))


class TestPhaseInversionMap:
    def test_involution(self, rng):
        rho = random_density_matrix(P7, rng)
        assert frobenius_distance(phase_inversion(phase_inversion(rho)), rho) <= 1e-12

    @given(st.integers(0, 10**6))
    @settings(max_examples=10)
    def test_duality_through_parity(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_density_matrix(P7, rng)
        table = characteristic_function(rho)
        flipped = characteristic_function(phase_inversion(rho))
        for p, q in ((1, 0), (0, 1), (3, 5)):
            x = WeylIndex.make(P7, p, q)
            assert flipped.value(x) == pytest.approx(table.value(x.neg(7)), abs=1e-11)
