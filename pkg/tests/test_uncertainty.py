import math

import numpy as np
import pytest

from hsparse import (BlockDictionary, BlockVector, NumericalAnomaly,
                     concentration_epsilon, fourier_basis, gup_audit,
                     identity_basis, identity_dft_pair, kernel_sample,
                     kernel_uncertainty_audit, mutual_hilbert_coherence,
                     picket_fence, random_block_dictionary, uniform_structure)


class TestKernelSample:
    def test_injective_dictionary_rejected(self):
        D = identity_basis(4)
        with pytest.raises(ValueError, match="trivial kernel"):
            kernel_sample(D, 0)

    def test_sample_lies_in_kernel(self):
        D = identity_dft_pair(8)
        v = kernel_sample(D, 5)
        assert v.norm() == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(D.matrix @ v.entries) <= 1e-10

    def test_deterministic_per_seed(self):
        D = identity_dft_pair(8)
        assert np.array_equal(kernel_sample(D, 3).entries,
                              kernel_sample(D, 3).entries)
        assert not np.array_equal(kernel_sample(D, 3).entries,
                                  kernel_sample(D, 4).entries)


class TestKernelAudit:
    def test_spark_witness_profile_entry(self):
        # [I|F] at n=4: a kernel vector supported on 4 blocks exists; for
        # k = 4 its best set is its support, epsilon 0, bound (1)(1+2) = 3.
        D = identity_dft_pair(4)
        comb = np.zeros(4, dtype=complex)
        comb[::2] = 1.0
        f = D.matrix[:, 4:]
        v = BlockVector(np.concatenate([comb, -(f.conj().T @ comb)]), D.structure)
        assert np.linalg.norm(D.matrix @ v.entries) <= 1e-12
        profile = kernel_uncertainty_audit(D, v)
        row = profile[3]
        assert row.k == 4
        assert row.epsilon == pytest.approx(0.0, abs=1e-12)
        assert row.bound == pytest.approx(3.0, abs=1e-9)
        assert row.holds

    def test_full_profile_holds_for_sampled_kernels(self):
        D = identity_dft_pair(8)
        for seed in range(20):
            profile = kernel_uncertainty_audit(D, kernel_sample(D, seed))
            assert len(profile) == 16
            assert all(row.holds for row in profile)

    def test_holds_on_random_fat_dictionaries(self):
        for seed in range(5):
            D = random_block_dictionary(6, (2,) * 6, seed)   # 12 cols, 6 rows
            for draw in range(10):
                profile = kernel_uncertainty_audit(D, kernel_sample(D, draw))
                assert all(row.holds for row in profile)

    def test_non_kernel_vector_rejected(self):
        D = identity_dft_pair(4)
        v = BlockVector(np.ones(8), D.structure)
        with pytest.raises(ValueError, match="not a kernel vector"):
            kernel_uncertainty_audit(D, v)

    def test_zero_vector_rejected(self):
        D = identity_dft_pair(4)
        with pytest.raises(ValueError, match="zero vector"):
            kernel_uncertainty_audit(D, BlockVector(np.zeros(8), D.structure))


class TestGupAudit:
    def test_self_representation_in_identity(self):
        I4 = identity_basis(4)
        u = BlockVector(np.array([1.0, 0, 2.0, 0]), I4.structure)
        audit = gup_audit(I4, I4, u, u, (0, 2), (0, 2))
        assert audit.mu_phi == pytest.approx(0.0, abs=1e-14)
        assert audit.mu_mutual == pytest.approx(1.0, abs=1e-12)
        assert audit.rhs == pytest.approx(1.0, abs=1e-9)
        assert audit.lhs == 4
        assert audit.holds

    def test_two_orthonormal_bases_reduce_to_inverse_square(self):
        n = 16
        I, F = identity_basis(n), fourier_basis(n)
        u, v, U, V = picket_fence(n)
        audit = gup_audit(I, F, u, v, U, V)
        mu = mutual_hilbert_coherence(I, F)
        assert audit.eps_u == pytest.approx(0.0, abs=1e-12)
        assert audit.rhs == pytest.approx(1.0 / mu**2, abs=1e-12 / mu**2)

    @pytest.mark.parametrize("n", [4, 9, 16, 25])
    def test_picket_fence_achieves_equality(self, n):
        I, F = identity_basis(n), fourier_basis(n)
        u, v, U, V = picket_fence(n)
        audit = gup_audit(I, F, u, v, U, V)
        assert audit.lhs == n
        assert audit.rhs == pytest.approx(n, abs=1e-9)
        assert abs(audit.slack) <= 1e-9
        assert audit.holds

    def test_epsilons_recomputed_from_sets(self):
        I4 = identity_basis(4)
        u = BlockVector(np.array([3.0, 1.0, 0, 0]), I4.structure)
        audit = gup_audit(I4, I4, u, u, (1,), (0, 1))
        assert audit.eps_u == pytest.approx(concentration_epsilon(u, (1,)))
        assert audit.eps_u == pytest.approx(0.75)
        assert audit.eps_v == pytest.approx(0.0)

    def test_slack_weakly_increases_with_supersets(self):
        D = random_block_dictionary(8, (2,) * 6, 11)
        rng = np.random.default_rng(2)
        entries = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        u = BlockVector(entries, D.structure)
        prev = None
        for upto in range(2, 7):
            audit = gup_audit(D, D, u, u, tuple(range(upto)), (0, 1))
            if prev is not None:
                assert audit.slack >= prev - 1e-9
            prev = audit.slack

    def test_mismatched_images_rejected(self):
        I4, F4 = identity_basis(4), fourier_basis(4)
        u = BlockVector(np.array([1.0, 0, 0, 0]), I4.structure)
        v = BlockVector(np.array([1.0, 0, 0, 0]), F4.structure)
        with pytest.raises(ValueError, match="images differ"):
            gup_audit(I4, F4, u, v, (0,), (0,))

    def test_orthogonal_ranges_flagged_anomalous(self):
        # both dictionaries have a kernel, so zero images satisfy the
        # matching-image hypothesis while the mutual coherence vanishes
        e1, e2 = np.eye(4)[:, 0], np.eye(4)[:, 1]
        Da = BlockDictionary(np.column_stack([e1, e1]), uniform_structure(2))
        Db = BlockDictionary(np.column_stack([e2, e2]), uniform_structure(2))
        u = BlockVector(np.array([1.0, -1.0]), Da.structure)
        v = BlockVector(np.array([1.0, -1.0]), Db.structure)
        audit = gup_audit(Da, Db, u, v, (0, 1), (0, 1))
        assert audit.anomaly
        assert not audit.holds
        assert math.isinf(audit.rhs)

    def test_zero_signal_rejected(self):
        I4 = identity_basis(4)
        z = BlockVector(np.zeros(4), I4.structure)
        u = BlockVector(np.ones(4), I4.structure)
        with pytest.raises(ValueError, match="nonzero"):
            gup_audit(I4, I4, z, u, (0,), (0,))


class TestPicketFence:
    @pytest.mark.parametrize("n", [4, 9, 16, 25])
    def test_images_match_exactly(self, n):
        u, v, U, V = picket_fence(n)
        F = fourier_basis(n).matrix
        assert np.linalg.norm(u.entries - F @ v.entries) <= 1e-12
        p = math.isqrt(n)
        assert len(U) == len(V) == p
        assert U == tuple(range(0, n, p))

    def test_transform_support_verified_independently(self):
        # oracle: count nonzero bins of the FFT of the comb directly
        n, p = 16, 4
        comb = np.zeros(n, dtype=complex)
        comb[::p] = 1.0
        spectrum = np.fft.fft(comb)
        assert np.count_nonzero(np.abs(spectrum) > 1e-10) == p
        _, v, _, V = picket_fence(n)
        assert np.count_nonzero(np.abs(v.entries) > 1e-10) == p
        assert V == tuple(int(i) for i in np.flatnonzero(np.abs(spectrum) > 1e-10))

    def test_rejects_non_square(self):
        with pytest.raises(ValueError, match="perfect square"):
            picket_fence(8)
        with pytest.raises(ValueError, match="perfect square"):
            picket_fence(1)
