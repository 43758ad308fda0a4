import numpy as np
import pytest

from qmeasure import (
    SubsystemLayout,
    make_rng,
    random_channel,
    random_povm,
    random_state,
    random_unitary,
    sample_counts,
    sample_index,
    split_streams,
)


class TestRandomUnitary:
    def test_dim_one_is_a_phase(self):
        u = random_unitary(1, make_rng(0))
        assert u.shape == (1, 1)
        assert abs(abs(u[0, 0]) - 1.0) <= 1e-12

    @pytest.mark.parametrize("dim", [2, 3, 7])
    def test_unitarity(self, dim):
        u = random_unitary(dim, make_rng(dim))
        np.testing.assert_allclose(u.conj().T @ u, np.eye(dim), atol=1e-10)

    def test_fixed_seed_is_bit_identical(self):
        a = random_unitary(2, make_rng(42))
        b = random_unitary(2, make_rng(42))
        assert np.array_equal(a, b)

    def test_phase_convention_not_qr_biased(self):
        # with the phase fix the first column's real parts average to zero
        rng = make_rng(7)
        first = np.array([random_unitary(2, rng)[0, 0].real for _ in range(2000)])
        assert abs(first.mean()) < 0.05


class TestRandomPovm:
    def test_projective_gives_orthogonal_rank_one_projectors(self):
        povm = random_povm(3, 3, make_rng(5), projective=True)
        for i, e in enumerate(povm.effects):
            np.testing.assert_allclose(e @ e, e, atol=1e-10)
            assert np.linalg.matrix_rank(e, tol=1e-8) == 1
            for j, f in enumerate(povm.effects):
                if i != j:
                    assert np.max(np.abs(e @ f)) <= 1e-10
        np.testing.assert_allclose(sum(povm.effects), np.eye(3), atol=1e-10)

    def test_projective_requires_matching_outcomes(self):
        with pytest.raises(ValueError, match="n_outcomes == dim"):
            random_povm(3, 2, make_rng(0), projective=True)

    def test_completeness(self):
        povm = random_povm(4, 5, make_rng(9))
        np.testing.assert_allclose(sum(povm.effects), np.eye(4), atol=1e-10)

    def test_fixed_seed_reproduces_effects(self):
        a = random_povm(2, 3, make_rng(11))
        b = random_povm(2, 3, make_rng(11))
        assert all(np.array_equal(x, y) for x, y in zip(a.effects, b.effects))

    def test_too_few_outcomes(self):
        with pytest.raises(ValueError, match="outcomes"):
            random_povm(2, 1, make_rng(0))


class TestRandomChannel:
    def test_trace_preserving_by_construction(self):
        for n_kraus in (1, 2, 4):
            ch = random_channel(3, n_kraus, make_rng(n_kraus))
            acc = sum(k.conj().T @ k for k in ch.kraus)
            np.testing.assert_allclose(acc, np.eye(3), atol=1e-10)

    def test_unital_only_when_single_kraus(self):
        ch = random_channel(2, 1, make_rng(3))
        assert ch.kraus[0].shape == (2, 2)
        np.testing.assert_allclose(ch.kraus[0] @ ch.kraus[0].conj().T, np.eye(2), atol=1e-10)


class TestStreams:
    def test_split_streams_are_deterministic(self):
        a = [s.normal() for s in split_streams(make_rng(21), 4)]
        b = [s.normal() for s in split_streams(make_rng(21), 4)]
        assert a == b

    def test_split_streams_differ_from_each_other(self):
        values = [s.normal() for s in split_streams(make_rng(21), 4)]
        assert len(set(values)) == 4


class TestSampling:
    def test_sample_counts_sums_to_shots(self, rng):
        counts = sample_counts(np.array([0.2, 0.3, 0.5]), 1000, rng)
        assert counts.sum() == 1000

    def test_sample_index_respects_support(self, rng):
        for _ in range(50):
            assert sample_index(np.array([0.0, 1.0, 0.0]), rng) == 1

    def test_all_zero_vector_rejected(self, rng):
        with pytest.raises(ValueError, match="all-zero"):
            sample_index(np.zeros(3), rng)

    def test_random_state_is_normalized(self, rng):
        psi = random_state(SubsystemLayout((("s", 5),)), rng)
        assert abs(np.linalg.norm(psi.amps) - 1.0) <= 1e-12
