import numpy as np
import pytest

from qmeasure import (
    DensityMatrix,
    Povm,
    QuantumChannel,
    SubsystemLayout,
    apply_channel,
    born_probabilities,
    computational_povm,
    dephasing_channel,
    depolarizing_channel,
    identity_channel,
    named_qubit,
    random_state,
    to_density,
)

QUBIT = SubsystemLayout((("q", 2),))


def operator_sum(rho, kraus):
    """Test-local oracle for channel action."""
    return sum(k @ rho @ k.conj().T for k in kraus)


class TestQuantumChannel:
    def test_trace_preservation_enforced(self):
        with pytest.raises(ValueError, match="trace preserving"):
            QuantumChannel((np.array([[1.0, 0.0], [0.0, 0.5]]),))

    def test_mismatched_shapes_rejected(self):
        with pytest.raises(ValueError, match="shape"):
            QuantumChannel((np.eye(2), np.eye(3)))

    def test_identity_channel_is_noop(self):
        rho = to_density(named_qubit("y+"))
        np.testing.assert_allclose(apply_channel(rho, identity_channel(2)).entries, rho.entries)

    def test_full_depolarizing_fixed_point(self):
        for name in ("up", "plus", "y+"):
            out = apply_channel(to_density(named_qubit(name)), depolarizing_channel(1.0))
            np.testing.assert_allclose(out.entries, np.eye(2) / 2, atol=1e-15)

    def test_dephasing_kills_coherences(self):
        # operator-sum of {sqrt(1/2) I, sqrt(1/2) Z} on the all-1/2 matrix
        rho = to_density(named_qubit("plus"))
        kraus = dephasing_channel(0.5).kraus
        expected = operator_sum(rho.entries, kraus)
        np.testing.assert_allclose(expected, np.diag([0.5, 0.5]), atol=1e-15)
        out = apply_channel(rho, dephasing_channel(0.5))
        np.testing.assert_allclose(out.entries, expected, atol=1e-15)

    def test_apply_on_named_factor(self, rng):
        layout = SubsystemLayout((("a", 2), ("b", 2)))
        rho = to_density(random_state(layout, rng))
        out = apply_channel(rho, depolarizing_channel(1.0), on="b")
        # b is fully mixed afterwards, a keeps its marginal
        from qmeasure import partial_trace

        np.testing.assert_allclose(partial_trace(out, "b").entries, np.eye(2) / 2, atol=1e-12)
        np.testing.assert_allclose(
            partial_trace(out, "a").entries, partial_trace(rho, "a").entries, atol=1e-12
        )


class TestPovm:
    def test_completeness_enforced(self):
        half = np.eye(2) / 2
        with pytest.raises(ValueError, match="identity"):
            Povm((half, half / 2))

    def test_negative_effect_rejected(self):
        bad = np.diag([1.5, -0.5])
        good = np.eye(2) - bad
        with pytest.raises(ValueError, match="negative"):
            Povm((bad, good))

    def test_default_labels(self):
        povm = computational_povm(3)
        assert povm.labels == ("E0", "E1", "E2")


class TestBornProbabilities:
    def test_maximally_mixed_is_uniform(self):
        rho = DensityMatrix(QUBIT, np.eye(2) / 2)
        np.testing.assert_allclose(born_probabilities(rho, computational_povm(2)), [0.5, 0.5])

    def test_basis_state_is_deterministic(self):
        probs = born_probabilities(to_density(named_qubit("up")), computational_povm(2))
        np.testing.assert_allclose(probs, [1.0, 0.0])

    def test_diagonal_weights(self):
        rho = DensityMatrix(QUBIT, np.diag([0.36, 0.64]))
        np.testing.assert_allclose(born_probabilities(rho, computational_povm(2)), [0.36, 0.64])

    def test_dimension_mismatch(self):
        rho = DensityMatrix(QUBIT, np.eye(2) / 2)
        with pytest.raises(ValueError, match="dimension"):
            born_probabilities(rho, computational_povm(3))

    def test_probabilities_sum_to_one(self, rng):
        from qmeasure import random_povm

        layout = SubsystemLayout((("s", 4),))
        rho = to_density(random_state(layout, rng))
        for _ in range(10):
            povm = random_povm(4, int(rng.integers(2, 6)), rng)
            probs = born_probabilities(rho, povm)
            assert abs(probs.sum() - 1.0) <= 1e-9
            assert np.all(probs >= 0.0)
