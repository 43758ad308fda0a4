import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmeasure import (
    MarkedState,
    MeasurementBasis,
    StateVector,
    SubsystemLayout,
    bell_phi_plus,
    detect,
    enumerate_outcomes,
    fidelity,
    ket,
    knowledge_chain,
    make_rng,
    mark,
    measure,
    mix,
    named_qubit,
    random_state,
    reduced_marker,
    sample_detections,
    simulate_device_runs,
    to_density,
)

Z = MeasurementBasis.z_qubit()


class TestMeasurementBasis:
    def test_z_labels(self):
        assert Z.labels == ("up", "down")

    def test_non_orthonormal_rejected(self):
        with pytest.raises(ValueError, match="orthonormal"):
            MeasurementBasis(np.array([[1.0, 0.0], [1.0, 0.0]]))

    def test_incomplete_basis_rejected(self):
        with pytest.raises(ValueError, match="span"):
            MeasurementBasis(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))


class TestMark:
    def test_ready_state_amplitudes(self):
        ms = mark(ket("spin", (0.6, 0.8)), Z)
        np.testing.assert_allclose(ms.joint.amps, [0.6, 0.0, 0.0, 0.8], atol=1e-15)

    def test_basis_input_stays_product(self):
        ms = mark(named_qubit("up"), Z)
        np.testing.assert_allclose(ms.joint.amps, [1.0, 0.0, 0.0, 0.0], atol=1e-15)

    def test_equal_amplitudes_give_maximally_mixed_marker(self):
        ms = mark(named_qubit("plus"), Z)
        np.testing.assert_allclose(reduced_marker(ms).entries, np.eye(2) / 2, atol=1e-12)

    def test_each_basis_state_maps_to_product(self, rng):
        from qmeasure import random_unitary

        basis_matrix = random_unitary(3, rng)
        basis = MeasurementBasis(basis_matrix)
        for i in range(3):
            ms = mark(ket("s", basis_matrix[i]), basis)
            expected = np.kron(basis_matrix[i], np.eye(3)[i])
            np.testing.assert_allclose(ms.joint.amps, expected, atol=1e-12)

    def test_marker_capacity_error(self):
        with pytest.raises(ValueError, match="marker"):
            mark(named_qubit("up"), Z, marker_dim=1)

    def test_marker_label_collision(self):
        with pytest.raises(ValueError, match="collision"):
            mark(named_qubit("up", "marker"), Z)

    def test_oversized_marker_leaves_tail_empty(self):
        ms = mark(ket("spin", (0.6, 0.8)), Z, marker_dim=3)
        amps = ms.joint.amps.reshape(2, 3)
        np.testing.assert_allclose(amps[:, 2], 0.0, atol=1e-15)

    def test_invalid_marked_state_rejected(self):
        # a joint state whose marker is uncorrelated with the basis
        layout = SubsystemLayout((("spin", 2), ("marker", 2)))
        joint = StateVector(layout, np.array([0.5, 0.5, 0.5, 0.5]))
        with pytest.raises(ValueError, match="correlated"):
            MarkedState(joint, Z, "marker", ("spin",), (("up", 0), ("down", 1)))


class TestReducedMarker:
    def test_weights_from_amplitudes(self):
        ms = mark(ket("spin", (0.6, 0.8)), Z)
        np.testing.assert_allclose(reduced_marker(ms).entries, np.diag([0.36, 0.64]), atol=1e-12)

    def test_basis_input_deterministic(self):
        ms = mark(named_qubit("up"), Z)
        np.testing.assert_allclose(reduced_marker(ms).entries, np.diag([1.0, 0.0]), atol=1e-12)

    def test_diagonal_in_marker_basis(self, rng):
        ms = mark(random_state(SubsystemLayout((("s", 2),)), rng), Z)
        entries = reduced_marker(ms).entries
        assert abs(entries[0, 1]) <= 1e-10


class TestDetect:
    def test_deterministic_on_basis_input(self, rng):
        record = detect(mark(named_qubit("up"), Z), rng)
        assert record.outcome_label == "up"
        assert record.probability == pytest.approx(1.0)
        np.testing.assert_allclose(record.post_system.amps, [1.0, 0.0], atol=1e-12)

    def test_binomial_statistics(self):
        shots = 100_000
        ms = mark(ket("spin", (0.6, 0.8)), Z)
        _, counts, _ = sample_detections(ms, shots, make_rng(5))
        sigma = np.sqrt(0.36 * 0.64 / shots)
        assert abs(counts[0] / shots - 0.36) <= 3 * sigma

    def test_post_states_match_outcome(self, rng):
        ms = mark(ket("spin", (0.6, 0.8)), Z)
        for _ in range(20):
            record = detect(ms, rng)
            expected = named_qubit("up", "spin") if record.outcome_index == 0 else named_qubit("down", "spin")
            assert fidelity(record.post_system, expected) >= 1 - 1e-10
            marker_block = record.post_joint.amps.reshape(2, 2)[:, 1 - record.outcome_index]
            np.testing.assert_allclose(marker_block, 0.0, atol=1e-12)

    def test_counts_cover_all_shots(self, rng):
        indices, counts, outcomes = sample_detections(mark(named_qubit("plus"), Z), 500, rng)
        assert counts.sum() == 500
        assert len(indices) == 500
        assert {o.index for o in outcomes} == {0, 1}

    def test_seed_reproducibility(self):
        ms = mark(named_qubit("plus"), Z)
        a = [detect(ms, make_rng(3)).outcome_index for _ in range(1)]
        b = [detect(ms, make_rng(3)).outcome_index for _ in range(1)]
        assert a == b


class TestMeasure:
    def test_basis_state_certain(self, rng):
        record = measure(named_qubit("up"), Z, rng)
        assert record.outcome_label == "up"
        assert record.probability == pytest.approx(1.0)

    def test_plus_state_statistics(self):
        shots = 100_000
        counts = np.zeros(2, dtype=int)
        ms = mark(named_qubit("plus"), Z, marker_label="pointer")
        _, counts, _ = sample_detections(ms, shots, make_rng(17))
        sigma = np.sqrt(0.25 / shots)
        assert abs(counts[0] / shots - 0.5) <= 3 * sigma

    def test_y_plus_probabilities_exact(self):
        ms = mark(named_qubit("y+"), Z, marker_label="pointer")
        np.testing.assert_allclose(reduced_marker(ms).diagonal(), [0.5, 0.5], atol=1e-12)

    def test_matches_born_oracle_chi_square(self, rng):
        scipy_stats = pytest.importorskip("scipy.stats")
        from qmeasure import born_probabilities, computational_povm

        shots = 4000
        for _ in range(10):
            state = random_state(SubsystemLayout((("spin", 2),)), rng)
            oracle = born_probabilities(to_density(state), computational_povm(2))
            _, counts, _ = sample_detections(mark(state, Z), shots, rng)
            result = scipy_stats.chisquare(counts, np.clip(oracle, 1e-12, None) * shots)
            assert result.pvalue > 0.001


class TestKnowledgeChain:
    def test_three_stage_values(self):
        chain = knowledge_chain(ket("spin", (0.6, 0.8)), Z, make_rng(2))
        np.testing.assert_allclose(chain.before.amps, [0.6, 0.8])
        np.testing.assert_allclose(chain.after_marking.entries, np.diag([0.36, 0.64]), atol=1e-12)
        final = np.abs(chain.after_knowledge.amps)
        assert list(final) in ([1.0, 0.0], [0.0, 1.0])

    def test_basis_input_chain_is_constant(self, rng):
        chain = knowledge_chain(named_qubit("up"), Z, rng)
        np.testing.assert_allclose(chain.before.amps, [1.0, 0.0])
        np.testing.assert_allclose(chain.after_marking.entries, np.diag([1.0, 0.0]), atol=1e-12)
        np.testing.assert_allclose(np.abs(chain.after_knowledge.amps), [1.0, 0.0], atol=1e-12)

    def test_after_marking_is_outcome_mixture(self, rng):
        state = random_state(SubsystemLayout((("spin", 2),)), rng)
        chain = knowledge_chain(state, Z, rng)
        outcomes = enumerate_outcomes(mark(state, Z))
        rebuilt = mix([(o.probability, o.post_system) for o in outcomes if o.post_system is not None])
        np.testing.assert_allclose(chain.after_marking.entries, rebuilt.entries, atol=1e-12)


class TestMarkOnFactor:
    def test_alice_branches_structure(self):
        ms = mark(bell_phi_plus(), Z, on="alice", marker_label="alice_pointer")
        outcomes = enumerate_outcomes(ms)
        assert [o.probability for o in outcomes] == pytest.approx([0.5, 0.5])
        for o in outcomes:
            t = o.post_system.as_tensor()
            # Alice's factor collapsed to the outcome basis state
            np.testing.assert_allclose(np.abs(t[1 - o.index]), 0.0, atol=1e-12)


class TestDeviceRuns:
    def test_without_environment_reduces_to_detect(self):
        report = simulate_device_runs(named_qubit("plus"), Z, 0, 400, make_rng(8))
        sigma = np.sqrt(0.25 / 400)
        assert abs(report.sampled_frequencies[0] - 0.5) <= 3 * sigma
        # no environment: branch overlaps are pure phases, coherence is the bare marked value
        assert report.diagnostics["mean_marker_coherence"] == pytest.approx(0.125, abs=1e-12)

    def test_coherence_shrinks_with_environment(self):
        small = simulate_device_runs(named_qubit("plus"), Z, 1, 300, make_rng(9))
        large = simulate_device_runs(named_qubit("plus"), Z, 6, 300, make_rng(9))
        assert (
            large.diagnostics["mean_marker_coherence"] < small.diagnostics["mean_marker_coherence"]
        )

    def test_every_run_yields_one_outcome(self):
        report = simulate_device_runs(named_qubit("y+"), Z, 2, 123, make_rng(10))
        assert sum(report.counts) == 123

    def test_environment_size_limit(self, rng):
        with pytest.raises(ValueError, match="n_env_qubits"):
            simulate_device_runs(named_qubit("plus"), Z, 13, 10, rng)
        with pytest.raises(ValueError, match="n_env_qubits"):
            simulate_device_runs(named_qubit("plus"), Z, -1, 10, rng)

    def test_needs_at_least_one_run(self, rng):
        with pytest.raises(ValueError, match="n_runs"):
            simulate_device_runs(named_qubit("plus"), Z, 2, 0, rng)

    def test_seeded_reproducibility(self):
        a = simulate_device_runs(named_qubit("plus"), Z, 3, 50, make_rng(4))
        b = simulate_device_runs(named_qubit("plus"), Z, 3, 50, make_rng(4))
        assert a.counts == b.counts
        assert a.diagnostics["mean_marker_coherence"] == b.diagnostics["mean_marker_coherence"]


@settings(deadline=None, max_examples=20)
@given(seed=st.integers(0, 2**32 - 1))
def test_property_marking_preserves_born_weights(seed):
    rng = np.random.default_rng(seed)
    state = random_state(SubsystemLayout((("spin", 2),)), rng)
    ms = mark(state, Z)
    np.testing.assert_allclose(
        reduced_marker(ms).diagonal(), np.abs(state.amps) ** 2, atol=1e-12
    )
    assert abs(np.linalg.norm(ms.joint.amps) - 1.0) <= 1e-12
