"""The two-step measurement model.

Step one ("marking") is a controllable unitary that entangles the measured
basis with a dedicated marker factor: a controlled shift sends
``sum_i c_i |a_i> |0>`` to ``sum_i c_i |a_i> |i>``.  Step two ("detection")
is the macroscopic readout: it samples one definite marker outcome from the
marker's reduced state and never produces a superposed pointer.

``simulate_device_runs`` additionally models the fact that a macroscopic
device undergoes a microscopically different evolution on every run: each
run draws a fresh environment basis state and a fresh Haar unitary per
marker value, which suppresses marker coherences as the environment grows.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from .reports import RunReport
from .sampling import sample_index
from .states import (
    DensityMatrix,
    StateVector,
    SubsystemLayout,
    _as_complex_array,
    apply_unitary,
    basis_state,
    partial_trace,
    tensor,
    to_density,
)

BASIS_ORTHO_ATOL = 1e-10
MARK_LEAK_ATOL = 1e-10
DEGENERATE_PROB = 1e-15
MAX_ENV_QUBITS = 12


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Orthonormal basis spanning one factor; rows of ``states`` are the vectors."""

    states: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        states = _as_complex_array(self.states, "basis states")
        if states.ndim != 2:
            raise ValueError("basis states must form a 2-D array (one row per vector)")
        n, d = states.shape
        if n != d:
            raise ValueError(f"basis with {n} vectors does not span a dimension-{d} factor")
        gram = states @ states.conj().T
        dev = np.max(np.abs(gram - np.eye(n)))
        if dev > BASIS_ORTHO_ATOL:
            raise ValueError(f"basis is not orthonormal (max Gram deviation {dev:.3e})")
        labels = tuple(self.labels) or tuple(f"a{i}" for i in range(n))
        if len(labels) != n:
            raise ValueError("need exactly one label per basis state")
        states.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @classmethod
    def computational(cls, dim: int, labels: Sequence[str] | None = None) -> "MeasurementBasis":
        return cls(np.eye(dim, dtype=np.complex128), tuple(labels) if labels else ())

    @classmethod
    def z_qubit(cls) -> "MeasurementBasis":
        """Computational qubit basis labeled up/down."""
        return cls.computational(2, ("up", "down"))


@dataclass(frozen=True, eq=False)
class MarkedState:
    """Joint (system + marker) state of the form sum_i c_i |a_i> |i>."""

    joint: StateVector
    basis: MeasurementBasis
    marker_label: str
    on_labels: tuple[str, ...]
    correspondence: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        leak = float(np.sqrt(np.max(self._mismatch_weights())))
        if leak > MARK_LEAK_ATOL:
            raise ValueError(f"joint state is not basis-marker correlated (mismatch amplitude {leak:.3e})")

    def _overlap_tensor(self) -> np.ndarray:
        """O[..., i, m]: overlap of the joint state with (basis i, marker m)."""
        layout = self.joint.layout
        t = self.joint.as_tensor()
        marker_axis = layout.index_of(self.marker_label)
        on_axes = [layout.index_of(lab) for lab in self.on_labels]
        t = np.moveaxis(t, on_axes + [marker_axis], range(t.ndim - len(on_axes) - 1, t.ndim))
        rest_shape = t.shape[: t.ndim - len(on_axes) - 1]
        t = t.reshape(rest_shape + (self.basis.dim, self.marker_dim))
        return np.einsum("is,...sm->...im", self.basis.states.conj(), t)

    def _mismatch_weights(self) -> np.ndarray:
        o = self._overlap_tensor()
        weights = np.abs(o) ** 2
        axes = tuple(range(o.ndim - 2))
        w = weights.sum(axis=axes) if axes else weights
        for i in range(len(self.basis)):
            w[i, i] = 0.0  # matched pairs may carry any amplitude
        return w

    @property
    def marker_dim(self) -> int:
        return self.joint.layout.dims[self.joint.layout.index_of(self.marker_label)]

    @property
    def system_labels(self) -> tuple[str, ...]:
        return tuple(lab for lab in self.joint.layout.labels if lab != self.marker_label)

    def system_layout(self) -> SubsystemLayout:
        return self.joint.layout.keep(self.system_labels)


@dataclass(frozen=True, eq=False)
class MeasurementOutcome:
    """One branch of a marked state: probability and post-detection states."""

    index: int
    label: str
    probability: float
    post_joint: StateVector | None
    post_system: StateVector | None


@dataclass(frozen=True, eq=False)
class DetectionRecord:
    outcome_label: str
    outcome_index: int
    probability: float
    post_system: StateVector
    post_joint: StateVector
    seed_used: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0 + 1e-12:
            raise ValueError(f"outcome probability {self.probability} outside [0, 1]")


@dataclass(frozen=True, eq=False)
class KnowledgeChain:
    """Pure state -> diagonal reduced state after marking -> known basis state."""

    before: StateVector
    after_marking: DensityMatrix
    after_knowledge: StateVector
    record: DetectionRecord


def _shift_matrix(dim: int) -> np.ndarray:
    return np.roll(np.eye(dim, dtype=np.complex128), 1, axis=0)


def mark(
    system: StateVector,
    basis: MeasurementBasis,
    marker_dim: int | None = None,
    marker_label: str = "marker",
    on: str | None = None,
) -> MarkedState:
    """Entangle the measured basis with a fresh marker factor.

    The marker starts in its 0 state; a controlled permutation (shift^i
    conditioned on basis state i) produces ``sum_i c_i |a_i> |i>``.  When
    ``on`` names a factor, the basis acts on that factor alone; otherwise it
    must span the whole system.
    """
    on_labels = (on,) if on is not None else system.layout.labels
    d_on = prod(system.layout.dims[system.layout.index_of(lab)] for lab in on_labels)
    if basis.dim != d_on:
        raise ValueError(f"basis dimension {basis.dim} does not match measured dimension {d_on}")
    n_outcomes = len(basis)
    if marker_dim is None:
        marker_dim = n_outcomes
    if marker_dim < n_outcomes:
        raise ValueError(f"marker dimension {marker_dim} cannot mark {n_outcomes} basis states")

    marker0 = basis_state(SubsystemLayout(((marker_label, marker_dim),)), 0)
    joint = tensor(system, marker0)  # raises on label collision

    shift = _shift_matrix(marker_dim)
    u = np.zeros((d_on * marker_dim, d_on * marker_dim), dtype=np.complex128)
    step = np.eye(marker_dim, dtype=np.complex128)
    for i in range(n_outcomes):
        vec = basis.states[i]
        u += np.kron(np.outer(vec, vec.conj()), step)
        step = shift @ step
    joint = apply_unitary(joint, u, on=tuple(on_labels) + (marker_label,))

    correspondence = tuple((basis.labels[i], i) for i in range(n_outcomes))
    return MarkedState(joint, basis, marker_label, tuple(on_labels), correspondence)


def reduced_marker(ms: MarkedState) -> DensityMatrix:
    """Reduced state of the marker: diagonal |c_i|^2 in the marker basis."""
    return partial_trace(to_density(ms.joint), keep=ms.marker_label)


def enumerate_outcomes(ms: MarkedState) -> list[MeasurementOutcome]:
    """All marker outcomes with probabilities and normalized post states.

    Branches with probability below the degeneracy floor get ``None`` post
    states; they can never be sampled.
    """
    layout = ms.joint.layout
    marker_axis = layout.index_of(ms.marker_label)
    t = np.moveaxis(ms.joint.as_tensor(), marker_axis, -1)
    system_shape = t.shape[:-1]
    t = t.reshape(-1, ms.marker_dim)
    system_layout = ms.system_layout()

    outcomes = []
    for label, m in ms.correspondence:
        column = t[:, m]
        p = float(np.real(np.vdot(column, column)))
        if p <= DEGENERATE_PROB:
            outcomes.append(MeasurementOutcome(m, label, max(p, 0.0), None, None))
            continue
        norm = np.sqrt(p)
        post_system = StateVector(system_layout, (column / norm).reshape(system_shape))
        joint_amps = np.zeros_like(t)
        joint_amps[:, m] = column / norm
        joint_amps = np.moveaxis(joint_amps.reshape(system_shape + (ms.marker_dim,)), -1, marker_axis)
        post_joint = StateVector(layout, joint_amps.reshape(-1))
        outcomes.append(MeasurementOutcome(m, label, min(p, 1.0), post_joint, post_system))
    return outcomes


def detect(ms: MarkedState, rng: np.random.Generator, seed_used: int | None = None) -> DetectionRecord:
    """Sample one definite marker outcome from the marker's reduced state.

    The sampled branch's system part is the basis state matching the marker
    value, so re-measuring the system reproduces the outcome with certainty.
    """
    outcomes = enumerate_outcomes(ms)
    probs = np.array([o.probability for o in outcomes])
    idx = sample_index(probs, rng)
    chosen = outcomes[idx]
    if chosen.probability <= DEGENERATE_PROB or chosen.post_system is None:
        raise ValueError(f"sampled outcome {chosen.label!r} has degenerate probability {chosen.probability}")
    return DetectionRecord(
        outcome_label=chosen.label,
        outcome_index=chosen.index,
        probability=chosen.probability,
        post_system=chosen.post_system,
        post_joint=chosen.post_joint,
        seed_used=seed_used,
    )


def sample_detections(
    ms: MarkedState, shots: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, list[MeasurementOutcome]]:
    """Vectorized repeated detection on one marked state.

    Returns (per-shot outcome indices, outcome counts, outcome branches).
    Every shot resolves to exactly one branch of ``enumerate_outcomes``.
    """
    outcomes = enumerate_outcomes(ms)
    probs = np.clip(np.array([o.probability for o in outcomes]), 0.0, None)
    total = probs.sum()
    if total <= 0.0:
        raise ValueError("marked state has no sampleable outcome")
    indices = rng.choice(len(outcomes), size=shots, p=probs / total)
    counts = np.bincount(indices, minlength=len(outcomes))
    return indices, counts, outcomes


def measure(
    system: StateVector,
    basis: MeasurementBasis,
    rng: np.random.Generator,
    marker_label: str = "pointer",
    seed_used: int | None = None,
) -> DetectionRecord:
    """Measurement-postulate statistics recovered as mark followed by detect."""
    ms = mark(system, basis, marker_label=marker_label)
    return detect(ms, rng, seed_used=seed_used)


def knowledge_chain(
    system: StateVector,
    basis: MeasurementBasis,
    rng: np.random.Generator,
    marker_label: str = "pointer",
) -> KnowledgeChain:
    """State of the measured system across a whole measurement.

    Before: the pure input.  After marking: its reduced state, diagonal in
    the measured basis.  After the observer learns the pointer value: the
    matching basis state.  Only the last step depends on the sampled outcome.
    """
    ms = mark(system, basis, marker_label=marker_label)
    after_marking = partial_trace(to_density(ms.joint), keep=system.layout.labels)
    record = detect(ms, rng)
    return KnowledgeChain(
        before=system,
        after_marking=after_marking,
        after_knowledge=record.post_system,
        record=record,
    )


def _marker_coherence(system_marker: np.ndarray, gram: np.ndarray) -> float:
    """Mean |entry| over marker-off-diagonal blocks of the reduced joint matrix.

    ``system_marker`` holds the marked amplitudes with shape (d_sys, d_marker);
    ``gram[m, n]`` is the environment branch overlap <env_n | env_m>.  The
    matrix in play is the (system + marker) state after tracing out the
    environment: rho[(s, m), (t, n)] = c[s, m] conj(c[t, n]) gram[m, n].
    """
    d_m = system_marker.shape[1]
    rho = (
        system_marker[:, :, None, None]
        * system_marker.conj()[None, None, :, :]
        * gram[None, :, None, :]
    )
    off_marker = ~np.eye(d_m, dtype=bool)
    values = np.abs(rho).transpose(0, 2, 1, 3)[:, :, off_marker]
    return float(values.mean())


def simulate_device_runs(
    system: StateVector,
    basis: MeasurementBasis,
    n_env_qubits: int,
    n_runs: int,
    rng: np.random.Generator,
    marker_label: str = "pointer",
) -> RunReport:
    """Repeated detection with a microscopically fresh device every run.

    Each run draws a random environment basis state and, per marker value, an
    independent Haar unitary on the environment (a controlled evolution that
    never mixes marker values), then reads the pointer projectively.  Pointer
    statistics stay exactly Born; the marker coherence left after tracing the
    environment shrinks as the environment grows.

    Parameters
    ----------
    n_env_qubits : environment size; 0 disables the environment entirely
    n_runs : number of independent device runs, each on its own rng stream
    """
    if n_env_qubits < 0 or n_env_qubits > MAX_ENV_QUBITS:
        raise ValueError(f"n_env_qubits must lie in [0, {MAX_ENV_QUBITS}], got {n_env_qubits}")
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")

    ms = mark(system, basis, marker_label=marker_label)
    d_marker = ms.marker_dim
    marked = ms.joint.amps.reshape(-1, d_marker)  # marker is the trailing factor
    born = np.sum(np.abs(marked) ** 2, axis=0)
    d_env = 2**n_env_qubits

    counts = np.zeros(d_marker, dtype=int)
    coherence_per_run = np.empty(n_runs)
    for run, stream in enumerate(rng.spawn(n_runs)):
        # The run starts in a random device basis state and evolves under a
        # fresh Haar unitary per marker value.  Only U_m |env> is ever
        # consumed, and that is exactly a Haar-random unit vector, so the
        # branch environment states are drawn directly (same distribution,
        # O(d_env) instead of a d_env^3 QR per branch).
        stream.integers(d_env)  # the run's initial microscopic device state
        z = stream.normal(size=(d_marker, d_env)) + 1j * stream.normal(size=(d_marker, d_env))
        branch_envs = z / np.linalg.norm(z, axis=1, keepdims=True)
        probs = born * np.sum(np.abs(branch_envs) ** 2, axis=1)
        outcome = sample_index(probs, stream)
        counts[outcome] += 1
        gram = branch_envs.conj() @ branch_envs.T  # gram[m, n] = <env_n | env_m>
        coherence_per_run[run] = _marker_coherence(marked, gram.T)

    labels = tuple(label for label, _ in ms.correspondence)
    labels += tuple(f"marker_{m}" for m in range(len(labels), d_marker))
    return RunReport(
        command="device-runs",
        outcome_labels=labels,
        exact_probabilities=tuple(float(p) for p in born),
        sampled_frequencies=tuple(float(c) / n_runs for c in counts),
        counts=tuple(int(c) for c in counts),
        shots=n_runs,
        diagnostics={
            "n_env_qubits": n_env_qubits,
            "n_runs": n_runs,
            "mean_marker_coherence": float(coherence_per_run.mean()),
            "coherence_std": float(coherence_per_run.std()),
            "one_outcome_per_run": True,
        },
    )
