"""Operator-sum (Kraus) channels and POVM measurements."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .states import DensityMatrix, _as_complex_array, embed_operator

COMPLETENESS_ATOL = 1e-10
EFFECT_EIGVAL_FLOOR = -1e-10


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """Completely positive trace-preserving map given by Kraus elements."""

    kraus: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if not self.kraus:
            raise ValueError("channel needs at least one Kraus element")
        elements = tuple(_as_complex_array(k, "kraus element") for k in self.kraus)
        shape = elements[0].shape
        if len(shape) != 2:
            raise ValueError("Kraus elements must be matrices")
        if any(k.shape != shape for k in elements):
            raise ValueError("all Kraus elements must share one shape")
        acc = sum(k.conj().T @ k for k in elements)
        dev = np.max(np.abs(acc - np.eye(shape[1])))
        if dev > COMPLETENESS_ATOL:
            raise ValueError(f"channel is not trace preserving (max deviation {dev:.3e})")
        for k in elements:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", elements)

    @property
    def input_dim(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.kraus[0].shape[0]


@dataclass(frozen=True, eq=False)
class Povm:
    """Positive effects summing to the identity, one label per outcome."""

    effects: tuple[np.ndarray, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.effects:
            raise ValueError("POVM needs at least one effect")
        effects = tuple(_as_complex_array(e, "effect") for e in self.effects)
        d = effects[0].shape[0]
        for e in effects:
            if e.shape != (d, d):
                raise ValueError("all effects must be square matrices of one dimension")
            if np.max(np.abs(e - e.conj().T)) > COMPLETENESS_ATOL:
                raise ValueError("effect is not Hermitian")
            min_eig = float(np.linalg.eigvalsh(e)[0])
            if min_eig < EFFECT_EIGVAL_FLOOR:
                raise ValueError(f"effect has negative eigenvalue {min_eig:.3e}")
        dev = np.max(np.abs(sum(effects) - np.eye(d)))
        if dev > COMPLETENESS_ATOL:
            raise ValueError(f"effects do not sum to identity (max deviation {dev:.3e})")
        labels = tuple(self.labels) or tuple(f"E{i}" for i in range(len(effects)))
        if len(labels) != len(effects):
            raise ValueError("need exactly one label per effect")
        for e in effects:
            e.setflags(write=False)
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)


def apply_channel(
    rho: DensityMatrix,
    ch: QuantumChannel,
    on: str | Sequence[str] | None = None,
) -> DensityMatrix:
    """Operator-sum evolution sum_k K rho K^dag on the named factors."""
    if on is None:
        labels: Sequence[str] = rho.layout.labels
    elif isinstance(on, str):
        labels = (on,)
    else:
        labels = tuple(on)
    if ch.input_dim != ch.output_dim:
        raise ValueError("in-place application requires square Kraus elements")
    acc = np.zeros_like(rho.entries)
    for k in ch.kraus:
        big = embed_operator(rho.layout, k, labels)
        acc += big @ rho.entries @ big.conj().T
    return DensityMatrix(rho.layout, acc)


def born_probabilities(rho: DensityMatrix, m: Povm) -> np.ndarray:
    """Outcome probabilities Tr(E_i rho), clamped into [0, 1]."""
    if m.dim != rho.dim:
        raise ValueError(f"POVM dimension {m.dim} does not match state dimension {rho.dim}")
    probs = np.array([float(np.real(np.trace(e @ rho.entries))) for e in m.effects])
    return np.clip(probs, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Common constructions

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def identity_channel(dim: int) -> QuantumChannel:
    return QuantumChannel((np.eye(dim, dtype=np.complex128),))


def dephasing_channel(p: float) -> QuantumChannel:
    """Qubit phase flip: rho -> (1-p) rho + p Z rho Z."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return QuantumChannel((np.sqrt(1 - p) * np.eye(2, dtype=np.complex128), np.sqrt(p) * _PAULI_Z))


def depolarizing_channel(p: float) -> QuantumChannel:
    """Qubit depolarizing; p=1 sends every state to I/2."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return QuantumChannel(
        (
            np.sqrt(1 - 3 * p / 4) * np.eye(2, dtype=np.complex128),
            np.sqrt(p / 4) * _PAULI_X,
            np.sqrt(p / 4) * _PAULI_Y,
            np.sqrt(p / 4) * _PAULI_Z,
        )
    )


def projective_povm(vectors: Sequence[np.ndarray], labels: Sequence[str] | None = None) -> Povm:
    """Rank-1 projective POVM from an orthonormal set of vectors."""
    effects = tuple(np.outer(v, np.conj(v)) for v in vectors)
    return Povm(effects, tuple(labels) if labels is not None else ())


def computational_povm(dim: int, labels: Sequence[str] | None = None) -> Povm:
    return projective_povm(tuple(np.eye(dim, dtype=np.complex128)), labels)
