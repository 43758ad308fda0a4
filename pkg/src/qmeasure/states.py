"""Dense complex linear algebra for finite-dimensional quantum states.

States live on a labeled tensor-product layout.  The leftmost factor is the
most significant index (row-major over factors), so for factors (A, B) the
joint basis index is ``i_A * dim_B + i_B``.  All values are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np

NORM_ATOL = 1e-12
HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-12
EIGVAL_FLOOR = -1e-10
UNITARY_ATOL = 1e-10


def _as_complex_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered tensor factors, each a (label, dimension) pair."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        factors = tuple((str(label), int(dim)) for label, dim in self.factors)
        if not factors:
            raise ValueError("layout must contain at least one factor")
        labels = [label for label, _ in factors]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate factor labels in layout: {labels}")
        for label, dim in factors:
            if dim < 1:
                raise ValueError(f"factor {label!r} has non-positive dimension {dim}")
        object.__setattr__(self, "factors", factors)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def dim(self) -> int:
        return prod(self.dims)

    def index_of(self, label: str) -> int:
        for i, (lab, _) in enumerate(self.factors):
            if lab == label:
                return i
        raise ValueError(f"unknown factor label {label!r}; layout has {self.labels}")

    def axes_of(self, labels: Iterable[str]) -> tuple[int, ...]:
        return tuple(self.index_of(label) for label in labels)

    def keep(self, labels: Iterable[str]) -> "SubsystemLayout":
        """Sub-layout containing the named factors, in original order."""
        wanted = set(labels)
        missing = wanted - set(self.labels)
        if missing:
            raise ValueError(f"unknown factor labels {sorted(missing)}; layout has {self.labels}")
        if not wanted:
            raise ValueError("must keep at least one factor")
        return SubsystemLayout(tuple(f for f in self.factors if f[0] in wanted))

    def concat(self, other: "SubsystemLayout") -> "SubsystemLayout":
        collisions = set(self.labels) & set(other.labels)
        if collisions:
            raise ValueError(f"factor label collision: {sorted(collisions)}")
        return SubsystemLayout(self.factors + other.factors)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state: unit-norm complex amplitudes over a layout's joint basis."""

    layout: SubsystemLayout
    amps: np.ndarray

    def __post_init__(self) -> None:
        amps = _as_complex_array(self.amps, "amps").reshape(-1)
        if amps.shape[0] != self.layout.dim:
            raise ValueError(
                f"amplitude length {amps.shape[0]} does not match layout dimension {self.layout.dim}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state vector norm {norm!r} deviates from 1 by more than {NORM_ATOL}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.layout.dim

    def as_tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per factor."""
        return self.amps.reshape(self.layout.dims)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Mixed or reduced state: Hermitian, unit-trace, positive-semidefinite."""

    layout: SubsystemLayout
    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = _as_complex_array(self.entries, "entries")
        d = self.layout.dim
        if entries.shape != (d, d):
            raise ValueError(f"entries shape {entries.shape} does not match layout dimension {d}")
        herm_dev = np.max(np.abs(entries - entries.conj().T))
        if herm_dev > HERMITIAN_ATOL:
            raise ValueError(f"matrix is not Hermitian (max deviation {herm_dev:.3e})")
        tr = entries.trace()
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"trace {tr!r} deviates from 1 by more than {TRACE_ATOL}")
        min_eig = float(np.linalg.eigvalsh(entries)[0])
        if min_eig < EIGVAL_FLOOR:
            raise ValueError(f"matrix has negative eigenvalue {min_eig:.3e}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.layout.dim

    def diagonal(self) -> np.ndarray:
        """Real diagonal, clipped into [0, 1]."""
        return np.clip(np.real(np.diag(self.entries)), 0.0, 1.0)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


# ---------------------------------------------------------------------------
# Constructors


def ket(label: str, amps: Sequence[complex]) -> StateVector:
    """Single-factor state with the given (already normalized) amplitudes."""
    arr = np.asarray(amps, dtype=np.complex128)
    return StateVector(SubsystemLayout(((label, arr.shape[0]),)), arr)


def normalized_ket(label: str, amps: Sequence[complex]) -> StateVector:
    arr = np.asarray(amps, dtype=np.complex128)
    norm = np.linalg.norm(arr)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    return ket(label, arr / norm)


def basis_state(layout: SubsystemLayout, index: int) -> StateVector:
    amps = np.zeros(layout.dim, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(layout, amps)


_SQRT_HALF = 1.0 / np.sqrt(2.0)

NAMED_QUBIT_STATES: dict[str, tuple[complex, complex]] = {
    "up": (1.0, 0.0),
    "down": (0.0, 1.0),
    "plus": (_SQRT_HALF, _SQRT_HALF),
    "minus": (_SQRT_HALF, -_SQRT_HALF),
    "y+": (_SQRT_HALF, 1j * _SQRT_HALF),
    "y-": (_SQRT_HALF, -1j * _SQRT_HALF),
}


def named_qubit(name: str, label: str = "spin") -> StateVector:
    """One of the canonical qubit states: up, down, plus, minus, y+, y-."""
    try:
        amps = NAMED_QUBIT_STATES[name]
    except KeyError:
        raise ValueError(f"unknown qubit state {name!r}; choose from {sorted(NAMED_QUBIT_STATES)}") from None
    return ket(label, amps)


def bell_phi_plus(labels: tuple[str, str] = ("alice", "bob")) -> StateVector:
    """Maximally entangled two-qubit state (|00> + |11>)/sqrt(2)."""
    layout = SubsystemLayout(((labels[0], 2), (labels[1], 2)))
    return StateVector(layout, np.array([_SQRT_HALF, 0.0, 0.0, _SQRT_HALF]))


# ---------------------------------------------------------------------------
# Operations


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Tensor product; the joint layout concatenates both factor lists."""
    return StateVector(a.layout.concat(b.layout), np.kron(a.amps, b.amps))


def to_density(psi: StateVector) -> DensityMatrix:
    return DensityMatrix(psi.layout, np.outer(psi.amps, psi.amps.conj()))


def mix(ensemble: Iterable[tuple[float, StateVector]]) -> DensityMatrix:
    """Probability-weighted mixture of pure states sharing one layout."""
    items = list(ensemble)
    if not items:
        raise ValueError("ensemble must contain at least one state")
    layout = items[0][1].layout
    total = 0.0
    acc = np.zeros((layout.dim, layout.dim), dtype=np.complex128)
    for p, psi in items:
        if p < 0:
            raise ValueError(f"ensemble probability {p} is negative")
        if psi.layout != layout:
            raise ValueError("all ensemble states must share one layout")
        acc += p * np.outer(psi.amps, psi.amps.conj())
        total += p
    if abs(total - 1.0) > NORM_ATOL:
        raise ValueError(f"ensemble probabilities sum to {total!r}, not 1")
    return DensityMatrix(layout, acc)


def partial_trace(rho: DensityMatrix, keep: str | Iterable[str]) -> DensityMatrix:
    """Trace out all factors except the named ones, preserving their order.

    Parameters
    ----------
    rho : DensityMatrix
    keep : label or iterable of labels of the factors to retain

    Returns
    -------
    DensityMatrix over the kept factors in their original layout order.
    """
    keep_labels = {keep} if isinstance(keep, str) else set(keep)
    if not keep_labels:
        raise ValueError("must keep at least one factor")
    out_layout = rho.layout.keep(keep_labels)  # validates labels
    if keep_labels == set(rho.layout.labels):
        return rho

    dims = rho.layout.dims
    n = len(dims)
    keep_axes = {rho.layout.index_of(label) for label in keep_labels}
    t = rho.entries.reshape(dims + dims)
    n_current = n
    for axis in sorted(set(range(n)) - keep_axes, reverse=True):
        t = np.trace(t, axis1=axis, axis2=axis + n_current)
        n_current -= 1
    return DensityMatrix(out_layout, t.reshape(out_layout.dim, out_layout.dim))


def embed_operator(layout: SubsystemLayout, op: np.ndarray, on: Sequence[str]) -> np.ndarray:
    """Extend an operator on the named factors to the full space (identity elsewhere).

    The first axis of ``op`` corresponds to the first label in ``on``.
    """
    if len(set(on)) != len(on):
        raise ValueError(f"repeated factor labels in {on!r}")
    on_axes = [layout.index_of(label) for label in on]
    dims = layout.dims
    d_on = prod(dims[a] for a in on_axes)
    op = _as_complex_array(op, "operator")
    if op.shape != (d_on, d_on):
        raise ValueError(f"operator shape {op.shape} does not match target dimension {d_on}")
    rest_axes = [i for i in range(len(dims)) if i not in on_axes]
    if not rest_axes and on_axes == sorted(on_axes):
        return op
    d_rest = prod(dims[a] for a in rest_axes) if rest_axes else 1
    perm = on_axes + rest_axes
    big = np.kron(op, np.eye(d_rest))
    perm_dims = [dims[a] for a in perm]
    big = big.reshape(perm_dims + perm_dims)
    inv = list(np.argsort(perm))
    big = big.transpose(inv + [len(dims) + p for p in inv])
    return np.ascontiguousarray(big.reshape(layout.dim, layout.dim))


def apply_unitary(
    state: StateVector | DensityMatrix,
    u: np.ndarray,
    on: str | Sequence[str] | None = None,
) -> StateVector | DensityMatrix:
    """Apply a unitary to the named factors (all factors when ``on`` is None)."""
    labels: Sequence[str]
    if on is None:
        labels = state.layout.labels
    elif isinstance(on, str):
        labels = (on,)
    else:
        labels = tuple(on)
    u = _as_complex_array(u, "unitary")
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"unitary must be square, got shape {u.shape}")
    dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if dev > UNITARY_ATOL:
        raise ValueError(f"matrix is not unitary (max deviation {dev:.3e})")
    big = embed_operator(state.layout, u, labels)
    if isinstance(state, StateVector):
        return StateVector(state.layout, big @ state.amps)
    return DensityMatrix(state.layout, big @ state.entries @ big.conj().T)


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the sum of absolute eigenvalues of the difference; in [0, 1]."""
    if a.layout != b.layout:
        raise ValueError("trace distance requires matching layouts")
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a.entries - b.entries))))


def fidelity(a: StateVector, b: StateVector) -> float:
    """Squared overlap |<a|b>|^2 of two pure states."""
    if a.layout != b.layout:
        raise ValueError("fidelity requires matching layouts")
    return float(np.abs(np.vdot(a.amps, b.amps)) ** 2)
