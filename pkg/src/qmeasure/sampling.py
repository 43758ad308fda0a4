"""Seeded randomness: Haar unitaries, random POVMs and channels, Born sampling.

Every stochastic routine takes an explicit ``numpy.random.Generator``.  Monte
Carlo loops split a parent generator into independent child streams (one per
trial) so trials can run in any order, or concurrently, with identical
results.
"""

from __future__ import annotations

import numpy as np

from .channels import Povm, QuantumChannel, projective_povm
from .states import DensityMatrix, StateVector, SubsystemLayout


def make_rng(seed: int | None = None) -> np.random.Generator:
    return np.random.default_rng(seed)


def split_streams(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    """Independent child generators with a deterministic spawn order."""
    return rng.spawn(n)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix.

    The R diagonal phases are divided out so the distribution is exactly
    Haar rather than QR-convention dependent.
    """
    if dim < 1:
        raise ValueError("dimension must be at least 1")
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state(layout: SubsystemLayout, rng: np.random.Generator) -> StateVector:
    """Haar-random pure state on the layout's joint space."""
    z = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
    return StateVector(layout, z / np.linalg.norm(z))


def random_density(
    layout: SubsystemLayout, rng: np.random.Generator, rank: int | None = None
) -> DensityMatrix:
    """Random full- or fixed-rank density matrix (Wishart construction)."""
    d = layout.dim
    r = d if rank is None else rank
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    m = g @ g.conj().T
    return DensityMatrix(layout, m / np.trace(m))


def random_povm(
    dim: int,
    n_outcomes: int,
    rng: np.random.Generator,
    projective: bool = False,
) -> Povm:
    """Random POVM: a positive partition of identity conjugated into shape.

    With ``projective=True`` (requires ``n_outcomes == dim``) the effects are
    the rank-1 projectors onto the columns of one Haar unitary.
    """
    if n_outcomes < 2:
        raise ValueError("a POVM needs at least 2 outcomes")
    if projective:
        if n_outcomes != dim:
            raise ValueError("projective construction requires n_outcomes == dim")
        u = random_unitary(dim, rng)
        return projective_povm(tuple(u[:, k] for k in range(dim)))
    blocks = []
    for _ in range(n_outcomes):
        g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        blocks.append(g @ g.conj().T)
    total = sum(blocks)
    eigvals, eigvecs = np.linalg.eigh(total)
    inv_sqrt = eigvecs @ np.diag(1.0 / np.sqrt(eigvals)) @ eigvecs.conj().T
    return Povm(tuple(inv_sqrt @ b @ inv_sqrt for b in blocks))


def random_channel(dim: int, n_kraus: int, rng: np.random.Generator) -> QuantumChannel:
    """Random CPTP channel from a Haar isometry cut into Kraus blocks."""
    if n_kraus < 1:
        raise ValueError("need at least one Kraus element")
    big = random_unitary(dim * n_kraus, rng)
    isometry = big[:, :dim]
    return QuantumChannel(tuple(isometry[k * dim : (k + 1) * dim, :] for k in range(n_kraus)))


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Draw one outcome index from a (possibly unnormalized) probability vector."""
    p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    total = p.sum()
    if total <= 0.0:
        raise ValueError("cannot sample from an all-zero probability vector")
    return int(rng.choice(len(p), p=p / total))


def sample_counts(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial outcome counts for the given number of shots."""
    if shots < 0:
        raise ValueError("shots must be non-negative")
    p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    total = p.sum()
    if total <= 0.0:
        raise ValueError("cannot sample from an all-zero probability vector")
    return rng.multinomial(shots, p / total)
