"""Executable reduced-state vs mixed-state indistinguishability protocol.

Alice and Bob share entangled qubit pairs.  To send bit 0 Alice leaves her
half alone (Bob's electron is then described by the reduced state); to send
bit 1 she measures her half in the up/down basis (Bob's electron is then an
up/down mixture).  Bob attacks each group of pairs with a pool of random
processes (CPTP channel followed by a POVM) and decodes by maximum
likelihood.  Because the two descriptions are the same density matrix, every
process yields identical statistics and the decoder stays at chance level:
the channel carries no information.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import Povm, QuantumChannel, apply_channel, born_probabilities
from .measurement import MeasurementBasis, enumerate_outcomes, mark
from .sampling import make_rng, random_channel, random_povm, sample_counts
from .states import (
    DensityMatrix,
    StateVector,
    bell_phi_plus,
    mix,
    partial_trace,
    to_density,
    trace_distance,
)

# log-likelihood differences below this are genuine ties (identical hypotheses)
LOGLIK_TIE = 1e-9
_PROB_FLOOR = 1e-300


@dataclass(frozen=True)
class ProtocolConfig:
    n_pairs_per_group: int
    n_groups: int
    process_pool_size: int
    seed: int

    def __post_init__(self) -> None:
        for name in ("n_pairs_per_group", "n_groups", "process_pool_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True, eq=False)
class BobPreparation:
    """Bob's single-electron description: 'reduced' (Alice idle) or 'mixed'."""

    kind: str
    state: DensityMatrix

    def __post_init__(self) -> None:
        if self.kind not in ("reduced", "mixed"):
            raise ValueError(f"kind must be 'reduced' or 'mixed', got {self.kind!r}")


@dataclass(frozen=True, eq=False)
class DistinguishReport:
    trace_distances: tuple[float, ...]
    exact_reduced_stats: tuple[tuple[float, ...], ...]
    exact_mixed_stats: tuple[tuple[float, ...], ...]
    max_separation: float
    message_bits: tuple[int, ...]
    decoded_bits: tuple[int, ...]
    decoded_accuracy: float
    seed: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.decoded_accuracy <= 1.0:
            raise ValueError("decoded accuracy must lie in [0, 1]")


def alice_branches(pair: StateVector) -> list[tuple[float, StateVector]]:
    """Alice's up/down measurement branches: (probability, Bob's conditional state).

    The measurement is run through the marking model on Alice's factor, so the
    branch weights and Bob's post states come from the simulated device, not
    from a closed-form shortcut.
    """
    alice_label, bob_label = pair.layout.labels
    basis = MeasurementBasis.z_qubit()
    ms = mark(pair, basis, on=alice_label, marker_label="alice_pointer")
    branches = []
    for outcome in enumerate_outcomes(ms):
        if outcome.post_system is None:
            continue
        t = outcome.post_system.as_tensor()
        bob_amps = np.einsum("a,ab->b", basis.states[outcome.index].conj(), t)
        bob_amps = bob_amps / np.linalg.norm(bob_amps)
        bob_state = StateVector(pair.layout.keep((bob_label,)), bob_amps)
        branches.append((outcome.probability, bob_state))
    return branches


def alice_prepare(
    bit: int,
    rng: np.random.Generator | None = None,
    pair: StateVector | None = None,
    n_samples: int | None = None,
) -> BobPreparation:
    """Bob's description of his electron after Alice acts according to ``bit``.

    Bit 0: Alice does nothing; Bob holds the reduced state of the pair.
    Bit 1: Alice measures up/down; Bob holds the mixture of her branches.
    With ``n_samples`` the bit-1 mixture uses empirical branch frequencies
    sampled with ``rng`` instead of the exact branch probabilities.
    """
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    if pair is None:
        pair = bell_phi_plus()
    if len(pair.layout.labels) != 2:
        raise ValueError("the shared pair must have exactly two factors")
    bob_label = pair.layout.labels[1]
    if bit == 0:
        return BobPreparation("reduced", partial_trace(to_density(pair), keep=bob_label))
    branches = alice_branches(pair)
    if n_samples is not None:
        if rng is None:
            raise ValueError("sampled preparation needs an rng")
        counts = sample_counts(np.array([p for p, _ in branches]), n_samples, rng)
        branches = [(c / n_samples, state) for c, (_, state) in zip(counts, branches)]
    return BobPreparation("mixed", mix(branches))


def bob_statistics(
    prep: BobPreparation,
    ch: QuantumChannel,
    m: Povm,
    shots: int = 0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Outcome statistics of one process (channel then POVM) on Bob's electron.

    ``shots == 0`` returns exact Born probabilities; otherwise sampled
    frequencies over the given number of shots.
    """
    probs = born_probabilities(apply_channel(prep.state, ch), m)
    if shots == 0:
        return probs
    if rng is None:
        raise ValueError("sampled statistics need an rng")
    return sample_counts(probs, shots, rng) / shots


def sample_processes(
    pool_size: int, dim: int, rng: np.random.Generator
) -> list[tuple[QuantumChannel, Povm]]:
    """Random pool of candidate distinguishing processes."""
    pool = []
    for _ in range(pool_size):
        n_kraus = int(rng.integers(1, 5))
        channel = random_channel(dim, n_kraus, rng)
        n_outcomes = int(rng.integers(2, 5))
        povm = random_povm(dim, n_outcomes, rng)
        pool.append((channel, povm))
    return pool


def _group_shares(n_pairs: int, pool_size: int) -> list[int]:
    base, extra = divmod(n_pairs, pool_size)
    return [base + (1 if k < extra else 0) for k in range(pool_size)]


def run_protocol(
    cfg: ProtocolConfig,
    message_bits: list[int] | tuple[int, ...],
    rng: np.random.Generator | None = None,
) -> DistinguishReport:
    """Run the full communication attempt and report how well Bob decodes.

    Per group, Bob splits his pairs across the process pool, collects outcome
    counts, and picks the bit whose hypothesis (reduced vs mixed exact
    statistics) has the higher likelihood; exact ties are resolved by a fair
    coin, which is the honest maximum-likelihood behavior when the two
    hypotheses coincide.
    """
    bits = tuple(int(b) for b in message_bits)
    if len(bits) != cfg.n_groups:
        raise ValueError(f"message length {len(bits)} must equal n_groups {cfg.n_groups}")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("message bits must be 0 or 1")
    if rng is None:
        rng = make_rng(cfg.seed)

    pool = sample_processes(cfg.process_pool_size, 2, rng)
    prep_reduced = alice_prepare(0)
    prep_mixed = alice_prepare(1)
    exact_reduced = [bob_statistics(prep_reduced, ch, m) for ch, m in pool]
    exact_mixed = [bob_statistics(prep_mixed, ch, m) for ch, m in pool]
    tds = [
        trace_distance(apply_channel(prep_reduced.state, ch), apply_channel(prep_mixed.state, ch))
        for ch, m in pool
    ]
    max_separation = max(
        0.5 * float(np.abs(p0 - p1).sum()) for p0, p1 in zip(exact_reduced, exact_mixed)
    )

    branches = alice_branches(bell_phi_plus())
    branch_probs = np.array([p for p, _ in branches])
    conditional = [
        [born_probabilities(apply_channel(to_density(state), ch), m) for _, state in branches]
        for ch, m in pool
    ]

    shares = _group_shares(cfg.n_pairs_per_group, cfg.process_pool_size)
    decoded = []
    for bit in bits:
        delta = 0.0
        for k, _ in enumerate(pool):
            if shares[k] == 0:
                continue
            if bit == 0:
                counts = sample_counts(exact_reduced[k], shares[k], rng)
            else:
                per_branch = sample_counts(branch_probs, shares[k], rng)
                counts = np.zeros(len(exact_mixed[k]), dtype=int)
                for i, n_i in enumerate(per_branch):
                    if n_i:
                        counts += sample_counts(conditional[k][i], int(n_i), rng)
            log_ratio = np.log(np.clip(exact_reduced[k], _PROB_FLOOR, None)) - np.log(
                np.clip(exact_mixed[k], _PROB_FLOOR, None)
            )
            delta += float(counts @ log_ratio)
        if delta > LOGLIK_TIE:
            decoded.append(0)
        elif delta < -LOGLIK_TIE:
            decoded.append(1)
        else:
            decoded.append(int(rng.integers(2)))

    accuracy = float(np.mean([d == b for d, b in zip(decoded, bits)]))
    return DistinguishReport(
        trace_distances=tuple(tds),
        exact_reduced_stats=tuple(tuple(float(x) for x in p) for p in exact_reduced),
        exact_mixed_stats=tuple(tuple(float(x) for x in p) for p in exact_mixed),
        max_separation=float(max_separation),
        message_bits=bits,
        decoded_bits=tuple(decoded),
        decoded_accuracy=accuracy,
        seed=cfg.seed,
    )
