"""Serializable run reports shared by experiments, the CLI, and the service."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


def complex_matrix_to_json(m: np.ndarray) -> list[list[list[float]]]:
    """Row-major [re, im] pairs, the debug dump format for complex matrices."""
    arr = np.asarray(m, dtype=np.complex128)
    return [[[float(v.real), float(v.imag)] for v in row] for row in arr]


def jsonable(value: Any) -> Any:
    """Recursively convert numpy scalars/arrays and complex numbers to JSON types."""
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


@dataclass
class RunReport:
    """Outcome labels, probabilities, sampled frequencies, seed, diagnostics."""

    command: str
    outcome_labels: tuple[str, ...] | None = None
    exact_probabilities: tuple[float, ...] | None = None
    sampled_frequencies: tuple[float, ...] | None = None
    counts: tuple[int, ...] | None = None
    shots: int | None = None
    seed: int | None = None
    config: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    wall_time_s: float | None = None

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "outcome_labels": jsonable(self.outcome_labels),
            "exact_probabilities": jsonable(self.exact_probabilities),
            "sampled_frequencies": jsonable(self.sampled_frequencies),
            "counts": jsonable(self.counts),
            "shots": self.shots,
            "seed": self.seed,
            "config": jsonable(self.config),
            "diagnostics": jsonable(self.diagnostics),
            "wall_time_s": self.wall_time_s,
        }
