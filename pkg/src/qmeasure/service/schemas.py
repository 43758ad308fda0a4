"""Request/response models for the qmeasure service and CLI."""

from __future__ import annotations

import math
from typing import Any

from pydantic import BaseModel, Field


class MeasureRequest(BaseModel):
    state: str = "y+"
    amps: list[float] | None = Field(
        default=None, description="Qubit amplitudes as [re0, im0, re1, im1]; overrides 'state'"
    )
    shots: int = Field(default=100_000, ge=0)
    exact: bool = False
    seed: int | None = None


class SternGerlachRequest(BaseModel):
    state: str = "y+"
    shots: int = Field(default=100_000, ge=0)
    exact: bool = False
    seed: int | None = None


class MachZehnderRequest(BaseModel):
    second_mirror: bool = False
    phase: float = 0.0
    shots: int = Field(default=100_000, ge=0)
    exact: bool = False
    seed: int | None = None


class DoubleSlitRequest(BaseModel):
    slit_separation: float = Field(default=50e-6, gt=0)
    slit_width: float = Field(default=10e-6, gt=0)
    wavelength: float = Field(default=500e-9, gt=0)
    screen_distance: float = Field(default=1.0, gt=0)
    x_min: float = -0.05
    x_max: float = 0.05
    n_points: int = Field(default=2001, ge=64)
    slit_1_open: bool = True
    slit_2_open: bool = True
    amplitude_1: float = Field(default=1.0, ge=0)
    amplitude_2: float = Field(default=1.0, ge=0)
    seed: int | None = Field(default=None, description="echoed only; the profile is deterministic")


class ChshRequest(BaseModel):
    alice_angles: tuple[float, float] = (0.0, math.pi / 2)
    bob_angles: tuple[float, float] = (math.pi / 4, 3 * math.pi / 4)
    state: str = Field(default="phi+", description="'phi+' (Bell) or 'up-up' (product)")
    amps: list[float] | None = Field(
        default=None, description="Two-qubit amplitudes as 8 reals (re, im pairs); overrides 'state'"
    )
    shots: int = Field(default=0, ge=0, description="shots per correlator; 0 = exact only")
    seed: int | None = None


class NosignalRequest(BaseModel):
    n_pairs_per_group: int = Field(default=200, ge=1)
    n_groups: int = Field(default=50, ge=1)
    process_pool_size: int = Field(default=20, ge=1)
    message_bits: list[int] | None = Field(
        default=None, description="bits Alice sends; random when omitted"
    )
    seed: int | None = None


class DeviceRunsRequest(BaseModel):
    state: str = "plus"
    amps: list[float] | None = None
    n_env_qubits: int = Field(default=8, ge=0, le=12)
    n_runs: int = Field(default=1000, ge=1)
    seed: int | None = None


class VerifyRequest(BaseModel):
    checks: list[str] | None = Field(default=None, description="check names; all when omitted")
    fast: bool = True


class Report(BaseModel):
    command: str
    outcome_labels: list[str] | None = None
    exact_probabilities: list[float] | None = None
    sampled_frequencies: list[float] | None = None
    counts: list[int] | None = None
    shots: int | None = None
    seed: int | None = None
    config: dict[str, Any] = Field(default_factory=dict)
    diagnostics: dict[str, Any] = Field(default_factory=dict)
    wall_time_s: float | None = None


class ProfileReport(Report):
    x: list[float] = Field(default_factory=list)
    density: list[float] = Field(default_factory=list)


class CheckReport(BaseModel):
    name: str
    passed: bool
    detail: str
    elapsed_s: float


class VerifyReport(BaseModel):
    passed: bool
    fast: bool
    checks: list[CheckReport]
