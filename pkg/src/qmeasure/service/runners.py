"""Runner layer shared by the HTTP service and the CLI.

Each runner resolves the seed (request value, then the QMEASURE_SEED
environment variable, then fresh OS entropy), drives the core package, and
wraps the result in a serializable report that echoes the request.
"""

from __future__ import annotations

import os
import time

import numpy as np

from ..experiments import (
    ChshSetting,
    SlitGeometry,
    chsh_report,
    double_slit,
    fringe_visibility,
    mach_zehnder,
    measured_fringe_spacing,
    stern_gerlach,
)
from ..measurement import MeasurementBasis, mark, reduced_marker, sample_detections, simulate_device_runs
from ..nosignal import ProtocolConfig, run_protocol
from ..reports import RunReport, jsonable
from ..sampling import make_rng
from ..states import (
    StateVector,
    bell_phi_plus,
    fidelity,
    ket,
    named_qubit,
    normalized_ket,
    tensor,
)
from ..verify import run_checks
from .schemas import (
    CheckReport,
    ChshRequest,
    DeviceRunsRequest,
    DoubleSlitRequest,
    MachZehnderRequest,
    MeasureRequest,
    NosignalRequest,
    ProfileReport,
    Report,
    SternGerlachRequest,
    VerifyReport,
    VerifyRequest,
)

SEED_ENV_VAR = "QMEASURE_SEED"


def resolve_seed(seed: int | None) -> int:
    """Request seed, else QMEASURE_SEED, else fresh OS entropy."""
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV_VAR)
    if env:
        return int(env)
    return int(np.random.SeedSequence().entropy % (2**63))


def _qubit_from(name: str, amps: list[float] | None, label: str = "spin") -> StateVector:
    if amps is None:
        return named_qubit(name, label)
    if len(amps) != 4:
        raise ValueError("qubit amplitudes need 4 reals: [re0, im0, re1, im1]")
    return normalized_ket(label, [amps[0] + 1j * amps[1], amps[2] + 1j * amps[3]])


def _two_qubit_from(name: str, amps: list[float] | None) -> StateVector:
    if amps is not None:
        if len(amps) != 8:
            raise ValueError("two-qubit amplitudes need 8 reals (re, im pairs)")
        values = [amps[2 * i] + 1j * amps[2 * i + 1] for i in range(4)]
        arr = np.asarray(values)
        norm = np.linalg.norm(arr)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(bell_phi_plus().layout, arr / norm)
    if name == "phi+":
        return bell_phi_plus()
    if name == "up-up":
        return tensor(named_qubit("up", "alice"), named_qubit("up", "bob"))
    raise ValueError(f"unknown two-qubit state {name!r}; choose 'phi+' or 'up-up'")


def _finalize(report: RunReport, seed: int, config: dict, t0: float) -> Report:
    report.seed = seed
    report.config = config
    report.wall_time_s = time.perf_counter() - t0
    return Report(**report.to_dict())


def run_measure(req: MeasureRequest) -> Report:
    t0 = time.perf_counter()
    seed = resolve_seed(req.seed)
    rng = make_rng(seed)
    system = _qubit_from(req.state, req.amps)
    basis = MeasurementBasis.z_qubit()
    ms = mark(system, basis, marker_label="pointer")
    exact = tuple(float(p) for p in reduced_marker(ms).diagonal())

    report = RunReport(
        command="measure",
        outcome_labels=basis.labels,
        exact_probabilities=exact,
        diagnostics={"basis": "z"},
    )
    shots = 0 if req.exact else req.shots
    if shots > 0:
        indices, counts, outcomes = sample_detections(ms, shots, rng)
        report.counts = tuple(int(c) for c in counts)
        report.sampled_frequencies = tuple(c / shots for c in report.counts)
        report.shots = shots
        basis_kets = [ket("spin", basis.states[i]) for i in range(len(basis))]
        fidelities = [
            fidelity(o.post_system, basis_kets[o.index]) for o in outcomes if o.post_system is not None
        ]
        report.diagnostics["min_post_state_fidelity"] = min(fidelities) if fidelities else None
    return _finalize(report, seed, req.model_dump(), t0)


def run_stern_gerlach(req: SternGerlachRequest) -> Report:
    t0 = time.perf_counter()
    seed = resolve_seed(req.seed)
    shots = 0 if req.exact else req.shots
    state = _qubit_from(req.state, None)
    report = stern_gerlach(shots=shots, rng=make_rng(seed), state=state)
    return _finalize(report, seed, req.model_dump(), t0)


def run_mach_zehnder(req: MachZehnderRequest) -> Report:
    t0 = time.perf_counter()
    seed = resolve_seed(req.seed)
    shots = 0 if req.exact else req.shots
    report = mach_zehnder(
        second_mirror=req.second_mirror, phase=req.phase, shots=shots, rng=make_rng(seed)
    )
    return _finalize(report, seed, req.model_dump(), t0)


def run_double_slit(req: DoubleSlitRequest) -> ProfileReport:
    t0 = time.perf_counter()
    seed = resolve_seed(req.seed)
    geom = SlitGeometry(
        slit_separation=req.slit_separation,
        slit_width=req.slit_width,
        wavelength=req.wavelength,
        screen_distance=req.screen_distance,
        x_min=req.x_min,
        x_max=req.x_max,
        n_points=req.n_points,
        amplitudes=(req.amplitude_1, req.amplitude_2),
    )
    open_slits = (req.slit_1_open, req.slit_2_open)
    profile = double_slit(geom, open_slits)
    diagnostics = {
        "normalization": float(profile.bin_probabilities.sum()),
        "expected_fringe_spacing": geom.fringe_spacing,
        "far_field": geom.far_field,
        "grid_step": geom.dx,
        "open_slits": list(open_slits),
    }
    if all(open_slits):
        diagnostics["measured_fringe_spacing"] = measured_fringe_spacing(profile)
        diagnostics["fringe_visibility"] = fringe_visibility(profile)
    return ProfileReport(
        command="double-slit",
        seed=seed,
        config=req.model_dump(),
        diagnostics=jsonable(diagnostics),
        x=[float(v) for v in profile.x],
        density=[float(v) for v in profile.density],
        wall_time_s=time.perf_counter() - t0,
    )


def run_chsh(req: ChshRequest) -> Report:
    t0 = time.perf_counter()
    seed = resolve_seed(req.seed)
    setting = ChshSetting(tuple(req.alice_angles), tuple(req.bob_angles))
    state = _two_qubit_from(req.state, req.amps)
    report = chsh_report(setting, state, shots=req.shots, rng=make_rng(seed))
    return _finalize(report, seed, req.model_dump(), t0)


def run_nosignal(req: NosignalRequest) -> Report:
    t0 = time.perf_counter()
    seed = resolve_seed(req.seed)
    rng = make_rng(seed)
    if req.message_bits is None:
        bits = [int(b) for b in rng.integers(0, 2, size=req.n_groups)]
    else:
        bits = [int(b) for b in req.message_bits]
    cfg = ProtocolConfig(
        n_pairs_per_group=req.n_pairs_per_group,
        n_groups=req.n_groups,
        process_pool_size=req.process_pool_size,
        seed=seed,
    )
    result = run_protocol(cfg, bits, rng=rng)
    report = RunReport(
        command="nosignal",
        diagnostics={
            "decoded_accuracy": result.decoded_accuracy,
            "chance_3sigma_band": 3 * float(np.sqrt(0.25 / req.n_groups)),
            "message_bits": list(result.message_bits),
            "decoded_bits": list(result.decoded_bits),
            "max_exact_separation": result.max_separation,
            "max_trace_distance": max(result.trace_distances),
            "process_pool_size": req.process_pool_size,
        },
    )
    return _finalize(report, seed, req.model_dump(), t0)


def run_device_runs(req: DeviceRunsRequest) -> Report:
    t0 = time.perf_counter()
    seed = resolve_seed(req.seed)
    system = _qubit_from(req.state, req.amps)
    report = simulate_device_runs(
        system,
        MeasurementBasis.z_qubit(),
        n_env_qubits=req.n_env_qubits,
        n_runs=req.n_runs,
        rng=make_rng(seed),
    )
    return _finalize(report, seed, req.model_dump(), t0)


def run_verify(req: VerifyRequest) -> VerifyReport:
    results = run_checks(req.checks, fast=req.fast)
    return VerifyReport(
        passed=all(r.passed for r in results),
        fast=req.fast,
        checks=[
            CheckReport(name=r.name, passed=r.passed, detail=r.detail, elapsed_s=r.elapsed_s)
            for r in results
        ],
    )
