"""Self-verification: acceptance criteria and module invariants as named checks.

Each check is a pure function returning a CheckResult; the CLI ``verify``
subcommand and the service ``/verify`` endpoint run the registry and fail
loudly on the first breach.  Statistical checks use fixed seeds so a pass is
reproducible, with 3-sigma bounds stated next to the sampled quantity.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from math import prod
from typing import Callable

import numpy as np

from .channels import apply_channel, born_probabilities, computational_povm
from .experiments import (
    SlitGeometry,
    chsh,
    double_slit,
    fringe_visibility,
    mach_zehnder,
    measured_fringe_spacing,
    optimal_chsh_setting,
    profile_peaks,
    stern_gerlach,
)
from .measurement import (
    MeasurementBasis,
    knowledge_chain,
    mark,
    reduced_marker,
    sample_detections,
    simulate_device_runs,
)
from .nosignal import ProtocolConfig, alice_prepare, run_protocol
from .sampling import (
    make_rng,
    random_channel,
    random_density,
    random_povm,
    random_state,
    random_unitary,
)
from .states import (
    SubsystemLayout,
    apply_unitary,
    bell_phi_plus,
    fidelity,
    ket,
    mix,
    named_qubit,
    partial_trace,
    tensor,
    to_density,
    trace_distance,
)

# chi-square critical value for p = 0.001 at one degree of freedom
_CHI2_CRIT_DF1 = 10.827566170662733


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed_s: float


def _finish(name: str, passed: bool, detail: str, t0: float) -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), detail=detail, elapsed_s=time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Acceptance criteria


def check_reduced_state_identity(**_) -> CheckResult:
    """Both reduced states of the Bell pair equal I/2 entrywise within 1e-12, in under 1 ms."""
    t0 = time.perf_counter()
    phi = to_density(bell_phi_plus())
    half_identity = np.eye(2) / 2
    dev = 0.0
    for keep in ("alice", "bob"):
        dev = max(dev, float(np.max(np.abs(partial_trace(phi, keep).entries - half_identity))))
    partial_trace(phi, "alice")  # warm path before timing
    runtime = min(
        _timed(lambda: partial_trace(phi, "alice")) for _ in range(5)
    )
    passed = dev <= 1e-12 and runtime < 1e-3
    return _finish(
        "reduced_state_identity",
        passed,
        f"max entry deviation {dev:.2e} (tol 1e-12), single trace {runtime * 1e6:.0f} us (< 1 ms)",
        t0,
    )


def _timed(fn: Callable[[], object]) -> float:
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


def check_equivalence_identity(n_states: int = 20, n_processes: int = 100, seed: int = 11, **_) -> CheckResult:
    """Reduced state equals the averaged post-measurement ensemble; all processes agree."""
    t0 = time.perf_counter()
    rng = make_rng(seed)
    pair_layout = SubsystemLayout((("alice", 2), ("bob", 2)))
    pairs = [bell_phi_plus()] + [random_state(pair_layout, rng) for _ in range(n_states)]
    max_td = max(
        trace_distance(alice_prepare(0, pair=p).state, alice_prepare(1, pair=p).state) for p in pairs
    )

    prep0 = alice_prepare(0)
    prep1 = alice_prepare(1)
    max_stat = 0.0
    for _ in range(n_processes):
        ch = random_channel(2, int(rng.integers(1, 5)), rng)
        povm = random_povm(2, int(rng.integers(2, 5)), rng)
        p0 = born_probabilities(apply_channel(prep0.state, ch), povm)
        p1 = born_probabilities(apply_channel(prep1.state, ch), povm)
        max_stat = max(max_stat, float(np.max(np.abs(p0 - p1))))
    elapsed = time.perf_counter() - t0
    passed = max_td <= 1e-12 and max_stat <= 1e-12 and elapsed < 1.0
    return _finish(
        "equivalence_identity",
        passed,
        f"max trace distance {max_td:.2e}, max process-statistic gap {max_stat:.2e} "
        f"(tol 1e-12), {elapsed:.2f} s (< 1 s)",
        t0,
    )


def check_nosignal_chance_level(
    n_seeds: int = 10,
    n_groups: int = 50,
    n_pairs: int = 200,
    pool_size: int = 20,
    base_seed: int = 7,
    **_,
) -> CheckResult:
    """Decoded-bit accuracy sits within 3 sigma of chance for every seed."""
    t0 = time.perf_counter()
    sigma = np.sqrt(0.25 / n_groups)
    worst = 0.0
    max_td = 0.0
    for i in range(n_seeds):
        cfg = ProtocolConfig(n_pairs, n_groups, pool_size, seed=base_seed + i)
        message = make_rng(10_000 + i).integers(0, 2, size=n_groups).tolist()
        report = run_protocol(cfg, message)
        worst = max(worst, abs(report.decoded_accuracy - 0.5))
        max_td = max(max_td, max(report.trace_distances))
    elapsed = time.perf_counter() - t0
    passed = worst <= 3 * sigma and max_td <= 1e-12 and elapsed < 30.0
    return _finish(
        "nosignal_chance_level",
        passed,
        f"worst |accuracy-0.5| {worst:.3f} (3 sigma {3 * sigma:.3f}), "
        f"max exact trace distance {max_td:.2e}, {elapsed:.1f} s (< 30 s)",
        t0,
    )


def check_measurement_postulate(shots: int = 100_000, seed: int = 5, **_) -> CheckResult:
    """mark+detect reproduces Born statistics and leaves matching post states."""
    t0 = time.perf_counter()
    system = ket("spin", (0.6, 0.8))
    ms = mark(system, MeasurementBasis.z_qubit())
    indices, counts, outcomes = sample_detections(ms, shots, make_rng(seed))
    freq0 = counts[0] / shots
    sigma = np.sqrt(0.36 * 0.64 / shots)
    basis_states = [ket("spin", (1, 0)), ket("spin", (0, 1))]
    fidelities = np.array(
        [fidelity(o.post_system, basis_states[o.index]) if o.post_system else 0.0 for o in outcomes]
    )
    per_shot_fidelity = fidelities[indices]  # each shot resolves to one branch
    min_fid = float(per_shot_fidelity.min())
    elapsed = time.perf_counter() - t0
    passed = abs(freq0 - 0.36) <= 3 * sigma and min_fid >= 1 - 1e-10 and elapsed < 5.0
    return _finish(
        "measurement_postulate_recovery",
        passed,
        f"freq(outcome 0) {freq0:.4f} vs 0.36 +- {3 * sigma:.4f}, "
        f"min per-shot fidelity {min_fid:.12f}, {elapsed:.1f} s (< 5 s)",
        t0,
    )


def check_stern_gerlach_exact(**_) -> CheckResult:
    """Exact path probabilities are (1/2, 1/2) and the reduced path state is I/2."""
    t0 = time.perf_counter()
    report = stern_gerlach(shots=0)
    probs = np.array(report.exact_probabilities)
    dev = float(np.max(np.abs(probs - 0.5)))
    off = float(report.diagnostics["reduced_path_off_diagonal"])
    passed = dev <= 1e-12 and off <= 1e-12
    return _finish(
        "stern_gerlach_exact",
        passed,
        f"max |p - 0.5| = {dev:.2e}, reduced-path off-diagonal {off:.2e} (tol 1e-12)",
        t0,
    )


def check_mach_zehnder(n_phases: int = 32, **_) -> CheckResult:
    """No mirror: 50/50 exactly; with mirror: (sin^2, cos^2)(phase/2) across the sweep."""
    t0 = time.perf_counter()
    open_probs = np.array(mach_zehnder(second_mirror=False).exact_probabilities)
    dev_open = float(np.max(np.abs(open_probs - 0.5)))
    dev_sweep = 0.0
    dev_sum = 0.0
    for phase in np.linspace(0.0, 2 * np.pi, n_phases):
        probs = np.array(mach_zehnder(second_mirror=True, phase=phase).exact_probabilities)
        expected = np.array([np.sin(phase / 2) ** 2, np.cos(phase / 2) ** 2])
        dev_sweep = max(dev_sweep, float(np.max(np.abs(probs - expected))))
        dev_sum = max(dev_sum, abs(float(probs.sum()) - 1.0))
    passed = dev_open <= 1e-12 and dev_sweep <= 1e-10 and dev_sum <= 1e-12
    return _finish(
        "mach_zehnder",
        passed,
        f"no-mirror deviation {dev_open:.2e} (tol 1e-12), sweep deviation {dev_sweep:.2e} "
        f"(tol 1e-10) over {n_phases} phases",
        t0,
    )


# slit width d/50 keeps the Gaussian envelope's peak pull well under a grid step
_FRINGE_GEOMETRIES = (
    SlitGeometry(50e-6, 1e-6, 500e-9, 1.0, -0.05, 0.05, 4001),
    SlitGeometry(100e-6, 2e-6, 633e-9, 1.5, -0.04, 0.04, 4001),
    SlitGeometry(25e-6, 0.5e-6, 450e-9, 0.8, -0.06, 0.06, 4001),
)


def check_double_slit(**_) -> CheckResult:
    """Normalization, analytic fringe spacing, and single-slit envelope behavior."""
    t0 = time.perf_counter()
    worst_norm = 0.0
    worst_spacing = 0.0
    single_peak_ok = True
    for geom in _FRINGE_GEOMETRIES:
        profile = double_slit(geom)
        worst_norm = max(worst_norm, abs(float(profile.bin_probabilities.sum()) - 1.0))
        spacing_err = abs(measured_fringe_spacing(profile) - geom.fringe_spacing) / geom.dx
        worst_spacing = max(worst_spacing, spacing_err)
        for open_slits in ((True, False), (False, True)):
            single = double_slit(geom, open_slits)
            single_peak_ok &= len(profile_peaks(single)) == 1
    passed = worst_norm <= 1e-9 and worst_spacing <= 1.0 and single_peak_ok
    return _finish(
        "double_slit",
        passed,
        f"norm error {worst_norm:.2e} (tol 1e-9), fringe-spacing error {worst_spacing:.2f} "
        f"grid steps (tol 1), single-slit single-peak: {single_peak_ok}",
        t0,
    )


def check_bell_violation(n_product_states: int = 100, seed: int = 3, **_) -> CheckResult:
    """Bell state reaches 2 sqrt(2) exactly; product states respect the classical bound."""
    t0 = time.perf_counter()
    setting = optimal_chsh_setting()
    s_bell = chsh(setting, bell_phi_plus())
    bell_err = abs(s_bell - 2 * np.sqrt(2.0))
    rng = make_rng(seed)
    worst_product = 0.0
    for _ in range(n_product_states):
        state = tensor(
            random_state(SubsystemLayout((("alice", 2),)), rng),
            random_state(SubsystemLayout((("bob", 2),)), rng),
        )
        worst_product = max(worst_product, abs(chsh(setting, state)))
    passed = bell_err <= 1e-9 and worst_product <= 2 + 1e-9
    return _finish(
        "bell_violation",
        passed,
        f"S(Bell) = {s_bell:.12f} (|err| {bell_err:.2e}, tol 1e-9); "
        f"max |S| over {n_product_states} product states {worst_product:.9f} (<= 2 + 1e-9)",
        t0,
    )


def check_device_runs(n_runs: int = 1000, seed: int = 21, **_) -> CheckResult:
    """Definite pointer every run, Born frequencies, and coherence decay with environment size."""
    t0 = time.perf_counter()
    system = named_qubit("plus", "spin")
    basis = MeasurementBasis.z_qubit()
    reports = {
        n_env: simulate_device_runs(system, basis, n_env, n_runs, make_rng(seed + n_env))
        for n_env in (2, 8)
    }
    sigma = np.sqrt(0.25 / n_runs)
    freq_dev = max(
        float(np.max(np.abs(np.array(r.sampled_frequencies) - 0.5))) for r in reports.values()
    )
    counts_ok = all(sum(r.counts) == n_runs for r in reports.values())
    coh2 = reports[2].diagnostics["mean_marker_coherence"]
    coh8 = reports[8].diagnostics["mean_marker_coherence"]
    elapsed = time.perf_counter() - t0
    passed = freq_dev <= 3 * sigma and counts_ok and coh8 < coh2 and elapsed < 60.0
    return _finish(
        "device_runs",
        passed,
        f"max |freq-0.5| {freq_dev:.4f} (3 sigma {3 * sigma:.4f}), one outcome per run: {counts_ok}, "
        f"coherence {coh8:.4f} @ 8 env qubits < {coh2:.4f} @ 2, {elapsed:.1f} s (< 60 s)",
        t0,
    )


def brute_force_partial_trace(entries: np.ndarray, dims: tuple[int, ...], keep_axes: tuple[int, ...]) -> np.ndarray:
    """Independent oracle: explicit double loop with index summation over traced factors."""
    keep_axes = tuple(sorted(keep_axes))
    traced_axes = tuple(i for i in range(len(dims)) if i not in keep_axes)
    keep_dims = [dims[i] for i in keep_axes]
    traced_dims = [dims[i] for i in traced_axes]
    d_out = prod(keep_dims)
    out = np.zeros((d_out, d_out), dtype=np.complex128)
    for row_keep in itertools.product(*[range(d) for d in keep_dims]):
        for col_keep in itertools.product(*[range(d) for d in keep_dims]):
            total = 0.0 + 0.0j
            for traced in itertools.product(*[range(d) for d in traced_dims]):
                full_row = [0] * len(dims)
                full_col = [0] * len(dims)
                for axis, value in zip(keep_axes, row_keep):
                    full_row[axis] = value
                for axis, value in zip(keep_axes, col_keep):
                    full_col[axis] = value
                for axis, value in zip(traced_axes, traced):
                    full_row[axis] = value
                    full_col[axis] = value
                row = int(np.ravel_multi_index(full_row, dims))
                col = int(np.ravel_multi_index(full_col, dims))
                total += entries[row, col]
            out_row = int(np.ravel_multi_index(row_keep, keep_dims)) if keep_dims else 0
            out_col = int(np.ravel_multi_index(col_keep, keep_dims)) if keep_dims else 0
            out[out_row, out_col] = total
    return out


def _random_layout(rng: np.random.Generator, max_dim: int = 64) -> SubsystemLayout:
    factors = []
    total = 1
    n_factors = int(rng.integers(1, 5))
    for i in range(n_factors):
        dim = int(rng.choice([2, 3, 4]))
        if total * dim > max_dim:
            break
        factors.append((f"f{i}", dim))
        total *= dim
    if not factors:
        factors = [("f0", 2)]
    return SubsystemLayout(tuple(factors))


def check_partial_trace_oracle(n_layouts: int = 40, seed: int = 13, **_) -> CheckResult:
    """partial_trace agrees entrywise with the brute-force index-summation oracle."""
    t0 = time.perf_counter()
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(n_layouts):
        layout = _random_layout(rng)
        rho = random_density(layout, rng)
        labels = list(layout.labels)
        n_keep = int(rng.integers(1, len(labels) + 1))
        keep = [labels[i] for i in sorted(rng.choice(len(labels), size=n_keep, replace=False))]
        fast = partial_trace(rho, keep).entries
        oracle = brute_force_partial_trace(rho.entries, layout.dims, layout.axes_of(keep))
        worst = max(worst, float(np.max(np.abs(fast - oracle))))
    passed = worst <= 1e-12
    return _finish(
        "partial_trace_oracle",
        passed,
        f"max entry deviation over {n_layouts} random layouts (total dim <= 64): {worst:.2e} (tol 1e-12)",
        t0,
    )


# ---------------------------------------------------------------------------
# Module invariants


def check_state_density_validity(n_trials: int = 25, seed: int = 17, **_) -> CheckResult:
    """Norm/Hermiticity/trace/PSD hold after tensor, unitary, trace, and mixing."""
    t0 = time.perf_counter()
    rng = make_rng(seed)
    worst_norm = 0.0
    for _ in range(n_trials):
        a = random_state(SubsystemLayout((("a", 2),)), rng)
        b = random_state(SubsystemLayout((("b", 3),)), rng)
        joint = tensor(a, b)
        u = random_unitary(6, rng)
        evolved = apply_unitary(joint, u)
        worst_norm = max(worst_norm, abs(float(np.linalg.norm(evolved.amps)) - 1.0))
        rho = to_density(evolved)  # constructor enforces Hermiticity/trace/PSD
        partial_trace(rho, "a")
        mix([(0.25, joint), (0.75, evolved)])
    passed = worst_norm <= 1e-12
    return _finish(
        "state_density_validity",
        passed,
        f"max |norm-1| after unitaries {worst_norm:.2e} (tol 1e-12); all constructions validated",
        t0,
    )


def check_product_partial_trace(n_trials: int = 20, seed: int = 19, **_) -> CheckResult:
    """Tracing the partner out of a product state returns the factor exactly."""
    t0 = time.perf_counter()
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(n_trials):
        da, db = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        a = random_state(SubsystemLayout((("a", da),)), rng)
        b = random_state(SubsystemLayout((("b", db),)), rng)
        reduced = partial_trace(to_density(tensor(a, b)), "a")
        worst = max(worst, float(np.max(np.abs(reduced.entries - to_density(a).entries))))
    passed = worst <= 1e-12
    return _finish(
        "product_partial_trace",
        passed,
        f"max entry deviation {worst:.2e} (tol 1e-12) over {n_trials} random products",
        t0,
    )


def check_channel_trace_preservation(n_trials: int = 20, seed: int = 23, **_) -> CheckResult:
    t0 = time.perf_counter()
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(n_trials):
        dim = int(rng.integers(2, 5))
        layout = SubsystemLayout((("s", dim),))
        rho = random_density(layout, rng)
        ch = random_channel(dim, int(rng.integers(1, 4)), rng)
        out = apply_channel(rho, ch)
        worst = max(worst, abs(float(np.real(out.entries.trace())) - 1.0))
    passed = worst <= 1e-10
    return _finish(
        "channel_trace_preservation",
        passed,
        f"max |trace-1| {worst:.2e} (tol 1e-10) over {n_trials} random channels",
        t0,
    )


def check_born_rule_properties(n_trials: int = 20, seed: int = 29, **_) -> CheckResult:
    """Born probabilities sum to one and respect mixture linearity."""
    t0 = time.perf_counter()
    rng = make_rng(seed)
    worst_sum = 0.0
    worst_lin = 0.0
    for _ in range(n_trials):
        dim = int(rng.integers(2, 5))
        layout = SubsystemLayout((("s", dim),))
        povm = random_povm(dim, int(rng.integers(2, 5)), rng)
        rho = random_density(layout, rng)
        worst_sum = max(worst_sum, abs(float(born_probabilities(rho, povm).sum()) - 1.0))
        states = [random_state(layout, rng) for _ in range(3)]
        weights = rng.dirichlet(np.ones(3))
        mixed = mix(list(zip(weights, states)))
        direct = born_probabilities(mixed, povm)
        combined = sum(
            w * born_probabilities(to_density(s), povm) for w, s in zip(weights, states)
        )
        worst_lin = max(worst_lin, float(np.max(np.abs(direct - combined))))
    passed = worst_sum <= 1e-9 and worst_lin <= 1e-10
    return _finish(
        "born_rule_properties",
        passed,
        f"max |sum-1| {worst_sum:.2e} (tol 1e-9), max linearity gap {worst_lin:.2e} (tol 1e-10)",
        t0,
    )


def check_trace_distance_properties(n_trials: int = 15, seed: int = 31, **_) -> CheckResult:
    """Zero iff equal, symmetric, and triangle inequality on random triples."""
    t0 = time.perf_counter()
    rng = make_rng(seed)
    layout = SubsystemLayout((("s", 3),))
    ok = True
    worst_triangle = 0.0
    for _ in range(n_trials):
        a = random_density(layout, rng)
        b = random_density(layout, rng)
        c = random_density(layout, rng)
        ok &= trace_distance(a, a) <= 1e-12
        ok &= abs(trace_distance(a, b) - trace_distance(b, a)) <= 1e-12
        gap = trace_distance(a, c) - (trace_distance(a, b) + trace_distance(b, c))
        worst_triangle = max(worst_triangle, gap)
        if float(np.max(np.abs(a.entries - b.entries))) > 1e-10:
            ok &= trace_distance(a, b) > 0
    passed = ok and worst_triangle <= 1e-9
    return _finish(
        "trace_distance_properties",
        passed,
        f"identity/symmetry hold; worst triangle violation {worst_triangle:.2e} (tol 1e-9)",
        t0,
    )


def check_mark_unitarity(seed: int = 37, **_) -> CheckResult:
    """Marking preserves norm and sends each basis state to an exact product."""
    t0 = time.perf_counter()
    rng = make_rng(seed)
    basis_matrix = random_unitary(3, rng)
    basis = MeasurementBasis(basis_matrix)
    worst_norm = 0.0
    worst_product = 0.0
    for i in range(3):
        system = ket("s", basis_matrix[i])
        ms = mark(system, basis)
        worst_norm = max(worst_norm, abs(float(np.linalg.norm(ms.joint.amps)) - 1.0))
        expected = np.kron(basis_matrix[i], np.eye(3)[i])
        worst_product = max(worst_product, float(np.max(np.abs(ms.joint.amps - expected))))
    state = random_state(SubsystemLayout((("s", 3),)), rng)
    ms = mark(state, basis)
    worst_norm = max(worst_norm, abs(float(np.linalg.norm(ms.joint.amps)) - 1.0))
    passed = worst_norm <= 1e-12 and worst_product <= 1e-12
    return _finish(
        "mark_unitarity",
        passed,
        f"max |norm-1| {worst_norm:.2e}, max basis-product deviation {worst_product:.2e} (tol 1e-12)",
        t0,
    )


def check_detect_statistics(shots: int = 10_000, seed: int = 41, **_) -> CheckResult:
    """Detection frequencies track the reduced-marker diagonal within 3 sigma."""
    t0 = time.perf_counter()
    rng = make_rng(seed)
    state = random_state(SubsystemLayout((("s", 3),)), rng)
    ms = mark(state, MeasurementBasis.computational(3))
    expected = reduced_marker(ms).diagonal()
    _, counts, _ = sample_detections(ms, shots, rng)
    freqs = counts / shots
    sigmas = np.sqrt(np.clip(expected * (1 - expected), 1e-12, None) / shots)
    worst = float(np.max(np.abs(freqs - expected) / (3 * sigmas)))
    passed = worst <= 1.0
    return _finish(
        "detect_statistics",
        passed,
        f"max |freq - p| / (3 sigma) = {worst:.2f} over {shots} shots",
        t0,
    )


def check_measure_chi_square(n_states: int = 50, shots: int = 2000, seed: int = 43, **_) -> CheckResult:
    """Measured counts match the direct Born oracle (chi-square p > 0.001 each)."""
    t0 = time.perf_counter()
    rng = make_rng(seed)
    layout = SubsystemLayout((("spin", 2),))
    basis = MeasurementBasis.z_qubit()
    povm = computational_povm(2)
    worst_chi2 = 0.0
    for _ in range(n_states):
        state = random_state(layout, rng)
        oracle = born_probabilities(to_density(state), povm)
        ms = mark(state, basis)
        _, counts, _ = sample_detections(ms, shots, rng)
        expected = np.clip(oracle * shots, 1e-9, None)
        chi2 = float(np.sum((counts - expected) ** 2 / expected))
        worst_chi2 = max(worst_chi2, chi2)
    passed = worst_chi2 <= _CHI2_CRIT_DF1
    return _finish(
        "measure_chi_square",
        passed,
        f"worst chi-square {worst_chi2:.2f} over {n_states} random states "
        f"(p > 0.001 requires < {_CHI2_CRIT_DF1:.2f})",
        t0,
    )


def check_knowledge_chain(seed: int = 47, **_) -> CheckResult:
    """After marking, the system's reduced state is diagonal in the measured basis."""
    t0 = time.perf_counter()
    rng = make_rng(seed)
    worst = 0.0
    decomposition_gap = 0.0
    knowledge_matches = True
    for basis in (MeasurementBasis.z_qubit(), MeasurementBasis(random_unitary(2, rng))):
        state = random_state(SubsystemLayout((("spin", 2),)), rng)
        chain = knowledge_chain(state, basis, rng)
        in_basis = basis.states.conj() @ chain.after_marking.entries @ basis.states.T
        off = in_basis - np.diag(np.diag(in_basis))
        worst = max(worst, float(np.max(np.abs(off))))
        weights = np.clip(np.real(np.diag(in_basis)), 0.0, None)
        rebuilt = sum(
            w * np.outer(v, v.conj()) for w, v in zip(weights / weights.sum(), basis.states)
        )
        decomposition_gap = max(
            decomposition_gap, float(np.max(np.abs(rebuilt - chain.after_marking.entries)))
        )
        knowledge_matches &= fidelity(chain.after_knowledge, chain.record.post_system) > 1 - 1e-12
    passed = worst <= 1e-12 and decomposition_gap <= 1e-12 and knowledge_matches
    return _finish(
        "knowledge_chain_diagonality",
        passed,
        f"max off-diagonal (measured basis) {worst:.2e}, outcome-mixture gap {decomposition_gap:.2e}",
        t0,
    )


def check_rng_determinism(seed: int = 42, **_) -> CheckResult:
    """Fixed seeds reproduce unitaries, POVMs, and channels bit-identically."""
    t0 = time.perf_counter()
    u1 = random_unitary(2, make_rng(seed))
    u2 = random_unitary(2, make_rng(seed))
    p1 = random_povm(3, 3, make_rng(seed))
    p2 = random_povm(3, 3, make_rng(seed))
    c1 = random_channel(2, 2, make_rng(seed))
    c2 = random_channel(2, 2, make_rng(seed))
    same = (
        np.array_equal(u1, u2)
        and all(np.array_equal(a, b) for a, b in zip(p1.effects, p2.effects))
        and all(np.array_equal(a, b) for a, b in zip(c1.kraus, c2.kraus))
    )
    unitary_dev = float(np.max(np.abs(u1.conj().T @ u1 - np.eye(2))))
    povm_dev = float(np.max(np.abs(sum(p1.effects) - np.eye(3))))
    passed = same and unitary_dev <= 1e-10 and povm_dev <= 1e-10
    return _finish(
        "rng_determinism",
        passed,
        f"bit-identical replays: {same}; unitarity {unitary_dev:.2e}, completeness {povm_dev:.2e}",
        t0,
    )


def check_sampled_exact_agreement(shots: int = 100_000, seed: int = 53, **_) -> CheckResult:
    """Sampled experiment modes track their exact probabilities within 3 sigma."""
    t0 = time.perf_counter()
    worst = 0.0
    sg_report = stern_gerlach(shots=shots, rng=make_rng(seed))
    mz_report = mach_zehnder(second_mirror=True, phase=1.0, shots=shots, rng=make_rng(seed + 1))
    for report in (sg_report, mz_report):
        exact = np.array(report.exact_probabilities)
        freqs = np.array(report.sampled_frequencies)
        sigmas = np.sqrt(np.clip(exact * (1 - exact), 1e-12, None) / shots)
        worst = max(worst, float(np.max(np.abs(freqs - exact) / (3 * sigmas))))
    setting = optimal_chsh_setting()
    s_exact = chsh(setting, bell_phi_plus())
    s_sampled = chsh(setting, bell_phi_plus(), shots=shots, rng=make_rng(seed + 2))
    # four correlators, each with standard error below 1 / sqrt(shots)
    chsh_ratio = abs(s_sampled - s_exact) / (3 * 4 / np.sqrt(shots))
    worst = max(worst, chsh_ratio)
    passed = worst <= 1.0
    return _finish(
        "sampled_exact_agreement",
        passed,
        f"max |sampled - exact| / (3 sigma) = {worst:.2f} at {shots} shots (sg, mz, chsh)",
        t0,
    )


def check_double_slit_visibility(**_) -> CheckResult:
    """Equal open slits interfere with near-unit visibility and a symmetric profile."""
    t0 = time.perf_counter()
    geom = _FRINGE_GEOMETRIES[0]
    profile = double_slit(geom)
    vis = fringe_visibility(profile)
    symmetry = float(np.max(np.abs(profile.density - profile.density[::-1])))
    center_peak = profile.density.argmax()
    centered = abs(profile.x[center_peak]) <= profile.dx
    passed = vis >= 0.99 and symmetry <= 1e-9 and centered
    return _finish(
        "double_slit_visibility",
        passed,
        f"visibility {vis:.6f} (>= 0.99), asymmetry {symmetry:.2e} (tol 1e-9), peak at center: {centered}",
        t0,
    )


CHECKS: dict[str, Callable[..., CheckResult]] = {
    "reduced_state_identity": check_reduced_state_identity,
    "equivalence_identity": check_equivalence_identity,
    "nosignal_chance_level": check_nosignal_chance_level,
    "measurement_postulate_recovery": check_measurement_postulate,
    "stern_gerlach_exact": check_stern_gerlach_exact,
    "mach_zehnder": check_mach_zehnder,
    "double_slit": check_double_slit,
    "bell_violation": check_bell_violation,
    "device_runs": check_device_runs,
    "partial_trace_oracle": check_partial_trace_oracle,
    "state_density_validity": check_state_density_validity,
    "product_partial_trace": check_product_partial_trace,
    "channel_trace_preservation": check_channel_trace_preservation,
    "born_rule_properties": check_born_rule_properties,
    "trace_distance_properties": check_trace_distance_properties,
    "mark_unitarity": check_mark_unitarity,
    "detect_statistics": check_detect_statistics,
    "measure_chi_square": check_measure_chi_square,
    "knowledge_chain_diagonality": check_knowledge_chain,
    "rng_determinism": check_rng_determinism,
    "sampled_exact_agreement": check_sampled_exact_agreement,
    "double_slit_visibility": check_double_slit_visibility,
}

ACCEPTANCE_CHECK_NAMES: tuple[str, ...] = (
    "reduced_state_identity",
    "equivalence_identity",
    "nosignal_chance_level",
    "measurement_postulate_recovery",
    "stern_gerlach_exact",
    "mach_zehnder",
    "double_slit",
    "bell_violation",
    "device_runs",
    "partial_trace_oracle",
)

_FAST_OVERRIDES: dict[str, dict] = {
    "equivalence_identity": {"n_states": 5, "n_processes": 20},
    "nosignal_chance_level": {"n_seeds": 2, "n_groups": 25, "n_pairs": 80, "pool_size": 8},
    "measurement_postulate_recovery": {"shots": 20_000},
    "bell_violation": {"n_product_states": 25},
    "device_runs": {"n_runs": 200},
    "partial_trace_oracle": {"n_layouts": 12},
    "measure_chi_square": {"n_states": 12},
    "sampled_exact_agreement": {"shots": 20_000},
}


def run_checks(names: list[str] | None = None, fast: bool = False) -> list[CheckResult]:
    """Run the named checks (default: all) and return their results in order."""
    selected = list(names) if names is not None else list(CHECKS)
    unknown = [n for n in selected if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {unknown}; available: {sorted(CHECKS)}")
    results = []
    for name in selected:
        kwargs = _FAST_OVERRIDES.get(name, {}) if fast else {}
        results.append(CHECKS[name](**kwargs))
    return results


def all_passed(results: list[CheckResult]) -> bool:
    return all(r.passed for r in results)
