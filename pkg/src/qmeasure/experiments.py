"""Canonical experiments: Stern-Gerlach, Mach-Zehnder, double slit, CHSH.

Conventions fixed here so every reported number is reproducible:

* Beam splitter: symmetric 50/50 with ``i`` on reflection,
  ``(1/sqrt2) [[1, i], [i, 1]]``.
* Spin measurement along angle ``theta`` means the +-1 observable
  ``cos(theta) Z + sin(theta) X``; for the Bell state the correlator is then
  ``E(a, b) = cos(a - b)``.
* Double slit: Gaussian-apertured Fraunhofer amplitudes, one per slit,
  ``w_i(x) = a_i exp(-(x -+ d/2)^2 (pi w / (lambda L))^2 / 2)
  exp(+- i pi x d / (lambda L))``, giving the far-field fringe period
  ``lambda L / d``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import Povm, born_probabilities
from .measurement import MeasurementBasis, mark, reduced_marker, sample_detections
from .reports import RunReport, complex_matrix_to_json
from .sampling import sample_counts
from .states import StateVector, apply_unitary, ket, named_qubit, to_density

BEAM_SPLITTER = np.array([[1.0, 1.0j], [1.0j, 1.0]], dtype=np.complex128) / np.sqrt(2.0)


# ---------------------------------------------------------------------------
# Stern-Gerlach


def stern_gerlach(
    shots: int = 0,
    rng: np.random.Generator | None = None,
    state: StateVector | None = None,
) -> RunReport:
    """Spin-up-along-y electron through a z-axis field: which path does it take?

    The field entangles the z-spin with the flight path; the screen reads the
    path property alone, i.e. the reduced path state after tracing out spin.
    """
    spin = state if state is not None else named_qubit("y+", "spin")
    ms = mark(spin, MeasurementBasis.z_qubit(), marker_label="path")
    path_state = reduced_marker(ms)
    exact = tuple(float(p) for p in path_state.diagonal())

    frequencies = None
    counts = None
    if shots > 0:
        if rng is None:
            raise ValueError("sampling requires an rng")
        _, raw_counts, _ = sample_detections(ms, shots, rng)
        counts = tuple(int(c) for c in raw_counts)
        frequencies = tuple(c / shots for c in counts)

    off_diag = float(np.abs(path_state.entries[0, 1]))
    return RunReport(
        command="sg",
        outcome_labels=("upper", "lower"),
        exact_probabilities=exact,
        sampled_frequencies=frequencies,
        counts=counts,
        shots=shots or None,
        diagnostics={
            "reduced_path_matrix": complex_matrix_to_json(path_state.entries),
            "reduced_path_off_diagonal": off_diag,
        },
    )


# ---------------------------------------------------------------------------
# Mach-Zehnder


def mach_zehnder(
    second_mirror: bool = False,
    phase: float = 0.0,
    shots: int = 0,
    rng: np.random.Generator | None = None,
) -> RunReport:
    """Photon through a Mach-Zehnder interferometer.

    The photon enters on the upper path.  Without the second half-silvered
    mirror the receivers see each path with probability 1/2; with it the
    output probabilities are (sin^2(phase/2), cos^2(phase/2)).  Receivers
    detect the photon's position, which the path imprints at detection time,
    so the readout is a mark-then-detect on a position factor.
    """
    path = ket("path", (1.0, 0.0))
    state = apply_unitary(path, BEAM_SPLITTER)
    state = apply_unitary(state, np.diag([1.0, np.exp(1j * phase)]).astype(np.complex128))
    if second_mirror:
        state = apply_unitary(state, BEAM_SPLITTER)

    ms = mark(state, MeasurementBasis.computational(2, ("x1", "x2")), marker_label="position")
    position_state = reduced_marker(ms)
    exact = tuple(float(p) for p in position_state.diagonal())

    frequencies = None
    counts = None
    if shots > 0:
        if rng is None:
            raise ValueError("sampling requires an rng")
        _, raw_counts, _ = sample_detections(ms, shots, rng)
        counts = tuple(int(c) for c in raw_counts)
        frequencies = tuple(c / shots for c in counts)

    diagnostics = {"second_mirror": second_mirror, "phase": float(phase)}
    if second_mirror:
        diagnostics["predicted"] = (float(np.sin(phase / 2) ** 2), float(np.cos(phase / 2) ** 2))
    return RunReport(
        command="mz",
        outcome_labels=("detector_1", "detector_2"),
        exact_probabilities=exact,
        sampled_frequencies=frequencies,
        counts=counts,
        shots=shots or None,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# Double slit


@dataclass(frozen=True)
class SlitGeometry:
    """Two-slit screen geometry; all lengths in meters."""

    slit_separation: float
    slit_width: float
    wavelength: float
    screen_distance: float
    x_min: float = -0.05
    x_max: float = 0.05
    n_points: int = 2001
    amplitudes: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self) -> None:
        for name in ("slit_separation", "slit_width", "wavelength", "screen_distance"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.n_points < 64:
            raise ValueError("grid needs at least 64 points")
        if self.x_max <= self.x_min:
            raise ValueError("x_max must exceed x_min")
        if any(a < 0 for a in self.amplitudes):
            raise ValueError("slit amplitudes must be non-negative")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def fringe_spacing(self) -> float:
        return self.wavelength * self.screen_distance / self.slit_separation

    @property
    def far_field(self) -> bool:
        """Screen far enough that the Fraunhofer form is trustworthy (reported, not enforced)."""
        return self.screen_distance >= 100.0 * max(self.slit_separation, self.slit_width)


@dataclass(frozen=True, eq=False)
class IntensityProfile:
    """Normalized screen profile; bin probabilities are density * dx."""

    x: np.ndarray
    density: np.ndarray
    bin_probabilities: np.ndarray
    geometry: SlitGeometry
    open_slits: tuple[bool, bool]

    @property
    def dx(self) -> float:
        return self.geometry.dx


def slit_wave_amplitudes(geom: SlitGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Per-slit screen amplitudes w_1(x), w_2(x) on the geometry's grid."""
    x = geom.grid
    scale = np.pi * geom.slit_width / (geom.wavelength * geom.screen_distance)
    phase = np.pi * geom.slit_separation / (geom.wavelength * geom.screen_distance)
    half = geom.slit_separation / 2.0
    w1 = geom.amplitudes[0] * np.exp(-((x - half) ** 2) * scale**2 / 2.0) * np.exp(1j * phase * x)
    w2 = geom.amplitudes[1] * np.exp(-((x + half) ** 2) * scale**2 / 2.0) * np.exp(-1j * phase * x)
    return w1, w2


def double_slit(geom: SlitGeometry, open_slits: tuple[bool, bool] = (True, True)) -> IntensityProfile:
    """Screen intensity |sum of open-slit amplitudes|^2, normalized on the grid.

    The screen detects position only; the path through either slit is traced
    out, which is exactly why the squared *sum* of amplitudes appears.
    """
    if not any(open_slits):
        raise ValueError("cannot form a profile with both slits closed")
    w1, w2 = slit_wave_amplitudes(geom)
    amp = np.zeros_like(w1)
    if open_slits[0]:
        amp = amp + w1
    if open_slits[1]:
        amp = amp + w2
    raw = np.abs(amp) ** 2
    total = raw.sum() * geom.dx
    if total <= 0:
        raise ValueError("profile has no support on the grid; widen the window")
    density = raw / total
    return IntensityProfile(
        x=geom.grid,
        density=density,
        bin_probabilities=density * geom.dx,
        geometry=geom,
        open_slits=open_slits,
    )


def profile_peaks(profile: IntensityProfile, rel_threshold: float = 1e-6) -> np.ndarray:
    """Indices of strict local maxima above a relative floor."""
    d = profile.density
    floor = rel_threshold * d.max()
    interior = (d[1:-1] > d[:-2]) & (d[1:-1] > d[2:]) & (d[1:-1] > floor)
    return np.nonzero(interior)[0] + 1


def measured_fringe_spacing(profile: IntensityProfile) -> float:
    """Mean spacing between adjacent interference peaks.

    Grid peaks are refined by a three-point parabolic fit so the estimate is
    not limited by grid quantization.
    """
    peaks = profile_peaks(profile)
    if len(peaks) < 2:
        raise ValueError("fewer than two peaks on the grid; no fringe spacing to measure")
    d = profile.density
    refined = []
    for i in peaks:
        denom = d[i - 1] - 2 * d[i] + d[i + 1]
        offset = 0.5 * (d[i - 1] - d[i + 1]) / denom if denom != 0 else 0.0
        refined.append(profile.x[i] + offset * profile.dx)
    return float(np.mean(np.diff(refined)))


def fringe_visibility(profile: IntensityProfile, window: float | None = None) -> float:
    """(Imax - Imin) / (Imax + Imin) within a window around the center."""
    if window is None:
        window = 1.5 * profile.geometry.fringe_spacing
    sel = np.abs(profile.x) <= window
    if not np.any(sel):
        raise ValueError("visibility window contains no grid points")
    imax = float(profile.density[sel].max())
    imin = float(profile.density[sel].min())
    return (imax - imin) / (imax + imin)


# ---------------------------------------------------------------------------
# CHSH


@dataclass(frozen=True)
class ChshSetting:
    """Measurement angles (radians): Alice (a, a'), Bob (b, b')."""

    alice_angles: tuple[float, float]
    bob_angles: tuple[float, float]

    def __post_init__(self) -> None:
        for pair in (self.alice_angles, self.bob_angles):
            if len(pair) != 2 or not all(np.isfinite(v) for v in pair):
                raise ValueError("each side needs two finite angles")


def optimal_chsh_setting() -> ChshSetting:
    """Angles maximizing S = E(a,b) - E(a,b') + E(a',b) + E(a',b') for the Bell state."""
    return ChshSetting((0.0, np.pi / 2), (np.pi / 4, 3 * np.pi / 4))


def spin_axis_states(theta: float) -> np.ndarray:
    """Rows: +1 and -1 eigenvectors of cos(theta) Z + sin(theta) X."""
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, s], [-s, c]], dtype=np.complex128)


def correlator(
    state: StateVector,
    theta_a: float,
    theta_b: float,
    shots: int = 0,
    rng: np.random.Generator | None = None,
) -> float:
    """Expectation of the product of +-1 spin outcomes along the two angles."""
    if len(state.layout.labels) != 2 or state.layout.dims != (2, 2):
        raise ValueError("correlator requires a two-qubit state")
    va = spin_axis_states(theta_a)
    vb = spin_axis_states(theta_b)
    effects = tuple(
        np.kron(np.outer(va[i], va[i].conj()), np.outer(vb[j], vb[j].conj()))
        for i in range(2)
        for j in range(2)
    )
    povm = Povm(effects, ("++", "+-", "-+", "--"))
    probs = born_probabilities(to_density(state), povm)
    signs = np.array([1.0, -1.0, -1.0, 1.0])
    if shots > 0:
        if rng is None:
            raise ValueError("sampling requires an rng")
        probs = sample_counts(probs, shots, rng) / shots
    return float(signs @ probs)


def chsh(
    setting: ChshSetting,
    state: StateVector,
    shots: int = 0,
    rng: np.random.Generator | None = None,
) -> float:
    """CHSH combination S = E(a,b) - E(a,b') + E(a',b) + E(a',b')."""
    a, a_prime = setting.alice_angles
    b, b_prime = setting.bob_angles
    return (
        correlator(state, a, b, shots, rng)
        - correlator(state, a, b_prime, shots, rng)
        + correlator(state, a_prime, b, shots, rng)
        + correlator(state, a_prime, b_prime, shots, rng)
    )


def chsh_report(
    setting: ChshSetting,
    state: StateVector,
    shots: int = 0,
    rng: np.random.Generator | None = None,
) -> RunReport:
    a, a_prime = setting.alice_angles
    b, b_prime = setting.bob_angles
    exact_terms = {
        "E(a,b)": correlator(state, a, b),
        "E(a,b')": correlator(state, a, b_prime),
        "E(a',b)": correlator(state, a_prime, b),
        "E(a',b')": correlator(state, a_prime, b_prime),
    }
    s_exact = exact_terms["E(a,b)"] - exact_terms["E(a,b')"] + exact_terms["E(a',b)"] + exact_terms["E(a',b')"]
    diagnostics = {
        "S_exact": float(s_exact),
        "correlators_exact": exact_terms,
        "classical_bound": 2.0,
        "tsirelson_bound": float(2.0 * np.sqrt(2.0)),
        "angles": {"alice": list(setting.alice_angles), "bob": list(setting.bob_angles)},
    }
    if shots > 0:
        if rng is None:
            raise ValueError("sampling requires an rng")
        diagnostics["S_sampled"] = float(chsh(setting, state, shots, rng))
        diagnostics["shots_per_setting"] = shots
    return RunReport(
        command="chsh",
        shots=shots or None,
        diagnostics=diagnostics,
    )
