"""qmeasure: a two-step quantum measurement simulator.

Measurement is modeled as a controllable entangling "marking" step followed
by a macroscopic detection step that samples a definite pointer value from
the marker's reduced state.  The package demonstrates numerically that a
reduced state and the matching mixture are operationally identical (no
process, and hence no signaling, can tell them apart) and reproduces the
standard worked experiments: Stern-Gerlach, Mach-Zehnder, the double slit,
and the CHSH Bell test.
"""

from .channels import (
    Povm,
    QuantumChannel,
    apply_channel,
    born_probabilities,
    computational_povm,
    dephasing_channel,
    depolarizing_channel,
    identity_channel,
    projective_povm,
)
from .experiments import (
    ChshSetting,
    IntensityProfile,
    SlitGeometry,
    chsh,
    chsh_report,
    correlator,
    double_slit,
    fringe_visibility,
    mach_zehnder,
    measured_fringe_spacing,
    optimal_chsh_setting,
    stern_gerlach,
)
from .measurement import (
    DetectionRecord,
    KnowledgeChain,
    MarkedState,
    MeasurementBasis,
    MeasurementOutcome,
    detect,
    enumerate_outcomes,
    knowledge_chain,
    mark,
    measure,
    reduced_marker,
    sample_detections,
    simulate_device_runs,
)
from .nosignal import (
    BobPreparation,
    DistinguishReport,
    ProtocolConfig,
    alice_branches,
    alice_prepare,
    bob_statistics,
    run_protocol,
    sample_processes,
)
from .reports import RunReport
from .sampling import (
    make_rng,
    random_channel,
    random_density,
    random_povm,
    random_state,
    random_unitary,
    sample_counts,
    sample_index,
    split_streams,
)
from .states import (
    DensityMatrix,
    StateVector,
    SubsystemLayout,
    apply_unitary,
    basis_state,
    bell_phi_plus,
    fidelity,
    ket,
    mix,
    named_qubit,
    normalized_ket,
    partial_trace,
    tensor,
    to_density,
    trace_distance,
)
from .verify import CheckResult, run_checks

__version__ = "0.1.0"
