"""Transmit beamforming simulator for bistatic backscatter links.

Maximizes carrier power at a backscatter device while steering a spatial
null onto one or more readers, under per-antenna power limits. Provides
channel synthesis, the beamformer designs with verification oracles, power
metrics, and simulated experiment pipelines (spatial heatmaps,
emitter-count sweeps, phase-noise robustness).
"""

__version__ = "0.1.0"

from .scenario import (
    GridSpec,
    Scenario,
    default_techtile_scenario,
    load_scenario,
    scenario_digest,
    serialize_scenario,
)
from .beamform import (
    BeamWeights,
    SolveReport,
    SolverOptions,
    azf_bruteforce,
    azf_closed_form_dim1,
    azf_phase_only,
    azf_solve,
    dykstra_project,
    nullspace_basis,
    po_mrt,
    weights_for_strategy,
)
from .channel import (
    ChannelSet,
    ImpairmentSpec,
    apply_csi_error,
    apply_phase_noise,
    export_channels_csv,
    free_space_gains,
    los_channel,
    rician_channel,
)
from .metrics import (
    MetricsReport,
    SignalRealization,
    adc_headroom_bits,
    db_to_linear,
    evaluate,
    linear_to_db,
    suppression_between,
    synthesize_signal,
    total_dbm,
    watts_to_dbm,
)
from .experiments import (
    Heatmap,
    PhaseNoiseRecord,
    SweepRecord,
    SweepResult,
    differential_map,
    power_map_for_weights,
    run_heatmap,
    run_k_sweep,
    run_phase_noise_sweep,
)

__all__ = [
    "__version__",
    "BeamWeights", "ChannelSet", "GridSpec", "Heatmap", "ImpairmentSpec",
    "MetricsReport", "PhaseNoiseRecord", "Scenario", "SignalRealization",
    "SolveReport", "SolverOptions", "SweepRecord", "SweepResult",
    "adc_headroom_bits", "apply_csi_error", "apply_phase_noise",
    "azf_bruteforce", "azf_closed_form_dim1", "azf_phase_only", "azf_solve",
    "db_to_linear", "default_techtile_scenario", "differential_map",
    "dykstra_project", "evaluate", "export_channels_csv", "free_space_gains",
    "linear_to_db", "load_scenario", "los_channel", "nullspace_basis",
    "po_mrt", "power_map_for_weights", "rician_channel", "run_heatmap",
    "run_k_sweep", "run_phase_noise_sweep", "scenario_digest",
    "serialize_scenario", "suppression_between", "synthesize_signal",
    "total_dbm", "watts_to_dbm", "weights_for_strategy",
]
