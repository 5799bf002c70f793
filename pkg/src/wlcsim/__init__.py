"""Four-wave-mixing white-light cavity simulator."""

__version__ = "0.1.0"

from .atoms import (
    AtomState,
    FieldAmplitudes,
    LevelScheme,
    build_hamiltonian,
    evolve_atom_step,
    linear_probe_susceptibility,
    master_equation_rhs,
    steady_state,
)
from .propagation import (
    FieldRecord,
    Grid,
    MediumSpec,
    PreparedMedium,
    ProbeWaveform,
    Snapshot,
    lax_wendroff_step,
    prepare_medium,
    propagate,
    propagate_batch,
    source_terms,
)
from .measurement import (
    DispersionFit,
    SusceptibilityCurve,
    average_single_atom_curve,
    extract_susceptibility,
    fit_dispersion,
    group_index,
    group_index_from_pulse,
    peak_advancement,
    peak_arrival_times,
    read_curve_csv,
    sweep_susceptibility,
    write_curve_csv,
)
from .cavity import (
    CavitySpec,
    ResonanceProfile,
    ScalingResult,
    WlcSolution,
    buildup_profile,
    empty_bandwidth,
    enhancement_scaling,
    flatness_coefficient,
    fwhm,
    roundtrip_response,
    solve_wlc_geometry,
    wlc_bandwidth_analytic,
    wlc_condition,
)

__all__ = [
    "__version__",
    "AtomState", "FieldAmplitudes", "LevelScheme",
    "build_hamiltonian", "evolve_atom_step", "linear_probe_susceptibility",
    "master_equation_rhs", "steady_state",
    "FieldRecord", "Grid", "MediumSpec", "PreparedMedium", "ProbeWaveform",
    "Snapshot", "lax_wendroff_step", "prepare_medium", "propagate",
    "propagate_batch", "source_terms",
    "DispersionFit", "SusceptibilityCurve", "average_single_atom_curve",
    "extract_susceptibility", "fit_dispersion", "group_index",
    "group_index_from_pulse", "peak_advancement", "peak_arrival_times",
    "read_curve_csv",
    "sweep_susceptibility", "write_curve_csv",
    "CavitySpec", "ResonanceProfile", "ScalingResult", "WlcSolution",
    "buildup_profile", "empty_bandwidth", "enhancement_scaling",
    "flatness_coefficient", "fwhm", "roundtrip_response", "solve_wlc_geometry",
    "wlc_bandwidth_analytic", "wlc_condition",
]
