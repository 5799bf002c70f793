"""Observables extracted from propagation runs.

Pulse-peak advancement and the group index n_g = -c T_a / l; effective
susceptibility of the medium from the complex ratio of cw exit and entry
amplitudes, Omega(l) = Omega(0) exp(-k l chi''/2) exp(i k l chi'/2); and the
odd-cubic dispersion fit n = 1 + (n_g/omega0) Delta + n3 Delta^3 used by the
cavity analysis.  The dilute-medium relation n = 1 + chi'/2 converts the
measured susceptibility to a refractive index.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .atoms import probe_response_stack
from .errors import IllConditionedFit, NoPeak, SimulationError, ZeroEntryAmplitude
from .propagation import (
    C_LIGHT,
    FieldRecord,
    Grid,
    MediumSpec,
    PreparedMedium,
    ProbeWaveform,
    prepare_medium,
    propagate_batch,
)

from . import __version__


def _quadratic_peak_time(times: np.ndarray, intensity: np.ndarray) -> float:
    """Sub-sample peak location by three-point quadratic interpolation."""
    if intensity.max() <= 0:
        raise NoPeak("intensity is identically zero")
    i = int(np.argmax(intensity))
    if i == 0 or i == len(intensity) - 1:
        raise NoPeak("intensity peak clipped by the record boundaries")
    y0, y1, y2 = intensity[i - 1], intensity[i], intensity[i + 1]
    denom = y0 - 2 * y1 + y2
    if denom >= 0:
        raise NoPeak("no interior quadratic maximum")
    tstep = times[i + 1] - times[i]
    return times[i] + 0.5 * tstep * (y0 - y2) / denom


def peak_advancement(record: FieldRecord, reference_time: float | None = None) -> float:
    """Advancement T_a (seconds) of the exit-face intensity peak.

    The peak is located with three-point quadratic interpolation.  The
    reference is the vacuum exit-peak time in 1/gamma (defaults to pulse
    center plus transit); positive T_a means the peak leaves the medium
    earlier than the vacuum reference.
    """
    t_peak = _quadratic_peak_time(record.times, np.abs(record.exit["omega41"]) ** 2)
    if reference_time is None:
        reference_time = record.vacuum_exit_time
    return (reference_time - t_peak) / record.grid.gamma_ref


def peak_arrival_times(record: FieldRecord) -> tuple[np.ndarray, np.ndarray]:
    """Arrival time of the probe intensity peak at each recorded interior cell.

    Requires a pulse record taken with `record_cells`.  Returns (z, t_peak)
    in meters and 1/gamma; in a negative-group-index medium the peak arrives
    earlier at deeper cells, so t_peak decreases with z (the peak runs
    through the medium in reversed direction).
    """
    if record.interior is None or record.cell_indices is None:
        raise ValueError("record has no interior time series; pass record_cells")
    series = record.interior["omega41"]
    t_peaks = np.array([
        _quadratic_peak_time(record.times, np.abs(series[:, c]) ** 2)
        for c in range(series.shape[1])
    ])
    z = record.cell_indices * record.grid.dz
    return z, t_peaks


def group_index(t_advance: float, length: float) -> float:
    """n_g = -c T_a / l for advancement T_a in seconds and length in meters."""
    if length <= 0:
        raise ValueError("medium length must be positive")
    return -C_LIGHT * t_advance / length


def extract_susceptibility(
    entry: complex,
    exit: complex,
    wavenumber: float,
    length: float,
    phase_branch: float | None = None,
) -> tuple[float, float]:
    """Invert the exit/entry relation for (chi', chi'').

    `phase_branch` is the previous sweep point's chi' used to continue the
    phase across branch cuts; without it the principal value is returned.
    """
    if entry == 0:
        raise ZeroEntryAmplitude("entry amplitude is zero")
    kl = wavenumber * length
    ratio = exit / entry
    chi_im = -(2.0 / kl) * np.log(abs(ratio))
    phase = float(np.angle(ratio))
    if phase_branch is not None:
        previous = phase_branch * kl / 2.0
        phase += 2 * np.pi * np.round((previous - phase) / (2 * np.pi))
    chi_re = (2.0 / kl) * phase
    return chi_re, chi_im


@dataclass
class SusceptibilityCurve:
    """Sampled effective susceptibility chi(Delta) of the medium.

    Detunings are in units of gamma and strictly increasing; chi is
    dimensionless.  Wavenumber, length and gamma_ref carry the context needed
    to turn the curve into round-trip phases and SI detunings.
    """

    deltas: np.ndarray
    chi_re: np.ndarray
    chi_im: np.ndarray
    length: float
    wavenumber: float
    gamma_ref: float
    suppress_4wm: bool | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.deltas = np.asarray(self.deltas, dtype=float)
        self.chi_re = np.asarray(self.chi_re, dtype=float)
        self.chi_im = np.asarray(self.chi_im, dtype=float)
        if self.deltas.ndim != 1 or len(self.deltas) < 2:
            raise ValueError("need at least two samples")
        if not np.all(np.diff(self.deltas) > 0):
            raise ValueError("detunings must be strictly increasing")
        if not (np.isfinite(self.chi_re).all() and np.isfinite(self.chi_im).all()):
            raise ValueError("susceptibility samples must be finite")

    @property
    def chi(self) -> np.ndarray:
        return self.chi_re + 1j * self.chi_im

    def interpolators(self):
        from scipy.interpolate import CubicSpline

        return CubicSpline(self.deltas, self.chi_re), CubicSpline(self.deltas, self.chi_im)


@dataclass
class DispersionFit:
    """Odd-cubic fit n - 1 = (n_g/omega0) Delta + n3 Delta^3 around resonance."""

    n_g: float
    n3: float
    window: float
    residual: float
    npoints: int


def fit_dispersion(
    curve: SusceptibilityCurve,
    omega0: float,
    window: float = 0.5,
    min_points: int = 7,
) -> DispersionFit:
    """Least-squares odd cubic through n(Delta) - 1 over |Delta| <= window.

    `window` is in units of gamma, omega0 in rad/s; n_g is dimensionless and
    n3 in s^3.
    """
    mask = np.abs(curve.deltas) <= window + 1e-12
    x = curve.deltas[mask]
    if len(x) < min_points:
        raise IllConditionedFit(
            f"window {window} gamma holds {len(x)} samples; need >= {min_points}"
        )
    y = 0.5 * curve.chi_re[mask]
    design = np.column_stack([x, x**3])
    coeffs, res, rank, sing = np.linalg.lstsq(design, y, rcond=None)
    if rank < 2 or sing[0] > 1e8 * sing[-1]:
        raise IllConditionedFit("dispersion fit design matrix is rank deficient")
    a_gamma, b_gamma = coeffs
    gamma = curve.gamma_ref
    fitted = design @ coeffs
    residual = float(np.linalg.norm(y - fitted))
    return DispersionFit(
        n_g=omega0 * a_gamma / gamma,
        n3=b_gamma / gamma**3,
        window=window,
        residual=residual,
        npoints=len(x),
    )


def sweep_susceptibility(
    medium: MediumSpec,
    controls,
    grid: Grid,
    deltas,
    suppress_4wm: bool = False,
    probe_amplitude: float = 0.1,
    prepared: PreparedMedium | None = None,
    warm_start: bool = True,
    batch_size: int = 32,
    on_error: str = "raise",
):
    """Effective susceptibility from one cw propagation per detuning.

    Runs are batched; the phase of each point is continued from its left
    neighbor as a sequential post-pass.  With on_error="collect" failed
    points are skipped and returned as (curve, failures) where failures is a
    list of (delta, error_name, message).
    """
    deltas = np.asarray(deltas, dtype=float)
    if not np.all(np.diff(deltas) > 0):
        raise ValueError("detunings must be strictly increasing")
    if on_error not in ("raise", "collect"):
        raise ValueError("on_error must be 'raise' or 'collect'")
    if prepared is None:
        prepared = prepare_medium(medium, controls, grid)

    k, l = medium.wavenumber, medium.length
    ratios: dict[int, complex] = {}
    failures: list[tuple[float, str, str]] = []
    for start in range(0, len(deltas), batch_size):
        chunk = deltas[start:start + batch_size]
        probes = [ProbeWaveform.cw(amplitude=probe_amplitude, detuning=d) for d in chunk]
        try:
            recs = propagate_batch(prepared, probes, suppress_4wm=suppress_4wm,
                                   warm_start=warm_start)
        except SimulationError as exc:
            if on_error == "raise":
                raise type(exc)(
                    f"sweep failed for detunings in [{chunk[0]}, {chunk[-1]}] gamma: {exc}"
                ) from exc
            for i, d in enumerate(chunk):
                # isolate the failing points one at a time
                try:
                    rec = propagate_batch(prepared, [probes[i]], suppress_4wm=suppress_4wm,
                                          warm_start=warm_start)[0]
                    ratios[start + i] = rec.exit_amplitude["omega41"] / rec.entry_amplitude["omega41"]
                except SimulationError as point_exc:
                    failures.append((float(d), type(point_exc).__name__, str(point_exc)))
            continue
        for i, rec in enumerate(recs):
            ratios[start + i] = rec.exit_amplitude["omega41"] / rec.entry_amplitude["omega41"]

    kept = sorted(ratios)
    chi_re = np.empty(len(kept))
    chi_im = np.empty(len(kept))
    branch = None
    for n, idx in enumerate(kept):
        chi_re[n], chi_im[n] = extract_susceptibility(1.0, ratios[idx], k, l, phase_branch=branch)
        branch = chi_re[n]
    curve = SusceptibilityCurve(
        deltas=deltas[kept], chi_re=chi_re, chi_im=chi_im,
        length=l, wavenumber=k, gamma_ref=medium.gamma_ref,
        suppress_4wm=suppress_4wm,
        metadata={
            "probe_amplitude": probe_amplitude,
            "nz": grid.nz,
            "transmission31": prepared.transmission["omega31"],
            "transmission42": prepared.transmission["omega42"],
        },
    )
    if on_error == "collect":
        return curve, failures
    return curve


def average_single_atom_curve(prepared: PreparedMedium, deltas) -> SusceptibilityCurve:
    """z-average of the single-atom weak-probe response at the local controls.

    This is the analysis that explains the suppressed-4WM medium: the
    linearized per-cell response (generated field held at zero) evaluated at
    the prepared control envelopes, averaged along the medium.
    """
    deltas = np.asarray(deltas, dtype=float)
    medium = prepared.medium
    alpha = probe_response_stack(prepared.control31, prepared.control42,
                                 medium.scheme, deltas)
    # trapezoid average over the uniform grid
    weights = np.full(alpha.shape[1], 1.0)
    weights[0] = weights[-1] = 0.5
    weights /= weights.sum()
    alpha_bar = alpha @ weights
    chi = 2.0 * medium.eta("41") * alpha_bar / medium.wavenumber
    return SusceptibilityCurve(
        deltas=deltas, chi_re=chi.real, chi_im=chi.imag,
        length=medium.length, wavenumber=medium.wavenumber,
        gamma_ref=medium.gamma_ref, suppress_4wm=True,
        metadata={"method": "single-atom-average"},
    )


def group_index_from_pulse(
    prepared: PreparedMedium,
    bandwidth: float = 0.1,
    amplitude: float = 0.1,
    detuning: float = 0.0,
    suppress_4wm: bool = False,
) -> float:
    """Group index from the advancement of a Gaussian pulse peak."""
    probe = ProbeWaveform.gaussian(amplitude=amplitude, bandwidth=bandwidth,
                                   detuning=detuning)
    rec = propagate_batch(prepared, [probe], suppress_4wm=suppress_4wm)[0]
    t_a = peak_advancement(rec)
    return group_index(t_a, prepared.medium.length)


def _format(x: float) -> str:
    return f"{x:.16e}"


def write_curve_csv(curve: SusceptibilityCurve, path, header: dict | None = None):
    """Curve CSV: delta_over_gamma, chi_re, chi_im with # metadata lines."""
    lines = [f"# wlcsim {__version__} susceptibility curve"]
    meta = {
        "length_m": curve.length,
        "wavenumber_per_m": curve.wavenumber,
        "gamma_ref_rad_s": curve.gamma_ref,
        "suppress_4wm": curve.suppress_4wm,
        **curve.metadata,
        **(header or {}),
    }
    for key in sorted(meta):
        lines.append(f"# {key} = {meta[key]}")
    lines.append("delta_over_gamma,chi_re,chi_im")
    for d, re, im in zip(curve.deltas, curve.chi_re, curve.chi_im):
        lines.append(f"{_format(d)},{_format(re)},{_format(im)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_curve_csv(path) -> SusceptibilityCurve:
    meta: dict = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "=" in line:
                    key, _, value = line[1:].partition("=")
                    meta[key.strip()] = value.strip()
                continue
            if line.startswith("delta_over_gamma"):
                continue
            rows.append([float(v) for v in line.split(",")])
    data = np.array(rows)
    suppress = meta.get("suppress_4wm")
    return SusceptibilityCurve(
        deltas=data[:, 0], chi_re=data[:, 1], chi_im=data[:, 2],
        length=float(meta["length_m"]),
        wavenumber=float(meta["wavenumber_per_m"]),
        gamma_ref=float(meta["gamma_ref_rad_s"]),
        suppress_4wm=None if suppress in (None, "None") else suppress == "True",
        metadata={k: v for k, v in meta.items()
                  if k not in ("length_m", "wavenumber_per_m", "gamma_ref_rad_s", "suppress_4wm")},
    )
