"""Cavity buildup from the single-pass medium response.

The round trip collects phase phi = 2 L Delta / c + k l chi'(Delta) (two
medium passes) and amplitude rho_rt = r exp(-k l chi''(Delta)); the buildup
I/I0 = 1 / ((1 - rho_rt)^2 + 4 rho_rt sin^2(phi/2)) reduces to the familiar
Airy form I_max / (1 + (2F/pi)^2 sin^2(phi/2)) for an empty cavity.  A
white-light medium cancels the linear part of the phase (n_g = -L/l) and the
bandwidth is then set by the cubic dispersion term.

Gain media can push rho_rt to 1, where the buildup diverges (lasing
threshold); that is a hard error.  `include_absorption=False` keeps only the
phase response, for profiles that isolate the dispersive compensation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import (
    AboveLasingThreshold,
    InsufficientGroupIndex,
    NoConvergence,
    NoHalfCrossing,
    NonpositiveCubicTerm,
    OutOfRange,
)
from .measurement import SusceptibilityCurve
from . import __version__

C_LIGHT = 299792458.0


@dataclass(frozen=True)
class CavitySpec:
    """Cavity geometry and mirrors; r is the round-trip amplitude factor."""

    length: float
    mirror_amplitude: float
    omega0: float = 2 * np.pi * C_LIGHT / 780e-9

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("cavity length must be positive")
        if not 0 < self.mirror_amplitude < 1:
            raise ValueError("mirror amplitude factor must lie in (0, 1)")

    @property
    def finesse(self) -> float:
        r = self.mirror_amplitude
        return np.pi * np.sqrt(r) / (1 - r)

    @classmethod
    def from_finesse(cls, length: float, finesse: float,
                     omega0: float = 2 * np.pi * C_LIGHT / 780e-9) -> "CavitySpec":
        if finesse <= 0:
            raise ValueError("finesse must be positive")
        sqrt_r = (-np.pi + np.sqrt(np.pi**2 + 4 * finesse**2)) / (2 * finesse)
        return cls(length=length, mirror_amplitude=sqrt_r**2, omega0=omega0)

    def with_finesse(self, finesse: float) -> "CavitySpec":
        return CavitySpec.from_finesse(self.length, finesse, self.omega0)

    def mismatched(self, fraction: float) -> "CavitySpec":
        """Cavity with length scaled by (1 + fraction)."""
        return replace(self, length=self.length * (1 + fraction))


@dataclass
class ResonanceProfile:
    """Normalized intensity buildup I/I0 sampled against detuning (rad/s)."""

    deltas: np.ndarray
    buildup: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.deltas = np.asarray(self.deltas, dtype=float)
        self.buildup = np.asarray(self.buildup, dtype=float)
        if not np.all(np.diff(self.deltas) > 0):
            raise ValueError("profile detunings must be strictly increasing")
        if np.any(self.buildup <= 0):
            raise ValueError("buildup values must be positive")

    @property
    def peak(self) -> float:
        return float(self.buildup.max())


def empty_bandwidth(cavity: CavitySpec) -> float:
    """Empty-cavity FWHM gamma0 = 2 pi c / (2 L F) in rad/s."""
    return 2 * np.pi * C_LIGHT / (2 * cavity.length * cavity.finesse)


def _chi_splines(curve: SusceptibilityCurve):
    return curve.interpolators()


def roundtrip_response(
    delta: float | np.ndarray,
    cavity: CavitySpec,
    curve: SusceptibilityCurve | None = None,
    length: float | None = None,
    include_absorption: bool = True,
    _splines=None,
):
    """Round-trip amplitude factor and phase at detuning delta (rad/s).

    The medium contributes two passes: k l chi' to the phase and
    exp(-k l chi'') to the amplitude.  Detunings outside the sampled curve
    raise OutOfRange; rho_rt >= 1 raises AboveLasingThreshold.
    """
    delta = np.asarray(delta, dtype=float)
    phi = 2 * cavity.length * delta / C_LIGHT
    rho = np.full(delta.shape, cavity.mirror_amplitude)
    if curve is not None:
        if length is None:
            length = curve.length
        if length > cavity.length:
            raise ValueError("medium cannot be longer than the cavity")
        d_gamma = delta / curve.gamma_ref
        lo, hi = curve.deltas[0], curve.deltas[-1]
        if np.any(d_gamma < lo - 1e-12) or np.any(d_gamma > hi + 1e-12):
            raise OutOfRange(
                f"detuning beyond sampled curve range [{lo}, {hi}] gamma"
            )
        re_spline, im_spline = _splines if _splines is not None else _chi_splines(curve)
        kl = curve.wavenumber * length
        phi = phi + kl * re_spline(d_gamma)
        if include_absorption:
            rho = rho * np.exp(-kl * im_spline(d_gamma))
    if np.any(rho >= 1.0):
        raise AboveLasingThreshold(
            f"round-trip amplitude reaches {float(np.max(rho)):.6f} >= 1"
        )
    return rho, phi


def _buildup_values(rho: np.ndarray, phi: np.ndarray) -> np.ndarray:
    return 1.0 / ((1 - rho) ** 2 + 4 * rho * np.sin(phi / 2) ** 2)


def buildup_profile(
    cavity: CavitySpec,
    curve: SusceptibilityCurve | None,
    deltas: np.ndarray,
    length: float | None = None,
    include_absorption: bool = True,
) -> ResonanceProfile:
    """Sample I/I0 over `deltas` (rad/s); curve=None gives the empty cavity."""
    deltas = np.asarray(deltas, dtype=float)
    splines = _chi_splines(curve) if curve is not None else None
    rho, phi = roundtrip_response(deltas, cavity, curve, length,
                                  include_absorption, _splines=splines)
    values = _buildup_values(rho, phi)
    return ResonanceProfile(
        deltas=deltas, buildup=values,
        metadata={
            "finesse": cavity.finesse,
            "cavity_length_m": cavity.length,
            "include_absorption": include_absorption,
            "medium_length_m": length if curve is not None else 0.0,
        },
    )


def _fwhm_of_function(fn: Callable[[float], float], center: float,
                      halfspan: float, tol: float = 1e-6) -> float:
    """Full width at half maximum of fn by bracketed bisection around center."""
    # refine the peak position first
    xs = np.linspace(center - halfspan, center + halfspan, 2001)
    ys = np.array([fn(x) for x in xs])
    i = int(np.argmax(ys))
    peak_x, peak_y = xs[i], ys[i]
    if 0 < i < len(xs) - 1:
        y0, y1, y2 = ys[i - 1], ys[i], ys[i + 1]
        denom = y0 - 2 * y1 + y2
        if denom < 0:
            peak_x = xs[i] + 0.5 * (xs[1] - xs[0]) * (y0 - y2) / denom
            peak_y = fn(peak_x)
    half = 0.5 * peak_y

    def crossing(direction: int) -> float:
        x0 = peak_x
        step = halfspan / 1000
        x1 = x0 + direction * step
        while (fn(x1) - half) > 0:
            x0 = x1
            step *= 1.6
            x1 = peak_x + direction * min(abs(x1 - peak_x) + step, halfspan)
            if abs(x1 - peak_x) >= halfspan:
                if (fn(peak_x + direction * halfspan) - half) > 0:
                    raise NoHalfCrossing(
                        "profile never falls below half maximum inside its range"
                    )
                x1 = peak_x + direction * halfspan
                break
        return brentq(lambda x: fn(x) - half, min(x0, x1), max(x0, x1),
                      xtol=1e-4 * tol * halfspan, rtol=1e-14)

    right = crossing(+1)
    left = crossing(-1)
    return right - left


def fwhm(profile: ResonanceProfile) -> float:
    """FWHM (rad/s) of a sampled profile via cubic interpolation + bisection."""
    spline = CubicSpline(profile.deltas, profile.buildup)
    center = profile.deltas[int(np.argmax(profile.buildup))]
    halfspan = min(center - profile.deltas[0], profile.deltas[-1] - center)
    if halfspan <= 0:
        raise NoHalfCrossing("profile maximum sits on the sampled boundary")
    return _fwhm_of_function(lambda x: float(spline(x)), center, halfspan)


def wlc_condition(n_g: float) -> float:
    """Cavity-to-medium length ratio L/l = -n_g required for a WLC."""
    if n_g > -1:
        raise InsufficientGroupIndex(
            f"n_g = {n_g:.3f} > -1: required medium would exceed the cavity"
        )
    return -n_g


def wlc_bandwidth_analytic(cavity: CavitySpec, length: float, n3: float) -> float:
    """Enhanced FWHM gamma1 = (4 pi c / (l omega0 n3 F))^(1/3) in rad/s."""
    if n3 <= 0:
        raise NonpositiveCubicTerm(f"n3 = {n3:.3e} must be positive")
    return (4 * np.pi * C_LIGHT / (length * cavity.omega0 * n3 * cavity.finesse)) ** (1.0 / 3.0)


@dataclass
class WlcSolution:
    length: float
    n_g: float
    residual: float
    iterations: int


def solve_wlc_geometry(
    group_index_fn: Callable[[float], float],
    cavity: CavitySpec,
    initial_length: float,
    tol: float = 1e-3,
    max_iter: int = 20,
) -> WlcSolution:
    """Adjust the medium length until n_g(l) * l = -L (fixed cavity length).

    `group_index_fn` measures the resonant group index for a given medium
    length (re-propagating the medium, since its response depends on l).
    """
    l = initial_length
    for it in range(1, max_iter + 1):
        n_g = group_index_fn(l)
        if n_g > -1:
            raise InsufficientGroupIndex(
                f"n_g = {n_g:.3f} at l = {l:.4f} m cannot fill cavity L = {cavity.length} m"
            )
        residual = abs(n_g * l / cavity.length + 1.0)
        if residual < tol:
            return WlcSolution(length=l, n_g=n_g, residual=residual, iterations=it)
        l = cavity.length / abs(n_g)
    raise NoConvergence(f"WLC geometry not converged after {max_iter} iterations")


@dataclass
class ScalingResult:
    """Bandwidth enhancement against empty-cavity bandwidth, with log-log slope."""

    finesses: np.ndarray
    gamma0: np.ndarray
    gamma1: np.ndarray
    slope: float
    gamma_ref: float

    @property
    def ratio(self) -> np.ndarray:
        return self.gamma1 / self.gamma0


def enhancement_scaling(
    curve: SusceptibilityCurve,
    cavity: CavitySpec,
    finesses,
    length: float | None = None,
    include_absorption: bool = False,
) -> ScalingResult:
    """Numeric gamma1/gamma0 for a family of finesses sharing one medium curve.

    Each member's FWHM comes from bisection on the continuous buildup; the
    returned slope is the least-squares log-log slope of gamma1/gamma0
    against gamma0/gamma.
    """
    finesses = np.asarray(finesses, dtype=float)
    if len(finesses) < 4:
        raise ValueError("need at least 4 finesse values for the scaling fit")
    if length is None:
        length = curve.length
    splines = _chi_splines(curve)
    halfspan = (curve.deltas[-1]) * curve.gamma_ref * 0.999
    gamma0 = np.empty(len(finesses))
    gamma1 = np.empty(len(finesses))
    for i, f in enumerate(finesses):
        cav = cavity.with_finesse(f)
        gamma0[i] = empty_bandwidth(cav)

        def profile_fn(x: float) -> float:
            rho, phi = roundtrip_response(
                np.array([x]), cav, curve, length, include_absorption, _splines=splines
            )
            return float(_buildup_values(rho, phi)[0])

        gamma1[i] = _fwhm_of_function(profile_fn, 0.0, halfspan)
    x = np.log(gamma0 / curve.gamma_ref)
    y = np.log(gamma1 / gamma0)
    design = np.column_stack([x, np.ones_like(x)])
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    return ScalingResult(finesses=finesses, gamma0=gamma0, gamma1=gamma1,
                         slope=float(coeffs[0]), gamma_ref=curve.gamma_ref)


def flatness_coefficient(
    cavity: CavitySpec,
    curve: SusceptibilityCurve,
    length: float | None = None,
    include_absorption: bool = False,
    window: float = 1.0,
    npoints: int = 41,
) -> float:
    """Quadratic coefficient of I(Delta)/I(0) around resonance.

    `window` is in units of the empty-cavity bandwidth gamma0; the
    coefficient is per gamma0^2, so 0 means a quadratically flat top and
    larger magnitudes mean a less flat response.
    """
    g0 = empty_bandwidth(cavity)
    deltas = np.linspace(-window * g0, window * g0, npoints)
    profile = buildup_profile(cavity, curve, deltas, length, include_absorption)
    y = profile.buildup / profile.buildup[npoints // 2]
    x = deltas / g0
    design = np.column_stack([np.ones_like(x), x**2])
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coeffs[1])


def _format(x: float) -> str:
    return f"{x:.16e}"


def write_profile_csv(profile: ResonanceProfile, path, header: dict | None = None):
    """Profile CSV: delta_rad_s, buildup_normalized (peak-normalized)."""
    lines = [f"# wlcsim {__version__} resonance profile"]
    meta = {"peak_buildup": profile.peak, **profile.metadata, **(header or {})}
    for key in sorted(meta):
        lines.append(f"# {key} = {meta[key]}")
    lines.append("delta_rad_s,buildup_normalized")
    peak = profile.peak
    for d, v in zip(profile.deltas, profile.buildup):
        lines.append(f"{_format(d)},{_format(v / peak)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_scaling_csv(result: ScalingResult, path, header: dict | None = None):
    """Scaling CSV: gamma0_rad_s, ratio with a # slope= footer."""
    lines = [f"# wlcsim {__version__} enhancement scaling"]
    for key in sorted(header or {}):
        lines.append(f"# {key} = {header[key]}")
    lines.append("gamma0_rad_s,ratio")
    for g0, ratio in zip(result.gamma0, result.ratio):
        lines.append(f"{_format(g0)},{_format(ratio)}")
    lines.append(f"# slope= {_format(result.slope)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
