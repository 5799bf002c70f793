"""Four-level double-lambda atom in the rotating frame.

Level order is |1>, |2> (ground) and |3>, |4> (excited), mapped to matrix
indices 0..3.  Four fields couple the transitions 3-1, 4-2 (strong control
fields), 4-1 (probe) and 3-2 (field generated by four-wave mixing).  All
rates, Rabi frequencies and detunings are expressed in units of a reference
decay rate gamma; time is in units of 1/gamma.

The rotating frame puts |1> at zero energy, rotates |4> with the probe
carrier, |3> with the 3-1 control carrier and |2> with the Raman
combination, so the Hamiltonian is time independent once the generated
field rides the loop-closure frequency (delta32 = delta31 + delta42 -
delta41, recomputed and never stored).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .errors import DegenerateSteadyState, NoConvergence, SingularLinearSystem, StepUnstable

# transitions carrying a field, as 0-based (upper, lower) index pairs
TRANSITIONS = {"31": (2, 0), "42": (3, 1), "41": (3, 0), "32": (2, 1)}

TRACE_TOL = 1e-10
HERMITICITY_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-8
STEP_TRACE_TOL = 1e-6


@dataclass(frozen=True)
class LevelScheme:
    """Decay rates and single-photon detunings (units of gamma).

    delta32 is derived from loop closure and cannot be set independently.
    """

    gamma31: float = 0.5
    gamma32: float = 0.5
    gamma41: float = 0.5
    gamma42: float = 0.5
    delta31: float = 0.0
    delta42: float = 0.0
    delta41: float = 0.0

    def __post_init__(self):
        for name in ("gamma31", "gamma32", "gamma41", "gamma42"):
            if getattr(self, name) < 0:
                raise ValueError(f"decay rate {name} must be >= 0")

    @property
    def delta32(self) -> float:
        return self.delta31 + self.delta42 - self.delta41

    @property
    def gamma3(self) -> float:
        """Total decay rate of |3>."""
        return self.gamma31 + self.gamma32

    @property
    def gamma4(self) -> float:
        """Total decay rate of |4>."""
        return self.gamma41 + self.gamma42

    def detuned_probe(self, delta: float) -> "LevelScheme":
        """Scheme with the probe carrier shifted by `delta` (loop closure keeps
        the generated field consistent automatically)."""
        return replace(self, delta41=self.delta41 + delta)


@dataclass(frozen=True)
class FieldAmplitudes:
    """Complex Rabi frequencies (units of gamma) on the four transitions."""

    omega31: complex = 0.0
    omega42: complex = 0.0
    omega41: complex = 0.0
    omega32: complex = 0.0

    def __post_init__(self):
        for name in ("omega31", "omega42", "omega41", "omega32"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def max_scale(self) -> float:
        return max(abs(self.omega31), abs(self.omega42), abs(self.omega41), abs(self.omega32))


@dataclass
class AtomState:
    """4x4 density matrix with the physicality tolerances used throughout."""

    rho: np.ndarray

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=complex)
        if self.rho.shape != (4, 4):
            raise ValueError("density matrix must be 4x4")

    @classmethod
    def ground(cls, p1: float = 1.0, p2: float = 0.0) -> "AtomState":
        return cls(np.diag([p1, p2, 0.0, 0.0]).astype(complex))

    @classmethod
    def pure(cls, level: int) -> "AtomState":
        """Population in a single level, 1-based."""
        rho = np.zeros((4, 4), dtype=complex)
        rho[level - 1, level - 1] = 1.0
        return cls(rho)

    def population(self, level: int) -> float:
        return self.rho[level - 1, level - 1].real

    def coherence(self, j: int, k: int) -> complex:
        return self.rho[j - 1, k - 1]

    def validate(self):
        if np.linalg.norm(self.rho - self.rho.conj().T) > HERMITICITY_TOL:
            raise ValueError("density matrix not Hermitian")
        if abs(np.trace(self.rho).real - 1.0) > TRACE_TOL:
            raise ValueError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(self.rho).min() < EIGENVALUE_FLOOR:
            raise ValueError("density matrix has a significantly negative eigenvalue")


def build_hamiltonian(fields: FieldAmplitudes, scheme: LevelScheme) -> np.ndarray:
    """Rotating-frame Hamiltonian (units of gamma).

    Diagonal (0, delta42-delta41, -delta31, -delta41); each driven transition
    contributes -Omega/2 on the (upper, lower) element plus the conjugate.
    """
    H = np.zeros((4, 4), dtype=complex)
    H[1, 1] = scheme.delta42 - scheme.delta41
    H[2, 2] = -scheme.delta31
    H[3, 3] = -scheme.delta41
    for name, (j, k) in TRANSITIONS.items():
        omega = getattr(fields, f"omega{name}")
        H[j, k] = -0.5 * omega
        H[k, j] = -0.5 * np.conj(omega)
    return H


def _decay_rates(scheme: LevelScheme) -> tuple[np.ndarray, np.ndarray]:
    """Coherence damping matrix and the (gamma_jk, j, k) jump list."""
    widths = np.array([0.0, 0.0, scheme.gamma3, scheme.gamma4])
    damp = 0.5 * (widths[:, None] + widths[None, :])
    jumps = [
        (scheme.gamma31, 2, 0),
        (scheme.gamma32, 2, 1),
        (scheme.gamma41, 3, 0),
        (scheme.gamma42, 3, 1),
    ]
    return damp, jumps


def master_equation_rhs(rho: np.ndarray, H: np.ndarray, scheme: LevelScheme) -> np.ndarray:
    """-i[H, rho] plus spontaneous decay of |3>, |4> into both ground states.

    Accepts stacked input of shape (..., 4, 4); H broadcasts against rho.
    """
    damp, jumps = _decay_rates(scheme)
    out = -1j * (H @ rho - rho @ H)
    out -= damp * rho
    for rate, j, k in jumps:
        out[..., k, k] += rate * rho[..., j, j]
    return out


def _rk4_step(rho: np.ndarray, H: np.ndarray, scheme: LevelScheme, dt: float) -> np.ndarray:
    k1 = master_equation_rhs(rho, H, scheme)
    k2 = master_equation_rhs(rho + 0.5 * dt * k1, H, scheme)
    k3 = master_equation_rhs(rho + 0.5 * dt * k2, H, scheme)
    k4 = master_equation_rhs(rho + dt * k3, H, scheme)
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def stable_atom_dt(fields: FieldAmplitudes, scheme: LevelScheme) -> float:
    """Step bound 0.1 / max(decay widths, Rabi frequencies, detunings)."""
    scale = max(
        scheme.gamma3,
        scheme.gamma4,
        fields.max_scale(),
        abs(scheme.delta31),
        abs(scheme.delta42),
        abs(scheme.delta41),
        abs(scheme.delta32),
        1.0,
    )
    return 0.1 / scale


def evolve_atom_step(state: AtomState, fields: FieldAmplitudes, scheme: LevelScheme, dt: float) -> AtomState:
    """One classical 4th-order explicit step of the master equation."""
    H = build_hamiltonian(fields, scheme)
    rho = _rk4_step(state.rho, H, scheme, dt)
    drift = abs(np.trace(rho).real - 1.0)
    if drift > STEP_TRACE_TOL:
        raise StepUnstable(f"trace drifted by {drift:.3e} in one step (dt={dt:.3e})")
    return AtomState(rho)


def liouvillian_matrix(fields: FieldAmplitudes, scheme: LevelScheme) -> np.ndarray:
    """16x16 matrix L with d vec(rho)/dt = L vec(rho), row-major vec."""
    H = build_hamiltonian(fields, scheme)
    eye = np.eye(4)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    _, jumps = _decay_rates(scheme)
    for rate, j, k in jumps:
        C = np.zeros((4, 4))
        C[k, j] = 1.0
        proj = np.zeros((4, 4))
        proj[j, j] = 1.0
        L += rate * (np.kron(C, C) - 0.5 * (np.kron(proj, eye) + np.kron(eye, proj)))
    return L


def _hermitize(rho: np.ndarray) -> np.ndarray:
    return 0.5 * (rho + rho.conj().T)


def steady_state(
    fields: FieldAmplitudes,
    scheme: LevelScheme,
    initial: AtomState | None = None,
    max_duration: float = 5000.0,
    rhs_tol: float = 1e-10,
) -> AtomState:
    """Stationary density matrix of the driven, damped atom.

    Solves the null space of the vectorized Liouvillian.  If the null space
    is degenerate the steady state depends on history: with an `initial`
    state the master equation is integrated until the right-hand side norm
    falls below `rhs_tol`, otherwise DegenerateSteadyState is raised.
    """
    L = liouvillian_matrix(fields, scheme)
    ns = scipy.linalg.null_space(L, rcond=1e-9)
    if ns.shape[1] == 1:
        rho = _hermitize(ns[:, 0].reshape(4, 4))
        tr = np.trace(rho).real
        if abs(tr) > 1e-8:
            return AtomState(rho / tr)
        # traceless null vector: treat like a degenerate kernel
    if initial is None:
        raise DegenerateSteadyState(
            f"Liouvillian null space has dimension {max(ns.shape[1], 2)}; supply an initial state"
        )
    H = build_hamiltonian(fields, scheme)
    dt = stable_atom_dt(fields, scheme)
    rho = initial.rho.copy()
    t = 0.0
    while t < max_duration:
        for _ in range(200):
            rho = _rk4_step(rho, H, scheme, dt)
        t += 200 * dt
        if np.linalg.norm(master_equation_rhs(rho, H, scheme)) < rhs_tol:
            return AtomState(_hermitize(rho))
    raise NoConvergence(f"master equation RHS norm still above {rhs_tol} after t={max_duration}/gamma")


def _decay_superop(scheme: LevelScheme) -> np.ndarray:
    """Dissipative part of the vectorized Liouvillian (field independent)."""
    eye = np.eye(4)
    D = np.zeros((16, 16), dtype=complex)
    _, jumps = _decay_rates(scheme)
    for rate, j, k in jumps:
        C = np.zeros((4, 4))
        C[k, j] = 1.0
        proj = np.zeros((4, 4))
        proj[j, j] = 1.0
        D += rate * (np.kron(C, C) - 0.5 * (np.kron(proj, eye) + np.kron(eye, proj)))
    return D


def stacked_liouvillian(H: np.ndarray, scheme: LevelScheme) -> np.ndarray:
    """Vectorized Liouvillian for stacked Hamiltonians (..., 4, 4) -> (..., 16, 16)."""
    batch = H.shape[:-2]
    eye = np.eye(4)
    K = -1j * np.einsum("...ac,bd->...abcd", H, eye)
    K += 1j * np.einsum("ac,...db->...abcd", eye, H)
    return K.reshape(batch + (16, 16)) + _decay_superop(scheme)


_TRACE_COLUMNS = (0, 5, 10, 15)


def stacked_steady_solve(L: np.ndarray) -> np.ndarray:
    """Steady states of stacked Liouvillians via a trace-replaced linear solve.

    Valid when every member has a one-dimensional kernel; degenerate members
    surface as singular-matrix errors or huge residuals at the caller.
    """
    M = L.copy()
    M[..., 0, :] = 0.0
    for col in _TRACE_COLUMNS:
        M[..., 0, col] = 1.0
    rhs = np.zeros(L.shape[:-1], dtype=complex)
    rhs[..., 0] = 1.0
    x = np.linalg.solve(M, rhs[..., None])[..., 0]
    rho = x.reshape(L.shape[:-2] + (4, 4))
    return 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))


def probe_response_stack(
    control31: np.ndarray,
    control42: np.ndarray,
    scheme: LevelScheme,
    deltas: np.ndarray,
) -> np.ndarray:
    """Weak-probe response rho41 per unit Rabi drive for stacked control values.

    `control31`/`control42` are complex arrays over cells, `deltas` the probe
    detunings (units of gamma); returns alpha11 with shape (len(deltas),
    len(control31)).  The generated field is held at zero, matching the
    suppressed-propagation configuration.
    """
    control31 = np.asarray(control31, dtype=complex)
    control42 = np.asarray(control42, dtype=complex)
    deltas = np.asarray(deltas, dtype=float)
    ncell = control31.shape[0]
    H0 = np.zeros((ncell, 4, 4), dtype=complex)
    H0[:, 2, 2] = -scheme.delta31
    H0[:, 2, 0] = -0.5 * control31
    H0[:, 0, 2] = np.conj(H0[:, 2, 0])
    H0[:, 3, 1] = -0.5 * control42
    H0[:, 1, 3] = np.conj(H0[:, 3, 1])
    H = np.broadcast_to(H0, (len(deltas), ncell, 4, 4)).copy()
    d41 = scheme.delta41 + deltas
    H[..., 1, 1] = (scheme.delta42 - d41)[:, None]
    H[..., 3, 3] = -d41[:, None]
    L = stacked_liouvillian(H, scheme)
    rho0 = stacked_steady_solve(L)
    drive = np.einsum(
        "pq,...q->...p",
        _commutator_superop(_probe_perturbation("41")),
        rho0.reshape(rho0.shape[:-2] + (16,)),
    )
    M = L.copy()
    M[..., 0, :] = 0.0
    for col in _TRACE_COLUMNS:
        M[..., 0, col] = 1.0
    rhs = -drive
    rhs[..., 0] = 0.0
    x = np.linalg.solve(M, rhs[..., None])[..., 0]
    return x[..., 12]  # vec index of rho[3, 0]


def _probe_perturbation(transition: str) -> np.ndarray:
    """Hamiltonian of a unit-Rabi drive on one transition, detunings excluded."""
    j, k = TRANSITIONS[transition]
    V = np.zeros((4, 4), dtype=complex)
    V[j, k] = -0.5
    V[k, j] = -0.5
    return V


def _commutator_superop(V: np.ndarray) -> np.ndarray:
    eye = np.eye(4)
    return -1j * (np.kron(V, eye) - np.kron(eye, V.T))


def _control_only_steady(controls: FieldAmplitudes, scheme: LevelScheme) -> np.ndarray:
    """Zeroth-order state for the linear response; degenerate kernels resolve
    to the probe ground state |1> (the natural unpumped preparation)."""
    try:
        return steady_state(controls, scheme).rho
    except DegenerateSteadyState:
        return steady_state(controls, scheme, initial=AtomState.pure(1)).rho


def loop_response(
    controls: FieldAmplitudes, scheme: LevelScheme, delta: float
) -> np.ndarray:
    """First-order response matrix of the probe/generated coherence pair.

    Returns alpha with (rho41, rho32) = alpha @ (omega41, omega32) for
    infinitesimal drives at probe detuning `delta`.
    """
    if controls.omega41 != 0 or controls.omega32 != 0:
        raise ValueError("controls must have omega41 = omega32 = 0")
    sch = scheme.detuned_probe(delta)
    rho0 = _control_only_steady(controls, sch)
    L0 = liouvillian_matrix(controls, sch)
    alpha = np.zeros((2, 2), dtype=complex)
    for col, transition in enumerate(("41", "32")):
        drive = _commutator_superop(_probe_perturbation(transition)) @ rho0.reshape(16)
        x, *_ = np.linalg.lstsq(L0, -drive, rcond=None)
        residual = np.linalg.norm(L0 @ x + drive)
        if residual > 1e-8 * max(np.linalg.norm(drive), 1e-30):
            raise SingularLinearSystem(
                f"no steady linear response at delta={delta} (residual {residual:.2e})"
            )
        drho = x.reshape(4, 4)
        alpha[0, col] = drho[TRANSITIONS["41"]]
        alpha[1, col] = drho[TRANSITIONS["32"]]
    return alpha


def linear_probe_susceptibility(
    controls: FieldAmplitudes,
    scheme: LevelScheme,
    delta: float,
    include_4wm: bool = False,
) -> complex:
    """Single-atom weak-probe response rho41 per unit probe Rabi frequency.

    Without four-wave mixing this is the bare linear response with the
    generated field held at zero.  With `include_4wm` the generated field is
    allowed to build up coherently, which couples the probe to the loop
    coherence; the returned value is then the probe-dominant eigenvalue of
    the coupled two-mode response (the branch a deep medium settles into),
    scaled back to the same per-unit-probe normalization.

    The bare two-level resonant value is i/(gamma41+gamma42), purely
    imaginary and positive.
    """
    alpha = loop_response(controls, scheme, delta)
    if not include_4wm:
        return alpha[0, 0]
    # weight rows by the branching ratios that enter the propagation coupling
    coupling = np.array(
        [
            [scheme.gamma41 * alpha[0, 0], scheme.gamma41 * alpha[0, 1]],
            [scheme.gamma32 * alpha[1, 0], scheme.gamma32 * alpha[1, 1]],
        ]
    )
    eigvals, eigvecs = np.linalg.eig(coupling)
    probe_weight = np.abs(eigvecs[0, :])
    branch = int(np.argmax(probe_weight))
    if scheme.gamma41 == 0:
        raise ValueError("probe branch undefined for gamma41 = 0")
    return eigvals[branch] / scheme.gamma41
