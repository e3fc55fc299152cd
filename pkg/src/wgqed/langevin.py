"""Driven emitters: input-output equations and regression spectra.

Everything else in this package treats exactly two photons.  This module
is the independent route: a classical drive of amplitude ``A`` enters
the guide, the field is integrated out, and the emitter moments obey a
closed linear system ``dS/dt = D S + F`` with constant ``D`` and ``F``.
Steady states are linear solves, two-time correlations follow from the
regression theorem, and the emission spectrum is read off the resolvent
``(D + i(omega - k))^{-1}`` -- valid at any drive strength, which is
what makes it a useful cross-check on the weak-drive scattering engine
(see ``PLANE_WAVE_FLUX_FACTOR`` for the bridge between the two).

The moment systems are hard-coded: dimension 3 for one emitter and 15
for two (the closed set grows as ``(4**n - 1)**2``, so larger arrays are
out of scope).  A mirror-terminated guide with a single emitter maps
onto the same 3x3 system with the dressed frequency and width of its
shifted pole; the drive and detection then couple through the one
standing-wave channel, whose weight is the full dressed width rather
than half of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    ConvergenceError,
    SingularMatchingError,
    UnsupportedModelError,
)
from .model import Geometry, SystemConfig, qubit_positions
from .transport import poles

__all__ = [
    "PLANE_WAVE_FLUX_FACTOR",
    "LangevinSystem",
    "RegressionSpectrum",
    "build_system",
    "default_probe_grid",
    "regression_spectrum",
    "steady_state",
    "transient_response",
    "weak_drive_amplitudes",
]

#: Conversion between the two spectral conventions in this package.  The
#: regression spectrum is normalized to the incident flux (integrating
#: S_R + S_L plus the coherent weights gives A**2), while the scattering
#: engine normalizes to one incident photon pair.  At weak driving
#: S_drive(omega) = PLANE_WAVE_FLUX_FACTOR * A**4 * S_pair(omega) +
#: O(A**6): expanding the coherent state, the pair component carries
#: amplitude A**2 and the continuum normalization of the pair state
#: contributes the remaining factor of pi.
PLANE_WAVE_FLUX_FACTOR = math.pi

_STABILITY_TOL = 1e-9


@dataclass(frozen=True)
class LangevinSystem:
    """Moment system ``dS/dt = D S + F`` for a coherently driven array.

    ``rabi`` is the Rabi frequency as it appears in ``D`` (``sqrt(2
    Gamma) A`` for the infinite guide, ``2 sqrt(Gamma_eff) A`` behind a
    mirror) and ``detuning = k - omega_eff`` is measured from the
    (possibly dressed) emitter line.  ``nfrak`` is the phased drive
    sqrt(Gamma/2) A exp(-i k0L / 2) of the two-emitter system, None
    otherwise.  ``degenerate`` marks systems with an undamped mode
    (decoupled emitter or dark pair), which have no steady state.
    """

    config: SystemConfig
    A: float
    k: float
    dim: int
    D: np.ndarray
    F: np.ndarray
    S0: np.ndarray
    rabi: float
    detuning: float
    nfrak: complex | None
    degenerate: bool
    omega_eff: float
    gamma_eff: float


def _dressed_parameters(config: SystemConfig) -> tuple[float, float]:
    """Emitter line and width as seen by the drive (mirror included)."""
    if config.geometry is Geometry.INFINITE:
        return config.omega0, config.gamma
    z = poles(config).poles[0]
    return float(z.real), float(-2.0 * z.imag)


def build_system(config: SystemConfig, A: float, k: float) -> LangevinSystem:
    """Assemble the moment system for drive amplitude A at momentum k."""
    if not config.markovian:
        raise ConfigError("the moment equations assume the markovian limit")
    if A < 0:
        raise ConfigError(f"drive amplitude must be non-negative, got {A:g}")
    if config.n_qubits > 2 or (
        config.geometry is Geometry.SEMI_INFINITE and config.n_qubits > 1
    ):
        raise UnsupportedModelError(
            "moment systems are hard-coded for one emitter (either geometry) "
            "and two emitters in an infinite guide; the closed set grows as "
            "(4**n - 1)**2"
        )
    if abs(k - config.omega0) > 10.0 * config.gamma:
        raise ConfigError(
            "drive momentum too far from the emitter line for the "
            f"rotating-wave treatment: |k - omega0| = {abs(k - config.omega0):g}"
        )

    gamma = config.gamma
    omega_eff, gamma_eff = _dressed_parameters(config)
    delta = k - omega_eff
    nfrak: complex | None = None

    if config.n_qubits == 1:
        if config.geometry is Geometry.INFINITE:
            rabi = math.sqrt(2.0 * gamma) * A
        else:
            # one standing-wave channel: drive and decay both carry the
            # full dressed width
            rabi = 2.0 * math.sqrt(max(gamma_eff, 0.0)) * A
        g, w = gamma_eff, rabi
        D = np.array(
            [
                [-g / 2.0 + 1j * delta, 0.0, 1j * w],
                [0.0, -g / 2.0 - 1j * delta, -1j * w],
                [1j * w / 2.0, -1j * w / 2.0, -g],
            ],
            dtype=complex,
        )
        F = np.array([-1j * w / 2.0, 1j * w / 2.0, 0.0], dtype=complex)
    else:
        rabi = math.sqrt(2.0 * gamma) * A
        nfrak = math.sqrt(gamma / 2.0) * A * np.exp(-0.5j * config.k0L)
        D = _two_emitter_matrix(gamma, delta, config.k0L, nfrak)
        F = np.zeros(15, dtype=complex)
        F[0] = -1j * nfrak
        F[1] = 1j * np.conj(nfrak)
        F[2] = -1j * np.conj(nfrak)
        F[3] = 1j * nfrak

    degenerate = bool(
        np.max(np.linalg.eigvals(D).real) > -_STABILITY_TOL * gamma
    )
    return LangevinSystem(
        config=config,
        A=float(A),
        k=float(k),
        dim=D.shape[0],
        D=D,
        F=F,
        S0=np.zeros(D.shape[0], dtype=complex),
        rabi=float(rabi),
        detuning=float(delta),
        nfrak=nfrak,
        degenerate=degenerate,
        omega_eff=omega_eff,
        gamma_eff=gamma_eff,
    )


def _two_emitter_matrix(gamma, delta, k0L, nf) -> np.ndarray:
    """The 15x15 coefficient matrix of the two-emitter moment set.

    Slot order: s1, s1*, s2, s2*, s3, s4, s5, s5*, s6, s6*, s7, s7*,
    s8, s8*, s9 -- the two lowering amplitudes, the two populations,
    the exchange and two-photon coherences, the population-filtered
    amplitudes, and the double occupation.
    """
    hop = 0.5 * gamma * np.exp(1j * k0L)
    hopc = np.conj(hop)
    nfc = np.conj(nf)
    i_ = 1j
    g = gamma
    d = 1j * delta
    D = np.array(
        [
            # fmt: off
            [d - g/2, 0, -hop, 0, 2*i_*nf, 0, 0, 0, 0, 0, 2*hop, 0, 0, 0, 0],
            [0, -d - g/2, 0, -hopc, -2*i_*nfc, 0, 0, 0, 0, 0, 0, 2*hopc, 0, 0, 0],
            [-hop, 0, d - g/2, 0, 0, 2*i_*nfc, 0, 0, 0, 0, 0, 0, 2*hop, 0, 0],
            [0, -hopc, 0, -d - g/2, 0, -2*i_*nf, 0, 0, 0, 0, 0, 0, 0, 2*hopc, 0],
            [i_*nfc, -i_*nf, 0, 0, -g, 0, -hop, -hopc, 0, 0, 0, 0, 0, 0, 0],
            [0, 0, i_*nf, -i_*nfc, 0, -g, -hopc, -hop, 0, 0, 0, 0, 0, 0, 0],
            [0, -i_*nfc, i_*nfc, 0, -hop, -hopc, -g, 0, 0, 0, -2*i_*nfc, 0, 0, 2*i_*nfc, 2*g*math.cos(k0L)],
            [i_*nf, 0, 0, -i_*nf, -hopc, -hop, 0, -g, 0, 0, 0, 2*i_*nf, -2*i_*nf, 0, 2*g*math.cos(k0L)],
            [-i_*nfc, 0, -i_*nf, 0, 0, 0, 0, 0, 2*d - g, 0, 2*i_*nf, 0, 2*i_*nfc, 0, 0],
            [0, i_*nf, 0, i_*nfc, 0, 0, 0, 0, 0, -2*d - g, 0, -2*i_*nfc, 0, -2*i_*nf, 0],
            [0, 0, 0, 0, -i_*nfc, 0, -i_*nf, 0, i_*nfc, 0, d - 3*g/2, 0, -hopc, 0, 2*i_*nfc],
            [0, 0, 0, 0, i_*nf, 0, 0, i_*nfc, 0, -i_*nf, 0, -d - 3*g/2, 0, -hop, -2*i_*nf],
            [0, 0, 0, 0, 0, -i_*nf, 0, -i_*nfc, i_*nf, 0, -hopc, 0, d - 3*g/2, 0, 2*i_*nf],
            [0, 0, 0, 0, 0, i_*nfc, i_*nf, 0, 0, -i_*nfc, 0, -hop, 0, -d - 3*g/2, -2*i_*nfc],
            [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, i_*nf, -i_*nfc, i_*nfc, -i_*nf, -2*g],
            # fmt: on
        ],
        dtype=complex,
    )
    return D


def steady_state(sys: LangevinSystem) -> np.ndarray:
    """Long-time moment vector, the solution of D S = -F."""
    if sys.degenerate:
        raise SingularMatchingError(
            "an undamped mode makes the steady state ill-defined "
            "(decoupled emitter or dark pair)"
        )
    try:
        return np.linalg.solve(sys.D, -sys.F)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded above
        raise SingularMatchingError("moment matrix is singular") from exc


def _minus_slots(n: int) -> tuple[int, ...]:
    # slots holding the lowering amplitudes <sigma_i->
    return (0,) if n == 1 else (0, 2)


def _output_phases(sys: LangevinSystem) -> np.ndarray:
    if sys.config.geometry is Geometry.SEMI_INFINITE:
        return np.ones(1, dtype=complex)
    x = np.asarray(qubit_positions(sys.config))
    return np.exp(1j * sys.config.k0 * x)


def weak_drive_amplitudes(sys: LangevinSystem) -> tuple[complex, complex, np.ndarray]:
    """A -> 0 transmission, reflection, and excitation amplitudes.

    In the weak-drive limit the lowering amplitudes decouple from the
    populations (which are one order higher in A), so the limit is the
    solution of the amplitude block alone, per unit drive.  For the
    mirror geometry the "transmission" slot is zero and the reflection
    carries the unimodular background.
    """
    config = sys.config
    n = config.n_qubits
    slots = list(_minus_slots(n))
    block = sys.D[np.ix_(slots, slots)]
    if config.geometry is Geometry.INFINITE:
        v = config.coupling
        u = _output_phases(sys)
        funit = -1j * v * u  # drive phase at each emitter
        try:
            e = np.linalg.solve(block, -funit)
        except np.linalg.LinAlgError as exc:
            raise SingularMatchingError(
                "amplitude block is singular (dark pair on resonance)"
            ) from exc
        t = 1.0 - 1j * v * np.sum(e * np.conj(u))
        r = -1j * v * np.sum(e * u)
        return complex(t), complex(r), e
    c_out = math.sqrt(max(sys.gamma_eff, 0.0))
    if abs(block[0, 0]) == 0.0:
        raise SingularMatchingError("decoupled emitter has no weak-drive response")
    e = np.array([-(-1j * c_out) / block[0, 0]])
    r = 1.0 - 1j * c_out * e[0]
    return 0.0, complex(r), e


@dataclass(frozen=True)
class RegressionSpectrum:
    """Steady-state emission spectrum of the driven array.

    ``S_R``/``S_L`` are the incoherent densities on ``omega_grid``; the
    coherent output is a delta line at the drive whose weights are
    reported separately.  The incoherent integrals come from the exact
    residue of the resolvent (not from the grid), so
    ``conservation_residual`` measures the physics, not the mesh.
    ``flagged`` lists grid indices where the resolvent was singular
    (skipped, NaN in the densities).
    """

    omega_grid: np.ndarray
    S_R: np.ndarray
    S_L: np.ndarray
    coherent_weight_R: float
    coherent_weight_L: float
    incoherent_integral_R: float
    incoherent_integral_L: float
    conservation_residual: float
    flagged: tuple[int, ...]


def default_probe_grid(sys: LangevinSystem, n_points: int = 1201) -> np.ndarray:
    """Frequency grid wide enough for the Mollow structure at this drive."""
    half = 6.0 * sys.config.gamma + 3.0 * sys.rabi
    return np.linspace(sys.k - half, sys.k + half, n_points)


def _initial_two_time(sys: LangevinSystem, s: np.ndarray) -> np.ndarray:
    """Columns: the t'=0 regression vector seeded by each <sigma_i+>.

    Multiplying the moment operators by sigma_{i+} from the left and
    using the Pauli algebra maps every product back onto a steady-state
    moment or onto zero; these tables are that map.
    """
    n = sys.config.n_qubits
    if n == 1:
        return np.array([[s[2]], [0.0], [0.0]], dtype=complex)
    c1 = [s[4], 0, s[6], s[9], 0, s[13], 0, s[11], s[10], 0, 0, 0, s[14], 0, 0]
    c2 = [s[7], s[9], s[5], 0, s[11], 0, s[13], 0, s[12], 0, s[14], 0, 0, 0, 0]
    return np.array([c1, c2], dtype=complex).T


def regression_spectrum(
    sys: LangevinSystem, omega_grid=None
) -> RegressionSpectrum:
    """Coherent weights plus incoherent densities of the emitted field."""
    s = steady_state(sys)
    if omega_grid is None:
        omega_grid = default_probe_grid(sys)
    omega = np.asarray(omega_grid, dtype=float)
    config = sys.config
    n = config.n_qubits
    slots = list(_minus_slots(n))
    u = _output_phases(sys)

    c0 = _initial_two_time(sys, s)
    c_inf = np.outer(s, np.conj(s[slots]))  # factorized late-time limit
    dc = c0 - c_inf

    # resolvent against every seed column, one factorization per frequency
    shifts = omega - sys.k
    mats = sys.D[None, :, :] + 1j * shifts[:, None, None] * np.eye(sys.dim)
    flagged: list[int] = []
    try:
        solved = np.linalg.solve(mats, np.broadcast_to(-dc, (len(omega), sys.dim, n)))
    except np.linalg.LinAlgError:
        solved = np.full((len(omega), sys.dim, n), np.nan, dtype=complex)
        for idx in range(len(omega)):
            try:
                solved[idx] = np.linalg.solve(mats[idx], -dc)
            except np.linalg.LinAlgError:
                flagged.append(idx)
    # K[w, i, j] = component <sigma_j-> of the correlation seeded by i
    K = solved[:, slots, :].transpose(0, 2, 1)
    dc_mat = dc[slots, :].T

    amp = s[slots]
    if config.geometry is Geometry.INFINITE:
        v2 = config.coupling**2
        S_R = (v2 / math.pi) * np.real(np.einsum("i,wij,j->w", u, K, np.conj(u)))
        S_L = (v2 / math.pi) * np.real(np.einsum("i,wij,j->w", np.conj(u), K, u))
        int_R = v2 * float(np.real(np.einsum("i,ij,j->", u, dc_mat, np.conj(u))))
        int_L = v2 * float(np.real(np.einsum("i,ij,j->", np.conj(u), dc_mat, u)))
        a_r = sys.A - 1j * config.coupling * np.sum(amp * np.conj(u))
        a_l = -1j * config.coupling * np.sum(amp * u)
        coh_r, coh_l = float(abs(a_r) ** 2), float(abs(a_l) ** 2)
    else:
        g_eff = sys.gamma_eff
        S_L = (g_eff / math.pi) * np.real(K[:, 0, 0])
        S_R = np.zeros_like(S_L)
        int_L = g_eff * float(np.real(dc_mat[0, 0]))
        int_R = 0.0
        coh_r = 0.0
        coh_l = float(abs(sys.A - 1j * math.sqrt(g_eff) * amp[0]) ** 2)

    residual = coh_r + coh_l + int_R + int_L - sys.A**2
    return RegressionSpectrum(
        omega_grid=omega,
        S_R=S_R,
        S_L=S_L,
        coherent_weight_R=coh_r,
        coherent_weight_L=coh_l,
        incoherent_integral_R=int_R,
        incoherent_integral_L=int_L,
        conservation_residual=float(residual),
        flagged=tuple(flagged),
    )


def transient_response(sys: LangevinSystem, t_grid) -> np.ndarray:
    """Moment trajectories from the ground state, for sanity plots.

    Returns an array of shape (len(t_grid), dim).  Observables never
    need this -- the steady state and the resolvent are exact -- but
    watching the approach to steady state is a cheap end-to-end check.
    """
    import scipy.integrate

    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) == 0 or t[0] < 0.0 or np.any(np.diff(t) <= 0.0):
        raise ConfigError("t_grid must be non-negative and increasing")
    dim = sys.dim

    def rhs(_, y):
        z = y[:dim] + 1j * y[dim:]
        dz = sys.D @ z + sys.F
        return np.concatenate([dz.real, dz.imag])

    sol = scipy.integrate.solve_ivp(
        rhs,
        (0.0, float(t[-1])) if t[-1] > 0 else (0.0, 1.0),
        np.zeros(2 * dim),
        t_eval=t,
        method="RK45",
        rtol=1e-9,
        atol=1e-12,
    )
    if not sol.success:
        raise ConvergenceError(f"transient integration failed: {sol.message}")
    return (sol.y[:dim] + 1j * sol.y[dim:]).T
