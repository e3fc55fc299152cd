import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wgqed import boundstate as bst
from wgqed import langevin as lv
from wgqed.errors import ConfigError, SingularMatchingError, UnsupportedModelError
from wgqed.langevin import (
    PLANE_WAVE_FLUX_FACTOR,
    build_system,
    default_probe_grid,
    regression_spectrum,
    steady_state,
    transient_response,
    weak_drive_amplitudes,
)
from wgqed.model import Geometry, SystemConfig
from wgqed.transport import scattering_amplitudes

OMEGA0 = 100.0


def infinite(n, k0L=math.pi / 2):
    return SystemConfig(
        geometry=Geometry.INFINITE, n_qubits=n, k0L=k0L if n > 1 else 0.0
    )


def semi(n, k0a, k0L=math.pi / 2):
    return SystemConfig(
        geometry=Geometry.SEMI_INFINITE,
        n_qubits=n,
        k0L=k0L if n > 1 else 0.0,
        k0a=k0a,
    )


def closed_form_s1(delta, rabi):
    d_prime = 0.25 + delta**2 + rabi**2 / 2.0
    return -0.5j * (0.5 + 1j * delta) * rabi / d_prime


def closed_form_population(delta, rabi):
    # from the population row of the moment matrix: Gamma*s2 = -Omega*Im(s1)
    d_prime = 0.25 + delta**2 + rabi**2 / 2.0
    return rabi**2 / (4.0 * d_prime)


# ---------------------------------------------------------------------------
# system assembly
# ---------------------------------------------------------------------------


def test_dimensions_and_ground_start():
    one = build_system(infinite(1), 0.2, OMEGA0 + 0.3)
    assert one.dim == 3 and one.D.shape == (3, 3) and one.F.shape == (3,)
    assert np.all(one.S0 == 0.0)
    assert one.rabi == pytest.approx(math.sqrt(2.0) * 0.2)
    assert one.detuning == pytest.approx(0.3)
    assert one.nfrak is None

    two = build_system(infinite(2), 0.2, OMEGA0)
    assert two.dim == 15 and two.D.shape == (15, 15)
    assert two.nfrak == pytest.approx(
        math.sqrt(0.5) * 0.2 * np.exp(-0.25j * math.pi)
    )


def test_undriven_single_emitter_eigenvalues():
    sys_ = build_system(infinite(1), 0.0, OMEGA0 + 0.7)
    eig = sorted(np.linalg.eigvals(sys_.D), key=lambda z: (z.real, z.imag))
    expected = sorted(
        [-0.5 + 0.7j, -0.5 - 0.7j, -1.0 + 0j], key=lambda z: (z.real, z.imag)
    )
    np.testing.assert_allclose(eig, expected, atol=1e-12)


def test_two_emitter_matrix_entries_quarter_wave():
    sys_ = build_system(infinite(2), 0.3, OMEGA0 + 0.2)
    D, nf = sys_.D, sys_.nfrak
    assert D[0, 2] == pytest.approx(-0.5j)  # -(Gamma/2) e^{i k0L}
    assert D[0, 0] == pytest.approx(0.2j - 0.5)
    assert D[0, 4] == pytest.approx(2j * nf)
    assert D[0, 10] == pytest.approx(1j)  # Gamma e^{i k0L}
    assert D[4, 4] == pytest.approx(-1.0)
    assert D[6, 14] == pytest.approx(0.0, abs=1e-15)  # 2 Gamma cos(k0L)
    assert D[10, 10] == pytest.approx(0.2j - 1.5)
    assert D[14, 14] == pytest.approx(-2.0)
    np.testing.assert_allclose(
        sys_.F[:4], [-1j * nf, 1j * np.conj(nf), -1j * np.conj(nf), 1j * nf]
    )
    assert np.all(sys_.F[4:] == 0.0)


@settings(max_examples=25, deadline=None)
@given(
    A=st.floats(min_value=0.0, max_value=2.0),
    delta=st.floats(min_value=-3.0, max_value=3.0),
    k0L=st.floats(min_value=0.3, max_value=2.8),
)
def test_moment_matrix_strictly_stable(A, delta, k0L):
    for cfg in (infinite(1), infinite(2, k0L=k0L)):
        sys_ = build_system(cfg, A, OMEGA0 + delta)
        assert not sys_.degenerate
        assert np.max(np.linalg.eigvals(sys_.D).real) < 0.0


def test_dark_configurations_flagged_degenerate():
    for cfg in (semi(1, k0a=math.pi), infinite(2, k0L=math.pi)):
        sys_ = build_system(cfg, 0.1, OMEGA0)
        assert sys_.degenerate
        with pytest.raises(SingularMatchingError):
            steady_state(sys_)


def test_unsupported_and_invalid_configurations():
    with pytest.raises(UnsupportedModelError):
        build_system(infinite(3), 0.1, OMEGA0)
    with pytest.raises(UnsupportedModelError):
        build_system(semi(2, k0a=math.pi / 4), 0.1, OMEGA0)
    with pytest.raises(ConfigError):
        build_system(infinite(1), -0.1, OMEGA0)
    with pytest.raises(ConfigError):
        build_system(infinite(1), 0.1, OMEGA0 + 11.0)
    nonmark = SystemConfig(geometry=Geometry.INFINITE, n_qubits=1, markovian=False)
    with pytest.raises(ConfigError):
        build_system(nonmark, 0.1, OMEGA0)


# ---------------------------------------------------------------------------
# steady state
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("delta", [0.0, 0.4, -1.2])
@pytest.mark.parametrize("rabi", [0.05, 0.7071067811865475, 2.0])
def test_steady_state_closed_form(delta, rabi):
    sys_ = build_system(infinite(1), rabi / math.sqrt(2.0), OMEGA0 + delta)
    s = steady_state(sys_)
    assert s[0] == pytest.approx(closed_form_s1(delta, rabi), abs=1e-12)
    assert s[1] == pytest.approx(np.conj(s[0]), abs=1e-14)
    assert s[2] == pytest.approx(closed_form_population(delta, rabi), abs=1e-12)
    np.testing.assert_allclose(sys_.D @ s, -sys_.F, atol=1e-14)


def test_resonant_half_saturation_drive():
    # Omega = Gamma/sqrt(2) pumps a quarter of the way up
    sys_ = build_system(infinite(1), 0.5, OMEGA0)
    assert steady_state(sys_)[2].real == pytest.approx(0.25, abs=1e-12)


def test_population_saturates_at_half():
    pops = [
        steady_state(build_system(infinite(1), A, OMEGA0))[2].real
        for A in (0.5, 2.0, 10.0, 50.0 / math.sqrt(2.0))
    ]
    assert all(a < b for a, b in zip(pops, pops[1:]))
    assert pops[-1] < 0.5
    assert pops[-1] == pytest.approx(0.5, abs=1e-3)


def test_strong_resonant_drive_empties_coherence():
    s = steady_state(build_system(infinite(1), 40.0, OMEGA0))
    assert abs(s[0]) < 1e-2


# ---------------------------------------------------------------------------
# weak-drive limits
# ---------------------------------------------------------------------------


def test_weak_amplitudes_single_emitter():
    for k in (OMEGA0, OMEGA0 + 0.6, OMEGA0 - 2.3):
        t, r, e = weak_drive_amplitudes(build_system(infinite(1), 0.0, k))
        d = k - OMEGA0
        assert t == pytest.approx(d / (d + 0.5j), abs=1e-14)
        assert r == pytest.approx(-0.5j / (d + 0.5j), abs=1e-14)
        assert e[0] == pytest.approx(math.sqrt(0.5) / (d + 0.5j), abs=1e-14)
        assert abs(t) ** 2 + abs(r) ** 2 == pytest.approx(1.0, abs=1e-14)
    t, r, _ = weak_drive_amplitudes(build_system(infinite(1), 0.0, OMEGA0))
    assert t == pytest.approx(0.0, abs=1e-14)
    assert r == pytest.approx(-1.0, abs=1e-14)


@pytest.mark.parametrize("k0L", [math.pi / 2, math.pi / 4])
def test_weak_amplitudes_match_single_photon_transport(k0L):
    cfg = infinite(2, k0L=k0L)
    k = OMEGA0 + 0.37
    t, r, e = weak_drive_amplitudes(build_system(cfg, 0.05, k))
    amps = scattering_amplitudes(cfg)
    assert abs(t - amps.t(k)) < 1e-8
    assert abs(r - amps.r(k)) < 1e-8
    # excitation amplitudes agree up to the plane-wave state normalization
    expected = math.sqrt(2.0 * math.pi) * np.array(
        [complex(amps.excitation(i)(k)) for i in range(2)]
    )
    np.testing.assert_allclose(e, expected, atol=1e-10)


def test_weak_amplitudes_semi_unimodular():
    for k0a in (math.pi / 2, math.pi / 4):
        t, r, _ = weak_drive_amplitudes(build_system(semi(1, k0a), 0.0, OMEGA0 + 0.3))
        assert t == 0.0
        assert abs(r) == pytest.approx(1.0, abs=1e-12)


def test_finite_drive_output_is_not_unitary():
    # with saturation part of the beam is scattered inelastically, so the
    # coherent weights no longer exhaust the input power
    res = regression_spectrum(build_system(infinite(1), 0.3, OMEGA0), np.array([OMEGA0]))
    assert res.coherent_weight_R + res.coherent_weight_L < 0.09 - 1e-3


# ---------------------------------------------------------------------------
# regression spectrum
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "cfg,A,k",
    [
        (infinite(1), 0.3, OMEGA0),
        (infinite(1), 0.05, OMEGA0 + 0.8),
        (infinite(2), 0.2, OMEGA0),
        (infinite(2, k0L=math.pi / 4), 0.4, OMEGA0 - 0.5),
        (infinite(2, k0L=1.1), 0.7, OMEGA0 + 0.3),
        (semi(1, k0a=math.pi / 2), 0.3, OMEGA0),
        (semi(1, k0a=math.pi / 4), 0.2, OMEGA0 + 0.4),
    ],
)
def test_output_power_equals_input_power(cfg, A, k):
    res = regression_spectrum(build_system(cfg, A, k), np.array([k]))
    assert abs(res.conservation_residual) < 1e-6 * A**2


@pytest.mark.parametrize("half", [OMEGA0, OMEGA0 + 0.5])
def test_weak_drive_reduces_to_two_photon_spectrum(half):
    grid = np.linspace(half - 4.0, half + 4.0, 201)
    pair = bst.incoherent_spectrum(infinite(1), 2.0 * half, grid)
    residuals = []
    for A2 in (1e-3, 1e-4):
        A = math.sqrt(A2)
        res = regression_spectrum(build_system(infinite(1), A, half), grid)
        scaled = res.S_R / (PLANE_WAVE_FLUX_FACTOR * A**4)
        residuals.append(np.max(np.abs(scaled - pair.S_R)) / np.max(pair.S_R))
    assert residuals[1] < 2e-3
    assert 5.0 < residuals[0] / residuals[1] < 20.0  # residual is O(A^2)


def test_weak_drive_reduction_two_emitters():
    cfg = infinite(2)
    half = OMEGA0 + 0.5
    grid = np.linspace(half - 4.0, half + 4.0, 201)
    pair = bst.incoherent_spectrum(cfg, 2.0 * half, grid)
    scale = np.max(pair.S_total)
    residuals = []
    for A2 in (1e-3, 1e-4):
        A = math.sqrt(A2)
        res = regression_spectrum(build_system(cfg, A, half), grid)
        err_r = np.max(np.abs(res.S_R / (PLANE_WAVE_FLUX_FACTOR * A**4) - pair.S_R))
        err_l = np.max(np.abs(res.S_L / (PLANE_WAVE_FLUX_FACTOR * A**4) - pair.S_L))
        residuals.append(max(err_r, err_l) / scale)
    assert residuals[1] < 2e-3
    assert 5.0 < residuals[0] / residuals[1] < 20.0


def test_weak_drive_reduction_behind_mirror():
    cfg = semi(1, k0a=math.pi / 2)
    grid = np.linspace(OMEGA0 - 5.0, OMEGA0 + 5.0, 201)
    pair = bst.incoherent_spectrum(cfg, 2.0 * OMEGA0, grid)
    A = 1e-2
    res = regression_spectrum(build_system(cfg, A, OMEGA0), grid)
    scaled = res.S_L / (PLANE_WAVE_FLUX_FACTOR * A**4)
    assert np.max(np.abs(scaled - pair.S_L)) / np.max(pair.S_L) < 2e-3
    assert np.all(res.S_R == 0.0)
    assert res.coherent_weight_R == 0.0


def test_mollow_triplet_positions():
    rabi = 5.0
    sys_ = build_system(infinite(1), rabi / math.sqrt(2.0), OMEGA0)
    grid = np.linspace(OMEGA0 - 10.0, OMEGA0 + 10.0, 4001)
    S = regression_spectrum(sys_, grid).S_R
    peaks = [
        grid[i] - OMEGA0
        for i in range(1, len(grid) - 1)
        if S[i] > S[i - 1] and S[i] > S[i + 1]
    ]
    assert len(peaks) == 3
    assert abs(peaks[1]) < 1e-9  # central line at the drive
    oscillation = max(abs(np.linalg.eigvals(sys_.D).imag))
    assert abs(-peaks[0] - oscillation) < 0.15
    assert abs(peaks[2] - oscillation) < 0.15
    assert peaks[0] == pytest.approx(-peaks[2], abs=1e-9)


def test_spectrum_nonnegative():
    for sys_ in (
        build_system(infinite(1), 0.8, OMEGA0 + 0.2),
        build_system(infinite(2), 0.3, OMEGA0 - 0.4),
        build_system(semi(1, k0a=math.pi / 4), 0.5, OMEGA0),
    ):
        res = regression_spectrum(sys_)
        floor = -1e-12 * max(np.max(res.S_R), np.max(res.S_L))
        assert np.min(res.S_R) >= floor
        assert np.min(res.S_L) >= floor
        assert not res.flagged


def test_incoherent_weight_is_part_of_the_budget():
    res = regression_spectrum(build_system(infinite(2), 0.3, OMEGA0), np.array([OMEGA0]))
    inc = res.incoherent_integral_R + res.incoherent_integral_L
    assert inc > 0.0
    assert inc < 0.09


def test_quarter_wave_population_parity():
    # at quarter-wave spacing the collective lines sit symmetrically about
    # omega0, so each emitter's saturation is even in the drive detuning
    up = steady_state(build_system(infinite(2), 0.3, OMEGA0 + 0.7))
    down = steady_state(build_system(infinite(2), 0.3, OMEGA0 - 0.7))
    assert up[4] == pytest.approx(down[4], abs=1e-12)
    assert up[5] == pytest.approx(down[5], abs=1e-12)
    # not true at generic spacing
    up = steady_state(build_system(infinite(2, k0L=1.0), 0.3, OMEGA0 + 0.7))
    down = steady_state(build_system(infinite(2, k0L=1.0), 0.3, OMEGA0 - 0.7))
    assert abs(up[4] - down[4]) > 1e-3


def test_degenerate_system_has_no_spectrum():
    with pytest.raises(SingularMatchingError):
        regression_spectrum(build_system(semi(1, k0a=math.pi), 0.1, OMEGA0))


def test_default_probe_grid_covers_the_triplet():
    sys_ = build_system(infinite(1), 5.0 / math.sqrt(2.0), OMEGA0)
    grid = default_probe_grid(sys_)
    assert grid[0] < OMEGA0 - sys_.rabi
    assert grid[-1] > OMEGA0 + sys_.rabi


@settings(max_examples=10, deadline=None)
@given(
    A=st.floats(min_value=0.01, max_value=1.5),
    delta=st.floats(min_value=-2.0, max_value=2.0),
)
def test_power_budget_holds_for_any_drive(A, delta):
    sys_ = build_system(infinite(2), A, OMEGA0 + delta)
    res = regression_spectrum(sys_, np.array([OMEGA0]))
    assert abs(res.conservation_residual) < 1e-9 * A**2
    assert res.incoherent_integral_R >= 0.0
    assert res.incoherent_integral_L >= 0.0


# ---------------------------------------------------------------------------
# transients
# ---------------------------------------------------------------------------


def test_transient_reaches_steady_state():
    sys_ = build_system(infinite(1), 0.4, OMEGA0 + 0.3)
    traj = transient_response(sys_, np.linspace(0.0, 30.0, 61))
    assert np.max(np.abs(traj[0])) == 0.0
    assert np.max(np.abs(traj[-1] - steady_state(sys_))) < 1e-7

    two = build_system(infinite(2), 0.4, OMEGA0)
    traj = transient_response(two, np.linspace(0.0, 40.0, 81))
    assert np.max(np.abs(traj[-1] - steady_state(two))) < 1e-9


def test_transient_grid_validation():
    sys_ = build_system(infinite(1), 0.1, OMEGA0)
    with pytest.raises(ConfigError):
        transient_response(sys_, np.array([-1.0, 0.0]))
    with pytest.raises(ConfigError):
        transient_response(sys_, np.array([0.0, 2.0, 1.0]))
