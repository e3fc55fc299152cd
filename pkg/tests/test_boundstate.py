import math

import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, settings
from hypothesis import strategies as st

from wgqed import boundstate as bst
from wgqed.boundstate import (
    DetectionChannel,
    alpha_beta,
    default_omega_grid,
    default_t_grid,
    g2_trace,
    green_matrix,
    incoherent_spectrum,
    overlap_vector,
    photon_probabilities_n1,
    two_photon_state,
)
from wgqed.errors import (
    ConfigError,
    DetectorPlacementError,
    IllConditionedChannelError,
    UnsupportedModelError,
)
from wgqed.model import Geometry, SystemConfig
from wgqed.numerics import residue_sum
from wgqed.transport import Direction, poles, scattering_amplitudes

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


def closed_form_spectrum(omega, E):
    """Single-emitter fluorescence density: product of three Lorentzians."""
    return 1.0 / (
        4.0
        * math.pi**2
        * ((E - OMEGA0 - omega) ** 2 + 0.25)
        * ((E / 2.0 - OMEGA0) ** 2 + 0.25)
        * ((omega - OMEGA0) ** 2 + 0.25)
    )


# ---------------------------------------------------------------------------
# bound-state weights
# ---------------------------------------------------------------------------


def test_overlap_is_scaled_excitation_square():
    cfg = infinite(2)
    E = 2.0 * OMEGA0 + 0.6
    amps = scattering_amplitudes(cfg)
    expected = math.sqrt(2.0) * np.array(
        [amps.excitation(i)(E / 2.0) ** 2 for i in range(2)]
    )
    np.testing.assert_allclose(overlap_vector(cfg, E), expected, rtol=1e-14)


def test_green_single_emitter_closed_forms():
    E = 2.0 * OMEGA0 + 0.3
    g = green_matrix(infinite(1), E)
    assert g.shape == (1, 1)
    assert g[0, 0] == pytest.approx(2.0 / (0.3 + 1j), rel=1e-12)
    # semi-infinite: same form built on the dressed pole
    cfg = semi(1, k0a=math.pi / 4)
    z = poles(cfg).poles[0]
    g = green_matrix(cfg, E)
    assert g[0, 0] == pytest.approx(2.0 / (E - 2.0 * z), rel=1e-12)


@pytest.mark.parametrize("cfg", [infinite(3), semi(3, k0a=math.pi / 3)])
def test_green_matrix_symmetric(cfg):
    g = green_matrix(cfg, 2.0 * OMEGA0 - 0.8)
    np.testing.assert_allclose(g, g.T, rtol=0, atol=1e-14 * np.abs(g).max())


def test_weights_solve_green_system():
    cfg = infinite(3, k0L=math.pi / 4)
    E = 2.0 * OMEGA0 + 1.1
    state = two_photon_state(cfg, E)
    np.testing.assert_allclose(
        state.green @ state.weights, state.overlap, rtol=0,
        atol=1e-12 * np.abs(state.overlap).max(),
    )


def test_two_photon_state_requires_markovian():
    cfg = SystemConfig(geometry=Geometry.INFINITE, n_qubits=1, markovian=False)
    with pytest.raises(ConfigError, match="markovian"):
        two_photon_state(cfg, 2.0 * OMEGA0)


def test_two_photon_state_energy_window():
    with pytest.raises(ConfigError, match="10"):
        two_photon_state(infinite(1), 2.0 * OMEGA0 + 21.0)


def _composite_nodes(center, fine_half, outer_half, fine_width=0.5):
    """Gauss-Legendre nodes: narrow central panels (poles sit ~Gamma/2 off
    axis, so wide panels converge hopelessly slowly) plus log-spaced wings."""
    panels = []
    xf, wf = np.polynomial.legendre.leggauss(16)
    edges_f = np.arange(-fine_half, fine_half + 1e-12, fine_width)
    for a, b in zip(edges_f[:-1], edges_f[1:]):
        mid, half = center + (a + b) / 2.0, (b - a) / 2.0
        panels.append((mid + xf * half, wf * half))
    xc, wc = np.polynomial.legendre.leggauss(96)
    edges = [fine_half]
    while edges[-1] < outer_half:
        edges.append(min(edges[-1] * 4.0, outer_half))
    for a, b in zip(edges[:-1], edges[1:]):
        mid, half = (a + b) / 2.0, (b - a) / 2.0
        panels.append((center + mid + xc * half, wc * half))
        panels.append((center - mid + xc * half, wc * half))
    nodes = np.concatenate([p[0] for p in panels])
    weights = np.concatenate([p[1] for p in panels])
    return nodes, weights


def test_green_matrix_against_double_quadrature():
    # independent route: the defining double integral over single-photon
    # eigenstate products, pole-subtracted and epsilon-extrapolated
    cfg = infinite(2, k0L=math.pi / 4)
    E = 2.0 * OMEGA0 + 0.44
    green = green_matrix(cfg, E)
    amps = scattering_amplitudes(cfg)
    e_r = [amps.excitation(i, Direction.FROM_LEFT) for i in range(2)]
    e_l = [amps.excitation(i, Direction.FROM_RIGHT) for i in range(2)]

    def family(i, j):
        def f(k):
            kc = np.conj(k)
            return e_r[i](k) * np.conj(e_r[j](kc)) + e_l[i](k) * np.conj(e_l[j](kc))

        return f

    hw = 1500.0
    nodes, weights = _composite_nodes(OMEGA0, 12.0, hw)
    log_a, log_b = OMEGA0 - hw, OMEGA0 + hw
    for i, j in ((0, 1), (0, 0)):
        f = family(i, j)
        f_vals = f(nodes)

        def inner(p):
            fp = f(p)
            reg = (f_vals - fp) / (p - nodes)
            return np.sum(reg * weights) + fp * np.log((p - log_a) / (p - log_b))

        def outer(eps):
            vals = np.array([inner(E - k1 + 1j * eps) for k1 in nodes])
            return np.sum(f_vals * vals * weights)

        coarse, fine = outer(2e-5), outer(1e-5)
        extrapolated = 2.0 * fine - coarse
        assert abs(green[i, j] - 2.0 * extrapolated) < 1e-6 * abs(green[i, j])


# ---------------------------------------------------------------------------
# incoherent spectrum
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("half", [OMEGA0, OMEGA0 - 0.5, OMEGA0 + 0.5])
def test_single_emitter_spectrum_closed_form(half):
    E = 2.0 * half
    grid = np.linspace(95.0, 105.0, 2001)
    result = incoherent_spectrum(infinite(1), E, grid)
    expected = closed_form_spectrum(grid, E)
    np.testing.assert_allclose(result.S_R, expected, rtol=1e-6)
    np.testing.assert_allclose(result.S_L, expected, rtol=1e-6)


def test_resonant_peak_value():
    result = incoherent_spectrum(infinite(1), 2.0 * OMEGA0, np.array([OMEGA0]))
    assert result.S_R[0] == pytest.approx(16.0 / math.pi**2, rel=1e-12)


@pytest.mark.parametrize("half", [OMEGA0, OMEGA0 + 0.5])
def test_single_emitter_flux_identity(half):
    # integral of S_R is 4/(pi*D'^2) with D' = (E-2w0)^2 + 1; S_L doubles it.
    # The resonant case exercises the quadrature fallback, the detuned one
    # the residue route.
    E = 2.0 * half
    d_prime = (E - 2.0 * OMEGA0) ** 2 + 1.0
    expected = 8.0 / (math.pi * d_prime**2)
    result = incoherent_spectrum(infinite(1), E, np.array([OMEGA0]))
    assert result.flux == pytest.approx(expected, rel=1e-8)


@pytest.mark.parametrize("n,k0L", [(2, math.pi / 2), (3, math.pi / 4), (5, math.pi / 2)])
def test_spectrum_symmetric_about_half_energy(n, k0L):
    cfg = SystemConfig(geometry=Geometry.INFINITE, n_qubits=n, k0L=k0L)
    E = 2.0 * (OMEGA0 + 0.37)
    x = np.linspace(-5.0, 5.0, 801)
    result = incoherent_spectrum(cfg, E, E / 2.0 + x)
    total = result.S_total
    assert np.max(np.abs(total - total[::-1])) < 1e-6 * np.max(total)


def test_spectrum_nonnegative_and_normalized():
    cfg = infinite(3)
    result = incoherent_spectrum(cfg, 2.0 * OMEGA0 + 0.8)
    assert np.all(result.S_R >= 0.0)
    assert np.all(result.S_L >= 0.0)
    assert result.flux > 0.0
    np.testing.assert_allclose(
        result.normalized, result.S_total / result.flux, rtol=1e-14
    )


@pytest.mark.parametrize("n,k0L", [(2, math.pi / 2), (3, math.pi / 4)])
def test_flux_residues_match_quadrature(n, k0L):
    # dual route: closed-form residue algebra vs adaptive quadrature
    cfg = SystemConfig(geometry=Geometry.INFINITE, n_qubits=n, k0L=k0L)
    E = 2.0 * (OMEGA0 + 0.37)
    state = two_photon_state(cfg, E)
    by_residues = sum(
        bst._flux_by_residues(cfg, state, letter) for letter in ("R", "L")
    )
    by_quadrature = bst._flux_by_quadrature(cfg, state)
    assert by_residues == pytest.approx(by_quadrature, rel=1e-6)


def test_mirror_drive_symmetry_at_quarter_wave():
    # at k0L = pi/2 the pole set is symmetric about omega0, so detuning the
    # drive up or down produces mirror-image spectra channel by channel
    cfg = infinite(3)
    delta = 0.4
    x = np.linspace(-4.0, 4.0, 301)
    up = incoherent_spectrum(cfg, 2.0 * (OMEGA0 + delta), OMEGA0 + delta + x)
    down = incoherent_spectrum(cfg, 2.0 * (OMEGA0 - delta), OMEGA0 - delta - x)
    np.testing.assert_allclose(up.S_R, down.S_R, rtol=0, atol=1e-8 * up.S_R.max())
    np.testing.assert_allclose(up.S_L, down.S_L, rtol=0, atol=1e-8 * up.S_L.max())


def test_interference_null_kills_bound_state():
    # two emitters behind the mirror, quarter-wave spacings: driving at the
    # lower dressed line leaves no inelastic weight at all
    cfg = semi(2, k0a=math.pi / 4)
    nulled = incoherent_spectrum(cfg, 2.0 * 99.5)
    reference = incoherent_spectrum(cfg, 2.0 * 100.0)
    assert nulled.flux < 1e-10 * reference.flux
    assert np.max(nulled.S_L) < 1e-10 * np.max(reference.S_L)


def test_semi_spectrum_exits_left_only():
    result = incoherent_spectrum(semi(2, k0a=math.pi / 3), 2.0 * OMEGA0 + 0.4)
    assert np.all(result.S_R == 0.0)
    assert result.coherent_weight_R == 0.0
    assert np.max(result.S_L) > 0.0
    # the mirror makes reflection unimodular: two photons in, two back out
    assert result.coherent_weight_L == pytest.approx(2.0, rel=1e-12)


def test_decoupled_array_is_silent():
    result = incoherent_spectrum(semi(1, k0a=math.pi), 2.0 * OMEGA0)
    assert result.flux == 0.0
    assert np.all(result.S_total == 0.0)
    assert result.coherent_weight_L == 2.0


def test_band_gap_shape():
    # ten emitters at quarter-wave spacing: transmitted fluorescence is
    # suppressed inside the band gap relative to the reflected density,
    # and the strongest sideband sits on the subradiant line
    cfg = infinite(10)
    result = incoherent_spectrum(cfg, 2.0 * OMEGA0)
    gap = np.abs(result.omega_grid - OMEGA0) < 1.0
    assert result.S_R[gap].mean() < 0.1 * result.S_L[gap].mean()

    sub = min(poles(cfg).poles, key=lambda z: -z.imag)
    width = -2.0 * sub.imag
    fine = np.linspace(sub.real - 3 * width, sub.real + 3 * width, 601)
    local = incoherent_spectrum(cfg, 2.0 * OMEGA0, fine)
    peak_at = fine[np.argmax(local.S_total)]
    assert abs(peak_at - sub.real) < 3.0 * width


def test_coherent_weights_are_scattering_probabilities():
    cfg = infinite(2)
    E = 2.0 * (OMEGA0 + 0.7)
    amps = scattering_amplitudes(cfg)
    result = incoherent_spectrum(cfg, E, np.array([OMEGA0]))
    assert result.coherent_weight_R == pytest.approx(
        2.0 * abs(amps.t(E / 2.0)) ** 2, rel=1e-12
    )
    assert result.coherent_weight_L == pytest.approx(
        2.0 * abs(amps.r(E / 2.0)) ** 2, rel=1e-12
    )


def test_default_omega_grid():
    grid = default_omega_grid(2.0 * OMEGA0)
    assert len(grid) == 2001
    assert grid[0] == pytest.approx(OMEGA0 - 6.0)
    assert grid[-1] == pytest.approx(OMEGA0 + 6.0)


@settings(max_examples=12, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=3),
    delta=st.floats(min_value=-2.0, max_value=2.0),
)
def test_spectrum_properties_hold_for_any_drive(n, delta):
    cfg = infinite(n, k0L=0.9)
    E = 2.0 * (OMEGA0 + delta)
    x = np.linspace(-3.0, 3.0, 201)
    result = incoherent_spectrum(cfg, E, E / 2.0 + x)
    total = result.S_total
    assert np.all(total >= 0.0)
    assert result.flux > 0.0
    assert np.max(np.abs(total - total[::-1])) < 1e-6 * max(np.max(total), 1e-30)


# ---------------------------------------------------------------------------
# far-field matrix elements
# ---------------------------------------------------------------------------


def _j_oracle(w_func, E, k, sigma, x0):
    """Defining momentum integral at finite detector position, with the
    energy-denominator pole subtracted and an i*epsilon Richardson ladder."""
    a, b = OMEGA0 - 1500.0, OMEGA0 + 1500.0

    def j_at(eps):
        p = E - k + 1j * eps
        wp = w_func(p) * np.exp(1j * sigma * p * x0)

        def reg(kp):
            return (w_func(kp) * np.exp(1j * sigma * kp * x0) - wp) / (p - kp)

        re, _ = scipy.integrate.quad(
            lambda kp: reg(kp).real, a, b, limit=2000,
            epsabs=1e-12, epsrel=1e-12, points=[E - k],
        )
        im, _ = scipy.integrate.quad(
            lambda kp: reg(kp).imag, a, b, limit=2000,
            epsabs=1e-12, epsrel=1e-12, points=[E - k],
        )
        return re + 1j * im + wp * np.log((p - a) / (p - b))

    ladder = [j_at(4e-3), j_at(2e-3), j_at(1e-3)]
    first = 2.0 * ladder[1] - ladder[0]
    second = 2.0 * ladder[2] - ladder[1]
    return (4.0 * second - first) / 3.0


@pytest.mark.parametrize(
    "pair,x0", [("RL", -1.0), ("RR", 1.0), ("LR", 1.5), ("LL", -2.0)]
)
def test_alpha_beta_matches_quadrature(pair, x0):
    cfg = infinite(2)
    E = 2.0 * (OMEGA0 + 0.2)
    k = OMEGA0 + 0.13
    basis = bst._channel_basis(cfg)
    alpha, beta = pair
    sigma = 1.0 if beta == "R" else -1.0
    j_val = _j_oracle(basis.w_funcs[beta][1], E, k, sigma, x0)
    assembled = basis.ebar[alpha][1](k) * (math.sqrt(2.0 * math.pi) / math.pi) * j_val
    value = alpha_beta(cfg, E, 1, pair, k, x0)
    assert abs(value - assembled) < 2e-6 * abs(value)


def test_alpha_beta_semi_matches_quadrature():
    cfg = semi(2, k0a=math.pi / 3)
    E = 2.0 * (OMEGA0 - 0.1)
    k = OMEGA0 + 0.21
    basis = bst._channel_basis(cfg)
    j_val = _j_oracle(basis.w_funcs["L"][0], E, k, -1.0, -1.0)
    assembled = basis.ebar["L"][0](k) * (math.sqrt(2.0 * math.pi) / math.pi) * j_val
    value = alpha_beta(cfg, E, 0, "LL", k, -1.0)
    assert abs(value - assembled) < 2e-6 * abs(value)


def test_alpha_beta_modulus_ignores_detector_position():
    cfg = infinite(2)
    E = 2.0 * (OMEGA0 + 0.2)
    k = OMEGA0 + 0.1
    near = alpha_beta(cfg, E, 0, "RL", k, x0=-5.0)
    far = alpha_beta(cfg, E, 0, "RL", k, x0=-500.0)
    assert abs(near) == pytest.approx(abs(far), rel=1e-12)


def test_alpha_beta_placement_and_channel_validation():
    cfg = infinite(2)
    E = 2.0 * OMEGA0
    with pytest.raises(DetectorPlacementError):
        alpha_beta(cfg, E, 0, "RR", OMEGA0, x0=0.0)  # inside the array
    with pytest.raises(DetectorPlacementError):
        alpha_beta(cfg, E, 0, "RL", OMEGA0, x0=5.0)  # wrong side for L
    with pytest.raises(ConfigError):
        alpha_beta(cfg, E, 0, "XY", OMEGA0, x0=5.0)
    with pytest.raises(ConfigError):
        alpha_beta(cfg, E, 5, "RR", OMEGA0, x0=5.0)
    scfg = semi(1, k0a=math.pi / 4)
    with pytest.raises(ConfigError):
        alpha_beta(scfg, E, 0, "RR", OMEGA0, x0=5.0)
    with pytest.raises(DetectorPlacementError):
        alpha_beta(scfg, E, 0, "LL", OMEGA0, x0=-0.001)  # between array and wall


# ---------------------------------------------------------------------------
# second-order correlation
# ---------------------------------------------------------------------------


def test_resonant_reflection_antibunches():
    # |1 - exp(-t/2)|^2: perfect antibunching with monotonic recovery
    t = np.linspace(0.0, 12.0, 401)
    trace = g2_trace(infinite(1), 2.0 * OMEGA0, DetectionChannel.REFLECTED, t)
    np.testing.assert_allclose(
        trace.values, np.abs(1.0 - np.exp(-t / 2.0)) ** 2, rtol=0, atol=1e-12
    )
    assert trace.values[0] < 1e-6


def test_semi_half_wave_bunching_anchor():
    t = np.linspace(0.0, 12.0, 401)
    trace = g2_trace(semi(1, k0a=math.pi / 2), 2.0 * OMEGA0, DetectionChannel.REFLECTED, t)
    np.testing.assert_allclose(
        trace.values, np.abs(1.0 - 4.0 * np.exp(-t)) ** 2, rtol=0, atol=1e-12
    )
    assert trace.values[0] == pytest.approx(9.0, rel=1e-12)


def test_semi_quarter_wave_bunching_anchor():
    t = np.linspace(0.0, 12.0, 401)
    trace = g2_trace(semi(1, k0a=math.pi / 4), 2.0 * OMEGA0, DetectionChannel.REFLECTED, t)
    expected = np.abs(1.0 + 2j * np.exp((0.5j - 0.5) * t)) ** 2
    np.testing.assert_allclose(trace.values, expected, rtol=0, atol=1e-12)
    assert trace.values[0] == pytest.approx(5.0, rel=1e-12)


def test_decoupled_array_has_poissonian_output():
    t = default_t_grid()
    trace = g2_trace(semi(1, k0a=math.pi), 2.0 * OMEGA0, DetectionChannel.REFLECTED, t)
    assert np.max(np.abs(trace.values - 1.0)) < 1e-8


def test_resonant_transmission_channel_rejected():
    with pytest.raises(IllConditionedChannelError):
        g2_trace(infinite(2), 2.0 * OMEGA0, DetectionChannel.TRANSMITTED)


def test_semi_has_no_transmitted_channel():
    with pytest.raises(ConfigError):
        g2_trace(semi(1, k0a=1.0), 2.0 * OMEGA0, DetectionChannel.TRANSMITTED)


def test_negative_delay_rejected():
    with pytest.raises(ConfigError):
        g2_trace(infinite(1), 2.0 * OMEGA0, DetectionChannel.REFLECTED, np.array([-1.0]))


def test_denominator_is_channel_amplitude_squared():
    cfg = infinite(2)
    E = 2.0 * (OMEGA0 + 0.8)
    amps = scattering_amplitudes(cfg)
    trace = g2_trace(cfg, E, DetectionChannel.TRANSMITTED, np.array([0.0]))
    assert trace.denominator_amplitude == pytest.approx(
        complex(amps.t(E / 2.0)) ** 2, rel=1e-12
    )


def test_g2_settles_to_one():
    # off the subradiant lines every correlation decays within tens of
    # lifetimes; near them the slow mode rings for thousands
    for cfg, E in ((infinite(1), 2.0 * (OMEGA0 + 0.5)), (infinite(3), 2.0 * (OMEGA0 + 0.9))):
        trace = g2_trace(cfg, E, DetectionChannel.TRANSMITTED, np.array([50.0]))
        assert abs(trace.values[0] - 1.0) < 1e-3
    slow = g2_trace(infinite(10), 2.0 * OMEGA0, DetectionChannel.REFLECTED, np.array([2000.0]))
    assert abs(slow.values[0] - 1.0) < 1e-3


def test_g2_integrals_match_quadrature():
    # residue closure vs direct line integral (window-extrapolated) for the
    # delay-dependent kernels, at zero and finite delay
    cfg = infinite(3, k0L=math.pi / 4)
    E = 2.0 * (OMEGA0 - 0.3)
    basis = bst._channel_basis(cfg)
    w_func = basis.w_funcs["L"][0]
    product = w_func * w_func.flipped(E)

    def window_value(hw, s):
        f = lambda kp: product(kp) * np.exp(1j * kp * s)
        re, _ = scipy.integrate.quad(
            lambda kp: f(kp).real, OMEGA0 - hw, OMEGA0 + hw,
            limit=3000, epsabs=1e-13, epsrel=1e-13,
        )
        im, _ = scipy.integrate.quad(
            lambda kp: f(kp).imag, OMEGA0 - hw, OMEGA0 + hw,
            limit=3000, epsabs=1e-13, epsrel=1e-13,
        )
        return re + 1j * im

    for s in (0.0, 0.4):
        widths = [1000.0, 2000.0, 4000.0]
        xs = [1.0 / h for h in widths]
        table = [window_value(h, s) for h in widths]
        for level in range(1, 3):
            table = [
                (xs[i] * table[i + 1] - xs[i + level] * table[i])
                / (xs[i] - xs[i + level])
                for i in range(3 - level)
            ]
        reference = residue_sum(product, "upper", exp_coeff=s)
        assert abs(table[0] - reference) < 2e-6 * abs(reference)


def test_subradiant_beat_frequency():
    # the late-time correlation oscillates at the detuning between the
    # drive and the narrowest collective line
    cfg = infinite(10)
    E = 2.0 * OMEGA0
    t = np.linspace(0.0, 2000.0, 2**14)
    trace = g2_trace(cfg, E, DetectionChannel.REFLECTED, t)
    sub = min(poles(cfg).poles, key=lambda z: -z.imag)
    values = trace.values - np.mean(trace.values[len(t) // 2 :])
    spectrum = np.abs(np.fft.rfft(values * np.hanning(len(t))))
    freqs = np.fft.rfftfreq(len(t), d=t[1] - t[0]) * 2.0 * math.pi
    dominant = freqs[1:][np.argmax(spectrum[1:])]
    assert abs(dominant - abs(E / 2.0 - sub.real)) < freqs[1]


def test_default_t_grid():
    t = default_t_grid()
    assert len(t) == 2000
    assert t[0] == 0.0
    assert t[-1] == pytest.approx(40.0)


# ---------------------------------------------------------------------------
# photon-number probabilities
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("half", [OMEGA0, OMEGA0 + 0.5, OMEGA0 - 1.7])
@pytest.mark.parametrize("power", [1e-3, 1e-4, 1e-5])
def test_probabilities_sum_to_one(half, power):
    t2, r2 = photon_probabilities_n1(infinite(1), 2.0 * half, power)
    assert t2 + r2 == pytest.approx(1.0, abs=1e-12)
    assert 0.0 <= t2 <= 1.0


def test_semi_reflects_everything():
    assert photon_probabilities_n1(semi(1, k0a=0.8), 2.0 * OMEGA0, 1e-3) == (0.0, 1.0)


def test_bound_state_correction_matches_flux():
    # the probability moved from reflection to transmission equals the
    # integrated transmitted fluorescence (per unit drive power, up to the
    # 2*pi^2 volume conversion)
    power = 1e-4
    for half in (OMEGA0, OMEGA0 + 0.5):
        E = 2.0 * half
        t2, _ = photon_probabilities_n1(infinite(1), E, power)
        amps = scattering_amplitudes(infinite(1))
        correction = (t2 - abs(amps.t(half)) ** 2) / (2.0 * math.pi**2 * power)
        flux_r = incoherent_spectrum(infinite(1), E, np.array([OMEGA0])).flux / 2.0
        assert correction == pytest.approx(flux_r / (2.0 * math.pi), rel=1e-8)


def test_probabilities_require_single_emitter():
    with pytest.raises(UnsupportedModelError):
        photon_probabilities_n1(infinite(2), 2.0 * OMEGA0, 1e-4)


def test_negative_power_rejected():
    with pytest.raises(ConfigError):
        photon_probabilities_n1(infinite(1), 2.0 * OMEGA0, -1.0)
