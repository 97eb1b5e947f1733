import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from dotdecay.bloch3 import (
    BlochDrive,
    BlochState,
    IntegrationError,
    TunnelRate,
    bloch_rhs,
    dopri54,
    field_from_intensity,
    gamma_p,
    integrate,
    power_law_onset,
    rabi,
    rabi_from_intensity,
    steady_state_pauli,
    steady_state_two_level,
    steady_state_weak_field,
    survival_under_drive,
)
from dotdecay.phys import UNITS

G12 = 2.55e5
GAMMA = 1.3e-5 / UNITS.hbar  # tunnelling rate of the reference resonance, 1/s
WEAK = 0.1 * UNITS.hbar * G12  # Rabi energy 0.1 hbar gamma12


def _steady(pauli, dephase=True):
    drive = BlochDrive(mode="cw", rabi_override=WEAK, gamma12=G12)
    t_end = 400.0 / G12
    series = integrate(BlochState(0.0, 1.0, 0.0), drive, None, (0.0, t_end), [t_end], tol=1e-10, pauli_blocking=pauli, tunnel_dephasing=dephase)
    return series


# ---------------------------------------------------------------- drive and rates


def test_field_and_rabi():
    assert field_from_intensity(10.0) == pytest.approx(8.68e3, rel=1e-3)
    assert field_from_intensity(0.0) == 0.0
    assert rabi_from_intensity(0.0124, 1.0) == pytest.approx(3.40e-8, rel=2e-3)
    # independent route: |E0| from the mean Poynting flux I = eps0 c E0^2 / 2
    e0 = math.sqrt(2 * 1.0e4 / (8.8541878128e-12 * 299792458.0))
    assert rabi_from_intensity(0.0124, 1.0) == pytest.approx(0.0124e-9 * e0, rel=1e-9)
    with pytest.raises(ValueError):
        field_from_intensity(-1.0)


def test_rabi_switch():
    drive = BlochDrive(mode="pulse", intensity=1.0, T1=1e-9, Delta=1e-10)
    assert rabi(drive, -1.0) == pytest.approx(drive.rabi0, rel=1e-9)
    assert rabi(drive, 1e-9) == pytest.approx(0.5 * drive.rabi0, rel=1e-14)
    assert rabi(drive, 1.0) < 1e-8 * drive.rabi0
    cw = BlochDrive(mode="cw", intensity=1.0)
    assert np.all(rabi(cw, np.linspace(0, 1e-6, 5)) == cw.rabi0)


def test_drive_validation():
    with pytest.raises(ValueError):
        BlochDrive(mode="burst")
    with pytest.raises(ValueError):
        BlochDrive(Delta=0.0)
    with pytest.raises(ValueError):
        TunnelRate(Gamma_star=0.0)


def test_gamma_p_disabled_is_constant():
    tr = TunnelRate(GAMMA, power_enabled=False)
    assert np.all(gamma_p(tr, np.logspace(-15, -3, 20)) == GAMMA)


def test_gamma_p_late_time_limit():
    tr = TunnelRate(GAMMA)
    t = 1e4 * tr.tau
    assert gamma_p(tr, t) * t == pytest.approx(2.0, rel=0.01)


def test_gamma_p_early_time():
    tr = TunnelRate(GAMMA)
    assert gamma_p(tr, tr.tau) == pytest.approx(GAMMA, rel=0.05)


def test_gamma_p_matches_numerical_derivative():
    tr = TunnelRate(GAMMA, prefactor=0.05)

    def log_mod(t):
        amp = math.exp(-0.5 * GAMMA * t) + complex(math.cos(math.pi / 4), -math.sin(math.pi / 4)) * tr.prefactor / (GAMMA * t + 1)
        return math.log(abs(amp) ** 2)

    for t in np.array([0.3, 3.0, 12.0, 40.0]) * tr.tau:
        h = 1e-5 * tr.tau
        fd = -(log_mod(t + h) - log_mod(t - h)) / (2 * h)
        assert gamma_p(tr, t) == pytest.approx(fd, rel=1e-6)


def test_prefactor_from_wave_numbers():
    tr = TunnelRate.from_wave_numbers(GAMMA, 1.55, 1.0, 1.16)
    assert tr.prefactor == pytest.approx(math.pi * math.sqrt(1.55) * 1.3e-5 / (2 * 1.16), rel=1e-12)


# ---------------------------------------------------------------- integrator


def test_dopri_dense_output():
    sol = dopri54(lambda t, y: np.array([y[1], -y[0]]), (0.0, 10.0), np.array([0.0, 1.0]), np.linspace(0, 10, 101), rtol=1e-10, atol=1e-12)
    assert np.max(np.abs(sol.y[:, 0] - np.sin(sol.t))) < 1e-8


def test_dopri_step_underflow():
    with pytest.raises(IntegrationError):
        dopri54(lambda t, y: y * y, (0.0, 2.0), np.array([1.0]), rtol=1e-8, atol=1e-10)


def test_integrate_validation():
    drive = BlochDrive()
    with pytest.raises(ValueError):
        integrate(BlochState(0.0, 1.0, 0.0), drive, None, (0.0, 1e-9), tol=1e-3)
    with pytest.raises(ValueError):
        integrate(BlochState(0.5, 0.0, 0.0), drive, None, (0.0, 1e-9))


def test_decoupled_decay():
    drive = BlochDrive(mode="cw", rabi_override=0.0, gamma12=0.0)
    tr = TunnelRate(GAMMA, power_enabled=False)
    t = np.linspace(0, 8 / GAMMA, 81)
    s = integrate(BlochState(1.0, 0.0, 0.0), drive, tr, (0.0, t[-1]), t, tol=1e-12)
    assert np.max(np.abs(s.s11 - np.exp(-GAMMA * t))) < 1e-8


def test_matches_scipy_reference():
    drive = BlochDrive(mode="pulse", intensity=1.0e6, T1=0.5e-9, Delta=0.5e-10)
    tr = TunnelRate(GAMMA)
    t = np.linspace(0, 2e-9, 41)
    ours = integrate(BlochState(0.0, 1.0, 0.0), drive, tr, (0.0, t[-1]), t, tol=1e-11)
    ref = solve_ivp(lambda tt, y: bloch_rhs(tt, y, drive, tr), (0.0, t[-1]), BlochState(0.0, 1.0, 0.0).to_array(), method="DOP853", t_eval=t, rtol=1e-12, atol=1e-14)
    assert np.max(np.abs(ours.s33 - ref.y[2])) < 1e-8
    assert np.max(np.abs(ours.s11 - ref.y[0])) < 1e-8


def test_tolerance_halving():
    drive = BlochDrive(mode="pulse", intensity=1.0e6, T1=1e-9, Delta=1e-10)
    tr = TunnelRate(GAMMA)
    t = np.array([0.0, 5e-9])
    a = integrate(BlochState(0.0, 1.0, 0.0), drive, tr, (0.0, 5e-9), t, tol=1e-8)
    b = integrate(BlochState(0.0, 1.0, 0.0), drive, tr, (0.0, 5e-9), t, tol=5e-9)
    assert abs(a.s33[-1] - b.s33[-1]) < 10 * 1e-8


# ---------------------------------------------------------------- steady state


def test_steady_state_closed_form():
    # the weak-field closed form at Omega = 0.1 hbar gamma12
    s = _steady(pauli=True)
    s11_printed, _ = steady_state_weak_field(WEAK, 0.0, G12)
    assert s11_printed == pytest.approx(0.01, rel=1e-12)
    assert s.s11[-1] == pytest.approx(s11_printed, abs=1e-4)


def test_steady_state_without_pauli_factor():
    s = _steady(pauli=False)
    assert s.s11[-1] == pytest.approx(steady_state_two_level(WEAK, 0.0, G12), abs=1e-8)
    assert s.s11[-1] == pytest.approx(1 / 102, abs=1e-8)


def test_steady_state_with_pauli_factor():
    s = _steady(pauli=True)
    s11 = steady_state_pauli(WEAK, G12)
    assert s.s11[-1] == pytest.approx(s11, abs=1e-8)
    assert s11 == pytest.approx(0.184742, abs=1e-6)
    assert s.s22[-1] == pytest.approx(1 - s11, abs=1e-8)


def test_steady_state_coherence():
    s = _steady(pauli=True)
    _, s12 = steady_state_weak_field(WEAK, 0.0, G12)
    assert abs(s.s12[-1] - s12) < 1e-4


def test_steady_coherence_exact_two_level():
    # d s12/dt = 0 without the Pauli factor: s12 = i (Omega/gamma) (s11 - s22) at zero detuning
    s = _steady(pauli=False)
    om = WEAK / UNITS.hbar
    assert s.s12[-1] == pytest.approx(1j * om / G12 * (s.s11[-1] - s.s22[-1]), abs=1e-8)


# ---------------------------------------------------------------- invariants


@pytest.fixture(scope="module")
def cw_runs():
    tr = TunnelRate(GAMMA)
    t = np.logspace(-12, -6, 301)
    out = {}
    for intensity in (1.0, 10.0):
        out[intensity] = survival_under_drive(BlochDrive(mode="cw", intensity=intensity), tr, t)
    return t, out


@pytest.fixture(scope="module")
def pulse_runs():
    tr = TunnelRate(GAMMA)
    t = np.logspace(-12, -6, 301)
    return t, {ns: survival_under_drive(BlochDrive(mode="pulse", intensity=1.0, T1=ns * 1e-9, Delta=1e-10), tr, t) for ns in (1, 10)}


def test_trace_and_positivity(cw_runs, pulse_runs):
    for series in list(cw_runs[1].values()) + list(pulse_runs[1].values()):
        assert series.trace_error <= 1e-6
        for pop in (series.s11, series.s22, series.s33):
            assert pop.min() >= -1e-8
            assert pop.max() <= 1 + 1e-6
        assert np.all(np.abs(series.s12) ** 2 <= series.s11 * series.s22 + 1e-6)


def test_coherence_equation_without_tunnel_damping_breaks_positivity():
    # the coherence equation with only radiative damping lets populations go negative under strong CW drive
    tr = TunnelRate(GAMMA)
    t = np.logspace(-12, -6, 301)
    s = survival_under_drive(BlochDrive(mode="cw", intensity=1.0), tr, t, tunnel_dephasing=False)
    assert s.trace_error <= 1e-6
    assert min(s.s11.min(), s.s22.min()) < -1e-3


def test_no_laser_no_decay():
    tr = TunnelRate(GAMMA)
    t = np.logspace(-12, -6, 50)
    s = survival_under_drive(BlochDrive(mode="cw", intensity=0.0), tr, t)
    assert np.all(s.survival == 1.0)


def test_intensity_ordering(cw_runs):
    t, runs = cw_runs
    lo, hi = runs[1.0], runs[10.0]
    i = np.searchsorted(t, 1e-9)
    assert hi.s11[i] > lo.s11[i]
    assert np.all(hi.survival[i:] < lo.survival[i:])


def test_pulse_onset_ordering(pulse_runs):
    t, runs = pulse_runs
    short = power_law_onset(t, runs[1].survival)
    long = power_law_onset(t, runs[10].survival)
    assert short < long


def test_exponential_decay_once_drive_is_off():
    drive = BlochDrive(mode="cw", rabi_override=0.0)
    tr = TunnelRate(GAMMA, power_enabled=False)
    t = np.linspace(1 / GAMMA, 5 / GAMMA, 41)
    s = integrate(BlochState(1.0, 0.0, 0.0), drive, tr, (0.0, t[-1]), t)
    slope = np.polyfit(t, np.log(s.survival), 1)[0]
    assert slope == pytest.approx(-GAMMA, rel=0.02)
