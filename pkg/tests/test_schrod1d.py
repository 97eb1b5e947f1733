import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dotdecay.phys import UNITS, mass_energy, wave_factor
from dotdecay.potentials import (
    HarmonicWell,
    PartiallyLinearPotential,
    RectangularDoubleBarrier,
    harmonic_fit,
)
from dotdecay.schrod1d import (
    FitError,
    Grid,
    TransmissionPoint,
    bound_states,
    breit_wigner,
    default_grid,
    dipole_element,
    e1_rate,
    fit_resonance,
    flux_width,
    interior_nodes,
    linear_ramp_late_time,
    linear_ramp_roots,
    linear_ramp_solution,
    ramp_zeta,
    refine_scan,
    resonance_wavefunction,
    transmission_scan,
)

RAMP = PartiallyLinearPotential(a=5.0, v0=20.0, v1=20.0, slope=10.0, b=7.0)


def _pole(poles, n):
    return next(p for p in poles if p.n == n)


def _fit_pole(dot, pole, points=41, span=6.0):
    scan = refine_scan(dot, [pole], [], points_per_peak=points, span=span)
    half = 0.5 * span * pole.width
    return fit_resonance(scan, (pole.energy - half, pole.energy + half))


# ---------------------------------------------------------------- bound states


def test_reference_bound_states(dot_bound):
    energies = [s.energy for s in dot_bound]
    assert energies == pytest.approx([-2.28, -1.67, -1.06, -0.472], abs=0.01)
    assert energies == pytest.approx([-2.284072, -1.670447, -1.068265, -0.480062], abs=2e-6)


def test_bound_state_normalisation_and_nodes(dot_bound, dot_grid):
    x = dot_grid.x
    for s in dot_bound:
        assert np.trapezoid(s.wavefunction**2, x) == pytest.approx(1.0, abs=1e-8)
        assert interior_nodes(s.wavefunction, dot_grid, x[-1]) == s.n
        assert s.parity == (1 if s.n % 2 == 0 else -1)


def test_infinite_square_well():
    # hard walls at the grid edges with a flat floor inside
    p = RectangularDoubleBarrier(a=1.0, b=2.0, v0=0.0, v1=1.0)
    grid = Grid(-1.0, 1.0, 4001)
    states = bound_states(p, grid, E_window=(0.0, 10.0))
    m = mass_energy(p.mass)
    exact = [(UNITS.hbar_c * math.pi * (n + 1)) ** 2 / (2 * m * 2.0**2) for n in range(len(states))]
    assert len(states) >= 3
    assert [s.energy for s in states] == pytest.approx(exact, rel=1e-8)


def test_harmonic_oscillator_levels():
    ho = HarmonicWell(omega=0.3, v_min=-3.0)
    states = bound_states(ho, default_grid(ho, h=ho.length() / 400), E_window=(None, 0.0))
    assert len(states) == 10
    assert [s.energy for s in states] == pytest.approx([ho.v_min + ho.omega * (n + 0.5) for n in range(10)], abs=1e-6)


def test_bound_states_grid_refinement(dot):
    g = default_grid(dot)
    coarse = bound_states(dot, g)
    fine = bound_states(dot, default_grid(dot, h=g.h / 2))
    assert np.max(np.abs([a.energy - b.energy for a, b in zip(coarse, fine)])) < 1e-7


def test_empty_window(dot, dot_grid):
    assert bound_states(dot, dot_grid, E_window=(-10.0, -9.0)) == []


def test_harmonic_discrepancy_grows(dot, dot_bound, dot_poles):
    hf = harmonic_fit(dot)
    exact = [s.energy for s in dot_bound] + [p.energy for p in dot_poles]
    gaps = [abs(e - float(hf.level(n))) for n, e in enumerate(exact)]
    assert all(b > a for a, b in zip(gaps[2:], gaps[3:]))


# ---------------------------------------------------------------- transmission


def test_free_propagation():
    p = RectangularDoubleBarrier(a=1.0, b=2.0, v0=-1e-300, v1=0.0)
    for method in ("parity", "outgoing"):
        for pt in transmission_scan(p, [0.05, 0.5, 2.0], method=method):
            assert pt.T == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("E", [0.3, 1.0, 1.7, 2.5, 4.0])
def test_single_square_barrier(E):
    v, half = 2.0, 1.0
    p = RectangularDoubleBarrier(a=0.5, b=half, v0=v - 1e-12, v1=v)
    m = mass_energy(p.mass)
    d = 2 * half
    if E < v:
        kap = math.sqrt(2 * m * (v - E)) / UNITS.hbar_c
        exact = 1 / (1 + v * v * math.sinh(kap * d) ** 2 / (4 * E * (v - E)))
    else:
        k2 = math.sqrt(2 * m * (E - v)) / UNITS.hbar_c
        exact = 1 / (1 + v * v * math.sin(k2 * d) ** 2 / (4 * E * (E - v)))
    (pt,) = transmission_scan(p, [E], method="outgoing")
    assert pt.T == pytest.approx(exact, rel=1e-8)


def test_transmission_rejects_nonpositive(dot):
    with pytest.raises(ValueError):
        transmission_scan(dot, [0.0, 1.0])


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.01, max_value=2.8))
def test_flux_conservation(E):
    p = RectangularDoubleBarrier()
    for method in ("parity", "outgoing"):
        (pt,) = transmission_scan(p, [E], method=method)
        assert 0.0 <= pt.T <= 1.0
        assert pt.T + pt.R == pytest.approx(1.0, abs=1e-8)


def test_flux_conservation_reference_scan(dot):
    pts = transmission_scan(dot, np.linspace(0.01, 2.25, 300))
    assert max(abs(p.T + p.R - 1) for p in pts) < 1e-8


def test_transmission_peaks_near_poles(dot, dot_poles):
    assert [p.energy for p in dot_poles] == pytest.approx([0.0909, 0.640, 1.16, 1.64, 2.06], abs=0.01)
    for pole in dot_poles[1:]:
        (pt,) = transmission_scan(dot, [pole.energy])
        assert pt.T > 0.99


def test_outgoing_matches_parity_method(dot):
    E = np.linspace(1.5, 2.2, 9)
    a = [p.T for p in transmission_scan(dot, E, method="parity")]
    b = [p.T for p in transmission_scan(dot, E, method="outgoing")]
    assert a == pytest.approx(b, rel=1e-6, abs=1e-12)


# ---------------------------------------------------------------- resonance fits


def test_synthetic_lorentzian_recovery():
    E = np.linspace(0.9, 1.1, 201)
    T = breit_wigner(E, 1.0123, 0.0173, 0.87)
    fit = fit_resonance([TransmissionPoint(e, t, 1 - t) for e, t in zip(E, T)], (0.9, 1.1))
    assert fit.E_r == pytest.approx(1.0123, abs=1e-10)
    assert fit.gamma == pytest.approx(0.0173, rel=1e-10)
    assert fit.peak_T == pytest.approx(0.87, rel=1e-10)


def test_fit_error_on_sparse_window():
    pts = [TransmissionPoint(1.0, 0.5, 0.5), TransmissionPoint(1.1, 0.4, 0.6)]
    with pytest.raises(FitError):
        fit_resonance(pts, (0.9, 1.2))


def test_fit_n6(dot, dot_poles):
    fit = _fit_pole(dot, _pole(dot_poles, 6))
    assert fit.E_r == pytest.approx(1.16, abs=0.01)
    assert fit.gamma == pytest.approx(1.3e-5, rel=0.25)


def test_fit_n4(dot, dot_poles):
    fit = _fit_pole(dot, _pole(dot_poles, 4))
    assert fit.E_r == pytest.approx(0.0909, abs=0.01)
    assert 0.5 < fit.gamma / 6.5e-12 < 2.0


@pytest.mark.parametrize("n", [5, 6, 7])
def test_fit_width_stable_under_resolution_doubling(dot, dot_poles, n):
    pole = _pole(dot_poles, n)
    a = _fit_pole(dot, pole, points=21)
    b = _fit_pole(dot, pole, points=41)
    assert b.gamma == pytest.approx(a.gamma, rel=0.05)
    assert b.gamma == pytest.approx(pole.width, rel=0.05)


def test_single_barrier_export(dot, dot_poles):
    fit = _fit_pole(dot, _pole(dot_poles, 6))
    assert fit.export(single_barrier=True)["gamma"] == pytest.approx(0.5 * fit.gamma)
    assert fit.export()["gamma"] == fit.gamma


# ---------------------------------------------------------------- wave functions


@pytest.fixture(scope="module")
def n6_wave(dot, dot_grid, dot_poles):
    pole = _pole(dot_poles, 6)
    return pole, resonance_wavefunction(dot, pole.energy, dot_grid)


def test_resonance_nodes_and_parity(dot, dot_grid, n6_wave):
    pole, psi = n6_wave
    from dotdecay.potentials import turning_points

    assert interior_nodes(psi, dot_grid, turning_points(dot, pole.energy)[-1]) == 6
    assert np.max(np.abs(np.abs(psi) - np.abs(psi[::-1]))) < 1e-6 * np.max(np.abs(psi))


def test_flux_width_within_factor_two(dot, dot_grid, n6_wave):
    pole, psi = n6_wave
    ratio = flux_width(dot, pole.energy, psi, dot_grid) / pole.width
    assert 0.5 < ratio < 2.0


def test_dipole_reference(dot, dot_grid, dot_bound, n6_wave):
    _, psi6 = n6_wave
    d = dipole_element(dot_bound[3].wavefunction, psi6, dot_grid)
    assert d == pytest.approx(0.0124, rel=0.1)


def test_dipole_shape_error(dot_grid):
    with pytest.raises(ValueError):
        dipole_element(np.ones(5), np.ones(5), dot_grid)


def test_oscillator_selection_rule():
    ho = HarmonicWell(omega=0.3, v_min=-3.0)
    grid = default_grid(ho)
    st_ = bound_states(ho, grid)
    for i in range(5):
        for j in range(5):
            d = dipole_element(st_[i].wavefunction, st_[j].wavefunction, grid)
            if abs(i - j) == 1:
                n = max(i, j)
                assert d == pytest.approx(ho.length() * math.sqrt(n / 2), rel=1e-6)
            else:
                assert d < 1e-10


def test_opposite_parity_elements_real(dot_bound, dot_grid):
    from dotdecay.schrod1d import dipole_integral

    val = dipole_integral(dot_bound[0].wavefunction.astype(complex) * np.exp(0.7j), dot_bound[1].wavefunction * np.exp(0.7j), dot_grid)
    assert abs(val.imag) < 1e-12 * abs(val)


def test_e1_rate():
    assert e1_rate(0.0124, 1.632) == pytest.approx(2.55e5, rel=0.15)
    assert e1_rate(0.0, 1.632) == 0.0
    assert e1_rate(0.02, 1.0) == pytest.approx(4 * e1_rate(0.01, 1.0), rel=1e-12)
    with pytest.raises(ValueError):
        e1_rate(-1.0, 1.0)


# ---------------------------------------------------------------- linear ramp


@pytest.mark.parametrize("E", [3.0, 10.0, 18.0])
def test_ramp_flux_constant(E):
    sol = linear_ramp_solution(RAMP, E)
    f = sol.flux()
    assert np.max(np.abs(f - f[0])) < 1e-10 * abs(f[0])


def test_ramp_roots_exist():
    roots = linear_ramp_roots(RAMP, np.linspace(0.05, 19.95, 800))
    assert roots and all(0 < r < RAMP.v1 for r in roots)


def test_ramp_zeta_sign():
    E = 12.0
    x = np.linspace(RAMP.a, RAMP.b, 101)
    allowed = E > RAMP.v1 - RAMP.slope * (x - RAMP.a)
    z = ramp_zeta(RAMP, E, x)
    assert np.all((z > 0) == allowed)


def test_ramp_late_time_scalings():
    t = np.logspace(-13, -12, 11)
    out = linear_ramp_late_time(RAMP, t_grid=t)
    lt = np.log(t)
    assert abs(np.polyfit(lt, np.log(out.probability), 1)[0]) < 0.05
    assert np.polyfit(lt, np.log(out.saddle_energy - RAMP.v1), 1)[0] == pytest.approx(2.0, abs=0.1)
    assert np.polyfit(lt, np.log(out.gaussian_width), 1)[0] == pytest.approx(0.5, abs=0.05)


def test_ramp_late_time_domain():
    with pytest.raises(ValueError):
        linear_ramp_late_time(RAMP, x=RAMP.b)
