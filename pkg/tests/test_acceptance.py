"""Acceptance suite: one reported line per criterion, each at its stated tolerance."""

import math

import numpy as np

from dotdecay.alphadecay import AlphaSystem, gamow_exponent, penetration_exponent, transition_estimate, transition_rhs, default_delta_E
from dotdecay.bloch3 import BlochDrive, BlochState, TunnelRate, gamma_p, integrate, power_law_onset, survival_under_drive
from dotdecay.cli import main
from dotdecay.decayprofile import BarrierInputs, WavePacket, combined_profile, log_slope, solve_xi, transition_numbers
from dotdecay.phys import UNITS
from dotdecay.potentials import (
    AlphaNucleusPotential,
    HarmonicWell,
    PartiallyLinearPotential,
    RectangularDoubleBarrier,
    SmoothDoubleBarrier,
    barrier_top,
    evaluate,
    harmonic_fit,
)
from dotdecay.schrod1d import (
    bound_states,
    default_grid,
    dipole_element,
    e1_rate,
    fit_resonance,
    refine_scan,
    resonance_poles,
    resonance_wavefunction,
    transmission_scan,
)
from dotdecay.specfun import weber_D
from dotdecay.wkb import bohr_sommerfeld_levels, exact_to_modified_ratio

REF_INPUTS = BarrierInputs(v_max=2.2573, curvature=0.83, b=(math.sqrt(2) + 1) * 2.5)


def _dot():
    return SmoothDoubleBarrier(a=5.0, delta=4.0, v_w=10.0)


def test_criterion_1_harmonic_fit(criterion):
    c = criterion(1, "harmonic fit")
    p = _dot()
    hf = harmonic_fit(p)
    bt = barrier_top(p)
    c.within("omega0_eV", hf.omega0, 0.6025, 5e-4)
    c.within("offset_eV", hf.offset, -2.5935, 5e-4)
    c.within("V_max_eV", bt.v_max, 2.2573, 1e-3)
    c.within("abs_Vpp_eV_nm2", bt.curvature, 0.83, 0.01)
    c.within("n0", hf.n0, 3.86, 0.01)
    c.finish(time_limit=1.0)
    assert c.passed


def _fitted_resonances(p):
    poles = resonance_poles(p)
    bt = barrier_top(p)
    scan = refine_scan(p, poles, np.linspace(1e-3, bt.v_max, 400))
    return [(pole, fit_resonance(scan, (pole.energy - 3 * pole.width, pole.energy + 3 * pole.width))) for pole in poles]


def test_criterion_2_exact_spectrum(criterion):
    c = criterion(2, "exact spectrum")
    p = _dot()
    bound = bound_states(p, default_grid(p))
    for s, e in zip(bound, [-2.28, -1.67, -1.06, -0.472]):
        c.within(f"E{s.n}_eV", s.energy, e, 0.01)
    c.check("bound_count", len(bound), "4", len(bound) == 4)
    res = _fitted_resonances(p)
    targets = {4: (0.0909, 6.5e-12), 5: (0.640, 5.9e-8), 6: (1.16, 1.3e-5), 7: (1.64, 9.6e-4), 8: (2.06, 2.5e-2)}
    found = {pole.n: fit for pole, fit in res}
    c.check("resonance_levels", sorted(found), "[4..8]", sorted(found) == sorted(targets))
    for n, (e, g) in targets.items():
        fit = found.get(n)
        if fit is None:
            c.check(f"E{n}_eV", "missing", f"{e}", False)
            continue
        c.within(f"E{n}_eV", fit.E_r, e, 0.01)
        if n == 4:
            c.check(f"Gamma{n}_eV", fit.gamma, f"{g:g} within x2", 0.5 <= fit.gamma / g <= 2.0)
        else:
            c.within(f"Gamma{n}_eV", fit.gamma, g, 0.25, relative=True)
    c.finish(time_limit=120.0)
    assert c.passed


def test_criterion_3_matrix_element_and_rate(criterion):
    c = criterion(3, "matrix element and rate")
    p = _dot()
    grid = default_grid(p)
    bound = bound_states(p, grid)
    pole6 = next(q for q in resonance_poles(p) if q.n == 6)
    psi6 = resonance_wavefunction(p, pole6.energy, grid)
    d = dipole_element(bound[3].wavefunction, psi6, grid)
    gap = pole6.energy - bound[3].energy
    c.within("d36_nm", d, 0.0124, 0.10, relative=True)
    c.within("E6_minus_E3_eV", gap, 1.632, 0.02)
    c.within("rate_from_computed_d_per_s", e1_rate(d, gap), 2.55e5, 0.15, relative=True)
    c.within("rate_formula_at_tabulated_d_per_s", e1_rate(0.0124, 1.632), 2.55e5, 0.15, relative=True)
    c.finish()
    assert c.passed


def test_criterion_4_transition_numbers(criterion):
    c = criterion(4, "transition numbers")
    tn = transition_numbers(REF_INPUTS, 1.16, 1.3e-5, WavePacket(1e9), x_offset=1.0, omega0=0.6234)
    c.within("X", tn.X, 34.74, 0.01, relative=True)
    c.within("Y", tn.Y, 9.60, 0.1)
    c.within("xi", tn.xi, 15.02, 0.1)
    c.within("t_p_s", tn.t_p, 0.76e-9, 0.05, relative=True)
    c.within("remnant", tn.remnant, 3.0e-7, 0.10, relative=True)
    xi = solve_xi(7.72)
    c.within("xi_at_Y_7.72", xi, 12.8, 0.05)
    c.within("remnant_at_Y_7.72", math.exp(-xi), 2.7e-6, 0.05, relative=True)
    c.finish(time_limit=1.0)
    assert c.passed


def test_criterion_5_decay_profile(criterion):
    c = criterion(5, "decay profile")
    tn = transition_numbers(REF_INPUTS, 1.16, 1.3e-5, WavePacket(1e9), x_offset=1.0, omega0=0.6234)
    rate = tn.Gamma_star / UNITS.hbar
    late = tn.t_p * np.logspace(1, 3, 201)
    P, _, _ = combined_profile(tn, late)
    c.within("late_loglog_slope", log_slope(late, P, late[0], late[-1]), -2.0, 0.02)
    early = np.linspace(1.0, 5.0, 201) / rate
    P, _, _ = combined_profile(tn, early)
    c.within("exp_era_slope_over_Gamma", log_slope(early, P, early[0], early[-1], log_t=False) / rate, -1.0, 0.01, relative=True)
    _, e2, p2 = combined_profile(tn, [tn.t_p])
    c.within("crossing_ratio_at_t_p", float(e2[0] / p2[0]), 1.0, 0.01, relative=True)
    c.finish()
    assert c.passed


def test_criterion_6_weber(criterion):
    c = criterion(6, "Weber validation")
    lam = -0.5 - 4j
    h = 1e-3
    worst = 0.0
    for z in np.linspace(-8.0, 8.0, 81):
        w = weber_D(lam, z)
        d2 = [(weber_D(lam, z + s) - 2 * w + weber_D(lam, z - s)) / s**2 for s in (h, h / 2)]
        resid = (4 * d2[1] - d2[0]) / 3 + (lam + 0.5 - z * z / 4) * w
        worst = max(worst, abs(resid) / max(1.0, abs(w)))
    c.check("ode_residual_scaled", worst, "<= 1e-6", worst <= 1e-6)
    u = np.linspace(4.0 + 1e-9, 12.0, 161)
    dev = float(np.max(np.abs(np.abs(exact_to_modified_ratio(2.0, u)) - 1.0)))
    c.check("modulus_ratio_deviation", dev, "<= 0.05 for u > 2 a_u", dev <= 0.05)
    c.finish()
    assert c.passed


def test_criterion_7_bloch(criterion):
    c = criterion(7, "Bloch")
    g12 = 2.55e5
    gamma = 1.3e-5 / UNITS.hbar
    tr = TunnelRate(gamma)
    t = np.logspace(-12, -6, 301)
    runs = {ns: survival_under_drive(BlochDrive(mode="pulse", intensity=1.0, T1=ns * 1e-9, Delta=1e-10), tr, t) for ns in (1, 10)}
    cw = survival_under_drive(BlochDrive(mode="cw", intensity=10.0), tr, t)
    trace = max(s.trace_error for s in list(runs.values()) + [cw])
    c.check("trace_error", trace, "<= 1e-6", trace <= 1e-6)
    weak = 0.1 * UNITS.hbar * g12
    t_end = 400.0 / g12
    steady = integrate(BlochState(0.0, 1.0, 0.0), BlochDrive(mode="cw", rabi_override=weak, gamma12=g12), None, (0.0, t_end), [t_end], tol=1e-10)
    c.within("steady_s11", float(steady.s11[-1]), 0.01, 1e-4)
    c.within("Gamma_p_t_at_1e4_tau", float(gamma_p(tr, 1e4 * tr.tau) * 1e4 * tr.tau), 2.0, 0.01, relative=True)
    on1, on10 = power_law_onset(t, runs[1].survival), power_law_onset(t, runs[10].survival)
    c.check("onset_1ns_s", on1, f"< onset_10ns = {on10:.3g}", on1 < on10)
    c.finish()
    assert c.passed


def test_criterion_8_alpha(criterion):
    c = criterion(8, "alpha decay")
    po = AlphaSystem()
    c.within("c_norm", po.potential.c_norm, 0.2216, 1e-3)
    xi_01 = transition_estimate(po, r=0.1)
    xi_1 = transition_estimate(po, r=1.0)
    c.within("xi_shift_0.1m_to_1m", xi_1.xi - xi_01.xi, math.log(10.0), 1e-9)
    rhs_shift = transition_rhs(po, default_delta_E(), r=1.0) - transition_rhs(po, default_delta_E(), r=0.1)
    c.within("rhs_shift_0.1m_to_1m", rhs_shift, math.log(10.0), 1e-12)
    c.within("xi_at_0.1m", xi_01.xi, 40.56, 0.01)
    c.within("remnant_at_0.1m", xi_01.remnant, 2.4e-18, 0.05, relative=True)
    c.within("xi_at_1m", xi_1.xi, 42.98, 0.01)
    c.within("remnant_at_1m", xi_1.remnant, 2.16e-19, 0.01, relative=True)
    c.within("point_coulomb_vs_gamow", penetration_exponent(po, "point_coulomb"), gamow_exponent(po), 0.01, relative=True)
    c.finish(time_limit=10.0)
    assert c.passed


def test_criterion_9_universal(criterion, tmp_path):
    c = criterion(9, "universal properties")
    p = _dot()
    worst = 0.0
    for model, energies in ((p, np.linspace(0.01, 2.25, 400)), (RectangularDoubleBarrier(), np.linspace(0.01, 4.0, 200))):
        for method in ("parity", "outgoing"):
            worst = max(worst, max(abs(pt.T + pt.R - 1.0) for pt in transmission_scan(model, energies, method=method)))
    c.check("flux_defect", worst, "<= 1e-8", worst <= 1e-8)
    models = [
        (p, (-12.0, 12.0)),
        (HarmonicWell(0.3, -1.0), (-5.0, 5.0)),
        (PartiallyLinearPotential(a=5.0, v0=20.0, v1=20.0, slope=10.0, b=7.0), (-6.9, 6.9)),
        (AlphaNucleusPotential(A=212, Z=84), (2.0, 40.0)),
    ]
    rng = np.random.default_rng(3)
    worst = 0.0
    for model, span in models:
        xs = rng.uniform(*span, 60)
        cuts = np.asarray(model.breakpoints or (), dtype=float)
        if cuts.size:
            xs = xs[np.min(np.abs(xs[:, None] - cuts[None, :]), axis=1) > 1e-3]
        h = 1e-4 if isinstance(model, AlphaNucleusPotential) else 1e-5
        for order in (1, 2):
            exact = np.asarray(evaluate(model, xs, order))
            fd = (np.asarray(evaluate(model, xs + h, order - 1)) - np.asarray(evaluate(model, xs - h, order - 1))) / (2 * h)
            scale = np.maximum(np.abs(exact), 1e-3 * np.max(np.abs(exact)) + 1e-12)
            worst = max(worst, float(np.max(np.abs(exact - fd) / scale)))
    c.check("derivative_rel_error", worst, "<= 1e-6", worst <= 1e-6)
    ho = HarmonicWell(omega=0.35, v_min=-2.0)
    bs = bohr_sommerfeld_levels(ho, range(12))
    err = max(abs(r.energy - (ho.v_min + ho.omega * (r.n + 0.5))) for r in bs)
    c.check("bohr_sommerfeld_ho_eV", err, "<= 1e-8", err <= 1e-8)
    same = True
    for command in ("weber", "profile", "alpha"):
        for run in ("a", "b"):
            assert main(["--out", str(tmp_path / run / command), command]) == 0
        for f in sorted((tmp_path / "a" / command).glob("*.csv")):
            a = f.read_text().splitlines()[1:]
            b = (tmp_path / "b" / command / f.name).read_text().splitlines()[1:]
            same &= a == b
    c.check("rerun_identical_except_timestamp", same, "True", same)
    c.finish()
    assert c.passed
