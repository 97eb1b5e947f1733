"""Exponential and power-law decay amplitudes and the transition between them.

Energies in eV, lengths in nm, times in seconds.  Internally times and
lengths are converted to natural units (1/eV) with hbar and hbar*c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .phys import UNITS, EffectiveMass, hz_to_ev, mass_energy
from .potentials import BarrierTop, SmoothDoubleBarrier, barrier_top, oscillator_quantum

# Y = X + Y_OFFSET + ln(b/x_off * dnu/GHz * sqrt(10 eV/V_w * eV/E_*))
Y_OFFSET = -26.86
XI_BRANCH_MIN = 2.0 - 2.0 * math.log(2.0)


@dataclass(frozen=True)
class WavePacket:
    """Lorentzian excitation profile of a laser with linewidth ``delta_nu`` (Hz)."""

    delta_nu: float = 1e9
    E_center: float = 0.0

    def __post_init__(self):
        if not self.delta_nu > 0:
            raise ValueError("delta_nu must be positive")

    @property
    def delta_omega(self) -> float:
        """2 pi hbar delta_nu in eV."""
        return hz_to_ev(self.delta_nu)


@dataclass(frozen=True)
class BarrierInputs:
    """Barrier numbers supplied directly instead of from a potential model."""

    v_max: float
    curvature: float
    b: float
    v_w: float = 10.0
    mass: EffectiveMass = EffectiveMass()
    x_max: float = 0.0


@dataclass(frozen=True)
class DecayProfileParams:
    E_star: float
    Gamma_star: float
    omega0: float
    k_star: float
    x_offset: float
    delta_omega: float
    X: float
    Y: float
    xi: float
    t_p: float
    v_max: float
    curvature: float
    b: float
    mass: EffectiveMass = EffectiveMass()
    include_shift_phase: bool = False

    @property
    def remnant(self) -> float:
        return math.exp(-self.xi)

    @property
    def power_coefficient(self) -> float:
        """e^{-Y/2}, the power-law amplitude relative to the exponential one."""
        return math.exp(-0.5 * self.Y)

    @property
    def lifetime(self) -> float:
        """1/Gamma_* in seconds."""
        return UNITS.hbar / self.Gamma_star


@dataclass(frozen=True)
class SaddleData:
    E_s: float
    shift: float
    gaussian_width: float


@dataclass(frozen=True)
class MarkovStats:
    """Fits of a survival series against the two decay hypotheses.

    ``p_hat`` is the log-log slope magnitude against t - t_p and
    ``power_residual`` its rms residual; ``exp_defect`` is the rms residual of
    ln P against a straight line in t, zero for a pure exponential.
    """

    p_hat: float
    power_residual: float
    exp_rate: float
    exp_defect: float

    def exponential_consistent(self, tol: float = 1e-6) -> bool:
        return self.exp_defect <= tol

    def power_consistent(self, tol: float = 1e-3) -> bool:
        return self.power_residual <= tol


# ---------------------------------------------------------------- wave packet


def wavepacket_factor(wp: WavePacket, E, Gamma_star: float, E_star: float | None = None):
    """f(E) = (dw^2/4) / ((E - E_*)^2 + dw^2/4 + Gamma^2/4)."""
    e0 = wp.E_center if E_star is None else E_star
    q = 0.25 * wp.delta_omega**2
    out = q / ((np.asarray(E, dtype=float) - e0) ** 2 + q + 0.25 * Gamma_star**2)
    return float(out) if np.ndim(out) == 0 else out


def wavepacket_ratio(wp: WavePacket, E_s: float, E_star: float, Gamma_star: float) -> float:
    """|f(E_*)|^2 dE^2 / |f(E_s)|^2 = dw^2 (1 + 4 (E_s - E_*)^2 / (dw^2 + Gamma^2))^2."""
    dw2 = wp.delta_omega**2
    return dw2 * (1.0 + 4.0 * (E_s - E_star) ** 2 / (dw2 + Gamma_star**2)) ** 2


# ---------------------------------------------------------------- saddle


def saddle(bt: BarrierTop, x_offset: float, t: float, mass=EffectiveMass()) -> SaddleData:
    """Saddle of the barrier-wave phase at distance ``x_offset`` past the top.

    E_s = V_max - |V''| x^2/2 + (m/8)(x/t)^2; ``shift`` is the last,
    time-dependent term and the Gaussian width is (Phi''/2)^{-1/2} with
    Phi''/2 = 4 t^3 / (m x^2).
    """
    if not t > 0:
        raise ValueError("saddle needs t > 0")
    m = mass_energy(mass)
    xn = x_offset / UNITS.hbar_c
    tn = t / UNITS.hbar
    shift = m / 8.0 * (xn / tn) ** 2
    E_s = bt.v_max - 0.5 * bt.curvature * x_offset**2 + shift
    half_curv = 4.0 * tn**3 / (m * xn * xn)
    return SaddleData(E_s=E_s, shift=shift, gaussian_width=half_curv**-0.5)


def shift_bound(Gamma_star: float, x_offset: float, mass=EffectiveMass()) -> float:
    """(m/8) Gamma^2 x^2 in eV, the largest shift at times beyond 1/Gamma."""
    m = mass_energy(mass)
    return m / 8.0 * (Gamma_star * x_offset / UNITS.hbar_c) ** 2


# ---------------------------------------------------------------- transition numbers


def solve_xi(Y: float, max_iter: int = 30, tol: float = 1e-14) -> float:
    """Root of xi - 2 ln xi = Y on the branch xi > 2, by Newton's method."""
    if Y <= XI_BRANCH_MIN:
        raise ValueError(f"Y = {Y} has no root with xi > 2 (needs Y > 2 - 2 ln 2)")
    xi = Y + 2.0 * math.log(max(Y, 3.0))
    for _ in range(max_iter):
        step = (xi - 2.0 * math.log(xi) - Y) / (1.0 - 2.0 / xi)
        xi_new = xi - step
        if xi_new <= 2.0:
            xi_new = 0.5 * (xi + 2.0)
        if abs(xi_new - xi) <= tol * xi_new:
            return xi_new
        xi = xi_new
    raise RuntimeError(f"Newton iteration for xi did not converge at Y = {Y}")


def _barrier_numbers(source):
    if isinstance(source, BarrierInputs):
        return source.v_max, source.curvature, source.b, source.v_w, source.mass, None
    if isinstance(source, SmoothDoubleBarrier):
        bt = barrier_top(source)
        return bt.v_max, bt.curvature, source.b, source.v_w, source.mass, oscillator_quantum(source)
    raise TypeError("source must be a SmoothDoubleBarrier or BarrierInputs")


def x_parameter(v_max: float, curvature: float, E_star: float, mass=EffectiveMass()) -> float:
    """X = 8 pi sqrt(m/|V''|)(V_max - E_*)."""
    return 8.0 * math.pi * math.sqrt(mass_energy(mass) / curvature) * (v_max - E_star) / UNITS.hbar_c


def y_parameter(X: float, b: float, x_offset: float, delta_nu: float, v_w: float, E_star: float) -> float:
    return X + Y_OFFSET + math.log(b / x_offset * delta_nu / 1e9 * math.sqrt(10.0 / v_w / E_star))


def transition_numbers(
    source,
    E_star: float,
    Gamma_star: float,
    wp: WavePacket = WavePacket(),
    x_offset: float = 1.0,
    omega0: float | None = None,
    include_shift_phase: bool = False,
) -> DecayProfileParams:
    """X, Y, xi = Gamma t_p, t_p and the remnant for one resonance.

    ``x_offset`` is the observation distance past the barrier top in nm.
    """
    v_max, curv, b, v_w, mass, w0 = _barrier_numbers(source)
    if not E_star < v_max:
        raise ValueError("resonance must lie below the barrier top")
    if not (Gamma_star > 0 and x_offset > 0 and E_star > 0):
        raise ValueError("Gamma_star, x_offset and E_star must be positive")
    omega0 = omega0 if omega0 is not None else (w0 if w0 is not None else math.nan)
    X = x_parameter(v_max, curv, E_star, mass)
    Y = y_parameter(X, b, x_offset, wp.delta_nu, v_w, E_star)
    xi = solve_xi(Y)
    k_star = math.sqrt(2.0 * mass_energy(mass) * E_star) / UNITS.hbar_c
    return DecayProfileParams(
        E_star=E_star,
        Gamma_star=Gamma_star,
        omega0=omega0,
        k_star=k_star,
        x_offset=x_offset,
        delta_omega=wp.delta_omega,
        X=X,
        Y=Y,
        xi=xi,
        t_p=xi * UNITS.hbar / Gamma_star,
        v_max=v_max,
        curvature=curv,
        b=b,
        mass=mass,
        include_shift_phase=include_shift_phase,
    )


def with_Y(params: DecayProfileParams, Y: float) -> DecayProfileParams:
    """Copy of ``params`` with Y (and hence xi, t_p) replaced."""
    xi = solve_xi(Y)
    return replace(params, Y=Y, xi=xi, t_p=xi * UNITS.hbar / params.Gamma_star)


# ---------------------------------------------------------------- amplitudes


def _penetration_exponent(params: DecayProfileParams, E: float) -> float:
    return 4.0 * math.pi * math.sqrt(mass_energy(params.mass) / params.curvature) * (params.v_max - E) / UNITS.hbar_c


def exp_amplitude(params: DecayProfileParams, x: float, t, wp: WavePacket | None = None):
    """Retarded exponential amplitude in nm^{-1/2}.

    Psi = f(E_*) dE / sqrt(2 k_*) sqrt(Gamma/omega0) e^{i k_*(x-b) - i E_* t}
    e^{-Gamma (t - tau)/2} for t > tau = (x - b)/v_*, zero before the front.
    """
    t = np.asarray(t, dtype=float)
    wp = wp or WavePacket(delta_nu=params.delta_omega / hz_to_ev(1.0))
    f = wavepacket_factor(wp, params.E_star, params.Gamma_star, params.E_star)
    m = mass_energy(params.mass)
    v_star = math.sqrt(2.0 * params.E_star / m) * UNITS.speed_of_light * 1e9  # nm/s
    tau = max(x - params.b, 0.0) / v_star
    k_e = params.k_star * UNITS.hbar_c  # momentum as an energy
    mag = f * params.delta_omega / math.sqrt(2.0 * k_e) * math.sqrt(params.Gamma_star / params.omega0)
    mag /= math.sqrt(UNITS.hbar_c)
    tn = t / UNITS.hbar
    taun = tau / UNITS.hbar
    phase = params.k_star * (x - params.b) - params.E_star * tn
    amp = mag * np.exp(1j * phase - 0.5 * params.Gamma_star * (tn - taun))
    out = np.where(t >= tau, amp, 0.0 + 0.0j)
    return complex(out) if out.ndim == 0 else out


def power_amplitude(params: DecayProfileParams, x_offset: float, t, wp: WavePacket | None = None):
    """Saddle-point late-time amplitude in nm^{-1/2}.

    e^{-i pi/4} sqrt(pi/2) f(E_s) x^{1/2} / t exp[i W0(E_s) - 2 pi sqrt(m/|V''|)(V_max - E_s)],
    with E_s = E_* plus the time-dependent saddle shift (m/8)(x/t)^2.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("power amplitude needs t > 0")
    wp = wp or WavePacket(delta_nu=params.delta_omega / hz_to_ev(1.0))
    m = mass_energy(params.mass)
    tn = t / UNITS.hbar
    xn = x_offset / UNITS.hbar_c
    shift = m / 8.0 * (xn / tn) ** 2
    E_s = params.E_star + shift
    f = wavepacket_factor(wp, E_s, params.Gamma_star, params.E_star)
    # W0 = (u/2) sqrt(u^2 - a_u^2) - E_s t, with u^2 - a_u^2 = (m/4) sqrt(m/|V''|) (x/t)^2
    vpp_n = params.curvature * UNITS.hbar_c**2
    u = (m * vpp_n) ** 0.25 * xn
    gap = m / 4.0 * math.sqrt(m / vpp_n) * (xn / tn) ** 2
    w0 = 0.5 * u * np.sqrt(gap) - E_s * tn
    decay = 0.5 * np.array([_penetration_exponent(params, e) for e in np.atleast_1d(E_s)]).reshape(np.shape(E_s))
    mag = math.sqrt(0.5 * math.pi) * f * math.sqrt(xn) / tn / math.sqrt(UNITS.hbar_c)
    out = np.exp(-0.25j * math.pi) * mag * np.exp(1j * w0 - decay)
    return complex(out) if np.ndim(out) == 0 else out


def combined_profile(params: DecayProfileParams, t_grid, power_enabled: bool = True):
    """Survival P(t) = |e^{-Gamma t/2 - i E_* t} + e^{-i pi/4} e^{-i E_s t} e^{-Y/2} / (Gamma t)|^2.

    Normalised so the exponential term alone is 1 at t = 0.  The
    interference frequency E_* - E_s is zero unless the parameters enable
    it, in which case E_s carries the saddle shift at ``x_offset``.
    Returns (P, exponential part, power part), all as real arrays.
    """
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be positive and increasing")
    g = params.Gamma_star
    tn = t / UNITS.hbar
    exp_part = np.exp(-0.5 * g * tn)
    if params.include_shift_phase:
        m = mass_energy(params.mass)
        shift = m / 8.0 * (params.x_offset / UNITS.hbar_c / tn) ** 2
        rel_phase = shift * tn  # (E_s - E_*) t
    else:
        rel_phase = np.zeros_like(tn)
    power_part = params.power_coefficient / (g * tn) if power_enabled else np.zeros_like(tn)
    total = exp_part + np.exp(-0.25j * math.pi - 1j * rel_phase) * power_part
    return np.abs(total) ** 2, exp_part**2, power_part**2


def log_slope(t, y, t_lo: float, t_hi: float, log_t: bool = True) -> float:
    """Least-squares slope of ln y against ln t (or t) on [t_lo, t_hi]."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    sel = (t >= t_lo) & (t <= t_hi)
    if sel.sum() < 2:
        raise ValueError("need at least two points in the fit window")
    xs = np.log(t[sel]) if log_t else t[sel]
    return float(np.polyfit(xs, np.log(y[sel]), 1)[0])


def markov_ratio_test(P, t, t1: float, t2: float, t_p: float = 0.0) -> MarkovStats:
    """Compare a survival series on [t1, t2] with exponential and power laws.

    A power law satisfies ln(P(t1)/P(t2)) = -p ln((t1 - t_p)/(t2 - t_p)); an
    exponential keeps ln P linear in t.
    """
    P = np.asarray(P, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(P <= 0):
        raise ValueError("survival series must be positive")
    if not (t1 > t_p and t2 > t1):
        raise ValueError("need t_p < t1 < t2")
    sel = (t >= t1) & (t <= t2)
    if sel.sum() < 3:
        raise ValueError("need at least three points in the window")
    lp = np.log(P[sel])
    lx = np.log(t[sel] - t_p)
    cp = np.polyfit(lx, lp, 1)
    power_res = float(np.sqrt(np.mean((np.polyval(cp, lx) - lp) ** 2)))
    ts = t[sel]
    ce = np.polyfit(ts - ts[0], lp, 1)
    exp_res = float(np.sqrt(np.mean((np.polyval(ce, ts - ts[0]) - lp) ** 2)))
    return MarkovStats(p_hat=float(-cp[0]), power_residual=power_res, exp_rate=float(-ce[0]), exp_defect=exp_res)
