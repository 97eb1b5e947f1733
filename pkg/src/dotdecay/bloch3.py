"""Three-level optical Bloch model of a laser-fed resonance.

Level 1 is the resonance, 2 the filled bound state and 3 the continuum.  The
resonance leaks into 3 at the time-dependent rate Gamma_p(t), which carries
the late power-law era, and decays radiatively into 2 with a Pauli factor
(1 - s22).  Rates are in 1/s; Rabi frequencies and detunings are quoted as
energies in eV and divided by hbar internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .phys import UNITS


@dataclass(frozen=True)
class BlochState:
    s11: float
    s22: float
    s33: float
    s12: complex = 0j

    def to_array(self) -> np.ndarray:
        return np.array([self.s11, self.s22, self.s33, self.s12.real, self.s12.imag])

    @classmethod
    def from_array(cls, y) -> "BlochState":
        return cls(float(y[0]), float(y[1]), float(y[2]), complex(y[3], y[4]))

    @property
    def trace(self) -> float:
        return self.s11 + self.s22 + self.s33


@dataclass(frozen=True)
class BlochDrive:
    """Laser drive; ``dipole`` in nm (times e), ``intensity`` in W/cm^2."""

    mode: str = "cw"
    intensity: float = 1.0
    dipole: float = 0.0124
    detuning: float = 0.0
    gamma12: float = 2.55e5
    T1: float = 1e-9
    Delta: float = 1e-10
    rabi_override: float | None = None

    def __post_init__(self):
        if self.mode not in ("cw", "pulse"):
            raise ValueError("mode must be 'cw' or 'pulse'")
        if not self.Delta > 0:
            raise ValueError("Delta must be positive")
        if self.intensity < 0 or self.gamma12 < 0:
            raise ValueError("intensity and gamma12 must be non-negative")

    @property
    def rabi0(self) -> float:
        """Peak Rabi energy d * E0 in eV."""
        if self.rabi_override is not None:
            return self.rabi_override
        return rabi_from_intensity(self.dipole, self.intensity)

    def breakpoints(self) -> tuple[float, ...]:
        """Times where the drive changes quickly and the integrator restarts."""
        if self.mode == "cw":
            return ()
        return (self.T1 - 10.0 * self.Delta, self.T1 + 10.0 * self.Delta)


@dataclass(frozen=True)
class TunnelRate:
    """Decay rate into the continuum with an optional power-law tail.

    The survival amplitude is e^{-Gamma t/2} + e^{-i pi/4} c / (Gamma (t + tau)),
    tau = 1/Gamma.  ``prefactor`` c defaults to e^{-Y/2} of the transition
    analysis; ``from_wave_numbers`` builds it from the saddle-point
    combination pi sqrt(k_* x) Gamma / (2 E_*).
    """

    Gamma_star: float
    power_enabled: bool = True
    prefactor: float = 0.02105

    def __post_init__(self):
        if not self.Gamma_star > 0:
            raise ValueError("Gamma_star must be positive")

    @property
    def tau(self) -> float:
        return 1.0 / self.Gamma_star

    @classmethod
    def from_wave_numbers(cls, Gamma_star: float, k_star: float, x_offset: float, E_star: float, power_enabled: bool = True):
        """c = pi sqrt(k_* x) hbar Gamma / (2 E_*), with k in 1/nm, x in nm, E in eV."""
        c = math.pi * math.sqrt(k_star * x_offset) * UNITS.hbar * Gamma_star / (2.0 * E_star)
        return cls(Gamma_star=Gamma_star, power_enabled=power_enabled, prefactor=c)


def gamma_p(tr: TunnelRate, t):
    """-d/dt ln|A + e^{-i pi/4} B|^2 in closed form, A = e^{-Gamma t/2}, B = c/(Gamma t + 1)."""
    t = np.asarray(t, dtype=float)
    g = tr.Gamma_star
    if not tr.power_enabled:
        out = np.full_like(t, g)
        return float(out) if out.ndim == 0 else out
    a = np.exp(-0.5 * g * t)
    b = tr.prefactor / (g * t + 1.0)
    da = -0.5 * g * a
    db = -g * b / (g * t + 1.0)
    r2 = math.sqrt(2.0)
    num = 2.0 * a * da + 2.0 * b * db + r2 * (da * b + a * db)
    den = a * a + b * b + r2 * a * b
    out = -num / den
    return float(out) if out.ndim == 0 else out


def field_from_intensity(intensity: float) -> float:
    """Peak field E0 = sqrt(2 I / (eps0 c)) in V/m for I in W/cm^2."""
    if intensity < 0:
        raise ValueError("intensity must be non-negative")
    return math.sqrt(2.0 * intensity * 1e4 / (UNITS.epsilon0 * UNITS.speed_of_light))


def rabi_from_intensity(dipole_nm: float, intensity: float) -> float:
    """d E0 in eV for a dipole length in nm."""
    return dipole_nm * 1e-9 * field_from_intensity(intensity)


def rabi(drive: BlochDrive, t):
    """Omega(t) in eV: constant for CW, arctan switch-off at T1 for a pulse."""
    t = np.asarray(t, dtype=float)
    if drive.mode == "cw":
        out = np.full_like(t, drive.rabi0)
    else:
        out = 0.5 * drive.rabi0 * (1.0 - 2.0 / math.pi * np.arctan((t - drive.T1) / drive.Delta))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------- equations of motion


def bloch_rhs(t: float, y: np.ndarray, drive: BlochDrive, tr: TunnelRate, pauli_blocking: bool = True, tunnel_dephasing: bool = True) -> np.ndarray:
    """Right-hand side for y = (s11, s22, s33, Re s12, Im s12).

    With ``tunnel_dephasing`` the coherence also decays at Gamma_p/2, the
    Lindblad-consistent form that keeps populations non-negative.
    """
    s11, s22, _, re12, im12 = y
    om = rabi(drive, t) / UNITS.hbar
    dl = drive.detuning / UNITS.hbar
    g12 = drive.gamma12
    gp = gamma_p(tr, t) if tr is not None else 0.0
    block = (1.0 - s22) if pauli_blocking else 1.0
    radiative = g12 * s11 * block
    # i(Omega/2)(s12 - s21) = -Omega Im s12
    d11 = -om * im12 - gp * s11 - radiative
    d22 = om * im12 + radiative
    d33 = gp * s11
    # ds12 = i dl s12 + i(Omega/2)(s11 - s22) - (g12/2) s12 (1 - s22)
    half = 0.5 * g12 * block + (0.5 * gp if tunnel_dephasing else 0.0)
    dre = -dl * im12 - half * re12
    dim = dl * re12 + 0.5 * om * (s11 - s22) - half * im12
    return np.array([d11, d22, d33, dre, dim])


# ---------------------------------------------------------------- Dormand-Prince 5(4)

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# continuous extension: y(t0 + s h) = y0 + h K^T (P [s, s^2, s^3, s^4])
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)


class IntegrationError(RuntimeError):
    pass


@dataclass
class OdeSolution:
    t: np.ndarray
    y: np.ndarray  # shape (n_times, n_vars)
    n_steps: int = 0
    n_rejected: int = 0
    n_evals: int = 0
    step_sizes: list = field(default_factory=list, repr=False)


def _initial_step(f, t0, y0, f0, direction_end, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, abs(direction_end - t0))
    y1 = y0 + h0 * f0
    f1 = f(t0 + h0, y1)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, abs(direction_end - t0))


def dopri54(f, t_span, y0, t_eval=None, rtol: float = 1e-8, atol: float = 1e-10, breakpoints=(), max_growth: float = 5.0, max_steps: int = 2_000_000) -> OdeSolution:
    """Adaptive Dormand-Prince 5(4) with dense output at ``t_eval``.

    The step restarts from a fresh estimate at every breakpoint and never
    grows by more than ``max_growth`` per step.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError("t_span must be increasing")
    y = np.asarray(y0, dtype=float).copy()
    t_eval = np.array([t1]) if t_eval is None else np.asarray(t_eval, dtype=float)
    if np.any(np.diff(t_eval) < 0) or t_eval[0] < t0 or t_eval[-1] > t1:
        raise ValueError("t_eval must be sorted inside t_span")
    out = np.empty((len(t_eval), len(y)))
    idx = 0
    while idx < len(t_eval) and t_eval[idx] == t0:
        out[idx] = y
        idx += 1
    segments = [t0] + sorted(b for b in breakpoints if t0 < b < t1) + [t1]
    sol = OdeSolution(t=t_eval, y=out)
    t = t0
    k = np.empty((7, len(y)))
    for seg_end in segments[1:]:
        fy = f(t, y)
        sol.n_evals += 1
        h = _initial_step(f, t, y, fy, seg_end, rtol, atol)
        sol.n_evals += 1
        while t < seg_end:
            if sol.n_steps + sol.n_rejected > max_steps:
                raise IntegrationError(f"too many steps at t={t:.6g}")
            h = min(h, seg_end - t)
            if h < 1e-14 * max(abs(t), 1e-300) * 4:
                raise IntegrationError(f"step size underflow at t={t:.6g} (h={h:.3g}); problem too stiff")
            k[0] = fy
            for s in range(1, 7):
                k[s] = f(t + _C[s] * h, y + h * (np.dot(_A[s], k[:s])))
            sol.n_evals += 6
            y_new = y + h * (_B @ k)
            err = h * (_E @ k)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err_norm = math.sqrt(float(np.mean((err / scale) ** 2)))
            if err_norm <= 1.0:
                t_new = t + h if seg_end - (t + h) > 1e-15 * abs(seg_end) else seg_end
                while idx < len(t_eval) and t_eval[idx] <= t_new:
                    s = (t_eval[idx] - t) / h
                    powers = np.array([s, s * s, s**3, s**4])
                    out[idx] = y + h * (k.T @ (_P @ powers))
                    idx += 1
                sol.step_sizes.append(h)
                t, y, fy = t_new, y_new, k[6].copy()
                sol.n_steps += 1
                factor = max_growth if err_norm == 0 else min(max_growth, 0.9 * err_norm ** -0.2)
                h *= max(factor, 0.2)
            else:
                sol.n_rejected += 1
                h *= max(0.2, 0.9 * err_norm ** -0.2)
    while idx < len(t_eval):
        out[idx] = y
        idx += 1
    return sol


# ---------------------------------------------------------------- drivers


@dataclass(frozen=True)
class BlochSeries:
    t: np.ndarray
    s11: np.ndarray
    s22: np.ndarray
    s33: np.ndarray
    s12: np.ndarray

    @property
    def survival(self) -> np.ndarray:
        """Non-decay probability 1 - s33."""
        return 1.0 - self.s33

    @property
    def trace_error(self) -> float:
        return float(np.max(np.abs(self.s11 + self.s22 + self.s33 - 1.0)))

    def state(self, i: int) -> BlochState:
        return BlochState(self.s11[i], self.s22[i], self.s33[i], complex(self.s12[i]))


def integrate(state0: BlochState, drive: BlochDrive, tr: TunnelRate | None, t_span, t_eval=None, tol: float = 1e-9, pauli_blocking: bool = True, tunnel_dephasing: bool = True) -> BlochSeries:
    """Integrate the Bloch equations; ``tol`` is used as both relative and absolute tolerance."""
    if not 1e-12 <= tol <= 1e-6:
        raise ValueError("tol must lie in [1e-12, 1e-6]")
    if abs(state0.trace - 1.0) > 1e-6:
        raise ValueError("initial populations must sum to one")

    def rhs(t, y):
        return bloch_rhs(t, y, drive, tr, pauli_blocking, tunnel_dephasing)

    sol = dopri54(rhs, t_span, state0.to_array(), t_eval, rtol=tol, atol=tol, breakpoints=drive.breakpoints())
    y = sol.y
    return BlochSeries(t=sol.t, s11=y[:, 0], s22=y[:, 1], s33=y[:, 2], s12=y[:, 3] + 1j * y[:, 4])


def survival_under_drive(drive: BlochDrive, tr: TunnelRate, t_grid, tol: float = 1e-9, pauli_blocking: bool = True, tunnel_dephasing: bool = True) -> BlochSeries:
    """Start from the filled bound state and integrate over ``t_grid`` (s)."""
    t_grid = np.asarray(t_grid, dtype=float)
    start = BlochState(0.0, 1.0, 0.0, 0j)
    return integrate(start, drive, tr, (0.0, float(t_grid[-1])), t_grid, tol, pauli_blocking, tunnel_dephasing)


def steady_state_weak_field(rabi_ev: float, detuning: float, gamma12: float) -> tuple[float, complex]:
    """s11 = Omega^2 / (4 (dl^2 + g^2/4)) and s12 = -Omega s11 / (2 (dl - i g/2)), all in 1/s."""
    om = rabi_ev / UNITS.hbar
    dl = detuning / UNITS.hbar
    s11 = om * om / (4.0 * (dl * dl + 0.25 * gamma12**2))
    s12 = -om / (2.0 * (dl - 0.5j * gamma12)) * s11
    return s11, s12


def steady_state_two_level(rabi_ev: float, detuning: float, gamma12: float) -> float:
    """Exact upper-level population Omega^2/4 / (dl^2 + g^2/4 + Omega^2/2) without Pauli blocking."""
    om = rabi_ev / UNITS.hbar
    dl = detuning / UNITS.hbar
    return 0.25 * om * om / (dl * dl + 0.25 * gamma12**2 + 0.5 * om * om)


def steady_state_pauli(rabi_ev: float, gamma12: float) -> float:
    """Resonant s11 with the (1 - s22) factor: root of Omega^2 (1 - 2s) = g^2 s^3."""
    om = rabi_ev / UNITS.hbar
    r = (om / gamma12) ** 2
    roots = np.roots([1.0, 0.0, 2.0 * r, -r])
    real = [x.real for x in roots if abs(x.imag) < 1e-12 and 0 <= x.real <= 0.5]
    return float(real[0])


def depletion_rate(t, survival) -> np.ndarray:
    """-d ln(1 - s33)/dt by centred differences on the series."""
    t = np.asarray(t, dtype=float)
    return -np.gradient(np.log(np.asarray(survival, dtype=float)), t)


def power_law_onset(t, survival, fraction: float = 0.1) -> float:
    """First time after the peak depletion rate at which the rate falls below ``fraction`` of the peak."""
    rate = depletion_rate(t, survival)
    i = int(np.argmax(rate))
    below = np.flatnonzero(rate[i:] < fraction * rate[i])
    if below.size == 0:
        return math.inf
    return float(np.asarray(t)[i + below[0]])
