"""Semiclassical tools: action integrals, levels, widths and barrier waves.

Everything here is in dot units (eV, nm) unless a model carries its own
mass in MeV, in which case lengths are fm.  Action integrals are returned
dimensionless (divided by hbar).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from .phys import UNITS, mass_energy, wave_factor
from .potentials import (
    BarrierTop,
    PotentialModel,
    barrier_top,
    oscillator_quantum,
    turning_points,
    well_minimum,
)
from .specfun import weber_D


@dataclass(frozen=True)
class ActionPair:
    """Well action L and barrier action log(theta) at one energy.

    ``log_theta`` is infinite when the energy lies below the continuum, so
    that no outer turning point exists.
    """

    L: float
    log_theta: float

    @property
    def theta(self) -> float:
        if self.log_theta > 700:
            return math.inf
        return math.exp(self.log_theta)

    @property
    def penetration(self) -> float:
        """theta^-2."""
        return math.exp(-2.0 * self.log_theta) if math.isfinite(self.log_theta) else 0.0


@dataclass(frozen=True)
class Resonance:
    n: int
    energy: float
    width: float
    parity: int
    source: str = "semiclassical"
    above_barrier: bool = False

    def __post_init__(self):
        if self.width < 0:
            raise ValueError("width must be non-negative")
        if self.parity not in (1, -1):
            raise ValueError("parity must be +1 or -1")
        if self.source not in ("semiclassical", "exact"):
            raise ValueError("source must be 'semiclassical' or 'exact'")


@dataclass(frozen=True)
class BarrierWaveParams:
    """Scaled barrier-top variables.

    ``length`` converts u back to physical distance: x - x_max = u * length.
    """

    a_u: float
    length: float

    def u_of(self, x, x_max):
        return (np.asarray(x, dtype=float) - x_max) / self.length


# ---------------------------------------------------------------- actions


def _sqrt_integral(p: PotentialModel, E: float, lo: float, hi: float, sign: float) -> float:
    """Integral of sqrt(K * sign * (E - V)) between two turning points.

    Each half is mapped by y = endpoint +- s^2, which turns the square-root
    endpoint behaviour into a smooth integrand.
    """
    K = wave_factor(p.mass)
    mid = 0.5 * (lo + hi)
    inner = [b for b in p.breakpoints if lo < b < hi]

    def integrand_left(s):
        y = lo + s * s
        return 2.0 * s * math.sqrt(max(K * sign * (E - float(p.eval(y))), 0.0))

    def integrand_right(s):
        y = hi - s * s
        return 2.0 * s * math.sqrt(max(K * sign * (E - float(p.eval(y))), 0.0))

    left_pts = [math.sqrt(b - lo) for b in inner if b < mid] or None
    right_pts = [math.sqrt(hi - b) for b in inner if b > mid] or None
    opts = dict(epsabs=1e-300, epsrel=1e-10, limit=400)
    with warnings.catch_warnings():
        # roundoff warnings appear only once the integral is converged to ~1e-15
        warnings.simplefilter("ignore", IntegrationWarning)
        total = quad(integrand_left, 0.0, math.sqrt(mid - lo), points=left_pts, **opts)[0]
        total += quad(integrand_right, 0.0, math.sqrt(hi - mid), points=right_pts, **opts)[0]
    return total


def actions(p: PotentialModel, E: float) -> ActionPair:
    """L = integral of k over the well and ln theta = integral of kappa over the right barrier.

    Two turning points mean a closed well with no outer barrier edge, and the
    barrier action is infinite.  Four turning points are the resonance case.
    """
    pts = turning_points(p, E)
    if len(pts) == 2:
        return ActionPair(L=_sqrt_integral(p, E, pts[0], pts[1], 1.0), log_theta=math.inf)
    if len(pts) != 4:
        raise ValueError(f"expected 2 or 4 turning points at E={E}, found {len(pts)}")
    L = _sqrt_integral(p, E, pts[1], pts[2], 1.0)
    log_theta = _sqrt_integral(p, E, pts[2], pts[3], -1.0) if pts[3] > pts[2] else 0.0
    return ActionPair(L=L, log_theta=log_theta)


def _well_action(p: PotentialModel, E: float) -> float:
    # a level pinched to the very bottom of the well has no resolvable turning points
    if len(turning_points(p, E)) < 2:
        return 0.0
    return actions(p, E).L


def action_derivative(p: PotentialModel, E: float, rel_step: float = 1e-6) -> float:
    """dL/dE by central differences (units 1/eV)."""
    h = rel_step * max(1.0, abs(E))
    return (actions(p, E + h).L - actions(p, E - h).L) / (2.0 * h)


# ---------------------------------------------------------------- levels and widths


def _continuum_threshold(p: PotentialModel) -> float | None:
    lo, hi = p.scan_range()
    edges = [float(p.eval(lo)), float(p.eval(hi))]
    xs = np.linspace(lo, hi, 4001)
    if max(edges) >= float(np.max(p.eval(xs))) - 1e-12:
        return None  # confining potential
    return max(edges)


def _level_ceiling(p: PotentialModel) -> float | None:
    if _continuum_threshold(p) is None:
        return None
    try:
        return barrier_top(p).v_max
    except ValueError:
        lo, hi = p.scan_range()
        return float(np.max(p.eval(np.linspace(lo, hi, 20001))))


def bohr_sommerfeld_levels(p: PotentialModel, n_range, width_method: str = "parabolic") -> list[Resonance]:
    """Solve L(E) = (n + 1/2) pi for each n.

    Levels below the continuum get zero width; levels between the continuum
    and the barrier top get ``width_semiclassical``.  Orders the well cannot
    hold below the barrier top are returned flagged ``above_barrier`` with
    energy set to the barrier top.
    """
    _, v_min = well_minimum(p)
    ceiling = _level_ceiling(p)
    threshold = _continuum_threshold(p)
    span = 1e-9 * max(1.0, abs(v_min))
    out = []
    for n in n_range:
        n = int(n)
        if n < 0:
            raise ValueError("level index must be non-negative")
        target = (n + 0.5) * math.pi
        lo = v_min + span
        if ceiling is None:
            hi = lo + 1.0
            while actions(p, hi).L < target:
                hi = lo + 2.0 * (hi - lo)
        else:
            hi = ceiling - 1e-9 * max(1.0, abs(ceiling))
            if actions(p, hi).L < target:
                out.append(Resonance(n, ceiling, 0.0, 1 if n % 2 == 0 else -1, above_barrier=True))
                continue
        E = brentq(lambda e: _well_action(p, e) - target, lo, hi, xtol=1e-12, rtol=1e-15)
        width = 0.0
        if threshold is not None and E > threshold:
            method = width_method
            if method == "parabolic":
                try:
                    barrier_top(p)
                except ValueError:
                    method = "quadrature"
            width = width_semiclassical(p, E, method=method)
        out.append(Resonance(n, E, width, 1 if n % 2 == 0 else -1))
    return out


def parabolic_exponent(bt: BarrierTop, E: float, mass) -> float:
    """4 pi sqrt(m/|V''|) (V_max - E): the width exponent in the parabolic-top form."""
    return 4.0 * math.pi * math.sqrt(mass_energy(mass) / bt.curvature) * (bt.v_max - E) / UNITS.hbar_c


def width_semiclassical(p: PotentialModel, E: float, method: str = "parabolic", omega=None) -> float:
    """Gamma = (omega/pi) * penetration.

    ``method="parabolic"`` uses exp(-4 pi sqrt(m/|V''|)(V_max - E)) from the
    barrier-top curvature; ``method="quadrature"`` uses theta^-2 from the
    barrier action integral.  ``omega`` defaults to the well oscillator
    quantum, or to the classical attempt energy pi / (dL/dE) when the well
    has no curvature.
    """
    if omega is None:
        try:
            omega = oscillator_quantum(p, well_minimum(p)[0])
        except ValueError:
            omega = math.pi / action_derivative(p, E)
    if method == "parabolic":
        bt = barrier_top(p)
        if E > bt.v_max:
            raise ValueError("energy above the barrier top")
        return omega / math.pi * math.exp(-parabolic_exponent(bt, E, p.mass))
    if method == "quadrature":
        return omega / math.pi * actions(p, E).penetration
    raise ValueError("method must be 'parabolic' or 'quadrature'")


def width_rectangular(p, E: float) -> float:
    """hbar^2 / (4 m b^2 theta^2) for the flat-barrier well."""
    pen = actions(p, E).penetration
    return UNITS.hbar_c**2 / (4.0 * mass_energy(p.mass) * p.b**2) * pen


# ---------------------------------------------------------------- connection formulas


def connection_matrix(theta: float, L: float, convention: str = "printed"):
    """Matrices relating well amplitudes (A, B) to outer amplitudes.

    Returns (M_FG, M_HJ) with (A, B) = M_FG (F, G) = M_HJ (H, J).  The
    ``printed`` convention puts -i on both off-diagonal entries; the
    ``unimodular`` convention uses +i and -i, which makes det M = 1 and
    preserves probability flux.
    """
    if theta < 0.5:
        raise ValueError("theta must be at least 1/2")
    plus = 2.0 * theta + 1.0 / (2.0 * theta)
    minus = 2.0 * theta - 1.0 / (2.0 * theta)
    upper = -1j if convention == "printed" else 1j
    if convention not in ("printed", "unimodular"):
        raise ValueError("convention must be 'printed' or 'unimodular'")
    m_fg = 0.5 * np.array([[plus, upper * minus], [-1j * minus, plus]], dtype=complex)
    ph = np.exp(1j * L)
    m_hj = 0.5 * np.array(
        [[plus * ph, upper * minus * ph], [-1j * minus / ph, plus / ph]], dtype=complex
    )
    return m_fg, m_hj


def resonance_residual(theta: float, L: float) -> complex:
    """(4 theta^2 + 1/(4 theta^2)) cos L - 2i sin L, zero at a complex resonance."""
    t2 = theta * theta
    return (4.0 * t2 + 1.0 / (4.0 * t2)) * math.cos(L) - 2j * math.sin(L)


def outgoing_amplitude_ratio(theta: float, L: float) -> complex:
    """F/J for the no-incoming-wave solution."""
    t2 = theta * theta
    plus, minus = 4.0 * t2 + 1.0 / (4.0 * t2), 4.0 * t2 - 1.0 / (4.0 * t2)
    return -1j * minus * math.cos(L) + 2.0 * minus / plus * math.sin(L)


# ---------------------------------------------------------------- barrier-top waves


def barrier_params(bt: BarrierTop, E: float, mass) -> BarrierWaveParams:
    """a_u and the length unit of u for a parabolic barrier top."""
    m = mass_energy(mass)
    a2 = 2.0 * math.sqrt(m / bt.curvature) * (bt.v_max - E) / UNITS.hbar_c
    if a2 < 0:
        raise ValueError("energy above the barrier top")
    length = math.sqrt(UNITS.hbar_c) / (m * bt.curvature) ** 0.25
    return BarrierWaveParams(a_u=math.sqrt(a2), length=length)


def log_phase_coefficient(a_u: float, convention: str = "asymptotic") -> float:
    """Coefficient c of c * ln u^2 in the modified semiclassical phase.

    The ``asymptotic`` value -a_u^2/4 matches the large-u phase of the exact
    parabolic-cylinder solution; ``printed`` is +a_u^2/2.
    """
    if convention == "asymptotic":
        return -0.25 * a_u * a_u
    if convention == "printed":
        return 0.5 * a_u * a_u
    raise ValueError("convention must be 'asymptotic' or 'printed'")


def modified_wave_scaled(a_u: float, u, ln_term: bool = True, convention: str = "asymptotic"):
    """Dimensionless modified WKB wave e^{-pi a^2}(u^2-a^2)^{-1/4} e^{i phase}."""
    u = np.asarray(u, dtype=float)
    q = u * u - a_u * a_u
    if np.any(q <= 0):
        raise ValueError("modified WKB form needs u^2 > a_u^2")
    phase = 0.5 * u * np.sqrt(q)
    if ln_term:
        phase = phase + log_phase_coefficient(a_u, convention) * np.log(u * u)
    out = math.exp(-math.pi * a_u * a_u) * q**-0.25 * np.exp(1j * phase)
    return complex(out) if out.ndim == 0 else out


def exact_wave_scaled(a_u: float, u):
    """Outgoing exact solution of psi'' + (u^2 - a^2) psi = 0, matched to the WKB form.

    psi = D_nu(sqrt(2) e^{-i pi/4} u) with nu = -1/2 - i a^2/2, rescaled by a
    constant so that its ratio to ``modified_wave_scaled`` tends to 1 as u
    grows.
    """
    a2 = a_u * a_u
    lam = -0.5 - 0.5j * a2
    z = math.sqrt(2.0) * np.exp(-0.25j * math.pi) * np.asarray(u, dtype=float)
    d = weber_D(lam, z)
    # large-u form: (sqrt2 u)^{-1/2} e^{-pi a^2/8} e^{i(u^2/2 - (a^2/4) ln u^2 - (a^2/4) ln 2 + pi/8)}
    # and (1/2) u sqrt(u^2 - a^2) -> u^2/2 - a^2/4
    const = 2.0 ** -0.25 * math.exp(-math.pi * a2 / 8.0)
    const *= np.exp(1j * (0.125 * math.pi - 0.25 * a2 * math.log(2.0) + 0.25 * a2))
    out = math.exp(-math.pi * a2) * d / const
    return complex(out) if np.ndim(out) == 0 else out


def barrier_wave_modified(bt: BarrierTop, E: float, x, mass, ln_term: bool = True, convention: str = "asymptotic"):
    """Modified WKB barrier wave at physical x (nm), in units of nm^{1/2}."""
    par = barrier_params(bt, E, mass)
    u = par.u_of(x, bt.x_max)
    return math.sqrt(par.length) * modified_wave_scaled(par.a_u, u, ln_term, convention)


def barrier_wave_exact(bt: BarrierTop, E: float, x, mass):
    """Exact parabolic-barrier outgoing wave with the same normalisation."""
    par = barrier_params(bt, E, mass)
    u = par.u_of(x, bt.x_max)
    return math.sqrt(par.length) * exact_wave_scaled(par.a_u, u)


def exact_to_modified_ratio(a_u: float, u, ln_term: bool = True, convention: str = "asymptotic"):
    """Complex ratio exact / modified WKB on the scaled coordinate."""
    return exact_wave_scaled(a_u, u) / modified_wave_scaled(a_u, u, ln_term, convention)
