"""Alpha decay through a Woods-Saxon plus smeared-Coulomb barrier.

Energies in MeV, lengths in fm, detector distances in m.  The barrier
penetration sets the exponential width and the late-time transition
estimate shows how deep the exponential era runs before a power law
could take over.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from .decayprofile import solve_xi
from .phys import UNITS
from .potentials import AlphaNucleusPotential, barrier_top, turning_points

FM_PER_M = 1e15
# detector distance and xi used to calibrate the packet width
CALIBRATION_DISTANCE = 0.1
CALIBRATION_XI = 40.56


@dataclass(frozen=True)
class AlphaSystem:
    A: int = 212
    Z: int = 84
    N: int | None = None
    Q: float = 8.78
    M_alpha: float = UNITS.alpha_mass_energy
    detection_r: float = 1.0

    def __post_init__(self):
        if self.N is None:
            object.__setattr__(self, "N", self.A - self.Z)
        if self.A != self.Z + self.N:
            raise ValueError("A must equal Z + N")
        if not self.Q > 0:
            raise ValueError("Q must be positive")
        if not self.detection_r > 0:
            raise ValueError("detection_r must be positive")

    @property
    def potential(self) -> AlphaNucleusPotential:
        return _potential(self.A, self.Z, self.N, self.M_alpha)

    @property
    def R(self) -> float:
        return self.potential.R

    @property
    def mr2(self) -> float:
        """M R^2 in MeV fm^2."""
        return self.M_alpha * self.R**2


@lru_cache(maxsize=256)
def _potential(A: int, Z: int, N: int, mass: float) -> AlphaNucleusPotential:
    return AlphaNucleusPotential(A=A, Z=Z, N=N, mass=mass)


@lru_cache(maxsize=256)
def _barrier(A: int, Z: int, N: int, mass: float):
    bt = barrier_top(_potential(A, Z, N, mass))
    return bt.x_max, bt.v_max


@dataclass(frozen=True)
class AlphaTransition:
    V_m: float
    xi: float
    remnant: float
    theta2: float
    r: float
    delta_E: float
    rhs: float
    calibrated: bool = False


def barrier_max(sys: AlphaSystem) -> tuple[float, float]:
    """(r_m, V_m) of the Coulomb barrier."""
    return _barrier(sys.A, sys.Z, sys.N, sys.M_alpha)


def point_coulomb(sys: AlphaSystem, r):
    """2 (Z - 2) e^2 / (4 pi eps0 r) in MeV."""
    return 2.0 * (sys.Z - 2) * UNITS.coulomb_mev_fm / np.asarray(r, dtype=float)


def _kappa_integral(V, E: float, r1: float, r2: float, mass: float) -> float:
    """Integral of sqrt(2M(V - E)) / hbar c between the turning points."""

    def integrand(r):
        return math.sqrt(max(2.0 * mass * (float(V(r)) - E), 0.0))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val = quad(integrand, r1, r2, epsabs=0.0, epsrel=1e-11, limit=400)[0]
    return val / UNITS.hbar_c


def penetration_exponent(sys: AlphaSystem, model: str = "woods_saxon") -> float:
    """2 times the imaginary-momentum integral between the turning points at E = Q.

    ``model="point_coulomb"`` replaces the potential by the bare Coulomb tail
    outside R, the textbook Gamow barrier.
    """
    if model == "woods_saxon":
        p = sys.potential
        r_m, v_m = barrier_max(sys)
        if sys.Q >= v_m:
            raise ValueError(f"Q = {sys.Q} MeV is not below the barrier maximum {v_m:.4f} MeV")
        pts = turning_points(p, sys.Q)
        inner = [r for r in pts if r < r_m]
        outer = [r for r in pts if r > r_m]
        if not inner or not outer:
            raise ValueError("could not bracket the barrier with turning points")
        return 2.0 * _kappa_integral(p.eval, sys.Q, inner[-1], outer[0], sys.M_alpha)
    if model == "point_coulomb":
        r_c = float(point_coulomb(sys, 1.0)) / sys.Q
        if r_c <= sys.R:
            raise ValueError("Q is above the Coulomb barrier at R")
        return 2.0 * _kappa_integral(lambda r: point_coulomb(sys, r), sys.Q, sys.R, r_c, sys.M_alpha)
    raise ValueError("model must be 'woods_saxon' or 'point_coulomb'")


def penetration(sys: AlphaSystem, model: str = "woods_saxon") -> float:
    """theta^{-2} = exp(-2 * integral of kappa)."""
    return math.exp(-penetration_exponent(sys, model))


def gamow_exponent(sys: AlphaSystem) -> float:
    """Closed-form point-Coulomb exponent 2 Z1 Z2 alpha sqrt(2 M/Q) (arccos sqrt(x) - sqrt(x(1-x))), x = R Q / B."""
    strength = 2.0 * (sys.Z - 2) * UNITS.fine_structure
    x = sys.R * sys.Q / float(point_coulomb(sys, 1.0))
    if not 0 < x < 1:
        raise ValueError("Q is above the Coulomb barrier at R")
    return 2.0 * strength * math.sqrt(2.0 * sys.M_alpha / sys.Q) * (math.acos(math.sqrt(x)) - math.sqrt(x * (1.0 - x)))


def width(sys: AlphaSystem, model: str = "woods_saxon") -> float:
    """Gamma = theta^{-2} / (4 M R^2) in MeV."""
    return penetration(sys, model) * UNITS.hbar_c**2 / (4.0 * sys.mr2)


def lifetime(sys: AlphaSystem, model: str = "woods_saxon") -> float:
    """hbar / Gamma in seconds."""
    return UNITS.hbar / (width(sys, model) * 1e6)


def barrier_velocity(sys: AlphaSystem) -> float:
    """v(V_m) = sqrt(2 V_m / M) in units of c."""
    return math.sqrt(2.0 * barrier_max(sys)[1] / sys.M_alpha)


def packet_ratio(Q: float, V_m: float, delta_E: float) -> float:
    """f(Q) / f(V_m) = 1 + 4 (V_m - Q)^2 / delta_E^2."""
    if not delta_E > 0:
        raise ValueError("delta_E must be positive")
    return 1.0 + 4.0 * (V_m - Q) ** 2 / delta_E**2


def distance_term(sys: AlphaSystem, r: float, mr2: float | None = None) -> float:
    """ln(pi r / (2 v(V_m) M R^2)) with r in m, made dimensionless by hbar c."""
    mr2 = sys.mr2 if mr2 is None else mr2
    return math.log(math.pi * r * FM_PER_M * UNITS.hbar_c / (2.0 * barrier_velocity(sys) * mr2))


def transition_rhs(sys: AlphaSystem, delta_E: float, r: float | None = None, ratio: float | None = None, mr2: float | None = None) -> float:
    """Right-hand side of xi - 2 ln xi = ln(pi r/(2 v M R^2)) + 2 ln(f(Q)/f(V_m))."""
    r = sys.detection_r if r is None else r
    if not r > 0:
        raise ValueError("r must be positive")
    if ratio is None:
        ratio = packet_ratio(sys.Q, barrier_max(sys)[1], delta_E)
    return distance_term(sys, r, mr2) + 2.0 * math.log(ratio)


def calibrate_delta_E(sys: AlphaSystem, xi_target: float = CALIBRATION_XI, r: float = CALIBRATION_DISTANCE) -> float:
    """Packet width (MeV) for which the transition estimate gives ``xi_target`` at distance ``r``."""
    need = xi_target - 2.0 * math.log(xi_target) - distance_term(sys, r)
    if need <= 0:
        raise ValueError("target xi is reachable without any packet suppression")
    ratio = math.exp(0.5 * need)
    return 2.0 * (barrier_max(sys)[1] - sys.Q) / math.sqrt(ratio - 1.0)


@lru_cache(maxsize=1)
def default_delta_E() -> float:
    """Calibrated packet width for the A = 212 reference system."""
    return calibrate_delta_E(AlphaSystem())


def transition_estimate(sys: AlphaSystem, delta_E: float | None = None, r: float | None = None, ratio: float | None = None) -> AlphaTransition:
    """Solve for xi = Gamma T on the xi > 2 branch."""
    calibrated = delta_E is None
    delta_E = default_delta_E() if calibrated else delta_E
    r = sys.detection_r if r is None else r
    rhs = transition_rhs(sys, delta_E, r, ratio)
    xi = solve_xi(rhs)
    return AlphaTransition(
        V_m=barrier_max(sys)[1],
        xi=xi,
        remnant=math.exp(-xi),
        theta2=1.0 / penetration(sys),
        r=r,
        delta_E=delta_E,
        rhs=rhs,
        calibrated=calibrated,
    )


def stable_charge(A: int) -> int:
    """Charge on the beta-stability line, Z = A / (1.98 + 0.0155 A^{2/3})."""
    return int(round(A / (1.98 + 0.0155 * A ** (2.0 / 3.0))))


@dataclass(frozen=True)
class MassScanRow:
    A: int
    Z: int
    R: float
    mr2_term: float
    xi_mr2: float
    V_m: float
    xi_full: float


def mass_number_scan(A_list, reference: AlphaSystem = AlphaSystem(), delta_E: float | None = None, r: float | None = None) -> tuple[list[MassScanRow], float, float]:
    """xi(A) two ways.

    ``xi_mr2`` varies only M R^2 (R = r0 A^{1/3}) with every other term held
    at the reference system; ``xi_full`` rebuilds the barrier for Z on the
    stability line at the reference Q.  Returns the rows plus the slopes
    d(rhs)/d ln A and d xi_mr2 / d ln A from a straight-line fit.
    """
    A_list = [int(a) for a in A_list]
    if not A_list:
        raise ValueError("A_list must be nonempty")
    delta_E = default_delta_E() if delta_E is None else delta_E
    r = reference.detection_r if r is None else r
    r0 = reference.potential.r0
    fixed = transition_rhs(reference, delta_E, r) - distance_term(reference, r)
    rows = []
    for A in A_list:
        if A == reference.A:
            Z = reference.Z
        else:
            Z = stable_charge(A)
        R = r0 * A ** (1.0 / 3.0)
        mr2 = reference.M_alpha * R * R
        term = distance_term(reference, r, mr2)
        xi_mr2 = solve_xi(term + fixed)
        sys = AlphaSystem(A=A, Z=Z, Q=reference.Q, M_alpha=reference.M_alpha, detection_r=r)
        v_m = barrier_max(sys)[1]
        xi_full = solve_xi(transition_rhs(sys, delta_E, r))
        rows.append(MassScanRow(A, Z, R, term, xi_mr2, v_m, xi_full))
    if len(rows) > 1:
        lnA = np.log([row.A for row in rows])
        term_slope = float(np.polyfit(lnA, [row.mr2_term for row in rows], 1)[0])
        xi_slope = float(np.polyfit(lnA, [row.xi_mr2 for row in rows], 1)[0])
    else:
        term_slope = -2.0 / 3.0
        xi_slope = term_slope / (1.0 - 2.0 / rows[0].xi_mr2)
    return rows, term_slope, xi_slope


def potential_components(sys: AlphaSystem, r_grid) -> np.ndarray:
    """Columns r, Woods-Saxon, Coulomb, total (MeV)."""
    p = sys.potential
    r = np.asarray(r_grid, dtype=float)
    ws = np.asarray(p.woods_saxon(r), dtype=float)
    col = np.asarray(p.coulomb(r), dtype=float)
    return np.column_stack([r, ws, col, ws + col])
