"""Grid solver for the one-dimensional Schroedinger equation.

Numerov integration drives everything: Sturm node counting for bound states,
parity phase shifts (or an outgoing-wave integration) for transmission, and
complex-energy continuation for resonance poles.  The linear-ramp helpers
build the Airy solutions of a tilted barrier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, least_squares

from .phys import UNITS, mass_energy, time_to_natural, wave_factor
from .potentials import PartiallyLinearPotential, PotentialModel, barrier_top, turning_points
from .specfun import airy


class FitError(RuntimeError):
    """Breit-Wigner fit failed; ``residual`` holds the final cost."""

    def __init__(self, message: str, residual: float = math.nan):
        super().__init__(f"{message} (residual {residual:.3g})")
        self.residual = residual


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError("grid needs x_max > x_min")
        if self.n_points < 3:
            raise ValueError("grid needs at least 3 points")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @classmethod
    def around(cls, half_width: float, h: float) -> "Grid":
        n = int(math.ceil(half_width / h))
        return cls(-n * h, n * h, 2 * n + 1)


def default_grid(p: PotentialModel, h: float | None = None, e_max: float = 3.0) -> Grid:
    """Symmetric grid over the potential's scan range.

    The step resolves both the potential features (1/200 of the feature
    length) and the fastest local oscillation up to ``e_max``.
    """
    lo, hi = p.scan_range()
    if h is None:
        xs = np.linspace(lo, hi, 4001)
        k_max = math.sqrt(wave_factor(p.mass) * max(e_max - float(np.min(p.eval(xs))), 1e-6))
        h = min(p.feature_length() / 200.0, 0.05 / k_max)
    return Grid.around(max(abs(lo), abs(hi)), h)


@dataclass(frozen=True)
class BoundState:
    n: int
    energy: float
    wavefunction: np.ndarray = field(repr=False)
    parity: int
    grid: Grid = field(repr=False)


@dataclass(frozen=True)
class TransmissionPoint:
    E: float
    T: float
    R: float


@dataclass(frozen=True)
class ResonancePole:
    """Complex pole E_r - i Gamma/2 of the outgoing-wave problem."""

    n: int
    energy: float
    width: float
    parity: int


@dataclass(frozen=True)
class FittedResonance:
    E_r: float
    gamma: float
    peak_T: float
    residual: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("fitted width must be positive")

    def export(self, single_barrier: bool = False) -> dict:
        """Row for output tables.

        Transmission through both barriers gives the full width; a state
        leaking out through one barrier only decays at half that rate, which
        ``single_barrier=True`` applies.
        """
        factor = 0.5 if single_barrier else 1.0
        return {"E_r": self.E_r, "gamma": factor * self.gamma, "peak_T": self.peak_T}


# ---------------------------------------------------------------- Numerov core


def _sample(p: PotentialModel, x: np.ndarray) -> np.ndarray:
    """Left and right limits of the potential on grid points, shape (2, n).

    The rows differ only where a grid point sits on a jump of the potential.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(p.eval(x), dtype=float)
    lim = np.vstack([v, v])
    if p.breakpoints and x.size > 1:
        h = abs(x[1] - x[0])
        for bp in p.breakpoints:
            hit = np.abs(x - bp) < 1e-9 * h
            if hit.any():
                left, right = np.asarray(p.eval(np.array([bp - 1e-6 * h, bp + 1e-6 * h])), dtype=float)
                if x[1] < x[0]:
                    left, right = right, left
                lim[0, hit], lim[1, hit] = left, right
    return lim


def _reverse(lim: np.ndarray) -> np.ndarray:
    """Limits for the grid traversed backwards; left and right swap."""
    return lim[::-1, ::-1]


def _sinhc(s):
    s = np.asarray(s)
    small = np.abs(s) < 1e-6
    safe = np.where(small, 1.0, s)
    return np.where(small, 1.0 + s * s / 6.0, np.sinh(safe) / safe)


def _stencil(lim: np.ndarray, E, K: float, h: float):
    """Three-point coefficients with lo psi[i-1] + hi psi[i+1] = mid psi[i].

    Away from jumps these are the Numerov weights for psi'' = f psi with
    f = K (V - E).  At a jump the two sides are propagated with the exact
    flat-potential solutions, which keeps psi and psi' continuous without
    the first-order error of one-sided sampling.
    """
    E = np.atleast_1d(np.asarray(E))
    fl = K * (lim[0][:, None] - E[None, :])
    fr = K * (lim[1][:, None] - E[None, :])
    wl = 1.0 - h * h * fl / 12.0
    wr = 1.0 - h * h * fr / 12.0
    mid = 12.0 - 10.0 * wl
    lo = np.empty_like(wl)
    hi = np.empty_like(wl)
    lo[1:] = wr[:-1]
    lo[0] = wl[1] if len(wl) > 1 else 1.0
    hi[:-1] = wl[1:]
    hi[-1] = wr[-2] if len(wr) > 1 else 1.0
    jumps = np.flatnonzero(lim[0] != lim[1])
    if jumps.size:
        cplx = np.iscomplexobj(mid)
        sl = np.sqrt(fl[jumps] * h * h + 0j)
        sr = np.sqrt(fr[jumps] * h * h + 0j)
        dl, dr = 1.0 / _sinhc(sl), 1.0 / _sinhc(sr)
        vals = (dl, dr, np.cosh(sl) * dl + np.cosh(sr) * dr)
        if not cplx:
            vals = tuple(np.real(a) for a in vals)
        lo[jumps], hi[jumps], mid[jumps] = vals
    return lo, mid, hi


def _sturm_count(lim: np.ndarray, K: float, h: float, energies: np.ndarray) -> np.ndarray:
    """Number of eigenvalues below each energy for Dirichlet ends.

    Shoots from the left wall and counts sign changes up to and including
    the right wall, rescaling whenever values grow large.
    """
    lo, mid, hi = _stencil(lim, energies, K, h)
    prev = np.zeros(len(energies))
    cur = np.full(len(energies), 1e-30)
    count = np.zeros(len(energies), dtype=int)
    for i in range(1, lim.shape[1] - 1):
        nxt = (mid[i] * cur - lo[i] * prev) / hi[i]
        count += (nxt * cur < 0) | ((nxt == 0) & (cur != 0))
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e150
        if big.any():
            prev[big] *= 1e-150
            cur[big] *= 1e-150
    return count


def _shoot(lim: np.ndarray, K: float, h: float, E: float, first: float = 0.0, second: float = 1e-30):
    """Full Numerov solution from index 0 upward at one energy."""
    lo, mid, hi = (a[:, 0] for a in _stencil(lim, E, K, h))
    n = lim.shape[1]
    psi = np.empty(n)
    psi[0], psi[1] = first, second
    for i in range(1, n - 1):
        psi[i + 1] = (mid[i] * psi[i] - lo[i] * psi[i - 1]) / hi[i]
        if abs(psi[i + 1]) > 1e150:
            psi[: i + 2] *= 1e-150
    return psi


def _count_nodes(psi: np.ndarray) -> int:
    s = np.sign(psi[np.abs(psi) > 1e-300 * np.max(np.abs(psi))])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _dirichlet_levels(v: np.ndarray, K: float, h: float, e_lo: float, e_hi: float, tol: float):
    """Eigenvalues in [e_lo, e_hi] by vectorised multisection on the Sturm count."""
    n_lo, n_hi = _sturm_count(v, K, h, np.array([e_lo, e_hi]))
    indices = list(range(int(n_lo), int(n_hi)))
    if not indices:
        return []
    brackets = {n: [e_lo, e_hi] for n in indices}
    probes = 24
    while max(b[1] - b[0] for b in brackets.values()) > tol:
        grids = {n: np.linspace(b[0], b[1], probes + 2)[1:-1] for n, b in brackets.items()}
        energies = np.concatenate(list(grids.values()))
        counts = _sturm_count(v, K, h, energies)
        pos = 0
        for n, g in grids.items():
            cnt = counts[pos : pos + probes]
            pos += probes
            lo, hi = brackets[n]
            below = g[cnt <= n]
            above = g[cnt > n]
            if below.size:
                lo = max(lo, below.max())
            if above.size:
                hi = min(hi, above.min())
            brackets[n] = [lo, hi]
    return [(n, 0.5 * (b[0] + b[1])) for n, b in brackets.items()]


def _matched_wavefunction(lim: np.ndarray, K: float, h: float, E: float, x: np.ndarray) -> np.ndarray:
    """Two-sided Numerov solution joined at the rightmost classically allowed point."""
    n = lim.shape[1]
    allowed = np.flatnonzero(np.maximum(lim[0], lim[1]) < E)
    m = int(allowed[-1]) if allowed.size else n // 2
    m = min(max(m, 2), n - 3)
    left = _shoot(lim, K, h, E)
    right = _shoot(_reverse(lim), K, h, E)[::-1]
    # pick a joining index where neither side sits on a node
    for shift in range(0, 50):
        j = m - shift
        if abs(left[j]) > 1e-8 * np.max(np.abs(left[: m + 1])) and abs(right[j]) > 0:
            break
    psi = np.concatenate([left[: j + 1], right[j + 1 :] * (left[j] / right[j])])
    norm = math.sqrt(np.trapezoid(psi * psi, x))
    return psi / norm


# ---------------------------------------------------------------- bound states


def bound_states(p: PotentialModel, grid: Grid | None = None, E_window=(None, 0.0), tol: float = 1e-11) -> list[BoundState]:
    """Dirichlet-box eigenstates with energies inside ``E_window``.

    Energies come from bisection on the Sturm node count, so every state in
    the window is found exactly once; wave functions are matched from both
    ends and normalised to one.
    """
    grid = grid or default_grid(p)
    x = grid.x
    v = _sample(p, x)
    K = wave_factor(p.mass)
    e_lo = float(np.min(v)) if E_window[0] is None else float(E_window[0])
    e_hi = float(E_window[1])
    states = []
    for n, E in _dirichlet_levels(v, K, grid.h, e_lo, e_hi, tol):
        psi = _matched_wavefunction(v, K, grid.h, E, x)
        mid = len(x) // 2
        parity = 1 if abs(psi[::-1] @ psi) > 0 and (psi[::-1] @ psi) > 0 else -1
        if psi[np.argmax(np.abs(psi[: mid + 1]))] < 0:
            psi = -psi
        states.append(BoundState(n=n, energy=E, wavefunction=psi, parity=parity, grid=grid))
    return states


def box_levels(p: PotentialModel, x_cut: float, E_window, h: float | None = None) -> list[tuple[int, float]]:
    """Levels of the potential truncated by hard walls at |x| = x_cut."""
    h = h or default_grid(p).h
    grid = Grid.around(x_cut, h)
    v = _sample(p, grid.x)
    return _dirichlet_levels(v, wave_factor(p.mass), grid.h, E_window[0], E_window[1], 1e-10)


# ---------------------------------------------------------------- transmission


def _half_grid(p: PotentialModel, h: float):
    lo, hi = p.scan_range()
    n = int(math.ceil(max(abs(lo), abs(hi)) / h))
    x = np.arange(n + 1) * h
    return x, _sample(p, x)


def _discrete_q(w_end, h):
    """Wavenumber of the discrete plane waves solving Numerov in a flat region."""
    return np.arccos((12.0 - 10.0 * w_end) / (2.0 * w_end)) / h


def _end_weight(v_end: float, E, K: float, h: float):
    return 1.0 - h * h * K * (v_end - np.atleast_1d(np.asarray(E))) / 12.0


def _parity_amplitudes(lim: np.ndarray, K: float, h: float, E, parity: int):
    """Outgoing and incoming coefficients (alpha, beta) of the parity solution.

    psi = alpha e^{iqx} + beta e^{-iqx} on the last two grid points; E may be
    complex, in which case the continuation of beta is analytic in E.
    """
    E = np.atleast_1d(np.asarray(E))
    cplx = np.iscomplexobj(E)
    lo, mid, hi = _stencil(lim, E, K, h)
    dtype = complex if cplx else float
    if parity == 1:
        prev = np.ones(len(E), dtype=dtype)
        cur = mid[0] * prev / (2.0 * hi[0])
    else:
        prev = np.zeros(len(E), dtype=dtype)
        cur = np.full(len(E), h, dtype=dtype)
    scale = np.zeros(len(E))
    n = lim.shape[1] - 1
    for i in range(1, n):
        prev, cur = cur, (mid[i] * cur - lo[i] * prev) / hi[i]
        big = np.abs(cur) > 1e150
        if big.any():
            prev[big] *= 1e-150
            cur[big] *= 1e-150
            scale[big] += 150.0
    q = _discrete_q(_end_weight(lim[0, n], E, K, h), h)
    x0, x1 = (n - 1) * h, n * h
    denom = 2j * np.sin(q * h)
    alpha = (cur * np.exp(-1j * q * x0) - prev * np.exp(-1j * q * x1)) / denom
    beta = (prev * np.exp(1j * q * x1) - cur * np.exp(1j * q * x0)) / denom
    return alpha, beta, scale


def _transmission_parity(p, energies, h):
    x, lim = _half_grid(p, h)
    K = wave_factor(p.mass)
    ae, be, _ = _parity_amplitudes(lim, K, h, energies, 1)
    ao, bo, _ = _parity_amplitudes(lim, K, h, energies, -1)
    # e^{2i delta} = -alpha/beta for each parity; T = sin^2(delta_e - delta_o)
    z = (ae / be) * (bo / ao)
    z = z / np.abs(z)
    T = 0.5 * (1.0 - z.real)
    R = 0.5 * (1.0 + z.real)
    return T, R


def _transmission_outgoing(p, energies, h):
    """Integrate from the right edge with a pure outgoing discrete plane wave."""
    lo, hi = p.scan_range()
    n = int(math.ceil((hi - lo) / h))
    x = lo + np.arange(n + 1) * h
    lim = _sample(p, x)
    K = wave_factor(p.mass)
    E = np.atleast_1d(energies)
    lo_c, mid, hi_c = _stencil(lim, E, K, h)
    q_r = _discrete_q(_end_weight(lim[1, -1], E, K, h), h)
    q_l = _discrete_q(_end_weight(lim[0, 0], E, K, h), h)
    nxt = np.exp(1j * q_r * x[-1])
    cur = np.exp(1j * q_r * x[-2])
    for i in range(n - 1, 0, -1):
        nxt, cur = cur, (mid[i] * cur - hi_c[i] * nxt) / lo_c[i]
    p0, p1 = cur, nxt  # values at x[0], x[1]
    denom = 2j * np.sin(q_l * h)
    inc = (p1 * np.exp(-1j * q_l * x[0]) - p0 * np.exp(-1j * q_l * x[1])) / denom
    ref = (p0 * np.exp(1j * q_l * x[1]) - p1 * np.exp(1j * q_l * x[0])) / denom
    # discrete flux is proportional to sin(q h); the ratio carries the end asymmetry
    flux_r = np.sin(q_r * h)
    flux_l = np.sin(q_l * h)
    T = flux_r / (flux_l * np.abs(inc) ** 2)
    R = np.abs(ref) ** 2 / np.abs(inc) ** 2
    return T, R


def transmission_scan(p: PotentialModel, E_grid, method: str = "auto", h: float | None = None) -> list[TransmissionPoint]:
    """Transmission and reflection probabilities over an energy grid.

    ``parity`` combines the even and odd phase shifts of a symmetric
    potential (T = sin^2 of their difference); ``outgoing`` integrates from
    the right with a pure outgoing wave and decomposes the result at the
    left edge.  ``auto`` picks parity for symmetric models.
    """
    E = np.asarray(E_grid, dtype=float).ravel()
    if np.any(E <= 0):
        raise ValueError("transmission needs E > 0")
    if method == "auto":
        method = "parity" if p.symmetric else "outgoing"
    h = h or default_grid(p, e_max=max(3.0, float(E.max()))).h
    out_T = np.empty(len(E))
    out_R = np.empty(len(E))
    chunk = 256
    for s in range(0, len(E), chunk):
        part = E[s : s + chunk]
        if method == "parity":
            T, R = _transmission_parity(p, part, h)
        elif method == "outgoing":
            T, R = _transmission_outgoing(p, part, h)
        else:
            raise ValueError("method must be 'auto', 'parity' or 'outgoing'")
        out_T[s : s + chunk], out_R[s : s + chunk] = T, R
    return [TransmissionPoint(float(e), float(t), float(r)) for e, t, r in zip(E, out_T, out_R)]


# ---------------------------------------------------------------- resonances


def resonance_pole(p: PotentialModel, E_seed: float, parity: int, h: float | None = None, n: int = -1) -> ResonancePole:
    """Complex zero of the incoming amplitude of the parity solution, by secant.

    The incoming coefficient beta(E) is analytic, so its zero E_r - i Gamma/2
    is reached by complex secant steps from a real seed.
    """
    h = h or default_grid(p, e_max=max(3.0, E_seed)).h
    x, lim = _half_grid(p, h)
    K = wave_factor(p.mass)

    def beta(E):
        _, b, scale = _parity_amplitudes(lim, K, h, np.array([E], dtype=complex), parity)
        return complex(b[0]), float(scale[0])

    e0, e1 = complex(E_seed), complex(E_seed * (1.0 + 1e-7) + 1e-9)
    b0, s0 = beta(e0)
    b1, s1 = beta(e1)
    for _ in range(100):
        if s0 != s1:
            b0 *= 10.0 ** (s0 - s1)
        step = b1 * (e1 - e0) / (b1 - b0)
        e0, b0, s0 = e1, b1, s1
        e1 = e1 - step
        b1, s1 = beta(e1)
        if abs(step) < 1e-14 * max(1.0, abs(e1)):
            break
    else:
        raise RuntimeError(f"resonance pole search did not converge near {E_seed}")
    return ResonancePole(n=n, energy=e1.real, width=-2.0 * e1.imag, parity=parity)


def resonance_poles(p: PotentialModel, E_window=None, h: float | None = None) -> list[ResonancePole]:
    """Poles below the barrier top, seeded by box levels with walls at the barrier maxima."""
    bt = barrier_top(p) if not p.breakpoints else None
    x_cut = bt.x_max if bt is not None else max(p.breakpoints)
    v_top = bt.v_max if bt is not None else float(np.max(p.eval(np.linspace(*p.scan_range(), 20001))))
    lo, hi = (1e-6, v_top) if E_window is None else E_window
    poles = []
    for n, E in box_levels(p, x_cut, (lo, hi), h):
        parity = 1 if n % 2 == 0 else -1
        try:
            pole = resonance_pole(p, E, parity, h, n)
        except (RuntimeError, ZeroDivisionError, FloatingPointError):
            continue
        if pole.width > 0 and lo < pole.energy < v_top:
            poles.append(pole)
    return poles


def refine_scan(p: PotentialModel, poles, coarse, points_per_peak: int = 41, span: float = 6.0, h=None):
    """Coarse grid plus dense points within +-span*Gamma/2 of every pole, sorted by E."""
    extra = [pole.energy + 0.5 * pole.width * np.linspace(-span, span, points_per_peak) for pole in poles]
    grid = np.unique(np.concatenate([np.asarray(coarse, dtype=float)] + extra))
    grid = grid[grid > 0]
    return transmission_scan(p, grid, h=h)


def breit_wigner(E, E_r, gamma, T0=1.0):
    half = 0.5 * gamma
    return T0 * half * half / ((np.asarray(E) - E_r) ** 2 + half * half)


def fit_resonance(scan, window) -> FittedResonance:
    """Least-squares Breit-Wigner fit to the scan points inside ``window``."""
    E = np.array([pt.E for pt in scan if window[0] <= pt.E <= window[1]])
    T = np.array([pt.T for pt in scan if window[0] <= pt.E <= window[1]])
    if E.size < 4:
        raise FitError("too few points in window")
    i = int(np.argmax(T))
    T0 = T[i]
    above = np.flatnonzero(T >= 0.5 * T0)
    width0 = max(E[above.max()] - E[above.min()], (E[-1] - E[0]) / len(E))
    center, scale = E[i], width0

    def resid(par):
        e_r, log_g, t0 = par
        return breit_wigner((E - center) / scale, e_r, math.exp(log_g), t0) - T

    sol = least_squares(resid, x0=[0.0, 0.0, T0], method="lm", xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=4000)
    cost = float(np.sqrt(np.mean(sol.fun**2)))
    if not sol.success or not np.all(np.isfinite(sol.x)):
        raise FitError("Breit-Wigner fit did not converge", cost)
    e_r = center + sol.x[0] * scale
    gamma = math.exp(sol.x[1]) * scale
    if not window[0] <= e_r <= window[1]:
        raise FitError("fitted peak outside window", cost)
    return FittedResonance(E_r=float(e_r), gamma=float(gamma), peak_T=float(sol.x[2]), residual=cost)


# ---------------------------------------------------------------- wave functions and rates


def parity_solution(p: PotentialModel, E: float, parity: int, grid: Grid) -> np.ndarray:
    """Real parity solution on a symmetric grid, psi(0) = 1 or psi'(0) = 1."""
    if abs(grid.x_min + grid.x_max) > 1e-9 * grid.x_max or grid.n_points % 2 == 0:
        raise ValueError("parity solution needs a symmetric grid with a point at 0")
    half = grid.x[grid.n_points // 2 :]
    lim = _sample(p, half)
    K = wave_factor(p.mass)
    h = grid.h
    lo, mid, hi = (a[:, 0] for a in _stencil(lim, E, K, h))
    psi = np.empty(len(half))
    if parity == 1:
        psi[0] = 1.0
        psi[1] = mid[0] / (2.0 * hi[0])
    else:
        psi[0] = 0.0
        psi[1] = h
    for i in range(1, len(half) - 1):
        psi[i + 1] = (mid[i] * psi[i] - lo[i] * psi[i - 1]) / hi[i]
    return np.concatenate([parity * psi[:0:-1], psi])


def resonance_wavefunction(p: PotentialModel, E_r: float, grid: Grid, parity: int | None = None) -> np.ndarray:
    """Quasi-bound wave at E_r, normalised to one over |x| <= outer turning point."""
    x = grid.x
    pts = turning_points(p, E_r)
    b = pts[-1] if pts else grid.x_max
    inside = np.abs(x) <= b
    if parity is None:
        # the resonance parity is the one with the larger interior weight
        cands = [parity_solution(p, E_r, s, grid) for s in (1, -1)]
        ratios = [np.trapezoid(c[inside] ** 2, x[inside]) / max(np.max(np.abs(c[~inside])) ** 2, 1e-300) for c in cands]
        psi = cands[int(np.argmax(ratios))]
    else:
        psi = parity_solution(p, E_r, parity, grid)
    norm = math.sqrt(np.trapezoid(psi[inside] ** 2, x[inside]))
    return (psi / norm).astype(complex)


def interior_nodes(psi: np.ndarray, grid: Grid, limit: float) -> int:
    """Sign changes of Re psi within |x| <= limit."""
    x = grid.x
    sel = np.real(psi[np.abs(x) <= limit])
    return _count_nodes(sel)


def dipole_element(psi_i, psi_j, grid: Grid, x=None) -> float:
    """|<i|x|j>| by trapezoidal quadrature."""
    psi_i = np.asarray(psi_i)
    psi_j = np.asarray(psi_j)
    if psi_i.shape != psi_j.shape or psi_i.shape != (grid.n_points,):
        raise ValueError("wave functions must live on the same grid")
    x = grid.x if x is None else x
    return float(abs(np.trapezoid(np.conj(psi_i) * x * psi_j, x)))


def dipole_integral(psi_i, psi_j, grid: Grid) -> complex:
    """Signed <i|x|j> without the modulus."""
    x = grid.x
    return complex(np.trapezoid(np.conj(psi_i) * x * psi_j, x))


def e1_rate(d: float, omega: float) -> float:
    """Spontaneous dipole rate (4/3) alpha omega^3 d^2 / (hbar c)^2 in 1/s.

    ``d`` in nm and ``omega`` as an energy in eV.
    """
    if d < 0 or omega < 0:
        raise ValueError("dipole length and transition energy must be non-negative")
    gamma_ev = 4.0 / 3.0 * UNITS.fine_structure * omega**3 * (d / UNITS.hbar_c) ** 2
    return gamma_ev / UNITS.hbar


def flux_width(p: PotentialModel, E: float, psi: np.ndarray, grid: Grid) -> float:
    """Width implied by the outgoing flux of an interior-normalised wave.

    At the resonance energy the real solution is the real part of the
    decaying state, whose exterior is a pure outgoing wave of the same
    amplitude A.  Each side then carries flux hbar k A^2 / m, so
    Gamma = hbar * 2 hbar k A^2 / m.
    """
    x = grid.x
    lo, hi = p.scan_range()
    K = wave_factor(p.mass)
    k = math.sqrt(K * E)
    far = x >= 0.8 * hi
    amp = float(np.max(np.abs(psi[far])))
    return 2.0 * UNITS.hbar_c**2 * k * amp * amp / mass_energy(p.mass)


# ---------------------------------------------------------------- linear ramp


def ramp_scale(p: PartiallyLinearPotential) -> float:
    """beta = (2 m F / hbar^2)^{1/3} in 1/nm."""
    return (wave_factor(p.mass) * p.slope) ** (1.0 / 3.0)


def ramp_zeta(p: PartiallyLinearPotential, E: float, x):
    """zeta = beta (E - V1 + F (x - a)) / F, positive where the ramp is classically allowed."""
    return ramp_scale(p) * (E - p.v1 + p.slope * (np.asarray(x, dtype=float) - p.a)) / p.slope


@dataclass(frozen=True)
class RampSolution:
    """Outgoing Airy wave on the ramp and its match to the flat well."""

    E: float
    psi: np.ndarray
    dpsi: np.ndarray
    x: np.ndarray
    residual_even: complex
    residual_odd: complex

    def flux(self) -> np.ndarray:
        """Im(psi* psi') along the ramp; constant for an exact solution."""
        return np.imag(np.conj(self.psi) * self.dpsi)


def ramp_wave(p: PartiallyLinearPotential, E: float, x):
    """C(x) = Ai(-zeta) - i Bi(-zeta) and its x-derivative."""
    beta = ramp_scale(p)
    z = ramp_zeta(p, E, x)
    ai, bi, aip, bip = airy(-z)
    psi = ai - 1j * bi
    dpsi = -beta * (aip - 1j * bip)
    return psi, dpsi


def linear_ramp_residual(p: PartiallyLinearPotential, E: float, parity: int = 1) -> complex:
    """Interior log-derivative minus the ramp wave's log-derivative at x = a."""
    q = math.sqrt(wave_factor(p.mass) * (E + p.v0))
    inner = -q * math.tan(q * p.a) if parity == 1 else q / math.tan(q * p.a)
    psi, dpsi = ramp_wave(p, E, p.a)
    return inner - complex(dpsi / psi)


def linear_ramp_solution(p: PartiallyLinearPotential, E: float, n_points: int = 401) -> RampSolution:
    x = np.linspace(p.a, p.b, n_points)
    psi, dpsi = ramp_wave(p, E, x)
    return RampSolution(
        E=E,
        psi=psi,
        dpsi=dpsi,
        x=x,
        residual_even=linear_ramp_residual(p, E, 1),
        residual_odd=linear_ramp_residual(p, E, -1),
    )


def linear_ramp_roots(p: PartiallyLinearPotential, E_grid, parity: int = 1) -> list[float]:
    """Real energies where Re(residual) changes sign, excluding tan/cot poles."""
    E = np.asarray(E_grid, dtype=float)
    r = np.array([linear_ramp_residual(p, e, parity).real for e in E])
    roots = []
    for i in np.flatnonzero(np.sign(r[:-1]) != np.sign(r[1:])):
        e0, e1 = E[i], E[i + 1]
        root = brentq(lambda e: linear_ramp_residual(p, e, parity).real, e0, e1, xtol=1e-12)
        # a pole of tan flips sign through infinity; keep only genuine zeros
        scale = math.sqrt(wave_factor(p.mass) * (root + p.v0))
        if abs(linear_ramp_residual(p, root, parity).real) < 1e-6 * scale:
            roots.append(float(root))
    return roots


@dataclass(frozen=True)
class RampLateTime:
    t: np.ndarray
    probability: np.ndarray
    saddle_energy: np.ndarray
    gaussian_width: np.ndarray


def _ramp_phase_derivs(p: PartiallyLinearPotential, E, x: float):
    """(dPhi/dE + t, d2Phi/dE2) in natural units (1/eV, 1/eV^2) at position x."""
    m = mass_energy(p.mass)
    xn = x / UNITS.hbar_c
    Fn = p.slope * UNITS.hbar_c
    first = math.sqrt(2.0 * m) / Fn * np.sqrt(E - p.v1) + xn * np.sqrt(m / (2.0 * E))
    second = math.sqrt(2.0 * m) / (2.0 * Fn) / np.sqrt(E - p.v1) - 0.25 * math.sqrt(2.0 * m) * xn * E**-1.5
    return first, second


def linear_ramp_late_time(p: PartiallyLinearPotential, wavepacket=None, x: float | None = None, t_grid=None) -> RampLateTime:
    """Saddle-point probability |Psi(x, t)|^2 beyond the ramp.

    The saddle E_s solves sqrt(2m)/F sqrt(E - V1) + x sqrt(m/(2E)) = t, and
    |Psi|^2 = |f(E_s)|^2 (2 pi / |Phi''|) / k(E_s).  ``wavepacket`` is a
    callable weight f(E); the default is flat.  Times are in seconds.
    """
    if x is None:
        x = 2.0 * p.b
    if x <= p.b:
        raise ValueError("observation point must lie beyond the ramp")
    if t_grid is None:
        t_grid = np.logspace(-14, -12, 21)
    weight = wavepacket if wavepacket is not None else (lambda E: 1.0)
    K = wave_factor(p.mass)
    ts = np.asarray(t_grid, dtype=float)
    es, prob, width = [], [], []
    for t in ts:
        tn = float(time_to_natural(t))
        arrival = _ramp_phase_derivs(p, p.v1 * (1 + 1e-15) + 1e-15, x)[0]
        if tn <= arrival:
            raise ValueError("time before the first saddle appears")
        hi = p.v1 + 1.0
        while _ramp_phase_derivs(p, hi, x)[0] < tn:
            hi = p.v1 + 2.0 * (hi - p.v1)
        Es = brentq(lambda e: _ramp_phase_derivs(p, e, x)[0] - tn, p.v1 * (1 + 1e-15) + 1e-15, hi, xtol=1e-14, rtol=1e-14)
        curv = abs(_ramp_phase_derivs(p, Es, x)[1])
        k = math.sqrt(K * Es)
        es.append(Es)
        prob.append(abs(weight(Es)) ** 2 * 2.0 * math.pi / curv / k)
        width.append((0.5 * curv) ** -0.5)
    return RampLateTime(t=ts, probability=np.array(prob), saddle_energy=np.array(es), gaussian_width=np.array(width))
