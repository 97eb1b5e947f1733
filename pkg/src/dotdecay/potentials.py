"""Potential models with analytic derivatives, turning points and barrier tops.

Dot-sector models take x in nm and return eV; the nuclear model takes r in fm
and returns MeV.  Every model is an immutable dataclass exposing ``eval``,
``d1`` and ``d2`` on scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .phys import UNITS, EffectiveMass, mass_energy
from .specfun import polylog, polylog_neg_exp


class PotentialModel:
    """Common interface.  Subclasses set ``mass`` and implement eval/d1/d2."""

    symmetric: bool = True
    breakpoints: tuple = ()

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):  # pragma: no cover - abstract
        raise NotImplementedError

    def d1(self, x):  # pragma: no cover - abstract
        raise NotImplementedError

    def d2(self, x):  # pragma: no cover - abstract
        raise NotImplementedError

    def scan_range(self) -> tuple[float, float]:
        """Interval containing all structure of the potential."""
        raise NotImplementedError

    def scan_step(self) -> float:
        raise NotImplementedError

    def feature_length(self) -> float:
        """Smallest length over which the potential changes appreciably."""
        return self.scan_step() * 200.0


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


@dataclass(frozen=True)
class BarrierTop:
    """Location and curvature of the right-hand barrier maximum."""

    x_max: float
    v_max: float
    v_pp: float  # second derivative at x_max, negative

    @property
    def curvature(self) -> float:
        """|V''(x_max)|."""
        return abs(self.v_pp)


@dataclass(frozen=True)
class HarmonicFit:
    """Harmonic expansion V ~ -V_w (c0 - c2 x^2) about the well centre."""

    c0: float
    c2: float
    omega0: float
    n0: float
    offset: float  # -c0 * V_w, the harmonic well bottom

    def level(self, n):
        """Oscillator level energies omega0 (n + 1/2) + offset."""
        return self.omega0 * (np.asarray(n) + 0.5) + self.offset


# ---------------------------------------------------------------- dot models


@dataclass(frozen=True)
class SmoothDoubleBarrier(PotentialModel):
    """V(x) = -V_w (1 - (x^2 + a^2)/b^2) / (1 + exp((x^2 - a^2)/delta^2)).

    A smooth well of depth ~V_w flanked by two barriers near x = +-b.  The
    outer edge b defaults to the midpoint (1 + sqrt 2) a / 2 of the legal
    interval a < b < sqrt(2) a.
    """

    a: float = 5.0
    delta: float = 4.0
    v_w: float = 10.0
    b: float | None = None
    mass: EffectiveMass = field(default_factory=EffectiveMass)

    def __post_init__(self):
        if self.b is None:
            object.__setattr__(self, "b", (math.sqrt(2.0) + 1.0) * self.a / 2.0)
        if not (self.a > 0 and self.a < self.b < math.sqrt(2.0) * self.a):
            raise ValueError("SmoothDoubleBarrier requires a < b < sqrt(2) a")
        if not self.v_w > 0:
            raise ValueError("SmoothDoubleBarrier requires v_w > 0")
        if not self.delta > 0:
            raise ValueError("SmoothDoubleBarrier requires delta > 0")

    def _parts(self, x):
        x = np.asarray(x, dtype=float)
        a2, b2, d2 = self.a**2, self.b**2, self.delta**2
        g = 1.0 - (x * x + a2) / b2
        s = (x * x - a2) / d2
        f = 0.5 * (1.0 - np.tanh(0.5 * s))  # 1/(1+e^s) without overflow
        return x, g, f, b2, d2

    def eval(self, x):
        _, g, f, _, _ = self._parts(x)
        return _out(-self.v_w * g * f)

    def d1(self, x):
        x, g, f, b2, d2 = self._parts(x)
        g1 = -2.0 * x / b2
        s1 = 2.0 * x / d2
        f1 = -f * (1.0 - f) * s1
        return _out(-self.v_w * (g1 * f + g * f1))

    def d2(self, x):
        x, g, f, b2, d2 = self._parts(x)
        g1 = -2.0 * x / b2
        g2 = -2.0 / b2
        s1 = 2.0 * x / d2
        s2 = 2.0 / d2
        f1 = -f * (1.0 - f) * s1
        f2 = -f1 * (1.0 - 2.0 * f) * s1 - f * (1.0 - f) * s2
        return _out(-self.v_w * (g2 * f + 2.0 * g1 * f1 + g * f2))

    def scan_range(self):
        far = self.b + 8.0 * self.delta
        return -far, far

    def scan_step(self):
        return self.a / 200.0

    def feature_length(self):
        return min(self.a, self.delta)


@dataclass(frozen=True)
class RectangularDoubleBarrier(PotentialModel):
    """Flat well (v0) for |x| < a, flat barriers (v1) for a <= |x| <= b, zero outside."""

    a: float = 2.0
    b: float = 3.0
    v0: float = -2.0
    v1: float = 3.0
    mass: EffectiveMass = field(default_factory=EffectiveMass)

    def __post_init__(self):
        if not (0 < self.a < self.b):
            raise ValueError("RectangularDoubleBarrier requires 0 < a < b")
        if not self.v1 > self.v0:
            raise ValueError("RectangularDoubleBarrier requires v1 > v0")
        object.__setattr__(self, "breakpoints", (-self.b, -self.a, self.a, self.b))

    def eval(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        v = np.where(ax < self.a, self.v0, np.where(ax <= self.b, self.v1, 0.0))
        return _out(v)

    def d1(self, x):
        return _out(np.zeros_like(np.asarray(x, dtype=float)))

    def d2(self, x):
        return _out(np.zeros_like(np.asarray(x, dtype=float)))

    def scan_range(self):
        return -2.0 * self.b, 2.0 * self.b

    def scan_step(self):
        return self.a / 200.0


@dataclass(frozen=True)
class PartiallyLinearPotential(PotentialModel):
    """Flat well -v0 for |x| < a, linear ramp v1 - slope (|x| - a) up to |x| = b.

    The potential has a cusp at x = +-a and vanishes beyond b.  When b is
    omitted it is placed where the ramp reaches zero.
    """

    a: float = 5.0
    v0: float = 20.0
    v1: float = 20.0
    slope: float = 10.0
    b: float | None = None
    mass: EffectiveMass = field(default_factory=EffectiveMass)

    def __post_init__(self):
        if not (self.a > 0 and self.v0 > 0 and self.v1 > 0 and self.slope > 0):
            raise ValueError("PartiallyLinearPotential parameters must be positive")
        if self.b is None:
            object.__setattr__(self, "b", self.a + self.v1 / self.slope)
        if not self.b > self.a:
            raise ValueError("PartiallyLinearPotential requires b > a")
        object.__setattr__(self, "breakpoints", (-self.b, -self.a, self.a, self.b))

    @property
    def v_at_b(self) -> float:
        return self.v1 - self.slope * (self.b - self.a)

    def eval(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        ramp = self.v1 - self.slope * (ax - self.a)
        v = np.where(ax < self.a, -self.v0, np.where(ax <= self.b, ramp, 0.0))
        return _out(v)

    def d1(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        v = np.where((ax > self.a) & (ax < self.b), -self.slope * np.sign(x), 0.0)
        return _out(v)

    def d2(self, x):
        return _out(np.zeros_like(np.asarray(x, dtype=float)))

    def scan_range(self):
        return -2.0 * self.b, 2.0 * self.b

    def scan_step(self):
        return self.a / 200.0


@dataclass(frozen=True)
class HarmonicWell(PotentialModel):
    """V = v_min + (1/2) m omega^2 x^2 with omega given as an energy (hbar omega)."""

    omega: float = 0.5
    v_min: float = 0.0
    mass: EffectiveMass = field(default_factory=EffectiveMass)

    @property
    def spring(self) -> float:
        """m omega^2 in eV/nm^2."""
        return mass_energy(self.mass) * self.omega**2 / UNITS.hbar_c**2

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        return _out(self.v_min + 0.5 * self.spring * x * x)

    def d1(self, x):
        return _out(self.spring * np.asarray(x, dtype=float))

    def d2(self, x):
        return _out(np.full_like(np.asarray(x, dtype=float), self.spring))

    def length(self) -> float:
        """Oscillator length sqrt(hbar / (m omega)) in nm."""
        return UNITS.hbar_c / math.sqrt(mass_energy(self.mass) * self.omega)

    def scan_range(self):
        return -12.0 * self.length(), 12.0 * self.length()

    def scan_step(self):
        return self.length() / 200.0


@dataclass(frozen=True)
class InvertedParabola(PotentialModel):
    """V = v1 - k (x - x0)^2 / 2, an unbounded parabolic barrier."""

    v1: float = 1.0
    k: float = 1.0
    x0: float = 0.0
    mass: EffectiveMass = field(default_factory=EffectiveMass)
    symmetric: bool = False

    def eval(self, x):
        d = np.asarray(x, dtype=float) - self.x0
        return _out(self.v1 - 0.5 * self.k * d * d)

    def d1(self, x):
        return _out(-self.k * (np.asarray(x, dtype=float) - self.x0))

    def d2(self, x):
        return _out(np.full_like(np.asarray(x, dtype=float), -self.k))

    def scan_range(self):
        w = math.sqrt(2.0 * max(abs(self.v1), 1.0) / self.k) * 4
        return self.x0 - w, self.x0 + w

    def scan_step(self):
        return (self.scan_range()[1] - self.scan_range()[0]) / 4000.0


# ---------------------------------------------------------------- nuclear model


@dataclass(frozen=True)
class AlphaNucleusPotential(PotentialModel):
    """Woods-Saxon well plus the Coulomb field of a Woods-Saxon charge cloud.

    r in fm, energies in MeV.  The Coulomb part couples the alpha charge 2
    to the residual charge Z - 2 spread with the same Woods-Saxon profile.
    """

    A: int = 212
    Z: int = 84
    N: int | None = None
    a_ws: float = 0.67
    r0: float = 1.27
    mass: float = UNITS.alpha_mass_energy
    symmetric: bool = False

    def __post_init__(self):
        if self.N is None:
            object.__setattr__(self, "N", self.A - self.Z)
        if self.A != self.Z + self.N or self.Z <= 2 or self.N < 0:
            raise ValueError("AlphaNucleusPotential requires A = Z + N and Z > 2")

    @property
    def v0(self) -> float:
        return 51.0 - 33.0 * (self.N - self.Z) / self.A

    @property
    def R(self) -> float:
        return self.r0 * self.A ** (1.0 / 3.0)

    @property
    def coulomb_strength(self) -> float:
        """2 (Z - 2) e^2 / (4 pi eps0) in MeV fm."""
        return 2.0 * (self.Z - 2) * UNITS.coulomb_mev_fm

    def _shape(self, r):
        return 0.5 * (1.0 - np.tanh(0.5 * (np.asarray(r, dtype=float) - self.R) / self.a_ws))

    def charge_moment(self) -> float:
        """Closed form of the integral of r^2 / (1 + e^{(r-R)/a}) over r >= 0."""
        return -2.0 * self.a_ws**3 * polylog_neg_exp(3, self.R / self.a_ws)

    @property
    def c_norm(self) -> float:
        """Dimensionless density normalisation c = R^3 / (4 pi Q)."""
        return self.R**3 / (4.0 * math.pi * self.charge_moment())

    def c_norm_quadrature(self) -> float:
        """The same normalisation from adaptive quadrature in x = r / R."""
        R, a = self.R, self.a_ws

        def integrand(x):
            return x * x * (1.0 - math.tanh(R * (x - 1.0) / (2.0 * a)))

        edge = 1.0 + 60.0 * a / R
        val = quad(integrand, 0.0, 1.0, epsabs=0, epsrel=1e-13, limit=200)[0]
        val += quad(integrand, 1.0, edge, epsabs=0, epsrel=1e-13, limit=200)[0]
        return 1.0 / (2.0 * math.pi * val)

    def woods_saxon(self, r):
        return _out(-self.v0 * self._shape(r))

    def coulomb(self, r):
        return alpha_coulomb(self, r)

    def eval(self, r):
        return _out(np.asarray(self.woods_saxon(r)) + np.asarray(self.coulomb(r)))

    def d1(self, r):
        r = np.asarray(r, dtype=float)
        f = self._shape(r)
        ws = -self.v0 * (-f * (1.0 - f) / self.a_ws)
        # dV_C/dr = -strength * (enclosed fraction) / r^2
        enc = np.vectorize(self._enclosed)(r)
        return _out(ws - self.coulomb_strength * enc / (r * r))

    def d2(self, r):
        r = np.asarray(r, dtype=float)
        f = self._shape(r)
        f1 = -f * (1.0 - f) / self.a_ws
        f2 = -f1 * (1.0 - 2.0 * f) / self.a_ws
        ws = -self.v0 * f2
        enc = np.vectorize(self._enclosed)(r)
        q = self.charge_moment()
        denc = r * r * f / q
        col = self.coulomb_strength * (2.0 * enc / r**3 - denc / (r * r))
        return _out(ws + col)

    def _enclosed(self, r: float) -> float:
        """Fraction of the charge inside radius r."""
        a, R = self.a_ws, self.R
        s = (r - R) / a
        val = (
            r**3 / 3.0
            + a * r * r * _li1_neg_exp(s)
            - 2.0 * a * a * r * polylog_neg_exp(2, s)
            + 2.0 * a**3 * (polylog_neg_exp(3, s) - polylog_neg_exp(3, -R / a))
        )
        return val / self.charge_moment()

    def scan_range(self):
        return 1e-3, 40.0 * self.R

    def scan_step(self):
        return self.a_ws / 20.0


def _li1_neg_exp(s: float) -> float:
    """Li_1(-e^s) = -ln(1 + e^s)."""
    return -np.logaddexp(0.0, s)


def alpha_coulomb(p: AlphaNucleusPotential, r):
    """Coulomb energy (MeV) of the alpha at radius r (fm) from the polylog closed form.

    With s = (r - R)/a, the shell integrals reduce to
    I(r) = a^2 (pi^2/6 + R^2/(2a^2) - r^2/(6a^2) - Li2(-e^s))
           + (2a^3/r) (Li3(-e^s) - Li3(-e^{-R/a}))
    and V_C = 2 (Z - 2) e^2 I(r) / Q with Q the charge moment.
    """
    rr = np.asarray(r, dtype=float)
    if np.any(rr <= 0):
        raise ValueError("alpha_coulomb requires r > 0")
    a, R = p.a_ws, p.R
    li3_0 = polylog(3, -math.exp(-R / a))
    q = p.charge_moment()

    def one(x):
        s = (x - R) / a
        inner = a * a * (
            math.pi**2 / 6.0 + 0.5 * (R / a) ** 2 - (x / a) ** 2 / 6.0 - polylog_neg_exp(2, s)
        )
        inner += 2.0 * a**3 / x * (polylog_neg_exp(3, s) - li3_0)
        return p.coulomb_strength * inner / q

    out = np.vectorize(one, otypes=[float])(rr)
    return _out(out)


# ---------------------------------------------------------------- operations


def evaluate(p: PotentialModel, x, derivative: int = 0):
    """V(x), V'(x) or V''(x) of any model."""
    if derivative == 0:
        return p.eval(x)
    if derivative == 1:
        return p.d1(x)
    if derivative == 2:
        return p.d2(x)
    raise ValueError("derivative must be 0, 1 or 2")


def harmonic_fit(p: SmoothDoubleBarrier) -> HarmonicFit:
    """Second-order Taylor expansion of the smooth well about x = 0.

    c0 = -V(0)/V_w and c2 = V''(0)/(2 V_w); the oscillator quantum is
    hbar*sqrt(V''(0)/m) and n0 is the (fractional) level index at which the
    oscillator energy reaches zero.
    """
    if not isinstance(p, SmoothDoubleBarrier):
        raise TypeError("harmonic_fit needs a SmoothDoubleBarrier")
    a2, b2, d2 = p.a**2, p.b**2, p.delta**2
    c0 = (b2 - a2) / (b2 * (1.0 + math.exp(-a2 / d2)))
    es = math.exp(a2 / d2)
    c2 = es * (b2 - a2 + d2 * (1.0 + es)) / (b2 * d2 * (1.0 + es) ** 2)
    omega0 = UNITS.hbar_c * math.sqrt(2.0 * p.v_w * c2 / mass_energy(p.mass))
    n0 = c0 * p.v_w / omega0 - 0.5
    return HarmonicFit(c0=c0, c2=c2, omega0=omega0, n0=n0, offset=-c0 * p.v_w)


def oscillator_quantum(p: PotentialModel, x0: float = 0.0) -> float:
    """hbar * sqrt(V''(x0)/m) from the analytic second derivative."""
    curv = float(p.d2(x0))
    if curv <= 0:
        raise ValueError("no well curvature at x0")
    return UNITS.hbar_c * math.sqrt(curv / mass_energy(p.mass))


def barrier_top(p: PotentialModel) -> BarrierTop:
    """Maximum of V on the right of the well, by root-finding on V'."""
    if isinstance(p, InvertedParabola):
        return BarrierTop(x_max=p.x0, v_max=p.v1, v_pp=-p.k)
    lo, hi = p.scan_range()
    start = max(lo, 0.0)
    step = p.scan_step()
    xs = np.arange(start + step, hi, step)
    dv = np.asarray(p.d1(xs))
    idx = np.flatnonzero((dv[:-1] > 0) & (dv[1:] <= 0))
    if idx.size == 0:
        raise ValueError("potential has no interior maximum for x > 0")
    vals = np.asarray(p.eval(xs[idx]))
    i = idx[np.argmax(vals)]
    x_max = brentq(p.d1, xs[i], xs[i + 1], xtol=1e-13, rtol=4 * np.finfo(float).eps)
    return BarrierTop(x_max=x_max, v_max=float(p.eval(x_max)), v_pp=float(p.d2(x_max)))


def well_minimum(p: PotentialModel) -> tuple[float, float]:
    """(x_min, V_min) of the global minimum on the scan range."""
    lo, hi = p.scan_range()
    xs = np.arange(lo, hi, p.scan_step())
    v = np.asarray(p.eval(xs))
    i = int(np.argmin(v))
    if 0 < i < len(xs) - 1 and not p.breakpoints:
        try:
            x0 = brentq(p.d1, xs[i - 1], xs[i + 1], xtol=1e-13)
            return x0, float(p.eval(x0))
        except ValueError:
            pass
    return float(xs[i]), float(v[i])


def turning_points(p: PotentialModel, E: float) -> list[float]:
    """Sorted points where V(x) = E, by scanning and bisection to 1e-10."""
    E = float(E)
    lo, hi = p.scan_range()
    step = p.scan_step()
    try:
        top = barrier_top(p)
    except ValueError:
        top = None
    if top is not None and abs(E - top.v_max) <= 1e-12 * max(1.0, abs(top.v_max)):
        if p.symmetric:
            return [-top.x_max, -top.x_max, top.x_max, top.x_max]
        return [top.x_max, top.x_max]
    n = int(math.ceil((hi - lo) / step))
    xs = np.linspace(lo, hi, n + 1)
    if top is not None:
        # include the barrier tops so that a sliver of barrier just above E is seen
        extra = [top.x_max, -top.x_max] if p.symmetric else [top.x_max]
        xs = np.unique(np.concatenate([xs, [e for e in extra if lo < e < hi]]))
    # classify nodes as forbidden (V > E) or allowed; a root is any switch,
    # located by bisection so that jumps and flat stretches are handled alike
    forbidden = np.asarray(p.eval(xs)) > E
    roots = []
    for i in np.flatnonzero(forbidden[:-1] != forbidden[1:]):
        left, right = xs[i], xs[i + 1]
        left_state = forbidden[i]
        while right - left > 1e-11:
            mid = 0.5 * (left + right)
            if (float(p.eval(mid)) > E) == left_state:
                left = mid
            else:
                right = mid
        roots.append(0.5 * (left + right))
    return sorted(roots)
