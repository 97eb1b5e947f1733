"""Special functions: Airy, complex Gamma, Kummer M, Weber D and polylogarithms.

Everything here is self-contained.  Series that suffer cancellation are summed
in extended precision (numpy longdouble); the parabolic-cylinder function
switches between the Kummer representation, its large-argument expansion and
Taylor continuation of Weber's equation, choosing whichever is accurate at
the requested point.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

LD = np.longdouble
CLD = np.clongdouble
_EPS_LD = float(np.finfo(np.longdouble).eps)

# ---------------------------------------------------------------- Gamma

_LANCZOS_G = 7.0
_LANCZOS_P = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _is_pole(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def loggamma(z) -> complex:
    """log Gamma(z) for complex z (Lanczos, g=7, 9 terms), any branch."""
    z = complex(z)
    if _is_pole(z):
        raise ValueError(f"Gamma has a pole at {z}")
    if z.real < 0.5:
        return cmath.log(math.pi / cmath.sin(math.pi * z)) - loggamma(1.0 - z)
    z -= 1.0
    x = _LANCZOS_P[0]
    for i in range(1, 9):
        x += _LANCZOS_P[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def gamma(z) -> complex:
    """Gamma function of a complex argument."""
    z = complex(z)
    if _is_pole(z):
        raise ValueError(f"Gamma has a pole at {z}")
    lg = loggamma(z)
    if lg.real > 709.0:
        raise OverflowError("Gamma overflows")
    return cmath.exp(lg)


def rgamma(z) -> complex:
    """1/Gamma(z); exactly zero at the poles."""
    z = complex(z)
    if _is_pole(z):
        return 0j
    lg = loggamma(z)
    if lg.real < -745.0:
        return 0j
    if lg.real > 709.0:
        raise OverflowError("reciprocal Gamma prefactor underflows to zero")
    return cmath.exp(-lg)


# ---------------------------------------------------------------- Airy

_AI0 = LD("0.355028053887817239260063186004183176")
_AIP0 = LD("0.258819403792806798405183560189203963")  # -Ai'(0)
_SQRT3 = np.sqrt(LD(3))
_AIRY_SERIES_MAX = 6.5
_AIRY_NEG_SERIES_MAX = 8.0
_AIRY_K_MIN = 1.0
_AIRY_RANGE = 50.0


@lru_cache(maxsize=None)
def _airy_u(k: int) -> float:
    u = 1.0
    for j in range(1, k + 1):
        u *= (6 * j - 5) * (6 * j - 3) * (6 * j - 1) / ((2 * j - 1) * 216.0 * j)
    return u


def _airy_v(k: int) -> float:
    return -(6 * k + 1) / (6 * k - 1) * _airy_u(k) if k else 1.0


def _airy_series(z: float):
    x = LD(z)
    x3 = x * x * x
    f = fs = LD(1)
    g = gs = x
    df = dfs = x * x / 2
    dg = dgs = LD(1)
    for k in range(0, 400):
        fs = fs * x3 / ((3 * k + 2) * (3 * k + 3))
        gs = gs * x3 / ((3 * k + 3) * (3 * k + 4))
        if k:
            dfs = dfs * x3 / ((3 * k) * (3 * k + 2))
            df += dfs
        dgs = dgs * x3 / ((3 * k + 1) * (3 * k + 3))
        f += fs
        g += gs
        dg += dgs
        if k > 3 and max(abs(fs), abs(gs), abs(dfs), abs(dgs)) < 1e-22 * (
            1 + abs(f) + abs(g)
        ):
            break
    ai = _AI0 * f - _AIP0 * g
    bi = _SQRT3 * (_AI0 * f + _AIP0 * g)
    aip = _AI0 * df - _AIP0 * dg
    bip = _SQRT3 * (_AI0 * df + _AIP0 * dg)
    return float(ai), float(bi), float(aip), float(bip)


def _truncated(terms_fn, zeta):
    """Sum an asymptotic series up to its smallest term."""
    total = 0.0
    prev = math.inf
    for k in range(0, 200):
        t = terms_fn(k) / zeta**k
        if abs(t) > prev:
            break
        total += t
        prev = abs(t)
        if prev < 1e-17 * abs(total):
            break
    return total


def _airy_asymptotic(z: float):
    sp = math.sqrt(math.pi)
    if z > 0:
        zeta = 2.0 / 3.0 * z**1.5
        q = z**0.25
        su_m = _truncated(lambda k: (-1) ** k * _airy_u(k), zeta)
        sv_m = _truncated(lambda k: (-1) ** k * _airy_v(k), zeta)
        su_p = _truncated(lambda k: _airy_u(k), zeta)
        sv_p = _truncated(lambda k: _airy_v(k), zeta)
        em = math.exp(-zeta)
        ep = math.exp(zeta)
        return (
            em / (2 * sp * q) * su_m,
            ep / (sp * q) * su_p,
            -q * em / (2 * sp) * sv_m,
            q * ep / sp * sv_p,
        )
    x = -z
    zeta = 2.0 / 3.0 * x**1.5
    q = x**0.25
    phi = zeta + math.pi / 4
    s, c = math.sin(phi), math.cos(phi)

    def pair(coef):
        even = _truncated(lambda k: (-1) ** k * coef(2 * k), zeta * zeta)
        odd = _truncated(lambda k: (-1) ** k * coef(2 * k + 1), zeta * zeta) / zeta
        return even, odd

    pu, qu = pair(_airy_u)
    pv, qv = pair(_airy_v)
    ai = (s * pu - c * qu) / (sp * q)
    bi = (c * pu + s * qu) / (sp * q)
    aip = -q * (c * pv + s * qv) / sp
    bip = q * (s * pv - c * qv) / sp
    return ai, bi, aip, bip


def _scaled_bessel_k(nu: float, x: float) -> float:
    """e^x K_nu(x) from the integral of exp(-x (cosh t - 1)) cosh(nu t).

    The integrand decays doubly exponentially, so the trapezoidal rule
    converges geometrically in the step.
    """
    h = 0.02
    t_max = math.acosh(1.0 + 800.0 / x)
    t = np.arange(0.0, t_max + h, h)
    f = np.exp(-x * (np.cosh(t) - 1.0)) * np.cosh(nu * t)
    return h * (f.sum() - 0.5 * f[0])


def _airy_point(v: float):
    if v >= _AIRY_K_MIN:
        zeta = 2.0 / 3.0 * v**1.5
        em = math.exp(-zeta)
        ai = math.sqrt(v / 3.0) / math.pi * _scaled_bessel_k(1.0 / 3.0, zeta) * em
        aip = -v / (math.pi * math.sqrt(3.0)) * _scaled_bessel_k(2.0 / 3.0, zeta) * em
        _, bi, _, bip = _airy_series(v) if v <= _AIRY_SERIES_MAX else _airy_asymptotic(v)
        return ai, bi, aip, bip
    if v >= -_AIRY_NEG_SERIES_MAX:
        return _airy_series(v)
    return _airy_asymptotic(v)


def airy(z):
    """Airy functions (Ai, Bi, Ai', Bi') of a real argument, |z| <= 50.

    Accepts scalars or arrays; returns a tuple of four like-shaped results.
    """
    arr = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(np.abs(arr) > _AIRY_RANGE):
        raise ValueError("airy: argument outside the supported range |z| <= 50")
    flat = arr.ravel()
    out = np.empty((4, flat.size))
    for i, v in enumerate(flat):
        out[:, i] = _airy_point(float(v))
    if arr.ndim == 0:
        return tuple(float(o[0]) for o in out)
    return tuple(o.reshape(arr.shape) for o in out)


# ---------------------------------------------------------------- Kummer M


def _check_b(b: complex):
    if _is_pole(b):
        raise ValueError("kummer_M: b must not be a non-positive integer")


def _kummer_series_ld(a: complex, b: complex, z: np.ndarray):
    """Vectorised Maclaurin series in extended precision.

    Returns (sum, loss) where loss = largest term / |sum| measures the
    cancellation inside the series.
    """
    a_ld = CLD(a)
    b_ld = CLD(b)
    zl = z.astype(CLD)
    term = np.ones_like(zl)
    total = term.copy()
    peak = np.ones(z.shape, dtype=LD)
    kmin = abs(z).max(initial=0.0) + abs(a) + 2
    for k in range(20000):
        term = term * ((a_ld + k) / ((b_ld + k) * (k + 1))) * zl
        total += term
        mag = np.abs(term)
        peak = np.maximum(peak, mag)
        if k > kmin and np.all(mag <= 1e-21 * np.abs(total)):
            break
        if not np.any(mag):
            break
    else:
        raise ArithmeticError("kummer_M: series did not converge")
    with np.errstate(divide="ignore", invalid="ignore"):
        loss = np.where(np.abs(total) > 0, peak / np.abs(total), np.inf)
    return total, loss.astype(float)


def _kummer_ld(a: complex, b: complex, z: np.ndarray):
    """M(a, b, z) in extended precision with Kummer's transformation for Re z < 0."""
    neg = z.real < 0
    total = np.empty(z.shape, dtype=CLD)
    loss = np.empty(z.shape)
    if np.any(~neg):
        total[~neg], loss[~neg] = _kummer_series_ld(a, b, z[~neg])
    if np.any(neg):
        zn = z[neg]
        s, lo = _kummer_series_ld(b - a, b, -zn)
        total[neg] = np.exp(zn.astype(CLD)) * s
        loss[neg] = lo
    return total, loss


def _kummer_asymptotic(a: complex, b: complex, z: complex) -> complex:
    def series(p, q, w):
        total, term, prev = 0j, 1 + 0j, math.inf
        for s in range(200):
            if abs(term) > prev:
                break
            total += term
            prev = abs(term)
            if prev < 1e-17 * abs(total):
                break
            term = term * (p + s) * (q + s) / ((s + 1) * w)
        return total

    ph = cmath.phase(z)
    sign = 1.0 if ph > -math.pi / 2 else -1.0
    first = cmath.exp(z) * z ** (a - b) * rgamma(a) * series(b - a, 1 - a, z)
    second = (
        cmath.exp(sign * 1j * math.pi * a)
        * z ** (-a)
        * rgamma(b - a)
        * series(a, a - b + 1, -z)
    )
    return gamma(b) * (first + second)


def kummer_M(a, b, z):
    """Confluent hypergeometric function M(a, b, z) (Kummer's function).

    Maclaurin series for |z| <= 30, large-argument expansion beyond.
    """
    a = complex(a)
    b = complex(b)
    _check_b(b)
    zarr = np.asarray(z, dtype=complex)
    flat = zarr.ravel()
    out = np.empty(flat.shape, dtype=complex)
    big = np.abs(flat) > 30.0
    if np.any(~big):
        vals, _ = _kummer_ld(a, b, flat[~big])
        out[~big] = vals.astype(complex)
    for i in np.flatnonzero(big):
        out[i] = _kummer_asymptotic(a, b, complex(flat[i]))
    if zarr.ndim == 0:
        return complex(out[0])
    return out.reshape(zarr.shape)


# ---------------------------------------------------------------- Weber D

_WEBER_RANGE = 40.0
_WEBER_TOL = 1e-13


def _weber_kummer(lam: complex, z: np.ndarray):
    """D_lambda from two Kummer branches; returns (value, relative error estimate)."""
    zl = z.astype(CLD)
    arg = zl * zl / 2
    m1, l1 = _kummer_ld(-lam / 2, 0.5, arg)
    m2, l2 = _kummer_ld((1 - lam) / 2, 1.5, arg)
    c1 = CLD(math.sqrt(math.pi) * rgamma((1 - lam) / 2))
    c2 = CLD(math.sqrt(2 * math.pi) * rgamma(-lam / 2))
    pref = CLD(2 ** (lam / 2)) * np.exp(-zl * zl / 4)
    b1 = pref * c1 * m1
    b2 = -pref * c2 * zl * m2
    val = b1 + b2
    mag = np.abs(val).astype(float)
    a1 = np.abs(b1).astype(float)
    a2 = np.abs(b2).astype(float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        est = (_EPS_LD * 8 * (l1 * a1 + l2 * a2) + 4e-15 * (a1 + a2)) / mag
    est = np.where(np.isfinite(est), est, np.inf)
    return val, est


def _weber_asymptotic(lam: complex, z: complex):
    """Large-|z| expansion with the Stokes-sector second term; (value, error)."""

    def series(p, w):
        # sum_s (-1)^s (p)_{2s} / (s! (2 w^2)^s)  or without sign via w^2 -> -w^2
        total, term, prev, last = 0j, 1 + 0j, math.inf, 0.0
        for s in range(400):
            if abs(term) > prev:
                break
            total += term
            prev = abs(term)
            last = prev
            if prev < 1e-18 * abs(total):
                break
            term = term * (p + 2 * s) * (p + 2 * s + 1) / ((s + 1) * w)
        return total, last / max(abs(total), 1e-300)

    ph = cmath.phase(z)
    s1, e1 = series(-lam, -2 * z * z)
    main = cmath.exp(-z * z / 4 + lam * cmath.log(z)) * s1
    if abs(ph) <= math.pi / 2:
        return main, e1
    s2, e2 = series(1 + lam, 2 * z * z)
    sign = 1.0 if ph > 0 else -1.0
    extra = (
        -math.sqrt(2 * math.pi)
        * rgamma(-lam)
        * cmath.exp(sign * 1j * math.pi * lam + z * z / 4 - (lam + 1) * cmath.log(z))
        * s2
    )
    val = main + extra
    err = (e1 * abs(main) + e2 * abs(extra)) / max(abs(val), 1e-300)
    return val, err


def _taylor_continue(lam: complex, z0: complex, w0: complex, dw0: complex, z1: complex):
    """Integrate w'' = (z^2/4 - lam - 1/2) w from z0 to z1 by local Taylor series."""
    z, w, dw = z0, w0, dw0
    dist = abs(z1 - z0)
    if dist == 0:
        return w
    direction = (z1 - z0) / dist
    travelled = 0.0
    while travelled < dist:
        hmax = min(0.4, 2.0 / (abs(z) + math.sqrt(abs(lam)) + 1.0))
        step = min(hmax, dist - travelled)
        h = direction * step
        q0 = z * z / 4 - lam - 0.5
        q1 = z / 2
        c = [w, dw]
        val, der = w + dw * h, dw
        hp = h
        scale = abs(w) + abs(dw) * step
        small = 0
        for k in range(0, 200):
            nxt = q0 * c[k] + (q1 * c[k - 1] if k >= 1 else 0) + (0.25 * c[k - 2] if k >= 2 else 0)
            nxt /= (k + 2) * (k + 1)
            c.append(nxt)
            der += (k + 2) * nxt * hp
            hp = hp * h
            t = nxt * hp
            val += t
            if abs(t) < 1e-18 * scale:
                small += 1
                if small >= 3:
                    break
            else:
                small = 0
        z, w, dw = z + h, val, der
        travelled += step
    return w


def _weber_point(lam: complex, z: complex):
    val, err = _weber_asymptotic(lam, z) if z != 0 else (0j, math.inf)
    if err <= _WEBER_TOL:
        return val
    ph = cmath.phase(z) if z != 0 else 0.0
    radius = max(abs(z), 6.0)
    while radius <= 60.0:
        za = cmath.rect(radius, ph)
        wa, ea = _weber_asymptotic(lam, za)
        if ea <= _WEBER_TOL * 1e-2:
            wb, eb = _weber_asymptotic(lam + 1, za)
            dwa = za / 2 * wa - wb
            return _taylor_continue(lam, za, wa, dwa, complex(z))
        radius += 2.0
    raise ArithmeticError(f"weber_D: no accurate representation at z={z}")


def weber_D(lam, z):
    """Parabolic-cylinder (Weber) function D_lambda(z), complex order and argument.

    Solves w'' + (lambda + 1/2 - z^2/4) w = 0 and decays like
    z^lambda exp(-z^2/4) for |arg z| < 3 pi/4.  Principal branches throughout.
    """
    lam = complex(lam)
    zarr = np.asarray(z, dtype=complex)
    flat = zarr.ravel()
    if np.any(np.abs(flat) > _WEBER_RANGE):
        raise ValueError("weber_D: |z| must not exceed 40")
    try:
        rgamma((1 - lam) / 2)
        rgamma(-lam / 2)
    except OverflowError as exc:
        raise ValueError("weber_D: Gamma prefactor out of range") from exc
    with np.errstate(over="ignore", invalid="ignore"):
        vals, est = _weber_kummer(lam, flat)
    out = vals.astype(complex)
    bad = ~(est <= _WEBER_TOL) | ~np.isfinite(out)
    for i in np.flatnonzero(bad):
        out[i] = _weber_point(lam, complex(flat[i]))
    if not np.all(np.isfinite(out)):
        raise ValueError("weber_D: result overflows double precision")
    if zarr.ndim == 0:
        return complex(out[0])
    return out.reshape(zarr.shape)


# ---------------------------------------------------------------- polylog


@lru_cache(maxsize=None)
def _bernoulli(n: int) -> Fraction:
    b = [Fraction(1)]
    for m in range(1, n + 1):
        s = sum(Fraction(math.comb(m + 1, k)) * b[k] for k in range(m))
        b.append(-s / (m + 1))
    return b[n]


@lru_cache(maxsize=None)
def _log_series_coeffs(order: int, nterms: int = 40):
    """Coefficients c_j with Li_order(x) = sum_j c_j u^j, u = -ln(1-x)."""
    li2 = [Fraction(0)] * (nterms + 2)
    for k in range(nterms):
        li2[k + 1] = _bernoulli(k) / math.factorial(k + 1)
    if order == 2:
        return tuple(float(c) for c in li2)
    # dLi3/du = Li2(u) / (e^u - 1) = Li2(u) * (1/u) sum_j B_j u^j / j!
    inv = [_bernoulli(j) / math.factorial(j) for j in range(nterms + 2)]
    li3 = [Fraction(0)] * (nterms + 2)
    for n in range(nterms):
        # coefficient of u^n in Li2 * sum_j B_j u^(j-1) / j!
        acc = Fraction(0)
        for i in range(1, n + 2):
            j = n + 1 - i
            acc += li2[i] * inv[j]
        li3[n + 1] = acc / (n + 1)
    return tuple(float(c) for c in li3)


def _polylog_direct(n: int, x: float) -> float:
    total, power = 0.0, 1.0
    for k in range(1, 2000):
        power *= x
        t = power / k**n
        total += t
        if abs(t) < 1e-18 * max(abs(total), 1e-300):
            break
    return total


def _polylog_log_series(n: int, x: float) -> float:
    u = -math.log1p(-x)
    coeffs = _log_series_coeffs(n)
    total, p = 0.0, 1.0
    for c in coeffs:
        total += c * p
        p *= u
    return total


def _polylog_unit(n: int, x: float) -> float:
    """Li_n(x) for -1 <= x <= 0."""
    if x >= -0.5:
        return _polylog_direct(n, x)
    return _polylog_log_series(n, x)


def polylog(n: int, x: float) -> float:
    """Li_n(x) for n in {2, 3} and real x <= 0."""
    if n not in (2, 3):
        raise ValueError("polylog: only orders 2 and 3 are supported")
    x = float(x)
    if x > 0:
        raise ValueError("polylog: argument must be non-positive")
    if x == 0.0:
        return 0.0
    if x >= -1.0:
        return _polylog_unit(n, x)
    lg = math.log(-x)
    inv = _polylog_unit(n, 1.0 / x)
    if n == 2:
        return -math.pi**2 / 6 - 0.5 * lg * lg - inv
    return inv - math.pi**2 / 6 * lg - lg**3 / 6


def polylog_neg_exp(n: int, s: float) -> float:
    """Li_n(-e^s) without overflow for large s."""
    if n not in (2, 3):
        raise ValueError("polylog: only orders 2 and 3 are supported")
    if s <= 0:
        return polylog(n, -math.exp(s))
    inv = _polylog_unit(n, -math.exp(-s))
    if n == 2:
        return -math.pi**2 / 6 - 0.5 * s * s - inv
    return inv - math.pi**2 / 6 * s - s**3 / 6
