"""Physical constants and unit conversions.

Energies are in eV and lengths in nm for the dot sector, MeV and fm for the
nuclear sector.  The numerical value of hbar*c is the same in both unit
pairs, so most formulas work unchanged in either.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class UnitSystem:
    """CODATA-2018 constants used throughout the package."""

    hbar_c: float = 197.3269804  # eV nm, equivalently MeV fm
    electron_mass_energy: float = 510998.95  # eV
    fine_structure: float = 1.0 / 137.035999084
    hbar: float = 6.582119569e-16  # eV s
    speed_of_light: float = 299792458.0  # m/s
    epsilon0: float = 8.8541878128e-12  # F/m
    alpha_mass_energy: float = 3727.3794066  # MeV

    @property
    def hbar_c_ev_nm(self) -> float:
        return self.hbar_c

    @property
    def hbar_c_mev_fm(self) -> float:
        return self.hbar_c

    @property
    def coulomb_mev_fm(self) -> float:
        """e^2/(4 pi eps0) in MeV fm."""
        return self.fine_structure * self.hbar_c


UNITS = UnitSystem()


@dataclass(frozen=True)
class EffectiveMass:
    """Carrier mass expressed as a multiple of the free electron mass."""

    ratio_to_electron: float = 0.1

    def __post_init__(self):
        if not self.ratio_to_electron > 0:
            raise ValueError("effective mass ratio must be positive")

    @property
    def energy(self) -> float:
        """Rest energy m c^2 in eV."""
        return self.ratio_to_electron * UNITS.electron_mass_energy


def mass_energy(mass) -> float:
    """Rest energy of ``mass``: an EffectiveMass (eV) or a bare number."""
    if isinstance(mass, EffectiveMass):
        return mass.energy
    m = float(mass)
    if not m > 0:
        raise ValueError("mass must be positive")
    return m


def wave_factor(mass) -> float:
    """2 m c^2 / (hbar c)^2, so that k^2 = wave_factor * (E - V)."""
    return 2.0 * mass_energy(mass) / UNITS.hbar_c**2


def k_of_E(E, V, mass=EffectiveMass()):
    """Local wavenumber sqrt(2m(E-V))/hbar in inverse length units.

    Works in eV/nm with an EffectiveMass or in MeV/fm with a rest energy in
    MeV.  Raises ValueError in classically forbidden regions.
    """
    diff = np.asarray(E, dtype=float) - np.asarray(V, dtype=float)
    if np.any(diff < 0):
        raise ValueError("E < V: classically forbidden, use kappa_of_E")
    k = np.sqrt(wave_factor(mass) * diff)
    return float(k) if k.ndim == 0 else k


def kappa_of_E(E, V, mass=EffectiveMass()):
    """Decay constant sqrt(2m(V-E))/hbar under a barrier."""
    diff = np.asarray(V, dtype=float) - np.asarray(E, dtype=float)
    if np.any(diff < 0):
        raise ValueError("E > V: classically allowed, use k_of_E")
    k = np.sqrt(wave_factor(mass) * diff)
    return float(k) if k.ndim == 0 else k


def rate_from_width(width):
    """Decay rate in 1/s from an energy width in eV."""
    w = np.asarray(width, dtype=float)
    if np.any(w < 0):
        raise ValueError("width must be non-negative")
    r = w / UNITS.hbar
    return float(r) if r.ndim == 0 else r


def width_from_rate(rate):
    """Energy width in eV from a rate in 1/s."""
    r = np.asarray(rate, dtype=float) * UNITS.hbar
    return float(r) if r.ndim == 0 else r


def time_to_natural(t):
    """Seconds to inverse eV (t / hbar)."""
    return np.asarray(t, dtype=float) / UNITS.hbar if np.ndim(t) else t / UNITS.hbar


def length_to_natural(x):
    """Nanometres (or femtometres) to inverse eV (inverse MeV)."""
    return np.asarray(x, dtype=float) / UNITS.hbar_c if np.ndim(x) else x / UNITS.hbar_c


def ev_to_mev(E):
    return E * 1e-6


def mev_to_ev(E):
    return E * 1e6


def nm_to_fm(x):
    return x * 1e6


def fm_to_nm(x):
    return x * 1e-6


def hz_to_ev(nu):
    """Energy h*nu in eV of a frequency in Hz."""
    return 2.0 * math.pi * UNITS.hbar * nu
