"""Analytic spectrum and thermal occupation of the bare V-shaped trap.

For V = alpha |x| the eigenenergies are e0 * a_m with
e0 = (alpha^2 hbar^2 / 2m)^(1/3) and a_m alternating between the negated
zeros of Ai' (even states) and of Ai (odd states). The partition function
sums exact low levels and closes the tail with the semiclassical density
of states, which is what makes Boltzmann weights cheap for thousands of
levels.
"""

import math

import numpy as np
from scipy import special

from ..constants import CONSTANTS, RB85


def energy_scale(v_slope: float, mass: float = RB85.mass,
                 hbar: float = CONSTANTS.hbar) -> float:
    """(alpha^2 hbar^2 / 2m)^(1/3), the linear-potential energy unit."""
    return (v_slope ** 2 * hbar ** 2 / (2.0 * mass)) ** (1.0 / 3.0)


def trap_level_coefficients(count: int) -> np.ndarray:
    """First ``count`` dimensionless level coefficients a_m (ascending)."""
    pairs = (count + 1) // 2
    ai, aip, _, _ = special.ai_zeros(pairs)
    levels = np.empty(2 * pairs)
    levels[0::2] = -aip   # even-parity states: zeros of Ai'
    levels[1::2] = -ai    # odd-parity states: zeros of Ai
    return levels[:count]


def trap_level_energies(v_slope: float, count: int,
                        mass: float = RB85.mass,
                        hbar: float = CONSTANTS.hbar) -> np.ndarray:
    return energy_scale(v_slope, mass, hbar) * trap_level_coefficients(count)


def semiclassical_count(v_slope: float, energy, mass: float = RB85.mass,
                        hbar: float = CONSTANTS.hbar):
    """WKB number of levels below ``energy``: (4/3 pi) sqrt(2m) E^1.5/(alpha hbar)."""
    energy = np.asarray(energy, dtype=float)
    return (4.0 / (3.0 * math.pi) * np.sqrt(2.0 * mass)
            * energy ** 1.5 / (v_slope * hbar))


def partition_function(v_slope: float, temperature: float,
                       mass: float = RB85.mass,
                       hbar: float = CONSTANTS.hbar,
                       k_boltzmann: float = CONSTANTS.k_boltzmann,
                       exact_levels: int = 4000) -> float:
    """Z = sum exp(-E_m / kT) over the full bare-trap spectrum.

    Exact Airy levels up to ``exact_levels``, then the semiclassical tail
    integral (upper incomplete gamma), accurate to well below 1e-3.
    """
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    beta = 1.0 / (k_boltzmann * temperature)
    energies = trap_level_energies(v_slope, exact_levels, mass, hbar)
    z = float(np.sum(np.exp(-beta * energies)))
    e_top = float(energies[-1])
    # tail: integral of rho(E) exp(-beta E) from the last exact level up
    prefactor = 2.0 / math.pi * math.sqrt(2.0 * mass) / (v_slope * hbar)
    tail = (prefactor * beta ** -1.5 * special.gamma(1.5)
            * special.gammaincc(1.5, beta * e_top))
    return z + tail


def boltzmann_weights(energies, temperature: float, v_slope: float,
                      mass: float = RB85.mass, hbar: float = CONSTANTS.hbar,
                      k_boltzmann: float = CONSTANTS.k_boltzmann):
    """Occupations of the given levels, normalized by the full trap Z."""
    beta = 1.0 / (k_boltzmann * temperature)
    z = partition_function(v_slope, temperature, mass, hbar, k_boltzmann)
    return np.exp(-beta * np.asarray(energies, dtype=float)) / z
