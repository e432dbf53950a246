"""Physical constants, the built-in ⁸⁵Rb record, and kinematic scales.

Everything downstream works in SI. Laboratory units (Gauss, cm, µK, ms)
are accepted only at the configuration boundary; the exact conversion
factors live here so there is a single place to audit them.
"""

import math
from dataclasses import dataclass

# --- unit conversion factors (exact) ---------------------------------------
GAUSS = 1e-4            # T
G_PER_CM = 1e-2         # T/m
G_PER_CM2 = 1.0         # T/m^2
UK = 1e-6               # K
NK = 1e-9               # K
MM = 1e-3               # m
UM = 1e-6               # m
MS = 1e-3               # s
US = 1e-6               # s
CM_PER_S = 1e-2         # m/s
MM_PER_S = 1e-3         # m/s


@dataclass(frozen=True)
class PhysicalConstants:
    """Fundamental constants (SI). CODATA values hard-coded to >=6 digits."""

    planck_h: float = 6.62607015e-34        # J s (exact)
    hbar: float = 6.62607015e-34 / (2.0 * math.pi)  # J s
    k_boltzmann: float = 1.380649e-23       # J/K (exact)
    bohr_magneton: float = 9.2740100783e-24  # J/T
    mu0: float = 1.25663706212e-6           # T m/A
    gravity_g: float = 9.80665              # m/s^2

    def __post_init__(self):
        for name in ("planck_h", "hbar", "k_boltzmann", "bohr_magneton",
                     "mu0", "gravity_g"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if abs(self.hbar * 2.0 * math.pi / self.planck_h - 1.0) > 1e-12:
            raise ValueError("hbar must equal planck_h / 2*pi")


@dataclass(frozen=True)
class AtomSpecies:
    """Atomic species data needed by the magnetic and kinematic formulas.

    mass          kg
    d2_wavelength m, the D2 cooling/trapping transition
    f_ground      total angular momentum F of the ground manifold
    g_f           Lande factor of that manifold
    """

    name: str
    mass: float
    d2_wavelength: float
    f_ground: int
    g_f: float

    def __post_init__(self):
        if self.mass <= 0.0:
            raise ValueError("mass must be positive")
        if self.d2_wavelength <= 0.0:
            raise ValueError("d2_wavelength must be positive")
        if self.f_ground < 0:
            raise ValueError("f_ground must be >= 0")


CONSTANTS = PhysicalConstants()

#: ⁸⁵Rb, F=3 ground manifold (g_F = 1/3), D2 line at 780 nm.
RB85 = AtomSpecies(
    name="Rb85",
    mass=1.4100e-25,
    d2_wavelength=780.241e-9,
    f_ground=3,
    g_f=1.0 / 3.0,
)


def recoil_velocity(species: AtomSpecies,
                    constants: PhysicalConstants = CONSTANTS) -> float:
    """Single-photon recoil velocity h/(m*lambda) in m/s."""
    return constants.planck_h / (species.mass * species.d2_wavelength)


def recoil_temperature(species: AtomSpecies,
                       constants: PhysicalConstants = CONSTANTS) -> float:
    """Recoil temperature m*v_rec^2/k_B in K."""
    v = recoil_velocity(species, constants)
    return species.mass * v * v / constants.k_boltzmann


def de_broglie_wavelength(species: AtomSpecies, temperature_1d: float,
                          constants: PhysicalConstants = CONSTANTS) -> float:
    """Thermal de Broglie wavelength h/(m*v_rms) in m.

    Uses the 1-D rms convention v_rms = sqrt(k_B*T/m); at T equal to the
    recoil temperature this returns exactly the D2 wavelength.
    """
    if temperature_1d <= 0.0:
        raise ValueError("temperature_1d must be positive")
    v_rms = math.sqrt(constants.k_boltzmann * temperature_1d / species.mass)
    return constants.planck_h / (species.mass * v_rms)
