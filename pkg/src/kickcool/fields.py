"""Magnetostatic field models and the forces they exert on magnetized atoms.

Three source types are supported:

* ``CoilPair`` -- two circular current loops on a common axis (the z axis).
  On-axis fields are exact; off-axis fields use the second-order near-axis
  expansion B_z(rho, z) = B(z) - (rho^2/4) B''(z), B_rho = -(rho/2) B'(z),
  valid while the cloud is small against the coil radius.
* ``IdealQuadrupole`` -- divergence-free linear field
  B = B' (-x/2, -y/2, z) with axial gradient B'.
* ``IdealHarmonic`` -- axial model B_z(z) = bias + (1/2) B'' z^2 used for
  kicks along the coil axis; it has no transverse structure by design.

An atom in sublevel m_F of a manifold with Lande factor g_F sees
U = g_F m_F mu_B |B| (+ m g y when gravity is enabled); m_F is conserved
throughout (no spin dynamics).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import CONSTANTS, AtomSpecies, PhysicalConstants

#: default finite-difference step (m) for derivatives of coil fields
FD_STEP = 1e-6

#: atoms closer than this (m) to a quadrupole node get zero magnetic force
NODE_EPS = 1e-9


@dataclass(frozen=True)
class CoilPair:
    """Two coaxial circular loops at z = -half_separation and +half_separation.

    ``polarity="opposed"`` gives the MOT/quadrupole configuration (field zero
    at the center), ``"aligned"`` the harmonic one.
    """

    radius: float              # m
    half_separation: float     # m
    turns: int
    current: float             # A
    polarity: str = "opposed"

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")
        if self.half_separation <= 0.0:
            raise ValueError("half_separation must be positive")
        if self.turns < 1:
            raise ValueError("turns must be >= 1")
        if self.polarity not in ("opposed", "aligned"):
            raise ValueError("polarity must be 'opposed' or 'aligned'")


def reference_coil(current: float = 18.0, polarity: str = "opposed",
               constants: PhysicalConstants = CONSTANTS) -> CoilPair:
    """The experiment's coil pair: 200 turns, 4 cm radius, 8 cm apart, <=18 A."""
    if not 0.0 <= current <= 18.0:
        raise ValueError("reference coil current limited to 0..18 A")
    return CoilPair(radius=0.04, half_separation=0.04, turns=200,
                    current=current, polarity=polarity)


@dataclass(frozen=True)
class IdealQuadrupole:
    """Pure linear field B = B' (-x/2, -y/2, z); div B = 0 by construction."""

    axial_gradient: float      # T/m


@dataclass(frozen=True)
class IdealHarmonic:
    """Axial field B_z(z) = bias + (1/2) axial_curvature z^2."""

    axial_curvature: float     # T/m^2
    bias: float = 0.0          # T


Source = CoilPair | IdealQuadrupole | IdealHarmonic


@dataclass(frozen=True)
class FieldConfiguration:
    """A set of field sources plus the gravity switch.

    Gravity acts along the -y axis by default (the coil axis z is
    horizontal); ``gravity_axis`` selects a different vertical axis.
    """

    sources: tuple = ()
    gravity_enabled: bool = False
    gravity_axis: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        if self.gravity_axis not in (0, 1, 2):
            raise ValueError("gravity_axis must be 0, 1 or 2")


# --- on-axis fields and derivatives -----------------------------------------

def _loop_axial(radius: float, prefactor: float, u):
    """Exact on-axis field of one loop at axial distance u from its plane."""
    return prefactor / np.power(radius * radius + u * u, 1.5)


def on_axis_field(pair: CoilPair, z, constants: PhysicalConstants = CONSTANTS):
    """Total axial field B_z(z) of the pair on its axis, in T.

    The opposed orientation is chosen so the central gradient is positive,
    matching the ``IdealQuadrupole`` convention B_z = +B' z.
    """
    z = np.asarray(z, dtype=float)
    c = 0.5 * constants.mu0 * pair.turns * pair.current * pair.radius ** 2
    lower = _loop_axial(pair.radius, c, z + pair.half_separation)
    upper = _loop_axial(pair.radius, c, z - pair.half_separation)
    if pair.polarity == "opposed":
        return upper - lower
    return lower + upper


def _source_on_axis(source: Source, z, constants: PhysicalConstants):
    z = np.asarray(z, dtype=float)
    if isinstance(source, CoilPair):
        return on_axis_field(source, z, constants)
    if isinstance(source, IdealQuadrupole):
        return source.axial_gradient * z
    return source.bias + 0.5 * source.axial_curvature * z * z


def axial_gradient(config: FieldConfiguration, z, h: float = FD_STEP,
                   constants: PhysicalConstants = CONSTANTS):
    """dB_z/dz on axis, in T/m; analytic for ideal models, central FD for coils."""
    if not config.sources:
        raise ValueError("field configuration has no sources")
    z = np.asarray(z, dtype=float)
    total = np.zeros_like(z)
    for s in config.sources:
        if isinstance(s, IdealQuadrupole):
            total = total + s.axial_gradient * np.ones_like(z)
        elif isinstance(s, IdealHarmonic):
            total = total + s.axial_curvature * z
        else:
            total = total + (on_axis_field(s, z + h, constants)
                             - on_axis_field(s, z - h, constants)) / (2.0 * h)
    return total


def axial_curvature(config: FieldConfiguration, z, h: float = FD_STEP,
                    constants: PhysicalConstants = CONSTANTS):
    """d^2B_z/dz^2 on axis, in T/m^2."""
    if not config.sources:
        raise ValueError("field configuration has no sources")
    z = np.asarray(z, dtype=float)
    total = np.zeros_like(z)
    for s in config.sources:
        if isinstance(s, IdealQuadrupole):
            pass
        elif isinstance(s, IdealHarmonic):
            total = total + s.axial_curvature * np.ones_like(z)
        else:
            total = total + (on_axis_field(s, z + h, constants)
                             - 2.0 * on_axis_field(s, z, constants)
                             + on_axis_field(s, z - h, constants)) / (h * h)
    return total


# --- vector fields at arbitrary positions ------------------------------------

def _coil_vector_field(pair: CoilPair, pos, h: float,
                       constants: PhysicalConstants):
    """Near-axis vector field of a coil pair at positions (..., 3)."""
    x, y, z = pos[..., 0], pos[..., 1], pos[..., 2]
    rho2 = x * x + y * y
    b = on_axis_field(pair, z, constants)
    bp = (on_axis_field(pair, z + h, constants)
          - on_axis_field(pair, z - h, constants)) / (2.0 * h)
    bpp = (on_axis_field(pair, z + h, constants) - 2.0 * b
           + on_axis_field(pair, z - h, constants)) / (h * h)
    bz = b - 0.25 * rho2 * bpp
    # B_rho = -(rho/2) B'(z); write components without dividing by rho
    out = np.empty(pos.shape, dtype=float)
    out[..., 0] = -0.5 * x * bp
    out[..., 1] = -0.5 * y * bp
    out[..., 2] = bz
    return out


def field_vector(config: FieldConfiguration, position,
                 h: float = FD_STEP,
                 constants: PhysicalConstants = CONSTANTS):
    """Total magnetic field vector at positions shaped (..., 3)."""
    pos = np.asarray(position, dtype=float)
    total = np.zeros(pos.shape, dtype=float)
    for s in config.sources:
        if isinstance(s, IdealQuadrupole):
            g = s.axial_gradient
            total[..., 0] += -0.5 * g * pos[..., 0]
            total[..., 1] += -0.5 * g * pos[..., 1]
            total[..., 2] += g * pos[..., 2]
        elif isinstance(s, IdealHarmonic):
            total[..., 2] += s.bias + 0.5 * s.axial_curvature * pos[..., 2] ** 2
        else:
            total += _coil_vector_field(s, pos, h, constants)
    return total


def field_magnitude(config: FieldConfiguration, position,
                    h: float = FD_STEP,
                    constants: PhysicalConstants = CONSTANTS):
    """|B| at positions shaped (..., 3)."""
    return np.linalg.norm(field_vector(config, position, h, constants),
                          axis=-1)


# --- potential and force ------------------------------------------------------

def _check_mf(m_f, species: AtomSpecies):
    m_f = np.asarray(m_f)
    if np.any(np.abs(m_f) > species.f_ground):
        raise ValueError(f"|m_F| must be <= F = {species.f_ground}")
    return m_f


def potential_energy(config: FieldConfiguration, position, m_f,
                     species: AtomSpecies, h: float = FD_STEP,
                     constants: PhysicalConstants = CONSTANTS):
    """U = g_F m_F mu_B |B| (+ m g y if gravity is enabled), in J.

    ``position`` is shaped (..., 3); ``m_f`` broadcasts against the leading
    shape. Weak-field seekers (g_F m_F > 0) are trapped by field minima.
    """
    m_f = _check_mf(m_f, species)
    pos = np.asarray(position, dtype=float)
    moment = species.g_f * m_f * constants.bohr_magneton
    u = moment * field_magnitude(config, pos, h, constants)
    if config.gravity_enabled:
        u = u + species.mass * constants.gravity_g * pos[..., config.gravity_axis]
    return u


def _single_ideal_force(source: Source, pos, m_f, species: AtomSpecies,
                        constants: PhysicalConstants):
    """Analytic -grad(g_F m_F mu_B |B|) for one ideal source.

    Returns (force, node_mask); node_mask marks quadrupole-node evaluations
    that were zeroed (potential non-differentiable there).
    """
    moment = species.g_f * np.asarray(m_f) * constants.bohr_magneton
    out = np.zeros(pos.shape, dtype=float)
    node = np.zeros(pos.shape[:-1], dtype=bool)
    if isinstance(source, IdealQuadrupole):
        g = source.axial_gradient
        x, y, z = pos[..., 0], pos[..., 1], pos[..., 2]
        r = np.sqrt(0.25 * (x * x + y * y) + z * z)
        node = r < NODE_EPS
        safe = np.where(node, 1.0, r)
        scale = -moment * g / safe
        out[..., 0] = scale * 0.25 * x
        out[..., 1] = scale * 0.25 * y
        out[..., 2] = scale * z
        out[node] = 0.0
    else:  # IdealHarmonic
        z = pos[..., 2]
        bz = source.bias + 0.5 * source.axial_curvature * z * z
        out[..., 2] = -moment * np.sign(bz) * source.axial_curvature * z
    return out, node


def force(config: FieldConfiguration, position, m_f, species: AtomSpecies,
          h: float = FD_STEP, constants: PhysicalConstants = CONSTANTS):
    """F = -grad U at positions (..., 3); returns (force, node_mask).

    Single ideal sources use analytic gradients; coil models (or source
    mixtures) use central finite differences of the magnetic potential with
    step ``h``. Gravity, when enabled, is added analytically.
    """
    m_f = _check_mf(m_f, species)
    pos = np.asarray(position, dtype=float)
    ideal_only = (len(config.sources) == 1
                  and isinstance(config.sources[0], (IdealQuadrupole,
                                                     IdealHarmonic)))
    if ideal_only:
        f, node = _single_ideal_force(config.sources[0], pos, m_f, species,
                                      constants)
    else:
        magnetic = FieldConfiguration(sources=config.sources,
                                      gravity_enabled=False)
        f = np.zeros(pos.shape, dtype=float)
        for axis in range(3):
            step = np.zeros(3)
            step[axis] = h
            up = potential_energy(magnetic, pos + step, m_f, species, h,
                                  constants)
            dn = potential_energy(magnetic, pos - step, m_f, species, h,
                                  constants)
            f[..., axis] = -(up - dn) / (2.0 * h)
        node = field_magnitude(magnetic, pos, h, constants) == 0.0
        f[node] = 0.0
    if config.gravity_enabled:
        f[..., config.gravity_axis] -= species.mass * constants.gravity_g
    return f, node
