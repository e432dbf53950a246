"""Classical phase-space representation of the atom cloud.

An ``Ensemble`` is a value-like bundle of position/velocity/spin arrays;
every operation returns a new ensemble and is a pure function of its inputs
and the sampling seed, so repeated runs are bit-identical. Propagation under
pulsed fields uses a fixed-step velocity-Verlet (symplectic), which is what
makes the phase-space-area (Liouville) checks hold to Monte Carlo accuracy.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import fields, kernels
from .constants import CONSTANTS, AtomSpecies, PhysicalConstants
from .fields import FieldConfiguration, IdealQuadrupole

#: default integrator step cap (s) for pulsed-field propagation
MAX_STEP = 10e-6


@dataclass(frozen=True)
class Atom:
    """Single-atom view into an ensemble."""

    position: np.ndarray
    velocity: np.ndarray
    m_f: int
    node_touched: bool


@dataclass(frozen=True)
class ThermalSpec:
    """Initial cloud description: per-axis temperatures/sizes plus spins.

    ``spin_populations`` maps m_F to a nonnegative weight (normalized at
    construction). ``spin_position_correlation`` in [-1, 1] rank-correlates
    |m_F| with radial position through a Gaussian copula; positive values
    concentrate the high-|m_F| atoms toward the cloud center, which is the
    sense needed to reproduce an anomalously narrow kicked stripe.
    """

    temperature: tuple          # K, per axis
    rms_radius: tuple           # m, per axis
    spin_populations: dict = None
    spin_position_correlation: float = 0.0

    def __post_init__(self):
        temp = tuple(float(t) for t in np.broadcast_to(self.temperature, 3))
        radius = tuple(float(r) for r in np.broadcast_to(self.rms_radius, 3))
        if any(t < 0.0 for t in temp):
            raise ValueError("temperatures must be >= 0")
        if any(r <= 0.0 for r in radius):
            raise ValueError("rms radii must be positive")
        object.__setattr__(self, "temperature", temp)
        object.__setattr__(self, "rms_radius", radius)
        pops = self.spin_populations or {0: 1.0}
        if any(w < 0.0 for w in pops.values()):
            raise ValueError("spin weights must be >= 0")
        total = float(sum(pops.values()))
        if total <= 0.0:
            raise ValueError("spin weights must not all vanish")
        object.__setattr__(self, "spin_populations",
                           {int(k): float(v) / total for k, v in sorted(pops.items())})
        if not -1.0 <= self.spin_position_correlation <= 1.0:
            raise ValueError("spin_position_correlation must be in [-1, 1]")


@dataclass(frozen=True)
class Ensemble:
    """Cloud sample: arrays of shape (n, 3), (n, 3), (n,), (n,)."""

    positions: np.ndarray
    velocities: np.ndarray
    m_f: np.ndarray
    node_touched: np.ndarray
    species: AtomSpecies
    seed: int
    time: float = 0.0

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def atom(self, i: int) -> Atom:
        return Atom(self.positions[i].copy(), self.velocities[i].copy(),
                    int(self.m_f[i]), bool(self.node_touched[i]))

    def to_csv(self, path):
        """Snapshot export: header x,y,z,vx,vy,vz,mF; SI units."""
        with open(path, "w") as f:
            f.write("x,y,z,vx,vy,vz,mF\n")
            for i in range(self.n):
                row = [*self.positions[i], *self.velocities[i]]
                f.write(",".join(repr(float(v)) for v in row)
                        + f",{int(self.m_f[i])}\n")


def _correlated_spin_assignment(rng, m_f_draw, radii, correlation):
    """Reassign drawn m_F values so |m_F| rank-follows the copula latent.

    The spin multiset is preserved exactly (marginal populations are not
    altered); only the pairing with atoms changes. Positive correlation
    places large |m_F| at small radius.
    """
    n = radii.shape[0]
    ranks = np.empty(n, dtype=float)
    ranks[np.argsort(radii, kind="stable")] = np.arange(n)
    from scipy.special import ndtri
    z_radius = ndtri((ranks + 0.5) / n)
    rho = correlation
    latent = -rho * z_radius + math.sqrt(max(0.0, 1.0 - rho * rho)) \
        * rng.standard_normal(n)
    spin_order = np.lexsort((rng.random(n), np.abs(m_f_draw)))
    out = np.empty_like(m_f_draw)
    out[np.argsort(latent, kind="stable")] = m_f_draw[spin_order]
    return out


def sample_ensemble(spec: ThermalSpec, n: int, species: AtomSpecies,
                    seed: int,
                    constants: PhysicalConstants = CONSTANTS) -> Ensemble:
    """Draw an n-atom cloud; deterministic in (spec, n, species, seed)."""
    if n < 1:
        raise ValueError("need at least one atom")
    rng = np.random.default_rng(seed)
    sigma_x = np.asarray(spec.rms_radius, dtype=float)
    sigma_v = np.sqrt(constants.k_boltzmann * np.asarray(spec.temperature)
                      / species.mass)
    positions = rng.standard_normal((n, 3)) * sigma_x
    velocities = rng.standard_normal((n, 3)) * sigma_v
    values = np.array(list(spec.spin_populations.keys()), dtype=np.int64)
    weights = np.array(list(spec.spin_populations.values()), dtype=float)
    m_f = rng.choice(values, size=n, p=weights)
    if spec.spin_position_correlation != 0.0 and len(values) > 1:
        radii = np.linalg.norm(positions, axis=1)
        m_f = _correlated_spin_assignment(rng, m_f, radii,
                                          spec.spin_position_correlation)
    return Ensemble(positions=positions, velocities=velocities, m_f=m_f,
                    node_touched=np.zeros(n, dtype=bool), species=species,
                    seed=seed, time=0.0)


def free_expansion(e: Ensemble, duration: float, gravity_g: float = 0.0,
                   gravity_axis: int = 1) -> Ensemble:
    """Ballistic flight: x += v t, plus the parabolic fall when gravity is on.

    ``gravity_g`` > 0 accelerates atoms toward negative ``gravity_axis``.
    """
    if duration < 0.0:
        raise ValueError("duration must be >= 0")
    pos = e.positions + e.velocities * duration
    vel = e.velocities.copy()
    if gravity_g != 0.0:
        pos[:, gravity_axis] -= 0.5 * gravity_g * duration * duration
        vel[:, gravity_axis] -= gravity_g * duration
    return replace(e, positions=pos, velocities=vel, time=e.time + duration)


def _resolve_steps(duration: float, step: float | None):
    if step is None:
        step = min(duration / 100.0, MAX_STEP)
    if step <= 0.0 or step > duration:
        raise ValueError("step must be in (0, duration]")
    nsteps = max(1, int(round(duration / step)))
    return nsteps, duration / nsteps


def apply_kick(e: Ensemble, config: FieldConfiguration, duration: float,
               step: float | None = None,
               constants: PhysicalConstants = CONSTANTS) -> Ensemble:
    """Integrate each atom through a square field pulse (velocity-Verlet).

    Gravity is included when the configuration enables it; m_F is conserved.
    A single-quadrupole configuration takes the fused kernel fast path.
    """
    if duration <= 0.0:
        raise ValueError("duration must be positive")
    nsteps, dt = _resolve_steps(duration, step)
    pos = e.positions.copy()
    vel = e.velocities.copy()
    touched = e.node_touched.copy()
    g_accel = np.zeros(3)
    if config.gravity_enabled:
        g_accel[config.gravity_axis] = -constants.gravity_g

    quad_only = (len(config.sources) == 1
                 and isinstance(config.sources[0], IdealQuadrupole))
    if quad_only:
        moment_over_mass = (e.species.g_f * e.m_f.astype(float)
                            * constants.bohr_magneton / e.species.mass)
        touched |= kernels.leapfrog_quadrupole(
            pos, vel, moment_over_mass, config.sources[0].axial_gradient,
            g_accel, dt, nsteps, fields.NODE_EPS)
    else:
        magnetic = FieldConfiguration(sources=config.sources,
                                      gravity_enabled=False)
        inv_m = 1.0 / e.species.mass

        def accel(p):
            if magnetic.sources:
                f, node = fields.force(magnetic, p, e.m_f, e.species,
                                       constants=constants)
            else:
                f = np.zeros_like(p)
                node = np.zeros(p.shape[0], dtype=bool)
            return f * inv_m + g_accel, node

        a, node = accel(pos)
        touched |= node
        for _ in range(nsteps):
            pos += vel * dt + 0.5 * a * dt * dt
            a_new, node = accel(pos)
            touched |= node
            vel += 0.5 * (a + a_new) * dt
            a = a_new

    return replace(e, positions=pos, velocities=vel, node_touched=touched,
                   time=e.time + duration)


def impulse_kick(e: Ensemble, config: FieldConfiguration, duration: float,
                 constants: PhysicalConstants = CONSTANTS) -> Ensemble:
    """First-order kick: dv = F(x)/m * duration with positions frozen."""
    if duration <= 0.0:
        raise ValueError("duration must be positive")
    f, node = fields.force(config, e.positions, e.m_f, e.species,
                           constants=constants)
    vel = e.velocities + f * (duration / e.species.mass)
    return replace(e, velocities=vel, node_touched=e.node_touched | node)


def temperature(e: Ensemble, axis: int,
                constants: PhysicalConstants = CONSTANTS) -> float:
    """T = m Var(v_axis)/k_B (population variance).

    The sample is shifted by its first element before the variance so a
    cloud of identical velocities reads exactly zero.
    """
    if e.n < 2:
        raise ValueError("need at least two atoms")
    v = e.velocities[:, axis]
    var = float(np.var(v - v[0]))
    return e.species.mass * var / constants.k_boltzmann


def cloud_size(e: Ensemble, axis: int) -> float:
    """Centered rms size along one axis, in m."""
    if e.n < 2:
        raise ValueError("need at least two atoms")
    x = e.positions[:, axis]
    return float(np.sqrt(np.var(x - x[0])))


def phase_space_covariance(e: Ensemble) -> np.ndarray:
    """6x6 covariance of (x, y, z, vx, vy, vz), population normalization."""
    if e.n < 2:
        raise ValueError("need at least two atoms")
    stacked = np.hstack([e.positions, e.velocities])
    return np.cov(stacked.T, bias=True)


def phase_space_area(e: Ensemble, axis: int) -> float:
    """sqrt(det Cov(x_axis, v_axis)); invariant under Hamiltonian flow."""
    cov = np.cov(np.vstack([e.positions[:, axis], e.velocities[:, axis]]),
                 bias=True)
    return float(np.sqrt(max(np.linalg.det(cov), 0.0)))
