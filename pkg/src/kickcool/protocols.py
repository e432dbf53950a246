"""Composed cooling experiments and their analytic predictions.

A kick experiment is sample -> free expansion (t_f) -> field pulse (t_k)
-> time-of-flight curve; scans repeat it over kick strengths or expansion
times with per-point seeds derived deterministically from the master seed,
so parallel and serial execution agree bit for bit.

Kick strength is parameterized as the on-axis velocity impulse delta-v
delivered to a stretched-state (m_F = 3) test atom, which makes scans
field-shape agnostic; the gradient is solved from delta-v.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import tof
from .constants import CONSTANTS, AtomSpecies, PhysicalConstants, RB85
from .ensemble import (Ensemble, ThermalSpec, apply_kick, cloud_size,
                       free_expansion, sample_ensemble, temperature)
from .fields import FieldConfiguration, IdealQuadrupole


@dataclass(frozen=True)
class KickSchedule:
    """Timing and field of one kick experiment."""

    expansion_time: float        # s, free expansion before the kick
    kick_duration: float         # s
    field: FieldConfiguration
    post_expansion_times: tuple  # s, strictly increasing TOF delays
    kick_step: float | None = None
    axis: int = 2                # observation axis (coil axis by default)

    def __post_init__(self):
        if self.expansion_time < 0.0:
            raise ValueError("expansion_time must be >= 0")
        if self.kick_duration <= 0.0:
            raise ValueError("kick_duration must be positive")
        times = tuple(float(t) for t in self.post_expansion_times)
        if len(times) < 3 or any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("post_expansion_times must be >= 3 increasing")
        object.__setattr__(self, "post_expansion_times", times)


@dataclass(frozen=True)
class ExperimentResult:
    """Per-axis before/after observables of one kick experiment."""

    temperatures_before: np.ndarray   # K, (3,)
    temperatures_after: np.ndarray
    sizes_before: np.ndarray          # m, (3,)
    sizes_after: np.ndarray           # m, at the end of the kick
    expansion_curve: tof.ExpansionCurve
    fit: tof.TemperatureFit
    axis: int

    @property
    def cooling_ratio(self) -> np.ndarray:
        out = np.full(3, np.nan)
        np.divide(self.temperatures_after, self.temperatures_before,
                  out=out, where=self.temperatures_before > 0.0)
        return out


@dataclass(frozen=True)
class ScanPoint:
    param: float
    result: ExperimentResult


@dataclass(frozen=True)
class ScanResult:
    points: tuple

    def params(self):
        return np.array([p.param for p in self.points])

    def ratios(self):
        return np.array([p.result.cooling_ratio[p.result.axis]
                         for p in self.points])

    def to_csv(self, path):
        with open(path, "w") as f:
            f.write("param,T_before,T_after,ratio,sigma_before,sigma_after,"
                    "fit_T,fit_err\n")
            for p in self.points:
                r = p.result
                ax = r.axis
                row = [p.param, r.temperatures_before[ax],
                       r.temperatures_after[ax], r.cooling_ratio[ax],
                       r.sizes_before[ax], r.sizes_after[ax],
                       r.fit.temperature, r.fit.temperature_error]
                f.write(",".join(repr(float(v)) for v in row) + "\n")


# --- analytic predictions -----------------------------------------------------

def optimal_harmonic_duration(omega: float, t_f: float) -> float:
    """Kick duration satisfying t_f t_k = 1/omega^2."""
    if omega <= 0.0 or t_f <= 0.0:
        raise ValueError("omega and t_f must be positive")
    return 1.0 / (omega * omega * t_f)


def predicted_cooling_ratio(r0: float, v0: float, t_f: float) -> float:
    """Phase-space prediction r0^2 / (r0^2 + (v0 t_f)^2)."""
    if r0 <= 0.0 or v0 <= 0.0 or t_f < 0.0:
        raise ValueError("r0 and v0 must be positive, t_f >= 0")
    return r0 * r0 / (r0 * r0 + (v0 * t_f) ** 2)


def optimal_quadrupole_kick(v_rms: float) -> float:
    """Best fixed-magnitude impulse: the 1D Gaussian mean speed."""
    if v_rms <= 0.0:
        raise ValueError("v_rms must be positive")
    return math.sqrt(2.0 / math.pi) * v_rms


def quadrupole_ke_ratio() -> float:
    """Minimum mean-KE ratio of a point-source 1D quadrupole kick, 1 - 2/pi.

    The analytic point-source optimum corresponds to reducing the mean
    kinetic energy by a factor 1/(1 - 2/pi) ~ 2.75.
    """
    return 1.0 - 2.0 / math.pi


def adiabatic_time_comparison(cooling_factor: float, secular_period: float):
    """(kick protocol time, adiabatic expansion time) = (sqrt(N), N) tau0."""
    if cooling_factor < 1.0 or secular_period <= 0.0:
        raise ValueError("need cooling_factor >= 1 and secular_period > 0")
    return (math.sqrt(cooling_factor) * secular_period,
            cooling_factor * secular_period)


def delta_v_to_gradient(delta_v: float, t_k: float,
                        species: AtomSpecies = RB85,
                        constants: PhysicalConstants = CONSTANTS) -> float:
    """Quadrupole gradient delivering delta-v to an on-axis m_F=3 test atom."""
    moment = species.g_f * species.f_ground * constants.bohr_magneton
    return delta_v * species.mass / (moment * t_k)


def derived_seed(master: int, index: int) -> int:
    """Deterministic per-scan-point seed; independent of execution order."""
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0])


# --- experiments ---------------------------------------------------------------

def _measure(e: Ensemble):
    temps = np.array([temperature(e, a) for a in range(3)])
    sizes = np.array([cloud_size(e, a) for a in range(3)])
    return temps, sizes


def run_kick_experiment(spec: ThermalSpec, schedule: KickSchedule,
                        gravity: bool, n: int, seed: int,
                        species: AtomSpecies = RB85,
                        constants: PhysicalConstants = CONSTANTS
                        ) -> ExperimentResult:
    """Sample, expand, kick, and read the cloud out via a TOF curve.

    ``gravity`` turns the fall on during the free flight and the kick (the
    cloud starts at the field node and is not re-centered).
    """
    e = sample_ensemble(spec, n, species, seed, constants)
    temps_before, sizes_before = _measure(e)
    g = constants.gravity_g if gravity else 0.0
    config = replace(schedule.field, gravity_enabled=gravity)
    e = free_expansion(e, schedule.expansion_time, gravity_g=g,
                       gravity_axis=config.gravity_axis)
    e = apply_kick(e, config, schedule.kick_duration, step=schedule.kick_step,
                   constants=constants)
    temps_after, sizes_after = _measure(e)
    curve = tof.expansion_curve(e, schedule.post_expansion_times,
                                axis=schedule.axis)
    fit = tof.fit_temperature(curve, species, constants)
    return ExperimentResult(temperatures_before=temps_before,
                            temperatures_after=temps_after,
                            sizes_before=sizes_before,
                            sizes_after=sizes_after,
                            expansion_curve=curve, fit=fit,
                            axis=schedule.axis)


def _schedule_with_strength(template: KickSchedule, delta_v: float,
                            species: AtomSpecies,
                            constants: PhysicalConstants) -> KickSchedule:
    if len(template.field.sources) != 1 or not isinstance(
            template.field.sources[0], IdealQuadrupole):
        raise ValueError("strength scans expect a single quadrupole source")
    gradient = delta_v_to_gradient(delta_v, template.kick_duration, species,
                                   constants)
    field = replace(template.field, sources=(IdealQuadrupole(gradient),))
    return replace(template, field=field)


def scan_kick_strength(spec: ThermalSpec, schedule_template: KickSchedule,
                       strengths, gravity: bool, n: int, seed: int,
                       species: AtomSpecies = RB85,
                       constants: PhysicalConstants = CONSTANTS) -> ScanResult:
    """One kick experiment per delta-v; per-point seeds derive from (seed, i)."""
    strengths = list(strengths)
    if not strengths:
        raise ValueError("need at least one strength")
    points = []
    for i, dv in enumerate(strengths):
        schedule = _schedule_with_strength(schedule_template, dv, species,
                                           constants)
        result = run_kick_experiment(spec, schedule, gravity, n,
                                     derived_seed(seed, i), species,
                                     constants)
        points.append(ScanPoint(param=float(dv), result=result))
    return ScanResult(points=tuple(points))


def scan_expansion_ratio(spec: ThermalSpec, expansion_times,
                         schedule_template: KickSchedule, gravity: bool,
                         n: int, seed: int, refine_points: int = 9,
                         species: AtomSpecies = RB85,
                         constants: PhysicalConstants = CONSTANTS
                         ) -> ScanResult:
    """Cooling ratio vs expansion ratio with the kick matched per t_f.

    Harmonic templates get the matched duration t_k = 1/(omega^2 t_f);
    quadrupole templates get their strength re-optimized with a small
    deterministic bracket scan around the analytic point-source optimum
    (the bracket is generous because gravity shifts the true optimum up).
    The scan parameter reported is the expansion ratio r_f/r_0.
    """
    expansion_times = list(expansion_times)
    if not expansion_times:
        raise ValueError("need at least one expansion time")
    ax = schedule_template.axis
    source = schedule_template.field.sources[0]
    harmonic = not isinstance(source, IdealQuadrupole)
    v_rms = math.sqrt(constants.k_boltzmann
                      * spec.temperature[ax] / species.mass)
    base_dv = optimal_quadrupole_kick(v_rms)
    factors = np.linspace(0.6, 3.4, refine_points)
    points = []
    for i, t_f in enumerate(expansion_times):
        template = replace(schedule_template, expansion_time=float(t_f))
        point_seed = derived_seed(seed, i)
        if harmonic:
            moment = species.g_f * species.f_ground * constants.bohr_magneton
            omega_sq = moment * source.axial_curvature / species.mass
            t_k = optimal_harmonic_duration(math.sqrt(omega_sq), float(t_f))
            schedule = replace(template, kick_duration=t_k)
            best = run_kick_experiment(spec, schedule, gravity, n,
                                       point_seed, species, constants)
        else:
            best = None
            for factor in factors:
                schedule = _schedule_with_strength(template, factor * base_dv,
                                                   species, constants)
                result = run_kick_experiment(spec, schedule, gravity, n,
                                             point_seed, species, constants)
                if best is None or (result.temperatures_after[ax]
                                    < best.temperatures_after[ax]):
                    best = result
        ratio = math.sqrt(spec.rms_radius[ax] ** 2
                          + (v_rms * t_f) ** 2) / spec.rms_radius[ax]
        points.append(ScanPoint(param=float(ratio), result=best))
    return ScanResult(points=tuple(points))


def magnetic_trap_spin_filter(e: Ensemble, gradient: float,
                              constants: PhysicalConstants = CONSTANTS
                              ) -> Ensemble:
    """Keep only atoms the gradient can hold against gravity.

    Retains exactly the atoms with g_F m_F mu_B B' > m g; positions and
    velocities are untouched. The result may be empty.
    """
    if gradient <= 0.0:
        raise ValueError("gradient must be positive")
    support = (e.species.g_f * e.m_f * constants.bohr_magneton * gradient)
    keep = support > e.species.mass * constants.gravity_g
    return replace(e, positions=e.positions[keep],
                   velocities=e.velocities[keep], m_f=e.m_f[keep],
                   node_touched=e.node_touched[keep])


def spin_filter_threshold(m_f: int, species: AtomSpecies = RB85,
                          constants: PhysicalConstants = CONSTANTS) -> float:
    """Minimum gradient (T/m) holding sublevel m_F against gravity."""
    if m_f <= 0:
        raise ValueError("only weak-field seekers can be held")
    return (species.mass * constants.gravity_g
            / (species.g_f * m_f * constants.bohr_magneton))


@dataclass(frozen=True)
class MultispinResult:
    """Per-sublevel outcomes of a kick on a multi-spin cloud."""

    per_spin: dict                      # m_F -> ExperimentResult
    profile_positions: np.ndarray       # m, bin centers along the kick axis
    profile_counts: np.ndarray
    bimodal: tof.BimodalFit
    profile_delay: float


def molasses_multispin_experiment(spec: ThermalSpec, schedule: KickSchedule,
                                  n: int, seed: int,
                                  profile_delay: float | None = None,
                                  profile_bins: int = 101,
                                  species: AtomSpecies = RB85,
                                  constants: PhysicalConstants = CONSTANTS
                                  ) -> MultispinResult:
    """Kick a cloud holding several m_F classes and decompose the outcome.

    Every class propagates under its own magnetic potential (the kick is
    applied to all atoms at once; the force already depends on m_F). The
    summed spatial profile at ``profile_delay`` after the kick is fitted
    with a two-Gaussian mixture.
    """
    populated = [m for m, w in spec.spin_populations.items() if w > 0.0]
    if len(populated) < 2:
        raise ValueError("need at least two populated spin states")
    e = sample_ensemble(spec, n, species, seed, constants)
    ax = schedule.axis
    e_expanded = free_expansion(e, schedule.expansion_time)
    e_kicked = apply_kick(e_expanded, schedule.field, schedule.kick_duration,
                          step=schedule.kick_step, constants=constants)

    per_spin = {}
    for m in populated:
        sel = e.m_f == m
        if np.sum(sel) < 16:
            continue
        before = replace(e, positions=e.positions[sel],
                         velocities=e.velocities[sel], m_f=e.m_f[sel],
                         node_touched=e.node_touched[sel])
        after = replace(e_kicked, positions=e_kicked.positions[sel],
                        velocities=e_kicked.velocities[sel],
                        m_f=e_kicked.m_f[sel],
                        node_touched=e_kicked.node_touched[sel])
        temps_before, sizes_before = _measure(before)
        temps_after, sizes_after = _measure(after)
        curve = tof.expansion_curve(after, schedule.post_expansion_times,
                                    axis=ax)
        fit = tof.fit_temperature(curve, species, constants)
        per_spin[m] = ExperimentResult(temperatures_before=temps_before,
                                       temperatures_after=temps_after,
                                       sizes_before=sizes_before,
                                       sizes_after=sizes_after,
                                       expansion_curve=curve, fit=fit,
                                       axis=ax)

    if profile_delay is None:
        profile_delay = schedule.post_expansion_times[-1]
    imaged = free_expansion(e_kicked, profile_delay)
    x = imaged.positions[:, ax]
    span = 4.0 * float(np.sqrt(np.var(x)))
    counts, edges = np.histogram(x, bins=profile_bins,
                                 range=(x.mean() - span, x.mean() + span))
    centers = 0.5 * (edges[:-1] + edges[1:])
    narrow_guess = min(cloud_size(e, ax), 0.3 * span)
    broad_guess = 0.5 * span
    bimodal = tof.fit_bimodal(centers, counts.astype(float), narrow_guess,
                              broad_guess)
    return MultispinResult(per_spin=per_spin, profile_positions=centers,
                           profile_counts=counts.astype(float),
                           bimodal=bimodal, profile_delay=float(profile_delay))
