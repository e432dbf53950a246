"""The V-shaped magnetic trap with a movable Gaussian dipole barrier.

V(x, t) = slope * |x| + height * sum_i w_i exp(-2 (x - x_c(t) - d_i)^2 / w^2)

The exp(-2 r^2/w^2) convention treats the waist as the 1/e^2 intensity
radius of the barrier beam. The barrier center x_c(t) follows a
piecewise-linear trajectory; an optional dither profile (offsets with
normalized weights) models a rapidly shifted focus whose time average the
atoms see.
"""

import math
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class PotentialSpec:
    v_slope: float                 # J/m, magnetic trap slope (alpha)
    barrier_height: float          # J, barrier peak height (U0)
    barrier_waist: float           # m, 1/e^2 intensity radius
    trajectory_times: tuple        # s, nondecreasing
    trajectory_positions: tuple    # m
    dither: tuple = ()             # ((offset m, weight), ...)

    def __post_init__(self):
        if self.v_slope < 0.0:
            raise ValueError("v_slope must be >= 0")
        if self.barrier_height < 0.0:
            raise ValueError("barrier_height must be >= 0")
        if self.barrier_waist <= 0.0:
            raise ValueError("barrier_waist must be positive")
        times = tuple(float(t) for t in self.trajectory_times)
        pos = tuple(float(p) for p in self.trajectory_positions)
        if len(times) != len(pos) or not times:
            raise ValueError("trajectory times/positions must match")
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("trajectory times must be nondecreasing")
        object.__setattr__(self, "trajectory_times", times)
        object.__setattr__(self, "trajectory_positions", pos)
        if self.dither:
            comps = tuple((float(o), float(w)) for o, w in self.dither)
            total = sum(w for _, w in comps)
            if total <= 0.0:
                raise ValueError("dither weights must not all vanish")
            object.__setattr__(
                self, "dither", tuple((o, w / total) for o, w in comps))

    @classmethod
    def static(cls, v_slope, barrier_height, barrier_waist, barrier_center,
               dither=()):
        return cls(v_slope=v_slope, barrier_height=barrier_height,
                   barrier_waist=barrier_waist, trajectory_times=(0.0,),
                   trajectory_positions=(barrier_center,), dither=dither)

    @classmethod
    def linear_sweep(cls, v_slope, barrier_height, barrier_waist,
                     start, stop, speed, t0=0.0, dither=()):
        """Constant-speed sweep from start to stop."""
        if speed <= 0.0:
            raise ValueError("speed must be positive")
        duration = abs(stop - start) / speed
        return cls(v_slope=v_slope, barrier_height=barrier_height,
                   barrier_waist=barrier_waist,
                   trajectory_times=(t0, t0 + duration),
                   trajectory_positions=(start, stop), dither=dither)

    def with_height(self, barrier_height: float) -> "PotentialSpec":
        return replace(self, barrier_height=barrier_height)

    @property
    def is_static(self) -> bool:
        return len(set(self.trajectory_positions)) == 1

    @property
    def sweep_duration(self) -> float:
        return self.trajectory_times[-1] - self.trajectory_times[0]

    def barrier_center(self, t):
        return np.interp(t, self.trajectory_times, self.trajectory_positions)

    def components(self, t):
        """(center, effective height) per dither component at time t."""
        xc = float(self.barrier_center(t))
        if not self.dither:
            return ((xc, self.barrier_height),)
        return tuple((xc + off, w * self.barrier_height)
                     for off, w in self.dither)


def potential_at(spec: PotentialSpec, x, t: float = 0.0):
    """Total potential in J at position(s) x and time t."""
    x = np.asarray(x, dtype=float)
    v = spec.v_slope * np.abs(x)
    w2 = spec.barrier_waist ** 2
    for center, height in spec.components(t):
        if height != 0.0:
            v = v + height * np.exp(-2.0 * (x - center) ** 2 / w2)
    return v


@dataclass(frozen=True)
class WellInfo:
    """Local-minimum pocket created by the barrier on the trap slope."""

    peak_position: float
    peak_energy: float
    min_position: float
    min_energy: float      # absolute value at the minimum
    outer_position: float  # where V climbs back to the peak energy
    depth: float           # peak_energy - min_energy

    @property
    def region(self) -> tuple:
        lo, hi = sorted((self.peak_position, self.outer_position))
        return lo, hi


def find_well(spec: PotentialSpec, t: float = 0.0,
              samples: int = 4001) -> WellInfo | None:
    """Locate the barrier-side pocket, or None when no local minimum forms.

    The pocket sits on the far side of the barrier peak relative to the
    trap center; both its depth below the peak and the absolute potential
    at its minimum are reported.
    """
    xc = float(spec.barrier_center(t))
    w = spec.barrier_waist
    direction = 1.0 if xc >= 0.0 else -1.0
    # signed distance s from the barrier center, increasing away from the trap
    s = np.linspace(-1.5 * w, 8.0 * w, samples)
    xs = xc + direction * s
    vs = potential_at(spec, xs, t)
    dv = np.diff(vs)
    rising = dv > 0.0
    # local maxima/minima as sign changes of the outward derivative
    maxima = np.nonzero(rising[:-1] & ~rising[1:])[0] + 1
    minima = np.nonzero(~rising[:-1] & rising[1:])[0] + 1
    if len(maxima) == 0:
        return None
    i_peak = int(maxima[0])
    after = minima[minima > i_peak]
    if len(after) == 0:
        return None
    i_min = int(after[0])
    v_peak, v_min = float(vs[i_peak]), float(vs[i_min])
    if v_peak - v_min <= 0.0:
        return None
    # outer wall: first return to the peak energy beyond the minimum; for a
    # tall barrier that point lies far up the bare slope, outside the scan
    above = np.nonzero(vs[i_min:] >= v_peak)[0]
    if len(above) > 0:
        x_outer = float(xs[i_min + int(above[0])])
    elif spec.v_slope > 0.0:
        x_outer = direction * v_peak / spec.v_slope
    else:
        return None
    return WellInfo(peak_position=float(xs[i_peak]), peak_energy=v_peak,
                    min_position=float(xs[i_min]), min_energy=v_min,
                    outer_position=x_outer,
                    depth=v_peak - v_min)


def barrier_peak_position(spec: PotentialSpec, t: float = 0.0) -> float:
    """Position of the local potential maximum near the barrier."""
    well = find_well(spec, t)
    if well is not None:
        return well.peak_position
    xc = float(spec.barrier_center(t))
    xs = np.linspace(xc - 3.0 * spec.barrier_waist,
                     xc + 3.0 * spec.barrier_waist, 2001)
    vs = potential_at(spec, xs, t)
    return float(xs[np.argmax(vs)])


def local_trap_frequency(spec: PotentialSpec, mass: float,
                         t: float = 0.0) -> float:
    """Harmonic frequency (rad/s) of the pocket, from a local quadratic fit."""
    well = find_well(spec, t)
    if well is None:
        raise ValueError("no pocket exists for this configuration")
    h = 0.02 * spec.barrier_waist
    x0 = well.min_position
    v = potential_at(spec, np.array([x0 - h, x0, x0 + h]), t)
    curvature = (v[0] - 2.0 * v[1] + v[2]) / (h * h)
    if curvature <= 0.0:
        raise ValueError("pocket curvature not positive")
    return math.sqrt(curvature / mass)
