"""Time-dependent Schroedinger propagation by the spectral split-operator.

Each step applies exp(-i V dt/2hbar) exp(-i T dt/hbar) exp(-i V dt/2hbar)
with the time-dependent barrier sampled at the step midpoint. An optional
absorbing layer (cos^2-shaped damping rate at the domain edges) removes
outgoing flux; the probability it eats is accumulated in an ``absorbed``
register so stored norm + absorbed stays 1.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import fft as sp_fft

from .. import kernels
from ..constants import CONSTANTS, RB85
from .grid import Grid1D
from .potential import PotentialSpec

#: safety factor in the step-size bound dt < safety * m dx^2 / (pi hbar)
STABILITY_SAFETY = 1.0

#: default absorber damping rate at the domain edge, 1/s
ABSORBER_RATE = 1e4


@dataclass(frozen=True)
class Absorber:
    """cos^2 damping-rate ramps of fractional width at both domain edges."""

    width_fraction: float = 0.1
    rate: float = ABSORBER_RATE

    def damping_profile(self, grid: Grid1D) -> np.ndarray:
        """Damping rate (1/s) per grid point; zero in the interior."""
        span = grid.x_max - grid.x_min
        width = self.width_fraction * span
        profile = np.zeros(grid.n)
        left = grid.x < grid.x_min + width
        right = grid.x > grid.x_max - width
        s_left = (grid.x[left] - grid.x_min) / width
        s_right = (grid.x_max - grid.x[right]) / width
        profile[left] = self.rate * np.cos(0.5 * math.pi * s_left) ** 2
        profile[right] = self.rate * np.cos(0.5 * math.pi * s_right) ** 2
        return profile


@dataclass(frozen=True)
class Wavefunction:
    """Complex amplitudes on a grid plus the absorbed-probability register."""

    psi: np.ndarray
    grid: Grid1D
    time: float = 0.0
    absorbed: float = 0.0

    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.grid.dx)

    def probability_in(self, x_lo: float, x_hi: float) -> float:
        sel = (self.grid.x >= x_lo) & (self.grid.x <= x_hi)
        return float(np.sum(np.abs(self.psi[sel]) ** 2) * self.grid.dx)

    def probability_beyond(self, x0: float) -> float:
        sel = self.grid.x > x0
        return float(np.sum(np.abs(self.psi[sel]) ** 2) * self.grid.dx)

    def expectation_x(self) -> float:
        return float(np.sum(self.grid.x * np.abs(self.psi) ** 2)
                     * self.grid.dx)

    def rms_width(self) -> float:
        mean = self.expectation_x()
        var = float(np.sum((self.grid.x - mean) ** 2 * np.abs(self.psi) ** 2)
                    * self.grid.dx)
        return math.sqrt(var)

    def to_csv(self, path):
        with open(path, "w") as f:
            f.write("x,re,im\n")
            for x, a in zip(self.grid.x, self.psi):
                f.write(f"{float(x)!r},{float(a.real)!r},{float(a.imag)!r}\n")


def gaussian_packet(grid: Grid1D, x0: float, sigma: float,
                    k0: float = 0.0) -> Wavefunction:
    """Normalized minimum-uncertainty packet (position width sigma)."""
    x = grid.x
    psi = np.exp(-(x - x0) ** 2 / (4.0 * sigma ** 2) + 1j * k0 * x)
    psi = psi.astype(np.complex128)
    psi /= math.sqrt(float(np.sum(np.abs(psi) ** 2)) * grid.dx)
    return Wavefunction(psi=psi, grid=grid)


def stability_limit(grid: Grid1D, mass: float,
                    hbar: float = CONSTANTS.hbar) -> float:
    """Largest allowed step: safety * m dx^2 / (pi hbar)."""
    return STABILITY_SAFETY * mass * grid.dx ** 2 / (math.pi * hbar)


def check_step(grid: Grid1D, dt: float, mass: float,
               hbar: float = CONSTANTS.hbar):
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    limit = stability_limit(grid, mass, hbar)
    if dt >= limit:
        raise ValueError(
            f"dt={dt:g} exceeds the spectral step bound {limit:g} s")


class SplitOperator:
    """Reusable batched stepper for one (grid, spec, dt) combination.

    Holds the precomputed kinetic and static-potential phases; ``run``
    advances a (k, n) block of states in place and returns the absorbed
    probability per state. Static barriers are folded into the
    precomputed phase so their steps involve no exponentials.
    """

    def __init__(self, spec: PotentialSpec, grid: Grid1D, dt: float,
                 mass: float = RB85.mass, hbar: float = CONSTANTS.hbar,
                 absorber: Absorber | None = None, workers: int = 1,
                 extra_potential: np.ndarray | None = None,
                 kinetic: str = "spectral"):
        check_step(grid, dt, mass, hbar)
        self.spec = spec
        self.grid = grid
        self.dt = dt
        self.mass = mass
        self.hbar = hbar
        self.workers = workers
        k = grid.wavenumbers
        if kinetic == "spectral":
            kin_energy = hbar * hbar * k * k / (2.0 * mass)
        elif kinetic == "fd":
            # central-difference dispersion: makes the FD eigensolver's
            # states exactly stationary on the same grid
            kin_energy = (hbar * hbar / (mass * grid.dx ** 2)
                          * (1.0 - np.cos(k * grid.dx)))
        else:
            raise ValueError("kinetic must be 'spectral' or 'fd'")
        self.kinetic_phase = np.exp(-1j * kin_energy / hbar * dt)
        base = spec.v_slope * np.abs(grid.x)
        if extra_potential is not None:
            base = base + np.asarray(extra_potential, dtype=float)
        self.static_half_phase = np.exp(-0.5j * base * dt / hbar)
        self.static_barrier = spec.is_static and spec.barrier_height > 0.0
        if self.static_barrier:
            # fold the barrier into the static phase once
            from .potential import potential_at
            v = potential_at(spec, grid.x, spec.trajectory_times[0])
            if extra_potential is not None:
                v = v + np.asarray(extra_potential, dtype=float)
            self.static_half_phase = np.exp(-0.5j * v * dt / hbar)
        if absorber is not None:
            self.mask = np.exp(-absorber.damping_profile(grid) * dt)
            self.has_mask = bool(np.any(self.mask < 1.0))
        else:
            self.mask = None
            self.has_mask = False

    def _apply_half_potential(self, block: np.ndarray, t_mid: float):
        if self.static_barrier or self.spec.barrier_height == 0.0:
            kernels.apply_potential_phase(block, self.static_half_phase,
                                          self.grid.x, 0.0,
                                          self.spec.barrier_waist, 0.0)
            return
        components = self.spec.components(t_mid)
        center0, height0 = components[0]
        coeff0 = 0.5 * height0 * self.dt / self.hbar
        kernels.apply_potential_phase(block, self.static_half_phase,
                                      self.grid.x, center0,
                                      self.spec.barrier_waist, coeff0)
        if len(components) > 1:
            ones = np.ones(self.grid.n, dtype=np.complex128)
            for center, height in components[1:]:
                coeff = 0.5 * height * self.dt / self.hbar
                kernels.apply_potential_phase(block, ones, self.grid.x,
                                              center,
                                              self.spec.barrier_waist, coeff)

    def _apply_merged_potential(self, block: np.ndarray, t_a: float,
                                t_b: float):
        """Trailing half-phase of one step fused with the next's leading."""
        if self.static_barrier or self.spec.barrier_height == 0.0:
            kernels.apply_potential_phase(block, self._static_full, self.grid.x,
                                          0.0, self.spec.barrier_waist, 0.0)
            return
        comps_a = self.spec.components(t_a)
        comps_b = self.spec.components(t_b)
        coeff = 0.5 * comps_a[0][1] * self.dt / self.hbar
        kernels.apply_double_potential_phase(block, self._static_full,
                                             self.grid.x, comps_a[0][0],
                                             comps_b[0][0],
                                             self.spec.barrier_waist, coeff)
        if len(comps_a) > 1:
            ones = np.ones(self.grid.n, dtype=np.complex128)
            for (ca, ha), (cb, _) in zip(comps_a[1:], comps_b[1:]):
                c = 0.5 * ha * self.dt / self.hbar
                kernels.apply_double_potential_phase(
                    block, ones, self.grid.x, ca, cb,
                    self.spec.barrier_waist, c)

    def run(self, block: np.ndarray, t_start: float, steps: int,
            on_sample=None, sample_every: int = 0):
        """Advance the (k, n) block by ``steps`` steps in place.

        Consecutive potential half-steps are merged (diagonal factors
        commute with the absorber mask, so probability observables sampled
        between steps are unaffected). ``on_sample(t, block, absorbed)``
        fires every ``sample_every`` steps and after the last one. Returns
        (t_end, absorbed (k,)), with absorption computed lazily from norm
        bookkeeping (the mask is the only non-unitary factor).
        """
        squeeze = block.ndim == 1
        work = block.reshape(1, -1) if squeeze else block
        if steps < 1:
            return t_start, np.zeros(work.shape[0])
        self._static_full = self.static_half_phase * self.static_half_phase
        norms0 = kernels.row_norms_sq(work, self.grid.dx)
        t = t_start
        self._apply_half_potential(work, t + 0.5 * self.dt)
        for step in range(steps):
            t_mid = t_start + (step + 0.5) * self.dt
            spectral = sp_fft.fft(work, axis=-1, workers=self.workers,
                                  overwrite_x=True)
            spectral *= self.kinetic_phase
            back = sp_fft.ifft(spectral, axis=-1, workers=self.workers,
                               overwrite_x=True)
            work[...] = back
            if self.has_mask:
                kernels.apply_mask(work, self.mask)
            if step < steps - 1:
                self._apply_merged_potential(work, t_mid,
                                             t_mid + self.dt)
            else:
                self._apply_half_potential(work, t_mid)
            t = t_start + (step + 1) * self.dt
            if on_sample is not None and sample_every > 0 and (
                    (step + 1) % sample_every == 0 or step == steps - 1):
                absorbed = norms0 - kernels.row_norms_sq(work, self.grid.dx)
                on_sample(t, work, absorbed)
        absorbed = norms0 - kernels.row_norms_sq(work, self.grid.dx)
        return t, absorbed


def energy_expectation(psi: Wavefunction, spec: PotentialSpec,
                       mass: float = RB85.mass,
                       hbar: float = CONSTANTS.hbar,
                       extra_potential: np.ndarray | None = None) -> float:
    """<H> with the spectral kinetic operator (the propagator's own H)."""
    from .potential import potential_at
    grid = psi.grid
    k = grid.wavenumbers
    spectral = sp_fft.fft(psi.psi)
    kinetic = sp_fft.ifft(hbar * hbar * k * k / (2.0 * mass) * spectral)
    v = potential_at(spec, grid.x, psi.time)
    if extra_potential is not None:
        v = v + np.asarray(extra_potential, dtype=float)
    integrand = np.conj(psi.psi) * (kinetic + v * psi.psi)
    return float(np.real(np.sum(integrand)) * grid.dx)


def evolve(psi: Wavefunction, spec: PotentialSpec, dt: float, steps: int,
           mass: float = RB85.mass, hbar: float = CONSTANTS.hbar,
           absorber: Absorber | None = None, workers: int = 1,
           extra_potential: np.ndarray | None = None) -> Wavefunction:
    """Propagate a single wavefunction ``steps`` steps of size ``dt``."""
    stepper = SplitOperator(spec, psi.grid, dt, mass, hbar, absorber,
                            workers, extra_potential)
    block = psi.psi.copy()
    t_end, absorbed = stepper.run(block, psi.time, steps)
    return replace(psi, psi=block, time=t_end,
                   absorbed=psi.absorbed + float(absorbed[0]))
