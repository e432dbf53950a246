"""Uniform 1D spatial grid for the quantum solver."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np


def nice_fft_length(n: int) -> int:
    """Smallest 5-smooth integer >= n (FFT-friendly)."""
    best = None
    p2 = 1
    while p2 < 4 * n:
        p23 = p2
        while p23 < 4 * n:
            p235 = p23
            while p235 < n:
                p235 *= 5
            if best is None or p235 < best:
                best = p235
            p23 *= 3
        p2 *= 2
    return best


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on [x_min, x_max] with n points (dx = span/(n-1))."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.x_max <= self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.n < 64:
            raise ValueError("need at least 64 grid points")

    @cached_property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers matching numpy's FFT ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    def kinetic_energy_limit(self, mass: float, hbar: float) -> float:
        """Largest representable kinetic energy (Nyquist momentum)."""
        p_max = np.pi * hbar / self.dx
        return p_max * p_max / (2.0 * mass)

    def subgrid(self, x_lo: float, x_hi: float) -> tuple["Grid1D", slice]:
        """Aligned sub-interval with an FFT-friendly length.

        Returns the subgrid and the slice selecting it from this grid; the
        spacing and point positions are preserved exactly.
        """
        lo = max(0, int(np.floor((x_lo - self.x_min) / self.dx)))
        hi = min(self.n, int(np.ceil((x_hi - self.x_min) / self.dx)) + 1)
        length = nice_fft_length(hi - lo)
        if length > self.n:
            length = self.n
        # grow symmetrically to the nice length, clamped to the parent grid
        grow = length - (hi - lo)
        lo = max(0, lo - grow // 2)
        hi = lo + length
        if hi > self.n:
            hi = self.n
            lo = hi - length
        sel = slice(lo, hi)
        sub = Grid1D(x_min=float(self.x[lo]), x_max=float(self.x[hi - 1]),
                     n=length)
        # share the parent's coordinates bit-exactly (cached_property slots)
        sub.__dict__["x"] = self.x[sel].copy()
        sub.__dict__["dx"] = self.dx
        return sub, sel
