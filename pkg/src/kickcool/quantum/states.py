"""Stationary states of the frozen potential on a grid.

The Hamiltonian uses the second-order central Laplacian with hard-wall
boundaries, giving a real symmetric tridiagonal matrix; LAPACK's
tridiagonal eigensolver returns selected eigenpairs quickly even on large
grids. States are normalized so sum |psi|^2 dx = 1.
"""

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ..constants import CONSTANTS, RB85
from .grid import Grid1D
from .potential import PotentialSpec, find_well, potential_at

BOUNDARY_LEAK_LIMIT = 1e-6


def _tridiagonal(spec: PotentialSpec, grid: Grid1D, t: float, mass: float,
                 hbar: float):
    kin = hbar * hbar / (2.0 * mass * grid.dx * grid.dx)
    diag = 2.0 * kin + potential_at(spec, grid.x, t)
    off = np.full(grid.n - 1, -kin)
    return diag, off


def eigenstates_numeric(v: np.ndarray, grid: Grid1D, k: int, mass: float,
                        hbar: float = CONSTANTS.hbar,
                        check_boundaries: bool = True):
    """k lowest eigenpairs for an arbitrary sampled potential v(x)."""
    kin = hbar * hbar / (2.0 * mass * grid.dx * grid.dx)
    diag = 2.0 * kin + np.asarray(v, dtype=float)
    off = np.full(grid.n - 1, -kin)
    energies, vectors = eigh_tridiagonal(diag, off, select="i",
                                         select_range=(0, k - 1))
    if check_boundaries:
        _check_boundary_leak(vectors)
    return energies, (vectors / np.sqrt(grid.dx)).T.copy()


def _check_boundary_leak(states: np.ndarray):
    peak = np.max(np.abs(states), axis=0)
    edge = np.maximum(np.abs(states[0, :]), np.abs(states[-1, :]))
    bad = np.nonzero(edge > BOUNDARY_LEAK_LIMIT * peak)[0]
    if len(bad) > 0:
        raise ValueError(
            f"state {int(bad[0])} leaks onto the grid boundary; "
            "widen the grid")


def stationary_states(spec: PotentialSpec, grid: Grid1D, k: int,
                      t: float = 0.0, mass: float = RB85.mass,
                      hbar: float = CONSTANTS.hbar,
                      check_boundaries: bool = True):
    """k lowest eigenpairs of the frozen potential.

    Returns (energies (k,), states (k, n)) with energies ascending and
    states orthonormal under the dx-weighted inner product. Raises when a
    requested state has noticeable amplitude at the grid boundary.
    """
    if k < 1 or k > grid.n - 2:
        raise ValueError("k out of range for this grid")
    diag, off = _tridiagonal(spec, grid, t, mass, hbar)
    energies, vectors = eigh_tridiagonal(diag, off, select="i",
                                         select_range=(0, k - 1))
    if check_boundaries:
        _check_boundary_leak(vectors)
    states = (vectors / np.sqrt(grid.dx)).T.copy()
    return energies, states


def states_below(spec: PotentialSpec, grid: Grid1D, e_min: float,
                 e_max: float, t: float = 0.0, mass: float = RB85.mass,
                 hbar: float = CONSTANTS.hbar):
    """Eigenpairs with energies inside (e_min, e_max]."""
    diag, off = _tridiagonal(spec, grid, t, mass, hbar)
    energies, vectors = eigh_tridiagonal(diag, off, select="v",
                                         select_range=(e_min, e_max))
    states = (vectors / np.sqrt(grid.dx)).T.copy()
    return energies, states


def stationary_state_range(spec: PotentialSpec, grid: Grid1D, i0: int,
                           i1: int, t: float = 0.0,
                           mass: float = RB85.mass,
                           hbar: float = CONSTANTS.hbar,
                           check_boundaries: bool = True):
    """Eigenpairs with level indices in [i0, i1)."""
    if not 0 <= i0 < i1 <= grid.n - 2:
        raise ValueError("index range out of bounds for this grid")
    diag, off = _tridiagonal(spec, grid, t, mass, hbar)
    energies, vectors = eigh_tridiagonal(diag, off, select="i",
                                         select_range=(i0, i1 - 1))
    if check_boundaries:
        _check_boundary_leak(vectors)
    return energies, (vectors / np.sqrt(grid.dx)).T.copy()


def quasi_bound_states(spec: PotentialSpec, grid: Grid1D, t: float = 0.0,
                       mass: float = RB85.mass,
                       hbar: float = CONSTANTS.hbar,
                       localization: float = 0.5):
    """Well-localized eigenstates below the barrier-peak energy.

    Returns (energies, states, well); empty arrays when no pocket exists.
    A state counts as quasi-bound when more than ``localization`` of its
    probability sits inside the well region (peak to outer wall).
    """
    well = find_well(spec, t)
    if well is None:
        return np.empty(0), np.empty((0, grid.n)), None
    # cap the census at the grid's kinetic capacity: levels above it are
    # not representable, so for very deep wells the count is a lower bound
    e_hi = min(well.peak_energy,
               well.min_energy + 0.4 * grid.kinetic_energy_limit(mass, hbar))
    energies, states = states_below(spec, grid, well.min_energy - 1e-32,
                                    e_hi, t, mass, hbar)
    if len(energies) == 0:
        return np.empty(0), np.empty((0, grid.n)), well
    lo, hi = well.region
    inside = (grid.x >= lo) & (grid.x <= hi)
    weight = np.sum(np.abs(states[:, inside]) ** 2, axis=1) * grid.dx
    keep = weight > localization
    return energies[keep], states[keep], well


def count_quasi_bound_states(spec: PotentialSpec, grid: Grid1D,
                             t: float = 0.0, mass: float = RB85.mass,
                             hbar: float = CONSTANTS.hbar) -> int:
    energies, _, _ = quasi_bound_states(spec, grid, t, mass, hbar)
    return int(len(energies))


def hamiltonian_apply(spec: PotentialSpec, grid: Grid1D, psi: np.ndarray,
                      t: float = 0.0, mass: float = RB85.mass,
                      hbar: float = CONSTANTS.hbar) -> np.ndarray:
    """H psi with the same discretization as the eigensolver."""
    kin = hbar * hbar / (2.0 * mass * grid.dx * grid.dx)
    out = (2.0 * kin + potential_at(spec, grid.x, t)) * psi
    out[1:] -= kin * psi[:-1]
    out[:-1] -= kin * psi[1:]
    return out
