"""1D quantum solver: stationary states, split-operator evolution,
barrier-sweep velocity selection, and tunneling decay."""

from .decay import DecayResult, tunneling_decay
from .evolve import (Absorber, SplitOperator, Wavefunction,
                     energy_expectation, evolve, gaussian_packet,
                     stability_limit)
from .grid import Grid1D
from .potential import (PotentialSpec, WellInfo, barrier_peak_position,
                        find_well, local_trap_frequency, potential_at)
from .states import (count_quasi_bound_states, eigenstates_numeric,
                     hamiltonian_apply, quasi_bound_states,
                     stationary_states, states_below)
from .sweep import (DepthScanResult, SweepResult, reference_well,
                    sweep_transfer, transfer_vs_depth)
from .thermal import (boltzmann_weights, energy_scale, partition_function,
                      semiclassical_count, trap_level_coefficients,
                      trap_level_energies)

__all__ = [
    "Absorber", "DecayResult", "DepthScanResult", "Grid1D", "PotentialSpec",
    "SplitOperator", "SweepResult", "Wavefunction", "WellInfo",
    "barrier_peak_position", "boltzmann_weights", "count_quasi_bound_states",
    "eigenstates_numeric", "energy_expectation", "energy_scale", "evolve",
    "find_well", "gaussian_packet", "hamiltonian_apply",
    "local_trap_frequency", "partition_function", "potential_at",
    "quasi_bound_states", "reference_well", "semiclassical_count",
    "stability_limit", "stationary_states", "states_below", "sweep_transfer",
    "trap_level_coefficients", "trap_level_energies", "transfer_vs_depth",
    "tunneling_decay",
]
