"""Sweep-transfer machinery tests on a reduced (hot, short) configuration.

The mini configuration keeps the physics (vertex capture into the moving
pocket) while holding the thermal basis to ~15 states so the literal dense
evolution stays affordable as a cross-check oracle for the windowed mode.
"""

import numpy as np
import pytest

from kickcool.constants import CONSTANTS
from kickcool.quantum import (Grid1D, PotentialSpec, reference_well,
                              sweep_transfer, transfer_vs_depth)

KB = CONSTANTS.k_boltzmann
ALPHA = KB * 0.03

MINI_T = 0.3e-6
MINI_GRID = Grid1D(-120e-6, 120e-6, 2048)


def mini_spec(height=KB * 400e-9, waist=8e-6):
    # the sweep stops well short of the grid's absorbing layer so the
    # ridden pocket is never eaten in dense mode
    return PotentialSpec.linear_sweep(ALPHA, height, waist, -50e-6, 70e-6,
                                      speed=1e-3)


def test_windowed_matches_dense():
    spec = mini_spec()
    kwargs = dict(basis_energy_cutoff=0.5 * KB * MINI_T, dt=3e-6,
                  batch_size=32)
    windowed = sweep_transfer(MINI_T, spec, MINI_GRID, **kwargs)
    dense = sweep_transfer(MINI_T, spec, MINI_GRID, dense=True, **kwargs)
    assert windowed.transfer == pytest.approx(dense.transfer, abs=5e-3)
    assert windowed.transfer > 0.02  # the mini config does capture


def test_step_refinement_invariance():
    # halving the step cap moves the transfer by well under half a point
    spec = mini_spec()
    coarse = sweep_transfer(MINI_T, spec, MINI_GRID, dt=3e-6,
                            basis_energy_cutoff=0.4 * KB * MINI_T)
    fine = sweep_transfer(MINI_T, spec, MINI_GRID, dt=1.5e-6,
                          basis_energy_cutoff=0.4 * KB * MINI_T)
    assert abs(coarse.transfer - fine.transfer) < 5e-3


def test_capture_is_stepwise_in_level_index():
    spec = mini_spec()
    r = sweep_transfer(MINI_T, spec, MINI_GRID, dt=3e-6,
                       basis_energy_cutoff=0.5 * KB * MINI_T)
    p = r.state_transfers
    count = r.bound_state_count
    assert count >= 2
    assert np.all(p[:max(1, count - 2)] > 0.9)
    assert np.all(p[count + 2:] < 0.05)


def test_weak_barrier_transfers_nothing():
    # below the pocket-formation threshold there is no well and no capture
    spec = mini_spec(height=KB * 60e-9)
    r = sweep_transfer(MINI_T, spec, MINI_GRID, dt=3e-6,
                       basis_energy_cutoff=0.4 * KB * MINI_T)
    assert r.bound_state_count == 0
    assert r.transfer < 0.01
    assert r.classical_estimate == 0.0


def test_series_runs_from_tracked_weight_to_transfer():
    spec = mini_spec()
    r = sweep_transfer(MINI_T, spec, MINI_GRID, dt=3e-6,
                       basis_energy_cutoff=0.4 * KB * MINI_T)
    assert r.series_transfer[0] == pytest.approx(r.tracked_weight, abs=1e-3)
    assert r.series_transfer[-1] == pytest.approx(r.transfer, abs=1e-3)
    assert np.all(np.diff(r.series_times) > 0)
    assert r.tracked_weight + r.untracked_weight == pytest.approx(1.0,
                                                                  rel=1e-12)
    assert np.all(r.series_absorbed < 0.01)


def test_boltzmann_weights_decreasing():
    spec = mini_spec()
    r = sweep_transfer(MINI_T, spec, MINI_GRID, dt=3e-6,
                       basis_energy_cutoff=0.4 * KB * MINI_T)
    assert np.all(np.diff(r.state_weights) < 0)
    assert np.all(np.diff(r.state_energies) > 0)


def test_trajectory_validation():
    bad = PotentialSpec(v_slope=ALPHA, barrier_height=KB * 400e-9,
                        barrier_waist=8e-6, trajectory_times=(0.0, 0.1),
                        trajectory_positions=(1e-4, -1e-4))
    with pytest.raises(ValueError, match="increase"):
        sweep_transfer(MINI_T, bad, MINI_GRID, dt=3e-6)
    with pytest.raises(ValueError):
        sweep_transfer(-1.0, mini_spec(), MINI_GRID, dt=3e-6)


def test_grid_domain_guard():
    tiny = Grid1D(-40e-6, 40e-6, 512)
    with pytest.raises(ValueError, match="domain"):
        sweep_transfer(MINI_T, mini_spec(), tiny, dt=3e-6)


def test_dense_capacity_guard():
    coarse = Grid1D(-120e-6, 120e-6, 256)
    with pytest.raises(ValueError, match="capacity"):
        sweep_transfer(MINI_T, mini_spec(), coarse, dt=1e-4, dense=True)


def test_reference_well_consistency():
    spec = mini_spec()
    energies, well = reference_well(spec, MINI_GRID)
    assert len(energies) >= 1
    assert energies[0] > 0.0
    assert well.depth > 0.0
    r = sweep_transfer(MINI_T, spec, MINI_GRID, dt=3e-6,
                       basis_energy_cutoff=0.3 * KB * MINI_T)
    assert r.quasi_bound_energy == pytest.approx(float(energies[0]),
                                                 rel=1e-9)
    assert r.classical_estimate == pytest.approx(
        np.sqrt(energies[0] / (KB * MINI_T)), rel=1e-9)


def test_depth_scan_monotone_and_counted():
    depths = [0.0, KB * 200e-9, KB * 300e-9, KB * 400e-9]
    scan = transfer_vs_depth(depths, MINI_T, mini_spec(), MINI_GRID, dt=3e-6,
                             basis_energy_cutoff=0.35 * KB * MINI_T)
    assert scan.transfers[0] == 0.0
    assert scan.bound_state_counts[0] == 0
    assert np.all(np.diff(scan.transfers) > -0.01)
    assert np.all(np.diff(scan.bound_state_counts) >= 0)
    assert scan.transfers[-1] > 0.02


def test_depth_scan_csv(tmp_path):
    depths = [0.0, KB * 300e-9]
    scan = transfer_vs_depth(depths, MINI_T, mini_spec(), MINI_GRID, dt=3e-6,
                             basis_energy_cutoff=0.3 * KB * MINI_T)
    path = tmp_path / "scan.csv"
    scan.to_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "depth_nK,transfer,bound_states"
    assert len(lines) == 3


def test_series_csv(tmp_path):
    r = sweep_transfer(MINI_T, mini_spec(), MINI_GRID, dt=3e-6,
                       basis_energy_cutoff=0.3 * KB * MINI_T)
    path = tmp_path / "series.csv"
    r.series_to_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "t,transfer,absorbed"
    assert len(lines) == len(r.series_times) + 1
