import numpy as np
import pytest

from kickcool.constants import CONSTANTS
from kickcool.quantum import (Absorber, Grid1D, PotentialSpec,
                              tunneling_decay)

KB = CONSTANTS.k_boltzmann
ALPHA = KB * 0.03

#: well on the slope; escaped flux turns around near -90 um, inside the ramp
DECAY_GRID = Grid1D(-110e-6, 170e-6, 4096)
DECAY_ABSORBER = Absorber(width_fraction=0.13, rate=2e4)


def decay_spec(height=KB * 267e-9, waist=10e-6, center=80e-6):
    return PotentialSpec.static(ALPHA, height, waist, center)


def test_decay_rate_in_expected_range():
    r = tunneling_decay(decay_spec(), DECAY_GRID, dt=1.8e-6, horizon=0.25,
                        absorber=DECAY_ABSORBER)
    assert 1.5 <= r.rate <= 5.0
    assert 0.01 <= r.per_period_loss <= 0.06
    assert 8e-3 <= r.secular_period <= 16e-3
    # the initial state carries a small sub-barrier tail past the peak, so
    # survival starts just below 1; net decay must hold
    assert r.survival[0] > 0.95
    assert r.survival[-1] < 0.75 * r.survival[0]


def test_decay_requires_quasi_bound_state():
    with pytest.raises(ValueError, match="quasi-bound"):
        tunneling_decay(decay_spec(height=KB * 60e-9), DECAY_GRID,
                        dt=1.8e-6, horizon=0.05, absorber=DECAY_ABSORBER)


def test_decay_requires_static_barrier():
    moving = PotentialSpec.linear_sweep(ALPHA, KB * 267e-9, 10e-6, 0.0,
                                        1e-4, speed=1e-3)
    with pytest.raises(ValueError, match="static"):
        tunneling_decay(moving, DECAY_GRID, dt=1.8e-6, horizon=0.05)


def test_decay_detects_reflected_flux():
    # a domain whose absorber sits beyond the classical turning point lets
    # escaped flux bounce back into the well
    bad_grid = Grid1D(-240e-6, 170e-6, 4096)
    with pytest.raises(ValueError, match="non-monotone"):
        tunneling_decay(decay_spec(height=KB * 262e-9), bad_grid, dt=1.8e-6,
                        horizon=0.2, absorber=Absorber(width_fraction=0.08,
                                                       rate=2e4),
                        rise_tolerance=1e-4)


def test_towering_barrier_does_not_decay():
    r = tunneling_decay(decay_spec(height=KB * 1e-3), DECAY_GRID,
                        dt=1.8e-6, horizon=0.08, absorber=DECAY_ABSORBER)
    assert r.rate < 1e-3


def test_decay_csv(tmp_path):
    r = tunneling_decay(decay_spec(), DECAY_GRID, dt=1.8e-6, horizon=0.02,
                        absorber=DECAY_ABSORBER)
    path = tmp_path / "decay.csv"
    r.to_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "t,survival"
    assert len(lines) == len(r.times) + 1
