"""Pure-numpy implementations of the hot kernels.

Kept in exact behavioral lockstep with the compiled backend in ``_core.pyx``;
``tests/test_kernels.py`` asserts bit-level agreement between the two.
"""

import numpy as np


def leapfrog_quadrupole(pos, vel, moment_over_mass, b_gradient, g_accel,
                        dt, nsteps, node_eps):
    """Velocity-Verlet under an ideal quadrupole plus constant gravity.

    ``pos`` and ``vel`` are (n, 3) float64 arrays updated in place;
    ``moment_over_mass`` is g_F m_F mu_B / m per atom (J/T/kg). Returns a
    boolean mask of atoms that ever came within ``node_eps`` of the field
    node (their magnetic acceleration is zeroed for those steps).
    """
    touched = np.zeros(pos.shape[0], dtype=bool)

    def accel(p, out_touched):
        x, y, z = p[:, 0], p[:, 1], p[:, 2]
        r = np.sqrt(0.25 * (x * x + y * y) + z * z)
        node = r < node_eps
        out_touched |= node
        safe = np.where(node, 1.0, r)
        scale = np.where(node, 0.0, -moment_over_mass * b_gradient / safe)
        a = np.empty_like(p)
        a[:, 0] = scale * 0.25 * x + g_accel[0]
        a[:, 1] = scale * 0.25 * y + g_accel[1]
        a[:, 2] = scale * z + g_accel[2]
        return a

    a = accel(pos, touched)
    for _ in range(nsteps):
        pos += vel * dt + 0.5 * a * dt * dt
        a_new = accel(pos, touched)
        vel += 0.5 * (a + a_new) * dt
        a = a_new
    return touched


def barrier_phase(x, xc, w, coeff):
    """exp(-1j * coeff * exp(-2 ((x - xc)/w)^2)) evaluated on the grid."""
    u = (x - xc) / w
    return np.exp(-1j * coeff * np.exp(-2.0 * u * u))


def apply_potential_phase(psi, static_phase, x, xc, w, coeff):
    """In-place psi *= static_phase * barrier_phase(...).

    ``psi`` is (k, n) or (n,) complex128; ``static_phase`` is (n,).
    ``coeff`` = U0 * dt_effective / hbar; when zero only the static phase
    is applied.
    """
    if coeff != 0.0:
        phase = static_phase * barrier_phase(x, xc, w, coeff)
    else:
        phase = static_phase
    psi *= phase


def apply_double_potential_phase(psi, static_sq, x, xc_a, xc_b, w, coeff):
    """In-place psi *= static_sq * exp(-1j coeff (g(x-xc_a) + g(x-xc_b))).

    Fuses the trailing half-step of one split step with the leading
    half-step of the next (g is the exp(-2 u^2) barrier profile).
    """
    ua = (x - xc_a) / w
    ub = (x - xc_b) / w
    theta = coeff * (np.exp(-2.0 * ua * ua) + np.exp(-2.0 * ub * ub))
    psi *= static_sq * np.exp(-1j * theta)


def apply_mask(psi, mask):
    """In-place psi *= mask with mask real (n,); returns nothing."""
    psi *= mask


def row_norms_sq(psi, dx):
    """sum |psi|^2 dx per row; psi (k, n) or (n,)."""
    if psi.ndim == 1:
        return np.array([np.sum(np.abs(psi) ** 2) * dx])
    return np.einsum("ij,ij->i", psi.real, psi.real) * dx + \
        np.einsum("ij,ij->i", psi.imag, psi.imag) * dx
