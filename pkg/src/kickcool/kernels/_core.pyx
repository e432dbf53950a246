# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot-loop kernels.

Mirrors ``_numpy_impl`` operation for operation; the leapfrog uses the same
per-atom arithmetic order as the numpy expressions so the two backends agree
bit for bit on it (transcendental-based kernels agree to rounding).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, sin, sqrt

cnp.import_array()


def leapfrog_quadrupole(double[:, ::1] pos, double[:, ::1] vel,
                        double[::1] moment_over_mass, double b_gradient,
                        double[::1] g_accel, double dt, Py_ssize_t nsteps,
                        double node_eps):
    """Velocity-Verlet under an ideal quadrupole plus constant gravity.

    Updates ``pos``/``vel`` (n, 3) in place; returns the node-touched mask.
    """
    cdef Py_ssize_t n = pos.shape[0]
    touched_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] touched = touched_arr
    cdef Py_ssize_t i, s
    cdef double g0 = g_accel[0], g1 = g_accel[1], g2 = g_accel[2]
    cdef double x, y, z, vx, vy, vz, mm
    cdef double r, scale, ax, ay, az, anx, any_, anz
    cdef double dt2 = dt * dt

    for i in range(n):
        x = pos[i, 0]; y = pos[i, 1]; z = pos[i, 2]
        vx = vel[i, 0]; vy = vel[i, 1]; vz = vel[i, 2]
        mm = moment_over_mass[i]

        r = sqrt(0.25 * (x * x + y * y) + z * z)
        if r < node_eps:
            touched[i] = 1
            ax = g0; ay = g1; az = g2
        else:
            scale = -mm * b_gradient / r
            ax = scale * 0.25 * x + g0
            ay = scale * 0.25 * y + g1
            az = scale * z + g2

        for s in range(nsteps):
            x = x + (vx * dt + 0.5 * ax * dt2)
            y = y + (vy * dt + 0.5 * ay * dt2)
            z = z + (vz * dt + 0.5 * az * dt2)

            r = sqrt(0.25 * (x * x + y * y) + z * z)
            if r < node_eps:
                touched[i] = 1
                anx = g0; any_ = g1; anz = g2
            else:
                scale = -mm * b_gradient / r
                anx = scale * 0.25 * x + g0
                any_ = scale * 0.25 * y + g1
                anz = scale * z + g2

            vx = vx + 0.5 * (ax + anx) * dt
            vy = vy + 0.5 * (ay + any_) * dt
            vz = vz + 0.5 * (az + anz) * dt
            ax = anx; ay = any_; az = anz

        pos[i, 0] = x; pos[i, 1] = y; pos[i, 2] = z
        vel[i, 0] = vx; vel[i, 1] = vy; vel[i, 2] = vz

    return touched_arr.view(np.bool_)


def barrier_phase(double[::1] x, double xc, double w, double coeff):
    """exp(-1j * coeff * exp(-2 ((x - xc)/w)^2)) on the grid."""
    cdef Py_ssize_t n = x.shape[0]
    out_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double u, theta
    for i in range(n):
        u = (x[i] - xc) / w
        theta = coeff * exp(-2.0 * u * u)
        out[i] = cos(theta) - 1j * sin(theta)
    return out_arr


def apply_potential_phase(psi, double complex[::1] static_phase,
                          double[::1] x, double xc, double w, double coeff):
    """In-place psi *= static_phase * barrier_phase(...); psi (k, n) or (n,)."""
    psi2 = psi if psi.ndim == 2 else psi.reshape(1, -1)
    _apply_phase_rows(psi2, static_phase, x, xc, w, coeff)


cdef void _apply_phase_rows(double complex[:, ::1] psi,
                            double complex[::1] static_phase,
                            double[::1] x, double xc, double w,
                            double coeff):
    cdef Py_ssize_t k = psi.shape[0], n = psi.shape[1]
    cdef Py_ssize_t i, j
    cdef double u, theta
    phase_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] phase = phase_arr
    if coeff != 0.0:
        for i in range(n):
            u = (x[i] - xc) / w
            theta = coeff * exp(-2.0 * u * u)
            phase[i] = static_phase[i] * (cos(theta) - 1j * sin(theta))
    else:
        for i in range(n):
            phase[i] = static_phase[i]
    for j in range(k):
        for i in range(n):
            psi[j, i] = psi[j, i] * phase[i]


def apply_double_potential_phase(psi, double complex[::1] static_sq,
                                 double[::1] x, double xc_a, double xc_b,
                                 double w, double coeff):
    """In-place psi *= static_sq * exp(-1j coeff (g_a + g_b)); fused step."""
    psi2 = psi if psi.ndim == 2 else psi.reshape(1, -1)
    _apply_double_phase_rows(psi2, static_sq, x, xc_a, xc_b, w, coeff)


cdef void _apply_double_phase_rows(double complex[:, ::1] psi,
                                   double complex[::1] static_sq,
                                   double[::1] x, double xc_a, double xc_b,
                                   double w, double coeff):
    cdef Py_ssize_t k = psi.shape[0], n = psi.shape[1]
    cdef Py_ssize_t i, j
    cdef double ua, ub, theta
    phase_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] phase = phase_arr
    for i in range(n):
        ua = (x[i] - xc_a) / w
        ub = (x[i] - xc_b) / w
        theta = coeff * (exp(-2.0 * ua * ua) + exp(-2.0 * ub * ub))
        phase[i] = static_sq[i] * (cos(theta) - 1j * sin(theta))
    for j in range(k):
        for i in range(n):
            psi[j, i] = psi[j, i] * phase[i]


def apply_mask(psi, double[::1] mask):
    """In-place psi *= mask with mask real (n,)."""
    psi2 = psi if psi.ndim == 2 else psi.reshape(1, -1)
    _apply_mask_rows(psi2, mask)


def row_norms_sq(psi, double dx):
    """sum |psi|^2 dx per row; psi (k, n) or (n,)."""
    psi2 = psi if psi.ndim == 2 else psi.reshape(1, -1)
    cdef double complex[:, ::1] view = psi2
    cdef Py_ssize_t k = view.shape[0], n = view.shape[1]
    out_arr = np.empty(k, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double acc
    cdef double complex z
    for j in range(k):
        acc = 0.0
        for i in range(n):
            z = view[j, i]
            acc += z.real * z.real + z.imag * z.imag
        out[j] = acc * dx
    return out_arr


cdef void _apply_mask_rows(double complex[:, ::1] psi, double[::1] mask):
    cdef Py_ssize_t k = psi.shape[0], n = psi.shape[1]
    cdef Py_ssize_t i, j
    for j in range(k):
        for i in range(n):
            psi[j, i] = psi[j, i] * mask[i]
