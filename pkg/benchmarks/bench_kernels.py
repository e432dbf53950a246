"""Benchmark the compiled kernels against the pure-numpy fallback.

Run as ``python benchmarks/bench_kernels.py``. Covers the two hot loops:
the quadrupole leapfrog (ensemble propagation) and the split-operator
potential-phase application (quantum sweeps), plus one end-to-end
split-step including the FFT pair for context.
"""

import time

import numpy as np
from scipy import fft as sp_fft

from kickcool import kernels
from kickcool.kernels import _numpy_impl

try:
    from kickcool.kernels import _core
except ImportError:
    _core = None


def timeit(fn, *args, repeats=5, **kwargs):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args, **kwargs)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_leapfrog(backend, n=100_000, steps=300):
    rng = np.random.default_rng(0)
    pos = rng.normal(scale=1e-3, size=(n, 3))
    vel = rng.normal(scale=0.03, size=(n, 3))
    mom = np.full(n, 66.0)
    g = np.array([0.0, -9.80665, 0.0])
    return timeit(backend.leapfrog_quadrupole, pos.copy(), vel.copy(), mom,
                  1.5, g, 1e-5, steps, 1e-9, repeats=3)


def bench_phase(backend, k=96, n=4096, reps=200):
    rng = np.random.default_rng(1)
    psi = rng.normal(size=(k, n)) + 1j * rng.normal(size=(k, n))
    static = np.exp(-1j * np.linspace(0.0, 1.0, n)).astype(np.complex128)
    x = np.linspace(-2e-4, 2e-4, n)

    def run():
        for _ in range(reps):
            backend.apply_double_potential_phase(psi, static, x, 1e-5,
                                                 1.05e-5, 1e-5, 0.1)

    return timeit(run, repeats=3) / reps


def bench_split_step(backend, k=96, n=4096, reps=100):
    rng = np.random.default_rng(2)
    psi = rng.normal(size=(k, n)) + 1j * rng.normal(size=(k, n))
    static = np.exp(-1j * np.linspace(0.0, 1.0, n)).astype(np.complex128)
    kin = np.exp(-1j * np.linspace(0.0, 2.0, n)).astype(np.complex128)
    x = np.linspace(-2e-4, 2e-4, n)

    def run():
        nonlocal psi
        for _ in range(reps):
            spectral = sp_fft.fft(psi, axis=-1, overwrite_x=True)
            spectral *= kin
            psi = sp_fft.ifft(spectral, axis=-1, overwrite_x=True)
            backend.apply_double_potential_phase(psi, static, x, 1e-5,
                                                 1.05e-5, 1e-5, 0.1)

    return timeit(run, repeats=3) / reps


def main():
    print(f"active backend: {kernels.BACKEND}")
    rows = [("leapfrog 1e5 atoms x 300 steps", bench_leapfrog, 1.0),
            ("double phase (96 x 4096)", bench_phase, 1e3),
            ("full split step (96 x 4096)", bench_split_step, 1e3)]
    header = f"{'kernel':36s} {'numpy':>12s} {'compiled':>12s} {'speedup':>9s}"
    print(header)
    print("-" * len(header))
    for label, fn, scale in rows:
        t_np = fn(_numpy_impl)
        if _core is not None:
            t_c = fn(_core)
            print(f"{label:36s} {t_np * scale:10.2f} {'s' if scale == 1 else 'ms'} "
                  f"{t_c * scale:10.2f} {'s' if scale == 1 else 'ms'} "
                  f"{t_np / t_c:8.1f}x")
        else:
            print(f"{label:36s} {t_np * scale:10.2f} "
                  f"{'s' if scale == 1 else 'ms'} {'-':>12s} {'-':>9s}")


if __name__ == "__main__":
    main()
