"""Hot-loop kernels with a compiled core and a pure-numpy fallback.

Selection happens at import time, per kernel: the compiled leapfrog wins
clearly, while numpy's vectorized transcendentals beat the scalar compiled
loops on the phase kernels (see ``benchmarks/bench_kernels.py``), so each
name binds to the faster implementation. Set ``KICKCOOL_FORCE_NUMPY=1`` to
force the pure-numpy backend throughout (used by the equivalence tests);
``BACKEND`` names the active mode.
"""

import os

from . import _numpy_impl

if os.environ.get("KICKCOOL_FORCE_NUMPY") == "1":
    _core = None
    BACKEND = "numpy"
else:
    try:
        from . import _core
        BACKEND = "compiled"
    except ImportError:
        _core = None
        BACKEND = "numpy"

# compiled where it is faster, numpy where vectorization wins
if _core is not None:
    leapfrog_quadrupole = _core.leapfrog_quadrupole
    row_norms_sq = _core.row_norms_sq
else:
    leapfrog_quadrupole = _numpy_impl.leapfrog_quadrupole
    row_norms_sq = _numpy_impl.row_norms_sq

barrier_phase = _numpy_impl.barrier_phase
apply_potential_phase = _numpy_impl.apply_potential_phase
apply_double_potential_phase = _numpy_impl.apply_double_potential_phase
apply_mask = _numpy_impl.apply_mask

numpy_backend = _numpy_impl
