"""Hot-path kernels: compiled extension when available, numpy otherwise.

`run_paths` is the only hot entry point; the RNG helpers are always the
Python ones so that start sampling and letter reconstruction are shared.
"""

from .fallback import (
    draw_letters,
    pick_letters,
    start_draws,
    stream_states,
    uniform_at,
)
from .fallback import run_paths as _run_paths_numpy

try:
    from ._mc import run_paths as _run_paths_compiled

    run_paths = _run_paths_compiled
    BACKEND = "cython"
except ImportError:  # extension not built; use the vectorized fallback
    _run_paths_compiled = None
    run_paths = _run_paths_numpy
    BACKEND = "numpy"

run_paths_numpy = _run_paths_numpy
run_paths_compiled = _run_paths_compiled

__all__ = [
    "BACKEND",
    "draw_letters",
    "pick_letters",
    "run_paths",
    "run_paths_compiled",
    "run_paths_numpy",
    "start_draws",
    "stream_states",
    "uniform_at",
]
