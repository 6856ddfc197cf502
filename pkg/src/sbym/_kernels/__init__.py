"""Hot-kernel backend selection.

The compiled Cython extension is used when it imported cleanly; otherwise the
vectorized numpy implementation takes over.  Both expose the same four
functions with identical conventions (see ``numpy_backend``), so callers never
need to know which one is active.  ``BACKEND`` names the active one.
"""

from . import numpy_backend

try:
    from . import _core as _impl
    HAVE_COMPILED = True
except ImportError:
    _impl = numpy_backend
    HAVE_COMPILED = False

BACKEND = _impl.NAME

exp_su2 = _impl.exp_su2
exp_sl2c = _impl.exp_sl2c
holonomy_su2 = _impl.holonomy_su2
holonomy_sl2c = _impl.holonomy_sl2c
