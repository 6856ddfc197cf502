"""Coherent-state quantization toolkit for gauge fields on a circle.

Subpackages:

* ``su2``        group core (exp/log, polar chart, Haar measure);
* ``harmonic``   Peter-Weyl expansions, Casimir, heat kernel;
* ``flat``       heat transforms and Gaussian measures on R^d / C^d;
* ``lattice``    discretized connections, holonomy, gauge actions,
                 Gaussian ensembles, Monte Carlo heat evolution;
* ``reduced``    the transform on the group, coherent states, and the
                 statistical checks tying the lattice to the group;
* ``experiments`` named, seeded verification experiments (also via the
                 ``sbym`` command line).

Hot kernels run on a compiled Cython core when available, with a vectorized
numpy fallback chosen at import (``sbym._kernels.BACKEND`` names the one in
use).
"""

from ._kernels import BACKEND, HAVE_COMPILED
from .report import ARTIFACT_VERSION as __version__

__all__ = ["BACKEND", "HAVE_COMPILED", "__version__"]
