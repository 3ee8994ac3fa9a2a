"""drainbec: quasi-1D condensate with localized atom loss.

Monte Carlo Wigner-trajectory dynamics under the stochastic GPE with a
delta-localized drain, closed-form stationary/critical analytics, the
Bogoliubov scattering problem at the drain, and the reductions needed to
measure flow, fluctuation wedges and density-density correlations.
"""

from . import analytics, gpe_engine, lattice, observables, scattering, vacuum_sampler

__version__ = "0.1.0"

__all__ = [
    "analytics",
    "gpe_engine",
    "lattice",
    "observables",
    "scattering",
    "vacuum_sampler",
    "__version__",
]
