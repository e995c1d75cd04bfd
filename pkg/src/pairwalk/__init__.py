"""pairwalk: two mutually excluding biased random walkers on a 1D lattice.

Exact propagators and moments of the anti-symmetric exclusion pair, a
master-equation oracle, event-driven Monte Carlo, the continuum (drifting
wall) limit with a Fokker-Planck cross-check, and the territorial
random-walker experiment that links the border bias p to the dimensionless
scent parameter Z.
"""

__version__ = "0.1.0"

from .continuum_analytics import ContinuumParams, SeparationFrame, bridge
from .mc_engine import EnsembleSpec, MomentSeries, ensemble_moments, simulate_pair
from .model_core import (JointDistribution, PairParams, PairState,
                         TruncationError, integrate_master,
                         moments_from_distribution, transition_rates)
from .discrete_analytics import RegimeLabel, regime_of
from .numerics import QuadratureError, QuadratureSpec, adaptive_quad, inverse_laplace
from .territory import TerritoryConfig, estimate_p, failure_probability, run_territory

__all__ = [
    "__version__",
    "ContinuumParams", "SeparationFrame", "bridge",
    "EnsembleSpec", "MomentSeries", "ensemble_moments", "simulate_pair",
    "JointDistribution", "PairParams", "PairState", "TruncationError",
    "integrate_master", "moments_from_distribution", "transition_rates",
    "RegimeLabel", "regime_of",
    "QuadratureError", "QuadratureSpec", "adaptive_quad", "inverse_laplace",
    "TerritoryConfig", "estimate_p", "failure_probability", "run_territory",
]
