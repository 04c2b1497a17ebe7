"""Blow-ups of partially hyperbolic model systems along invariant Anosov submanifolds."""

from .errors import *  # noqa: F401,F403
from .speclin import HyperbolicMatrix, RateBounds, check_domination, hyperbolic_matrix, spectral_rate_bounds
from .blowup_geom import PolarPoint, BlowTangent, WarpedMetricFamily, blow_down, blow_up, metric_norm, rho_profile
from .systems import ModelSystem, ConnectedSum, Suspension

__version__ = "0.1.0"
