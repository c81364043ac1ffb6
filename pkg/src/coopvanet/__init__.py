"""Outage analysis of cooperative vehicle-to-vehicle links at a road
intersection, with Poisson interferers on two perpendicular roads.

Analytical evaluators live in :mod:`coopvanet.outage` and
:mod:`coopvanet.laplace`; :mod:`coopvanet.montecarlo` provides the
simulation cross-check and :mod:`coopvanet.experiments` the named sweeps.
"""
from .geometry import (
    ChannelParams,
    Mobility,
    NetworkConfig,
    NodePose,
    RoadGeometry,
    Scenario,
    Scheme,
    TrafficParams,
    link_budget,
    threshold_from_rate,
)
from .laplace import QuadratureError, QuadratureSettings, laplace, log_rho
from .montecarlo import TrialConfig, estimate_joint_laplace, estimate_outage, estimate_schemes
from .outage import OutageBreakdown, ccdf_sum_two_exp, outage, throughput

__version__ = "0.1.0"

__all__ = [
    "ChannelParams", "Mobility", "NetworkConfig", "NodePose", "RoadGeometry", "Scenario", "Scheme",
    "TrafficParams", "link_budget", "threshold_from_rate", "QuadratureError", "QuadratureSettings",
    "laplace", "log_rho", "TrialConfig", "estimate_joint_laplace", "estimate_outage",
    "estimate_schemes", "OutageBreakdown", "ccdf_sum_two_exp", "outage", "throughput",
]
