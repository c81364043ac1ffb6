"""Node placement, distances, path loss and per-link budget constants.

Positions are kept in polar form relative to the intersection (the point
where the X road and the Y road cross).  The X road is the horizontal axis
and the Y road the vertical one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

__all__ = [
    "SingularDistanceError",
    "NodePose",
    "RoadGeometry",
    "ChannelParams",
    "TrafficParams",
    "NetworkConfig",
    "LinkBudget",
    "Scheme",
    "Mobility",
    "Scenario",
    "cartesian",
    "distance",
    "path_loss",
    "dist_to_x_road_point",
    "dist_to_y_road_point",
    "threshold_from_rate",
    "rate_from_threshold",
    "dbm_to_watts",
    "link_budget",
]


class SingularDistanceError(ValueError):
    """Raised when two nodes share the same location (path loss is unbounded)."""


@dataclass(frozen=True)
class NodePose:
    """Position of a node: distance ``n`` from the intersection and angle
    ``theta`` (radians) measured from the X road."""

    n: float
    theta: float = 0.0

    def __post_init__(self):
        if not self.n >= 0:
            raise ValueError(f"distance from intersection must be >= 0, got {self.n}")
        object.__setattr__(self, "theta", float(self.theta) % (2 * math.pi))

    @classmethod
    def from_xy(cls, x: float, y: float) -> "NodePose":
        return cls(math.hypot(x, y), math.atan2(y, x))

    @property
    def x(self) -> float:
        return self.n * math.cos(self.theta)

    @property
    def y(self) -> float:
        return self.n * math.sin(self.theta)


@dataclass(frozen=True)
class RoadGeometry:
    """Road extent: infinite (``half_length=None``) or the segment [-Z, Z]."""

    half_length: Optional[float] = None

    def __post_init__(self):
        if self.half_length is not None and not self.half_length > 0:
            raise ValueError("finite road half-length Z must be > 0")

    @classmethod
    def infinite(cls) -> "RoadGeometry":
        return cls(None)

    @classmethod
    def finite(cls, Z: float) -> "RoadGeometry":
        return cls(float(Z))

    @property
    def is_infinite(self) -> bool:
        return self.half_length is None


@dataclass(frozen=True)
class ChannelParams:
    """Path-loss exponent ``alpha``, antenna constant ``A``, transmit power
    ``P`` (W) and noise power ``sigma2`` (W)."""

    alpha: float = 2.0
    A: float = 650.0
    P: float = 0.12
    sigma2: float = 0.0

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError("path-loss exponent must be > 1")
        if not (self.A > 0 and self.P > 0):
            raise ValueError("A and P must be positive")
        if not self.sigma2 >= 0:
            raise ValueError("noise power must be >= 0")

    @classmethod
    def with_noise_dbm(cls, noise_dbm: Optional[float], **kw) -> "ChannelParams":
        """Build channel parameters from a noise level in dBm (``None`` means
        interference-limited, i.e. zero noise)."""
        sigma2 = 0.0 if noise_dbm is None else dbm_to_watts(noise_dbm)
        return cls(sigma2=sigma2, **kw)


@dataclass(frozen=True)
class TrafficParams:
    """Vehicle intensities on each road (vehicles/m) and ALOHA access
    probability."""

    lambda_x: float = 0.05
    lambda_y: float = 0.05
    p: float = 0.05

    def __post_init__(self):
        if not (self.lambda_x >= 0 and self.lambda_y >= 0):
            raise ValueError("intensities must be >= 0")
        if not 0 <= self.p <= 1:
            raise ValueError("ALOHA probability must lie in [0, 1]")


@dataclass(frozen=True)
class NetworkConfig:
    channel: ChannelParams = field(default_factory=ChannelParams)
    traffic: TrafficParams = field(default_factory=TrafficParams)
    geometry: RoadGeometry = field(default_factory=RoadGeometry)

    def with_traffic(self, **kw) -> "NetworkConfig":
        return replace(self, traffic=replace(self.traffic, **kw))

    def with_channel(self, **kw) -> "NetworkConfig":
        return replace(self, channel=replace(self.channel, **kw))


@dataclass(frozen=True)
class LinkBudget:
    l_ab: float
    K_ab: float
    N_ab: float
    theta_threshold: float


class Scheme(str, Enum):
    DIRECT = "direct"
    SC = "sc"
    MRC = "mrc"


class Mobility(str, Enum):
    HSV = "hsv"  # independent interferer sets per observation
    LSV = "lsv"  # one interferer set shared by relay and destination


@dataclass(frozen=True)
class Scenario:
    """One transmission: source, destination, optional relay, combining
    scheme and mobility model.

    Give exactly one of ``rate`` (bits per channel use) or ``theta`` (SINR
    threshold).
    """

    source: NodePose
    destination: NodePose
    relay: Optional[NodePose] = None
    scheme: Scheme = Scheme.DIRECT
    mobility: Mobility = Mobility.HSV
    rate: Optional[float] = None
    theta: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "mobility", Mobility(self.mobility))
        if (self.relay is None) != (self.scheme is Scheme.DIRECT):
            raise ValueError("a relay is required iff the scheme is SC or MRC")
        if (self.rate is None) == (self.theta is None):
            raise ValueError("give exactly one of rate or theta")
        if self.theta is not None and not self.theta >= 0:
            raise ValueError("threshold must be >= 0")

    @property
    def threshold(self) -> float:
        if self.theta is not None:
            return float(self.theta)
        return threshold_from_rate(self.rate)

    def replace(self, **kw) -> "Scenario":
        return replace(self, **kw)


def cartesian(pose: NodePose) -> tuple[float, float]:
    return pose.x, pose.y


def distance(a: NodePose, b: NodePose) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def path_loss(r: float, ch: ChannelParams) -> float:
    """Deterministic attenuation ``(A r)^-alpha``; co-located nodes raise."""
    if r <= 0:
        raise SingularDistanceError(f"path loss undefined at distance {r}")
    return (ch.A * r) ** (-ch.alpha)


def dist_to_x_road_point(pose: NodePose, x: float) -> float:
    return math.hypot(pose.y, x - pose.x)


def dist_to_y_road_point(pose: NodePose, y: float) -> float:
    return math.hypot(pose.x, y - pose.y)


def threshold_from_rate(rate: float) -> float:
    """SINR threshold for a half-duplex target rate: ``2^(2 rate) - 1``."""
    if rate < 0:
        raise ValueError("rate must be >= 0")
    return math.expm1(2.0 * rate * math.log(2.0))


def rate_from_threshold(theta: float) -> float:
    return math.log1p(theta) / (2.0 * math.log(2.0))


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def link_budget(a: NodePose, b: NodePose, theta: float, ch: ChannelParams) -> LinkBudget:
    l_ab = path_loss(distance(a, b), ch)
    K_ab = theta / (ch.P * l_ab)
    N_ab = 1.0 if ch.sigma2 == 0 else math.exp(-K_ab * ch.sigma2)
    return LinkBudget(l_ab=l_ab, K_ab=K_ab, N_ab=N_ab, theta_threshold=theta)
