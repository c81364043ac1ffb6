"""Laplace transforms of the aggregate road interference seen at a node.

Interferers on each road form a Poisson process thinned by ALOHA, and
every link has unit-mean exponential power fading.  For a receiver ``N``
the transform of the interference from one road is

    L(s) = exp(-p * lam * int_B g(x) dx),    g = 1 / (1 + (A |x - N|)^alpha / (s P))

where ``B`` is the road extent.  The integral is evaluated in closed form
when ``alpha == 2`` and by adaptive quadrature otherwise.  Correlation
between the interference at two receivers fed by the *same* interferer
set enters through a cross-term ``rho >= 1``.

Every quantity is assembled as a log-exponent first and exponentiated
last, since the thresholds used by the outage formulas make ``s`` of the
order of 1e10 or more.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from scipy import integrate

from .geometry import ChannelParams, NodePose, RoadGeometry, TrafficParams

__all__ = [
    "QuadratureSettings",
    "QuadratureError",
    "road_offsets",
    "interference_load",
    "laplace",
    "laplace_x",
    "laplace_y",
    "laplace_x_closed_infinite",
    "laplace_y_closed_infinite",
    "laplace_x_closed_finite",
    "laplace_y_closed_finite",
    "log_rho",
    "rho_x",
    "rho_y",
    "log_joint_laplace",
    "joint_laplace_x",
    "joint_laplace_y",
    "joint_log_slope",
]

ROADS = ("x", "y")


@dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be > 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUAD = QuadratureSettings()


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, value, error_estimate):
        super().__init__(f"{message} (value={value!r}, error estimate={error_estimate!r})")
        self.value = value
        self.error_estimate = error_estimate


def road_offsets(node: NodePose, road: str) -> tuple[float, float]:
    """Return ``(along, across)``: the node's coordinate along the road and
    its distance from the road axis."""
    if road == "x":
        return node.x, node.y
    if road == "y":
        return node.y, node.x
    raise ValueError(f"unknown road {road!r}")


def _intensity(traffic: TrafficParams, road: str) -> float:
    return traffic.p * (traffic.lambda_x if road == "x" else traffic.lambda_y)


def _activity(lt: float) -> float:
    # 1 / (1 + e^lt) without overflow
    if lt > 0:
        e = math.exp(-lt) if lt < 745 else 0.0
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(lt))


def _log_attenuation(along: float, across: float, s: float, ch: ChannelParams) -> Callable[[float], float]:
    """Build x -> log((A r)^alpha / (s P)) for interferer position x."""
    logA = math.log(ch.A)
    log_sP = math.log(s * ch.P)
    half_alpha = 0.5 * ch.alpha
    a2 = across * across

    def lt(x: float) -> float:
        r2 = a2 + (x - along) ** 2
        if r2 <= 0:
            return -math.inf
        return ch.alpha * logA + half_alpha * math.log(r2) - log_sP

    return lt


def _scale(across: float, s: float, ch: ChannelParams) -> float:
    # width of the region where an interferer is "loud" for this receiver
    d0 = (s * ch.P) ** (1.0 / ch.alpha) / ch.A
    return math.hypot(across, d0)


def _integrate_road(f, center: float, width: float, geom: RoadGeometry,
                    quad: QuadratureSettings, breakpoints: Sequence[float] = ()) -> float:
    """Integrate ``f`` over the road extent after x = center + width tan(u)."""
    if geom.is_infinite:
        lo, hi = -0.5 * math.pi, 0.5 * math.pi
    else:
        Z = geom.half_length
        lo = math.atan((-Z - center) / width)
        hi = math.atan((Z - center) / width)

    def g(u):
        t = math.tan(u)
        return f(center + width * t) * width * (1.0 + t * t)

    pts = sorted({math.atan((b - center) / width) for b in breakpoints} | {0.0})
    pts = [u for u in pts if lo < u < hi]
    val, err, info = _quad(g, lo, hi, quad, pts)
    return val


def _quad(g, lo, hi, quad, points):
    kw = dict(epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=quad.max_subdivisions, full_output=1)
    if points:
        kw["points"] = points
        kw["limit"] = max(quad.max_subdivisions, len(points) + 1)
    out = integrate.quad(g, lo, hi, **kw)
    val, err, info = out[0], out[1], out[2]
    ier = 0 if len(out) == 3 else (1 if "maximum number of subdivisions" in out[3] else 2)
    if ier:
        target = max(quad.abs_tol, quad.rel_tol * abs(val))
        if ier == 1 or err > 10 * target:
            raise QuadratureError("road integral did not converge", val, err)
    return val, err, info


def interference_load(node: NodePose, s: float, road: str, ch: ChannelParams,
                      geom: RoadGeometry, quad: QuadratureSettings = DEFAULT_QUAD) -> float:
    """Integral of the per-interferer activity ``g`` over one road.

    Uses quadrature for every ``alpha``; the closed forms are separate.
    """
    if s <= 0:
        return 0.0
    along, across = road_offsets(node, road)
    lt = _log_attenuation(along, across, s, ch)
    return _integrate_road(lambda x: _activity(lt(x)), along, _scale(across, s, ch), geom, quad)


def _closed_load(node: NodePose, s: float, road: str, ch: ChannelParams, geom: RoadGeometry) -> float:
    if ch.alpha != 2:
        raise ValueError("closed-form transforms require alpha == 2")
    if s <= 0:
        return 0.0
    along, across = road_offsets(node, road)
    k = s * ch.P / ch.A ** 2
    root = math.sqrt(across * across + k)
    if geom.is_infinite:
        return k * math.pi / root
    Z = geom.half_length
    return k / root * (math.atan((Z + along) / root) + math.atan((Z - along) / root))


def _log_laplace(node, s, road, traffic, ch, geom, quad, method="auto") -> float:
    intensity = _intensity(traffic, road)
    if s <= 0 or intensity == 0:
        return 0.0
    if method == "closed" or (method == "auto" and ch.alpha == 2):
        load = _closed_load(node, s, road, ch, geom)
    elif method in ("auto", "numeric"):
        load = interference_load(node, s, road, ch, geom, quad)
    else:
        raise ValueError(f"unknown method {method!r}")
    return -intensity * load


def laplace(node: NodePose, s: float, road: str, traffic: TrafficParams, ch: ChannelParams,
            geom: RoadGeometry = RoadGeometry(), quad: QuadratureSettings = DEFAULT_QUAD,
            method: str = "auto") -> float:
    """Laplace transform of the interference from ``road`` at ``node``.

    Parameters
    ----------
    method : {"auto", "numeric", "closed"}
        ``"auto"`` uses the closed form when ``alpha == 2`` and quadrature
        otherwise.
    """
    if s < 0:
        raise ValueError("Laplace argument must be >= 0")
    return math.exp(_log_laplace(node, s, road, traffic, ch, geom, quad, method))


def laplace_x(node, s, traffic, ch, geom=RoadGeometry(), quad=DEFAULT_QUAD, method="auto"):
    return laplace(node, s, "x", traffic, ch, geom, quad, method)


def laplace_y(node, s, traffic, ch, geom=RoadGeometry(), quad=DEFAULT_QUAD, method="auto"):
    return laplace(node, s, "y", traffic, ch, geom, quad, method)


def laplace_x_closed_infinite(node, s, traffic, ch):
    return laplace(node, s, "x", traffic, ch, RoadGeometry(), method="closed")


def laplace_y_closed_infinite(node, s, traffic, ch):
    return laplace(node, s, "y", traffic, ch, RoadGeometry(), method="closed")


def laplace_x_closed_finite(node, s, traffic, ch, Z):
    return laplace(node, s, "x", traffic, ch, RoadGeometry.finite(Z), method="closed")


def laplace_y_closed_finite(node, s, traffic, ch, Z):
    return laplace(node, s, "y", traffic, ch, RoadGeometry.finite(Z), method="closed")


def _pair_integral(integrand_factory, relay, dest, s, b, road, ch, geom, quad):
    rel_along, rel_across = road_offsets(relay, road)
    dst_along, dst_across = road_offsets(dest, road)
    lt_r = _log_attenuation(rel_along, rel_across, s, ch) if s > 0 else None
    lt_d = _log_attenuation(dst_along, dst_across, b, ch)
    f = integrand_factory(lt_r, lt_d)
    # center on the relay; the destination's projection is a breakpoint
    ref_s = s if s > 0 else b
    width = _scale(rel_across, ref_s, ch)
    return _integrate_road(f, rel_along, width, geom, quad, breakpoints=(dst_along,))


def log_rho(s: float, b: float, relay: NodePose, dest: NodePose, road: str, traffic: TrafficParams,
            ch: ChannelParams, geom: RoadGeometry = RoadGeometry(),
            quad: QuadratureSettings = DEFAULT_QUAD) -> float:
    """Log of the cross-term for a shared interferer set on ``road``.

    The integrand is ``g_R(x) g_D(x)`` with ``g`` the activity seen by the
    relay at argument ``s`` and by the destination at argument ``b``.
    """
    if s < 0 or b < 0:
        raise ValueError("Laplace arguments must be >= 0")
    intensity = _intensity(traffic, road)
    if s == 0 or b == 0 or intensity == 0:
        return 0.0

    def factory(lt_r, lt_d):
        return lambda x: _activity(lt_r(x)) * _activity(lt_d(x))

    return intensity * _pair_integral(factory, relay, dest, s, b, road, ch, geom, quad)


def rho_x(s, b, relay, dest, traffic, ch, geom=RoadGeometry(), quad=DEFAULT_QUAD):
    return math.exp(log_rho(s, b, relay, dest, "x", traffic, ch, geom, quad))


def rho_y(s, b, relay, dest, traffic, ch, geom=RoadGeometry(), quad=DEFAULT_QUAD):
    return math.exp(log_rho(s, b, relay, dest, "y", traffic, ch, geom, quad))


def log_joint_laplace(s, b, relay, dest, road, traffic, ch, geom=RoadGeometry(),
                      quad=DEFAULT_QUAD, correlated=True) -> float:
    """Log of E[exp(-s I_R - b I_D)] for the interference from one road.

    With ``correlated=False`` the two interference terms come from
    independent interferer sets and the cross-term is dropped.
    """
    out = (_log_laplace(relay, s, road, traffic, ch, geom, quad)
           + _log_laplace(dest, b, road, traffic, ch, geom, quad))
    if correlated:
        out += log_rho(s, b, relay, dest, road, traffic, ch, geom, quad)
    return out


def joint_laplace_x(s, b, relay, dest, traffic, ch, geom=RoadGeometry(), quad=DEFAULT_QUAD):
    return math.exp(log_joint_laplace(s, b, relay, dest, "x", traffic, ch, geom, quad))


def joint_laplace_y(s, b, relay, dest, traffic, ch, geom=RoadGeometry(), quad=DEFAULT_QUAD):
    return math.exp(log_joint_laplace(s, b, relay, dest, "y", traffic, ch, geom, quad))


def joint_log_slope(s: float, b: float, relay: NodePose, dest: NodePose, road: str,
                    traffic: TrafficParams, ch: ChannelParams, geom: RoadGeometry = RoadGeometry(),
                    quad: QuadratureSettings = DEFAULT_QUAD, correlated: bool = True) -> float:
    """Return ``-b * d/db log E[exp(-s I_R - b I_D)]`` for one road.

    Equals ``b E[I_D e^{-s I_R - b I_D}] / E[e^{-s I_R - b I_D}]``; the
    equal-gain limit of the MRC outage needs it.
    """
    intensity = _intensity(traffic, road)
    if b <= 0 or intensity == 0:
        return 0.0
    if not correlated or s == 0:
        along, across = road_offsets(dest, road)
        lt = _log_attenuation(along, across, b, ch)

        def f(x):
            g = _activity(lt(x))
            return g * (1.0 - g)

        return intensity * _integrate_road(f, along, _scale(across, b, ch), geom, quad)

    def factory(lt_r, lt_d):
        def f(x):
            g = _activity(lt_d(x))
            return (1.0 - _activity(lt_r(x))) * g * (1.0 - g)
        return f

    return intensity * _pair_integral(factory, relay, dest, s, b, road, ch, geom, quad)
