import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coopvanet.geometry import ChannelParams, NodePose, RoadGeometry, TrafficParams
from coopvanet.laplace import (
    QuadratureError,
    QuadratureSettings,
    interference_load,
    joint_log_slope,
    laplace,
    laplace_x,
    laplace_x_closed_finite,
    laplace_x_closed_infinite,
    laplace_y,
    log_joint_laplace,
    log_rho,
    rho_x,
)

CH = ChannelParams()
TR = TrafficParams(0.05, 0.05, 0.05)


def _mp_load(node, s, road, ch, Z=None):
    """Independent high-precision oracle: integrate 1/(1 + (A r)^a/(sP)) directly."""
    along, across = (node.x, node.y) if road == "x" else (node.y, node.x)
    mpmath.mp.dps = 30

    def f(x):
        r2 = across ** 2 + (x - along) ** 2
        return 1 / (1 + (ch.A ** 2 * r2) ** (mpmath.mpf(ch.alpha) / 2) / (s * ch.P))

    lo, hi = (-mpmath.inf, mpmath.inf) if Z is None else (-Z, Z)
    pts = [lo, along, hi] if lo < along < hi else [lo, hi]
    return float(mpmath.quad(f, pts))


def test_zero_argument_is_one():
    assert laplace_x(NodePose(10.0), 0.0, TR, CH) == 1.0


def test_zero_traffic_is_one():
    assert laplace_x(NodePose(10.0), 1e12, TrafficParams(0, 0, 0.5), CH) == 1.0
    assert laplace_x(NodePose(10.0), 1e12, TrafficParams(0.1, 0.1, 0.0), CH) == 1.0


def test_negative_argument_rejected():
    with pytest.raises(ValueError):
        laplace_x(NodePose(10.0), -1.0, TR, CH)


@pytest.mark.parametrize("alpha", [2.0, 3.0, 4.0])
@pytest.mark.parametrize("pose", [NodePose(0.0), NodePose(80.0, 0.0), NodePose(40.0, 1.0)])
def test_load_against_mpmath(alpha, pose):
    ch = ChannelParams(alpha=alpha)
    s = (650.0 * 150.0) ** alpha / 0.12
    got = interference_load(pose, s, "x", ch, RoadGeometry())
    assert got == pytest.approx(_mp_load(pose, s, "x", ch), rel=1e-8)


def test_closed_infinite_formula():
    # k = sP/A^2, on-road receiver: load = pi sqrt(k)
    s = (650.0 * 100.0) ** 2 / 0.12
    k = s * 0.12 / 650.0 ** 2
    assert k == pytest.approx(1e4)
    val = laplace_x_closed_infinite(NodePose(0.0), s, TR, CH)
    assert val == pytest.approx(math.exp(-0.05 * 0.05 * math.pi * 100.0), rel=1e-12)


def test_finite_closed_matches_mpmath():
    node = NodePose.from_xy(120.0, 30.0)
    s = (650.0 * 70.0) ** 2 / 0.12
    got = -math.log(laplace_x_closed_finite(node, s, TR, CH, 400.0)) / (0.05 * 0.05)
    assert got == pytest.approx(_mp_load(node, s, "x", CH, Z=400.0), rel=1e-10)


def test_infinite_road_shift_invariance():
    s = 1e12
    a = laplace_x(NodePose.from_xy(0.0, 20.0), s, TR, CH)
    b = laplace_x(NodePose.from_xy(5000.0, 20.0), s, TR, CH)
    assert a == pytest.approx(b, rel=1e-12)


def test_finite_road_depends_on_position():
    s = (650.0 * 200.0) ** 2 / 0.12
    geom = RoadGeometry.finite(300.0)
    centre = laplace_x(NodePose(0.0), s, TR, CH, geom)
    edge = laplace_x(NodePose(290.0), s, TR, CH, geom)
    assert edge > centre


def test_road_symmetry():
    # a node on the X road sees the Y road as a node on the Y road sees the X road
    s = 1e12
    a = laplace_y(NodePose.from_xy(70.0, 0.0), s, TR, CH)
    b = laplace_x(NodePose.from_xy(0.0, 70.0), s, TR, CH)
    assert a == pytest.approx(b, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 500), st.floats(0, 2 * math.pi), st.floats(1e8, 1e16), st.floats(50, 5e4))
def test_closed_vs_numeric(n, th, s, Z):
    node = NodePose(n, th)
    for geom in (RoadGeometry(), RoadGeometry.finite(Z)):
        for road in ("x", "y"):
            c = laplace(node, s, road, TR, CH, geom, method="closed")
            q = laplace(node, s, road, TR, CH, geom, method="numeric")
            assert q == pytest.approx(c, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e9, 1e15), st.floats(1e9, 1e15))
def test_laplace_decreasing_in_s(s1, s2):
    lo, hi = sorted((s1, s2))
    node = NodePose(60.0, 0.3)
    assert laplace_x(node, hi, TR, CH) <= laplace_x(node, lo, TR, CH) + 1e-15


def test_closed_form_rejects_other_alpha():
    with pytest.raises(ValueError):
        laplace(NodePose(1.0), 1e10, "x", TR, ChannelParams(alpha=3), method="closed")


def test_quadrature_error_reported():
    tight = QuadratureSettings(rel_tol=1e-14, abs_tol=1e-300, max_subdivisions=1)
    with pytest.raises(QuadratureError):
        interference_load(NodePose.from_xy(3.0, 0.01), 1e16, "x", ChannelParams(alpha=4.3), RoadGeometry(), tight)


def _mp_log_rho(s, b, relay, dest, road, traffic, ch):
    mpmath.mp.dps = 30
    ra, rc = (relay.x, relay.y) if road == "x" else (relay.y, relay.x)
    da, dc = (dest.x, dest.y) if road == "x" else (dest.y, dest.x)

    def g(x, along, across, arg):
        return 1 / (1 + (ch.A ** 2 * (across ** 2 + (x - along) ** 2)) ** (mpmath.mpf(ch.alpha) / 2) / (arg * ch.P))

    f = lambda x: g(x, ra, rc, s) * g(x, da, dc, b)
    pts = sorted({ra, da})
    lam = traffic.lambda_x if road == "x" else traffic.lambda_y
    return traffic.p * lam * float(mpmath.quad(f, [-mpmath.inf] + pts + [mpmath.inf]))


@pytest.mark.parametrize("road", ["x", "y"])
@pytest.mark.parametrize("alpha", [2.0, 3.5])
def test_log_rho_against_mpmath(road, alpha):
    ch = ChannelParams(alpha=alpha)
    relay, dest = NodePose.from_xy(25.0, 25.0), NodePose.from_xy(0.0, 60.0)
    s, b = (650 * 40.0) ** alpha / 0.12, (650 * 70.0) ** alpha / 0.12
    got = log_rho(s, b, relay, dest, road, TR, ch)
    assert got == pytest.approx(_mp_log_rho(s, b, relay, dest, road, TR, ch), rel=1e-8)


def test_rho_symmetric_in_roles():
    r, d = NodePose(50.0), NodePose(150.0)
    s, b = 3e12, 9e12
    assert log_rho(s, b, r, d, "x", TR, CH) == pytest.approx(log_rho(b, s, d, r, "x", TR, CH), rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(1e9, 1e15), st.floats(1e9, 1e15), st.floats(0, 300), st.floats(0, 300))
def test_rho_at_least_one(s, b, xr, xd):
    r, d = NodePose.from_xy(xr, 10.0), NodePose.from_xy(xd, 0.0)
    assert rho_x(s, b, r, d, TR, CH) >= 1.0


def test_rho_zero_argument():
    assert log_rho(0.0, 1e12, NodePose(1.0), NodePose(2.0), "x", TR, CH) == 0.0


def test_joint_equals_product_when_uncorrelated():
    r, d = NodePose(50.0), NodePose(150.0)
    joint = log_joint_laplace(1e12, 2e12, r, d, "x", TR, CH, correlated=False)
    marg = math.log(laplace_x(r, 1e12, TR, CH)) + math.log(laplace_x(d, 2e12, TR, CH))
    assert joint == pytest.approx(marg, rel=1e-12)


def test_joint_colocated_is_marginal_at_sum():
    # one observation point: E[exp(-(s+b) I)] cannot be built from rho, but for
    # s -> 0 the joint transform reduces to the destination marginal
    r, d = NodePose(50.0), NodePose(150.0)
    joint = log_joint_laplace(0.0, 2e12, r, d, "x", TR, CH)
    assert joint == pytest.approx(math.log(laplace_x(d, 2e12, TR, CH)), rel=1e-12)


@pytest.mark.parametrize("correlated", [True, False])
@pytest.mark.parametrize("alpha", [2.0, 3.0])
def test_slope_finite_difference(correlated, alpha):
    ch = ChannelParams(alpha=alpha)
    r, d = NodePose.from_xy(25.0, 25.0), NodePose.from_xy(0.0, 60.0)
    s, b = (650 * 40.0) ** alpha / 0.12, (650 * 70.0) ** alpha / 0.12
    h = 1e-5
    f = lambda bb: log_joint_laplace(s, bb, r, d, "y", TR, ch, correlated=correlated)
    fd = -b * (f(b * (1 + h)) - f(b * (1 - h))) / (2 * b * h)
    assert joint_log_slope(s, b, r, d, "y", TR, ch, correlated=correlated) == pytest.approx(fd, rel=1e-6)


def test_finite_converges_to_infinite():
    node = NodePose.from_xy(30.0, 40.0)
    s = 5e12
    inf = laplace_x(node, s, TR, CH)
    vals = [laplace_x(node, s, TR, CH, RoadGeometry.finite(Z)) for Z in (1e2, 1e3, 1e4, 1e6)]
    gaps = [abs(v - inf) for v in vals]
    assert all(np.diff(gaps) <= 0)
    assert gaps[-1] < 1e-6
