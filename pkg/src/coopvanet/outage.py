"""Analytical outage probabilities for direct and decode-and-forward
transmissions, under selection combining (SC) or maximum ratio combining
(MRC), with independent (HSV) or shared (LSV) interferer sets.

All cooperative formulas are written in terms of single-link success
probabilities ``S_ab = N_ab L_D(K_ab)`` and the interference cross-term
``rho`` between the relay and destination observations::

    P[O_SR & O_SD]      = (1 - S_SR)(1 - S_SD) + S_SR S_SD (rho(K_SR, K_SD) - 1)
    P[~O_SR & O_RD]     = S_SR (1 - S_RD rho(K_SR, K_RD))
    P[~O_SR & O_SRD]    = S_SR (1 - (l_RD S_RD rho(K_SR, K_RD) - l_SD S_SD rho(K_SR, K_SD)) / (l_RD - l_SD))

which expands to the usual four-term expressions and keeps cancellation
under control when the outage is small.  Under HSV ``rho == 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .geometry import (
    Mobility,
    NetworkConfig,
    NodePose,
    Scenario,
    Scheme,
    link_budget,
)
from .laplace import DEFAULT_QUAD, ROADS, QuadratureSettings, _log_laplace, joint_log_slope, log_rho

__all__ = [
    "OutageBreakdown",
    "EQUAL_GAIN_RTOL",
    "success_probability",
    "success_sd",
    "success_sr",
    "outage_direct",
    "p_first_phase",
    "p_second_phase_sc",
    "p_second_phase_mrc",
    "outage",
    "ccdf_sum_two_exp",
    "throughput",
]

# relative gap below which l_RD and l_SD are treated as equal in the MRC formula
EQUAL_GAIN_RTOL = 1e-9


@dataclass(frozen=True)
class OutageBreakdown:
    """Outage split by phase.  For a direct transmission the whole outage is
    reported as ``p_first_phase``."""

    p_first_phase: float
    p_second_phase: float
    total: float


class _Evaluator:
    """Memoized transforms for one outage evaluation."""

    def __init__(self, cfg: NetworkConfig, quad: QuadratureSettings, correlated: bool):
        self.cfg = cfg
        self.quad = quad
        self.correlated = correlated
        self.log_marginal = lru_cache(maxsize=None)(self._log_marginal)
        self.log_cross = lru_cache(maxsize=None)(self._log_cross)
        self.slope = lru_cache(maxsize=None)(self._slope)

    def _log_marginal(self, node: NodePose, s: float) -> float:
        c = self.cfg
        return sum(_log_laplace(node, s, road, c.traffic, c.channel, c.geometry, self.quad)
                   for road in ROADS)

    def _log_cross(self, relay: NodePose, s: float, dest: NodePose, b: float) -> float:
        if not self.correlated:
            return 0.0
        c = self.cfg
        return sum(log_rho(s, b, relay, dest, road, c.traffic, c.channel, c.geometry, self.quad)
                   for road in ROADS)

    def _slope(self, relay: NodePose, s: float, dest: NodePose, b: float) -> float:
        c = self.cfg
        return sum(joint_log_slope(s, b, relay, dest, road, c.traffic, c.channel, c.geometry,
                                   self.quad, correlated=self.correlated)
                   for road in ROADS)

    def success(self, tx: NodePose, rx: NodePose, theta: float) -> float:
        lb = link_budget(tx, rx, theta, self.cfg.channel)
        return lb.N_ab * math.exp(self.log_marginal(rx, lb.K_ab))


def _evaluator(scenario: Scenario, cfg: NetworkConfig, quad, unit_cross_terms: bool) -> _Evaluator:
    correlated = scenario.mobility is Mobility.LSV and not unit_cross_terms
    return _Evaluator(cfg, quad, correlated)


def _require_relay(scenario: Scenario) -> NodePose:
    if scenario.relay is None:
        raise ValueError("scenario has no relay")
    return scenario.relay


def success_probability(tx: NodePose, rx: NodePose, theta: float, cfg: NetworkConfig,
                        quad: QuadratureSettings = DEFAULT_QUAD) -> float:
    """P[SINR_{tx->rx} >= theta] = N * L_X(K) * L_Y(K)."""
    return _Evaluator(cfg, quad, False).success(tx, rx, theta)


def success_sd(scenario: Scenario, cfg: NetworkConfig, quad: QuadratureSettings = DEFAULT_QUAD) -> float:
    return success_probability(scenario.source, scenario.destination, scenario.threshold, cfg, quad)


def success_sr(scenario: Scenario, cfg: NetworkConfig, quad: QuadratureSettings = DEFAULT_QUAD) -> float:
    relay = _require_relay(scenario)
    return success_probability(scenario.source, relay, scenario.threshold, cfg, quad)


def outage_direct(dest: NodePose, source: NodePose, theta: float, cfg: NetworkConfig,
                  quad: QuadratureSettings = DEFAULT_QUAD) -> float:
    return 1.0 - success_probability(source, dest, theta, cfg, quad)


def _first_phase(ev: _Evaluator, sc: Scenario) -> float:
    S, R, D, th = sc.source, sc.relay, sc.destination, sc.threshold
    s_sr = ev.success(S, R, th)
    s_sd = ev.success(S, D, th)
    k_sr = link_budget(S, R, th, ev.cfg.channel).K_ab
    k_sd = link_budget(S, D, th, ev.cfg.channel).K_ab
    cross = math.expm1(ev.log_cross(R, k_sr, D, k_sd))
    return (1.0 - s_sr) * (1.0 - s_sd) + s_sr * s_sd * cross


def _second_phase_sc(ev: _Evaluator, sc: Scenario) -> float:
    S, R, D, th = sc.source, sc.relay, sc.destination, sc.threshold
    s_sr = ev.success(S, R, th)
    s_rd = ev.success(R, D, th)
    k_sr = link_budget(S, R, th, ev.cfg.channel).K_ab
    k_rd = link_budget(R, D, th, ev.cfg.channel).K_ab
    return s_sr * (1.0 - s_rd * math.exp(ev.log_cross(R, k_sr, D, k_rd)))


def _second_phase_mrc(ev: _Evaluator, sc: Scenario) -> float:
    S, R, D, th = sc.source, sc.relay, sc.destination, sc.threshold
    ch = ev.cfg.channel
    s_sr = ev.success(S, R, th)
    k_sr = link_budget(S, R, th, ch).K_ab
    rd = link_budget(R, D, th, ch)
    sd = link_budget(S, D, th, ch)
    l_rd, l_sd = rd.l_ab, sd.l_ab
    if abs(l_rd - l_sd) <= EQUAL_GAIN_RTOL * max(l_rd, l_sd):
        # Erlang-2 limit of the combined-gain CCDF, carried through the expectation
        k = rd.K_ab
        s_k = ev.success(R, D, th)
        combined = s_k * math.exp(ev.log_cross(R, k_sr, D, k)) * (
            1.0 + k * ch.sigma2 + ev.slope(R, k_sr, D, k))
    else:
        s_rd = ev.success(R, D, th)
        s_sd = ev.success(S, D, th)
        t_rd = s_rd * math.exp(ev.log_cross(R, k_sr, D, rd.K_ab))
        t_sd = s_sd * math.exp(ev.log_cross(R, k_sr, D, sd.K_ab))
        combined = (l_rd * t_rd - l_sd * t_sd) / (l_rd - l_sd)
    return s_sr * (1.0 - combined)


def p_first_phase(scenario: Scenario, cfg: NetworkConfig, quad: QuadratureSettings = DEFAULT_QUAD,
                  unit_cross_terms: bool = False) -> float:
    """P[O_SR & O_SD]: neither the relay nor the destination decodes in slot 1.

    ``unit_cross_terms=True`` substitutes ``rho = 1`` into the LSV formula.
    """
    _require_relay(scenario)
    return _first_phase(_evaluator(scenario, cfg, quad, unit_cross_terms), scenario)


def p_second_phase_sc(scenario: Scenario, cfg: NetworkConfig, quad: QuadratureSettings = DEFAULT_QUAD,
                      unit_cross_terms: bool = False) -> float:
    """P[~O_SR & O_RD]: the relay decodes but the relay-destination hop fails."""
    _require_relay(scenario)
    return _second_phase_sc(_evaluator(scenario, cfg, quad, unit_cross_terms), scenario)


def p_second_phase_mrc(scenario: Scenario, cfg: NetworkConfig, quad: QuadratureSettings = DEFAULT_QUAD,
                       unit_cross_terms: bool = False) -> float:
    """P[~O_SR & O_SRD]: the relay decodes but the combined S+R signal at the
    destination is still below threshold."""
    _require_relay(scenario)
    return _second_phase_mrc(_evaluator(scenario, cfg, quad, unit_cross_terms), scenario)


def outage(scenario: Scenario, cfg: NetworkConfig, quad: QuadratureSettings = DEFAULT_QUAD,
           unit_cross_terms: bool = False) -> OutageBreakdown:
    if scenario.scheme is Scheme.DIRECT:
        p = outage_direct(scenario.destination, scenario.source, scenario.threshold, cfg, quad)
        return OutageBreakdown(p, 0.0, p)
    ev = _evaluator(scenario, cfg, quad, unit_cross_terms)
    first = _first_phase(ev, scenario)
    if scenario.scheme is Scheme.SC:
        second = _second_phase_sc(ev, scenario)
    else:
        second = _second_phase_mrc(ev, scenario)
    return OutageBreakdown(first, second, first + second)


def ccdf_sum_two_exp(u: float, l_rd: float, l_sd: float) -> float:
    """CCDF of ``l_rd E1 + l_sd E2`` for independent unit exponentials.

    Written as ``e^{-u/a} (1 - (b/d) expm1(-u d / (a b)))`` with ``a >= b``
    and ``d = a - b`` so that nearly equal gains do not cancel; the
    equal-gain case returns the Erlang-2 tail ``(1 + u/l) e^{-u/l}``.
    """
    if not (l_rd > 0 and l_sd > 0):
        raise ValueError("gains must be > 0")
    if u <= 0:
        return 1.0
    a, b = max(l_rd, l_sd), min(l_rd, l_sd)
    d = a - b
    if d == 0:
        return (1.0 + u / a) * math.exp(-u / a)
    return math.exp(-u / a) * (1.0 - (b / d) * math.expm1(-u * d / (a * b)))


def throughput(theta: float, success: float) -> float:
    """Success probability times ``log2(1 + theta)`` (bits per channel use)."""
    if theta < 0 or not 0 <= success <= 1:
        raise ValueError("need theta >= 0 and success in [0, 1]")
    return success * math.log2(1.0 + theta)

