"""Monte Carlo simulation of the two-road network, used as an independent
check of the analytical outage and Laplace expressions.

Each trial draws Poisson interferers on both roads, applies ALOHA, draws
unit-mean exponential fading for every link and evaluates the outage
events by comparing SINRs against the threshold.

Mobility semantics:

* LSV: one interferer set (and one ALOHA draw) per road is shared by the
  relay observation in slot 1 and the destination observations in slots 1
  and 2.  Fading is redrawn for every (interferer, receiver, slot).
* HSV: every observation (relay slot 1, destination slot 1, destination
  slot 2) sees its own independent interferer set.

Trials are processed in fixed-size chunks; chunk ``c`` draws from a
generator seeded by ``SeedSequence(seed, spawn_key=(c,))``.  Results are
therefore a pure function of the seed and the trial configuration, no
matter how many worker processes run the chunks.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import (
    ChannelParams,
    Mobility,
    NetworkConfig,
    NodePose,
    Scenario,
    Scheme,
    link_budget,
)
from .laplace import road_offsets

log = logging.getLogger(__name__)

__all__ = [
    "TrialConfig",
    "OutageEstimate",
    "MeanEstimate",
    "sample_road_ppp",
    "aloha_thin",
    "aggregate_interference",
    "sample_interference",
    "estimate_outage",
    "estimate_schemes",
    "estimate_joint_laplace",
]


@dataclass(frozen=True)
class TrialConfig:
    trials: int = 10_000
    seed: int = 0
    sim_window: float = 1e4  # half-width of each simulated road when roads are infinite
    chunk_size: int = 2_000
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.sim_window > 0:
            raise ValueError("sim_window must be > 0")
        if self.chunk_size < 1 or self.workers < 1:
            raise ValueError("chunk_size and workers must be >= 1")


@dataclass(frozen=True)
class OutageEstimate:
    p_hat: float
    stderr: float
    trials: int

    @classmethod
    def from_count(cls, hits: int, trials: int) -> "OutageEstimate":
        p = hits / trials
        return cls(p, math.sqrt(p * (1.0 - p) / trials), trials)


@dataclass(frozen=True)
class MeanEstimate:
    value: float
    stderr: float
    trials: int


def sample_road_ppp(lam: float, half_width: float, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous Poisson points of intensity ``lam`` on [-half_width, half_width]."""
    if lam < 0:
        raise ValueError("intensity must be >= 0")
    if lam == 0:
        return np.empty(0)
    count = rng.poisson(2.0 * lam * half_width)
    return rng.uniform(-half_width, half_width, count)


def aloha_thin(points: np.ndarray, p: float, rng: np.random.Generator) -> np.ndarray:
    """Keep each point independently with probability ``p``."""
    if not 0 <= p <= 1:
        raise ValueError("ALOHA probability must lie in [0, 1]")
    points = np.asarray(points)
    return points[rng.random(points.shape[0]) < p]


def _gain(r2: np.ndarray, ch: ChannelParams) -> np.ndarray:
    if ch.alpha == 2:
        return 1.0 / (ch.A * ch.A * r2)
    return (ch.A * ch.A * r2) ** (-0.5 * ch.alpha)


def aggregate_interference(receiver: NodePose, x_points, y_points, rng: np.random.Generator,
                           ch: ChannelParams, unit_fading: bool = False) -> float:
    """Interference power at ``receiver`` from active interferers at positions
    ``x_points`` on the X road and ``y_points`` on the Y road."""
    total = 0.0
    for road, pts in (("x", x_points), ("y", y_points)):
        pts = np.asarray(pts, dtype=float)
        if pts.size == 0:
            continue
        along, across = road_offsets(receiver, road)
        r2 = across * across + (pts - along) ** 2
        if np.any(r2 == 0):
            raise ValueError("interferer co-located with the receiver")
        fading = np.ones(pts.size) if unit_fading else rng.standard_exponential(pts.size)
        total += float(np.sum(ch.P * fading * _gain(r2, ch)))
    return total


def _road_realizations(lam: float, p: float, half_width: float, size: int, rng: np.random.Generator):
    """Active interferer positions for ``size`` independent trials, flattened,
    with the owning trial index of each point."""
    counts = rng.poisson(2.0 * lam * half_width, size)
    # per-point ALOHA coin flips only matter through how many survive, and
    # positions are i.i.d. uniform, so thin the counts and place survivors
    active = rng.binomial(counts, p)
    pos = rng.uniform(-half_width, half_width, int(active.sum()))
    owner = np.repeat(np.arange(size), active)
    return pos, owner


def _observe(pos, owner, along, across, size, ch, rng, half_width):
    r2 = across * across + (pos - along) ** 2
    bad = r2 == 0
    while np.any(bad):
        # floating-point collision with the receiver: redraw that interferer
        log.debug("re-sampling %d co-located interferer(s)", int(bad.sum()))
        pos = pos.copy()
        pos[bad] = rng.uniform(-half_width, half_width, int(bad.sum()))
        r2 = across * across + (pos - along) ** 2
        bad = r2 == 0
    w = ch.P * rng.standard_exponential(pos.size) * _gain(r2, ch)
    return np.bincount(owner, weights=w, minlength=size)


def _half_width(cfg: NetworkConfig, trial_cfg: TrialConfig) -> float:
    return trial_cfg.sim_window if cfg.geometry.is_infinite else cfg.geometry.half_length


def sample_interference(observers: Sequence[NodePose], cfg: NetworkConfig, half_width: float,
                        size: int, rng: np.random.Generator, shared: bool = True,
                        roads: Sequence[str] = ("x", "y")) -> np.ndarray:
    """Draw ``size`` realizations of the interference at each observer.

    Returns an array of shape ``(len(observers), size)``.  With
    ``shared=True`` all observers see the same interferers (independent
    fading); otherwise each observer gets an independent interferer set.
    """
    tr = cfg.traffic
    out = np.zeros((len(observers), size))
    for road in roads:
        lam = tr.lambda_x if road == "x" else tr.lambda_y
        if lam == 0 or tr.p == 0:
            continue
        if shared:
            pos, owner = _road_realizations(lam, tr.p, half_width, size, rng)
        for i, node in enumerate(observers):
            if not shared:
                pos, owner = _road_realizations(lam, tr.p, half_width, size, rng)
            along, across = road_offsets(node, road)
            out[i] += _observe(pos, owner, along, across, size, cfg.channel, rng, half_width)
    return out


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))


def _chunks(trial_cfg: TrialConfig):
    n, c = trial_cfg.trials, trial_cfg.chunk_size
    return [(i, min(c, n - i * c)) for i in range((n + c - 1) // c)]


def _run_chunks(fn, args, trial_cfg: TrialConfig):
    jobs = [(args, trial_cfg.seed, idx, size) for idx, size in _chunks(trial_cfg)]
    if trial_cfg.workers == 1 or len(jobs) == 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=trial_cfg.workers) as pool:
        return list(pool.map(fn, jobs))


def _outage_chunk(job):
    (scenario, cfg, half_width), seed, idx, size = job
    rng = _chunk_rng(seed, idx)
    S, D = scenario.source, scenario.destination
    ch, th = cfg.channel, scenario.threshold
    noise = ch.sigma2
    shared = scenario.mobility is Mobility.LSV

    if scenario.relay is None:
        (i_d1,) = sample_interference([D], cfg, half_width, size, rng, shared)
        sd = link_budget(S, D, th, ch)
        o_sd = ch.P * sd.l_ab * rng.standard_exponential(size) < th * (noise + i_d1)
        return {Scheme.DIRECT: int(o_sd.sum())}

    R = scenario.relay
    # observations: relay in slot 1, destination in slot 1, destination in slot 2
    i_r, i_d1, i_d2 = sample_interference([R, D, D], cfg, half_width, size, rng, shared)
    sr, sd, rd = (link_budget(S, R, th, ch), link_budget(S, D, th, ch), link_budget(R, D, th, ch))
    h_sr, h_sd1, h_rd, h_sd2 = rng.standard_exponential((4, size))
    o_sr = ch.P * sr.l_ab * h_sr < th * (noise + i_r)
    o_sd = ch.P * sd.l_ab * h_sd1 < th * (noise + i_d1)
    o_rd = ch.P * rd.l_ab * h_rd < th * (noise + i_d2)
    o_srd = ch.P * (sd.l_ab * h_sd2 + rd.l_ab * h_rd) < th * (noise + i_d2)
    first = o_sr & o_sd
    return {
        Scheme.DIRECT: int(o_sd.sum()),
        Scheme.SC: int((first | (~o_sr & o_rd)).sum()),
        Scheme.MRC: int((first | (~o_sr & o_srd)).sum()),
    }


def estimate_schemes(scenario: Scenario, cfg: NetworkConfig, trial_cfg: TrialConfig) -> dict:
    """Estimate the outage of every scheme the scenario supports from one set
    of draws (Direct only without a relay; Direct, SC and MRC with one).

    The scheme stored in ``scenario`` is ignored; its mobility model is used.
    """
    parts = _run_chunks(_outage_chunk, (scenario, cfg, _half_width(cfg, trial_cfg)), trial_cfg)
    return {k: OutageEstimate.from_count(sum(p[k] for p in parts), trial_cfg.trials) for k in parts[0]}


def estimate_outage(scenario: Scenario, cfg: NetworkConfig, trial_cfg: TrialConfig) -> OutageEstimate:
    return estimate_schemes(scenario, cfg, trial_cfg)[scenario.scheme]


def _joint_laplace_chunk(job):
    (s, b, relay, dest, cfg, half_width, roads), seed, idx, size = job
    rng = _chunk_rng(seed, idx)
    i_r, i_d = sample_interference([relay, dest], cfg, half_width, size, rng, True, roads)
    v = np.exp(-s * i_r - b * i_d)
    return float(v.sum()), float(np.sum(v * v))


def estimate_joint_laplace(s: float, b: float, relay: NodePose, dest: NodePose, cfg: NetworkConfig,
                           trial_cfg: TrialConfig, roads: Sequence[str] = ("x", "y")) -> MeanEstimate:
    """Sample mean of ``exp(-s I_R - b I_D)`` with a shared interferer set
    (LSV sampling), restricted to the interference from ``roads``."""
    if s < 0 or b < 0:
        raise ValueError("Laplace arguments must be >= 0")
    args = (s, b, relay, dest, cfg, _half_width(cfg, trial_cfg), tuple(roads))
    parts = _run_chunks(_joint_laplace_chunk, args, trial_cfg)
    n = trial_cfg.trials
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    return MeanEstimate(mean, math.sqrt(var / n), n)
