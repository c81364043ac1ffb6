"""Named parameter sweeps reproducing the intersection study figures as
tables, plus the relay-placement, highway and throughput studies.

Common settings for every preset: ``A = 650``, ``P = 120 mW``,
``lambda_X = lambda_Y = lambda``, infinite roads, ``alpha = 2`` and no
noise unless the preset varies them.  Values the figure captions leave
open (node placement, ``p``, ``theta``) are marked *inferred* in the
preset docstrings; ``docs/presets.md`` lists them.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .geometry import (
    ChannelParams,
    Mobility,
    NetworkConfig,
    NodePose,
    RoadGeometry,
    Scenario,
    Scheme,
    TrafficParams,
    distance,
)
from .montecarlo import TrialConfig, estimate_outage, estimate_schemes
from .outage import outage, throughput

__all__ = [
    "SweepSpec",
    "PRESETS",
    "preset",
    "run_sweep",
    "highway_scenario",
    "optimal_relay_position",
    "bisector_relay_study",
    "relay_count_curve",
    "throughput_sweep",
    "LAMBDA_GRID",
    "validate",
]

LAMBDA_GRID = (0.01, 0.02, 0.03, 0.05, 0.07, 0.1, 0.15, 0.2)
THETA_GRID = (0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0, 50.0, 70.0, 100.0,
              150.0, 200.0)

# default triplet (inferred): all three nodes on the X road, relay halfway
SOURCE = (0.0, 0.0)
RELAY = (100.0, 0.0)
DEST = (200.0, 0.0)


@dataclass(frozen=True)
class SweepSpec:
    """A cartesian-product sweep.

    ``axes`` is an ordered sequence of ``(name, values)``; rows are produced
    in row-major order of the axes.  ``build`` maps one row's parameters
    (``fixed`` merged with the axis values) to a scenario and network
    configuration.
    """

    name: str
    axes: tuple
    build: Callable[[dict], tuple]
    fixed: Mapping = field(default_factory=dict)
    evaluators: tuple = ("analytic",)
    columns: tuple = ()
    trials: int = 10_000
    seed: int = 0
    sim_window: float = 1e4

    def __post_init__(self):
        for name, values in self.axes:
            if len(values) == 0:
                raise ValueError(f"axis {name!r} has an empty grid")
        bad = set(self.evaluators) - {"analytic", "mc"}
        if bad or not self.evaluators:
            raise ValueError(f"unknown evaluators {sorted(bad)}")

    def points(self) -> list[dict]:
        names = [a[0] for a in self.axes]
        return [dict(self.fixed, **dict(zip(names, combo)))
                for combo in itertools.product(*(a[1] for a in self.axes))]

    def replace(self, **kw) -> "SweepSpec":
        return replace(self, **kw)


def _pose(xy) -> NodePose:
    return NodePose.from_xy(*xy)


def build_point(params: dict) -> tuple[Scenario, NetworkConfig]:
    """Generic builder: reads lambda, p, theta, scheme, model, alpha,
    noise_dbm, road ('intersection' or 'highway'), Z and S/R/D coordinates."""
    scheme = Scheme(params.get("scheme", "mrc"))
    relay = None if scheme is Scheme.DIRECT else _pose(params.get("R", RELAY))
    sc = Scenario(
        source=_pose(params.get("S", SOURCE)),
        destination=_pose(params.get("D", DEST)),
        relay=relay,
        scheme=scheme,
        mobility=Mobility(params.get("model", "hsv")),
        theta=float(params.get("theta", 1.0)),
    )
    lam = float(params.get("lambda", 0.05))
    noise = params.get("noise_dbm", "off")
    noise = None if noise in (None, "off") else float(noise)
    ch = ChannelParams.with_noise_dbm(noise, alpha=float(params.get("alpha", 2.0)))
    geom = RoadGeometry(params.get("Z"))
    cfg = NetworkConfig(channel=ch, traffic=TrafficParams(lam, lam, float(params.get("p", 0.05))),
                        geometry=geom)
    if params.get("road", "intersection") == "highway":
        cfg = highway_scenario(cfg)
    return sc, cfg


def _build_relay_on_segment(params):
    return build_point(dict(params, R=(params["relay_x"], 0.0)))


def _build_triplet_offset(params):
    t, r = params["distance"], params["r_sd"]
    return build_point(dict(params, S=(t, 0.0), R=(t + r / 2, 0.0), D=(t + r, 0.0)))


def _build_bisector(params):
    c = params["relay_c"]
    return build_point(dict(params, S=(params["s"], 0.0), D=(0.0, params["d"]), R=(c, c)))


def _row_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _evaluate(spec: SweepSpec, index: int, params: dict) -> dict:
    row = dict(params)
    try:
        sc, cfg = spec.build(params)
        rate = math.log2(1.0 + sc.threshold)
        if "analytic" in spec.evaluators:
            row["op_analytic"] = outage(sc, cfg).total
            row["throughput_analytic"] = min(1.0, max(0.0, 1.0 - row["op_analytic"])) * rate
        if "mc" in spec.evaluators:
            tc = TrialConfig(trials=spec.trials, seed=_row_seed(spec.seed, index),
                             sim_window=spec.sim_window)
            est = estimate_outage(sc, cfg, tc)
            row["op_mc"], row["stderr"] = est.p_hat, est.stderr
            row["throughput_mc"] = (1.0 - est.p_hat) * rate
        row["error"] = ""
    except (ArithmeticError, ValueError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[dict]:
    """Evaluate every grid point; rows come back in grid order.

    A numeric failure in one row is recorded in its ``error`` cell and the
    remaining rows are still evaluated.
    """
    points = spec.points()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda a: _evaluate(spec, *a), enumerate(points)))
    else:
        rows = [_evaluate(spec, i, p) for i, p in enumerate(points)]
    if spec.columns:
        # keep the error cell even when the preset schema omits it
        rows = [dict({c: r.get(c, "") for c in spec.columns}, error=r["error"]) for r in rows]
    return rows


def highway_scenario(cfg: NetworkConfig) -> NetworkConfig:
    """Single-road counterpart of an intersection configuration: the Y road
    carries no vehicles."""
    return cfg.with_traffic(lambda_y=0.0)


def optimal_relay_position(scenario: Scenario, cfg: NetworkConfig,
                           relay_grid: Sequence[NodePose]) -> tuple[NodePose, float]:
    """Relay pose in ``relay_grid`` minimizing the analytic outage.

    Ties (within 1e-12) go to the pose nearest the source-destination
    midpoint.
    """
    if not relay_grid:
        raise ValueError("empty relay grid")
    if scenario.scheme is Scheme.DIRECT:
        raise ValueError("relay placement needs a cooperative scheme")
    values = [outage(scenario.replace(relay=r), cfg).total for r in relay_grid]
    best = min(values)
    mid = NodePose.from_xy((scenario.source.x + scenario.destination.x) / 2,
                           (scenario.source.y + scenario.destination.y) / 2)
    ties = [i for i, v in enumerate(values) if v - best <= 1e-12]
    i = min(ties, key=lambda j: distance(relay_grid[j], mid))
    return relay_grid[i], values[i]


def bisector_relay_study(s_grid: Iterable[float], d_grid: Iterable[float],
                         relay_offsets: Iterable[float], cfg: NetworkConfig, theta: float = 1.0,
                         scheme="mrc", mobility="lsv") -> list[dict]:
    """Outage with the source at (s, 0), the destination at (0, d) and a
    relay at (c, c) on the first bisector, for every (s, d, c)."""
    rows = []
    for s, d, c in itertools.product(s_grid, d_grid, relay_offsets):
        sc = Scenario(NodePose(s, 0.0), NodePose(d, math.pi / 2), NodePose.from_xy(c, c),
                      scheme, mobility, theta=theta)
        rows.append({"s": s, "d": d, "relay_c": c, "op_analytic": outage(sc, cfg).total})
    return rows


def relay_count_curve(rows: list[dict]) -> list[tuple[int, float]]:
    """Mean (over the (s, d) grid) of the best outage achievable with the k
    relays closest to the intersection, for k = 1..n."""
    offsets = sorted({r["relay_c"] for r in rows})
    table: dict = {}
    for r in rows:
        table.setdefault((r["s"], r["d"]), {})[r["relay_c"]] = r["op_analytic"]
    curve = []
    for k in range(1, len(offsets) + 1):
        use = offsets[:k]
        curve.append((k, float(np.mean([min(v[c] for c in use) for v in table.values()]))))
    return curve


def throughput_sweep(theta_grid: Sequence[float], lambdas: Sequence[float], models: Sequence[str],
                     base: Optional[dict] = None) -> tuple[list[dict], dict]:
    """Throughput ``(1 - OP) log2(1 + theta)`` along ``theta_grid`` for each
    (lambda, model) curve.

    Returns the rows and ``{(lambda, model): argmax theta}``.
    """
    base = dict(scheme="mrc", p=0.01) | dict(base or {})
    rows, best = [], {}
    for lam, model in itertools.product(lambdas, models):
        curve = []
        for th in theta_grid:
            sc, cfg = build_point(dict(base, theta=th, model=model, **{"lambda": lam}))
            t = throughput(th, min(1.0, max(0.0, 1.0 - outage(sc, cfg).total)))
            rows.append({"lambda": lam, "model": model, "theta": th, "throughput": t})
            curve.append(t)
        best[(lam, model)] = theta_grid[int(np.argmax(curve))]
    return rows, best


_OP_COLUMNS = ("op_analytic", "op_mc", "stderr")


def _fig2a():
    """Noise levels at p = 0.05, SC, HSV (theta = 1 and triplet inferred)."""
    return SweepSpec("fig2a", (("noise_dbm", ("off", -97.0, -90.0, -85.0, -80.0)), ("lambda", LAMBDA_GRID)),
                     build_point, dict(scheme="sc", model="hsv", p=0.05, theta=1.0),
                     columns=("noise_dbm", "lambda", "op_analytic"))


def _fig2b():
    """p values with -97 dBm noise and without noise, SC, HSV (p set and
    theta inferred)."""
    return SweepSpec("fig2b", (("p", (0.01, 0.05, 0.1, 0.5)), ("noise_dbm", ("off", -97.0)),
                               ("lambda", LAMBDA_GRID)),
                     build_point, dict(scheme="sc", model="hsv", theta=1.0),
                     columns=("p", "noise_dbm", "lambda", "op_analytic"))


def _fig3():
    """Direct vs SC vs MRC, HSV, no noise (p set and theta inferred)."""
    return SweepSpec("fig3", (("lambda", LAMBDA_GRID), ("p", (0.01, 0.05, 0.1)),
                              ("scheme", ("direct", "sc", "mrc"))),
                     build_point, dict(model="hsv", theta=1.0), evaluators=("analytic", "mc"),
                     columns=("lambda", "p", "scheme", "model") + _OP_COLUMNS)


def _fig4():
    """HSV vs LSV for SC and MRC in low (a) and high (b) traffic; p = 0.01
    and theta = 1 inferred."""
    lams = (0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3)
    return SweepSpec("fig4", (("lambda", lams), ("scheme", ("sc", "mrc")), ("model", ("hsv", "lsv"))),
                     build_point, dict(p=0.01, theta=1.0),
                     columns=("lambda", "scheme", "model", "op_analytic"))


def _fig5():
    """Throughput vs theta, MRC, HSV and LSV (p = 0.01 inferred)."""
    return SweepSpec("fig5", (("lambda", (0.01, 0.02, 0.1, 0.2)), ("model", ("hsv", "lsv")),
                              ("theta", THETA_GRID)),
                     build_point, dict(scheme="mrc", p=0.01), evaluators=("analytic", "mc"),
                     columns=("lambda", "model", "theta", "op_analytic", "op_mc", "stderr",
                              "throughput_analytic", "throughput_mc"))


def _fig6():
    """Relay sliding from S = (0, 0) to D = (200, 0) on a 5 m grid; p = 0.002
    and theta = 1 inferred."""
    xs = tuple(float(x) for x in range(5, 200, 5))
    return SweepSpec("fig6", (("lambda", (0.25, 0.01)), ("scheme", ("sc", "mrc")), ("model", ("hsv", "lsv")),
                              ("relay_x", xs)),
                     _build_relay_on_segment, dict(p=0.002, theta=1.0),
                     columns=("lambda", "scheme", "model", "relay_x", "op_analytic"))


def _fig7():
    """Source on the X road, destination on the Y road, relay on the first
    bisector, MRC, LSV; lambda = 0.05, p = 0.01, theta = 1 and the relay
    offsets are inferred."""
    grid = (5.0, 10.0, 20.0, 40.0, 60.0, 80.0, 100.0, 150.0, 200.0)
    return SweepSpec("fig7", (("relay_c", (5.0, 15.0, 30.0, 45.0, 60.0, 80.0, 100.0)), ("s", grid), ("d", grid)),
                     _build_bisector, {"lambda": 0.05, "p": 0.01, "theta": 1.0, "scheme": "mrc", "model": "lsv"},
                     columns=("relay_c", "s", "d", "op_analytic"))


def _fig8a():
    """Highway vs intersection, MRC, HSV."""
    return SweepSpec("fig8a", (("road", ("intersection", "highway")), ("p", (0.01, 0.05)), ("theta", (1.0, 3.0)),
                               ("lambda", LAMBDA_GRID)),
                     build_point, dict(scheme="mrc", model="hsv"), evaluators=("analytic", "mc"),
                     columns=("road", "p", "theta", "lambda") + _OP_COLUMNS)


FIG8B_DISTANCES = (0.0, 10.0, 25.0, 50.0, 100.0, 250.0, 500.0, 1e3, 2.5e3, 5e3, 1e4, 2.5e4, 5e4, 1e5,
                   2.5e5, 5e5, 1e6)


def _fig8b():
    """Triplet on the X road at growing distance from the intersection, relay
    halfway; lambda = 0.05, p = 0.01, theta = 1 inferred."""
    return SweepSpec("fig8b", (("r_sd", (50.0, 150.0, 250.0)), ("model", ("hsv", "lsv")),
                               ("road", ("intersection", "highway")), ("distance", FIG8B_DISTANCES)),
                     _build_triplet_offset, {"lambda": 0.05, "p": 0.01, "theta": 1.0, "scheme": "mrc"},
                     columns=("r_sd", "model", "road", "distance", "op_analytic"))


def _fig9():
    """Path-loss exponent sweep, MRC, HSV and LSV; p = 0.01, theta = 1
    inferred."""
    alphas = (2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0)
    return SweepSpec("fig9", (("lambda", (0.03, 0.05, 0.07, 0.1, 0.2)), ("model", ("hsv", "lsv")),
                              ("alpha", alphas)),
                     build_point, dict(scheme="mrc", p=0.01, theta=1.0),
                     columns=("lambda", "model", "alpha", "op_analytic"))


PRESETS = {
    "fig2a": _fig2a,
    "fig2b": _fig2b,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
    "fig8a": _fig8a,
    "fig8b": _fig8b,
    "fig9": _fig9,
}


def preset(name: str, **overrides) -> SweepSpec:
    try:
        spec = PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return spec.replace(**overrides) if overrides else spec


# triplet used for analytic-vs-simulation validation: source on the X road,
# destination on the Y road, roadside relay between them
VALIDATION_TRIPLET = ((60.0, 0.0), (25.0, 25.0), (0.0, 60.0))
VALIDATION_AXES = (("lambda", (0.01, 0.05, 0.1)), ("p", (0.05, 0.5)), ("theta", (1.0, 7.0)))


def validate(trials: int = 100_000, seed: int = 0, sim_window: float = 1e4,
             axes=VALIDATION_AXES, workers: int = 1) -> list[dict]:
    """Compare analytic and simulated outage for all five evaluator paths.

    Both sides use roads truncated to the simulation window, so the check
    is free of truncation bias.  A row passes when
    ``|p_mc - p_analytic| <= max(3 stderr, 0.01)``.
    """
    S, R, D = (_pose(xy) for xy in VALIDATION_TRIPLET)
    names = [a[0] for a in axes]
    rows = []
    for k, combo in enumerate(itertools.product(*(a[1] for a in axes))):
        params = dict(zip(names, combo))
        lam = params["lambda"]
        cfg = NetworkConfig(traffic=TrafficParams(lam, lam, params["p"]),
                            geometry=RoadGeometry.finite(sim_window))
        for j, model in enumerate(("hsv", "lsv")):
            sc = Scenario(S, D, R, "sc", model, theta=params["theta"])
            tc = TrialConfig(trials=trials, seed=_row_seed(seed, 2 * k + j), sim_window=sim_window,
                             workers=workers)
            est = estimate_schemes(sc, cfg, tc)
            schemes = ("direct", "sc", "mrc") if model == "hsv" else ("sc", "mrc")
            for scheme in schemes:
                kw = dict(scheme=scheme, relay=None if scheme == "direct" else R)
                analytic = outage(sc.replace(**kw), cfg).total
                e = est[Scheme(scheme)]
                tol = max(3 * e.stderr, 0.01)
                rows.append(dict(params, model=model, scheme=scheme, op_analytic=analytic,
                                 op_mc=e.p_hat, stderr=e.stderr, tol=tol,
                                 ok=abs(e.p_hat - analytic) <= tol))
    return rows
