"""Command-line entry point.

    coopvanet eval --scheme mrc --model lsv --lambda 0.1 --p 0.05 --theta 1 --sd 200 --relay-mid
    coopvanet sweep --preset fig3 --out fig3.csv --seed 42
    coopvanet validate --grid default --trials 100000 --seed 7

Exit codes: 0 when every requested row evaluated cleanly, 1 on numeric or
I/O failure, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import experiments
from .experiments import PRESETS, SweepSpec, build_point, run_sweep
from .geometry import threshold_from_rate

log = logging.getLogger("coopvanet")

THREADS_ENV = "COOPVANET_THREADS"

INLINE_FLAGS = ("scheme", "model", "lam", "p", "theta", "rate", "sd", "source", "dest", "relay",
                "relay_mid", "alpha", "Z", "road")


@dataclass
class CliConfig:
    command: str
    preset: Optional[str] = None
    inline: dict = field(default_factory=dict)
    seed: Optional[int] = None
    trials: Optional[int] = None
    out: str = "-"
    noise: Optional[str] = None
    mc: bool = False
    grid: str = "default"
    workers: int = 1
    verbose: bool = False


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _noise(text: str) -> str:
    if text == "off":
        return text
    try:
        float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("noise must be a level in dBm or 'off'")
    return text


def _xy(text: str) -> tuple:
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("expected X,Y")
    return vals


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _add_inline(p: argparse.ArgumentParser, multi: bool):
    num = _floats if multi else float
    p.add_argument("--scheme", choices=("direct", "sc", "mrc"))
    p.add_argument("--model", choices=("hsv", "lsv"))
    p.add_argument("--lambda", dest="lam", type=num, help="vehicle intensity on each road (1/m)")
    p.add_argument("--p", type=num, help="ALOHA access probability")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--theta", type=num, help="SINR threshold")
    g.add_argument("--rate", type=num, help="target rate in bits per channel use")
    p.add_argument("--sd", type=num, help="source-destination distance on the X road (source at the origin)")
    p.add_argument("--source", type=_xy, help="source position X,Y")
    p.add_argument("--dest", type=_xy, help="destination position X,Y")
    r = p.add_mutually_exclusive_group()
    r.add_argument("--relay", type=_xy, help="relay position X,Y")
    r.add_argument("--relay-mid", action="store_true", help="relay halfway between source and destination")
    p.add_argument("--alpha", type=num, help="path-loss exponent")
    p.add_argument("--Z", type=float, help="finite road half-length (m); infinite if omitted")
    p.add_argument("--road", choices=("intersection", "highway"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coopvanet", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="RNG seed (required whenever Monte Carlo runs)")
    common.add_argument("--trials", type=int)
    common.add_argument("--out", default="-", help="CSV path ('-' for stdout)")
    common.add_argument("--noise", type=_noise, help="noise power in dBm, or 'off'")
    common.add_argument("--workers", type=int, default=_default_workers(),
                        help=f"parallel workers (default from ${THREADS_ENV})")

    ev = sub.add_parser("eval", parents=[common], help="evaluate one scenario")
    _add_inline(ev, multi=False)
    ev.add_argument("--mc", action="store_true", help="also run the Monte Carlo estimator")

    sw = sub.add_parser("sweep", parents=[common], help="run a preset or an inline grid")
    sw.add_argument("--preset", choices=sorted(PRESETS))
    _add_inline(sw, multi=True)
    sw.add_argument("--mc", action="store_true", help="add Monte Carlo columns")

    va = sub.add_parser("validate", parents=[common], help="analytic vs Monte Carlo check")
    va.add_argument("--grid", choices=("default",), default="default")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> CliConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    inline = {k: getattr(ns, k) for k in INLINE_FLAGS
              if getattr(ns, k, None) not in (None, False)}
    cfg = CliConfig(command=ns.command, seed=ns.seed, trials=ns.trials, out=ns.out, noise=ns.noise,
                    mc=getattr(ns, "mc", False), preset=getattr(ns, "preset", None), inline=inline,
                    grid=getattr(ns, "grid", "default"), workers=ns.workers,
                    verbose=ns.verbose)
    if cfg.trials is not None and cfg.trials < 1:
        parser.error("--trials must be >= 1")
    if cfg.workers < 1:
        parser.error("--workers must be >= 1")
    if cfg.command == "sweep":
        if cfg.preset and inline:
            parser.error("--preset cannot be combined with inline scenario flags")
        if not cfg.preset and not inline:
            parser.error("sweep needs --preset or inline scenario flags")
    if cfg.seed is None and _runs_mc(cfg):
        parser.error("--seed is required for Monte Carlo runs")
    if cfg.command == "eval" and inline.get("scheme", "direct") != "direct":
        if "relay" not in inline and "relay_mid" not in inline:
            parser.error("cooperative schemes need --relay or --relay-mid")
    return cfg


def _runs_mc(cfg: CliConfig) -> bool:
    if cfg.command == "validate" or cfg.mc:
        return True
    return cfg.command == "sweep" and cfg.preset is not None and "mc" in PRESETS[cfg.preset]().evaluators


def emit_csv(table: Sequence[dict], path: str, columns: Optional[Sequence[str]] = None) -> None:
    """Write ``table`` as CSV: header then rows, floats with 12 significant
    digits, UTF-8, LF line endings.  ``path='-'`` writes to stdout."""
    if columns is None:
        columns = list(table[0].keys()) if table else []
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in table:
        writer.writerow([_fmt(row.get(c, "")) for c in columns])
    text = buf.getvalue()
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.12g}"
    if v is None:
        return ""
    return str(v)


def _inline_params(inline: dict, noise: Optional[str]) -> dict:
    """Translate inline CLI flags into builder parameters (scalar or grid)."""
    params = {}
    for k_cli, k_par in (("scheme", "scheme"), ("model", "model"), ("lam", "lambda"), ("p", "p"),
                         ("theta", "theta"), ("alpha", "alpha"), ("Z", "Z"), ("road", "road")):
        if k_cli in inline:
            params[k_par] = inline[k_cli]
    if "rate" in inline:
        r = inline["rate"]
        params["theta"] = tuple(threshold_from_rate(v) for v in r) if isinstance(r, tuple) else threshold_from_rate(r)
    if noise is not None:
        params["noise_dbm"] = noise
    return params


def _positions(inline: dict, sd: Optional[float]) -> dict:
    S = inline.get("source", (0.0, 0.0))
    if "dest" in inline:
        D = inline["dest"]
    else:
        D = (S[0] + (sd if sd is not None else 200.0), S[1])
    out = {"S": S, "D": D}
    if "relay" in inline:
        out["R"] = inline["relay"]
    elif inline.get("relay_mid"):
        out["R"] = ((S[0] + D[0]) / 2, (S[1] + D[1]) / 2)
    return out


def _inline_spec(cfg: CliConfig) -> SweepSpec:
    params = _inline_params(cfg.inline, cfg.noise)
    axes, fixed = [], {}
    for k, v in params.items():
        if isinstance(v, tuple):
            axes.append((k, v))
        else:
            fixed[k] = v
    sds = cfg.inline.get("sd")
    if isinstance(sds, tuple):
        axes.append(("sd", sds))
        build = _build_inline_sd
        fixed["_inline"] = {k: cfg.inline[k] for k in ("source", "dest", "relay", "relay_mid") if k in cfg.inline}
    else:
        fixed.update(_positions(cfg.inline, sds))
        build = build_point
    fixed.setdefault("scheme", "direct" if "R" not in fixed and "_inline" not in fixed else "mrc")
    evaluators = ("analytic", "mc") if cfg.mc else ("analytic",)
    names = [a[0] for a in axes]
    columns = tuple(names) + tuple(k for k in ("scheme", "model") if k not in names) + (
        "op_analytic",) + (("op_mc", "stderr") if cfg.mc else ())
    return SweepSpec("inline", tuple(axes) or (("scheme", (fixed.pop("scheme"),)),), build, fixed,
                     evaluators=evaluators, columns=columns, trials=cfg.trials or 10_000, seed=cfg.seed or 0)


def _build_inline_sd(params: dict):
    inline = params["_inline"]
    return build_point(dict(params, **_positions(inline, params["sd"])))


def _run_eval(cfg: CliConfig) -> int:
    from .montecarlo import TrialConfig, estimate_outage
    from .outage import outage

    params = _inline_params(cfg.inline, cfg.noise)
    params.update(_positions(cfg.inline, cfg.inline.get("sd")))
    params.setdefault("scheme", "direct")
    sc, net = build_point(params)
    row = {"scheme": sc.scheme.value, "model": sc.mobility.value, "theta": sc.threshold}
    br = outage(sc, net)
    row.update(p_first_phase=br.p_first_phase, p_second_phase=br.p_second_phase, op_analytic=br.total)
    if cfg.mc:
        est = estimate_outage(sc, net, TrialConfig(trials=cfg.trials or 10_000, seed=cfg.seed,
                                                   workers=cfg.workers))
        row.update(op_mc=est.p_hat, stderr=est.stderr)
    emit_csv([row], cfg.out)
    return 0


def _run_sweep(cfg: CliConfig) -> int:
    if cfg.preset:
        spec = experiments.preset(cfg.preset, seed=cfg.seed or 0)
        if cfg.mc and "mc" not in spec.evaluators:
            spec = spec.replace(evaluators=spec.evaluators + ("mc",),
                                columns=spec.columns + ("op_mc", "stderr"))
        if cfg.trials:
            spec = spec.replace(trials=cfg.trials)
        if cfg.noise is not None:
            spec = spec.replace(fixed=dict(spec.fixed, noise_dbm=cfg.noise))
    else:
        spec = _inline_spec(cfg)
    rows = run_sweep(spec, workers=cfg.workers)
    emit_csv(rows, cfg.out, spec.columns or [k for k in rows[0] if k != "error"] if rows else None)
    failed = [r for r in rows if r.get("error")]
    for r in failed:
        log.error("row failed: %s", r["error"])
    return 1 if failed else 0


def _run_validate(cfg: CliConfig) -> int:
    rows = experiments.validate(trials=cfg.trials or 100_000, seed=cfg.seed, workers=cfg.workers)
    emit_csv(rows, cfg.out)
    bad = sum(not r["ok"] for r in rows)
    print(f"{len(rows) - bad}/{len(rows)} points within tolerance", file=sys.stderr)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    cfg = parse_args(argv)
    logging.basicConfig(level=logging.INFO if cfg.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if cfg.command == "eval":
            return _run_eval(cfg)
        if cfg.command == "sweep":
            return _run_sweep(cfg)
        return _run_validate(cfg)
    except OSError as exc:
        print(f"coopvanet: I/O error: {exc}", file=sys.stderr)
        return 1
    except (ArithmeticError, ValueError) as exc:
        print(f"coopvanet: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
