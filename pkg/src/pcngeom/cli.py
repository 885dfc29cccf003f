"""Command-line entry point: ``pcngeom <command> [options]``.

Single verdicts go to stdout as JSON; series go to CSV files given by
``--out`` (or stdout when omitted).  Every stochastic command takes a
mandatory ``--seed`` and is reproducible byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from fractions import Fraction

import numpy as np

from . import convex, depletion, feasibility, fibers, multiparty, sampling
from .network import LiquidityState, NetworkError, load_graph, load_liquidity, volume, equal_split_volume
from .replenish import ReplenishmentProblem, replenish, replenish_report
from .rng import RNG_NAME, RNG_VERSION, make_rng

THREADS_ENV = "PCNGEOM_THREADS"


class UsageError(Exception):
    pass


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        val = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if val < 1:
        raise UsageError(f"{THREADS_ENV} must be >= 1")
    return val


def _positive(name):
    def conv(s):
        v = int(s)
        if v < 1:
            raise argparse.ArgumentTypeError(f"{name} must be >= 1")
        return v
    return conv


def _nonneg(s):
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _int_list(s: str) -> list[int]:
    """``"1,2,5"`` or an inclusive range ``"1:10"`` / ``"1:10:3"``."""
    if ":" in s:
        parts = [int(x) for x in s.split(":")]
        if len(parts) == 2:
            parts.append(1)
        lo, hi, step = parts
        if step < 1:
            raise argparse.ArgumentTypeError("range step must be >= 1")
        return list(range(lo, hi + 1, step))
    return [int(x) for x in s.split(",") if x]


def _number(s: str):
    """Exact rational when possible (``7/47000``, ``0.25``), else float."""
    try:
        return Fraction(s)
    except ValueError:
        return float(s)


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else x.numerator
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        seq = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [_jsonable(v) for v in seq]
    if isinstance(x, float) and x == float("inf"):
        return "inf"
    return x


def _emit_json(obj, out=None):
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"
    (out or sys.stdout).write(text)


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    if path in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return str(v)
    return v


def _load_wealth(g, path_or_json: str):
    text = path_or_json
    if os.path.exists(path_or_json):
        with open(path_or_json) as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"cannot parse wealth vector: {exc}")


def _graph(args):
    try:
        return load_graph(args.network)
    except OSError as exc:
        raise UsageError(f"cannot read network file: {exc}")
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"malformed network file: {exc}")


def _meta(args) -> dict:
    return {"seed": args.seed, "rng": RNG_NAME, "rng_version": RNG_VERSION}


# ---------------------------------------------------------------------------
# commands

def cmd_feasible(args):
    g = _graph(args)
    omega = _load_wealth(g, args.wealth)
    res = feasibility.is_feasible(g, omega)
    out = {"feasible": res.feasible, "wealth": res.wealth.as_dict()}
    if res.feasible:
        out["witness"] = res.witness.to_dict()
    else:
        out["certificate_cut"] = res.certificate_cut
    if args.payer:
        if args.payee is None or args.amount is None:
            raise UsageError("--payer needs --payee and --amount")
        if not res.feasible:
            raise UsageError("payment check needs a feasible starting wealth vector")
        if res.wealth[args.payer] < args.amount:
            out["payment"] = {"feasible": False, "reason": "payer balance below amount"}
        else:
            pay = feasibility.payment_feasible(g, res.wealth, args.payer, args.payee, args.amount)
            out["payment"] = {"feasible": pay.feasible, "wealth_after": pay.wealth.as_dict()}
            if not pay.feasible:
                out["payment"]["certificate_cut"] = pay.certificate_cut
    _emit_json(out)


def cmd_fiber(args):
    g = _graph(args)
    if args.liquidity:
        lam = load_liquidity(g, args.liquidity)
        omega = fibers.wealth_of(g, lam)
    elif args.wealth:
        omega = _load_wealth(g, args.wealth)
        lam = None
    else:
        raise UsageError("fiber needs --wealth or --liquidity")
    states = fibers.fiber_enumerate(g, omega, bound=args.bound)
    out = {"size": len(states), "states": [s.to_dict() for s in states]}
    if args.circulations:
        if lam is None:
            if not states:
                raise UsageError("wealth vector is infeasible; no circulations to list")
            lam = states[0]
        circ = fibers.strict_circulations_enumerate(g, lam, bound=args.bound)
        out["base"] = lam.to_dict()
        out["strict_circulations"] = [list(c.net()) for c in circ]
    _emit_json(out)


def cmd_estimate_r(args):
    g = _graph(args)
    rep = sampling.estimate_r(g, args.samples, args.seed, workers=args.threads)
    out = {"r": rep.estimate, "stderr": rep.standard_error, "samples": rep.sample_count,
           "feasible": rep.hits, **_meta(args)}
    if args.exact:
        out["r_exact"] = sampling.exact_r(g)
    if args.out:
        _write_csv(args.out, ["samples", "feasible", "r", "stderr"],
                   [(rep.sample_count, rep.hits, rep.estimate, rep.standard_error)])
    _emit_json(out)


def cmd_estimate_rho(args):
    g = _graph(args)
    rows = []
    for amt in args.amounts:
        rep = sampling.estimate_rho(g, sampling.PaymentModel(amt), args.samples, args.seed, workers=args.threads)
        s = sampling.throughput(args.zeta, rep.estimate)
        rows.append((amt, rep.estimate, rep.standard_error, s))
    _write_csv(args.out, ["amount", "rho", "stderr", "S"], rows)
    if args.out not in (None, "-"):
        _emit_json({"amounts": len(rows), "zeta": args.zeta, **_meta(args)})


def cmd_throughput(args):
    if args.rho is not None:
        _emit_json({"zeta": args.zeta, "rho": args.rho, "S": sampling.throughput(args.zeta, args.rho)})
        return
    if args.target is not None:
        _emit_json({"zeta": args.zeta, "target": args.target,
                    "rho_required": sampling.required_rho(args.zeta, args.target)})
        return
    if args.points < 2 or not 0 < args.rho_min < args.rho_max <= 1:
        raise UsageError("sweep needs 0 < --rho-min < --rho-max <= 1 and --points >= 2")
    grid = np.geomspace(float(args.rho_min), float(args.rho_max), args.points)
    _write_csv(args.out, ["rho", "S"], [(float(r), sampling.throughput(float(args.zeta), float(r))) for r in grid])


def cmd_cutwidth(args):
    rows = []
    for k in args.k:
        spec = multiparty.RandomTopologySpec(args.n, args.m, k, args.c)
        for s in range(1, args.n):
            rep = multiparty.mc_cut_width(spec, s, args.samples, args.seed, stream=(k, s)) if args.samples else None
            rows.append((
                k, s, float(multiparty.qk(args.n, k, s)),
                rep.q_mc if rep else "", rep.q_stderr if rep else "",
                float(multiparty.expected_cut_width(spec, s)),
                rep.expected_width_mc if rep else "",
            ))
    _write_csv(args.out, ["k", "s", "q_closed", "q_mc", "q_stderr", "width_closed", "width_mc"], rows)


def cmd_depletion(args):
    rows = depletion.depletion_experiment(args.n, args.m, args.trials, args.seed, m_min=args.m_min)
    _write_csv(args.out, ["trial", "m", "circuit_rank", "depleted", "p_G"],
               [(r.trial, r.m, r.circuit_rank, r.depleted, r.p_G) for r in rows])
    if args.out not in (None, "-"):
        _emit_json({"trials": len(rows), "pearson_r": depletion.depletion_correlation(rows), **_meta(args)})


def cmd_convexsim(args):
    g = convex.triangle_benchmark(args.capacity)
    make = convex.TierSchedule.linear if args.schedule == "linear" else convex.TierSchedule.quadratic
    tiers = make(g, args.ppm)
    series = convex.routing_simulation(
        g, tiers, args.steps, make_rng(args.seed), disclose=not args.no_disclose,
        max_attempts=args.max_attempts,
    )
    ids = [ch.id for ch in g.channels]
    rows = []
    for t in range(series.steps):
        rows.append([t, int(series.success[t]), int(series.fee[t])] + [int(x) for x in series.liquidity[t + 1]])
    _write_csv(args.out, ["step", "success", "fee"] + [f"liq_{c}" for c in ids], rows)
    if args.out not in (None, "-") and series.steps:
        s = convex.summarize_liquidity(series, args.window)
        _emit_json({
            "schedule": args.schedule, "ppm": args.ppm, "steps": args.steps,
            "median_relative": dict(zip(ids, s.median_relative)),
            "steady_start": s.steady_start, "steady": s.steady,
            "node_fees": s.node_fees, "network_fees": s.network_fees,
            "success_rate": s.success_rate, "channel_flow": dict(zip(ids, s.channel_flow)),
            **_meta(args),
        })


def cmd_replenish(args):
    g = _graph(args)
    try:
        lam = load_liquidity(g, args.liquidity)
        target = load_liquidity(g, args.target) if args.target else None
    except OSError as exc:
        raise UsageError(f"cannot read liquidity file: {exc}")
    prob = ReplenishmentProblem.create(lam, target)
    res = replenish(prob)
    rep = replenish_report(prob, res)
    _emit_json({**rep.as_dict(), "x_int": res.x_int.to_dict(), "kkt_residual": res.kkt_residual})
    if args.out:
        before, after = lam.relative(), res.x_int.relative()
        _write_csv(args.out, ["channel", "relative_before", "relative_after"],
                   [(ch.id, float(b), float(a)) for ch, b, a in zip(g.channels, before, after)])


def cmd_volume(args):
    if args.network:
        g = _graph(args)
        _emit_json({"volume": volume(g), "channels": g.m, "total_capacity": g.total_capacity})
        return
    if args.coins is None:
        raise UsageError("volume needs --network or --coins")
    rows = [(m, equal_split_volume(args.coins, m)) for m in range(1, args.max_channels + 1)]
    _write_csv(args.out, ["m", "volume_equal_split"], [(m, str(v)) for m, v in rows])


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pcngeom", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def stochastic(sp):
        sp.add_argument("--seed", type=_nonneg, required=True)
        sp.add_argument("--threads", type=_positive("--threads"), default=None)

    sp = sub.add_parser("feasible", help="is a wealth vector (and optionally a payment) feasible")
    sp.add_argument("--network", required=True)
    sp.add_argument("--wealth", required=True, help="JSON file or inline JSON mapping node -> coins")
    sp.add_argument("--payer")
    sp.add_argument("--payee")
    sp.add_argument("--amount", type=_nonneg)
    sp.set_defaults(fn=cmd_feasible)

    sp = sub.add_parser("fiber", help="enumerate the liquidity states over a wealth vector")
    sp.add_argument("--network", required=True)
    sp.add_argument("--wealth")
    sp.add_argument("--liquidity")
    sp.add_argument("--circulations", action="store_true")
    sp.add_argument("--bound", type=_positive("--bound"), default=fibers.DEFAULT_ENUM_BOUND)
    sp.set_defaults(fn=cmd_fiber)

    sp = sub.add_parser("estimate-r", help="Monte Carlo share of feasible wealth distributions")
    sp.add_argument("--network", required=True)
    sp.add_argument("--samples", type=_positive("--samples"), required=True)
    sp.add_argument("--exact", action="store_true")
    sp.add_argument("--out")
    stochastic(sp)
    sp.set_defaults(fn=cmd_estimate_r)

    sp = sub.add_parser("estimate-rho", help="infeasible payment rate per amount")
    sp.add_argument("--network", required=True)
    sp.add_argument("--amounts", type=_int_list, required=True, help="e.g. 1,2,5 or 1:20 or 1:20:2")
    sp.add_argument("--samples", type=_positive("--samples"), required=True)
    sp.add_argument("--zeta", type=_number, default=7)
    sp.add_argument("--out")
    stochastic(sp)
    sp.set_defaults(fn=cmd_estimate_rho)

    sp = sub.add_parser("throughput", help="S = zeta / rho, single value or sweep")
    sp.add_argument("--zeta", type=_number, default=7)
    sp.add_argument("--rho", type=_number)
    sp.add_argument("--target", type=_number, help="report the rho needed for this throughput")
    sp.add_argument("--rho-min", type=_number, default=Fraction(1, 10**6))
    sp.add_argument("--rho-max", type=_number, default=Fraction(1, 10))
    sp.add_argument("--points", type=int, default=50)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_throughput)

    sp = sub.add_parser("cutwidth", help="straddle probability and expected cut width by cut size")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--k", type=_int_list, default=[2])
    sp.add_argument("--c", type=int, default=1)
    sp.add_argument("--samples", type=_nonneg, default=0)
    sp.add_argument("--out")
    stochastic(sp)
    sp.set_defaults(fn=cmd_cutwidth)

    sp = sub.add_parser("depletion", help="depleted channels vs circuit rank at the fee-potential optimum")
    sp.add_argument("--n", type=int, default=20)
    sp.add_argument("--m", type=int, default=30)
    sp.add_argument("--m-min", type=int, default=None)
    sp.add_argument("--trials", type=_positive("--trials"), default=50)
    sp.add_argument("--out")
    stochastic(sp)
    sp.set_defaults(fn=cmd_depletion)

    sp = sub.add_parser("convexsim", help="linear vs quadratic fees on the 3-node cycle")
    sp.add_argument("--schedule", choices=["linear", "quadratic"], required=True)
    sp.add_argument("--ppm", type=_nonneg, default=100)
    sp.add_argument("--steps", type=_nonneg, default=10_000)
    sp.add_argument("--capacity", type=_positive("--capacity"), default=100)
    sp.add_argument("--window", type=_positive("--window"), default=500)
    sp.add_argument("--max-attempts", type=_positive("--max-attempts"), default=3)
    sp.add_argument("--no-disclose", action="store_true", help="price paths at the initial state")
    sp.add_argument("--out")
    stochastic(sp)
    sp.set_defaults(fn=cmd_convexsim)

    sp = sub.add_parser("replenish", help="closest fiber element to a target liquidity state")
    sp.add_argument("--network", required=True)
    sp.add_argument("--liquidity", required=True)
    sp.add_argument("--target")
    sp.add_argument("--out", help="before/after relative liquidity CSV")
    sp.set_defaults(fn=cmd_replenish)

    sp = sub.add_parser("volume", help="number of liquidity states")
    sp.add_argument("--network")
    sp.add_argument("--coins", type=_positive("--coins"))
    sp.add_argument("--max-channels", type=_positive("--max-channels"), default=10)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_volume)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        if hasattr(args, "threads") and args.threads is None:
            args.threads = _default_threads()
        args.fn(args)
    except (UsageError, NetworkError, ValueError) as exc:
        print(f"pcngeom {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
