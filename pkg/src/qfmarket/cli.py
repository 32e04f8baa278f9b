"""Command-line front end.

Subcommands: solve, check-price, region, monopoly, proptest. Reports are
JSON with a stable field order so runs diff cleanly; a short human summary
goes to stdout when the JSON is routed to a file. Exit codes: 0 success,
1 input problem, 2 solver disagreement or property failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from datetime import datetime, timezone
from fractions import Fraction

from .feasibility import check_clearing
from .gridoracle import (
    export_boundary_csv,
    export_grid_csv,
    grid_scan,
    oracle_max_revenue,
    oracle_min_price,
    region_boundary_2d,
)
from .market import MarketError, aggregate
from .marketio import LoadedMarket, ParseError, load_market, load_market_csv, reaggregate
from .metrics import revenue as outcome_revenue
from .monopoly import (
    MonopolyInstance,
    clearing_price,
    divergence_witness,
    example_a1,
    linear_valuation,
    max_revenue_price,
    revenue_at,
)
from .numeric import EXACT, Number, float_mode, parse_number
from .proptest import run_all
from .solver import MethodDisagreementError, SolverConvergenceError, solve

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_DISAGREE = 2


def _num(value: Number, exact: bool):
    """12-significant-digit float, or a p/q string in exact mode."""
    if exact and isinstance(value, Fraction):
        if value.denominator == 1:
            return int(value)
        return f"{value.numerator}/{value.denominator}"
    return float(format(float(value), ".12g"))


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _emit(report: dict, out_path, summary_lines) -> None:
    text = json.dumps(report, indent=2) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
        for line in summary_lines:
            print(line)
    else:
        sys.stdout.write(text)


def _stamp(report: dict, started: float, no_timestamp: bool) -> None:
    if no_timestamp:
        return
    report["generated_at"] = datetime.now(timezone.utc).isoformat()
    report["elapsed_seconds"] = round(time.perf_counter() - started, 6)


def _load(args) -> tuple:
    with open(args.path, "rb") as fh:
        raw = fh.read()
    mode = None
    if getattr(args, "mode", None) == "exact":
        mode = EXACT
    elif getattr(args, "mode", None) == "float":
        mode = float_mode()
    if args.path.endswith(".csv"):
        if not getattr(args, "supply", None):
            raise ParseError("csv", "CSV input needs --supply s_1,...,s_n")
        supplies = [s.strip() for s in args.supply.split(",")]
        loaded = load_market_csv(
            raw.decode("utf-8"),
            supplies,
            kind=getattr(args, "kind", "market"),
            mode=mode,
        )
    else:
        loaded = load_market(raw, mode)
    return loaded, _digest(raw)


def _parse_price(text: str, loaded: LoadedMarket):
    mode = loaded.market.mode
    parts = [t.strip() for t in text.split(",")]
    if len(parts) != loaded.market.n:
        raise ParseError(
            "price", f"expected {loaded.market.n} comma-separated prices, got {len(parts)}"
        )
    try:
        return tuple(parse_number(t, mode) for t in parts)
    except ValueError as exc:
        raise ParseError("price", str(exc)) from None


def cmd_solve(args) -> int:
    started = time.perf_counter()
    loaded, digest = _load(args)
    market = loaded.market
    exact = market.mode.is_exact
    result = solve(market, tol=args.tol)
    totals = aggregate(result.allocation, market.n)
    report = {
        "command": "solve",
        "input": {"path": args.path, "sha256": digest, "kind": loaded.kind},
        "mode": market.mode.kind,
        "tol": args.tol,
        "goods": [g.name for g in market.goods],
        "p_star": [_num(v, exact) for v in result.p_star],
        "buyers": [b.name for b in market.buyers],
        "allocation": [[_num(q, exact) for q in row] for row in result.allocation],
        "aggregate": [_num(v, exact) for v in totals],
        "revenue": _num(result.revenue, exact),
        "welfare": _num(result.welfare, exact),
        "certificates": {
            "clearing": {
                "feasible": result.clearing_certificate.feasible,
                "clearing": result.clearing_certificate.clearing,
                "max_extension_revenue": _num(
                    result.clearing_certificate.max_extension_revenue, exact
                ),
            },
            "efficiency": {
                "verdict": result.efficiency_certificate.verdict,
                "welfare": _num(result.efficiency_certificate.welfare, exact),
            },
        },
        "diagnostics": {
            "method_agreement": _num(result.method_agreement, False),
            "eg_duality_gap": _num(result.eg.duality_gap, False),
            "eg_iterations": result.eg.iterations,
            "descent_steps": len(result.descent.steps),
            "descent_probes": result.descent.probes,
        },
    }
    if loaded.owners is not None:
        report["owners"] = [
            {
                "owner": owner,
                "bundle": [_num(q, exact) for q in bundle],
                "spend": _num(spend, exact),
            }
            for owner, bundle, spend in reaggregate(
                loaded.owners, result.allocation, result.p_star
            )
        ]
    _stamp(report, started, args.no_timestamp)
    _emit(
        report,
        args.out,
        [
            "p* = (" + ", ".join(str(_num(v, exact)) for v in result.p_star) + ")",
            f"revenue = {_num(result.revenue, exact)}",
            f"welfare = {_num(result.welfare, exact)}",
        ],
    )
    return EXIT_OK


def cmd_check_price(args) -> int:
    started = time.perf_counter()
    loaded, digest = _load(args)
    market = loaded.market
    exact = market.mode.is_exact
    price = _parse_price(args.price, loaded)
    cert = check_clearing(market, price)
    report = {
        "command": "check-price",
        "input": {"path": args.path, "sha256": digest, "kind": loaded.kind},
        "mode": market.mode.kind,
        "price": [_num(v, exact) for v in price],
        "feasible": cert.feasible,
        "clearing": cert.clearing,
    }
    lines = []
    if cert.feasible:
        report["max_extension_revenue"] = _num(cert.max_extension_revenue, exact)
        report["allocation"] = [
            [_num(q, exact) for q in row] for row in cert.allocation
        ]
        lines.append("feasible" + (", clearing" if cert.clearing else ", not clearing"))
        lines.append(f"max-extension revenue = {report['max_extension_revenue']}")
    else:
        witness = cert.witness
        report["witness"] = {
            "goods": [market.goods[j - 1].name for j in witness.goods],
            "forced_budget": _num(witness.forced_budget, exact),
            "capacity": _num(witness.capacity, exact),
            "excess": _num(witness.excess, exact),
        }
        lines.append("infeasible")
        lines.append(
            "over-demanded goods: " + ", ".join(report["witness"]["goods"])
        )
    _stamp(report, started, args.no_timestamp)
    _emit(report, args.out, lines)
    return EXIT_OK


def cmd_region(args) -> int:
    started = time.perf_counter()
    if not args.out:
        raise ParseError("out", "region needs --out for the grid CSV")
    loaded, digest = _load(args)
    market = loaded.market
    if getattr(args, "mode", None) is None and market.mode.is_exact:
        # Full scans are flow-bound; default to float arithmetic unless the
        # caller forces exact mode.
        market = market.coerced(float_mode())
    exact = market.mode.is_exact
    try:
        lo_text, hi_text = args.bounds.split(":")
        lo = parse_number(lo_text, market.mode)
        hi = parse_number(hi_text, market.mode)
    except ValueError:
        raise ParseError("bounds", f"expected lo:hi, got {args.bounds!r}") from None
    points = args.resolution ** market.n
    if points > 10**7:
        print(
            f"error: {args.resolution}^{market.n} = {points} lattice points exceeds the "
            "10^7 cap; lower --resolution or scan fewer goods",
            file=sys.stderr,
        )
        return EXIT_INPUT
    if args.boundary and market.n != 2:
        print("error: boundary extraction needs exactly 2 goods", file=sys.stderr)
        return EXIT_INPUT
    grid = grid_scan(market, (lo, hi), args.resolution)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        export_grid_csv(grid, fh)
    boundary_path = args.boundary
    polylines = ()
    if market.n == 2:
        boundary_path = boundary_path or (
            args.out[:-4] + ".boundary.csv" if args.out.endswith(".csv") else args.out + ".boundary.csv"
        )
        polylines = region_boundary_2d(grid)
        with open(boundary_path, "w", encoding="utf-8", newline="") as fh:
            export_boundary_csv(polylines, fh)
    feasible_count = int(grid.membership.sum())
    report = {
        "command": "region",
        "input": {"path": args.path, "sha256": digest, "kind": loaded.kind},
        "mode": market.mode.kind,
        "bounds": [_num(lo, exact), _num(hi, exact)],
        "resolution": args.resolution,
        "points": points,
        "feasible_points": feasible_count,
        "grid_csv": args.out,
    }
    if market.n == 2:
        report["boundary_csv"] = boundary_path
        report["polylines"] = len(polylines)
    if feasible_count:
        report["min_feasible_price"] = [
            _num(v, exact) for v in oracle_min_price(grid)
        ]
        price, rev = oracle_max_revenue(grid)
        report["max_revenue"] = {
            "price": [_num(v, exact) for v in price],
            "revenue": _num(rev, False),
        }
    _stamp(report, started, args.no_timestamp)
    # --out names the grid CSV here, so the JSON report goes to stdout.
    _emit(report, None, [])
    return EXIT_OK


def _parse_valuation(text: str):
    if text == "example-a1":
        return example_a1()
    if text.startswith("linear:"):
        token = text[len("linear:"):]
        if token.startswith("v="):
            token = token[2:]
        try:
            return linear_valuation(float(token))
        except ValueError:
            raise ParseError("valuation", f"bad linear value {token!r}") from None
    raise ParseError("valuation", f"unknown valuation {text!r} (use example-a1 or linear:v)")


def cmd_monopoly(args) -> int:
    started = time.perf_counter()
    valuation = _parse_valuation(args.valuation)
    budget = math.inf if args.budget in (None, "inf") else float(args.budget)
    instance = MonopolyInstance(valuation, float(args.supply), budget)
    clearing = clearing_price(instance)
    opt_price, opt_qty, opt_rev = max_revenue_price(instance)
    report = {
        "command": "monopoly",
        "input": {
            "valuation": args.valuation,
            "budget": "inf" if math.isinf(budget) else _num(budget, False),
            "supply": _num(instance.supply, False),
            "sha256": _digest(
                f"{args.valuation}|{budget}|{instance.supply}".encode("utf-8")
            ),
        },
        "clearing": {
            "price": _num(clearing, False),
            "revenue": _num(revenue_at(instance, clearing), False),
        },
        "optimal": {
            "price": _num(opt_price, False),
            "quantity": _num(opt_qty, False),
            "revenue": _num(opt_rev, False),
        },
    }
    if math.isfinite(budget):
        free = MonopolyInstance(valuation, instance.supply, math.inf)
        f_price, f_qty, f_rev = max_revenue_price(free)
        report["optimal_unconstrained"] = {
            "price": _num(f_price, False),
            "quantity": _num(f_qty, False),
            "revenue": _num(f_rev, False),
        }
    witness = divergence_witness(valuation, budget)
    report["divergence_witness"] = (
        None
        if witness is None
        else {
            "supply": _num(witness.supply, False),
            "epsilon": _num(witness.epsilon, False),
            "prop1": witness.prop1,
            "prop2": witness.prop2,
            "x_tilde": None if witness.x_tilde is None else _num(witness.x_tilde, False),
        }
    )
    _stamp(report, started, args.no_timestamp)
    lines = [
        f"clearing price {report['clearing']['price']}, revenue {report['clearing']['revenue']}",
        f"optimal price {report['optimal']['price']}, quantity {report['optimal']['quantity']}, "
        f"revenue {report['optimal']['revenue']}",
    ]
    if "optimal_unconstrained" in report:
        u = report["optimal_unconstrained"]
        lines.append(
            f"optimal ignoring the budget: price {u['price']}, quantity {u['quantity']}, "
            f"revenue {u['revenue']}"
        )
    lines.append(
        "divergence witness: "
        + ("none" if witness is None else f"s = {report['divergence_witness']['supply']}")
    )
    _emit(report, args.out, lines)
    return EXIT_OK


def cmd_proptest(args) -> int:
    started = time.perf_counter()
    _probes, merged = run_all(args.seed, markets=args.markets, pairs=args.pairs)
    report = {
        "command": "proptest",
        "seed": args.seed,
        "markets": args.markets,
        "pairs": args.pairs,
        "suites": [
            {
                "name": s.name,
                "cases": s.cases,
                "failures": list(s.failures),
                "findings": list(s.findings),
            }
            for s in merged
        ],
        "ok": all(s.ok for s in merged),
    }
    _stamp(report, started, args.no_timestamp)
    lines = [
        f"{s.name}: {s.cases} cases, {len(s.failures)} failures, {len(s.findings)} findings"
        for s in merged
    ]
    _emit(report, args.out, lines)
    return EXIT_OK if report["ok"] else EXIT_DISAGREE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfmarket",
        description="Budget-constrained quasi-linear market clearing tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_input=True):
        if with_input:
            p.add_argument("path", help="market JSON (or CSV with --supply)")
            p.add_argument("--mode", choices=["exact", "float"], default=None)
            p.add_argument("--supply", help="comma-separated supplies for CSV input")
            p.add_argument(
                "--kind",
                choices=["market", "arctic"],
                default="market",
                help="row semantics for CSV input",
            )
        p.add_argument("--out", default=None, help="write the JSON report here")
        p.add_argument(
            "--no-timestamp",
            action="store_true",
            help="omit timing fields so reports are byte-reproducible",
        )

    p_solve = sub.add_parser("solve", help="compute equilibrium prices and allocation")
    common(p_solve)
    p_solve.add_argument("--tol", type=float, default=1e-8)
    p_solve.set_defaults(fn=cmd_solve)

    p_check = sub.add_parser("check-price", help="feasibility/clearing verdict at a price")
    common(p_check)
    p_check.add_argument("--price", required=True, help="comma-separated price vector")
    p_check.set_defaults(fn=cmd_check_price)

    p_region = sub.add_parser("region", help="scan the feasible region on a grid")
    common(p_region)
    p_region.add_argument("--bounds", default="0.1:5", help="price window lo:hi")
    p_region.add_argument("--resolution", type=int, default=491)
    p_region.add_argument("--boundary", default=None, help="boundary CSV path (2 goods)")
    p_region.set_defaults(fn=cmd_region)

    p_mono = sub.add_parser("monopoly", help="single-good concave-valuation analysis")
    common(p_mono, with_input=False)
    p_mono.add_argument("--valuation", required=True, help="example-a1 or linear:v")
    p_mono.add_argument("--budget", default=None, help="number or 'inf' (default)")
    p_mono.add_argument("--supply", required=True, type=float)
    p_mono.set_defaults(fn=cmd_monopoly)

    p_prop = sub.add_parser("proptest", help="randomized property suites")
    common(p_prop, with_input=False)
    p_prop.add_argument("--seed", type=int, default=0)
    p_prop.add_argument("--markets", type=int, default=20)
    p_prop.add_argument("--pairs", type=int, default=100)
    p_prop.set_defaults(fn=cmd_proptest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (MethodDisagreementError, SolverConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DISAGREE
    except MarketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
