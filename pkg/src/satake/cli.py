"""
Command line interface for Satake.

Subcommands mirror the run tasks: exponents, strata, volume, count,
compare, plus report (run a manifest) and presets (list built-ins).
"""

import argparse
import json
import logging
import math
import sys
from typing import Any, Dict, List, Optional, Sequence

from .config import Config, get_config
from .core import RunLogger, RunManifest, Runner
from .counter import angular_compare, count_ladder, fit_exponent, local_exponents
from .errors import BudgetExceeded, InteriorDirection, SatakeError
from .families import naive_points
from .presets import CANONICAL, lookup
from .quadrature import make_cubature
from .storage import (
    load_exp_map,
    to_jsonable,
    triple_to_json,
    write_csv,
    write_json,
)
from .strata import (
    closure_poset,
    exponents_global,
    group_orbit_rates,
    polytope_exponents,
    poset_to_dot,
    strata_report,
)
from .utils import (
    get_output_directory,
    parse_cap,
    parse_family,
    parse_floats,
    parse_ladder,
)
from .volasym import chi_exponents, kappa_chi, l_chi, normalized_ratio, radial_bump

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
ORACLE_MAX_T = 10.0


def _print_json(obj: Any) -> None:
    print(json.dumps(to_jsonable(obj, compact=True), indent=2, sort_keys=True))


def cmd_exponents(args: argparse.Namespace, out: RunLogger) -> int:
    preset = lookup(args.preset, args.norm)
    triple = exponents_global(preset.rs, preset.lam)
    lp = polytope_exponents(preset.rs, [preset.lam])
    result: Dict[str, Any] = {
        "preset": preset.name,
        "lambda": preset.lam,
        "exponents": triple_to_json(triple, compact=True),
        "polytope": lp,
    }
    if preset.name.startswith("group:"):
        rates, generic = group_orbit_rates(preset.rs, preset.lam)
        result["orbit_rates"] = {f"alpha_{i + 1}": r for i, r in rates.items()}
        result["generic"] = generic
    out.log_output(write_json(args.out_dir / "exponents.json", result, compact=True))
    _print_json(result)
    return EXIT_OK if lp == triple.pair else EXIT_CHECK_FAILED


def cmd_strata(args: argparse.Namespace, out: RunLogger) -> int:
    preset = lookup(args.preset, args.norm)
    report = strata_report(preset.rs, preset.lam)
    out.log_output(write_json(args.out_dir / "strata.json", report, compact=False))
    if args.dot:
        dot = poset_to_dot(closure_poset(preset.rs, preset.lam))
        path = args.out_dir / args.dot
        path.write_text(dot, encoding="utf-8")
        out.log_output(path)
    _print_json(report)
    return EXIT_OK


def cmd_volume(args: argparse.Namespace, out: RunLogger) -> int:
    spec = load_exp_map(args.spec)
    inner, outer = parse_floats(args.f)
    f = radial_bump(inner, outer)
    ladder = parse_ladder(args.T_ladder)
    cubature = make_cubature()
    triple = chi_exponents(spec)
    target = kappa_chi(spec) * l_chi(spec, f, cubature)
    rows: List[List[Any]] = []
    for T in ladder:
        ratio = normalized_ratio(spec, f, T, cubature)
        integral = ratio * T ** float(triple.a) * math.log(T) ** (triple.b - 1)
        rows.append([T, integral, ratio, target])
        out.log_progress(f"T={T:g}: ratio {ratio:.6g}, target {target:.6g}")
    header = ["T", "integral", "normalized_ratio", "kappa_L_target"]
    out.log_output(write_csv(args.out_dir / args.csv, header, rows))
    return EXIT_OK


def cmd_count(args: argparse.Namespace, out: RunLogger) -> int:
    fam = parse_family(args.family, args.norm)
    caps = [parse_cap(c) for c in args.cap or []]
    ladder = parse_ladder(args.ladder)
    result = count_ladder(fam, caps, ladder, get_config().enumeration_budget)
    header = ["T", "total"] + [f"cap_{i}" for i in range(len(caps))] + ["elapsed_ms"]
    rows = []
    for rec in result.records:
        hits = [rec.per_cap[i] for i in range(len(caps))]
        rows.append([rec.T, rec.total] + hits + [rec.elapsed_ms])
    out.log_output(write_csv(args.out_dir / args.csv, header, rows))
    exit_code = EXIT_OK
    if result.truncated:
        out.log_warning(result.message)
        exit_code = BudgetExceeded.exit_code

    preset = lookup(fam.name, args.norm)
    predicted = exponents_global(preset.rs, preset.lam)
    b = args.fit_b or predicted.b
    if len(result.records) >= 4:
        a_fit, stderr = fit_exponent(result.records, b)
        out.log_progress(
            f"fitted a = {a_fit:.4f} +- {stderr:.4f} (predicted {predicted.a}, b={b})"
        )
        for i, cap in enumerate(caps):
            try:
                local = local_exponents(fam, preset.rs, preset.lam, cap.center)
            except InteriorDirection as e:
                out.log_warning(f"cap_{i}: {e}")
                continue
            cap_fit, cap_err = fit_exponent(result.records, local.b, cap=i)
            out.log_progress(
                f"cap_{i}: fitted a = {cap_fit:.4f} +- {cap_err:.4f} "
                f"(predicted {local.a})"
            )
    if args.oracle:
        for rec in result.records:
            if rec.T > ORACLE_MAX_T:
                continue
            expected = len(naive_points(fam, rec.T))
            if expected != rec.total:
                out.log_failure(
                    f"T={rec.T:g}: enumeration {rec.total}, oracle {expected}"
                )
                exit_code = max(exit_code, EXIT_CHECK_FAILED)
            else:
                out.log_progress(f"T={rec.T:g}: oracle agrees ({expected} points)")
    return exit_code


def cmd_compare(args: argparse.Namespace, out: RunLogger) -> int:
    fam = parse_family(args.family, args.norm)
    ladder = parse_ladder(args.T)
    rows: List[List[Any]] = []
    for T in ladder:
        res = angular_compare(fam, T, args.bins, args.seed)
        out.log_progress(f"T={T:g}: {res.points} points, KS {res.ks_distance:.4f}")
        rows.extend([T, lo, hi, emp, pred] for lo, hi, emp, pred in res.histogram)
    header = ["T", "bin_lo", "bin_hi", "empirical", "predicted"]
    out.log_output(write_csv(args.out_dir / args.csv, header, rows))
    return EXIT_OK


def cmd_report(args: argparse.Namespace, out: RunLogger) -> int:
    manifest = RunManifest.load(args.manifest)
    if args.out is not None:
        manifest.output_dir = str(args.out_dir)
    if args.seed is not None:
        manifest.seed = args.seed
    return Runner(manifest, out, get_config()).run()


def cmd_presets(args: argparse.Namespace, out: RunLogger) -> int:
    for name in CANONICAL:
        preset = lookup(name, args.norm)
        triple = exponents_global(preset.rs, preset.lam)
        print(
            f"{name:18s} rank {preset.rs.rank}  lambda {preset.lam}  "
            f"a={triple.a} b={triple.b} I={triple.I}"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satake",
        description="Counting exponents, volume asymptotics and integral points "
        "on affine symmetric varieties",
    )
    parser.add_argument("--threads", type=int, help="Worker threads")
    parser.add_argument(
        "--budget-evals", type=int, help="Quadrature evaluations per integral"
    )
    parser.add_argument("--seed", type=int, help="Seed for Monte-Carlo fallbacks")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument(
        "--quiet", "-q", action="store_true", help="Silence the run narrative"
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Level for library diagnostics",
    )
    parser.add_argument(
        "--norm", choices=["euclidean", "sup"], help="Norm on the ambient space"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exponents", help="Exponent triple of a preset")
    p.add_argument("--preset", required=True)
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("strata", help="Lambda-connected strata and closure poset")
    p.add_argument("--preset", required=True)
    p.add_argument("--dot", help="Also write the closure poset as DOT to this file")
    p.set_defaults(func=cmd_strata)

    p = sub.add_parser("volume", help="Normalized chamber integrals on a T ladder")
    p.add_argument("--spec", required=True, help="Exponential map JSON")
    p.add_argument("--T-ladder", dest="T_ladder", default="1e2,1e3,1e4,1e5")
    p.add_argument("--f", default="0.5,2", help="Radial bump support inner,outer")
    p.add_argument("--csv", default="volume.csv")
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("count", help="Integral points on a T ladder")
    p.add_argument("--family", required=True)
    p.add_argument("--ladder", default="50:800:x2")
    p.add_argument("--cap", action="append", help="Cap c1,c2,...@eps (repeatable)")
    p.add_argument("--fit-b", dest="fit_b", type=int, help="Override b in the fit")
    p.add_argument(
        "--oracle", action="store_true", help="Cross-check rungs T <= 10 on a full grid"
    )
    p.add_argument("--csv", default="counts.csv")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("compare", help="Angular distribution against the limit")
    p.add_argument("--family", required=True)
    p.add_argument("--T", default="100,400")
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--csv", default="compare.csv")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="Run a manifest and write summary.json")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("presets", help="List the built-in presets")
    p.set_defaults(func=cmd_presets)
    return parser


def apply_overrides(args: argparse.Namespace, config: Config) -> None:
    """Global flags override the configuration for this process only."""
    if args.threads is not None:
        config.threads = max(1, args.threads)
    if args.budget_evals is not None:
        config.budget_evals = args.budget_evals
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.set("output_dir", args.out)
    if args.norm is not None:
        config.set("norm", args.norm)
    if args.quiet:
        config.verbose = False


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    config = get_config()
    apply_overrides(args, config)
    args.norm = config.norm
    out = RunLogger(verbose=config.verbose)
    try:
        args.out_dir = get_output_directory(config.output_dir)
        return int(args.func(args, out))
    except SatakeError as e:
        out.log_error(e)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        print("\nInterrupted", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
