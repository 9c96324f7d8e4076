"""CLI entry point for the sigcurve command."""

import argparse
import dataclasses
import logging
import sys
from importlib.metadata import PackageNotFoundError, version
from typing import Optional

from src import config_manager
from src.config import AppConfig
from src.congruence import congruence_closed, congruence_open
from src.curve_core import euclidean_curvature, resample_by_arclength
from src.formats import (
    read_curvature,
    read_curve,
    read_signature,
    to_json,
    write_bound,
    write_curve,
    write_experiment,
    write_signature,
    write_verdict,
)
from src.reconstruction import affine_curve_from_mu, curve_from_curvature, reconstruct_from_signature
from src.robustness import explicit_bound, sweep_experiment
from src.signature import affine_signature, euclidean_signature
from src.utils import (
    ConfigError,
    CurveFormatError,
    GroupKind,
    NotMonotone,
    SigcurveError,
    SignatureKind,
    Verdict,
    parse_kind,
)


_LOGGING_CONFIGURED = False


def _configure_logging() -> None:
    """Configure root logging once for CLI commands."""
    global _LOGGING_CONFIGURED
    if not _LOGGING_CONFIGURED:
        logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
        _LOGGING_CONFIGURED = True


_configure_logging()


logger = logging.getLogger(__name__)


EXIT_OK = 0
EXIT_NOT_CONGRUENT = 1
EXIT_INPUT_ERROR = 2
EXIT_MATH_ERROR = 3
EXIT_UNDECIDABLE = 4

VERDICT_EXIT_CODES = {
    Verdict.CONGRUENT: EXIT_OK,
    Verdict.NOT_CONGRUENT: EXIT_NOT_CONGRUENT,
    Verdict.UNDECIDABLE: EXIT_UNDECIDABLE,
}

DEFAULT_SWEEP = "1e-2,1e-3,1e-4"


def get_version() -> str:
    """Get package version from metadata."""
    try:
        return version("sigcurve")
    except PackageNotFoundError:
        return "unknown"


def _write(text: str, out: Optional[str]) -> None:
    # Writers already saved the file when a path was given
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()


def _signature_kind(value: Optional[str]) -> Optional[SignatureKind]:
    if value is None:
        return None
    return SignatureKind.EUCLIDEAN if parse_kind(value) is GroupKind.SE2 else SignatureKind.AFFINE


def _workers(value: str) -> str | int:
    if value == "auto":
        return value
    try:
        workers = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"workers must be 'auto' or a positive integer, got '{value}'")
    if workers < 1:
        raise argparse.ArgumentTypeError(f"workers must be >= 1, got {workers}")
    return workers


def _positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{value}'")
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {number}")
    return number


def _count(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{value}'")
    if number < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {number}")
    return number


def _non_negative_float(value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got '{value}'")
    if not number >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return number


def _positive_float(value: str) -> float:
    number = _non_negative_float(value)
    if number == 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return number


def _float_list(value: str) -> list[float]:
    try:
        values = [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{value}'")
    if not values or any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("sweep values must be non-negative")
    return values


def _point(value: str) -> tuple[float, float]:
    try:
        x, y = (float(v) for v in value.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got '{value}'")
    return x, y


def load_config(args: argparse.Namespace) -> AppConfig:
    """Config file (--config, $SIGCURVE_CONFIG or default) with the command-line overrides."""
    overrides = {
        "resample_nodes": getattr(args, "nodes", None),
        "integrator_steps": getattr(args, "steps", None),
        "seed": getattr(args, "seed", None),
        "affine_exponent": getattr(args, "affine_exponent", None),
        "workers": getattr(args, "workers", None),
        "output_format": getattr(args, "format", None),
    }
    return AppConfig(args.config, overrides=overrides)


def _curvature_profile(path: str, config: AppConfig):
    arc = resample_by_arclength(read_curve(path), config.resample_nodes, config)
    return euclidean_curvature(arc, 1, config)


def cmd_signature(args: argparse.Namespace, config: AppConfig) -> int:
    """Write the signature of a curve file as CSV plus its JSON sidecar."""
    curve = read_curve(args.input)
    arc = resample_by_arclength(curve, config.resample_nodes, config)

    if _signature_kind(args.kind) is SignatureKind.AFFINE:
        if args.order != 1:
            logger.warning("Affine signatures are (mu, mu_alpha); ignoring --order %d", args.order)
        signature = affine_signature(arc, config)
    else:
        signature = euclidean_signature(arc, args.order, one_period=args.period == "minimal", config=config)

    _write(write_signature(signature, args.out), args.out)
    logger.info("Signature: %d samples, order %d, %s", len(signature.s), signature.order,
                "closed" if signature.closed else "open")
    return EXIT_OK


def cmd_reconstruct(args: argparse.Namespace, config: AppConfig) -> int:
    """Rebuild a curve from a signature or curvature file."""
    kind = _signature_kind(args.kind)
    if args.source == "signature":
        signature = read_signature(args.input)
        if kind is not None and kind is not signature.kind:
            signature = dataclasses.replace(signature, kind=kind)
        kind = signature.kind
        curve = reconstruct_from_signature(signature, periods=args.periods, x0=args.x0,
                                           theta0=args.theta0, config=config)
    else:
        profile = read_curvature(args.input)
        if kind is SignatureKind.AFFINE:
            curve = affine_curve_from_mu(profile, None, args.x0, config)
        else:
            kind = SignatureKind.EUCLIDEAN
            curve = curve_from_curvature(profile, args.x0, args.theta0, config).as_planar()

    metadata = {
        "source": args.source,
        "kind": kind.value,
        "x0": list(args.x0),
        "theta0": args.theta0,
        "round_trip_tol": 5 * config.differentiation_tol,
    }
    _write(write_curve(curve, args.out, metadata), args.out)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace, config: AppConfig) -> int:
    """Decide congruence of two curve files; the exit code carries the verdict."""
    a = read_curve(args.curve_a)
    b = read_curve(args.curve_b)
    kind = parse_kind(args.kind)
    closed = a.closed and b.closed
    if args.closed and not closed:
        logger.error("--closed needs two closed curves")
        return EXIT_INPUT_ERROR

    if closed and kind is GroupKind.SE2:
        verdict = congruence_closed(a, b, args.threshold, config)
    else:
        if closed:
            logger.warning("Closed-curve comparison is rigid only; comparing as open affine arcs")
        verdict = congruence_open(a, b, kind, args.threshold, config)

    _write(write_verdict(verdict), None)
    logger.info("Verdict: %s (distance %.3e, threshold %.3e)", verdict.verdict.value,
                verdict.registered_distance, verdict.threshold)
    return VERDICT_EXIT_CODES[verdict.verdict]


def cmd_experiment(args: argparse.Namespace, config: AppConfig) -> int:
    """Run the perturbation sweep and write the experiment table (and bounds)."""
    curve = read_curve(args.input)
    table = sweep_experiment(curve, args.sweep, args.trials, config.seed, args.allow_vertices, config)
    _write(write_experiment(table, args.out, config.output_format), args.out)

    if args.bound_out:
        profile = euclidean_curvature(resample_by_arclength(curve, config.resample_nodes, config), 1, config)
        try:
            reports = [explicit_bound(profile, amplitude, config).to_dict() for amplitude in args.sweep]
        except NotMonotone:
            logger.warning("Curvature is not monotone; no bound report written")
        else:
            with open(args.bound_out, "w", encoding="utf-8") as f:
                f.write(to_json(reports))

    logger.info(table.summary())
    if len(table.rows) >= 2:
        logger.info("Spearman(delta_measured, d_curves) = %.3f", table.spearman())
    return EXIT_OK


def cmd_bound(args: argparse.Namespace, config: AppConfig) -> int:
    """Write the explicit curve-distance bound for a monotone-curvature curve."""
    report = explicit_bound(_curvature_profile(args.input, config), args.delta, config)
    _write(write_bound(report, args.out), args.out)
    logger.info("eps(%.3g) = %.6g", args.delta, report.eps)
    return EXIT_OK


def cmd_config(args: argparse.Namespace) -> int:
    """Handle config subcommands."""
    if args.config_action == "show":
        config_manager.show_config(args.config)
    elif args.config_action == "path":
        config_path = config_manager.ensure_config_exists(args.config)
        logger.info(str(config_path))
    elif args.config_action == "reset":
        config_manager.reset_config(args.config)
    elif args.config_action == "validate":
        return EXIT_OK if config_manager.validate_config(args.config) else EXIT_INPUT_ERROR
    else:
        config_path = config_manager.get_config_path(args.config)
        logger.info(f"Configuration file: {config_path}")
        logger.info("Available commands:")
        logger.info("  sigcurve config show     - Display current configuration")
        logger.info("  sigcurve config path     - Show configuration file path")
        logger.info("  sigcurve config reset    - Reset to default configuration")
        logger.info("  sigcurve config validate - Validate configuration file")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigcurve",
        description="Differential invariant signatures of planar curves",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=(
            "exit codes:\n"
            "  0  success / congruent\n"
            "  1  not congruent\n"
            "  2  malformed input, unreadable file or invalid config\n"
            "  3  math-domain error (error name on stderr)\n"
            "  4  undecidable\n"
        ),
    )

    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {get_version()}"
    )
    parser.add_argument(
        "--config",
        metavar="PATH",
        help="Config file (overrides $SIGCURVE_CONFIG and ~/.sigcurve/config.yaml)"
    )

    overrides = argparse.ArgumentParser(add_help=False)
    overrides.add_argument("--nodes", type=_positive_int, help="Arc-length nodes when resampling")
    overrides.add_argument("--steps", type=_positive_int, help="Fixed RK4 step count")
    overrides.add_argument("--seed", type=_count, help="Base seed")
    overrides.add_argument("--affine-exponent", dest="affine_exponent", choices=["1/2", "1/3"],
                           help="Exponent of the affine arc length")
    overrides.add_argument("--workers", type=_workers, help="Worker threads ('auto' or a count)")
    overrides.add_argument("--format", choices=["csv", "json"], help="Tabular output format")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # signature command
    signature_parser = subparsers.add_parser(
        "signature", parents=[overrides],
        help="Compute the signature of a curve file"
    )
    signature_parser.add_argument("input", help="Curve JSON file")
    signature_parser.add_argument("--order", type=_positive_int, default=1, help="Signature order (default: 1)")
    signature_parser.add_argument("--kind", default="euclid", choices=["euclid", "affine"])
    signature_parser.add_argument("--period", default="full", choices=["full", "minimal"],
                                  help="Closed curves: full revolution or one minimal period")
    signature_parser.add_argument("--out", help="Output CSV (sidecar written next to it)")

    # reconstruct command
    reconstruct_parser = subparsers.add_parser(
        "reconstruct", parents=[overrides],
        help="Rebuild a curve from a signature or curvature file"
    )
    reconstruct_parser.add_argument("input", help="Signature or curvature CSV")
    reconstruct_parser.add_argument("--source", default="signature", choices=["signature", "curvature"])
    reconstruct_parser.add_argument("--kind", choices=["euclid", "affine"])
    reconstruct_parser.add_argument("--x0", type=_point, default=(0.0, 0.0), help="Initial point 'x,y'")
    reconstruct_parser.add_argument("--theta0", type=float, default=0.0, help="Initial tangent angle")
    reconstruct_parser.add_argument("--periods", type=_positive_int, help="Repeat a one-period signature")
    reconstruct_parser.add_argument("--out", help="Output curve JSON")

    # compare command
    compare_parser = subparsers.add_parser(
        "compare", parents=[overrides],
        help="Decide whether two curves are congruent"
    )
    compare_parser.add_argument("curve_a", help="First curve JSON")
    compare_parser.add_argument("curve_b", help="Second curve JSON")
    compare_parser.add_argument("--kind", default="se2", choices=["se2", "affine"])
    compare_parser.add_argument("--closed", action="store_true", help="Require two closed curves (closed-curve test)")
    compare_parser.add_argument("--threshold", type=_positive_float,
                                help="Decision threshold (default: threshold_factor * L)")

    # experiment command
    experiment_parser = subparsers.add_parser(
        "experiment", parents=[overrides],
        help="Perturbation experiment against the explicit bound"
    )
    experiment_parser.add_argument("input", help="Curve JSON file")
    experiment_parser.add_argument("--sweep", type=_float_list, default=_float_list(DEFAULT_SWEEP),
                                   help=f"Comma-separated amplitudes (default: {DEFAULT_SWEEP})")
    experiment_parser.add_argument("--trials", type=_count, default=10, help="Trials per amplitude")
    experiment_parser.add_argument("--out", help="Experiment table")
    experiment_parser.add_argument("--bound-out", dest="bound_out", help="Bound reports JSON")
    experiment_parser.add_argument("--allow-vertices", dest="allow_vertices", action="store_true",
                                   help="Run even when the curve has a vertex")

    # bound command
    bound_parser = subparsers.add_parser(
        "bound", parents=[overrides],
        help="Explicit curve-distance bound for a signature perturbation"
    )
    bound_parser.add_argument("input", help="Curve JSON file")
    bound_parser.add_argument("--delta", type=_non_negative_float, required=True, help="Tube radius")
    bound_parser.add_argument("--out", help="Output JSON")

    # config command
    config_parser = subparsers.add_parser(
        "config",
        help="Manage configuration file"
    )
    config_parser.add_argument(
        "config_action",
        nargs="?",
        choices=["show", "path", "reset", "validate"],
        help="Configuration action (show/path/reset/validate)"
    )

    return parser


COMMANDS = {
    "signature": cmd_signature,
    "reconstruct": cmd_reconstruct,
    "compare": cmd_compare,
    "experiment": cmd_experiment,
    "bound": cmd_bound,
}


def run(argv: Optional[list[str]] = None) -> int:
    """Parse arguments, run one command and map errors onto exit codes."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_OK
    if args.command == "config":
        return cmd_config(args)

    try:
        config = load_config(args)
        return COMMANDS[args.command](args, config)
    except ConfigError as e:
        logger.error(str(e))
        return EXIT_INPUT_ERROR
    except CurveFormatError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_INPUT_ERROR
    except OSError as e:
        logger.error("Cannot read or write file: %s", e)
        return EXIT_INPUT_ERROR
    except SigcurveError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_MATH_ERROR


def main(argv: Optional[list[str]] = None) -> None:
    """Main CLI entry point."""
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
