"""
Command-line entry point
run: presets and spec files; diag: estimator variance, bounds, clouds, c*, regions; laplace
Exit codes: 0 success, 1 spec or usage error, 2 runtime failure
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import yaml

from diagnostics.laplace import laplace_approx
from diagnostics.theory import (
    BoundInputs,
    bound_convex,
    bound_convex_sgvi,
    bound_strongly_convex,
    bound_strongly_convex_sgvi,
    reduction_region_check,
    large_variance_check,
)
from diagnostics.variance import c_star, estimator_cloud, objective_f, variance_gap_empirical
from geometry.exceptions import BWVIError, PreconditionViolated, SpecError, UnknownPreset
from geometry.gaussian import Gaussian, kl_gaussian
from geometry.rng import RngState
from inference.targets import GaussianTarget, Target

from .config import load_config
from .orchestrator import ExperimentOrchestrator
from .presets import PRESET_NAMES, ExperimentSpec, build_target, preset
from .recorder import write_cloud
from .validator import SpecValidator

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SPEC = 1
EXIT_RUNTIME = 2

TARGET_KINDS = ["standard", "gaussian", "student_t", "logreg"]


class UsageError(Exception):
    """Bad command-line arguments"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _add_target_args(parser: argparse.ArgumentParser):
    parser.add_argument("--target", choices=TARGET_KINDS, default="standard",
                        help="standard = N(0, I) target; others use the random generators")
    parser.add_argument("--dim", type=int, default=2)
    parser.add_argument("--target-seed", type=int, default=11)
    parser.add_argument("--nu", type=float, default=4.0, help="Student-t degrees of freedom")
    parser.add_argument("--n-data", type=int, default=1000, help="logistic regression data points")
    parser.add_argument("--init-scale", type=float, default=2.0,
                        help="approximating Gaussian is N(center, init_scale * I)")
    parser.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bwvi", description="Gaussian variational inference on the Bures-Wasserstein space")
    parser.add_argument("--config", dest="config_file", type=Path, help="configuration YAML")
    parser.add_argument("--log-level", help="override system.log_level")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    run_p = sub.add_parser("run", help="run an experiment")
    source = run_p.add_mutually_exclusive_group(required=True)
    source.add_argument("--preset", help=f"one of: {', '.join(PRESET_NAMES)}")
    source.add_argument("--spec", "--config", dest="spec", type=Path, help="experiment spec file (JSON or YAML)")
    run_p.add_argument("--out", type=Path, help="artifact directory")
    run_p.add_argument("--seeds", type=int, help="number of replicate seeds")
    run_p.add_argument("--steps", type=int, help="iterations per replica")
    run_p.add_argument("--threads", type=int, help="replica parallelism cap")
    run_p.add_argument("--no-timing", action="store_true", help="write wall_ns = 0 for byte-identical reruns")
    run_p.add_argument("--full-scale", action="store_true", help="restore full-size dimensions and iteration counts")

    diag = sub.add_parser("diag", help="estimator and theory diagnostics")
    diag_sub = diag.add_subparsers(dest="diag_command", parser_class=_Parser)
    diag_sub.required = True

    variance = diag_sub.add_parser("variance", help="variance of both estimators on common draws")
    _add_target_args(variance)
    variance.add_argument("--c", type=float, default=1.0)
    variance.add_argument("--n", type=int, default=100000)

    bounds = diag_sub.add_parser("bounds", help="evaluate the convergence bounds")
    bounds.add_argument("--alpha", type=float, required=True)
    bounds.add_argument("--beta", type=float, required=True)
    bounds.add_argument("--eta", type=float, required=True)
    bounds.add_argument("--N", type=int, required=True)
    bounds.add_argument("--d", type=int, required=True)
    bounds.add_argument("--tau-inf", type=float, default=1.0)
    bounds.add_argument("--tau-e", type=float, default=1.0)
    bounds.add_argument("--w0", type=float, default=1.0, help="squared W2 distance at initialization")
    bounds.add_argument("--lambda-max", type=float, default=1.0, help="lambda_max of the optimal covariance")

    cloud = diag_sub.add_parser("cloud", help="write paired single-draw estimates as CSV")
    _add_target_args(cloud)
    cloud.add_argument("--c", type=float, default=1.0)
    cloud.add_argument("--n", type=int, default=500)
    cloud.add_argument("--out", type=Path, required=True)

    cstar = diag_sub.add_parser("cstar", help="variance-minimizing coefficient")
    _add_target_args(cstar)
    cstar.add_argument("--n", type=int, default=10000)

    region = diag_sub.add_parser("region", help="variance-reduction region checks for a Gaussian target")
    _add_target_args(region)
    region.add_argument("--c", type=float, default=1.0)
    region.add_argument("--ell", type=float, default=0.0)

    lap = sub.add_parser("laplace", help="Laplace approximation of a target")
    _add_target_args(lap)
    lap.add_argument("--max-iter", type=int, default=100)
    lap.add_argument("--tol", type=float, default=1e-8)
    lap.add_argument("--out", type=Path, help="write the fitted Gaussian as JSON")

    return parser


def _diag_target(args, config: Dict[str, Any]) -> Tuple[Target, Gaussian]:
    if args.target == "standard":
        target: Target = GaussianTarget(np.zeros(args.dim), np.eye(args.dim))
    else:
        spec = {"kind": args.target, "seed": args.target_seed, "nu": args.nu, "n": args.n_data}
        target = build_target(spec, args.dim, config)
    g = Gaussian(target.center, args.init_scale * np.eye(args.dim))
    return target, g


def _emit(payload: Dict[str, Any]):
    print(json.dumps(payload, indent=2, sort_keys=True))


def _load_spec(args, config: Dict[str, Any]) -> ExperimentSpec:
    if args.preset:
        spec = preset(args.preset, config)
    else:
        if not args.spec.exists():
            raise SpecError(f"Spec file not found: {args.spec}")
        with open(args.spec, "r") as f:
            data = yaml.safe_load(f) if args.spec.suffix in (".yaml", ".yml") else json.load(f)
        is_valid, reason = SpecValidator(config.get("validator", {})).validate_document(data, config)
        if not is_valid:
            raise SpecError(reason)
        spec = ExperimentSpec.from_dict(data, config)
    if args.full_scale:
        spec = spec.at_full_scale()
    return spec.with_overrides(
        replicates=args.seeds,
        steps=args.steps,
        record_timing=False if args.no_timing else None,
    )


def _cmd_run(args, config: Dict[str, Any]) -> int:
    if args.threads:
        config["harness"]["threads"] = max(1, args.threads)
    spec = _load_spec(args, config)
    out_dir = args.out or Path(config["system"]["output_root"]) / spec.name
    result = ExperimentOrchestrator(config).run_experiment(spec, out_dir)
    _emit({"out_dir": str(result.out_dir), "summary": result.summary})
    return EXIT_OK


def _cmd_diag(args, config: Dict[str, Any]) -> int:
    if args.diag_command == "bounds":
        inputs = BoundInputs(
            alpha=args.alpha, beta=args.beta, eta=args.eta, N=args.N, d=args.d,
            tau_max_inf=args.tau_inf, tau_max_E=args.tau_e,
            w2sq_init=args.w0, lambda_max_opt=args.lambda_max,
        )
        payload: Dict[str, Any] = {"inputs": inputs.to_dict()}
        for name, fn in (
            ("convex", bound_convex),
            ("convex_sgvi", bound_convex_sgvi),
            ("strongly_convex", bound_strongly_convex),
            ("strongly_convex_sgvi", bound_strongly_convex_sgvi),
        ):
            try:
                payload[name] = fn(inputs)
            except PreconditionViolated as e:
                payload[name] = None
                payload[f"{name}_skipped"] = str(e)
        _emit(payload)
        return EXIT_OK

    target, g = _diag_target(args, config)
    rng = RngState(args.seed)

    if args.diag_command == "variance":
        _emit(variance_gap_empirical(target, g, args.c, args.n, rng).to_dict())
    elif args.diag_command == "cloud":
        path = write_cloud(estimator_cloud(target, g, args.c, args.n, rng), args.out)
        _emit({"cloud": str(path), "n": args.n, "c": args.c})
    elif args.diag_command == "cstar":
        _emit({"c_star": c_star(target, g, args.n, rng), "n": args.n})
    elif args.diag_command == "region":
        if target.optimum is None:
            raise SpecError("Region checks need a Gaussian target")
        payload = {}
        if 0.0 < args.c < 2.0:
            inside, lhs, radius = reduction_region_check(g, target.optimum, args.ell, args.c)
            payload["neighbourhood"] = {"inside": inside, "lhs": lhs, "radius": radius}
        if target.alpha and args.c > 0:
            payload["large_variance"] = large_variance_check(g, target.alpha, args.c)
        _emit(payload)
    return EXIT_OK


def _cmd_laplace(args, config: Dict[str, Any]) -> int:
    target, g = _diag_target(args, config)
    x0 = np.zeros(args.dim)
    approx = laplace_approx(target, x0, max_iter=args.max_iter, tol=args.tol)
    payload: Dict[str, Any] = {"mode_norm": float(np.linalg.norm(approx.mean))}
    if target.optimum is not None:
        payload["kl"] = kl_gaussian(approx, target.optimum)
    else:
        payload["f"] = objective_f(target, approx, 256, RngState(args.seed))
    if args.out:
        with open(args.out, "w") as f:
            json.dump(approx.to_dict(), f)
        payload["out"] = str(args.out)
    _emit(payload)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and dispatch

    Returns:
        Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_SPEC
    except SystemExit as e:
        # --help
        return int(e.code or 0)

    try:
        config = load_config(args.config_file)
    except (OSError, yaml.YAMLError) as e:
        print(f"bwvi: cannot load configuration: {e}", file=sys.stderr)
        return EXIT_SPEC

    level = (args.log_level or config["system"]["log_level"]).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )

    handlers = {"run": _cmd_run, "diag": _cmd_diag, "laplace": _cmd_laplace}
    try:
        return handlers[args.command](args, config)
    except (UnknownPreset, SpecError) as e:
        print(f"bwvi: {e}", file=sys.stderr)
        return EXIT_SPEC
    except (ValueError, TypeError) as e:
        if isinstance(e, BWVIError):
            print(f"bwvi: {type(e).__name__}: {e}", file=sys.stderr)
            return EXIT_RUNTIME
        print(f"bwvi: invalid arguments: {e}", file=sys.stderr)
        return EXIT_SPEC
    except (BWVIError, OSError) as e:
        print(f"bwvi: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME

