from __future__ import annotations

import argparse
import asyncio
import json
import logging
import sys
from itertools import product
from pathlib import Path

from fkdv.branch import continue_branch, extrapolate_highest, select_tail, verify_asymptotics
from fkdv.config import ContinuationConfig, Settings, load_settings, with_overrides
from fkdv.diagnostics import crest_exponent, crest_gap, format_summary, run_branch_diagnostics
from fkdv.errors import ConfigError, FkdvError, NonpositiveLambdaError
from fkdv.export import (
    ASYMPTOTICS_JSON,
    BRANCH_METADATA,
    KERNEL_CSV,
    KERNEL_REPORT,
    LIMIT_GRID,
    LIMIT_REPORT,
    LIMIT_WAVE,
    load_branch_csv,
    write_branch_outputs,
    write_grid_csv,
    write_json,
    write_kernel_csv,
    write_report_json,
)
from fkdv.kernel import (
    build_kernel_table,
    certify_kernel_properties,
    fit_holder_exponent,
    kernel_series_tail_bound,
    lambda_constant,
)
from fkdv.models import MultiplierSymbol, PropertyCheck
from fkdv.utils.logger import setup_logging

logger = logging.getLogger("fkdv.main")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

DEFAULT_EPS = (0.08, 0.04, 0.02, 0.01)
LIMIT_EXPONENT_WINDOW = (0.9, 1.3)
BRANCH_REPORT = "branch_report.json"


def _parse_list(text: str | None, cast) -> list | None:
    if text is None:
        return None
    try:
        return [cast(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigError(f"Invalid list {text!r}: {e}") from e


def _symbol(alpha: float) -> MultiplierSymbol:
    try:
        return MultiplierSymbol(alpha)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def _continuation_config(settings: Settings, args: argparse.Namespace, **overrides) -> ContinuationConfig:
    """File settings overridden by command-line flags, validated."""
    config = with_overrides(
        settings.continuation,
        alpha=args.alpha,
        k=args.k,
        modes=args.modes,
        stop_crest_gap=getattr(args, "stop_gap", None),
        max_points=getattr(args, "max_points", None),
        **overrides,
    )
    if config.max_modes < config.modes:
        config = with_overrides(config, max_modes=config.modes)
    config.validate()
    return config


def _out_dir(settings: Settings, args: argparse.Namespace) -> Path:
    return Path(args.out or settings.output.directory)


def cmd_kernel(settings: Settings, args: argparse.Namespace) -> int:
    """Tabulate K_P and certify its properties; exit 0 iff every check passes."""
    alpha = args.alpha if args.alpha is not None else settings.continuation.alpha
    symbol = _symbol(alpha)
    grid = args.grid or settings.kernel.grid_resolution
    modes = args.modes or settings.kernel.modes
    if grid < 8:
        raise ConfigError("grid must be at least 8")
    if modes is not None and modes < 1:
        raise ConfigError("modes must be at least 1")
    out = _out_dir(settings, args)

    table = build_kernel_table(symbol, grid, modes)
    checks = certify_kernel_properties(symbol, grid, table.truncation_modes)
    try:
        lam = lambda_constant(symbol, settings.kernel.lambda_resolution, table.truncation_modes)
        checks.append(PropertyCheck("lambda_positive", True, lam, f"lambda = {lam:.6e}"))
    except NonpositiveLambdaError as e:
        lam = None
        checks.append(PropertyCheck("lambda_positive", False, 0.0, str(e)))

    write_kernel_csv(out / KERNEL_CSV, table)
    write_report_json(
        out / KERNEL_REPORT,
        checks,
        alpha=symbol.alpha,
        modes=table.truncation_modes,
        grid=grid,
        tail_bound=kernel_series_tail_bound(symbol, table.truncation_modes),
        lambda_constant=lam,
        holder_exponent=fit_holder_exponent(symbol, table.truncation_modes),
    )
    for c in checks:
        print(f"{c.check:<20} {'ok' if c.passed else 'FAIL':<5} margin={c.margin:.3e}  {c.detail}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAILURE


def _run_branch(config: ContinuationConfig, settings: Settings, directory: Path) -> tuple[int, str]:
    """One continuation run with its outputs; returns (exit code, summary table)."""
    symbol = MultiplierSymbol(config.alpha)
    lam = lambda_constant(symbol, settings.kernel.lambda_resolution, k=config.k)
    run = continue_branch(symbol, config, lam, settings.diagnostics)
    write_branch_outputs(directory, run)
    if not run.points:
        return EXIT_FAILURE, f"alpha={config.alpha:g} k={config.k}: no points ({run.stopped_reason})"

    report = run_branch_diagnostics(run.points)
    write_json(directory / BRANCH_REPORT, report.to_dict() | {"stopped_reason": run.stopped_reason})
    header = (
        f"alpha={config.alpha:g} k={config.k} stopped={run.stopped_reason} "
        f"points={len(run.points)} modes={run.modes}"
    )
    ok = run.stopped_reason == "crest_gap" and report.passed
    return (EXIT_OK if ok else EXIT_FAILURE), header + "\n" + format_summary(run.points)


async def _sweep(jobs: list[tuple[ContinuationConfig, Path]], settings: Settings) -> list[tuple[int, str]]:
    """Independent (alpha, k) runs on worker threads; each writes only its own directory."""
    tasks = [asyncio.to_thread(_run_branch, config, settings, directory) for config, directory in jobs]
    results = await asyncio.gather(*tasks, return_exceptions=True)
    out = []
    for (config, _), result in zip(jobs, results):
        if isinstance(result, BaseException):
            logger.error("Run alpha=%g k=%d failed: %s", config.alpha, config.k, result)
            out.append((EXIT_FAILURE, f"alpha={config.alpha:g} k={config.k}: error {result}"))
        else:
            out.append(result)
    return out


def cmd_branch(settings: Settings, args: argparse.Namespace) -> int:
    """Continue one branch, or a concurrent (alpha, k) sweep with per-run directories."""
    overrides = {"pseudo_arclength": True} if args.pseudo_arclength else {}
    if args.direction is not None:
        overrides["direction"] = args.direction
    base = _continuation_config(settings, args, **overrides)
    out = _out_dir(settings, args)
    alphas = _parse_list(args.sweep_alpha, float)
    ks = _parse_list(args.sweep_k, int)

    if alphas is None and ks is None:
        code, summary = _run_branch(base, settings, out)
        print(summary)
        return code

    jobs = []
    for alpha, k in product(alphas or [base.alpha], ks or [base.k]):
        config = with_overrides(base, alpha=alpha, k=k)
        config.validate()
        jobs.append((config, out / f"alpha={alpha:g}_k={k}"))
    logger.info("Sweeping %d runs", len(jobs))

    results = asyncio.run(_sweep(jobs, settings))
    for _, summary in results:
        print(summary)
        print()
    return max(code for code, _ in results)


def cmd_verify_asymptotics(settings: Settings, args: argparse.Namespace) -> int:
    """Fitted convergence orders of the second-order expansion; exit 0 iff both reach 2.7."""
    config = _continuation_config(settings, args)
    eps = _parse_list(args.eps, float) or list(DEFAULT_EPS)
    symbol = MultiplierSymbol(config.alpha)

    report = verify_asymptotics(symbol, config.k, eps, config)
    out = _out_dir(settings, args)
    out.mkdir(parents=True, exist_ok=True)
    path = out / ASYMPTOTICS_JSON
    path.write_text(report.to_json() + "\n", encoding="utf-8")
    logger.info("Wrote %s", path)

    for e, r, m in zip(report.eps, report.residual_norms, report.mu_errors):
        print(f"eps={e:<8g} |F(asym)|={r:.3e}  |mu_newton - mu_asym|={m:.3e}")
    print(f"residual order {report.residual_order:.3f}, mu order {report.mu_order:.3f}")
    print(
        f"mu2 formula {report.mu2_formula:.6e}, from branch {report.mu2_numeric:.6e}"
        + ("  [discrepancy: not supercritical]" if report.discrepancy else "")
    )
    return EXIT_OK if report.passed else EXIT_FAILURE


def cmd_limit(settings: Settings, args: argparse.Namespace) -> int:
    """Highest-wave estimate and its crest exponent; exit 0 iff it lies in [0.9, 1.3]."""
    config = _continuation_config(settings, args)
    out = _out_dir(settings, args)

    if args.from_path:
        source = Path(args.from_path)
        if not source.exists():
            raise ConfigError(f"Branch file not found: {source}")
        points = load_branch_csv(source)
        metadata = source.parent / BRANCH_METADATA
        if args.alpha is None and metadata.exists():
            config = with_overrides(config, alpha=json.loads(metadata.read_text(encoding="utf-8"))["alpha"])
    else:
        run = continue_branch(MultiplierSymbol(config.alpha), config, with_diagnostics=False)
        points = run.points

    if args.point is not None:
        if not -len(points) <= args.point < len(points):
            raise ConfigError(f"point {args.point} out of range for {len(points)} branch points")
        state = points[args.point].state
        origin = f"point {args.point}"
    else:
        state = extrapolate_highest(select_tail(points))
        origin = "extrapolated"

    exponent = crest_exponent(state, samples=settings.diagnostics.exponent_samples)
    lo, hi = LIMIT_EXPONENT_WINDOW
    passed = lo <= exponent <= hi

    write_json(out / LIMIT_WAVE, state.to_dict(config.alpha))
    write_json(out / LIMIT_REPORT, {
        "source": origin,
        "alpha": config.alpha,
        "k": state.k,
        "mu": state.mu,
        "crest_gap": crest_gap(state),
        "crest_exponent": exponent,
        "window": [lo, hi],
        "pass": passed,
    })
    write_grid_csv(out / LIMIT_GRID, state.phi, max(8, 4 * state.modes))

    print(f"{origin} wave: mu={state.mu:.10f} crest exponent={exponent:.4f} ({'ok' if passed else 'FAIL'})")
    return EXIT_OK if passed else EXIT_FAILURE


COMMANDS = {
    "kernel": cmd_kernel,
    "branch": cmd_branch,
    "verify-asymptotics": cmd_verify_asymptotics,
    "limit": cmd_limit,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, help="symbol order, alpha > 1")
    common.add_argument("--k", type=int, help="branch wavenumber")
    common.add_argument("--modes", type=int, help="cosine modes (kernel: truncation modes)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--config", help="YAML settings file")
    common.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")

    parser = argparse.ArgumentParser(prog="fkdv", description="Fractional KdV branches and highest waves")
    sub = parser.add_subparsers(dest="command", required=True)

    kernel = sub.add_parser("kernel", parents=[common], help="tabulate and certify the kernel")
    kernel.add_argument("--grid", type=int, help="half-period grid resolution")

    branch = sub.add_parser("branch", parents=[common], help="continue a bifurcation branch")
    branch.add_argument("--stop-gap", type=float, help="stop when crest_gap < stop_gap * mu")
    branch.add_argument("--max-points", type=int)
    branch.add_argument("--direction", type=int, choices=(1, -1), help="sign of the amplitude")
    branch.add_argument("--pseudo-arclength", action="store_true", help="arclength corrector")
    branch.add_argument("--sweep-alpha", help="comma-separated alpha values")
    branch.add_argument("--sweep-k", help="comma-separated wavenumbers")

    verify = sub.add_parser("verify-asymptotics", parents=[common], help="order study of the expansion")
    verify.add_argument("--eps", help="comma-separated amplitudes")

    limit = sub.add_parser("limit", parents=[common], help="highest-wave extrapolation")
    limit.add_argument("--from", dest="from_path", help="existing branch CSV")
    limit.add_argument("--point", type=int, help="analyse this branch point without extrapolation")
    limit.add_argument("--stop-gap", type=float)
    limit.add_argument("--max-points", type=int)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = load_settings(args.config)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    setup_logging(args.log_level or settings.logging.level, settings.logging.file)

    try:
        return COMMANDS[args.command](settings, args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except FkdvError as e:
        logger.error("%s failed: %s", args.command, e)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
