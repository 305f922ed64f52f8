#!/usr/bin/env python3
"""
kocert CLI
Validate structural hypotheses, decide Keller–Osserman conditions, build
barriers and certify them from a JSON problem file.
"""

import argparse
import logging
import os
import sys
from contextlib import contextmanager
from typing import Iterator, Optional, Union

from ..core.barriers import (
    Barrier,
    BarrierKind,
    GluedSubsolution,
    build_annulus_profile,
    build_subsolution_p,
    build_supersolution,
    build_supersolution_bounded,
    build_supersolution_gradient,
)
from ..core.errors import (
    ExpressionError,
    KoError,
    MissingConstantError,
    SpecFileError,
    WrongRhsKindError,
)
from ..core.heisenberg import Geometry
from ..core.ko_decision import (
    Verdict,
    decide_ko,
    decide_ko_hat,
    sigma_scaling_check,
    tail_exponent,
)
from ..core.report import RunReport, emit
from ..core.settings import LOG_LEVEL_ENV, DEFAULT_SETTINGS, SolverSettings, default_report_dir
from ..core.spec_file import load_spec
from ..core.validators import Status, StructuralReport, validate_all
from ..core.verifier import (
    Box,
    Bump,
    fullspace_residual,
    geometry_checks,
    radial_crosscheck,
    radial_residual,
    weak_residual,
)

EXIT_OK = 0
EXIT_CERTIFICATE_FAILED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3

USAGE_ERRORS = (SpecFileError, ExpressionError, MissingConstantError, WrongRhsKindError)
SIGMA_CHECKS = (0.1, 0.5, 1.0)
BARRIER_KINDS = ("super", "bounded", "gradient", "sub", "annulus")

Candidate = Union[Barrier, GluedSubsolution]


class UsageError(Exception):
    """Bad command-line usage."""


class KocertArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with status 3."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def configure_logging(level: Optional[str]) -> None:
    level = (level or os.environ.get(LOG_LEVEL_ENV) or "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


# ------------------------------------------------------------------ plumbing


def _settings_from(args, base: SolverSettings) -> SolverSettings:
    return base.with_overrides(
        rel_tol=args.tol_rel,
        fd_step=args.fd_step,
        grid_n=args.grid_n,
        super_sigma_budget=args.sigma_budget,
        sub_sigma_budget=args.sigma_budget,
        seed=args.seed,
    )


def _load(args, command: str):
    """Problem, settings and an empty report for a command.

    Anything wrong at this stage is a problem-file or option error.
    """
    try:
        parsed = load_spec(args.spec)
        spec = parsed.spec
        if args.euclidean:
            spec = spec.with_geometry(Geometry.euclidean(spec.geometry.m))
        settings = _settings_from(args, parsed.settings)
    except ValueError as e:
        if isinstance(e, USAGE_ERRORS):
            raise
        raise UsageError(str(e)) from e
    report = RunReport(command, spec.to_dict(), settings.seed, settings.to_dict())
    return spec, settings, report


@contextmanager
def _certificate(report: RunReport, name: str) -> Iterator[None]:
    """Library failures inside the block fail the named certificate."""
    try:
        yield
    except USAGE_ERRORS:
        raise
    except (KoError, ArithmeticError) as e:
        logging.getLogger(__name__).error(f"{name}: {e}")
        report.fail(name, str(e))


def _finish(args, report: RunReport) -> int:
    out_dir = default_report_dir(args.out)
    written = emit(report, out_dir, csv_dir=args.emit_csv)
    for name, passed in sorted(report.certificates.items()):
        print(f"{'✅' if passed else '❌'} {name}")
    for name in report.inconclusive:
        print(f"❔ {name}: inconclusive")
    print(f"📝 Report: {written['report.json']}")
    return report.exit_code


# ------------------------------------------------------------------ barriers


def _build(args, spec, settings, kind: str) -> Candidate:
    """Dispatch to the builder; invalid barrier options are usage errors."""
    try:
        return _build_kind(args, spec, settings, kind)
    except ValueError as e:
        if isinstance(e, KoError):
            raise
        raise UsageError(str(e)) from e


def _build_kind(args, spec, settings, kind: str) -> Candidate:
    if kind == "super":
        btilde = 1.0 if args.btilde is None else args.btilde
        return build_supersolution(spec, args.eps, args.eta, args.t0, args.t1, btilde, settings)
    if kind == "bounded":
        if args.ceiling is None:
            raise UsageError("the bounded supersolution needs --ceiling")
        return build_supersolution_bounded(
            spec, args.eps, args.eta, args.t0, args.ceiling, args.t1, args.btilde, settings
        )
    if kind == "gradient":
        return build_supersolution_gradient(spec, args.eps, args.eta, args.t0, args.t1, settings)
    if kind == "sub":
        return build_subsolution_p(spec, args.sub_eps, settings, args.gluing_rate)
    if args.radius is None or args.a is None or args.u_star is None:
        raise UsageError("the annulus profile needs --radius, --a and --u-star")
    return build_annulus_profile(spec, args.radius, args.a, args.u_star, settings)


def _shape_checks(report: RunReport, candidate: Candidate) -> None:
    """Boundary and junction conditions of the constructed profile."""
    if isinstance(candidate, GluedSubsolution):
        mismatch = candidate.junction_mismatch()
        report.certify("junction_C1", max(mismatch.values()) <= 1e-9, {"junction": mismatch})
        return
    start = float(candidate.value(candidate.t0))
    if candidate.kind is BarrierKind.ANNULUS_HARMONIC:
        extras = candidate.extras
        end = float(candidate.value(candidate.T_sigma))
        errors = {"inner": abs(start - extras["a"]), "outer": abs(end - extras["u_star"])}
        report.certify("boundary_conditions", max(errors.values()) <= 1e-9, {"boundary": errors})
        return
    checks = {"alpha_t0_error": abs(start - candidate.eps)}
    ok = checks["alpha_t0_error"] <= 1e-12 * max(1.0, candidate.eps)
    if candidate.t1 is not None:
        checks["alpha_t1"] = float(candidate.value(candidate.t1))
        ok = ok and checks["alpha_t1"] <= candidate.eta
    if candidate.ceiling is not None:
        checks["ceiling_error"] = abs(float(candidate.value(candidate.T_sigma)) - candidate.ceiling)
        ok = ok and checks["ceiling_error"] <= 1e-8 * max(1.0, candidate.ceiling)
    report.certify("barrier_window", ok, {"window": checks})


def _tabulate(report: RunReport, candidate: Candidate, samples: int) -> None:
    with _certificate(report, "barrier_table"):
        report.barrier_table = candidate.sample(samples)


def _radial_certificate(report: RunReport, candidate: Candidate, spec, settings, samples: int) -> None:
    with _certificate(report, "radial_residual"):
        grid = radial_residual(candidate, spec, n=samples, settings=settings)
        report.certify("radial_residual", grid.passed, {"radial_residual": grid.to_dict()})
        report.add_residuals("radial", grid.points)


def _construct(args, command: str, kind: str) -> int:
    spec, settings, report = _load(args, command)
    candidate = None
    with report.timer.phase("build"), _certificate(report, "construction"):
        candidate = _build(args, spec, settings, kind)
        report.certify("construction", True, {"barrier": candidate.summary()})
    if candidate is not None:
        print(f"🚀 {candidate.summary()['kind']} built")
        _tabulate(report, candidate, args.samples)
        with report.timer.phase("certify"):
            with _certificate(report, "shape_checks"):
                _shape_checks(report, candidate)
            _radial_certificate(report, candidate, spec, settings, args.samples)
    return _finish(args, report)


def _verify_candidate(report: RunReport, candidate: Candidate, spec, settings, args) -> None:
    with _certificate(report, "fullspace_residual"):
        grid = fullspace_residual(candidate, spec, n_points=args.points, settings=settings)
        report.certify("fullspace_residual", grid.passed, {"fullspace_residual": grid.to_dict()})
        report.add_residuals("fullspace", grid.points)
    with _certificate(report, "radial_crosscheck"):
        check = radial_crosscheck(candidate, spec, settings=settings)
        report.certify("radial_crosscheck", check.passed, {"radial_crosscheck": check.to_dict()})
    if isinstance(candidate, GluedSubsolution):
        with _certificate(report, "weak_residual"):
            dim = spec.geometry.dim
            center = (candidate.t_sigma,) + (0.0,) * (dim - 1)
            radius = 0.5 * candidate.t_sigma
            box = Box(tuple(c - radius for c in center), tuple(c + radius for c in center))
            weak = weak_residual(candidate, spec, Bump(center, radius), box, settings=settings)
            tolerance = max(weak.error_estimate, 1e-12 * weak.abs_integral)
            report.certify("weak_residual", weak.value >= -tolerance, {"weak_residual": weak.to_dict()})


# ------------------------------------------------------------------ commands


def _structural(spec, settings, report: RunReport) -> Optional[StructuralReport]:
    structural = None
    with report.timer.phase("validate"), _certificate(report, "structural"):
        structural = validate_all(spec, settings)
        report.record("structural", structural.to_dict())
    return structural


def cmd_validate(args):
    """Check every structural hypothesis the declared constants allow."""
    spec, settings, report = _load(args, "validate")
    structural = _structural(spec, settings, report)
    if structural is None:
        return _finish(args, report)
    for name, verdict in structural.verdicts.items():
        if verdict.status is Status.INCONCLUSIVE:
            report.mark_inconclusive(name)
        else:
            report.certify(name, verdict.status is Status.PASS)
    return _finish(args, report)


def _decide(spec, settings, report: RunReport) -> dict:
    verdicts = {}
    with report.timer.phase("ko"), _certificate(report, "ko_decision"):
        verdicts["KO"] = decide_ko(spec, settings)
        if spec.is_difference and spec.constants.has("theta"):
            verdicts["KOhat"] = decide_ko_hat(spec, settings)
    report.record("ko", {name: v.to_dict() for name, v in verdicts.items()})
    for name, verdict in verdicts.items():
        print(f"🔎 {name}: {verdict.verdict.value} ({verdict.tier.value})")
        if verdict.verdict is Verdict.INCONCLUSIVE:
            report.mark_inconclusive(name)
    return verdicts


def cmd_ko(args):
    """Decide (KO), and (K̂O) for the gradient-difference form."""
    spec, settings, report = _load(args, "ko")
    verdicts = _decide(spec, settings, report)
    if "KO" in verdicts and verdicts["KO"].holds:
        checks = {}
        with report.timer.phase("sigma"):
            for sigma in SIGMA_CHECKS:
                name = f"sigma_scaling[{sigma}]"
                with _certificate(report, name):
                    check = sigma_scaling_check(spec, sigma, settings=settings)
                    checks[str(sigma)] = check.to_dict()
                    report.certify(name, check.holds)
        report.record("sigma_scaling", checks)
    try:
        report.record("K_growth_exponent", tail_exponent(spec, settings=settings))
    except (KoError, ArithmeticError) as e:
        logging.getLogger(__name__).warning(f"K growth fit skipped: {e}")
    return _finish(args, report)


def cmd_build_super(args):
    """Blow-up supersolution on [t0, T_σ)."""
    return _construct(args, "build-super", "super")


def cmd_build_super_bounded(args):
    """Supersolution reaching the ceiling A at T_σ."""
    return _construct(args, "build-super-bounded", "bounded")


def cmd_build_super_gradient(args):
    """Blow-up supersolution for the gradient-difference form."""
    return _construct(args, "build-super-gradient", "gradient")


def cmd_build_sub(args):
    """Entire glued subsolution for monomial φ when (KO) fails."""
    return _construct(args, "build-sub", "sub")


def cmd_annulus(args):
    """φ-harmonic radial profile on [R/2, R]."""
    return _construct(args, "annulus", "annulus")


def cmd_verify(args):
    """Build a barrier and certify it pointwise, in full space and weakly."""
    spec, settings, report = _load(args, "verify")
    candidate = None
    with report.timer.phase("build"), _certificate(report, "construction"):
        candidate = _build(args, spec, settings, args.barrier)
        report.certify("construction", True, {"barrier": candidate.summary()})
    if candidate is not None:
        _tabulate(report, candidate, args.samples)
        with report.timer.phase("verify"):
            with _certificate(report, "shape_checks"):
                _shape_checks(report, candidate)
            _radial_certificate(report, candidate, spec, settings, args.samples)
            _verify_candidate(report, candidate, spec, settings, args)
    return _finish(args, report)


def cmd_geometry(args):
    """Heisenberg identity suites."""
    try:
        settings = DEFAULT_SETTINGS.with_overrides(fd_step=args.fd_step, seed=args.seed)
    except ValueError as e:
        raise UsageError(str(e)) from e
    spec_dict = {}
    m_values = args.m or [1, 2, 3]
    if any(m < 1 for m in m_values) or args.trials < 1:
        raise UsageError("--m values and --trials must be positive")
    if args.spec:
        spec, settings, _ = _load(args, "geometry")
        spec_dict = spec.to_dict()
        m_values = args.m or [spec.geometry.m]
    report = RunReport("geometry", spec_dict, settings.seed, settings.to_dict())
    suites = {}
    with report.timer.phase("geometry"):
        for m in m_values:
            with _certificate(report, f"H{m}"):
                result = geometry_checks(m, args.trials, settings.seed, settings)
                suites[f"H{m}"] = result.to_dict()
                for name, suite in result.suites.items():
                    report.certify(f"H{m}.{name}", suite.passed)
    report.record("geometry", suites)
    return _finish(args, report)


def cmd_full_report(args):
    """Validate, decide, build the barrier the verdict calls for and verify it."""
    spec, settings, report = _load(args, "full-report")
    structural = _structural(spec, settings, report)
    if structural is not None:
        for name in structural.names_with(Status.FAIL):
            report.certify(name, False)
        for name in structural.names_with(Status.INCONCLUSIVE):
            report.mark_inconclusive(name)
    verdicts = _decide(spec, settings, report)

    kind = None
    if spec.is_difference:
        if "KOhat" in verdicts and verdicts["KOhat"].holds and spec.constants.has("D", "B"):
            kind = "gradient"
    elif "KO" in verdicts and verdicts["KO"].holds:
        kind = "super"
    elif "KO" in verdicts and verdicts["KO"].verdict is Verdict.FAILS and spec.p is not None:
        kind = "sub"
    if kind is None:
        print("📝 No barrier applies to this verdict")
        return _finish(args, report)

    candidate = None
    with report.timer.phase("build"), _certificate(report, "construction"):
        candidate = _build(args, spec, settings, kind)
        report.certify("construction", True, {"barrier": candidate.summary()})
    if candidate is not None:
        _tabulate(report, candidate, args.samples)
        with report.timer.phase("verify"):
            with _certificate(report, "shape_checks"):
                _shape_checks(report, candidate)
            _radial_certificate(report, candidate, spec, settings, args.samples)
            _verify_candidate(report, candidate, spec, settings, args)
    return _finish(args, report)


# ------------------------------------------------------------------ parser


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Seed for sampled grids (default: 0)")
    common.add_argument("--emit-csv", metavar="DIR", default=None, help="Write barrier.csv/residuals.csv here")
    common.add_argument("--out", metavar="DIR", default=None, help="Report directory (default: $KO_REPORT_DIR or .)")
    common.add_argument("--tol-rel", type=float, default=None, help="Relative quadrature tolerance")
    common.add_argument("--fd-step", type=float, default=None, help="Finite-difference step")
    common.add_argument("--grid-n", type=int, default=None, help="Validator grid size per axis")
    common.add_argument("--sigma-budget", type=int, default=None, help="σ-selection iteration budget")
    common.add_argument("--euclidean", action="store_true", help="Override the geometry with R^m")
    common.add_argument("--log-level", default=None, help="Logging level (default: $KO_LOG_LEVEL or WARNING)")
    return common


def _barrier_options() -> argparse.ArgumentParser:
    barrier = argparse.ArgumentParser(add_help=False)
    barrier.add_argument("--eps", type=float, default=0.1, help="α(t0) (default: 0.1)")
    barrier.add_argument("--eta", type=float, default=0.2, help="Bound for α on [t0, t1] (default: 0.2)")
    barrier.add_argument("--t0", type=float, default=1.0, help="Inner radius (default: 1)")
    barrier.add_argument("--t1", type=float, default=2.0, help="Radius where α ≤ eta still holds (default: 2)")
    barrier.add_argument("--btilde", type=float, default=None, help="Right-hand side scale B̃")
    barrier.add_argument("--ceiling", type=float, default=None, help="Ceiling A of the bounded variant")
    barrier.add_argument("--sub-eps", type=float, default=None, help="Outer start value of the subsolution")
    barrier.add_argument("--gluing-rate", type=float, default=None, help="Gluing rate k (default: 1)")
    barrier.add_argument("--radius", type=float, default=None, help="Outer radius R of the annulus")
    barrier.add_argument("--a", type=float, default=None, help="Annulus value at R/2")
    barrier.add_argument("--u-star", type=float, default=None, help="Annulus value at R")
    barrier.add_argument("--samples", type=int, default=1000, help="Profile samples (default: 1000)")
    barrier.add_argument("--points", type=int, default=200, help="Full-space sample points (default: 200)")
    return barrier


def build_parser() -> argparse.ArgumentParser:
    parser = KocertArgumentParser(
        prog="kocert",
        description="kocert - Keller–Osserman certificates on the Heisenberg group",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  kocert validate problem.json                 # Structural hypotheses
  kocert ko problem.json                       # Decide (KO) / (K̂O)
  kocert build-super problem.json --eps 0.1 --eta 0.2 --t0 1 --t1 2
  kocert build-super-bounded problem.json --ceiling 10
  kocert build-sub problem.json --emit-csv out/
  kocert verify problem.json --barrier sub     # Full-space and weak residuals
  kocert geometry --m 1 2 3                    # Heisenberg identity suites
  kocert full-report problem.json --out reports/

Exit status: 0 all certificates pass, 1 a certificate failed,
2 an inconclusive verdict, 3 usage or problem-file error.
        """,
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands", required=True)
    common = _common_options()
    barrier = _barrier_options()

    def with_spec(name: str, help_text: str, func, parents=(common,)):
        sub = subparsers.add_parser(name, help=help_text, parents=list(parents))
        sub.add_argument("spec", help="Problem JSON file")
        sub.set_defaults(func=func)
        return sub

    with_spec("validate", "Check structural hypotheses", cmd_validate)
    with_spec("ko", "Decide the Keller–Osserman condition", cmd_ko)
    with_spec("build-super", "Build the blow-up supersolution", cmd_build_super, (common, barrier))
    with_spec("build-super-bounded", "Build the bounded supersolution", cmd_build_super_bounded, (common, barrier))
    with_spec("build-super-gradient", "Build the gradient-case supersolution", cmd_build_super_gradient, (common, barrier))
    with_spec("build-sub", "Build the glued subsolution", cmd_build_sub, (common, barrier))
    with_spec("annulus", "Build the φ-harmonic annulus profile", cmd_annulus, (common, barrier))
    verify_parser = with_spec("verify", "Build and certify a barrier", cmd_verify, (common, barrier))
    verify_parser.add_argument("--barrier", choices=BARRIER_KINDS, default="super", help="Barrier to certify")
    with_spec("full-report", "Validate, decide, build and verify", cmd_full_report, (common, barrier))

    geometry_parser = subparsers.add_parser("geometry", help="Heisenberg identity suites", parents=[common])
    geometry_parser.add_argument("spec", nargs="?", help="Problem JSON file (takes m from it)")
    geometry_parser.add_argument("--m", type=int, nargs="+", default=None, help="Heisenberg indices (default: 1 2 3)")
    geometry_parser.add_argument("--trials", type=int, default=200, help="Random trials per suite (default: 200)")
    geometry_parser.set_defaults(func=cmd_geometry)
    return parser


def main(argv=None):
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    try:
        return args.func(args)
    except USAGE_ERRORS + (UsageError,) as e:
        print(f"❌ {e}")
        return EXIT_USAGE
    except (KoError, ArithmeticError) as e:
        print(f"❌ {e}")
        return EXIT_CERTIFICATE_FAILED
    except KeyboardInterrupt:
        print("\n❌ Interrupted by user")
        return EXIT_CERTIFICATE_FAILED


if __name__ == "__main__":
    sys.exit(main())
