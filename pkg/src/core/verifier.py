"""
Certificates for constructed functions.

Radial residuals use the closed-form radial operator; full-space residuals
evaluate the divergence form by central differences at seeded random
points; weak residuals integrate against a smooth bump; geometry checks
exercise the Heisenberg identities the operators rest on.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .barriers import Barrier, BarrierKind, GluedSubsolution, gradient_rhs
from .errors import (
    ProfileDomainError,
    SingularPointError,
    VanishingGradientError,
    WeakQuadratureError,
)
from .heisenberg import (
    GroupMode,
    Point,
    PolynomialField,
    RadialKind,
    ScalarField,
    euclidean_modulus_field,
    euclidean_phi_laplacian_fd,
    group_op,
    horizontal_from_euclidean,
    horizontal_hessian,
    koranyi,
    koranyi_field,
    matrix_b,
    phi_laplacian_analytic,
    phi_laplacian_fd,
    radial_field,
    radial_operator,
    radial_phi_laplacian,
    translated_field,
)
from .profiles import ProblemSpec, Profile
from .settings import DEFAULT_SETTINGS, SolverSettings

logger = logging.getLogger(__name__)

Candidate = Union[Barrier, GluedSubsolution, ScalarField]

MAX_SIMPSON_NODES = 65
WEAK_DISAGREEMENT = 0.05


class Sign(Enum):
    SUPER_LE = "SuperLE"
    SUB_GE = "SubGE"


@dataclass
class ResidualGrid:
    """Residuals at sample locations and the sign verdict."""

    sign: Sign
    points: List[Tuple[Tuple[float, ...], float]]
    worst: float
    passed: bool
    skipped: int = 0
    slack: float = 0.0
    worst_location: Optional[Tuple[float, ...]] = None
    worst_relative: float = 0.0
    seed: Optional[int] = None
    label: str = ""

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "sign": self.sign.value,
            "passed": self.passed,
            "worst": self.worst,
            "worst_relative": self.worst_relative,
            "worst_location": list(self.worst_location) if self.worst_location is not None else None,
            "points": len(self.points),
            "skipped": self.skipped,
            "slack": self.slack,
            "seed": self.seed,
        }


def _judge(
    sign: Sign,
    locations: Sequence[Tuple[float, ...]],
    residual: np.ndarray,
    scale: np.ndarray,
    slack: float,
    skipped: int,
    seed: Optional[int],
    label: str,
) -> ResidualGrid:
    points = [(tuple(float(v) for v in loc), float(r)) for loc, r in zip(locations, residual)]
    if not points:
        return ResidualGrid(sign, [], math.nan, False, skipped, slack, seed=seed, label=label)
    relative = residual / np.maximum(scale, 1e-300)
    if sign is Sign.SUPER_LE:
        ok = residual <= slack * scale
        idx = int(np.argmax(relative))
    else:
        ok = residual >= -slack * scale
        idx = int(np.argmin(relative))
    result = ResidualGrid(
        sign,
        points,
        float(residual[idx]),
        bool(np.all(ok)),
        skipped,
        slack,
        points[idx][0],
        float(relative[idx]),
        seed,
        label,
    )
    if not result.passed:
        logger.info(f"{label}: {sign.value} violated, worst residual {result.worst:.3e} at {result.worst_location}")
    return result


def default_sign(candidate: Candidate) -> Sign:
    return Sign.SUB_GE if isinstance(candidate, GluedSubsolution) else Sign.SUPER_LE


# ---------------------------------------------------------------- radial


def _radial_rhs(candidate: Union[Barrier, GluedSubsolution], spec: ProblemSpec, a, a1) -> np.ndarray:
    if isinstance(candidate, GluedSubsolution):
        return np.asarray(spec.f.value(a)) * np.asarray(spec.l.value(np.abs(a1)))
    if candidate.kind is BarrierKind.ANNULUS_HARMONIC:
        return np.zeros_like(a)
    if candidate.kind is BarrierKind.SUPERSOLUTION_GRADIENT:
        return gradient_rhs(spec, candidate.rhs_scale, a, a1)
    return candidate.rhs_scale * np.asarray(spec.f.value(a)) * np.asarray(spec.l.value(np.abs(a1)))


def seam_band(t_sigma: float, step: float) -> float:
    return 2.0 * step * max(1.0, t_sigma)


def radial_residual(
    candidate: Union[Barrier, GluedSubsolution],
    spec: ProblemSpec,
    sign: Optional[Sign] = None,
    grid: Optional[Sequence[float]] = None,
    n: int = 1000,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> ResidualGrid:
    """φ′(α′)α″ + (Q/t)φ(α′) − RHS on radii inside the profile's domain.

    Args:
        candidate: Barrier or glued subsolution
        spec: Problem providing φ and the right-hand side
        sign: SuperLE or SubGE; defaults by candidate kind
        grid: Radii to test; the candidate's interior grid of n points when omitted
        n: Grid size when no grid is given
        settings: Slack

    Returns:
        ResidualGrid with slack relative to the size of the individual terms
    """
    sign = sign or default_sign(candidate)
    skipped = 0
    if isinstance(candidate, GluedSubsolution):
        if grid is None:
            t = np.linspace(0.01 * candidate.t_sigma, 4.0 * candidate.t_sigma, n)
            near = np.abs(t - candidate.t_sigma) < seam_band(candidate.t_sigma, settings.fd_step)
            skipped = int(np.count_nonzero(near))
            t = t[~near]
        else:
            t = np.asarray(grid, dtype=float)
        if np.any(t <= 0):
            raise ValueError("radial residual grid must avoid the axis")
    else:
        t = candidate.interior_grid(n) if grid is None else np.asarray(grid, dtype=float)
        lo, hi = candidate.domain
        inside = (t >= lo) & ((t < hi) if candidate.blows_up else (t <= hi))
        if not np.all(inside):
            raise ValueError(f"grid leaves the domain [{lo}, {hi})")
    phi = spec.phi
    coef = candidate.coefficient
    principal = np.asarray(radial_operator(candidate, t, phi, 0.0))
    a, a1 = np.asarray(candidate.value(t)), np.asarray(candidate.derivative(t))
    lower = coef / t * np.sign(a1) * np.asarray(phi.value(np.abs(a1)))
    rhs = _radial_rhs(candidate, spec, a, a1)
    residual = principal + lower - rhs
    scale = np.abs(principal) + np.abs(lower) + np.abs(rhs)
    label = candidate.summary()["kind"] + " radial"
    return _judge(sign, [(x,) for x in t], residual, scale, settings.residual_slack, skipped, None, label)


# ------------------------------------------------------------- full space


@dataclass
class SamplingRegion:
    """Radii [radial_min, radial_max] of the candidate's radial variable, |t| ≤ vertical."""

    radial_min: float
    radial_max: float
    vertical: float = 1.0

    def __post_init__(self):
        if not 0 < self.radial_min < self.radial_max:
            raise ValueError("sampling region needs 0 < radial_min < radial_max")

    def to_dict(self) -> dict:
        return {"radial_min": self.radial_min, "radial_max": self.radial_max, "vertical": self.vertical}


def default_region(candidate: Candidate) -> SamplingRegion:
    if isinstance(candidate, GluedSubsolution):
        return SamplingRegion(0.05 * candidate.t_sigma, 4.0 * candidate.t_sigma)
    if isinstance(candidate, Barrier):
        lo, hi = candidate.domain
        if candidate.blows_up:
            return SamplingRegion(lo + 1e-3 * (hi - lo), lo + 0.5 * (hi - lo))
        width = hi - lo
        return SamplingRegion(lo + 1e-3 * width, hi - 1e-3 * width)
    return SamplingRegion(0.1, 2.0)


def _subsolution_field(sub: GluedSubsolution, dim: int, horizontal: int) -> ScalarField:
    """U(ρ) with ρ the modulus of the first ``horizontal`` coordinates; gradient 0 on the axis."""

    def rho(x):
        return np.linalg.norm(x[..., :horizontal], axis=-1)

    def value(x):
        return np.asarray(sub.value(rho(x)))

    def gradient(x):
        r = rho(x)
        safe = np.where(r > 0, r, 1.0)
        d = np.asarray(sub.derivative(r)) / safe
        out = np.zeros(x.shape)
        out[..., :horizontal] = np.where(r > 0, d, 0.0)[..., None] * x[..., :horizontal]
        return out

    return ScalarField(dim, value, gradient, None, label="U(|z|)")


def as_field(candidate: Candidate, spec: ProblemSpec) -> ScalarField:
    """Full-space function behind a barrier, a glued subsolution or a plain field."""
    geometry = spec.geometry
    if isinstance(candidate, ScalarField):
        return candidate
    if isinstance(candidate, GluedSubsolution):
        horizontal = geometry.m if geometry.is_euclidean else 2 * geometry.m
        return _subsolution_field(candidate, geometry.dim, horizontal)
    base = euclidean_modulus_field(geometry.m) if geometry.is_euclidean else koranyi_field(geometry.m)
    return radial_field(candidate, base, label=candidate.kind.value)


def _unit_sphere(rng: np.random.Generator, k: int) -> np.ndarray:
    v = rng.standard_normal(k)
    return v / np.linalg.norm(v)


def sample_points(
    candidate: Candidate,
    spec: ProblemSpec,
    region: SamplingRegion,
    n_points: int,
    rng: np.random.Generator,
    step: float,
) -> Tuple[List[np.ndarray], int]:
    """Draw points whose radial variable lies in the region, avoiding singular loci."""
    geometry = spec.geometry
    m = geometry.m
    points: List[np.ndarray] = []
    rejected = 0
    for _ in range(20 * n_points):
        if len(points) == n_points:
            break
        rho = rng.uniform(region.radial_min, region.radial_max)
        if geometry.is_euclidean:
            x = rho * _unit_sphere(rng, m)
        elif isinstance(candidate, GluedSubsolution):
            x = np.concatenate([rho * _unit_sphere(rng, 2 * m), [rng.uniform(-region.vertical, region.vertical)]])
        else:
            w = rng.standard_normal(2 * m + 1)
            z2 = float(np.dot(w[:-1], w[:-1]))
            gauge = (z2 * z2 + w[-1] ** 2) ** 0.25
            lam = rho / gauge
            x = np.concatenate([lam * w[:-1], [lam * lam * w[-1]]])
            if np.linalg.norm(x[:-1]) < 1e-6 * rho:
                rejected += 1
                continue
        if isinstance(candidate, GluedSubsolution) and abs(rho - candidate.t_sigma) < seam_band(candidate.t_sigma, step):
            rejected += 1
            continue
        points.append(x)
    return points, rejected


def _zero_gradient(u: ScalarField, x: np.ndarray, step: float) -> bool:
    h = step * np.maximum(1.0, np.abs(x))
    stencil = np.concatenate([x[None, :], x + np.diag(h), x - np.diag(h)])
    return bool(np.all(u.grad(stencil) == 0.0))


def _fullspace_rhs(candidate: Candidate, spec: ProblemSpec, value: float, slope: float) -> float:
    if isinstance(candidate, Barrier) and candidate.kind is BarrierKind.ANNULUS_HARMONIC:
        return 0.0
    if spec.is_difference:
        return float(spec.f.value(value) - spec.h.value(value) * spec.g.value(slope))
    return float(spec.f.value(value) * spec.l.value(slope))


def fullspace_residual(
    candidate: Candidate,
    spec: ProblemSpec,
    region: Optional[SamplingRegion] = None,
    n_points: int = 200,
    step: Optional[float] = None,
    seed: Optional[int] = None,
    sign: Optional[Sign] = None,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> ResidualGrid:
    """Δ^φ u − RHS(u, |∇_H u|) at seeded random points, Δ^φ by central differences."""
    step = settings.fd_step if step is None else step
    seed = settings.seed if seed is None else seed
    sign = sign or default_sign(candidate)
    region = region or default_region(candidate)
    rng = np.random.default_rng(seed)
    u = as_field(candidate, spec)
    geometry = spec.geometry
    points, skipped = sample_points(candidate, spec, region, n_points, rng, step)
    locations, residuals, scales = [], [], []
    for x in points:
        try:
            if _zero_gradient(u, x, step):
                lap = 0.0
            elif geometry.is_euclidean:
                lap = euclidean_phi_laplacian_fd(u, x, spec.phi, step)
            else:
                lap = phi_laplacian_fd(u, Point.from_coords(x), spec.phi, step)
            grad = u.grad(x)
            g = grad if geometry.is_euclidean else horizontal_from_euclidean(grad, x, geometry.m)
            rhs = _fullspace_rhs(candidate, spec, float(u.value(x)), float(np.linalg.norm(g)))
        except (SingularPointError, VanishingGradientError, ProfileDomainError) as exc:
            logger.debug(f"Skipping {x.tolist()}: {exc}")
            skipped += 1
            continue
        locations.append(tuple(x))
        residuals.append(lap - rhs)
        scales.append(max(abs(lap), abs(rhs)))
    name = candidate.kind.value if isinstance(candidate, Barrier) else type(candidate).__name__
    label = f"{name} fullspace"
    return _judge(
        sign,
        locations,
        np.array(residuals),
        np.array(scales),
        settings.fullspace_slack,
        skipped,
        seed,
        label,
    )


def radial_crosscheck(
    candidate: Union[Barrier, GluedSubsolution],
    spec: ProblemSpec,
    n_points: int = 50,
    step: Optional[float] = None,
    seed: Optional[int] = None,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> "SuiteResult":
    """Finite-difference Δ^φ against the closed-form radialization at the same points."""
    step = settings.fd_step if step is None else step
    seed = settings.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    geometry = spec.geometry
    if geometry.is_euclidean:
        kind = RadialKind.EUCLIDEAN
    elif isinstance(candidate, GluedSubsolution):
        kind = RadialKind.STATIONARY
    else:
        kind = RadialKind.GAUGE
    u = as_field(candidate, spec)
    points, _ = sample_points(candidate, spec, default_region(candidate), n_points, rng, step)
    worst = 0.0
    for x in points:
        if geometry.is_euclidean:
            fd = euclidean_phi_laplacian_fd(u, x, spec.phi, step)
            closed = radial_phi_laplacian(candidate, x, spec.phi, kind)
        else:
            q = Point.from_coords(x)
            fd = phi_laplacian_fd(u, q, spec.phi, step)
            closed = radial_phi_laplacian(candidate, q, spec.phi, kind)
        worst = max(worst, abs(fd - closed) / max(abs(closed), 1e-12))
    return SuiteResult("radial_crosscheck", worst <= 1e-3, worst, 1e-3, len(points))


# ------------------------------------------------------------------- weak


@dataclass(frozen=True)
class Bump:
    """ζ(x) = exp(1 − 1/(1 − |x − c|²/ρ²)) inside the ball, 0 outside."""

    center: Tuple[float, ...]
    radius: float

    def _parts(self, x: np.ndarray):
        d = x - np.asarray(self.center)
        s = np.sum(d * d, axis=-1) / self.radius**2
        inside = s < 1.0
        gap = np.where(inside, 1.0 - s, 1.0)
        zeta = np.where(inside, np.exp(1.0 - 1.0 / gap), 0.0)
        return d, gap, zeta

    def value(self, x: np.ndarray) -> np.ndarray:
        return self._parts(np.asarray(x, dtype=float))[2]

    def grad(self, x: np.ndarray) -> np.ndarray:
        d, gap, zeta = self._parts(np.asarray(x, dtype=float))
        return (-zeta / gap**2 * 2.0 / self.radius**2)[..., None] * d


@dataclass(frozen=True)
class Box:
    lo: Tuple[float, ...]
    hi: Tuple[float, ...]

    def contains_ball(self, center: Sequence[float], radius: float) -> bool:
        c = np.asarray(center, dtype=float)
        return bool(np.all(c - radius >= np.asarray(self.lo)) and np.all(c + radius <= np.asarray(self.hi)))

    @property
    def volume(self) -> float:
        return float(np.prod(np.asarray(self.hi) - np.asarray(self.lo)))


@dataclass
class WeakResidual:
    """−∫A(|∇_H u|)∇_H u·∇_H ζ − ∫RHS·ζ with its quadrature error estimate."""

    value: float
    error_estimate: float
    method: str
    nodes: int
    abs_integral: float
    seed: Optional[int] = None

    def __float__(self) -> float:
        return self.value

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "error_estimate": self.error_estimate,
            "method": self.method,
            "nodes": self.nodes,
            "abs_integral": self.abs_integral,
            "seed": self.seed,
        }


def _simpson_weights(n: int, lo: float, hi: float) -> np.ndarray:
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (hi - lo) / (n - 1) / 3.0


def _weak_integrand(u: ScalarField, spec: ProblemSpec, zeta: Bump, x: np.ndarray) -> np.ndarray:
    geometry = spec.geometry
    out = np.zeros(x.shape[0])
    z = zeta.value(x)
    active = z > 0
    if not np.any(active):
        return out
    xa = x[active]
    grad_u, grad_z = u.grad(xa), zeta.grad(xa)
    if geometry.is_euclidean:
        gu, gz = grad_u, grad_z
    else:
        gu = horizontal_from_euclidean(grad_u, xa, geometry.m)
        gz = horizontal_from_euclidean(grad_z, xa, geometry.m)
    s = np.linalg.norm(gu, axis=-1)
    kernel = np.zeros_like(s)
    moving = s > 0
    if np.any(moving):
        kernel[moving] = np.asarray(spec.phi.value(s[moving])) / s[moving]
    values = np.asarray(u.value(xa))
    if spec.is_difference:
        rhs = np.asarray(spec.f.value(values)) - np.asarray(spec.h.value(values)) * np.asarray(spec.g.value(s))
    else:
        rhs = np.asarray(spec.f.value(values)) * np.asarray(spec.l.value(s))
    out[active] = -kernel * np.sum(gu * gz, axis=-1) - rhs * z[active]
    return out


def weak_residual(
    u: Candidate,
    spec: ProblemSpec,
    zeta: Bump,
    box: Box,
    quad_n: int = 33,
    seed: Optional[int] = None,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> WeakResidual:
    """Weak-form residual of u against the bump ζ.

    Three coordinates use tensor Simpson on quad_n nodes per axis (rounded up
    to 1 mod 4 so the every-other-node grid is a Simpson grid too); more
    coordinates use Monte Carlo with quad_n³ samples and a standard error.

    Raises:
        ValueError: supp ζ not inside the box, or too many Simpson nodes
        WeakQuadratureError: fine and coarse Simpson disagree by more than 5%
    """
    field_u = as_field(u, spec)
    dim = spec.geometry.dim
    if len(zeta.center) != dim or len(box.lo) != dim or len(box.hi) != dim:
        raise ValueError(f"bump and box must live in {dim} coordinates")
    if not box.contains_ball(zeta.center, zeta.radius):
        raise ValueError("the support of ζ must lie inside the box")
    seed = settings.seed if seed is None else seed

    if dim <= 3:
        n = quad_n + (1 - quad_n) % 4
        if n > MAX_SIMPSON_NODES:
            raise ValueError(f"at most {MAX_SIMPSON_NODES} Simpson nodes per axis, got {quad_n}")
        axes = [np.linspace(lo, hi, n) for lo, hi in zip(box.lo, box.hi)]
        weights = [_simpson_weights(n, lo, hi) for lo, hi in zip(box.lo, box.hi)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
        w_fine = np.ones([n] * dim)
        w_coarse = np.ones([(n + 1) // 2] * dim)
        for k in range(dim):
            shape = [1] * dim
            shape[k] = n
            w_fine = w_fine * weights[k].reshape(shape)
            shape[k] = (n + 1) // 2
            w_coarse = w_coarse * _simpson_weights((n + 1) // 2, box.lo[k], box.hi[k]).reshape(shape)
        vals = _weak_integrand(field_u, spec, zeta, mesh).reshape([n] * dim)
        fine = float(np.sum(w_fine * vals))
        coarse = float(np.sum(w_coarse * vals[tuple(slice(None, None, 2) for _ in range(dim))]))
        total = float(np.sum(w_fine * np.abs(vals)))
        error = abs(fine - coarse)
        if error > WEAK_DISAGREEMENT * max(total, 1e-300):
            raise WeakQuadratureError(
                f"Simpson grids disagree by {error:.3e} against ∫|integrand| = {total:.3e}; raise quad_n"
            )
        return WeakResidual(fine, error, "simpson", int(n**dim), total, None)

    rng = np.random.default_rng(seed)
    count = quad_n**3
    lo, hi = np.asarray(box.lo), np.asarray(box.hi)
    x = lo + (hi - lo) * rng.random((count, dim))
    vals = _weak_integrand(field_u, spec, zeta, x)
    volume = box.volume
    value = volume * float(np.mean(vals))
    error = volume * float(np.std(vals)) / math.sqrt(count)
    return WeakResidual(value, error, "monte_carlo", count, volume * float(np.mean(np.abs(vals))), seed)


# -------------------------------------------------------------- geometry


@dataclass
class SuiteResult:
    name: str
    passed: bool
    max_error: float
    tolerance: float
    trials: int
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "passed": self.passed,
            "max_error": self.max_error,
            "tolerance": self.tolerance,
            "trials": self.trials,
        }
        out.update(self.extra)
        return out


@dataclass
class GeometryReport:
    m: int
    seed: int
    n_trials: int
    suites: Dict[str, SuiteResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites.values())

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "seed": self.seed,
            "n_trials": self.n_trials,
            "passed": self.passed,
            "suites": {name: s.to_dict() for name, s in self.suites.items()},
        }


_TEST_PROFILE = Profile("t^3 + t", "alpha")
_TEST_PHI = Profile("t^2", "phi")


def _random_point(rng: np.random.Generator, m: int, min_psi: float = 0.05) -> Point:
    while True:
        x = rng.standard_normal(2 * m + 1)
        q = Point.from_coords(x)
        if koranyi(q).psi >= min_psi:
            return q


def _commutator_suite(m: int, n_trials: int, rng: np.random.Generator) -> SuiteResult:
    n = 2 * m + 1
    per_poly = 20
    worst = 0.0
    done = 0
    while done < n_trials:
        poly = PolynomialField.random(n, 3, rng).as_field()
        count = min(per_poly, n_trials - done)
        x = rng.uniform(-1.0, 1.0, size=(count, n))
        hh = horizontal_hessian(poly, x, m)
        u_t = poly.grad(x)[:, -1]
        expected = np.zeros_like(hh)
        idx = np.arange(m)
        expected[:, idx, m + idx] = -4.0 * u_t[:, None]
        expected[:, m + idx, idx] = 4.0 * u_t[:, None]
        commutator = hh - np.swapaxes(hh, -1, -2)
        scale = np.maximum(1.0, np.max(np.abs(hh), axis=(-1, -2)))
        worst = max(worst, float(np.max(np.max(np.abs(commutator - expected), axis=(-1, -2)) / scale)))
        done += count
    return SuiteResult("commutators", worst <= 1e-12, worst, 1e-12, n_trials)


def _gauge_suite(m: int, n_trials: int, rng: np.random.Generator) -> SuiteResult:
    r = koranyi_field(m)
    worst = 0.0
    for _ in range(n_trials):
        q = _random_point(rng, m)
        gauge = koranyi(q)
        coords = q.coords
        g = horizontal_from_euclidean(r.grad(coords), coords, m)
        worst = max(worst, abs(float(g @ g) - gauge.psi) / gauge.psi)
        lap = float(np.trace(horizontal_hessian(r, coords, m)))
        expected = (2 * m + 1) * gauge.psi / gauge.r
        worst = max(worst, abs(lap - expected) / abs(expected))
    return SuiteResult("gauge_identities", worst <= 1e-6, worst, 1e-6, n_trials)


def _cauchy_schwarz_suite(m: int, n_trials: int, rng: np.random.Generator) -> SuiteResult:
    n = 2 * m + 1
    u = PolynomialField.random(n, 3, rng).as_field()
    v = PolynomialField.random(n, 3, rng).as_field()
    worst_excess = 0.0
    worst_b = 0.0
    for _ in range(n_trials):
        q = Point.from_coords(rng.standard_normal(n))
        coords = q.coords
        gu_e, gv_e = u.grad(coords), v.grad(coords)
        gu = horizontal_from_euclidean(gu_e, coords, m)
        gv = horizontal_from_euclidean(gv_e, coords, m)
        dot = float(gu @ gv)
        bound = float(np.linalg.norm(gu) * np.linalg.norm(gv))
        worst_excess = max(worst_excess, (abs(dot) - bound) / max(bound, 1e-300))
        via_b = float(gu_e @ matrix_b(q) @ gv_e)
        worst_b = max(worst_b, abs(via_b - dot) / max(abs(dot), bound, 1.0))
    worst = max(worst_excess, worst_b)
    return SuiteResult(
        "cauchy_schwarz", worst <= 1e-12, worst, 1e-12, n_trials, {"matrix_b_error": worst_b}
    )


def _left_invariance_suite(m: int, n_trials: int, rng: np.random.Generator) -> SuiteResult:
    base = radial_field(_TEST_PROFILE, koranyi_field(m))
    worst = 0.0
    for _ in range(n_trials):
        q0 = Point.from_coords(rng.standard_normal(2 * m + 1))
        while True:
            q = Point.from_coords(rng.standard_normal(2 * m + 1))
            moved = group_op(q0, q, GroupMode.INVERSE_OF_FIRST_THEN_MULTIPLY)
            if koranyi(moved).psi >= 0.05:
                break
        lhs = phi_laplacian_analytic(translated_field(base, q0), q, _TEST_PHI)
        rhs = radial_phi_laplacian(_TEST_PROFILE, moved, _TEST_PHI, RadialKind.GAUGE)
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1.0))
    return SuiteResult("left_invariance", worst <= 1e-8, worst, 1e-8, n_trials)


def _radialization_suite(m: int, n_trials: int, rng: np.random.Generator, step: float) -> SuiteResult:
    u = radial_field(_TEST_PROFILE, koranyi_field(m))
    trials = max(5, min(n_trials, 20))
    worst = 0.0
    orders = []
    for _ in range(trials):
        q = _random_point(rng, m, min_psi=0.1)
        closed = radial_phi_laplacian(_TEST_PROFILE, q, _TEST_PHI, RadialKind.GAUGE)
        fd = phi_laplacian_fd(u, q, _TEST_PHI, step)
        worst = max(worst, abs(fd - closed) / max(abs(closed), 1.0))
        coarse = abs(phi_laplacian_fd(u, q, _TEST_PHI, 1e-2) - closed)
        fine = abs(phi_laplacian_fd(u, q, _TEST_PHI, 5e-3) - closed)
        if coarse > 0 and fine > 0:
            orders.append(math.log2(coarse / fine))
    order = float(np.median(orders)) if orders else math.nan
    return SuiteResult(
        "radialization",
        worst <= 1e-3 and order >= 1.8,
        worst,
        1e-3,
        trials,
        {"convergence_order": order},
    )


def geometry_checks(
    m: int,
    n_trials: int = 200,
    seed: int = 0,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> GeometryReport:
    """Commutators, gauge identities, Cauchy–Schwarz, left invariance and radialization on H^m."""
    rng = np.random.default_rng(seed)
    report = GeometryReport(m, seed, n_trials)
    for suite in (
        _commutator_suite(m, n_trials, rng),
        _gauge_suite(m, n_trials, rng),
        _cauchy_schwarz_suite(m, n_trials, rng),
        _left_invariance_suite(m, n_trials, rng),
        _radialization_suite(m, n_trials, rng, settings.fd_step),
    ):
        report.suites[suite.name] = suite
        logger.info(f"H^{m} {suite.name}: passed={suite.passed}, max error {suite.max_error:.3e}")
    return report
