"""
Explicit radial barriers.

Supersolutions blow up at a finite radius T_σ (or reach a ceiling A),
subsolutions are glued from an inner Cauchy profile and an outer implicit
profile, and the annulus profile solves the radial φ-harmonic problem with
prescribed boundary values.
"""

import logging
import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import BarrierConstructionError, KoError, ProfileDomainError, WrongRhsKindError
from .heisenberg import RadialKind, radial_operator
from .profiles import ProblemSpec, Profile
from .settings import DEFAULT_SETTINGS, SolverSettings
from .transforms import (
    TransformKind,
    TransformTable,
    expand_bracket,
    get_engine,
    integrate,
)

logger = logging.getLogger(__name__)

SAMPLE_END_FRACTION = 1e-3


class BarrierKind(Enum):
    SUPERSOLUTION_KO = "SupersolutionKO"
    SUPERSOLUTION_BOUNDED = "SupersolutionBounded"
    SUPERSOLUTION_GRADIENT = "SupersolutionGradient"
    SUBSOLUTION_P = "SubsolutionP"
    ANNULUS_HARMONIC = "AnnulusHarmonic"


BLOW_UP_KINDS = (BarrierKind.SUPERSOLUTION_KO, BarrierKind.SUPERSOLUTION_GRADIENT)


def _as_array(t: Any) -> np.ndarray:
    return np.atleast_1d(np.asarray(t, dtype=float))


def _restore(t: Any, out: np.ndarray):
    return float(out[0]) if np.ndim(t) == 0 else out


def _on_finite(fn: Callable[..., np.ndarray], *arrays: np.ndarray) -> np.ndarray:
    """Apply fn where the first array is finite; +inf elsewhere."""
    out = np.full(arrays[0].shape, np.inf)
    ok = np.isfinite(arrays[0])
    if np.any(ok):
        out[ok] = fn(*(a[ok] for a in arrays))
    return out


# ------------------------------------------------------------ implicit profile


class ImplicitProfile:
    """α solving J(α(t)) = t − t0 with J(x) = ∫_eps^x g(s) ds."""

    def __init__(
        self,
        g: Callable[[np.ndarray], np.ndarray],
        eps: float,
        t0: float,
        first: Callable[[np.ndarray], np.ndarray],
        second: Callable[[np.ndarray, np.ndarray], np.ndarray],
        settings: SolverSettings = DEFAULT_SETTINGS,
        ceiling: Optional[float] = None,
        blow_up: bool = True,
        span_decades: float = 6.0,
    ):
        """Initialize the profile and its end point.

        Args:
            g: Vectorized positive integrand, g = 1/α′ expressed in α
            eps: Value at t0
            t0: Start of the domain
            first: α′ as a function of α
            second: α″ as a function of (α, α′)
            settings: Table density and tolerances
            ceiling: Finite final value A; the domain ends where α = A
            blow_up: Without a ceiling, whether ∫_eps^∞ g is finite
            span_decades: Initial table span above eps
        """
        self.eps = float(eps)
        self.t0 = float(t0)
        self.g = g
        self.first = first
        self.second = second
        self.ceiling = ceiling
        self.table = TransformTable(
            TransformKind.BARRIER, g, start=eps, settings=settings, span_decades=span_decades
        )
        if ceiling is not None:
            self.end = self.t0 + float(self.table.exact(ceiling))
        elif blow_up:
            last = float(self.table.nodes[-1])
            if self.table.exhausted:
                tail_value = self._extrapolated_tail(g, last, settings)
            else:
                tail = integrate(
                    lambda s: float(g(np.array([s]))[0]),
                    last,
                    math.inf,
                    tol=settings.abs_tol * 1e-3,
                    rel_tol=settings.rel_tol * 1e-2,
                    node_budget=settings.node_budget,
                )
                if not tail.converged:
                    raise BarrierConstructionError(
                        f"∫ ds/α′ diverges beyond {last:.3g}: no finite blow-up radius"
                    )
                tail_value = tail.value
            self.end = self.t0 + float(self.table.values[-1]) + tail_value
        else:
            self.end = math.inf
        self._memo = threading.local()

    @staticmethod
    def _extrapolated_tail(g: Callable[[np.ndarray], np.ndarray], last: float, settings: SolverSettings) -> float:
        """∫_last^∞ g extrapolated from the local power-law decay of g at its last table node.

        Only used when g cannot be evaluated past ``last``; the estimate must
        stay below abs_tol or the blow-up radius is not resolved.
        """
        prev = last * 10.0 ** (-1.0 / settings.nodes_per_decade)
        g_prev, g_last = (float(v) for v in g(np.array([prev, last])))
        if g_last <= 0.0:
            return 0.0
        beta = math.log(g_prev / g_last) / math.log(last / prev)
        if not beta > 1.0:
            raise BarrierConstructionError(
                f"∫ ds/α′ cannot be evaluated beyond {last:.3g} and g decays like s^-{beta:.3g} there"
            )
        estimate = g_last * last / (beta - 1.0)
        if estimate > settings.abs_tol:
            raise BarrierConstructionError(
                f"∫ ds/α′ cannot be evaluated beyond {last:.3g}; extrapolated tail {estimate:.3g} exceeds abs_tol"
            )
        logger.info(f"Blow-up tail beyond {last:.6g} extrapolated as {estimate:.3g} (decay exponent {beta:.3g})")
        return estimate

    def _alpha(self, t: np.ndarray) -> np.ndarray:
        memo = getattr(self._memo, "last", None)
        if memo is not None and np.array_equal(memo[0], t):
            return memo[1]
        if np.any(t < self.t0):
            raise ProfileDomainError(f"profile evaluated below its start t0={self.t0}")
        out = np.full(t.shape, np.inf if self.ceiling is None else np.nan)
        inside = t <= self.end if self.ceiling is not None else t < self.end
        if np.any(inside):
            out[inside] = self.table.inverse(t[inside] - self.t0)
        # value, derivative and second derivative usually arrive with the same t
        self._memo.last = (t.copy(), out)
        return out

    def value(self, t):
        return _restore(t, self._alpha(_as_array(t)))

    def derivative(self, t):
        a = self._alpha(_as_array(t))
        return _restore(t, _on_finite(self.first, a))

    def second_derivative(self, t):
        a = self._alpha(_as_array(t))
        a1 = _on_finite(self.first, a)
        return _restore(t, _on_finite(self.second, a, a1))


class AnnulusProfile:
    """z(t) = a + ∫_{R/2}^t φ⁻¹(c s^(−Q)) ds on [R/2, R]."""

    def __init__(
        self,
        phi: Profile,
        c: float,
        coefficient: int,
        a: float,
        radius: float,
        settings: SolverSettings = DEFAULT_SETTINGS,
    ):
        self.phi = phi
        self.c = c
        self.q = coefficient
        self.a = a
        self.radius = radius
        self.inner = radius / 2.0
        self.mono = phi.monomial
        self.table: Optional[TransformTable] = None
        if self.mono is None:
            self.table = TransformTable(
                TransformKind.BARRIER,
                self.derivative,
                start=self.inner,
                settings=settings,
                span_decades=math.log10(2.0),
            )

    def _check(self, t: np.ndarray) -> None:
        if np.any(t < self.inner * (1 - 1e-12)) or np.any(t > self.radius * (1 + 1e-12)):
            raise ProfileDomainError(f"annulus profile evaluated outside [{self.inner}, {self.radius}]")

    def value(self, t):
        t_arr = _as_array(t)
        self._check(t_arr)
        if self.mono is not None:
            out = self.a + _monomial_primitive(self.c, self.mono.c, self.mono.a, self.q, self.inner, t_arr)
        else:
            out = self.a + self.table.exact(np.maximum(t_arr, self.inner))
        return _restore(t, np.asarray(out, dtype=float))

    def derivative(self, t):
        t_arr = _as_array(t)
        return _restore(t, phi_inverse(self.phi, self.c * t_arr ** (-float(self.q))))

    def second_derivative(self, t):
        t_arr = _as_array(t)
        if self.mono is not None:
            kappa = (self.c / self.mono.c) ** (1.0 / self.mono.a)
            e = -self.q / self.mono.a
            return _restore(t, e * kappa * t_arr ** (e - 1.0))
        z1 = phi_inverse(self.phi, self.c * t_arr ** (-float(self.q)))
        return _restore(t, -self.q * self.c * t_arr ** (-self.q - 1.0) / np.asarray(self.phi.derivative(z1)))


def _monomial_primitive(c: float, c_phi: float, a_phi: float, q: int, lo: float, t: np.ndarray) -> np.ndarray:
    """∫_lo^t (c s^(−q)/c_phi)^(1/a_phi) ds."""
    kappa = (c / c_phi) ** (1.0 / a_phi)
    beta = 1.0 - q / a_phi
    if abs(beta) < 1e-14:
        return kappa * np.log(t / lo)
    return kappa * (t**beta - lo**beta) / beta


def phi_inverse(phi: Profile, y) -> np.ndarray:
    """φ⁻¹(y) for y >= 0; closed form for monomials, bracketed Brent otherwise."""
    y_arr = _as_array(y)
    mono = phi.monomial
    if mono is not None:
        return np.power(y_arr / mono.c, 1.0 / mono.a)
    out = np.empty_like(y_arr)
    for i, target in enumerate(y_arr):
        if target == 0.0:
            out[i] = 0.0
            continue
        lo, hi = expand_bracket(lambda s: float(phi.value(s)), target, 1.0)
        out[i] = brentq(lambda s: float(phi.value(s)) - target, lo, hi, rtol=1e-14)
    return out


# -------------------------------------------------------------------- barrier


@dataclass(eq=False)
class Barrier:
    """A radial profile α with its domain and construction parameters."""

    kind: BarrierKind
    profile: Any
    t0: float
    T_sigma: float
    coefficient: int
    sigma: Optional[float] = None
    eps: Optional[float] = None
    eta: Optional[float] = None
    t1: Optional[float] = None
    ceiling: Optional[float] = None
    rhs_scale: float = 1.0
    bracket: Optional[float] = None
    sigma_iterations: int = 0
    extras: Dict[str, Any] = field(default_factory=dict)

    def value(self, t):
        return self.profile.value(t)

    def derivative(self, t):
        return self.profile.derivative(t)

    def second_derivative(self, t):
        return self.profile.second_derivative(t)

    @property
    def blows_up(self) -> bool:
        return self.kind in BLOW_UP_KINDS

    @property
    def domain(self) -> tuple:
        return (self.t0, self.T_sigma)

    def interior_grid(self, n: int) -> np.ndarray:
        """n radii from t0; blow-up barriers stop 1e-3·(T_σ − t0) short of T_σ."""
        end = self.T_sigma
        if self.blows_up:
            end = self.T_sigma - SAMPLE_END_FRACTION * (self.T_sigma - self.t0)
        return np.linspace(self.t0, end, n)

    def sample(self, n: int) -> np.ndarray:
        """Rows (t, α, α′, α″) on the interior grid."""
        t = self.interior_grid(n)
        return np.column_stack([t, self.value(t), self.derivative(t), self.second_derivative(t)])

    def summary(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "kind": self.kind.value,
            "t0": self.t0,
            "T_sigma": self.T_sigma,
            "coefficient": self.coefficient,
            "sigma": self.sigma,
            "sigma_iterations": self.sigma_iterations,
        }
        for name in ("eps", "eta", "t1", "ceiling", "bracket"):
            if getattr(self, name) is not None:
                out[name] = getattr(self, name)
        if self.kind is not BarrierKind.ANNULUS_HARMONIC:
            out["rhs_scale"] = self.rhs_scale
        out.update(self.extras)
        return out

    to_dict = summary


# --------------------------------------------------------------- supersolutions


def _check_window(eps: float, eta: float, t0: float, t1: Optional[float]) -> None:
    if not 0 < eps < eta:
        raise ValueError(f"need 0 < eps < eta, got eps={eps}, eta={eta}")
    if not t0 > 0:
        raise ValueError(f"t0 must be positive, got {t0}")
    if t1 is not None and not t1 > t0:
        raise ValueError(f"need t0 < t1, got t0={t0}, t1={t1}")


def _ko_pieces(spec: ProblemSpec, sigma: float, settings: SolverSettings):
    engine = get_engine(spec, settings)
    f, l, phi = spec.f, spec.l, spec.phi

    def g(s):
        return 1.0 / np.asarray(engine.K_inv(sigma * np.asarray(engine.F(s))))

    def first(a):
        return np.asarray(engine.K_inv(sigma * np.asarray(engine.F(a))))

    def second(a, a1):
        return sigma * f.value(a) * l.value(a1) / phi.derivative(a1)

    return engine, g, first, second


def _reach(g: Callable, eps: float, eta: float, settings: SolverSettings) -> float:
    return integrate(
        lambda s: float(g(np.array([s]))[0]), eps, eta, tol=settings.abs_tol, rel_tol=settings.rel_tol
    ).require_converged("∫_eps^eta ds/α′")


def _select_sigma_ko(
    spec: ProblemSpec,
    eps: float,
    eta: float,
    t0: float,
    t1: Optional[float],
    btilde: float,
    settings: SolverSettings,
):
    coef = spec.geometry.radial_coefficient()
    f_eps = float(spec.f.value(eps))
    if f_eps <= 0:
        raise BarrierConstructionError(f"f(eps) = {f_eps} must be positive")
    sigma = 1.0
    for iteration in range(1, settings.super_sigma_budget + 1):
        engine, g, first, second = _ko_pieces(spec, sigma, settings)
        a1 = float(first(np.array([eps]))[0])
        bracket = coef / t0 * float(spec.phi.value(a1)) / (f_eps * float(spec.l.value(a1))) + (coef + 1) * sigma
        reach_ok = True
        if t1 is not None and bracket <= btilde:
            reach_ok = _reach(g, eps, eta, settings) > t1 - t0
        logger.debug(f"σ={sigma:.6g}: bracket={bracket:.6g} (≤ {btilde:.6g}?), reach_ok={reach_ok}")
        if bracket <= btilde and reach_ok:
            return sigma, bracket, iteration, g, first, second
        sigma /= 2.0
    raise BarrierConstructionError(
        f"σ-selection exhausted after {settings.super_sigma_budget} halvings (eps={eps}, eta={eta})"
    )


def build_supersolution(
    spec: ProblemSpec,
    eps: float,
    eta: float,
    t0: float,
    t1: float,
    btilde: float = 1.0,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> Barrier:
    """Blow-up supersolution with α(t0) = eps, α(t1) ≤ eta and α ↑ ∞ at T_σ.

    Args:
        spec: Problem satisfying (KO)
        eps: Value at t0
        eta: Upper bound for α on [t0, t1]
        t0: Inner radius
        t1: Radius up to which α stays below eta
        btilde: Scale of the right-hand side the radial inequality must meet
        settings: Budgets and tolerances

    Returns:
        Barrier of kind SupersolutionKO
    """
    _check_window(eps, eta, t0, t1)
    if not btilde > 0:
        raise ValueError(f"Btilde must be positive, got {btilde}")
    sigma, bracket, iterations, g, first, second = _select_sigma_ko(spec, eps, eta, t0, t1, btilde, settings)
    profile = ImplicitProfile(g, eps, t0, first, second, settings)
    logger.info(f"Supersolution: σ={sigma:.6g}, T_σ={profile.end:.6g} after {iterations} iteration(s)")
    return Barrier(
        BarrierKind.SUPERSOLUTION_KO,
        profile,
        t0,
        profile.end,
        spec.geometry.radial_coefficient(),
        sigma=sigma,
        eps=eps,
        eta=eta,
        t1=t1,
        rhs_scale=btilde,
        bracket=bracket,
        sigma_iterations=iterations,
    )


def default_btilde(spec: ProblemSpec) -> float:
    """1/(ΛD) when both constants are declared, else 1."""
    if spec.constants.has("Lambda", "D"):
        lam, d = spec.constants.require("Lambda", "D")
        return 1.0 / (lam * d)
    return 1.0


def build_supersolution_bounded(
    spec: ProblemSpec,
    eps: float,
    eta: float,
    t0: float,
    ceiling: float,
    t1: Optional[float] = None,
    btilde: Optional[float] = None,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> Barrier:
    """Supersolution climbing from eps to the finite ceiling A at T_σ."""
    _check_window(eps, eta, t0, t1)
    if not ceiling > eta:
        raise ValueError(f"need A > eta, got A={ceiling}, eta={eta}")
    btilde = default_btilde(spec) if btilde is None else btilde
    sigma, bracket, iterations, g, first, second = _select_sigma_ko(spec, eps, eta, t0, t1, btilde, settings)
    profile = ImplicitProfile(
        g,
        eps,
        t0,
        first,
        second,
        settings,
        ceiling=ceiling,
        span_decades=math.log10(ceiling / eps) + 0.1,
    )
    logger.info(f"Bounded supersolution: σ={sigma:.6g}, reaches A={ceiling} at T_σ={profile.end:.6g}")
    return Barrier(
        BarrierKind.SUPERSOLUTION_BOUNDED,
        profile,
        t0,
        profile.end,
        spec.geometry.radial_coefficient(),
        sigma=sigma,
        eps=eps,
        eta=eta,
        t1=t1,
        ceiling=ceiling,
        rhs_scale=btilde,
        bracket=bracket,
        sigma_iterations=iterations,
    )


def gradient_rhs(spec: ProblemSpec, rhs_scale: float, a: np.ndarray, a1: np.ndarray) -> np.ndarray:
    """(1/D) f(α) − h(α) α′² φ′(α′)."""
    return rhs_scale * np.asarray(spec.f.value(a)) - np.asarray(spec.h.value(a)) * a1**2 * np.asarray(
        spec.phi.derivative(np.abs(a1))
    )


def build_supersolution_gradient(
    spec: ProblemSpec,
    eps: float,
    eta: float,
    t0: float,
    t1: float,
    settings: SolverSettings = DEFAULT_SETTINGS,
    audit_points: int = 200,
) -> Barrier:
    """Blow-up supersolution for f(u) − h(u)g(|∇u|) built on F̂ and e^H."""
    if not spec.is_difference:
        raise WrongRhsKindError("the gradient supersolution needs the gradient-difference form")
    _check_window(eps, eta, t0, t1)
    d, theta, b = spec.constants.require("D", "theta", "B")
    engine = get_engine(spec, settings)
    f, h, phi = spec.f, spec.h, spec.phi
    coef = spec.geometry.radial_coefficient()
    f_eps = float(f.value(eps))
    rhs_scale = 1.0 / d

    sigma = 1.0
    for iteration in range(1, settings.super_sigma_budget + 1):

        def g(s, sigma=sigma):
            return np.asarray(engine.exp_H(s)) / np.asarray(engine.K_inv(sigma * np.asarray(engine.F_hat(s))))

        def first(a, sigma=sigma):
            return np.asarray(engine.K_inv(sigma * np.asarray(engine.F_hat(a)))) * np.exp(-np.asarray(engine.H(a)))

        def second(a, a1, sigma=sigma):
            big_h = np.asarray(engine.H(a))
            return sigma * f.value(a) * np.exp(-theta * big_h) / phi.derivative(a1 * np.exp(big_h)) - a1**2 * h.value(a)

        a1 = float(first(np.array([eps]))[0])
        bracket = (coef + 1) * sigma / b + coef / t0 * float(phi.value(a1)) / f_eps
        ok = bracket <= rhs_scale
        if ok:
            ok = _reach(g, eps, eta, settings) > t1 - t0
        if ok:
            profile = ImplicitProfile(g, eps, t0, first, second, settings)
            barrier = Barrier(
                BarrierKind.SUPERSOLUTION_GRADIENT,
                profile,
                t0,
                profile.end,
                coef,
                sigma=sigma,
                eps=eps,
                eta=eta,
                t1=t1,
                rhs_scale=rhs_scale,
                bracket=bracket,
                sigma_iterations=iteration,
                extras={"theta": theta, "B": b},
            )
            ok = _audit_gradient(barrier, spec, audit_points, settings)
            if ok:
                logger.info(f"Gradient supersolution: σ={sigma:.6g}, T_σ={profile.end:.6g}")
                return barrier
        logger.debug(f"σ={sigma:.6g}: bracket={bracket:.6g}, rejected")
        sigma /= 2.0
    raise BarrierConstructionError(
        f"σ-selection exhausted after {settings.super_sigma_budget} halvings for the gradient supersolution"
    )


def _audit_gradient(barrier: Barrier, spec: ProblemSpec, n: int, settings: SolverSettings) -> bool:
    t = barrier.interior_grid(n)
    a, a1 = barrier.value(t), barrier.derivative(t)
    lhs = radial_operator(barrier, t, spec.phi, barrier.coefficient)
    rhs = gradient_rhs(spec, barrier.rhs_scale, a, a1)
    scale = np.maximum(np.abs(lhs), np.abs(rhs))
    return bool(np.all(lhs - rhs <= settings.residual_slack * scale))


# ------------------------------------------------------------------ subsolution


@dataclass(eq=False)
class GluedSubsolution:
    """Profile of |z|: inner Cauchy solution on [0, t_σ], γ∘w beyond."""

    spec: ProblemSpec
    sigma: float
    eps: float
    t_sigma: float
    theta: float
    k: float
    s0: float
    w0: float
    outer: ImplicitProfile
    c_phi: float
    q: float
    sigma_iterations: int = 0

    @property
    def coefficient(self) -> int:
        return self.spec.geometry.radial_coefficient(RadialKind.STATIONARY)

    # inner: α(t) = (Θ/c)^q t^(q+1)/(q+1)

    def inner_value(self, t: np.ndarray) -> np.ndarray:
        return (self.theta / self.c_phi) ** self.q * t ** (self.q + 1.0) / (self.q + 1.0)

    def inner_derivative(self, t: np.ndarray) -> np.ndarray:
        return (self.theta * t / self.c_phi) ** self.q

    def inner_second(self, t: np.ndarray) -> np.ndarray:
        scale = self.q * (self.theta / self.c_phi) ** self.q
        out = scale * np.where(t > 0, t, 1.0) ** (self.q - 1.0)
        if self.q > 1.0:
            at_zero = 0.0
        elif self.q == 1.0:
            at_zero = scale
        else:
            at_zero = np.inf
        return np.where(t > 0, out, at_zero)

    # gluing map γ

    @property
    def alpha_at_junction(self) -> float:
        return float(self.inner_value(np.array([self.t_sigma]))[0])

    def gamma(self, x):
        x = np.asarray(x, dtype=float)
        decay = np.exp(-self.k * (x - self.w0))
        return self.alpha_at_junction + (x - self.w0) - (1.0 - self.s0) * (1.0 - decay) / self.k

    def gamma_prime(self, x):
        return 1.0 - (1.0 - self.s0) * np.exp(-self.k * (np.asarray(x, dtype=float) - self.w0))

    def gamma_second(self, x):
        return self.k * (1.0 - self.s0) * np.exp(-self.k * (np.asarray(x, dtype=float) - self.w0))

    # glued profile

    def _split(self, t):
        t_arr = _as_array(t)
        if np.any(t_arr < 0):
            raise ProfileDomainError("subsolution profile evaluated at a negative radius")
        return t_arr, t_arr <= self.t_sigma

    def value(self, t):
        t_arr, inner = self._split(t)
        out = np.empty_like(t_arr)
        out[inner] = self.inner_value(t_arr[inner])
        if np.any(~inner):
            out[~inner] = self.gamma(self.outer.value(t_arr[~inner]))
        return _restore(t, out)

    def derivative(self, t):
        t_arr, inner = self._split(t)
        out = np.empty_like(t_arr)
        out[inner] = self.inner_derivative(t_arr[inner])
        if np.any(~inner):
            s = t_arr[~inner]
            out[~inner] = self.gamma_prime(self.outer.value(s)) * self.outer.derivative(s)
        return _restore(t, out)

    def second_derivative(self, t):
        t_arr, inner = self._split(t)
        out = np.empty_like(t_arr)
        out[inner] = self.inner_second(t_arr[inner])
        if np.any(~inner):
            s = t_arr[~inner]
            w, w1, w2 = self.outer.value(s), self.outer.derivative(s), self.outer.second_derivative(s)
            out[~inner] = self.gamma_second(w) * w1**2 + self.gamma_prime(w) * w2
        return _restore(t, out)

    def junction_mismatch(self) -> Dict[str, float]:
        """|inner − outer| for value and first derivative at t_σ."""
        ts = np.array([self.t_sigma])
        w = self.outer.value(ts)
        outer_value = self.gamma(w)
        outer_slope = self.gamma_prime(w) * self.outer.derivative(ts)
        return {
            "value": float(abs(self.inner_value(ts)[0] - outer_value[0])),
            "derivative": float(abs(self.inner_derivative(ts)[0] - outer_slope[0])),
        }

    def sample(self, n: int, span: float = 4.0) -> np.ndarray:
        """Rows (t, U, U′, U″) on [0, span·t_σ]."""
        t = np.linspace(0.0, span * self.t_sigma, n)
        return np.column_stack([t, self.value(t), self.derivative(t), self.second_derivative(t)])

    def summary(self) -> Dict[str, Any]:
        return {
            "kind": BarrierKind.SUBSOLUTION_P.value,
            "sigma": self.sigma,
            "sigma_iterations": self.sigma_iterations,
            "eps": self.eps,
            "t_sigma": self.t_sigma,
            "Theta": self.theta,
            "gluing_rate": self.k,
            "s0": self.s0,
            "w0": self.w0,
            "alpha_at_junction": self.alpha_at_junction,
            "coefficient": self.coefficient,
            "junction_mismatch": self.junction_mismatch(),
        }

    to_dict = summary


def auto_eps(spec: ProblemSpec, settings: SolverSettings = DEFAULT_SETTINGS) -> float:
    """Smallest power of two with F(eps) > K(1), i.e. K⁻¹(F(eps)) > 1."""
    engine = get_engine(spec, settings)
    target = float(engine.K(1.0))
    eps = 2.0 ** math.ceil(math.log2(float(engine.f_table.inverse(target))))
    while float(engine.F(eps / 2.0)) > target:
        eps /= 2.0
    while not float(engine.F(eps)) > target:
        eps *= 2.0
    return eps


def build_subsolution_p(
    spec: ProblemSpec,
    eps: Optional[float] = None,
    settings: SolverSettings = DEFAULT_SETTINGS,
    gluing_rate: Optional[float] = None,
) -> GluedSubsolution:
    """Entire unbounded subsolution for φ = c·t^(p−1) when (KO) fails.

    Args:
        spec: Problem with a monomial φ
        eps: Outer start value; smallest power of two with K⁻¹(F(eps)) > 1 when omitted
        settings: Budgets, tolerances and the default gluing rate
        gluing_rate: Rate k of the exponential approach of γ′ to 1

    Returns:
        GluedSubsolution
    """
    mono = spec.phi.monomial
    if mono is None or mono.a <= 0:
        raise BarrierConstructionError(f"the subsolution needs φ = c·t^(p−1) with p > 1, got φ = {spec.phi.source}")
    engine = get_engine(spec, settings)
    c_phi, q = mono.c, 1.0 / mono.a
    p = mono.a + 1.0
    k = settings.gluing_rate if gluing_rate is None else gluing_rate
    if not k > 0:
        raise ValueError(f"gluing rate must be positive, got {k}")
    eps = auto_eps(spec, settings) if eps is None else float(eps)
    if not float(engine.K_inv(engine.F(eps))) > 1.0:
        raise BarrierConstructionError(f"eps={eps} does not satisfy K⁻¹(F(eps)) > 1")
    cl = 1.0
    if spec.constants.has("C"):
        cl *= spec.constants.C
    if spec.constants.has("Lambda"):
        cl *= spec.constants.Lambda
    f, l, phi = spec.f, spec.l, spec.phi

    sigma = 1.0
    for iteration in range(1, settings.sub_sigma_budget + 1):
        _, g, first, second = _ko_pieces(spec, sigma, settings)
        outer = ImplicitProfile(g, eps, 0.0, first, second, settings, blow_up=False, span_decades=1.0)
        t_sigma = float(outer.table.exact(2.0 * eps))
        theta = float(phi.value(1.0)) / t_sigma
        alpha_ts = (theta / c_phi) ** q * t_sigma ** (q + 1.0) / (q + 1.0)
        ts = np.linspace(0.0, t_sigma, 257)
        inner_a = (theta / c_phi) ** q * ts ** (q + 1.0) / (q + 1.0)
        inner_a1 = (theta * ts / c_phi) ** q
        cond_a = alpha_ts < eps
        cond_b = bool(np.all(f.value(inner_a) * l.value(inner_a1) <= theta * (1.0 + 1e-12)))
        w1_junction = float(first(np.array([2.0 * eps]))[0])
        cond_c = sigma / w1_junction ** (p - 1.0) >= cl
        logger.debug(f"σ={sigma:.6g}: t_σ={t_sigma:.6g}, (a)={cond_a}, (b)={cond_b}, (c)={cond_c}")
        if cond_a and cond_b and cond_c:
            w0 = float(outer.value(t_sigma))
            s0 = 1.0 / float(first(np.array([w0]))[0])
            logger.info(f"Subsolution: σ={sigma:.6g}, eps={eps}, t_σ={t_sigma:.6g}, s0={s0:.6g}")
            return GluedSubsolution(
                spec, sigma, eps, t_sigma, theta, k, s0, w0, outer, c_phi, q, sigma_iterations=iteration
            )
        sigma *= 2.0
    raise BarrierConstructionError(f"σ-selection exhausted after {settings.sub_sigma_budget} doublings")


# ---------------------------------------------------------------------- annulus


def build_annulus_profile(
    spec: ProblemSpec,
    radius: float,
    a: float,
    u_star: float,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> Barrier:
    """φ-harmonic radial profile on [R/2, R] with z(R/2) = a and z(R) = u*."""
    if not radius > 0:
        raise ValueError(f"R must be positive, got {radius}")
    if not a < u_star:
        raise ValueError(f"need a < u*, got a={a}, u*={u_star}")
    phi = spec.phi
    coef = spec.geometry.radial_coefficient()
    lo, hi = radius / 2.0, radius
    rise = u_star - a
    mono = phi.monomial
    if mono is not None:
        unit = float(_monomial_primitive(mono.c, mono.c, mono.a, coef, lo, np.array([hi]))[0])
        kappa = rise / unit
        c = mono.c * kappa**mono.a
    else:

        def reach(c):
            return integrate(
                lambda s: float(phi_inverse(phi, c * s ** (-float(coef)))[0]),
                lo,
                hi,
                tol=settings.abs_tol,
                rel_tol=settings.rel_tol * 1e-2,
            ).require_converged("annulus reach")

        try:
            c_lo, c_hi = expand_bracket(reach, rise, 1.0)
        except KoError as exc:
            raise BarrierConstructionError(f"annulus constant not bracketed: {exc}") from exc
        c = brentq(lambda v: reach(v) - rise, c_lo, c_hi, rtol=1e-14)
    profile = AnnulusProfile(phi, c, coef, a, radius, settings)
    logger.info(f"Annulus profile on [{lo:.6g}, {hi:.6g}]: c={c:.6g}")
    return Barrier(
        BarrierKind.ANNULUS_HARMONIC,
        profile,
        lo,
        hi,
        coef,
        rhs_scale=0.0,
        extras={"R": radius, "a": a, "u_star": u_star, "c": c},
    )
