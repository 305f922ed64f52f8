"""
Keller–Osserman decisions.

(KO):  1/K⁻¹(F(t)) ∈ L¹(+∞)
(K̂O):  e^{H(t)}/K⁻¹(F̂(t)) ∈ L¹(+∞)

Power-law profiles are decided by exponent arithmetic; anything else gets
a numeric tail probe whose verdict is only ever "likely" (tier NumericTail).
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from .errors import KoError, TableRangeError, WrongRhsKindError
from .profiles import ProblemSpec
from .settings import DEFAULT_SETTINGS, SolverSettings
from .transforms import (
    VALUE_CEILING,
    QuadratureResult,
    TransformEngine,
    fit_growth_exponent,
    get_engine,
    integrate,
)

logger = logging.getLogger(__name__)

_BORDERLINE = 1e-9


class KoCondition(Enum):
    KO = "KO"
    KOHAT = "KOhat"


class Verdict(Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    INCONCLUSIVE = "Inconclusive"


class Tier(Enum):
    EXACT_POWER_LAW = "ExactPowerLaw"
    NUMERIC_TAIL = "NumericTail"


@dataclass
class KoVerdict:
    """Verdict on a Keller–Osserman condition with its evidence."""

    condition: KoCondition
    verdict: Verdict
    tier: Tier
    evidence: Dict[str, Any] = field(default_factory=dict)
    sigma_used: float = 1.0
    reason: Optional[str] = None

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.HOLDS

    def to_dict(self) -> dict:
        return {
            "condition": self.condition.value,
            "verdict": self.verdict.value,
            "tier": self.tier.value,
            "evidence": self.evidence,
            "sigma_used": self.sigma_used,
            "reason": self.reason,
        }


@dataclass
class SigmaCheck:
    """lhs ≤ rhs comparison of two tail integrals."""

    sigma: float
    lhs: float
    rhs: float
    holds: bool
    t_lo: float
    truncated_at: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "holds": self.holds,
            "t_lo": self.t_lo,
            "truncated_at": self.truncated_at,
        }


# ----------------------------------------------------------------- tail probe


def tail_probe(
    integrand: Callable[[float], float], settings: SolverSettings = DEFAULT_SETTINGS, start: Optional[float] = None
) -> Dict[str, Any]:
    """Partial integrals over T = T0·2^k and local log-log slopes of their density.

    A density decaying like T^(-β) produces slopes near -β; the last
    ``stability_window`` slopes decide: all ≤ -1-δ → integrable, all
    ≥ -1+δ → not integrable, otherwise undecided. When a transform table
    overflows before the last doubling, the probe stops there and decides
    from the doublings it reached, provided they fill the window.
    """
    t0 = settings.tail_start if start is None else start
    ts = t0 * 2.0 ** np.arange(settings.tail_doublings + 1)
    increments: List[float] = []
    truncated_at = None
    for a, b in zip(ts[:-1], ts[1:]):
        try:
            result = integrate(integrand, float(a), float(b), tol=settings.abs_tol * 1e-3, rel_tol=settings.rel_tol)
        except TableRangeError as exc:
            if len(increments) < settings.stability_window + 1:
                raise
            logger.info(f"Tail probe stops at T={a:.6g}: {exc}")
            truncated_at = float(a)
            break
        increments.append(result.require_converged(f"tail increment on [{a:.4g}, {b:.4g}]"))
    ts = ts[: len(increments) + 1]
    inc = np.array(increments)
    density = inc / np.diff(ts)
    slopes = []
    for d0, d1 in zip(density[:-1], density[1:]):
        if d1 <= 0.0:
            slopes.append(-math.inf)
        elif d0 <= 0.0:
            slopes.append(math.inf)
        else:
            slopes.append(math.log(d1 / d0) / math.log(2.0))
    window = slopes[-settings.stability_window :]
    delta = settings.slope_tolerance
    if all(s <= -1.0 - delta for s in window):
        decision = Verdict.HOLDS
    elif all(s >= -1.0 + delta for s in window):
        decision = Verdict.FAILS
    else:
        decision = Verdict.INCONCLUSIVE
    return {
        "decision": decision,
        "T": ts.tolist(),
        "partial_integrals": np.cumsum(np.concatenate([[0.0], inc])).tolist(),
        "slopes": [s if math.isfinite(s) else ("-inf" if s < 0 else "inf") for s in slopes],
        "window": settings.stability_window,
        "slope_tolerance": delta,
        "truncated_at": truncated_at,
    }


def _numeric_verdict(condition: KoCondition, integrand: Callable[[float], float], settings: SolverSettings) -> KoVerdict:
    try:
        probe = tail_probe(integrand, settings)
    except (KoError, ArithmeticError) as exc:
        logger.warning(f"{condition.value} numeric tail failed: {exc}")
        return KoVerdict(condition, Verdict.INCONCLUSIVE, Tier.NUMERIC_TAIL, reason=f"transform failure: {exc}")
    decision = probe.pop("decision")
    reason = None if decision is not Verdict.INCONCLUSIVE else "tail slope not stable outside the δ-band around -1"
    return KoVerdict(condition, decision, Tier.NUMERIC_TAIL, probe, reason=reason)


def _exact_from_exponent(condition: KoCondition, beta: float, evidence: Dict[str, Any]) -> KoVerdict:
    evidence = dict(evidence, decay_exponent=beta)
    if abs(beta - 1.0) <= _BORDERLINE:
        return KoVerdict(
            condition, Verdict.INCONCLUSIVE, Tier.EXACT_POWER_LAW, evidence, reason="borderline: integrand ~ 1/t"
        )
    verdict = Verdict.HOLDS if beta > 1.0 else Verdict.FAILS
    return KoVerdict(condition, verdict, Tier.EXACT_POWER_LAW, evidence)


def _growth_exponents(spec: ProblemSpec) -> Optional[Dict[str, float]]:
    phi, l, f = spec.phi.asymptote, spec.l.asymptote, spec.f.asymptote
    if phi is None or l is None or f is None:
        return None
    return {"a_phi": phi.a, "a_l": l.a, "a_f": f.a, "k_exponent": phi.a + 1.0 - l.a}


# ---------------------------------------------------------------- decisions


def decide_ko(spec: ProblemSpec, settings: SolverSettings = DEFAULT_SETTINGS) -> KoVerdict:
    """Decide (KO) for the problem.

    Args:
        spec: Problem specification
        settings: Tail-probe parameters and tolerances

    Returns:
        KoVerdict; ExactPowerLaw tier whenever φ, l and f have power-law
        asymptotes at +∞
    """
    exps = _growth_exponents(spec)
    if exps is not None:
        k = exps["k_exponent"]
        if k <= 0 or exps["a_f"] + 1.0 <= 0:
            return KoVerdict(
                KoCondition.KO,
                Verdict.INCONCLUSIVE,
                Tier.EXACT_POWER_LAW,
                exps,
                reason="K or F stays bounded at +∞; the condition is not meaningful",
            )
        verdict = _exact_from_exponent(KoCondition.KO, (exps["a_f"] + 1.0) / k, exps)
        logger.info(f"KO decided by exponents: {verdict.verdict.value}")
        return verdict
    engine = get_engine(spec, settings)
    return _numeric_verdict(KoCondition.KO, lambda s: 1.0 / engine.K_inv(engine.F(s)), settings)


def h_integrability(spec: ProblemSpec, settings: SolverSettings = DEFAULT_SETTINGS) -> Dict[str, Any]:
    """Whether h ∈ L¹(+∞): by asymptote exponent when available, else numerically."""
    h = spec.h
    if h is None:
        raise WrongRhsKindError("h is defined only for the gradient-difference form")
    if h.is_zero:
        return {"verdict": Verdict.HOLDS, "tier": Tier.EXACT_POWER_LAW, "exponent": None}
    if h.asymptote is not None:
        a = h.asymptote.a
        if abs(a + 1.0) <= _BORDERLINE:
            verdict = Verdict.FAILS
        else:
            verdict = Verdict.HOLDS if a < -1.0 else Verdict.FAILS
        return {"verdict": verdict, "tier": Tier.EXACT_POWER_LAW, "exponent": a}
    try:
        probe = tail_probe(lambda s: float(h.value(s)), settings)
    except (KoError, ArithmeticError) as exc:
        return {"verdict": Verdict.INCONCLUSIVE, "tier": Tier.NUMERIC_TAIL, "reason": str(exc)}
    return {"verdict": probe["decision"], "tier": Tier.NUMERIC_TAIL, "slopes": probe["slopes"]}


def decide_ko_hat(spec: ProblemSpec, settings: SolverSettings = DEFAULT_SETTINGS) -> KoVerdict:
    """Decide (K̂O) for a gradient-difference problem."""
    if not spec.is_difference:
        raise WrongRhsKindError("KOhat applies to the gradient-difference form only")
    (theta,) = spec.constants.require("theta")
    h = spec.h
    if h.is_zero:
        base = decide_ko(spec, settings)
        base.condition = KoCondition.KOHAT
        base.evidence = dict(base.evidence, reduction="h ≡ 0: F̂ = F and e^H = 1")
        return base

    integrable = h_integrability(spec, settings)
    if integrable["verdict"] is Verdict.HOLDS:
        base = decide_ko(spec, settings)
        logger.info("h ∈ L¹(+∞): KOhat is equivalent to KO")
        # a numeric step anywhere makes the whole decision numeric
        tier = Tier.NUMERIC_TAIL if Tier.NUMERIC_TAIL in (base.tier, integrable["tier"]) else base.tier
        return KoVerdict(
            KoCondition.KOHAT,
            base.verdict,
            tier,
            {
                "deferred_to": "KO",
                "h_integrable_tier": integrable["tier"].value,
                "ko_evidence": base.evidence,
            },
            reason=base.reason,
        )

    exps = _growth_exponents(spec)
    if exps is not None and h.asymptote is not None and abs(h.asymptote.a + 1.0) <= _BORDERLINE:
        # e^H grows like t^c, so the integrand is still a power law
        c = h.asymptote.c
        k = exps["k_exponent"]
        if k > 0:
            beta = (exps["a_f"] + 1.0 + (2.0 - theta) * c) / k - c
            return _exact_from_exponent(KoCondition.KOHAT, beta, dict(exps, h_log_rate=c, theta=theta))

    engine = get_engine(spec, settings)
    return _numeric_verdict(
        KoCondition.KOHAT,
        lambda s: float(engine.exp_H(s)) / engine.K_inv(engine.F_hat(s)),
        settings,
    )


# -------------------------------------------------------------- sigma checks


def _tail(integrand: Callable[[float], float], t_lo: float, t_hi: float, settings: SolverSettings) -> QuadratureResult:
    return integrate(integrand, t_lo, t_hi, tol=settings.abs_tol, rel_tol=settings.rel_tol)


def _evaluates(integrand: Callable[[float], float], s: float) -> bool:
    try:
        integrand(s)
    except TableRangeError:
        return False
    return True


def _reach(integrand: Callable[[float], float], t_lo: float) -> float:
    """Largest abscissa, to bisection accuracy, where the integrand still evaluates."""
    lo, hi = t_lo, 2.0 * t_lo
    while hi < VALUE_CEILING and _evaluates(integrand, hi):
        lo, hi = hi, 2.0 * hi
    for _ in range(60):
        mid = math.sqrt(lo * hi)
        lo, hi = (mid, hi) if _evaluates(integrand, mid) else (lo, mid)
    return lo


def _tail_pair(
    scaled: Callable[[float], float], plain: Callable[[float], float], t_lo: float, settings: SolverSettings
) -> Tuple[QuadratureResult, QuadratureResult, Optional[float]]:
    """Both tails over [t_lo, ∞), or over [t_lo, T] when the transform tables stop at T.

    The cut is accepted only when T times either integrand at T stays below abs_tol.
    """
    try:
        return _tail(scaled, t_lo, math.inf, settings), _tail(plain, t_lo, math.inf, settings), None
    except TableRangeError as exc:
        upper = min(_reach(scaled, t_lo), _reach(plain, t_lo))
        neglected = upper * max(float(scaled(upper)), float(plain(upper)))
        if neglected > settings.abs_tol:
            raise
        logger.info(f"Tails cut at T={upper:.6g}, neglecting about {neglected:.3g}: {exc}")
        return _tail(scaled, t_lo, upper, settings), _tail(plain, t_lo, upper, settings), upper


def sigma_scaling_check(
    spec: ProblemSpec, sigma: float, t_lo: float = 1.0, settings: SolverSettings = DEFAULT_SETTINGS
) -> SigmaCheck:
    """∫ ds/K⁻¹(σF(s)) ≤ σ⁻¹ ∫ ds/K⁻¹(F(s)) over [t_lo, ∞)."""
    if not 0 < sigma <= 1:
        raise ValueError(f"sigma must lie in (0, 1], got {sigma}")
    engine = get_engine(spec, settings)
    scaled, plain, cut = _tail_pair(
        lambda s: 1.0 / engine.K_inv(sigma * engine.F(s)),
        lambda s: 1.0 / engine.K_inv(engine.F(s)),
        t_lo,
        settings,
    )
    lhs = scaled.require_converged("σ-scaled KO tail")
    rhs = plain.require_converged("KO tail") / sigma
    slack = scaled.abs_error_estimate + plain.abs_error_estimate / sigma
    return SigmaCheck(sigma, lhs, rhs, lhs <= rhs + slack, t_lo, cut)


def ko_hat_sigma_bound(
    spec: ProblemSpec, sigma: float, t_lo: float = 1.0, settings: SolverSettings = DEFAULT_SETTINGS
) -> SigmaCheck:
    """∫ e^H/K⁻¹(σF̂) ≤ (Bσ)^(−1/(2−θ)) ∫ e^H/K⁻¹(F̂) over [t_lo, ∞)."""
    if not spec.is_difference:
        raise WrongRhsKindError("the F̂ bound applies to the gradient-difference form only")
    theta, b = spec.constants.require("theta", "B")
    if not 0 < sigma <= 1:
        raise ValueError(f"sigma must lie in (0, 1], got {sigma}")
    engine = get_engine(spec, settings)
    scaled, plain, cut = _tail_pair(
        lambda s: float(engine.exp_H(s)) / engine.K_inv(sigma * engine.F_hat(s)),
        lambda s: float(engine.exp_H(s)) / engine.K_inv(engine.F_hat(s)),
        t_lo,
        settings,
    )
    factor = (b * sigma) ** (-1.0 / (2.0 - theta))
    lhs = scaled.require_converged("σ-scaled KOhat tail")
    rhs = factor * plain.require_converged("KOhat tail")
    slack = scaled.abs_error_estimate + factor * plain.abs_error_estimate + 1e-12 * abs(rhs)
    return SigmaCheck(sigma, lhs, rhs, lhs <= rhs + slack, t_lo, cut)


def tail_exponent(
    spec: ProblemSpec, lo: float = 1e3, hi: float = 1e6, settings: SolverSettings = DEFAULT_SETTINGS
) -> float:
    """Fitted growth exponent of K on [lo, hi]."""
    engine: TransformEngine = get_engine(spec, settings)
    return fit_growth_exponent(engine.K, lo, hi)
