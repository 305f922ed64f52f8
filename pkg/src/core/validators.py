"""
Structural hypothesis checks.

Each hypothesis is sampled on log-spaced grids; when the profiles have
power-law normal forms the verdict is confirmed (or refuted, with an
analytic witness) by exponent arithmetic. A Pass therefore means "no
violation on the audit grid", upgraded to tier ExactPowerLaw when the
exponents agree.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import KoError, MissingConstantError, ProfileDomainError, WrongRhsKindError
from .ko_decision import Verdict, h_integrability, tail_probe
from .profiles import End, ProblemSpec, Profile
from .settings import DEFAULT_SETTINGS, SolverSettings
from .transforms import get_engine

logger = logging.getLogger(__name__)

_REL = 1e-12

BASE_HYPOTHESES = ("Phi", "F", "L", "Phi&L")
HOMOGENEITY_HYPOTHESES = ("Phi2", "Phi2_integrated", "L2", "L2_p", "Phi3", "Phi3_integrated", "kappa")
GRADIENT_HYPOTHESES = ("H", "H_L1_infinity", "Phi0", "G", "Gtilde", "p&L")


class Status(Enum):
    PASS = "Pass"
    FAIL = "Fail"
    INCONCLUSIVE = "Inconclusive"


class CheckTier(Enum):
    EXACT_POWER_LAW = "ExactPowerLaw"
    GRID = "Grid"
    NUMERIC_TAIL = "NumericTail"


@dataclass
class HypothesisVerdict:
    """Outcome for one hypothesis."""

    name: str
    status: Status
    tier: CheckTier
    witness: Optional[Dict[str, float]] = None
    reason: Optional[str] = None
    margin: Optional[float] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.status is Status.FAIL and not self.witness:
            raise ValueError(f"{self.name}: a failing verdict needs a witness")

    def to_dict(self) -> dict:
        out: Dict[str, Any] = {"status": self.status.value, "tier": self.tier.value}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.reason is not None:
            out["reason"] = self.reason
        if self.margin is not None:
            out["margin"] = self.margin
        if self.details:
            out["details"] = self.details
        return out


@dataclass
class StructuralReport:
    """Per-hypothesis verdicts plus the grids they were sampled on."""

    verdicts: Dict[str, HypothesisVerdict] = field(default_factory=dict)
    grids: Dict[str, List[float]] = field(default_factory=dict)

    def add(self, verdict: HypothesisVerdict) -> None:
        self.verdicts[verdict.name] = verdict

    def __getitem__(self, name: str) -> HypothesisVerdict:
        return self.verdicts[name]

    def __contains__(self, name: str) -> bool:
        return name in self.verdicts

    def merge(self, other: "StructuralReport") -> "StructuralReport":
        self.verdicts.update(other.verdicts)
        self.grids.update(other.grids)
        return self

    def names_with(self, status: Status) -> List[str]:
        return [n for n, v in self.verdicts.items() if v.status is status]

    @property
    def passed(self) -> bool:
        return all(v.status is Status.PASS for v in self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "hypotheses": {name: v.to_dict() for name, v in sorted(self.verdicts.items())},
            "grids": self.grids,
        }


# --------------------------------------------------------------------- grids


def t_grid(settings: SolverSettings = DEFAULT_SETTINGS) -> np.ndarray:
    return np.logspace(math.log10(settings.grid_min), math.log10(settings.grid_max), settings.grid_n)


def unit_grid(settings: SolverSettings = DEFAULT_SETTINGS) -> np.ndarray:
    """s in (0, 1]; s = 0 is covered by the limit s·φ′(st) → 0."""
    return np.logspace(math.log10(settings.grid_min), 0.0, settings.grid_n)


def dilation_grid(settings: SolverSettings = DEFAULT_SETTINGS) -> np.ndarray:
    """s in [1, grid_max]."""
    return np.logspace(0.0, math.log10(settings.grid_max), settings.grid_n)


def _guarded(name: str, check: Callable[[], HypothesisVerdict]) -> HypothesisVerdict:
    try:
        return check()
    except (KoError, ArithmeticError) as exc:
        logger.warning(f"{name}: evaluation failed ({exc})")
        return HypothesisVerdict(name, Status.INCONCLUSIVE, CheckTier.GRID, reason=f"evaluation failed: {exc}")


ExactOutcome = Optional[Tuple[bool, Optional[Dict[str, float]]]]


def _two_parameter(
    name: str,
    lhs: Callable[[np.ndarray, np.ndarray], np.ndarray],
    rhs: Callable[[np.ndarray, np.ndarray], np.ndarray],
    s: np.ndarray,
    t: np.ndarray,
    exact: ExactOutcome = None,
    s_label: str = "s",
    rel: float = _REL,
) -> HypothesisVerdict:
    """lhs(s, t) <= rhs(s, t) over the grid, refined by an exact outcome when available."""
    S, T = np.meshgrid(s, t, indexing="ij")
    left = np.asarray(lhs(S, T), dtype=float)
    right = np.asarray(rhs(S, T), dtype=float)
    scale = np.maximum(np.maximum(np.abs(left), np.abs(right)), 1e-300)
    gap = (right - left) / scale
    violated = left > right + rel * scale
    margin = float(np.min(gap))
    if np.any(violated):
        i, j = np.unravel_index(np.argmin(np.where(violated, gap, np.inf)), gap.shape)
        witness = {s_label: float(S[i, j]), "t": float(T[i, j]), "lhs": float(left[i, j]), "rhs": float(right[i, j])}
        return HypothesisVerdict(name, Status.FAIL, CheckTier.GRID, witness=witness, margin=margin)
    if exact is None:
        return HypothesisVerdict(name, Status.PASS, CheckTier.GRID, margin=margin)
    holds, witness = exact
    if holds:
        return HypothesisVerdict(name, Status.PASS, CheckTier.EXACT_POWER_LAW, margin=margin)
    if witness is not None:
        ws, wt = np.array([witness[s_label]]), np.array([witness["t"]])
        lw, rw = float(lhs(ws, wt)[0]), float(rhs(ws, wt)[0])
        if lw > rw + rel * max(abs(lw), abs(rw)):
            witness = dict(witness, lhs=lw, rhs=rw)
            return HypothesisVerdict(name, Status.FAIL, CheckTier.EXACT_POWER_LAW, witness=witness, margin=margin)
    return HypothesisVerdict(
        name,
        Status.INCONCLUSIVE,
        CheckTier.EXACT_POWER_LAW,
        reason="exponent arithmetic predicts a violation outside the audit grid",
        margin=margin,
    )


def _bounded_power(e: float, const: float, s_label: str = "s") -> Tuple[bool, Optional[Dict[str, float]]]:
    """Whether s^e <= const for every s in (0, 1], with a witness when not."""
    if e >= 0 and const >= 1:
        return True, None
    if const < 1:
        return False, {s_label: 1.0, "t": 1.0}
    return False, {s_label: float((2.0 * const) ** (1.0 / e)), "t": 1.0}


def _dominating_power(e: float, const: float, s_label: str = "s") -> Tuple[bool, Optional[Dict[str, float]]]:
    """Whether s^e >= const for every s >= 1, with a witness when not."""
    if e >= 0 and const <= 1:
        return True, None
    if const > 1:
        return False, {s_label: 1.0, "t": 1.0}
    return False, {s_label: float((0.5 * const) ** (1.0 / e)), "t": 1.0}


def _nonnegative_terms(profile: Profile) -> Optional[Dict[float, float]]:
    terms = profile.terms
    if terms is None or any(c < 0 for c in terms.values()):
        return None
    return terms


# ------------------------------------------------------- integrability helpers


def _integrability(fn: Callable[[float], float], at_zero: bool, settings: SolverSettings) -> Verdict:
    """Tail-probe decision of fn ∈ L¹ near 0⁺ (via s = 1/u) or near +∞."""
    if at_zero:
        probe = tail_probe(lambda u: fn(1.0 / u) / (u * u), settings)
    else:
        probe = tail_probe(fn, settings)
    return probe["decision"]


def _power_integrable(exponent: float, at_zero: bool) -> bool:
    return exponent > -1.0 if at_zero else exponent < -1.0


# -------------------------------------------------------------------- base


def _check_phi(spec: ProblemSpec, settings: SolverSettings) -> HypothesisVerdict:
    phi = spec.phi
    try:
        at_zero = float(phi.value(0.0))
    except ProfileDomainError:
        return HypothesisVerdict("Phi", Status.FAIL, CheckTier.GRID, witness={"t": 0.0}, reason="φ undefined at 0")
    if abs(at_zero) > 1e-14:
        return HypothesisVerdict("Phi", Status.FAIL, CheckTier.GRID, witness={"t": 0.0, "phi": at_zero})
    t = t_grid(settings)
    d = np.asarray(phi.derivative(t))
    bad = np.flatnonzero(d <= 0)
    if bad.size:
        i = int(bad[0])
        return HypothesisVerdict("Phi", Status.FAIL, CheckTier.GRID, witness={"t": float(t[i]), "phi_prime": float(d[i])})
    terms = _nonnegative_terms(phi)
    exact = terms is not None and terms and all(a > 0 for a in terms)
    tier = CheckTier.EXACT_POWER_LAW if exact else CheckTier.GRID
    return HypothesisVerdict("Phi", Status.PASS, tier, margin=float(np.min(d)))


def _check_f(spec: ProblemSpec, settings: SolverSettings) -> HypothesisVerdict:
    f = spec.f
    t = t_grid(settings)
    v = np.asarray(f.value(t))
    nonpos = np.flatnonzero(v <= 0)
    if nonpos.size:
        i = int(nonpos[0])
        return HypothesisVerdict("F", Status.FAIL, CheckTier.GRID, witness={"t": float(t[i]), "f": float(v[i])})
    steps = np.diff(v)
    flat = np.flatnonzero(steps <= 0)
    if flat.size:
        i = int(flat[0])
        return HypothesisVerdict(
            "F",
            Status.FAIL,
            CheckTier.GRID,
            witness={"t": float(t[i]), "t_next": float(t[i + 1]), "f": float(v[i]), "f_next": float(v[i + 1])},
            reason="f is not increasing",
        )
    terms = _nonnegative_terms(f)
    exact = terms is not None and any(a > 0 for a in terms) and all(a >= 0 for a in terms)
    return HypothesisVerdict("F", Status.PASS, CheckTier.EXACT_POWER_LAW if exact else CheckTier.GRID)


def _check_l(spec: ProblemSpec, settings: SolverSettings) -> HypothesisVerdict:
    l = spec.l
    t = t_grid(settings)
    v = np.asarray(l.value(t))
    nonpos = np.flatnonzero(v <= 0)
    if nonpos.size:
        i = int(nonpos[0])
        return HypothesisVerdict("L", Status.FAIL, CheckTier.GRID, witness={"t": float(t[i]), "l": float(v[i])})
    try:
        head = [float(l.value(0.0))]
    except ProfileDomainError:
        head = []
    running = np.maximum.accumulate(np.concatenate([head, v]))[len(head) :]
    needed = running / v
    c_estimate = float(np.max(needed))
    details = {"C_estimate": c_estimate}
    if spec.constants.C is None:
        terms = _nonnegative_terms(l)
        monotone = terms is not None and all(a >= 0 for a in terms)
        tier = CheckTier.EXACT_POWER_LAW if monotone else CheckTier.GRID
        return HypothesisVerdict("L", Status.PASS, tier, details=details, reason="C not declared; estimated")
    c = spec.constants.C
    over = np.flatnonzero(needed > c * (1 + _REL))
    if over.size:
        i = int(over[0])
        return HypothesisVerdict(
            "L",
            Status.FAIL,
            CheckTier.GRID,
            witness={"t": float(t[i]), "sup_l": float(running[i]), "C_l": float(c * v[i])},
            details=details,
        )
    terms = _nonnegative_terms(l)
    monotone = terms is not None and all(a >= 0 for a in terms)
    tier = CheckTier.EXACT_POWER_LAW if monotone else CheckTier.GRID
    return HypothesisVerdict("L", Status.PASS, tier, margin=float(c - c_estimate), details=details)


def _check_phi_and_l(spec: ProblemSpec, settings: SolverSettings) -> HypothesisVerdict:
    phi, l = spec.phi, spec.l
    parts: Dict[str, str] = {}
    exact = True

    def kernel(s: float) -> float:
        return float(s * phi.derivative(s) / l.value(s))

    # tφ′/l ∈ L¹(0⁺)
    d0, l0 = phi.derivative_asymptote(End.AT_ZERO), l.zero_limit
    if d0 is not None and l0 is not None:
        zero_ok = _power_integrable(d0.a + 1.0 - l0.a, at_zero=True)
        zero_status = Verdict.HOLDS if zero_ok else Verdict.FAILS
    else:
        exact = False
        zero_status = _integrability(kernel, True, settings)
    parts["integrable_at_0"] = zero_status.value
    if zero_status is Verdict.FAILS:
        return HypothesisVerdict(
            "Phi&L",
            Status.FAIL,
            CheckTier.EXACT_POWER_LAW if exact else CheckTier.NUMERIC_TAIL,
            witness={"t": settings.grid_min, "kernel": kernel(settings.grid_min)},
            reason="tφ′/l is not integrable at 0⁺",
            details=parts,
        )

    # tφ′/l ∉ L¹(+∞)
    dinf, linf = phi.derivative_asymptote(End.AT_INFINITY), l.asymptote
    if dinf is not None and linf is not None:
        inf_integrable = _power_integrable(dinf.a + 1.0 - linf.a, at_zero=False)
        inf_status = Verdict.HOLDS if inf_integrable else Verdict.FAILS
    else:
        exact = False
        inf_status = _integrability(kernel, False, settings)
    parts["integrable_at_infinity"] = inf_status.value
    if inf_status is Verdict.HOLDS:
        return HypothesisVerdict(
            "Phi&L",
            Status.FAIL,
            CheckTier.EXACT_POWER_LAW if exact else CheckTier.NUMERIC_TAIL,
            witness={"t": settings.grid_max, "kernel": kernel(settings.grid_max)},
            reason="tφ′/l is integrable at +∞, so K is bounded",
            details=parts,
        )

    # φ/l = o(1) at 0⁺
    p0 = phi.zero_limit
    if p0 is not None and l0 is not None:
        vanishes = p0.a - l0.a > 0
        if not vanishes:
            return HypothesisVerdict(
                "Phi&L",
                Status.FAIL,
                CheckTier.EXACT_POWER_LAW,
                witness={"t": settings.grid_min, "ratio": float(phi.value(settings.grid_min) / l.value(settings.grid_min))},
                reason="φ/l does not vanish at 0⁺",
                details=parts,
            )
        parts["phi_over_l_at_0"] = "vanishes"
    else:
        exact = False
        probe_t = settings.grid_min * 10.0 ** -np.arange(5)
        ratio = np.asarray(phi.value(probe_t)) / np.asarray(l.value(probe_t))
        if np.all(np.diff(ratio) < 0) and ratio[-1] < 1e-3 * ratio[0]:
            parts["phi_over_l_at_0"] = "vanishes"
        elif np.all(np.diff(ratio) >= 0):
            return HypothesisVerdict(
                "Phi&L",
                Status.FAIL,
                CheckTier.GRID,
                witness={"t": float(probe_t[-1]), "ratio": float(ratio[-1])},
                reason="φ/l does not decrease towards 0⁺",
                details=parts,
            )
        else:
            parts["phi_over_l_at_0"] = "undecided"

    if Verdict.INCONCLUSIVE.value in parts.values() or parts.get("phi_over_l_at_0") == "undecided":
        return HypothesisVerdict(
            "Phi&L", Status.INCONCLUSIVE, CheckTier.NUMERIC_TAIL, reason="numeric probes undecided", details=parts
        )
    tier = CheckTier.EXACT_POWER_LAW if exact else CheckTier.NUMERIC_TAIL
    return HypothesisVerdict("Phi&L", Status.PASS, tier, details=parts)


def validate_base(spec: ProblemSpec, settings: SolverSettings = DEFAULT_SETTINGS) -> StructuralReport:
    """(Φ), (F), (L) and (Φ&L)."""
    report = StructuralReport(grids={"t": t_grid(settings).tolist()})
    report.add(_guarded("Phi", lambda: _check_phi(spec, settings)))
    report.add(_guarded("F", lambda: _check_f(spec, settings)))
    report.add(_guarded("L", lambda: _check_l(spec, settings)))
    report.add(_guarded("Phi&L", lambda: _check_phi_and_l(spec, settings)))
    logger.info(f"Base hypotheses: {[(n, v.status.value) for n, v in report.verdicts.items()]}")
    return report


# ------------------------------------------------------------- homogeneity


_HOMOGENEITY_CONSTANTS = {
    "Phi2": ("tau", "D"),
    "Phi2_integrated": ("tau", "D"),
    "L2": ("tau", "Lambda"),
    "L2_p": ("Lambda",),
    "Phi3": ("theta", "B"),
    "Phi3_integrated": ("theta", "B"),
    "kappa": ("theta", "B"),
}


def _select(
    spec: ProblemSpec, requested: Optional[Iterable[str]], available: Dict[str, Tuple[str, ...]]
) -> List[str]:
    if requested is None:
        return [name for name, needs in available.items() if spec.constants.has(*needs)]
    names = list(requested)
    unknown = [n for n in names if n not in available]
    if unknown:
        raise ValueError(f"unknown hypotheses: {', '.join(unknown)}")
    for name in names:
        missing = [c for c in available[name] if not spec.constants.has(c)]
        if missing:
            raise MissingConstantError(f"{name} needs constants {', '.join(missing)}")
    return names


def _homogeneity_check(name: str, spec: ProblemSpec, settings: SolverSettings) -> HypothesisVerdict:
    phi, l, consts = spec.phi, spec.l, spec.constants
    s_unit, s_big, t = unit_grid(settings), dilation_grid(settings), t_grid(settings)
    mono = phi.monomial

    if name in ("Phi2", "Phi2_integrated"):
        tau, d = consts.tau, consts.D
        exact = _bounded_power(mono.a - tau, d) if mono is not None and mono.a > 0 else None
        if name == "Phi2":
            return _two_parameter(
                name, lambda s, x: s * phi.derivative(s * x), lambda s, x: d * s**tau * phi.derivative(x), s_unit, t, exact
            )
        return _two_parameter(
            name, lambda s, x: phi.value(s * x), lambda s, x: d * s**tau * phi.value(x), s_unit, t, exact
        )

    if name in ("L2", "L2_p"):
        if name == "L2":
            power = 1.0 + consts.tau
        else:
            if spec.p is None:
                return HypothesisVerdict(name, Status.INCONCLUSIVE, CheckTier.GRID, reason="L2_p needs φ = c·t^(p−1)")
            power = spec.p
        lam = consts.Lambda
        terms = _nonnegative_terms(l)
        exact: ExactOutcome = None
        if terms is not None and all(a <= power for a in terms) and lam >= 1:
            exact = (True, None)
        return _two_parameter(
            name, lambda s, x: s**power * l.value(x), lambda s, x: lam * l.value(s * x), s_unit, t, exact
        )

    theta, b = consts.theta, consts.B
    if name in ("Phi3", "Phi3_integrated"):
        exact = _dominating_power(mono.a - 1.0 + theta, b) if mono is not None and mono.a > 0 else None
        # φ′(ts) >= Bφ′(t)s^(−θ) written as lhs <= rhs
        if name == "Phi3":
            return _two_parameter(
                name, lambda s, x: b * phi.derivative(x) * s**-theta, lambda s, x: phi.derivative(x * s), s_big, t, exact
            )
        return _two_parameter(
            name,
            lambda s, x: b * phi.value(x) * s ** (1.0 - theta),
            lambda s, x: phi.value(x * s),
            s_big,
            t,
            exact,
        )

    # kappa: K(ty) >= B y^(2−θ) K(t) for y >= 1
    engine = get_engine(spec, settings)
    closed = engine.k_closed_form()
    exact = _dominating_power(closed.a - 2.0 + theta, b, "y") if closed is not None else None
    rel = _REL if closed is not None else 10 * settings.rel_tol

    def big_k(x):
        return np.asarray(engine.K(np.ravel(x))).reshape(np.shape(x))

    return _two_parameter(
        name,
        lambda y, x: b * y ** (2.0 - theta) * big_k(x),
        lambda y, x: big_k(x * y),
        s_big,
        t,
        exact,
        s_label="y",
        rel=rel,
    )


def validate_homogeneity(
    spec: ProblemSpec,
    settings: SolverSettings = DEFAULT_SETTINGS,
    hypotheses: Optional[Sequence[str]] = None,
) -> StructuralReport:
    """(Φ2), (L2), (L2_p), (Φ3), K-homogeneity and the integrated consequences.

    Args:
        spec: Problem specification
        settings: Grid size and ranges
        hypotheses: Names to check; by default every one whose constants are declared

    Returns:
        StructuralReport

    Raises:
        MissingConstantError: A requested hypothesis lacks its constants
    """
    names = _select(spec, hypotheses, _HOMOGENEITY_CONSTANTS)
    report = StructuralReport(
        grids={"s_unit": unit_grid(settings).tolist(), "s_dilation": dilation_grid(settings).tolist()}
    )
    for name in names:
        report.add(_guarded(name, lambda name=name: _homogeneity_check(name, spec, settings)))
    skipped = [n for n in _HOMOGENEITY_CONSTANTS if n not in names]
    if skipped:
        logger.debug(f"Homogeneity checks skipped for lack of constants: {skipped}")
    return report


# ---------------------------------------------------------------- gradient


_GRADIENT_CONSTANTS = {
    "H": (),
    "H_L1_infinity": (),
    "Phi0": (),
    "G": ("tau", "Dtilde"),
    "Gtilde": ("D",),
    "p&L": ("B1", "B2", "mu"),
}
_DIFFERENCE_ONLY = ("H", "H_L1_infinity", "G", "Gtilde")


def _check_h(spec: ProblemSpec, settings: SolverSettings) -> HypothesisVerdict:
    h = spec.h
    t = t_grid(settings)
    v = np.asarray(h.value(t), dtype=float) * np.ones_like(t)
    neg = np.flatnonzero(v < 0)
    if neg.size:
        i = int(neg[0])
        return HypothesisVerdict("H", Status.FAIL, CheckTier.GRID, witness={"t": float(t[i]), "h": float(v[i])})
    rising = np.flatnonzero(np.diff(v) > _REL * np.maximum(np.abs(v[:-1]), 1e-300))
    if rising.size:
        i = int(rising[0])
        return HypothesisVerdict(
            "H",
            Status.FAIL,
            CheckTier.GRID,
            witness={"t": float(t[i]), "t_next": float(t[i + 1]), "h": float(v[i]), "h_next": float(v[i + 1])},
            reason="h is not non-increasing",
        )
    if h.is_zero:
        return HypothesisVerdict("H", Status.PASS, CheckTier.EXACT_POWER_LAW)
    zero = h.zero_limit
    if zero is not None:
        if not _power_integrable(zero.a, at_zero=True):
            return HypothesisVerdict(
                "H", Status.FAIL, CheckTier.EXACT_POWER_LAW, witness={"t": settings.grid_min}, reason="h ∉ L¹(0⁺)"
            )
        return HypothesisVerdict("H", Status.PASS, CheckTier.EXACT_POWER_LAW)
    decision = _integrability(lambda s: float(h.value(s)), True, settings)
    if decision is Verdict.HOLDS:
        return HypothesisVerdict("H", Status.PASS, CheckTier.NUMERIC_TAIL)
    if decision is Verdict.FAILS:
        return HypothesisVerdict(
            "H", Status.FAIL, CheckTier.NUMERIC_TAIL, witness={"t": settings.grid_min}, reason="h ∉ L¹(0⁺)"
        )
    return HypothesisVerdict("H", Status.INCONCLUSIVE, CheckTier.NUMERIC_TAIL, reason="h ∈ L¹(0⁺) undecided")


def _check_h_infinity(spec: ProblemSpec, settings: SolverSettings) -> HypothesisVerdict:
    result = h_integrability(spec, settings)
    tier = CheckTier(result["tier"].value)
    verdict = result["verdict"]
    if verdict is Verdict.HOLDS:
        return HypothesisVerdict("H_L1_infinity", Status.PASS, tier)
    if verdict is Verdict.FAILS:
        return HypothesisVerdict(
            "H_L1_infinity",
            Status.FAIL,
            tier,
            witness={"t": settings.grid_max, "h": float(spec.h.value(settings.grid_max))},
            reason="h ∉ L¹(+∞)",
        )
    return HypothesisVerdict("H_L1_infinity", Status.INCONCLUSIVE, tier, reason=result.get("reason", "undecided"))


def _check_phi0(spec: ProblemSpec, settings: SolverSettings) -> HypothesisVerdict:
    phi = spec.phi
    d0 = phi.derivative_asymptote(End.AT_ZERO)
    if d0 is not None:
        if _power_integrable(d0.a + 1.0, at_zero=True):
            return HypothesisVerdict("Phi0", Status.PASS, CheckTier.EXACT_POWER_LAW)
        return HypothesisVerdict(
            "Phi0", Status.FAIL, CheckTier.EXACT_POWER_LAW, witness={"t": settings.grid_min}, reason="tφ′ ∉ L¹(0⁺)"
        )
    decision = _integrability(lambda s: float(s * phi.derivative(s)), True, settings)
    status = {Verdict.HOLDS: Status.PASS, Verdict.FAILS: Status.FAIL}.get(decision, Status.INCONCLUSIVE)
    witness = {"t": settings.grid_min} if status is Status.FAIL else None
    return HypothesisVerdict("Phi0", status, CheckTier.NUMERIC_TAIL, witness=witness)


def _check_g(spec: ProblemSpec, settings: SolverSettings, euclidean: bool) -> HypothesisVerdict:
    g, phi, consts = spec.g, spec.phi, spec.constants
    t = t_grid(settings)
    g_mono, mono = g.monomial, phi.monomial
    if euclidean:
        d = consts.D
        exact: ExactOutcome = None
        if g_mono is not None and mono is not None and mono.a > 0:
            match = abs(g_mono.a - (mono.a + 1.0)) < 1e-12 and g_mono.c <= d * mono.c * mono.a
            exact = (True, None) if match else None
        # one-parameter: put the single variable on the t axis
        return _two_parameter(
            "Gtilde", lambda s, x: g.value(x) * np.ones_like(s), lambda s, x: d * x**2 * phi.derivative(x), np.ones(1), t, exact
        )
    tau, dt = consts.tau, consts.Dtilde
    exact = None
    if g_mono is not None and mono is not None and mono.a > 0:
        if abs(g_mono.a - (mono.a + 1.0)) < 1e-12:
            exact = _bounded_power(g_mono.a - tau - 1.0, dt * mono.c * mono.a / g_mono.c)
        else:
            # t-powers differ, so one end of (0, ∞) breaks the bound at s = 1
            big = g_mono.a > mono.a + 1.0
            exact = (False, {"s": 1.0, "t": 1e12 if big else 1e-12})
    return _two_parameter(
        "G",
        lambda s, x: g.value(s * x),
        lambda s, x: dt * s ** (tau + 1.0) * x**2 * phi.derivative(x),
        unit_grid(settings),
        t,
        exact,
    )


def _check_p_and_l(spec: ProblemSpec, settings: SolverSettings) -> HypothesisVerdict:
    if spec.p is None:
        return HypothesisVerdict("p&L", Status.INCONCLUSIVE, CheckTier.GRID, reason="p&L needs φ = c·t^(p−1)")
    b1, b2, mu = spec.constants.require("B1", "B2", "mu")
    l, phi = spec.l, spec.phi
    t = t_grid(settings)
    v = np.asarray(l.value(t), dtype=float) * np.ones_like(t)
    bound = b1 + b2 * t**mu
    over = np.flatnonzero(v > bound * (1 + _REL))
    if over.size:
        i = int(over[0])
        return HypothesisVerdict(
            "p&L", Status.FAIL, CheckTier.GRID, witness={"t": float(t[i]), "l": float(v[i]), "bound": float(bound[i])}
        )
    p0, l0 = phi.zero_limit, l.zero_limit
    if p0 is not None and l0 is not None and p0.a - l0.a <= 0:
        return HypothesisVerdict(
            "p&L",
            Status.FAIL,
            CheckTier.EXACT_POWER_LAW,
            witness={"t": settings.grid_min},
            reason="t^(p−1)/l does not vanish at 0⁺",
        )
    return HypothesisVerdict("p&L", Status.PASS, CheckTier.GRID, margin=float(np.min((bound - v) / bound)))


def validate_gradient_case(
    spec: ProblemSpec,
    settings: SolverSettings = DEFAULT_SETTINGS,
    hypotheses: Optional[Sequence[str]] = None,
) -> StructuralReport:
    """(H), h ∈ L¹(+∞), (Φ0), (G)/(G̃) for the difference form; (p&L) for the product form."""
    if hypotheses is None:
        if spec.is_difference:
            pool = {"H": (), "H_L1_infinity": (), "Phi0": ()}
            pool["Gtilde" if spec.geometry.is_euclidean else "G"] = _GRADIENT_CONSTANTS[
                "Gtilde" if spec.geometry.is_euclidean else "G"
            ]
        else:
            pool = {"Phi0": (), "p&L": _GRADIENT_CONSTANTS["p&L"]}
        names = _select(spec, None, pool)
    else:
        names = _select(spec, hypotheses, _GRADIENT_CONSTANTS)
        for name in names:
            if name in _DIFFERENCE_ONLY and not spec.is_difference:
                raise WrongRhsKindError(f"{name} applies to the gradient-difference form only")
            if name == "p&L" and spec.is_difference:
                raise WrongRhsKindError("p&L applies to the gradient-product form only")

    checks: Dict[str, Callable[[], HypothesisVerdict]] = {
        "H": lambda: _check_h(spec, settings),
        "H_L1_infinity": lambda: _check_h_infinity(spec, settings),
        "Phi0": lambda: _check_phi0(spec, settings),
        "G": lambda: _check_g(spec, settings, euclidean=False),
        "Gtilde": lambda: _check_g(spec, settings, euclidean=True),
        "p&L": lambda: _check_p_and_l(spec, settings),
    }
    report = StructuralReport(grids={"t": t_grid(settings).tolist()})
    for name in names:
        report.add(_guarded(name, checks[name]))
    return report


def validate_all(spec: ProblemSpec, settings: SolverSettings = DEFAULT_SETTINGS) -> StructuralReport:
    """Every hypothesis applicable to the problem with the declared constants."""
    report = validate_base(spec, settings)
    report.merge(validate_homogeneity(spec, settings))
    report.merge(validate_gradient_case(spec, settings))
    return report
