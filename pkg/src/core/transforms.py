"""
Quadrature engine and the integral transforms K, K⁻¹, F, F̂ and H.

K(t) = ∫₀ᵗ sφ′(s)/l(s) ds, F(t) = ∫₀ᵗ f, H(t) = ∫₀ᵗ h and
F̂(t) = ∫₀ᵗ f(s) exp((2−θ)H(s)) ds. Monomial profiles get closed forms;
everything else is tabulated on log-spaced nodes with Gauss–Legendre
increments and monotone-cubic (PCHIP) interpolation.
"""

import logging
import math
import threading
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate as sp_integrate
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq
from scipy.special import roots_legendre

from .errors import (
    InversionError,
    MissingConstantError,
    ProfileOverflowError,
    QuadratureError,
    TableRangeError,
)
from .profiles import PowerLaw, ProblemSpec
from .settings import DEFAULT_SETTINGS, SolverSettings

logger = logging.getLogger(__name__)

VALUE_CEILING = 1e250
_GAUSS_ORDER = 16
_FIRST_NODE = 1e-6


# ------------------------------------------------------------------ quadrature


@dataclass
class QuadratureResult:
    """Result of a one-dimensional quadrature."""

    value: float
    abs_error_estimate: float
    node_count: int
    converged: bool
    error: Optional[str] = None

    def require_converged(self, what: str = "integral") -> float:
        if not self.converged:
            raise QuadratureError(
                f"{what} did not converge: value={self.value:.6g}, "
                f"error≈{self.abs_error_estimate:.3g} ({self.error})"
            )
        return self.value

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "abs_error_estimate": self.abs_error_estimate,
            "node_count": self.node_count,
            "converged": self.converged,
        }


def integrate(
    fn: Callable[[float], float],
    a: float,
    b: float,
    tol: Optional[float] = None,
    rel_tol: Optional[float] = None,
    node_budget: Optional[int] = None,
) -> QuadratureResult:
    """Adaptive Gauss–Kronrod quadrature of fn over [a, b] (b may be +inf).

    Args:
        fn: Integrand, finite on the open interval
        a: Lower limit
        b: Upper limit or ``math.inf``
        tol: Absolute tolerance (default from settings)
        rel_tol: Relative tolerance (default from settings)
        node_budget: Maximum number of integrand evaluations

    Returns:
        QuadratureResult; ``converged`` is False when the budget ran out
        or the error estimate exceeds max(tol, rel_tol·|value|)
    """
    tol = DEFAULT_SETTINGS.abs_tol if tol is None else tol
    rel_tol = DEFAULT_SETTINGS.rel_tol if rel_tol is None else rel_tol
    node_budget = node_budget or DEFAULT_SETTINGS.node_budget
    if b == a:
        return QuadratureResult(0.0, 0.0, 0, True)
    # QAGS uses 21 nodes per subinterval, QAGI 15
    per_interval = 15 if math.isinf(b) else 21
    limit = max(50, node_budget // per_interval)
    out = sp_integrate.quad(
        lambda s: float(fn(s)), a, b, epsabs=tol, epsrel=rel_tol, limit=limit, full_output=1
    )
    value, abserr, info = out[0], out[1], out[2]
    message = out[3] if len(out) > 3 else None
    converged = (
        message is None
        and math.isfinite(value)
        and abserr <= max(tol, rel_tol * abs(value))
    )
    if not converged:
        logger.warning(f"Quadrature on [{a}, {b}] not converged: {message}")
    return QuadratureResult(float(value), float(abserr), int(info["neval"]), converged, message)


def gauss_segments(fn: Callable, lo: np.ndarray, hi: np.ndarray, order: int = _GAUSS_ORDER) -> np.ndarray:
    """Fixed-order Gauss–Legendre integral of fn over each [lo_i, hi_i]."""
    x, w = roots_legendre(order)
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    pts = mid[..., None] + half[..., None] * x
    vals = np.asarray(fn(pts.ravel()), dtype=float).reshape(pts.shape)
    return half * (vals @ w)


def expand_bracket(
    fn: Callable[[float], float], target: float, start: float, ceiling: float = VALUE_CEILING
) -> Tuple[float, float]:
    """Geometric expansion of [start/2^k, start·2^k] until fn brackets target."""
    lo = hi = start
    while fn(lo) > target:
        lo /= 2.0
        if lo < 1e-300:
            raise InversionError(f"no lower bracket for target {target:.6g}")
    while fn(hi) < target:
        hi *= 2.0
        if hi > ceiling:
            raise InversionError(f"bracket not found below ceiling {ceiling:.3g}")
    return lo, hi


def invert_increasing(
    fn: Callable[[np.ndarray], np.ndarray],
    targets,
    lower,
    upper,
    fprime: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    rtol: float = 1e-13,
    max_iter: int = 200,
) -> np.ndarray:
    """Solve fn(x) = target on bracketed intervals for increasing fn.

    With ``fprime`` a safeguarded Newton iteration runs on all targets at
    once (bisection whenever a step leaves its bracket); without it each
    target is handed to Brent's method.
    """
    y = np.atleast_1d(np.asarray(targets, dtype=float))
    lo = np.broadcast_to(np.asarray(lower, dtype=float), y.shape).copy()
    hi = np.broadcast_to(np.asarray(upper, dtype=float), y.shape).copy()
    if fprime is None:
        out = np.empty_like(y)
        for i, (target, a, b) in enumerate(zip(y, lo, hi)):
            out[i] = brentq(lambda s: float(fn(np.array([s]))[0]) - target, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps)
        return out
    x = np.sqrt(lo * hi) if np.all(lo > 0) else 0.5 * (lo + hi)
    for _ in range(max_iter):
        fx = np.asarray(fn(x), dtype=float) - y
        lo = np.where(fx <= 0.0, x, lo)
        hi = np.where(fx > 0.0, x, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = fx / np.asarray(fprime(x), dtype=float)
        candidate = x - step
        inside = np.isfinite(candidate) & (candidate > lo) & (candidate < hi)
        candidate = np.where(inside, candidate, 0.5 * (lo + hi))
        done = (np.abs(candidate - x) <= rtol * np.abs(candidate)) | (fx == 0.0) | (
            hi - lo <= rtol * np.abs(hi)
        )
        x = np.where(fx == 0.0, x, candidate)
        if np.all(done):
            return x
    raise InversionError(f"monotone inversion did not converge in {max_iter} iterations")


def fit_growth_exponent(fn: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, n: int = 25) -> float:
    """Least-squares slope of log fn(t) against log t on [lo, hi]."""
    t = np.logspace(math.log10(lo), math.log10(hi), n)
    return float(np.polyfit(np.log(t), np.log(np.asarray(fn(t), dtype=float)), 1)[0])


# ------------------------------------------------------------------ tables


class TransformKind(Enum):
    K = "K"
    F = "F"
    FHAT = "Fhat"
    HINT = "Hint"
    BARRIER = "barrier"


@dataclass(frozen=True)
class TableState:
    """Published snapshot of a tabulated transform; never mutated."""

    nodes: np.ndarray
    values: np.ndarray
    interp: PchipInterpolator
    log_values: bool
    interp_ok: bool
    max_interp_error: float
    exhausted: bool = False

    def interpolate(self, t: np.ndarray) -> np.ndarray:
        y = self.interp(np.log(t))
        return np.exp(y) if self.log_values else y


def _leading_within_ceiling(values: np.ndarray) -> int:
    ok = np.isfinite(values) & (np.abs(values) <= VALUE_CEILING)
    return len(values) if np.all(ok) else int(np.argmin(ok))


class TransformTable:
    """Monotone tabulation of x ↦ ∫_{start}^x integrand.

    Readers take one ``TableState`` snapshot per call. Growth happens under
    a lock and publishes nodes, values and interpolant together, so a table
    shared between threads never exposes a half-extended state.
    """

    _GROWTH_ERRORS = (ProfileOverflowError, FloatingPointError, OverflowError, QuadratureError, InversionError)

    def __init__(
        self,
        kind: TransformKind,
        integrand: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        start: float = 0.0,
        closed_form: Optional[PowerLaw] = None,
        settings: SolverSettings = DEFAULT_SETTINGS,
        span_decades: float = 6.0,
    ):
        """Initialize table.

        Args:
            kind: Which transform the table holds
            integrand: Vectorized positive integrand (unused with closed_form)
            start: Lower limit of integration
            closed_form: c·t^a shortcut; c = 0 means the transform vanishes
            settings: Tolerances and node density
            span_decades: Initial number of decades tabulated beyond the first node
        """
        self.logger = logging.getLogger(__name__)
        self.kind = kind
        self.integrand = integrand
        self.start = float(start)
        self.closed_form = closed_form
        self.settings = settings
        self.ratio = 10.0 ** (1.0 / settings.nodes_per_decade)
        self._lock = threading.Lock()
        self._state: Optional[TableState] = None
        if closed_form is None:
            if integrand is None:
                raise ValueError("a table needs an integrand or a closed form")
            self._build(span_decades)

    # -- published state ----------------------------------------------------

    @property
    def state(self) -> Optional[TableState]:
        return self._state

    @property
    def nodes(self) -> np.ndarray:
        return self._state.nodes if self._state is not None else np.empty(0)

    @property
    def values(self) -> np.ndarray:
        return self._state.values if self._state is not None else np.empty(0)

    @property
    def interp_ok(self) -> bool:
        return self._state is None or self._state.interp_ok

    @property
    def max_interp_error(self) -> float:
        return 0.0 if self._state is None else self._state.max_interp_error

    @property
    def exhausted(self) -> bool:
        return self._state is not None and self._state.exhausted

    # -- construction -------------------------------------------------------

    def _build(self, span_decades: float) -> None:
        first = self.start if self.start > 0 else _FIRST_NODE
        count = int(round(span_decades * self.settings.nodes_per_decade)) + 1
        nodes = first * self.ratio ** np.arange(count)
        if self.start > 0:
            anchor = 0.0
        else:
            anchor = integrate(
                lambda s: float(self.integrand(np.array([s]))[0]),
                0.0,
                first,
                tol=self.settings.abs_tol * 1e-3,
                rel_tol=self.settings.rel_tol * 1e-2,
                node_budget=self.settings.node_budget,
            ).require_converged(f"{self.kind.value} near 0")
        increments = self._finite_increments(nodes[:-1], nodes[1:])
        values = anchor + np.concatenate([[0.0], np.cumsum(increments)])
        kept = _leading_within_ceiling(values)
        if kept < 2:
            raise ProfileOverflowError(f"{self.kind.value} overflows before t={nodes[1]:.3g}")
        if kept < count:
            self.logger.warning(f"{self.kind.value} table stops at t={nodes[kept - 1]:.6g}: the integral overflows beyond")
        self._state = self._snapshot(nodes[:kept], values[:kept], exhausted=kept < count)
        self.logger.info(
            f"Built {self.kind.value} table: {kept} nodes on "
            f"[{nodes[0]:.3g}, {nodes[kept - 1]:.3g}], interp_ok={self._state.interp_ok}"
        )

    def _increments(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        fine = gauss_segments(self.integrand, lo, hi, _GAUSS_ORDER)
        coarse = gauss_segments(self.integrand, lo, hi, _GAUSS_ORDER // 2)
        bad = np.abs(fine - coarse) > np.maximum(
            self.settings.abs_tol, self.settings.rel_tol * 1e-2 * np.abs(fine)
        )
        for i in np.flatnonzero(bad):
            fine[i] = integrate(
                lambda s: float(self.integrand(np.array([s]))[0]),
                lo[i],
                hi[i],
                tol=self.settings.abs_tol,
                rel_tol=self.settings.rel_tol * 1e-2,
            ).require_converged(f"{self.kind.value} segment")
        return fine

    def _finite_increments(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Increments over the longest leading run of segments that stays finite.

        A batch that fails is bisected, so an overflow far out cuts only the
        segments at and beyond it.
        """
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                increments = self._increments(lo, hi)
        except self._GROWTH_ERRORS as exc:
            if len(lo) == 1:
                self.logger.debug(f"{self.kind.value} segment [{lo[0]:.6g}, {hi[0]:.6g}] failed: {exc}")
                return np.empty(0)
            half = len(lo) // 2
            head = self._finite_increments(lo[:half], hi[:half])
            if len(head) < half:
                return head
            return np.concatenate([head, self._finite_increments(lo[half:], hi[half:])])
        finite = np.isfinite(increments)
        return increments if np.all(finite) else increments[: int(np.argmin(finite))]

    def _snapshot(self, nodes: np.ndarray, values: np.ndarray, exhausted: bool) -> TableState:
        x = np.log(nodes)
        log_values = bool(np.all(values > 0))
        y = np.log(values) if log_values else values
        if np.any(np.diff(y) < 0):
            raise QuadratureError(f"{self.kind.value} table is not monotone")
        interp = PchipInterpolator(x, y, extrapolate=False)
        mids = np.sqrt(nodes[:-1] * nodes[1:])
        exact = values[:-1] + gauss_segments(self.integrand, nodes[:-1], mids)
        approx = np.exp(interp(np.log(mids))) if log_values else interp(np.log(mids))
        scale = np.maximum(np.abs(exact), self.settings.abs_tol)
        max_error = float(np.max(np.abs(approx - exact) / scale))
        interp_ok = max_error <= self.settings.rel_tol
        if not interp_ok:
            self.logger.debug(
                f"{self.kind.value} interpolation error {max_error:.2e} above tolerance, using direct quadrature"
            )
        nodes, values = nodes.copy(), values.copy()
        nodes.flags.writeable = False
        values.flags.writeable = False
        return TableState(nodes, values, interp, log_values, interp_ok, max_error, exhausted)

    def _extend_locked(self, decades: float) -> bool:
        state = self._state
        if state.exhausted:
            return False
        last = state.nodes[-1]
        if last >= VALUE_CEILING:
            self._state = replace(state, exhausted=True)
            return False
        count = max(1, int(round(decades * self.settings.nodes_per_decade)))
        new_nodes = last * self.ratio ** np.arange(1, count + 1)
        increments = self._finite_increments(np.concatenate([[last], new_nodes[:-1]]), new_nodes)
        new_values = state.values[-1] + np.cumsum(increments)
        kept = _leading_within_ceiling(new_values)
        exhausted = kept < count
        if exhausted:
            stop = new_nodes[kept - 1] if kept else last
            self.logger.warning(f"{self.kind.value} table stops at t={stop:.6g}: the integral overflows beyond")
        if kept == 0:
            self._state = replace(state, exhausted=True)
            return False
        self._state = self._snapshot(
            np.concatenate([state.nodes, new_nodes[:kept]]),
            np.concatenate([state.values, new_values[:kept]]),
            exhausted,
        )
        return True

    def extend(self, decades: float = 1.0) -> bool:
        """Append nodes; returns False once the table cannot grow any further."""
        if self.closed_form is not None:
            return False
        with self._lock:
            return self._extend_locked(decades)

    def ensure_node(self, t: float) -> TableState:
        """Snapshot whose last node is at least t."""
        state = self._state
        if state.nodes[-1] >= t:
            return state
        with self._lock:
            while self._state.nodes[-1] < t:
                if not self._extend_locked(max(1.0, math.log10(t / self._state.nodes[-1]))):
                    raise TableRangeError(
                        f"{self.kind.value} table cannot reach t={t:.3g}; "
                        f"it stops at {self._state.nodes[-1]:.6g}"
                    )
            return self._state

    def ensure_value(self, u: float) -> TableState:
        """Snapshot whose last value is at least u."""
        state = self._state
        if state.values[-1] >= u:
            return state
        with self._lock:
            while self._state.values[-1] < u:
                if not self._extend_locked(1.0):
                    raise TableRangeError(
                        f"{self.kind.value}⁻¹({u:.6g}): bracket not found below the overflow ceiling"
                    )
            return self._state

    # -- evaluation ---------------------------------------------------------

    def _exact(self, state: TableState, t: np.ndarray) -> np.ndarray:
        idx = np.clip(np.searchsorted(state.nodes, t, side="right") - 1, 0, len(state.nodes) - 1)
        return state.values[idx] + gauss_segments(self.integrand, state.nodes[idx], t)

    def __call__(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if self.closed_form is not None:
            out = self.closed_form(t_arr) if self.closed_form.c != 0 else np.zeros_like(t_arr)
            return float(out[0]) if np.ndim(t) == 0 else out
        if np.any(t_arr < self.start):
            raise ValueError(f"{self.kind.value} evaluated below its start {self.start}")
        state = self.ensure_node(float(np.max(t_arr)))
        out = np.empty_like(t_arr)
        low = t_arr < state.nodes[0]
        for i in np.flatnonzero(low):
            out[i] = (
                integrate(
                    lambda s: float(self.integrand(np.array([s]))[0]),
                    self.start,
                    t_arr[i],
                    tol=self.settings.abs_tol,
                    rel_tol=self.settings.rel_tol,
                ).require_converged(self.kind.value)
                if t_arr[i] > self.start
                else 0.0
            )
        rest = ~low
        if np.any(rest):
            out[rest] = state.interpolate(t_arr[rest]) if state.interp_ok else self._exact(state, t_arr[rest])
        return float(out[0]) if np.ndim(t) == 0 else out

    def exact(self, t):
        """Table value by direct Gauss–Legendre on the last segment, never interpolated."""
        if self.closed_form is not None:
            return self(t)
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t_arr < self.nodes[0]):
            return self(t)
        state = self.ensure_node(float(np.max(t_arr)))
        out = self._exact(state, t_arr)
        return float(out[0]) if np.ndim(t) == 0 else out

    def derivative(self, t):
        if self.closed_form is not None:
            c, a = self.closed_form.c, self.closed_form.a
            return c * a * np.power(t, a - 1.0)
        return self.integrand(t)

    def inverse(self, u):
        """x with table(x) = u (x >= start)."""
        u_arr = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any(u_arr < 0):
            raise InversionError("transform inverse requested for a negative value")
        if self.closed_form is not None:
            c, a = self.closed_form.c, self.closed_form.a
            if c == 0:
                raise InversionError(f"{self.kind.value} vanishes identically")
            out = np.power(u_arr / c, 1.0 / a)
            return float(out[0]) if np.ndim(u) == 0 else out
        state = self.ensure_value(float(np.max(u_arr)))
        out = np.full_like(u_arr, self.start)
        low = (u_arr > 0) & (u_arr < state.values[0])
        for i in np.flatnonzero(low):
            out[i] = brentq(lambda s: self(s) - u_arr[i], self.start, state.nodes[0], rtol=1e-14)
        mid = u_arr >= state.values[0]
        if np.any(mid):
            # values are non-decreasing; the first index reaching u brackets it
            hi_idx = np.clip(np.searchsorted(state.values, u_arr[mid], side="left"), 1, len(state.nodes) - 1)
            lo_idx = hi_idx - 1
            at_node = state.values[lo_idx] == u_arr[mid]
            solved = invert_increasing(
                lambda x: self._exact(state, x),
                u_arr[mid],
                state.nodes[lo_idx],
                state.nodes[hi_idx],
                fprime=self.integrand,
            )
            out[mid] = np.where(at_node, state.nodes[lo_idx], solved)
        return float(out[0]) if np.ndim(u) == 0 else out

    def summary(self) -> dict:
        if self.closed_form is not None:
            return {"kind": self.kind.value, "closed_form": self.closed_form.to_dict()}
        state = self._state
        return {
            "kind": self.kind.value,
            "nodes": int(len(state.nodes)),
            "range": [float(state.nodes[0]), float(state.nodes[-1])],
            "interp_ok": state.interp_ok,
            "max_interp_error": state.max_interp_error,
            "exhausted": state.exhausted,
        }


# ------------------------------------------------------------- per-spec engine


class FVariant(Enum):
    PLAIN = "plain"
    HAT = "hat"


class TransformEngine:
    """Lazily built K, F, H and F̂ tables for one problem.

    Each table is built once under the engine lock and only then published,
    so one engine can be shared between threads.
    """

    def __init__(
        self,
        spec: ProblemSpec,
        settings: SolverSettings = DEFAULT_SETTINGS,
        use_closed_forms: bool = True,
    ):
        """Initialize transform engine.

        Args:
            spec: Problem whose profiles define the transforms
            settings: Tolerances and table density
            use_closed_forms: Disable to force the quadrature path
        """
        self.logger = logging.getLogger(__name__)
        self.spec = spec
        self.settings = settings
        self.use_closed_forms = use_closed_forms
        self._lock = threading.RLock()
        self._k: Optional[TransformTable] = None
        self._f: Optional[TransformTable] = None
        self._h: Optional[TransformTable] = None
        self._fhat: Optional[TransformTable] = None

    # -- closed forms -------------------------------------------------------

    def k_closed_form(self) -> Optional[PowerLaw]:
        phi, l = self.spec.phi.monomial, self.spec.l.monomial
        if not self.use_closed_forms or phi is None or l is None or phi.a == 0:
            return None
        exponent = phi.a - l.a + 1.0
        if exponent <= 0:
            raise QuadratureError("K diverges at 0: tφ′/l is not integrable at 0⁺")
        return PowerLaw(phi.c * phi.a / l.c / exponent, exponent)

    def _integral_closed_form(self, profile) -> Optional[PowerLaw]:
        if not self.use_closed_forms:
            return None
        if profile.is_zero:
            return PowerLaw(0.0, 1.0)
        mono = profile.monomial
        if mono is None or mono.a <= -1:
            return None
        return PowerLaw(mono.c / (mono.a + 1.0), mono.a + 1.0)

    # -- tables -------------------------------------------------------------

    @property
    def k_table(self) -> TransformTable:
        if self._k is None:
            with self._lock:
                if self._k is None:
                    phi, l = self.spec.phi, self.spec.l
                    self._k = TransformTable(
                        TransformKind.K,
                        lambda s: s * phi.derivative(s) / l.value(s),
                        closed_form=self.k_closed_form(),
                        settings=self.settings,
                    )
        return self._k

    @property
    def f_table(self) -> TransformTable:
        if self._f is None:
            with self._lock:
                if self._f is None:
                    f = self.spec.f
                    self._f = TransformTable(
                        TransformKind.F, f.value, closed_form=self._integral_closed_form(f), settings=self.settings
                    )
        return self._f

    @property
    def h_table(self) -> TransformTable:
        if self._h is None:
            h = self.spec.h
            if h is None:
                raise MissingConstantError("H requires the gradient-difference form with h")
            with self._lock:
                if self._h is None:
                    self._h = TransformTable(
                        TransformKind.HINT, h.value, closed_form=self._integral_closed_form(h), settings=self.settings
                    )
        return self._h

    @property
    def fhat_table(self) -> TransformTable:
        if self._fhat is None:
            (theta,) = self.spec.constants.require("theta")
            h = self.spec.h
            if h is None:
                raise MissingConstantError("F̂ requires the gradient-difference form with h")
            with self._lock:
                if self._fhat is None and h.is_zero:
                    self._fhat = self.f_table
                elif self._fhat is None:
                    f, h_table = self.spec.f, self.h_table
                    weight = 2.0 - theta
                    self._fhat = TransformTable(
                        TransformKind.FHAT,
                        lambda s: f.value(s) * np.exp(weight * h_table(s)),
                        settings=self.settings,
                    )
        return self._fhat

    # -- transforms ---------------------------------------------------------

    def K(self, t):
        return self.k_table(t)

    def K_inv(self, u):
        return self.k_table.inverse(u)

    def F(self, t):
        return self.f_table(t)

    def F_hat(self, t):
        return self.fhat_table(t)

    def H(self, t):
        return self.h_table(t)

    def exp_H(self, t):
        if self.spec.h is None or self.spec.h.is_zero:
            return np.ones_like(np.asarray(t, dtype=float)) if np.ndim(t) else 1.0
        return np.exp(self.h_table(t))

    def big_f(self, t, variant: FVariant = FVariant.PLAIN):
        return self.F(t) if variant is FVariant.PLAIN else self.F_hat(t)

    def summary(self) -> dict:
        out = {}
        for name, table in (("K", self._k), ("F", self._f), ("H", self._h), ("Fhat", self._fhat)):
            if table is not None:
                out[name] = table.summary()
        return out


@lru_cache(maxsize=32)
def get_engine(spec: ProblemSpec, settings: SolverSettings = DEFAULT_SETTINGS) -> TransformEngine:
    """Shared engine per (spec, settings)."""
    return TransformEngine(spec, settings)


def big_k(spec: ProblemSpec, t, settings: SolverSettings = DEFAULT_SETTINGS):
    """K(t) = ∫₀ᵗ sφ′(s)/l(s) ds."""
    return get_engine(spec, settings).K(t)


def big_k_inverse(spec: ProblemSpec, u, settings: SolverSettings = DEFAULT_SETTINGS):
    """K⁻¹(u)."""
    return get_engine(spec, settings).K_inv(u)


def big_f(spec: ProblemSpec, t, variant: FVariant = FVariant.PLAIN, settings: SolverSettings = DEFAULT_SETTINGS):
    """F(t) or F̂(t)."""
    return get_engine(spec, settings).big_f(t, variant)
