"""
Heisenberg group H^m: group law, Koranyi gauge, left-invariant horizontal
frame, and three independent evaluations of the phi-Laplacian
(finite-difference divergence form, analytic horizontal Hessian, radial
closed forms).

Coordinates of a point are ordered (x_1..x_m, y_1..y_m, t).
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Optional, Protocol, Sequence, Tuple, Union

import numpy as np

from .errors import (
    DimensionMismatchError,
    ProfileDomainError,
    SingularPointError,
    VanishingGradientError,
)

logger = logging.getLogger(__name__)

STATIONARY_AXIS_GUARD = 1e-8
_GRADIENT_FLOOR = 1e-14


class GeometryKind(Enum):
    """Ambient space."""

    HEISENBERG = "heisenberg"
    EUCLIDEAN = "euclidean"


class RadialKind(Enum):
    """Which radial variable a profile is composed with."""

    GAUGE = "gauge"
    STATIONARY = "stationary"
    EUCLIDEAN = "euclidean"


class GroupMode(Enum):
    MULTIPLY = "multiply"
    INVERSE_OF_FIRST_THEN_MULTIPLY = "inverse_first"


@dataclass(frozen=True)
class Geometry:
    """Heisenberg group H^m or Euclidean space R^m."""

    kind: GeometryKind
    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"geometry index must be a positive integer, got {self.m}")

    @classmethod
    def heisenberg(cls, m: int = 1) -> "Geometry":
        return cls(GeometryKind.HEISENBERG, m)

    @classmethod
    def euclidean(cls, m: int) -> "Geometry":
        return cls(GeometryKind.EUCLIDEAN, m)

    @property
    def is_euclidean(self) -> bool:
        return self.kind is GeometryKind.EUCLIDEAN

    @property
    def dim(self) -> int:
        """Number of coordinates."""
        return self.m if self.is_euclidean else 2 * self.m + 1

    @property
    def default_radial_kind(self) -> RadialKind:
        return RadialKind.EUCLIDEAN if self.is_euclidean else RadialKind.GAUGE

    def radial_coefficient(self, kind: Optional[RadialKind] = None) -> int:
        """Coefficient of phi(w')/s in the radialized operator."""
        kind = kind or self.default_radial_kind
        if self.is_euclidean or kind is RadialKind.EUCLIDEAN:
            return self.m - 1
        if kind is RadialKind.STATIONARY:
            return 2 * self.m - 1
        return 2 * self.m + 1

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "m": self.m}


# ------------------------------------------------------------------------ points


@dataclass(frozen=True)
class Point:
    """A point q = (z, t) of H^m."""

    z: Tuple[float, ...]
    t: float

    def __post_init__(self):
        z = tuple(float(v) for v in self.z)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "t", float(self.t))
        if len(z) == 0 or len(z) % 2:
            raise DimensionMismatchError(f"z must have even positive length, got {len(z)}")
        if not np.all(np.isfinite(z + (self.t,))):
            raise ValueError("point coordinates must be finite")

    @property
    def m(self) -> int:
        return len(self.z) // 2

    @property
    def coords(self) -> np.ndarray:
        return np.array(self.z + (self.t,))

    @classmethod
    def origin(cls, m: int) -> "Point":
        return cls((0.0,) * (2 * m), 0.0)

    @classmethod
    def from_coords(cls, coords: Sequence[float]) -> "Point":
        coords = list(coords)
        return cls(tuple(coords[:-1]), coords[-1])


@dataclass(frozen=True)
class HorizontalVector:
    """Components along X_1..X_m, Y_1..Y_m."""

    coeffs: Tuple[float, ...]

    @property
    def m(self) -> int:
        return len(self.coeffs) // 2

    def dot(self, other: "HorizontalVector") -> float:
        if len(other.coeffs) != len(self.coeffs):
            raise DimensionMismatchError("horizontal vectors of different length")
        return float(np.dot(self.coeffs, other.coeffs))

    def norm(self) -> float:
        return float(np.sqrt(self.dot(self)))


def _check_same_m(a: Point, b: Point) -> None:
    if a.m != b.m:
        raise DimensionMismatchError(f"points of H^{a.m} and H^{b.m} cannot be combined")


def group_op(a: Point, b: Point, mode: GroupMode = GroupMode.MULTIPLY) -> Point:
    """a∘b, or a⁻¹∘b with a⁻¹ = (−z, −t)."""
    _check_same_m(a, b)
    za, ta = np.array(a.z), a.t
    if mode is GroupMode.INVERSE_OF_FIRST_THEN_MULTIPLY:
        za, ta = -za, -ta
    zb = np.array(b.z)
    m = a.m
    xa, ya = za[:m], za[m:]
    xb, yb = zb[:m], zb[m:]
    t = ta + b.t + 2.0 * float(np.dot(ya, xb) - np.dot(xa, yb))
    return Point(tuple(za + zb), t)


@dataclass(frozen=True)
class GaugeValues:
    r: float
    psi: float


def koranyi(q: Point, base: Optional[Point] = None) -> GaugeValues:
    """Koranyi gauge r and density psi (psi(o) = 0)."""
    if base is not None:
        q = group_op(base, q, GroupMode.INVERSE_OF_FIRST_THEN_MULTIPLY)
    z2 = float(np.dot(q.z, q.z))
    r = (z2 * z2 + q.t * q.t) ** 0.25
    psi = z2 / (r * r) if r > 0 else 0.0
    return GaugeValues(r, min(max(psi, 0.0), 1.0))


def _split(coords: np.ndarray, m: int) -> Tuple[np.ndarray, np.ndarray]:
    return coords[..., :m], coords[..., m : 2 * m]


def frame_coefficients(coords: np.ndarray, m: int) -> np.ndarray:
    """t-components c of the frame: X_j = d_xj + c_j d_t, Y_j = d_yj + c_{m+j} d_t."""
    x, y = _split(coords, m)
    return np.concatenate([2.0 * y, -2.0 * x], axis=-1)


def frame_matrix(coords: np.ndarray, m: int) -> np.ndarray:
    """Rows are the Euclidean components of X_1..X_m, Y_1..Y_m."""
    coords = np.asarray(coords, dtype=float)
    n = 2 * m + 1
    frame = np.zeros(coords.shape[:-1] + (2 * m, n))
    idx = np.arange(2 * m)
    frame[..., idx, idx] = 1.0
    frame[..., :, -1] = frame_coefficients(coords, m)
    return frame


def horizontal_from_euclidean(grad: np.ndarray, coords: np.ndarray, m: int) -> np.ndarray:
    """Frame components (X_j u, Y_j u) from a Euclidean gradient."""
    return grad[..., : 2 * m] + frame_coefficients(coords, m) * grad[..., -1:]


def matrix_b(q: Point) -> np.ndarray:
    """B(q) with <grad u, B grad v> = grad_H u . grad_H v."""
    frame = frame_matrix(q.coords, q.m)
    return frame.T @ frame


# ------------------------------------------------------------------- fields


class RadialProfile(Protocol):
    """Anything with a value and two derivatives (profiles, barriers)."""

    def value(self, t: Any) -> Any: ...

    def derivative(self, t: Any) -> Any: ...

    def second_derivative(self, t: Any) -> Any: ...


ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ScalarField:
    """A scalar function of the coordinates with optional analytic partials.

    Callables receive coordinate arrays of shape (..., n) and return
    shapes (...), (..., n) and (..., n, n) respectively.
    """

    dim: int
    evaluator: ArrayFn
    gradient: Optional[ArrayFn] = None
    hessian: Optional[ArrayFn] = None
    fd_step: float = 1e-4
    label: str = field(default="u", compare=False)

    def value(self, coords: Any) -> Any:
        return self.evaluator(np.asarray(coords, dtype=float))

    def grad(self, coords: Any) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        if self.gradient is not None:
            return np.asarray(self.gradient(coords), dtype=float)
        return _central_gradient(self.evaluator, coords, self.fd_step)

    def hess(self, coords: Any) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        if self.hessian is not None:
            return np.asarray(self.hessian(coords), dtype=float)
        return _central_gradient(self.grad, coords, self.fd_step)

    @property
    def has_analytic_partials(self) -> bool:
        return self.gradient is not None


def _central_gradient(fn: Callable, coords: np.ndarray, step: float) -> np.ndarray:
    parts = []
    for k in range(coords.shape[-1]):
        h = step * np.maximum(1.0, np.abs(coords[..., k]))
        shift = np.zeros_like(coords)
        shift[..., k] = h
        diff = (np.asarray(fn(coords + shift)) - np.asarray(fn(coords - shift)))
        h = h.reshape(h.shape + (1,) * (diff.ndim - h.ndim))
        parts.append(diff / (2.0 * h))
    return np.stack(parts, axis=coords.ndim - 1)


def constant_field(dim: int, value: float) -> ScalarField:
    return ScalarField(
        dim,
        lambda x: np.full(x.shape[:-1], float(value)),
        lambda x: np.zeros(x.shape),
        lambda x: np.zeros(x.shape + (x.shape[-1],)),
        label=f"const({value})",
    )


def koranyi_field(m: int) -> ScalarField:
    """The gauge r(z, t) = (|z|^4 + t^2)^(1/4) with analytic partials."""

    def parts(x: np.ndarray):
        z = x[..., : 2 * m]
        t = x[..., -1]
        z2 = np.sum(z * z, axis=-1)
        s = z2 * z2 + t * t
        ds = np.concatenate([4.0 * z2[..., None] * z, (2.0 * t)[..., None]], axis=-1)
        return z, z2, s, ds

    def value(x):
        return parts(x)[2] ** 0.25

    def gradient(x):
        _, _, s, ds = parts(x)
        return ds / (4.0 * s[..., None] ** 0.75)

    def hessian(x):
        z, z2, s, ds = parts(x)
        n = 2 * m + 1
        dds = np.zeros(x.shape + (n,))
        eye = np.eye(2 * m)
        dds[..., : 2 * m, : 2 * m] = 8.0 * z[..., :, None] * z[..., None, :] + (
            4.0 * z2[..., None, None] * eye
        )
        dds[..., -1, -1] = 2.0
        s1 = s[..., None, None]
        outer = ds[..., :, None] * ds[..., None, :]
        return dds / (4.0 * s1**0.75) - 3.0 * outer / (16.0 * s1**1.75)

    return ScalarField(2 * m + 1, value, gradient, hessian, label="r")


def horizontal_modulus_field(m: int) -> ScalarField:
    """|z| with analytic partials (singular on z = 0)."""

    def value(x):
        return np.linalg.norm(x[..., : 2 * m], axis=-1)

    def gradient(x):
        rho = value(x)[..., None]
        return np.concatenate([x[..., : 2 * m] / rho, np.zeros(x.shape[:-1] + (1,))], axis=-1)

    def hessian(x):
        z = x[..., : 2 * m]
        rho = value(x)[..., None, None]
        out = np.zeros(x.shape + (2 * m + 1,))
        out[..., : 2 * m, : 2 * m] = (
            np.eye(2 * m) - z[..., :, None] * z[..., None, :] / rho**2
        ) / rho
        return out

    return ScalarField(2 * m + 1, value, gradient, hessian, label="|z|")


def euclidean_modulus_field(m: int) -> ScalarField:
    """|x| on R^m."""

    def value(x):
        return np.linalg.norm(x, axis=-1)

    def gradient(x):
        return x / value(x)[..., None]

    def hessian(x):
        rho = value(x)[..., None, None]
        return (np.eye(m) - x[..., :, None] * x[..., None, :] / rho**2) / rho

    return ScalarField(m, value, gradient, hessian, label="|x|")


def radial_field(alpha: RadialProfile, base: ScalarField, label: str = "alpha∘r") -> ScalarField:
    """Composition alpha(base) with chain-rule partials."""

    def value(x):
        return np.asarray(alpha.value(base.value(x)), dtype=float)

    def gradient(x):
        b = base.value(x)
        return np.asarray(alpha.derivative(b))[..., None] * base.grad(x)

    def hessian(x):
        b = base.value(x)
        g = base.grad(x)
        a1 = np.asarray(alpha.derivative(b))[..., None, None]
        a2 = np.asarray(alpha.second_derivative(b))[..., None, None]
        return a2 * g[..., :, None] * g[..., None, :] + a1 * base.hess(x)

    return ScalarField(base.dim, value, gradient, hessian, base.fd_step, label)


def translated_field(u: ScalarField, q0: Point) -> ScalarField:
    """q ↦ u(q0⁻¹∘q) with partials pulled back through the left translation."""
    m = q0.m
    z0 = np.array(q0.z)
    x0, y0 = z0[:m], z0[m:]
    jac = np.eye(2 * m + 1)
    jac[-1, :m] = -2.0 * y0
    jac[-1, m : 2 * m] = 2.0 * x0

    def shift(x):
        x = np.asarray(x, dtype=float)
        xs, ys = _split(x, m)
        out = x.copy()
        out[..., : 2 * m] = x[..., : 2 * m] - z0
        out[..., -1] = x[..., -1] - q0.t + 2.0 * (ys @ x0 - xs @ y0)
        return out

    def value(x):
        return u.value(shift(x))

    def gradient(x):
        return u.grad(shift(x)) @ jac

    def hessian(x):
        return np.einsum("ki,...kl,lj->...ij", jac, u.hess(shift(x)), jac)

    return ScalarField(u.dim, value, gradient, hessian, u.fd_step, f"{u.label}∘L")


class PolynomialField:
    """Polynomial in the coordinates with exact partials."""

    def __init__(self, coeffs: np.ndarray, exponents: np.ndarray):
        """Initialize polynomial.

        Args:
            coeffs: Monomial coefficients, shape (M,)
            exponents: Non-negative integer exponents, shape (M, n)
        """
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.exponents = np.asarray(exponents, dtype=int)
        self.dim = self.exponents.shape[1]

    @classmethod
    def random(cls, dim: int, degree: int, rng: np.random.Generator) -> "PolynomialField":
        grids = np.indices((degree + 1,) * dim).reshape(dim, -1).T
        exponents = grids[grids.sum(axis=1) <= degree]
        return cls(rng.normal(size=len(exponents)), exponents)

    def _eval(self, coeffs: np.ndarray, exponents: np.ndarray, x: np.ndarray) -> np.ndarray:
        powers = np.prod(x[..., None, :] ** exponents, axis=-1)
        return powers @ coeffs

    def _derive(self, coeffs: np.ndarray, exponents: np.ndarray, k: int):
        new_coeffs = coeffs * exponents[:, k]
        new_exps = exponents.copy()
        new_exps[:, k] = np.maximum(new_exps[:, k] - 1, 0)
        return new_coeffs, new_exps

    def value(self, x: np.ndarray) -> np.ndarray:
        return self._eval(self.coeffs, self.exponents, np.asarray(x, dtype=float))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        cols = [self._eval(*self._derive(self.coeffs, self.exponents, k), x) for k in range(self.dim)]
        return np.stack(cols, axis=-1)

    def hessian(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        rows = []
        for i in range(self.dim):
            ci, ei = self._derive(self.coeffs, self.exponents, i)
            rows.append(
                np.stack([self._eval(*self._derive(ci, ei, j), x) for j in range(self.dim)], axis=-1)
            )
        return np.stack(rows, axis=-2)

    def as_field(self, fd_step: float = 1e-4) -> ScalarField:
        return ScalarField(self.dim, self.value, self.gradient, self.hessian, fd_step, "poly")


# ---------------------------------------------------------------- operators


def horizontal_apply(u: ScalarField, q: Point) -> HorizontalVector:
    """∇_H u = (X_1 u, …, X_m u, Y_1 u, …, Y_m u) at q."""
    coords = q.coords
    grad = u.grad(coords)
    if not np.all(np.isfinite(grad)):
        raise SingularPointError(f"non-finite partials of {u.label} at {coords.tolist()}")
    return HorizontalVector(tuple(horizontal_from_euclidean(grad, coords, q.m).tolist()))


def horizontal_hessian(u: ScalarField, coords: np.ndarray, m: int) -> np.ndarray:
    """M_ik = Z_i(Z_k u) for the frame Z = (X_1..X_m, Y_1..Y_m)."""
    frame = frame_matrix(coords, m)
    hess = u.hess(coords)
    u_t = u.grad(coords)[..., -1]
    mixed = np.zeros(coords.shape[:-1] + (2 * m, 2 * m))
    idx = np.arange(m)
    # Z_i applied to the coefficient c_k of Z_k
    mixed[..., m + idx, idx] = 2.0 * u_t[..., None]
    mixed[..., idx, m + idx] = -2.0 * u_t[..., None]
    return np.einsum("...ia,...ab,...kb->...ik", frame, hess, frame) + mixed


def kohn_laplacian(u: ScalarField, q: Point) -> float:
    """Σ_j (X_j² + Y_j²) u at q."""
    return float(np.trace(horizontal_hessian(u, q.coords, q.m)))


def _flux_kernel(phi, s: np.ndarray) -> np.ndarray:
    if np.any(s < _GRADIENT_FLOOR):
        raise VanishingGradientError("horizontal gradient vanishes near the evaluation point")
    return np.asarray(phi.value(s)) / s


def phi_laplacian_analytic(u: ScalarField, q: Point, phi) -> float:
    """Δ^φ u from analytic gradient and Hessian via the horizontal Hessian."""
    coords = q.coords
    g = horizontal_from_euclidean(u.grad(coords), coords, q.m)
    s = float(np.linalg.norm(g))
    hh = horizontal_hessian(u, coords, q.m)
    if s < _GRADIENT_FLOOR:
        raise VanishingGradientError(f"∇_H {u.label} vanishes at {coords.tolist()}")
    unit = g / s
    radial = float(unit @ hh @ unit)
    return float(phi.value(s) / s * (np.trace(hh) - radial) + phi.derivative(s) * radial)


def phi_laplacian_fd(u: ScalarField, q: Point, phi, step: float = 1e-4) -> float:
    """Central-difference divergence of A(|∇_H u|) B ∇u at q."""
    coords = q.coords
    m = q.m
    n = coords.size
    h = step * np.maximum(1.0, np.abs(coords))
    stencil = np.concatenate([coords + np.diag(h), coords - np.diag(h)])
    grads = u.grad(stencil)
    g_h = horizontal_from_euclidean(grads, stencil, m)
    s = np.linalg.norm(g_h, axis=-1)
    try:
        kernel = _flux_kernel(phi, s)
    except ProfileDomainError as exc:
        raise SingularPointError(str(exc)) from exc
    flux = kernel[:, None] * np.einsum("pia,pi->pa", frame_matrix(stencil, m), g_h)
    if not np.all(np.isfinite(flux)):
        raise SingularPointError(f"non-finite flux near {coords.tolist()}")
    idx = np.arange(n)
    return float(np.sum((flux[idx, idx] - flux[n + idx, idx]) / (2.0 * h)))


def euclidean_phi_laplacian_fd(u: ScalarField, x: Sequence[float], phi, step: float = 1e-4) -> float:
    """Central-difference div(φ(|∇u|)/|∇u| ∇u) in R^m."""
    x = np.asarray(x, dtype=float)
    n = x.size
    h = step * np.maximum(1.0, np.abs(x))
    stencil = np.concatenate([x + np.diag(h), x - np.diag(h)])
    grads = u.grad(stencil)
    s = np.linalg.norm(grads, axis=-1)
    try:
        flux = _flux_kernel(phi, s)[:, None] * grads
    except ProfileDomainError as exc:
        raise SingularPointError(str(exc)) from exc
    idx = np.arange(n)
    return float(np.sum((flux[idx, idx] - flux[n + idx, idx]) / (2.0 * h)))


def radial_operator(alpha: RadialProfile, s: Any, phi, coefficient: float) -> Any:
    """φ′(|α′|)α″ + (coefficient/s) sgn(α′) φ(|α′|), vectorized in s."""
    s = np.asarray(s, dtype=float)
    a1 = np.broadcast_to(np.asarray(alpha.derivative(s), dtype=float), s.shape)
    a2 = np.broadcast_to(np.asarray(alpha.second_derivative(s), dtype=float), s.shape)
    mag = np.abs(a1)
    principal = np.zeros(s.shape)
    active = a2 != 0.0
    if np.any(active):
        principal[active] = _safe(phi.derivative, mag[active]) * a2[active]
    lower = coefficient / s * np.sign(a1) * np.asarray(phi.value(mag))
    out = principal + lower
    return float(out) if out.ndim == 0 else out


def _safe(fn: Callable, t: np.ndarray) -> np.ndarray:
    try:
        return np.asarray(fn(t), dtype=float)
    except ProfileDomainError as exc:
        raise SingularPointError(str(exc)) from exc


def radial_phi_laplacian(
    alpha: RadialProfile,
    q: Union[Point, Sequence[float]],
    phi,
    kind: RadialKind = RadialKind.GAUGE,
) -> float:
    """Closed-form Δ^φ of alpha composed with the radial variable of ``kind``."""
    if kind is RadialKind.EUCLIDEAN:
        x = np.asarray(q.coords if isinstance(q, Point) else q, dtype=float)
        rho = float(np.linalg.norm(x))
        if rho < STATIONARY_AXIS_GUARD:
            raise SingularPointError("Euclidean radial operator evaluated at the origin")
        return float(radial_operator(alpha, rho, phi, x.size - 1))
    if kind is RadialKind.STATIONARY:
        rho = float(np.linalg.norm(q.z))
        if rho < STATIONARY_AXIS_GUARD:
            raise SingularPointError(f"|z| = {rho:.3g} is on the singular axis")
        return float(radial_operator(alpha, rho, phi, 2 * q.m - 1))
    gauge = koranyi(q)
    if gauge.r == 0.0:
        raise SingularPointError("gauge-radial operator evaluated at the origin")
    root = np.sqrt(gauge.psi)
    if root == 0.0:
        return 0.0
    a1 = float(alpha.derivative(gauge.r))
    a2 = float(alpha.second_derivative(gauge.r))
    mag = abs(a1) * root
    principal = root * float(_safe(phi.derivative, mag)) * a2 if a2 != 0.0 else 0.0
    lower = (2 * q.m + 1) / gauge.r * np.sign(a1) * float(phi.value(mag))
    return float(root * (principal + lower))
