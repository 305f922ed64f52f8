"""
Tests for Heisenberg group geometry and the φ-Laplacian evaluators.
"""
import numpy as np
import pytest


def _random_points(m, n, seed=0):
    """Points with |z| in a comfortable range off the t-axis."""
    from src.core.heisenberg import Point

    rng = np.random.default_rng(seed)
    points = []
    while len(points) < n:
        coords = rng.uniform(-2.0, 2.0, size=2 * m + 1)
        if np.linalg.norm(coords[: 2 * m]) > 0.2:
            points.append(Point.from_coords(coords))
    return points


class TestGroupLaw:
    """Test suite for the group operation."""

    def test_origin_is_identity(self):
        """Test o∘q = q."""
        from src.core.heisenberg import Point, group_op

        q = Point((0.3, -1.2), 2.5)
        assert group_op(Point.origin(1), q) == q

    def test_twisted_product(self):
        """Test (1,0,0)∘(0,1,0) = (1,1,-2) in H^1."""
        from src.core.heisenberg import Point, group_op

        assert group_op(Point((1.0, 0.0), 0.0), Point((0.0, 1.0), 0.0)) == Point((1.0, 1.0), -2.0)

    def test_inverse_mode_returns_origin(self):
        """Test q⁻¹∘q = o."""
        from src.core.heisenberg import GroupMode, Point, group_op

        for q in _random_points(2, 10):
            result = group_op(q, q, GroupMode.INVERSE_OF_FIRST_THEN_MULTIPLY)
            assert np.allclose(result.coords, 0.0)

    def test_dimension_mismatch(self):
        """Test points of different H^m are rejected."""
        from src.core.errors import DimensionMismatchError
        from src.core.heisenberg import Point, group_op

        with pytest.raises(DimensionMismatchError):
            group_op(Point.origin(1), Point.origin(2))

    def test_odd_z_rejected(self):
        """Test a point needs an even number of horizontal coordinates."""
        from src.core.errors import DimensionMismatchError
        from src.core.heisenberg import Point

        with pytest.raises(DimensionMismatchError):
            Point((1.0, 2.0, 3.0), 0.0)


class TestKoranyi:
    """Test suite for the Koranyi gauge and density."""

    def test_horizontal_point(self):
        """Test t = 0 gives r = |z| and ψ = 1."""
        from src.core.heisenberg import Point, koranyi

        gauge = koranyi(Point((3.0, 4.0), 0.0))
        assert gauge.r == pytest.approx(5.0)
        assert gauge.psi == pytest.approx(1.0)

    def test_vertical_point(self):
        """Test (0,0,4) gives r = 2 and ψ = 0."""
        from src.core.heisenberg import Point, koranyi

        gauge = koranyi(Point((0.0, 0.0), 4.0))
        assert gauge.r == pytest.approx(2.0)
        assert gauge.psi == 0.0

    def test_origin_convention(self):
        """Test ψ(o) = 0."""
        from src.core.heisenberg import Point, koranyi

        gauge = koranyi(Point.origin(3))
        assert (gauge.r, gauge.psi) == (0.0, 0.0)

    def test_distance_to_self_is_zero(self):
        """Test the Koranyi distance d(q, q) vanishes."""
        from src.core.heisenberg import koranyi

        q = _random_points(1, 1)[0]
        assert koranyi(q, base=q).r == pytest.approx(0.0, abs=1e-12)

    def test_psi_in_unit_interval(self):
        """Test 0 ≤ ψ ≤ 1 on random points."""
        from src.core.heisenberg import koranyi

        for q in _random_points(3, 50, seed=4):
            assert 0.0 <= koranyi(q).psi <= 1.0


class TestHorizontalGradient:
    """Test suite for horizontal_apply and matrix_b."""

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_gauge_gradient_squared_is_psi(self, m):
        """Test |∇_H r|² = ψ off the axis."""
        from src.core.heisenberg import horizontal_apply, koranyi, koranyi_field

        r = koranyi_field(m)
        for q in _random_points(m, 30, seed=m):
            assert horizontal_apply(r, q).norm() ** 2 == pytest.approx(koranyi(q).psi, rel=1e-6)

    def test_modulus_of_z_has_unit_gradient(self):
        """Test |∇_H |z|| = 1 off z = 0."""
        from src.core.heisenberg import horizontal_apply, horizontal_modulus_field

        field = horizontal_modulus_field(2)
        for q in _random_points(2, 20):
            assert horizontal_apply(field, q).norm() == pytest.approx(1.0, rel=1e-12)

    def test_constant_has_zero_gradient(self):
        """Test a constant field has the zero horizontal vector."""
        from src.core.heisenberg import constant_field, horizontal_apply

        q = _random_points(1, 1)[0]
        assert horizontal_apply(constant_field(3, 7.0), q).coeffs == (0.0, 0.0)

    def test_finite_difference_fallback(self):
        """Test the central-difference gradient agrees with analytic partials."""
        from src.core.heisenberg import PolynomialField, ScalarField, horizontal_apply

        poly = PolynomialField.random(3, 3, np.random.default_rng(2))
        numeric = ScalarField(3, poly.value)
        for q in _random_points(1, 10):
            exact = np.array(horizontal_apply(poly.as_field(), q).coeffs)
            approx = np.array(horizontal_apply(numeric, q).coeffs)
            np.testing.assert_allclose(approx, exact, rtol=1e-6, atol=1e-6)

    def test_matrix_b_at_origin(self):
        """Test B(o) = diag(I, 0)."""
        from src.core.heisenberg import Point, matrix_b

        expected = np.diag([1.0, 1.0, 1.0, 1.0, 0.0])
        np.testing.assert_array_equal(matrix_b(Point.origin(2)), expected)

    def test_matrix_b_corner_entry(self):
        """Test the bottom-right entry is 4|z|²."""
        from src.core.heisenberg import matrix_b

        for q in _random_points(2, 10):
            assert matrix_b(q)[-1, -1] == pytest.approx(4.0 * np.dot(q.z, q.z))

    def test_matrix_b_reproduces_frame_dot_product(self):
        """Test <∇u, B∇v> = ∇_H u · ∇_H v on random polynomials."""
        from src.core.heisenberg import PolynomialField, horizontal_apply, matrix_b

        rng = np.random.default_rng(5)
        u = PolynomialField.random(5, 3, rng).as_field()
        v = PolynomialField.random(5, 3, rng).as_field()
        for q in _random_points(2, 10):
            lhs = u.grad(q.coords) @ matrix_b(q) @ v.grad(q.coords)
            rhs = horizontal_apply(u, q).dot(horizontal_apply(v, q))
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)

    def test_commutator(self):
        """Test [X_j, Y_j] u = -4 ∂_t u and [X_j, Y_k] u = 0 for j ≠ k."""
        from src.core.heisenberg import PolynomialField, horizontal_hessian

        m = 2
        u = PolynomialField.random(2 * m + 1, 3, np.random.default_rng(9)).as_field()
        for q in _random_points(m, 10):
            hh = horizontal_hessian(u, q.coords, m)
            u_t = u.grad(q.coords)[-1]
            for j in range(m):
                for k in range(m):
                    bracket = hh[j, m + k] - hh[m + k, j]
                    expected = -4.0 * u_t if j == k else 0.0
                    assert bracket == pytest.approx(expected, abs=1e-12 * max(1.0, abs(u_t)))


class TestPhiLaplacian:
    """Test suite for the φ-Laplacian evaluators."""

    def test_fd_matches_kohn_laplacian(self):
        """Test φ(t) = t reduces the FD operator to Σ(X_j² + Y_j²)."""
        from src.core.heisenberg import PolynomialField, kohn_laplacian, phi_laplacian_fd
        from src.core.profiles import Profile

        phi = Profile("t", "phi")
        u = PolynomialField.random(3, 3, np.random.default_rng(1)).as_field()
        for q in _random_points(1, 20, seed=3):
            exact = kohn_laplacian(u, q)
            assert phi_laplacian_fd(u, q, phi) == pytest.approx(exact, abs=1e-4 * max(1.0, abs(exact)))

    def test_analytic_matches_kohn_laplacian(self):
        """Test the Hessian-based operator for φ(t) = t."""
        from src.core.heisenberg import PolynomialField, kohn_laplacian, phi_laplacian_analytic
        from src.core.profiles import Profile

        phi = Profile("t", "phi")
        u = PolynomialField.random(5, 3, np.random.default_rng(6)).as_field()
        for q in _random_points(2, 10):
            assert phi_laplacian_analytic(u, q, phi) == pytest.approx(kohn_laplacian(u, q), rel=1e-10, abs=1e-10)

    @pytest.mark.parametrize("m", [1, 2])
    def test_gauge_radial_identity(self, m):
        """Test α(s) = s, φ(t) = t gives (2m+1)ψ/r."""
        from src.core.heisenberg import RadialKind, koranyi, radial_phi_laplacian
        from src.core.profiles import Profile

        ident = Profile("t")
        for q in _random_points(m, 10):
            gauge = koranyi(q)
            value = radial_phi_laplacian(ident, q, ident, RadialKind.GAUGE)
            assert value == pytest.approx((2 * m + 1) * gauge.psi / gauge.r, rel=1e-12)

    def test_stationary_radial_identity(self):
        """Test w(s) = s, φ(t) = t gives (2m-1)/|z|."""
        from src.core.heisenberg import RadialKind, radial_phi_laplacian
        from src.core.profiles import Profile

        ident = Profile("t")
        for q in _random_points(3, 10):
            value = radial_phi_laplacian(ident, q, ident, RadialKind.STATIONARY)
            assert value == pytest.approx(5.0 / np.linalg.norm(q.z), rel=1e-12)

    def test_constant_profile_gives_zero(self):
        """Test a constant α has vanishing radial operator."""
        from src.core.heisenberg import RadialKind, radial_phi_laplacian
        from src.core.profiles import Profile

        q = _random_points(1, 1)[0]
        assert radial_phi_laplacian(Profile("3"), q, Profile("t"), RadialKind.GAUGE) == 0.0

    def test_euclidean_radial_matches_fd(self):
        """Test Δ|x| = (m-1)/|x| in R^3 both ways."""
        from src.core.heisenberg import (
            RadialKind,
            euclidean_modulus_field,
            euclidean_phi_laplacian_fd,
            radial_phi_laplacian,
        )
        from src.core.profiles import Profile

        ident = Profile("t")
        x = (1.0, 2.0, 2.0)
        assert radial_phi_laplacian(ident, x, ident, RadialKind.EUCLIDEAN) == pytest.approx(2.0 / 3.0)
        assert euclidean_phi_laplacian_fd(euclidean_modulus_field(3), x, ident) == pytest.approx(2.0 / 3.0, rel=1e-6)

    def test_fd_agrees_with_radialization(self):
        """Test FD on α∘r matches the closed form to 1e-3."""
        from src.core.heisenberg import koranyi_field, phi_laplacian_fd, radial_field, radial_phi_laplacian
        from src.core.profiles import Profile

        alpha = Profile("t^3 + t", "alpha")
        phi = Profile("t^2", "phi")
        u = radial_field(alpha, koranyi_field(1))
        for q in _random_points(1, 20, seed=11):
            closed = radial_phi_laplacian(alpha, q, phi)
            assert phi_laplacian_fd(u, q, phi) == pytest.approx(closed, rel=1e-3)

    def test_left_invariance(self):
        """Test Δ^φ(α∘r̄)(q) = Δ^φ(α∘r)(q0⁻¹∘q)."""
        from src.core.heisenberg import (
            GroupMode,
            group_op,
            koranyi_field,
            phi_laplacian_analytic,
            radial_field,
            radial_phi_laplacian,
            translated_field,
        )
        from src.core.profiles import Profile

        alpha = Profile("t^3 + t", "alpha")
        phi = Profile("t^2", "phi")
        centers = _random_points(2, 5, seed=21)
        for q0, q in zip(centers, _random_points(2, 5, seed=22)):
            shifted = translated_field(radial_field(alpha, koranyi_field(2)), q0)
            lhs = phi_laplacian_analytic(shifted, q, phi)
            rhs = radial_phi_laplacian(alpha, group_op(q0, q, GroupMode.INVERSE_OF_FIRST_THEN_MULTIPLY), phi)
            assert lhs == pytest.approx(rhs, rel=1e-8)

    def test_vanishing_gradient_raises(self):
        """Test the FD operator refuses a flat field."""
        from src.core.errors import VanishingGradientError
        from src.core.heisenberg import constant_field, phi_laplacian_fd
        from src.core.profiles import Profile

        q = _random_points(1, 1)[0]
        with pytest.raises(VanishingGradientError):
            phi_laplacian_fd(constant_field(3, 1.0), q, Profile("t"))

    def test_singular_loci(self):
        """Test the radial operators refuse their singular sets."""
        from src.core.errors import SingularPointError
        from src.core.heisenberg import Point, RadialKind, radial_phi_laplacian
        from src.core.profiles import Profile

        ident = Profile("t")
        with pytest.raises(SingularPointError):
            radial_phi_laplacian(ident, Point.origin(1), ident, RadialKind.GAUGE)
        with pytest.raises(SingularPointError):
            radial_phi_laplacian(ident, Point((0.0, 0.0), 1.0), ident, RadialKind.STATIONARY)


class TestGeometry:
    """Test suite for the Geometry descriptor."""

    def test_dimensions_and_coefficients(self):
        """Test coordinate counts and radial coefficients."""
        from src.core.heisenberg import Geometry, RadialKind

        h = Geometry.heisenberg(2)
        assert h.dim == 5
        assert h.radial_coefficient() == 5
        assert h.radial_coefficient(RadialKind.STATIONARY) == 3
        e = Geometry.euclidean(4)
        assert e.dim == 4
        assert e.radial_coefficient() == 3

    def test_rejects_bad_index(self):
        """Test m must be a positive integer."""
        from src.core.heisenberg import Geometry

        with pytest.raises(ValueError):
            Geometry.heisenberg(0)
