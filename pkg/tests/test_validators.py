"""
Tests for the structural hypothesis validators.
"""
import pytest


class TestValidateBase:
    """Test suite for (Φ), (F), (L) and (Φ&L)."""

    def test_p_laplacian_superlinear_all_pass(self):
        """Test φ = t, f = t², l = 1 passes every base hypothesis."""
        from src.core.profiles import product_spec
        from src.core.validators import BASE_HYPOTHESES, CheckTier, validate_base

        report = validate_base(product_spec("t", "t^2", "1"))
        assert report.passed, report.to_dict()
        assert set(report.verdicts) == set(BASE_HYPOTHESES)
        assert report["Phi&L"].tier is CheckTier.EXACT_POWER_LAW

    def test_kernel_not_integrable_at_zero(self):
        """Test φ = t^τ, l = t^(τ+1) with τ = 1 fails (Φ&L) at 0⁺."""
        from src.core.profiles import product_spec
        from src.core.validators import Status, validate_base

        verdict = validate_base(product_spec("t", "t^2", "t^2"))["Phi&L"]
        assert verdict.status is Status.FAIL
        assert verdict.witness is not None
        assert "0⁺" in verdict.reason

    def test_bounded_k_fails(self):
        """Test tφ′/l integrable at +∞ is reported."""
        from src.core.profiles import product_spec
        from src.core.validators import Status, validate_base

        verdict = validate_base(product_spec("t", "t^2", "1 + t^3"))["Phi&L"]
        assert verdict.status is Status.FAIL
        assert "bounded" in verdict.reason

    def test_monotone_gradient_factor_is_one_monotone(self):
        """Test l = 1 + 0.5 t^0.3 with C = 1 passes (L)."""
        from src.core.profiles import product_spec
        from src.core.validators import Status, validate_base

        verdict = validate_base(product_spec("t", "t^2", "1 + 0.5*t^0.3", C=1.0))["L"]
        assert verdict.status is Status.PASS
        assert verdict.details["C_estimate"] == pytest.approx(1.0)

    def test_decreasing_gradient_factor_needs_larger_c(self):
        """Test a decreasing l violates C = 1 but its estimate is reported."""
        from src.core.profiles import product_spec
        from src.core.validators import Status, validate_base

        spec = product_spec("t", "t^2", "1 + 1/(1 + t)", C=1.0)
        verdict = validate_base(spec)["L"]
        assert verdict.status is Status.FAIL
        assert verdict.details["C_estimate"] > 1.5

    def test_undeclared_c_is_estimated(self):
        """Test (L) without C passes with an estimate."""
        from src.core.profiles import product_spec
        from src.core.validators import Status, validate_base

        verdict = validate_base(product_spec("t", "t^2", "1 + 1/(1 + t)"))["L"]
        assert verdict.status is Status.PASS
        assert "estimated" in verdict.reason

    def test_constant_f_is_not_increasing(self):
        """Test (F) fails for a constant f."""
        from src.core.profiles import product_spec
        from src.core.validators import Status, validate_base

        verdict = validate_base(product_spec("t", "2"))["F"]
        assert verdict.status is Status.FAIL
        assert verdict.witness["f"] == verdict.witness["f_next"]

    def test_phi_must_vanish_at_zero(self):
        """Test (Φ) fails when φ(0) ≠ 0."""
        from src.core.profiles import product_spec
        from src.core.validators import Status, validate_base

        verdict = validate_base(product_spec("1 + t", "t^2"))["Phi"]
        assert verdict.status is Status.FAIL
        assert verdict.witness == {"t": 0.0, "phi": 1.0}

    def test_failing_verdict_requires_witness(self):
        """Test a FAIL without a witness cannot be built."""
        from src.core.validators import CheckTier, HypothesisVerdict, Status

        with pytest.raises(ValueError):
            HypothesisVerdict("Phi", Status.FAIL, CheckTier.GRID)


class TestValidateHomogeneity:
    """Test suite for (Φ2), (L2), (Φ3) and the K-homogeneity bound."""

    @pytest.mark.parametrize("tau", [0.0, 0.5, 1.0, 2.0])
    def test_phi2_passes_for_tau_up_to_p_minus_one(self, tau):
        """Test φ = t² (p = 3) satisfies (Φ2) with D = 1 for τ ∈ [0, 2]."""
        from src.core.profiles import product_spec
        from src.core.validators import Status, validate_homogeneity

        report = validate_homogeneity(product_spec("t^2", "t^3", tau=tau, D=1.0))
        assert report["Phi2"].status is Status.PASS
        assert report["Phi2_integrated"].status is Status.PASS

    def test_phi2_fails_beyond_p_minus_one(self):
        """Test τ > p - 1 produces a witness."""
        from src.core.profiles import product_spec
        from src.core.validators import Status, validate_homogeneity

        verdict = validate_homogeneity(product_spec("t^2", "t^3", tau=2.5, D=1.0))["Phi2"]
        assert verdict.status is Status.FAIL
        assert verdict.witness["lhs"] > verdict.witness["rhs"]
        assert 0 < verdict.witness["s"] < 1

    @pytest.mark.parametrize("p", [2.0, 3.0])
    def test_phi3_and_kappa_for_p_laplacian(self, p):
        """Test (Φ3) and K-homogeneity hold with B = 1, θ = 2 - p."""
        from src.core.profiles import product_spec
        from src.core.validators import CheckTier, Status, validate_homogeneity

        spec = product_spec(f"t^{p - 1}", "t^3", theta=2.0 - p, B=1.0)
        report = validate_homogeneity(spec)
        for name in ("Phi3", "Phi3_integrated", "kappa"):
            assert report[name].status is Status.PASS, report[name].to_dict()
        assert report["kappa"].tier is CheckTier.EXACT_POWER_LAW

    def test_phi3_fails_with_too_small_theta(self):
        """Test φ = t with θ = -0.5 violates (Φ3)."""
        from src.core.profiles import product_spec
        from src.core.validators import Status, validate_homogeneity

        report = validate_homogeneity(product_spec("t", "t^3", theta=-0.5, B=1.0), hypotheses=["Phi3"])
        assert report["Phi3"].status is Status.FAIL

    def test_l2_for_polynomial_gradient_factor(self):
        """Test l = 1 + t satisfies (L2) with τ = 0, Λ = 1."""
        from src.core.profiles import product_spec
        from src.core.validators import CheckTier, Status, validate_homogeneity

        report = validate_homogeneity(product_spec("t", "t^3", "1 + t", tau=0.0, Lambda=1.0))
        assert report["L2"].status is Status.PASS
        assert report["L2"].tier is CheckTier.EXACT_POWER_LAW
        assert report["L2_p"].status is Status.PASS

    def test_only_declared_constants_are_checked(self):
        """Test hypotheses without constants are skipped by default."""
        from src.core.profiles import product_spec
        from src.core.validators import validate_homogeneity

        report = validate_homogeneity(product_spec("t", "t^3", theta=0.0, B=1.0))
        assert set(report.verdicts) == {"Phi3", "Phi3_integrated", "kappa"}

    def test_requested_hypothesis_needs_constants(self):
        """Test an explicit request without constants raises."""
        from src.core.errors import MissingConstantError
        from src.core.profiles import product_spec
        from src.core.validators import validate_homogeneity

        with pytest.raises(MissingConstantError, match="Phi2"):
            validate_homogeneity(product_spec("t", "t^3"), hypotheses=["Phi2"])

    def test_unknown_hypothesis(self):
        """Test an unknown name is rejected."""
        from src.core.profiles import product_spec
        from src.core.validators import validate_homogeneity

        with pytest.raises(ValueError, match="Phi9"):
            validate_homogeneity(product_spec("t", "t^3"), hypotheses=["Phi9"])

    def test_finer_grid_does_not_flip_pass(self):
        """Test enlarging the grid keeps true power-law inequalities passing."""
        from src.core.profiles import product_spec
        from src.core.settings import SolverSettings
        from src.core.validators import Status, validate_homogeneity

        spec = product_spec("t^2", "t^3", "1 + t", tau=1.0, D=1.0, Lambda=1.0, theta=-1.0, B=1.0)
        coarse = validate_homogeneity(spec, SolverSettings(grid_n=20))
        fine = validate_homogeneity(spec, SolverSettings(grid_n=80))
        for name, verdict in coarse.verdicts.items():
            if verdict.status is Status.PASS:
                assert fine[name].status is Status.PASS, name


class TestValidateGradientCase:
    """Test suite for (H), (Φ0), (G), (G̃) and (p&L)."""

    def test_g_matches_p(self):
        """Test g = t^p passes (G) for φ = t^(p-1), τ = 0."""
        from src.core.profiles import difference_spec
        from src.core.validators import Status, validate_gradient_case

        spec = difference_spec("t", "t^2", "exp(-t)", "t^2", tau=0.0, Dtilde=1.0)
        report = validate_gradient_case(spec)
        assert report["G"].status is Status.PASS
        assert report["H"].status is Status.PASS
        assert report["H_L1_infinity"].status is Status.PASS
        assert report["Phi0"].status is Status.PASS

    def test_g_with_wrong_exponent_fails(self):
        """Test g = t³ against φ = t fails (G)."""
        from src.core.profiles import difference_spec
        from src.core.validators import Status, validate_gradient_case

        spec = difference_spec("t", "t^2", "exp(-t)", "t^3", tau=0.0, Dtilde=1.0)
        assert validate_gradient_case(spec, hypotheses=["G"])["G"].status is Status.FAIL

    def test_gtilde_on_euclidean_geometry(self):
        """Test the Euclidean default picks (G̃)."""
        from src.core.profiles import difference_spec
        from src.core.validators import Status, validate_gradient_case

        spec = difference_spec("t", "t^2", "exp(-t)", "t^2", m=3, euclidean=True, D=1.0)
        report = validate_gradient_case(spec)
        assert "G" not in report
        assert report["Gtilde"].status is Status.PASS

    def test_increasing_h_fails(self):
        """Test (H) requires h non-increasing."""
        from src.core.profiles import difference_spec
        from src.core.validators import Status, validate_gradient_case

        spec = difference_spec("t", "t^2", "t", "t^2")
        verdict = validate_gradient_case(spec, hypotheses=["H"])["H"]
        assert verdict.status is Status.FAIL
        assert verdict.witness["h_next"] > verdict.witness["h"]

    def test_p_and_l(self):
        """Test l = 1 passes (p&L) with B₁ = 1, µ = 0."""
        from src.core.profiles import product_spec
        from src.core.validators import Status, validate_gradient_case

        spec = product_spec("t", "t^2", "1", B1=1.0, B2=3.0, mu=0.0)
        report = validate_gradient_case(spec)
        assert report["p&L"].status is Status.PASS
        assert report["Phi0"].status is Status.PASS

    def test_wrong_rhs_kind(self):
        """Test difference-only checks refuse the product form."""
        from src.core.errors import WrongRhsKindError
        from src.core.profiles import product_spec
        from src.core.validators import validate_gradient_case

        with pytest.raises(WrongRhsKindError):
            validate_gradient_case(product_spec("t", "t^2"), hypotheses=["H"])

    def test_validate_all_merges(self):
        """Test validate_all combines the three families."""
        from src.core.profiles import product_spec
        from src.core.validators import validate_all

        spec = product_spec("t", "t^2", "1", theta=0.0, B=1.0, B1=1.0, B2=1.0, mu=0.0)
        report = validate_all(spec)
        assert {"Phi", "Phi3", "kappa", "p&L"} <= set(report.verdicts)
        assert report.passed
        data = report.to_dict()
        assert list(data["hypotheses"]) == sorted(data["hypotheses"])
