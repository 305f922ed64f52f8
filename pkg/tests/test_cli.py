"""
Tests for the kocert command-line interface.
"""
import json
import os
import tempfile
from pathlib import Path
from unittest.mock import patch

import pytest


def _write_problem(directory, phi="t", f="t^2", l="1", **constants):
    path = Path(directory) / "problem.json"
    data = {
        "geometry": {"kind": "heisenberg", "m": 1},
        "phi": phi,
        "rhs": {"form": "product", "f": f, "l": l},
        "constants": constants,
    }
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def _run(args):
    from src.cli.main import main

    return main([str(a) for a in args])


def _load_report(directory):
    return json.loads((Path(directory) / "report.json").read_text(encoding="utf-8"))


class TestValidateCommand:
    """Test suite for kocert validate."""

    def test_passing_problem(self):
        """Test a problem meeting every base hypothesis exits 0."""
        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir)
            assert _run(["validate", problem, "--out", temp_dir]) == 0
            report = _load_report(temp_dir)
            assert report["status"] == "pass"
            assert report["certificates"]["Phi&L"] is True
            assert (Path(temp_dir) / "summary.md").exists()
            assert (Path(temp_dir) / "timings.json").exists()

    def test_failing_hypothesis(self):
        """Test a failed hypothesis exits 1."""
        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir, l="t^2")
            assert _run(["validate", problem, "--out", temp_dir]) == 1
            assert _load_report(temp_dir)["certificates"]["Phi&L"] is False

    def test_report_dir_from_environment(self):
        """Test KO_REPORT_DIR is used when --out is omitted."""
        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir)
            out = Path(temp_dir) / "env-out"
            with patch.dict(os.environ, {"KO_REPORT_DIR": str(out)}):
                assert _run(["validate", problem]) == 0
            assert (out / "report.json").exists()


class TestKoCommand:
    """Test suite for kocert ko."""

    def test_holds(self):
        """Test a superlinear problem holds and runs the σ checks."""
        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir)
            assert _run(["ko", problem, "--out", temp_dir]) == 0
            report = _load_report(temp_dir)
            assert report["results"]["ko"]["KO"]["verdict"] == "Holds"
            assert report["certificates"]["sigma_scaling[0.5]"] is True

    def test_fails_is_a_successful_decision(self):
        """Test a failing condition still exits 0."""
        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir, f="t^0.5")
            assert _run(["ko", problem, "--out", temp_dir]) == 0
            assert _load_report(temp_dir)["results"]["ko"]["KO"]["verdict"] == "Fails"

    def test_borderline_is_inconclusive(self):
        """Test the borderline power law exits 2."""
        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir, f="t")
            assert _run(["ko", problem, "--out", temp_dir]) == 2
            assert _load_report(temp_dir)["inconclusive"] == ["KO"]

    def test_exponential_rhs(self):
        """Test f = e^t holds on the numeric tier and passes the σ checks."""
        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir, f="exp(t)")
            assert _run(["ko", problem, "--out", temp_dir]) == 0
            report = _load_report(temp_dir)
            assert report["results"]["ko"]["KO"]["verdict"] == "Holds"
            assert report["results"]["ko"]["KO"]["tier"] == "NumericTail"
            assert report["certificates"]["sigma_scaling[0.5]"] is True


class TestBuildCommands:
    """Test suite for the barrier construction commands."""

    def test_build_super_with_csv(self):
        """Test build-super writes the barrier table."""
        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir)
            csv_dir = Path(temp_dir) / "csv"
            code = _run(["build-super", problem, "--out", temp_dir, "--emit-csv", csv_dir, "--samples", 50])
            assert code == 0
            rows = (csv_dir / "barrier.csv").read_text(encoding="utf-8").splitlines()
            assert len(rows) == 51
            assert (csv_dir / "residuals.csv").exists()
            report = _load_report(temp_dir)
            assert report["results"]["barrier"]["kind"] == "SupersolutionKO"
            assert report["certificates"]["barrier_window"] is True

    def test_build_super_exponential(self):
        """Test build-super constructs and certifies the f = e^t barrier."""
        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir, f="exp(t)")
            assert _run(["build-super", problem, "--samples", 200, "--out", temp_dir]) == 0
            report = _load_report(temp_dir)
            assert report["certificates"]["construction"] is True
            assert report["certificates"]["radial_residual"] is True

    def test_bounded_needs_ceiling(self):
        """Test build-super-bounded without --ceiling is a usage error."""
        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir)
            assert _run(["build-super-bounded", problem, "--out", temp_dir]) == 3

    def test_bounded(self):
        """Test build-super-bounded reaches its ceiling."""
        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir)
            assert _run(["build-super-bounded", problem, "--ceiling", 10, "--out", temp_dir, "--samples", 100]) == 0

    def test_bad_window(self):
        """Test eps ≥ eta exits 3."""
        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir)
            assert _run(["build-super", problem, "--eps", 0.5, "--eta", 0.2, "--out", temp_dir]) == 3

    def test_build_sub(self):
        """Test build-sub certifies the C¹ junction."""
        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir, f="t^0.5")
            assert _run(["build-sub", problem, "--out", temp_dir, "--samples", 200]) == 0
            assert _load_report(temp_dir)["certificates"]["junction_C1"] is True

    def test_annulus(self):
        """Test the annulus command checks both boundary values."""
        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir)
            args = ["annulus", problem, "--radius", 2, "--a", 0, "--u-star", 1, "--out", temp_dir]
            assert _run(args) == 0
            assert _load_report(temp_dir)["certificates"]["boundary_conditions"] is True

    def test_annulus_needs_arguments(self):
        """Test the annulus command without R is a usage error."""
        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir)
            assert _run(["annulus", problem, "--out", temp_dir]) == 3


class TestVerifyAndReports:
    """Test suite for verify, geometry and full-report."""

    def test_verify_subsolution(self):
        """Test verify --barrier sub certifies fullspace and weak residuals."""
        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir, f="t^0.5")
            args = ["verify", problem, "--barrier", "sub", "--points", 40, "--samples", 200, "--out", temp_dir]
            assert _run(args) == 0
            certificates = _load_report(temp_dir)["certificates"]
            assert {"fullspace_residual", "radial_crosscheck", "weak_residual"} <= set(certificates)

    def test_geometry(self):
        """Test the identity suites on H¹."""
        with tempfile.TemporaryDirectory() as temp_dir:
            assert _run(["geometry", "--m", 1, "--trials", 5, "--out", temp_dir]) == 0
            report = _load_report(temp_dir)
            assert report["certificates"]["H1.commutators"] is True

    def test_full_report_builds_supersolution(self):
        """Test full-report picks the supersolution when (KO) holds."""
        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir)
            args = ["full-report", problem, "--points", 30, "--samples", 100, "--out", temp_dir]
            assert _run(args) == 0
            report = _load_report(temp_dir)
            assert report["results"]["barrier"]["kind"] == "SupersolutionKO"
            assert "structural" in report["results"]


class TestLibraryFailures:
    """Test suite for library errors raised outside the builders."""

    def test_sampling_failure_fails_a_certificate(self):
        """Test an inversion error while tabulating the barrier exits 1 with a report."""
        from src.core.errors import InversionError

        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir)
            with patch("src.core.barriers.Barrier.sample", side_effect=InversionError("no bracket")):
                assert _run(["build-super", problem, "--samples", 50, "--out", temp_dir]) == 1
            report = _load_report(temp_dir)
            assert report["certificates"]["barrier_table"] is False
            assert any("no bracket" in e for e in report["errors"])

    def test_validation_failure_fails_a_certificate(self):
        """Test a quadrature error in the validators exits 1 with a report."""
        from src.core.errors import QuadratureError

        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir)
            with patch("src.cli.main.validate_all", side_effect=QuadratureError("budget exhausted")):
                assert _run(["validate", problem, "--out", temp_dir]) == 1
            assert _load_report(temp_dir)["certificates"]["structural"] is False

    def test_domain_error_is_not_a_usage_error(self):
        """Test a profile domain error during the decision exits 1, not 3."""
        from src.core.errors import ProfileDomainError

        with tempfile.TemporaryDirectory() as temp_dir:
            problem = _write_problem(temp_dir)
            with patch("src.cli.main.decide_ko", side_effect=ProfileDomainError("log of 0")):
                assert _run(["ko", problem, "--out", temp_dir]) == 1
            assert _load_report(temp_dir)["certificates"]["ko_decision"] is False


class TestUsageErrors:
    """Test suite for exit status 3."""

    def test_malformed_json(self):
        """Test a broken problem file exits 3."""
        with tempfile.TemporaryDirectory() as temp_dir:
            problem = Path(temp_dir) / "problem.json"
            problem.write_text("{", encoding="utf-8")
            assert _run(["validate", problem, "--out", temp_dir]) == 3

    def test_missing_file(self):
        """Test an absent problem file exits 3."""
        with tempfile.TemporaryDirectory() as temp_dir:
            assert _run(["ko", Path(temp_dir) / "absent.json", "--out", temp_dir]) == 3

    def test_unknown_command(self):
        """Test argparse errors exit with status 3."""
        with pytest.raises(SystemExit) as exc_info:
            _run(["explode"])
        assert exc_info.value.code == 3
