"""
Tests for solver settings and output-directory resolution.
"""
import os
from pathlib import Path
from unittest.mock import patch

import pytest


class TestSolverSettings:
    """Test suite for SolverSettings."""

    def test_defaults(self):
        """Test the documented defaults."""
        from src.core.settings import DEFAULT_SETTINGS

        assert DEFAULT_SETTINGS.rel_tol == 1e-8
        assert DEFAULT_SETTINGS.fd_step == 1e-4
        assert DEFAULT_SETTINGS.super_sigma_budget == 80
        assert DEFAULT_SETTINGS.sub_sigma_budget == 60
        assert DEFAULT_SETTINGS.seed == 0

    def test_overrides_skip_none(self):
        """Test None overrides leave the field alone."""
        from src.core.settings import DEFAULT_SETTINGS

        settings = DEFAULT_SETTINGS.with_overrides(rel_tol=1e-6, seed=None)
        assert settings.rel_tol == 1e-6
        assert settings.seed == 0
        assert DEFAULT_SETTINGS.with_overrides(seed=None) is DEFAULT_SETTINGS

    def test_unknown_override(self):
        """Test misspelled settings are rejected."""
        from src.core.settings import DEFAULT_SETTINGS

        with pytest.raises(ValueError, match="rel_toll"):
            DEFAULT_SETTINGS.with_overrides(rel_toll=1e-6)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"rel_tol": 0.0},
            {"fd_step": -1e-4},
            {"grid_min": 10.0, "grid_max": 1.0},
            {"grid_n": 1},
            {"stability_window": 20},
            {"node_budget": 0},
        ],
    )
    def test_invalid_ranges(self, overrides):
        """Test out-of-range values raise."""
        from src.core.settings import SolverSettings

        with pytest.raises(ValueError):
            SolverSettings(**overrides)

    def test_to_dict(self):
        """Test every field is serialized."""
        from src.core.settings import SolverSettings

        data = SolverSettings(seed=7).to_dict()
        assert data["seed"] == 7
        assert "gluing_rate" in data


class TestReportDir:
    """Test suite for default_report_dir."""

    def test_explicit_wins(self):
        """Test the explicit flag beats the environment."""
        from src.core.settings import default_report_dir

        with patch.dict(os.environ, {"KO_REPORT_DIR": "/tmp/env-reports"}):
            assert default_report_dir("out") == Path("out")

    def test_environment(self):
        """Test KO_REPORT_DIR is used without a flag."""
        from src.core.settings import default_report_dir

        with patch.dict(os.environ, {"KO_REPORT_DIR": "/tmp/env-reports"}):
            assert default_report_dir() == Path("/tmp/env-reports")

    def test_falls_back_to_cwd(self):
        """Test the working directory is the last resort."""
        from src.core.settings import default_report_dir

        with patch.dict(os.environ, {}, clear=True):
            assert default_report_dir() == Path.cwd()
