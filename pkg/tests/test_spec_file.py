"""
Tests for problem-spec file ingestion.
"""
import json
import tempfile
from pathlib import Path

import pytest


def _document(**changes):
    data = {
        "geometry": {"kind": "heisenberg", "m": 1},
        "phi": "t",
        "rhs": {"form": "product", "f": "t^2", "l": "1"},
        "constants": {"tau": 0, "D": 1, "Lambda": 1},
    }
    data.update(changes)
    return data


class TestParseSpec:
    """Test suite for parse_spec."""

    def test_product_form(self):
        """Test a complete product-form document."""
        from src.core.heisenberg import GeometryKind
        from src.core.spec_file import parse_spec

        parsed = parse_spec(_document())
        spec = parsed.spec
        assert spec.geometry.kind is GeometryKind.HEISENBERG
        assert spec.geometry.m == 1
        assert not spec.is_difference
        assert spec.constants.D == 1.0
        assert parsed.to_dict()["rhs"] == {"form": "product", "f": "t^2", "l": "1"}

    def test_difference_form(self):
        """Test the gradient-difference form on R^3."""
        from src.core.spec_file import parse_spec

        parsed = parse_spec(
            _document(
                geometry={"kind": "euclidean", "m": 3},
                rhs={"form": "difference", "f": "t^2", "h": "exp(-t)", "g": "t^2"},
                constants={"theta": 0},
            )
        )
        assert parsed.spec.is_difference
        assert parsed.spec.geometry.is_euclidean

    def test_tolerances_become_settings(self):
        """Test tolerances override the base settings with the right types."""
        from src.core.spec_file import parse_spec

        settings = parse_spec(_document(tolerances={"rel_tol": 1e-6, "grid_n": 20})).settings
        assert settings.rel_tol == 1e-6
        assert settings.grid_n == 20
        assert isinstance(settings.grid_n, int)

    @pytest.mark.parametrize(
        "changes,message",
        [
            ({"extra": 1}, "unknown key"),
            ({"geometry": {"kind": "sphere", "m": 1}}, "geometry.kind"),
            ({"geometry": {"kind": "heisenberg", "m": 0}}, "geometry.m"),
            ({"geometry": {"kind": "heisenberg", "m": True}}, "geometry.m"),
            ({"rhs": {"form": "product", "f": "t^2"}}, "missing"),
            ({"rhs": {"form": "sum", "f": "t^2"}}, "rhs.form"),
            ({"rhs": {"form": "product", "f": "t^", "l": "1"}}, "rhs.f"),
            ({"phi": 3}, "spec.phi"),
            ({"constants": {"D": "one"}}, "constants.D"),
            ({"constants": {"D": -1}}, "out of range"),
            ({"constants": {"kappa": 1}}, "unknown key"),
            ({"tolerances": {"rel_tol": 0}}, "tolerances"),
            ({"tolerances": {"speed": 1}}, "unknown key"),
        ],
    )
    def test_schema_violations(self, changes, message):
        """Test each malformed document raises SpecFileError naming the problem."""
        from src.core.errors import SpecFileError
        from src.core.spec_file import parse_spec

        with pytest.raises(SpecFileError, match=message):
            parse_spec(_document(**changes))

    def test_missing_required_key(self):
        """Test a document without rhs is rejected."""
        from src.core.errors import SpecFileError
        from src.core.spec_file import parse_spec

        data = _document()
        del data["rhs"]
        with pytest.raises(SpecFileError, match="rhs"):
            parse_spec(data)

    def test_not_an_object(self):
        """Test a JSON array is rejected."""
        from src.core.errors import SpecFileError
        from src.core.spec_file import parse_spec

        with pytest.raises(SpecFileError):
            parse_spec([1, 2])


class TestLoadSpec:
    """Test suite for load_spec."""

    def test_load_from_disk(self):
        """Test a file round-trips into a problem with its source path."""
        from src.core.spec_file import load_spec

        with tempfile.TemporaryDirectory() as temp_dir:
            path = Path(temp_dir) / "problem.json"
            path.write_text(json.dumps(_document()), encoding="utf-8")
            parsed = load_spec(path)
            assert parsed.source == path
            assert parsed.spec.phi.source == "t"

    def test_malformed_json(self):
        """Test a broken file raises SpecFileError."""
        from src.core.errors import SpecFileError
        from src.core.spec_file import load_spec

        with tempfile.TemporaryDirectory() as temp_dir:
            path = Path(temp_dir) / "problem.json"
            path.write_text("{not json", encoding="utf-8")
            with pytest.raises(SpecFileError, match="not valid JSON"):
                load_spec(path)

    def test_missing_file(self):
        """Test an absent file raises SpecFileError."""
        from src.core.errors import SpecFileError
        from src.core.spec_file import load_spec

        with tempfile.TemporaryDirectory() as temp_dir:
            with pytest.raises(SpecFileError, match="cannot read"):
                load_spec(Path(temp_dir) / "absent.json")
