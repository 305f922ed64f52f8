"""
Problem-spec file ingestion.

The file is a JSON document:

    {
      "geometry": {"kind": "heisenberg", "m": 1},
      "phi": "t",
      "rhs": {"form": "product", "f": "t^2", "l": "1"},
      "constants": {"tau": 0, "D": 1, "Lambda": 1},
      "tolerances": {"rel_tol": 1e-8}
    }

Every key is checked before any computation; unknown keys are rejected.
"""

import json
import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Dict, Optional, Union

from .errors import ExpressionError, SpecFileError
from .heisenberg import Geometry, GeometryKind
from .profiles import (
    GradientDifference,
    GradientProduct,
    ProblemSpec,
    Profile,
    StructuralConstants,
)
from .settings import DEFAULT_SETTINGS, SolverSettings

logger = logging.getLogger(__name__)

TOP_LEVEL_KEYS = {"geometry", "phi", "rhs", "constants", "tolerances"}
REQUIRED_KEYS = {"geometry", "phi", "rhs"}
RHS_KEYS = {"product": {"form", "f", "l"}, "difference": {"form", "f", "h", "g"}}
SETTINGS_KEYS = {f.name for f in fields(SolverSettings)}


@dataclass(frozen=True)
class SpecFile:
    """A parsed problem together with the solver settings it requests."""

    spec: ProblemSpec
    settings: SolverSettings
    source: Optional[Path] = None

    def to_dict(self) -> Dict[str, Any]:
        return self.spec.to_dict()


def _require_mapping(value: Any, where: str) -> Dict[str, Any]:
    if not isinstance(value, dict):
        raise SpecFileError(f"{where} must be an object")
    return value


def _reject_unknown(data: Dict[str, Any], allowed: set, where: str) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise SpecFileError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _profile(data: Dict[str, Any], key: str, where: str) -> Profile:
    source = data.get(key)
    if not isinstance(source, str):
        raise SpecFileError(f"{where}.{key} must be a profile expression string")
    try:
        return Profile(source, key)
    except ExpressionError as exc:
        raise SpecFileError(f"{where}.{key}: {exc}") from exc


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecFileError(f"{where} must be a number")
    return float(value)


def _geometry(data: Any) -> Geometry:
    data = _require_mapping(data, "geometry")
    _reject_unknown(data, {"kind", "m"}, "geometry")
    try:
        kind = GeometryKind(data.get("kind"))
    except ValueError:
        raise SpecFileError(f"geometry.kind must be 'heisenberg' or 'euclidean', got {data.get('kind')!r}")
    m = data.get("m")
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise SpecFileError(f"geometry.m must be a positive integer, got {m!r}")
    return Geometry(kind, m)


def _rhs(data: Any) -> Union[GradientProduct, GradientDifference]:
    data = _require_mapping(data, "rhs")
    form = data.get("form")
    if form not in RHS_KEYS:
        raise SpecFileError(f"rhs.form must be 'product' or 'difference', got {form!r}")
    _reject_unknown(data, RHS_KEYS[form], "rhs")
    missing = sorted(RHS_KEYS[form] - set(data))
    if missing:
        raise SpecFileError(f"rhs is missing: {', '.join(missing)}")
    if form == "product":
        return GradientProduct(_profile(data, "f", "rhs"), _profile(data, "l", "rhs"))
    return GradientDifference(_profile(data, "f", "rhs"), _profile(data, "h", "rhs"), _profile(data, "g", "rhs"))


def _constants(data: Any) -> StructuralConstants:
    data = _require_mapping(data, "constants")
    allowed = {f.name for f in fields(StructuralConstants)}
    _reject_unknown(data, allowed, "constants")
    values = {k: _number(v, f"constants.{k}") for k, v in data.items()}
    try:
        return StructuralConstants(**values)
    except ValueError as exc:
        raise SpecFileError(str(exc)) from exc


def _settings(data: Any, base: SolverSettings) -> SolverSettings:
    data = _require_mapping(data, "tolerances")
    _reject_unknown(data, SETTINGS_KEYS, "tolerances")
    typed: Dict[str, Any] = {}
    for name, value in data.items():
        number = _number(value, f"tolerances.{name}")
        typed[name] = int(number) if isinstance(getattr(base, name), int) else number
    try:
        return base.with_overrides(**typed)
    except ValueError as exc:
        raise SpecFileError(f"tolerances: {exc}") from exc


def parse_spec(data: Any, base: SolverSettings = DEFAULT_SETTINGS) -> SpecFile:
    """Validate a decoded JSON document and build the problem."""
    data = _require_mapping(data, "spec")
    _reject_unknown(data, TOP_LEVEL_KEYS, "spec")
    missing = sorted(REQUIRED_KEYS - set(data))
    if missing:
        raise SpecFileError(f"spec is missing: {', '.join(missing)}")
    spec = ProblemSpec(
        _geometry(data["geometry"]),
        _profile(data, "phi", "spec"),
        _rhs(data["rhs"]),
        _constants(data.get("constants", {})),
    )
    settings = _settings(data.get("tolerances", {}), base)
    return SpecFile(spec, settings)


def load_spec(path: Union[str, Path], base: SolverSettings = DEFAULT_SETTINGS) -> SpecFile:
    """Read and validate a problem-spec file.

    Raises:
        SpecFileError: unreadable file, malformed JSON or a schema violation
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as exc:
        raise SpecFileError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecFileError(f"{path} is not valid JSON: {exc}") from exc
    parsed = parse_spec(data, base)
    logger.info(f"Loaded problem from {path}: φ={parsed.spec.phi.source}, rhs={parsed.spec.rhs.form}")
    return SpecFile(parsed.spec, parsed.settings, path)
