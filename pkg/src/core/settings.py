"""
Solver settings shared by every numerical component.
"""

import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional

REPORT_DIR_ENV = "KO_REPORT_DIR"
LOG_LEVEL_ENV = "KO_LOG_LEVEL"


@dataclass(frozen=True)
class SolverSettings:
    """Tolerances, budgets and sampling defaults."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    fd_step: float = 1e-4
    grid_n: int = 40
    grid_min: float = 1e-4
    grid_max: float = 1e4
    node_budget: int = 200_000
    super_sigma_budget: int = 80
    sub_sigma_budget: int = 60
    tail_start: float = 10.0
    tail_doublings: int = 12
    slope_tolerance: float = 0.05
    stability_window: int = 4
    residual_slack: float = 1e-9
    fullspace_slack: float = 1e-6
    gluing_rate: float = 1.0
    nodes_per_decade: int = 32
    seed: int = 0

    def __post_init__(self):
        """Validate ranges."""
        for name in ("abs_tol", "rel_tol", "fd_step", "gluing_rate", "tail_start"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 < self.grid_min < self.grid_max:
            raise ValueError("grid range must satisfy 0 < grid_min < grid_max")
        if self.grid_n < 2:
            raise ValueError("grid_n must be at least 2")
        if self.stability_window < 2 or self.stability_window > self.tail_doublings:
            raise ValueError("stability_window must lie in [2, tail_doublings]")
        for name in (
            "node_budget",
            "super_sigma_budget",
            "sub_sigma_budget",
            "nodes_per_decade",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")

    def with_overrides(self, **overrides: Any) -> "SolverSettings":
        """Return a copy with the non-None overrides applied."""
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"Unknown settings: {', '.join(sorted(unknown))}")
        applied = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **applied) if applied else self

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return asdict(self)


DEFAULT_SETTINGS = SolverSettings()


def default_report_dir(explicit: Optional[str] = None) -> Path:
    """Resolve the output directory: explicit flag, then KO_REPORT_DIR, then cwd."""
    if explicit:
        return Path(explicit)
    env_dir = os.environ.get(REPORT_DIR_ENV)
    return Path(env_dir) if env_dir else Path.cwd()
