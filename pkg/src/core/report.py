"""
RunReport and artifact emission.

report.json holds everything that is a function of the problem, the
settings and the seed, written with sorted keys so reruns are
byte-identical. Wall-clock figures go to timings.json instead.
"""

import csv
import json
import logging
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from jinja2 import Environment, FileSystemLoader, TemplateNotFound, select_autoescape

try:
    import psutil

    PSUTIL_AVAILABLE = True
except ImportError:
    PSUTIL_AVAILABLE = False

logger = logging.getLogger(__name__)

REPORT_VERSION = 1
TEMPLATE_DIR = Path(__file__).resolve().parents[2] / "templates"
SUMMARY_TEMPLATE = "summary.md.j2"
BARRIER_COLUMNS = ("t", "alpha", "alpha_prime", "alpha_second")


def to_jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become the strings 'inf', '-inf', 'nan'."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if value is None or isinstance(value, str):
        return value
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    return str(value)


@dataclass
class PhaseTiming:
    name: str
    seconds: float
    rss_mb: Optional[float] = None

    def to_dict(self) -> dict:
        return {"name": self.name, "seconds": self.seconds, "rss_mb": self.rss_mb}


class PhaseTimer:
    """Wall-clock (and resident memory when psutil is present) per phase."""

    def __init__(self):
        self.phases: List[PhaseTiming] = []
        self.logger = logging.getLogger(__name__)

    @contextmanager
    def phase(self, name: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            rss = None
            if PSUTIL_AVAILABLE:
                rss = psutil.Process().memory_info().rss / 1024 / 1024  # MB
            self.phases.append(PhaseTiming(name, elapsed, rss))
            self.logger.debug(f"Phase {name} took {elapsed:.3f}s")

    def to_dict(self) -> dict:
        return {
            "psutil_available": PSUTIL_AVAILABLE,
            "phases": [p.to_dict() for p in self.phases],
            "total_seconds": sum(p.seconds for p in self.phases),
        }


@dataclass
class RunReport:
    """Everything one CLI command produced."""

    command: str
    spec: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    settings: Dict[str, Any] = field(default_factory=dict)
    sections: Dict[str, Any] = field(default_factory=dict)
    certificates: Dict[str, bool] = field(default_factory=dict)
    inconclusive: List[str] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)
    barrier_table: Optional[np.ndarray] = None
    residual_rows: List[Tuple[str, Tuple[float, ...], float]] = field(default_factory=list)
    timer: PhaseTimer = field(default_factory=PhaseTimer)

    def record(self, name: str, payload: Any) -> None:
        self.sections[name] = payload

    def certify(self, name: str, passed: bool, payload: Any = None) -> None:
        self.certificates[name] = bool(passed)
        if payload is not None:
            self.sections.update(payload)

    def fail(self, name: str, error: str) -> None:
        """A certificate that could not be produced counts as failed."""
        self.certificates[name] = False
        self.errors.append(f"{name}: {error}")

    def mark_inconclusive(self, name: str) -> None:
        if name not in self.inconclusive:
            self.inconclusive.append(name)

    def add_residuals(self, label: str, points: Sequence[Tuple[Sequence[float], float]]) -> None:
        self.residual_rows.extend((label, tuple(loc), float(r)) for loc, r in points)

    @property
    def status(self) -> str:
        if not all(self.certificates.values()):
            return "fail"
        if self.inconclusive:
            return "inconclusive"
        return "pass"

    @property
    def exit_code(self) -> int:
        return {"pass": 0, "fail": 1, "inconclusive": 2}[self.status]

    def to_dict(self) -> dict:
        return to_jsonable(
            {
                "version": REPORT_VERSION,
                "command": self.command,
                "spec": self.spec,
                "seed": self.seed,
                "settings": self.settings,
                "status": self.status,
                "certificates": self.certificates,
                "inconclusive": self.inconclusive,
                "errors": self.errors,
                "results": self.sections,
            }
        )


def _write_atomic(path: Path, text: str) -> None:
    temp_file = path.with_suffix(path.suffix + ".tmp")
    with open(temp_file, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    temp_file.replace(path)


def _write_barrier_csv(path: Path, table: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(BARRIER_COLUMNS)
        for row in table:
            writer.writerow([repr(float(v)) for v in row])


def _write_residuals_csv(path: Path, rows: List[Tuple[str, Tuple[float, ...], float]]) -> None:
    width = max((len(loc) for _, loc, _ in rows), default=1)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["certificate"] + [f"x{k}" for k in range(width)] + ["residual"])
        for label, loc, residual in rows:
            coords = [repr(float(v)) for v in loc] + [""] * (width - len(loc))
            writer.writerow([label] + coords + [repr(residual)])


def render_summary(report: RunReport, template_dir: Path = TEMPLATE_DIR) -> Optional[str]:
    """Markdown summary, or None when the template is not available."""
    env = Environment(
        loader=FileSystemLoader(str(template_dir)),
        autoescape=select_autoescape(enabled_extensions=()),
        keep_trailing_newline=True,
    )
    try:
        template = env.get_template(SUMMARY_TEMPLATE)
    except TemplateNotFound:
        logger.warning(f"Summary template not found in {template_dir}; skipping summary.md")
        return None
    return template.render(report=report.to_dict())


def emit(
    report: RunReport,
    out_dir: Path,
    csv_dir: Optional[Path] = None,
    template_dir: Path = TEMPLATE_DIR,
) -> Dict[str, Path]:
    """Write report.json, summary.md and timings.json, plus the CSV tables when asked.

    Args:
        report: Finished run
        out_dir: Directory for report.json, summary.md and timings.json
        csv_dir: Directory for barrier.csv and residuals.csv; no CSV when None
        template_dir: Where summary.md.j2 lives

    Returns:
        Mapping artifact name -> written path
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: Dict[str, Path] = {}

    report_path = out_dir / "report.json"
    _write_atomic(report_path, json.dumps(report.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    written["report.json"] = report_path

    summary = render_summary(report, template_dir)
    if summary is not None:
        summary_path = out_dir / "summary.md"
        _write_atomic(summary_path, summary)
        written["summary.md"] = summary_path

    timings_path = out_dir / "timings.json"
    _write_atomic(timings_path, json.dumps(report.timer.to_dict(), indent=2, sort_keys=True) + "\n")
    written["timings.json"] = timings_path

    if csv_dir is not None:
        csv_dir = Path(csv_dir)
        csv_dir.mkdir(parents=True, exist_ok=True)
        if report.barrier_table is not None:
            _write_barrier_csv(csv_dir / "barrier.csv", report.barrier_table)
            written["barrier.csv"] = csv_dir / "barrier.csv"
        if report.residual_rows:
            _write_residuals_csv(csv_dir / "residuals.csv", report.residual_rows)
            written["residuals.csv"] = csv_dir / "residuals.csv"

    logger.info(f"Wrote {', '.join(sorted(written))} to {out_dir}")
    return written
