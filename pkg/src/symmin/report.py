"""Verification report records and the JSON-lines sink."""
from __future__ import annotations

import csv
import json
import math
import threading
from dataclasses import dataclass
from typing import IO, Iterable, List, Optional

SCHEMA_VERSION = "1"

FIELDS = (
    "schema_version",
    "space",
    "params",
    "check",
    "residual",
    "tolerance",
    "pass",
    "samples",
    "seed",
    "engine",
    "wall_time_ms",
)


@dataclass
class VerificationReport:
    """One check's outcome. ``pass`` is residual <= tolerance (a null
    residual never passes).

    Lower-bound checks (for instance a minimum gradient norm) are stated
    through an inverse quantity so that the predicate keeps this form.
    """

    space: str
    params: dict
    check: str
    residual: float
    tolerance: float
    samples: int
    seed: int
    engine: str
    wall_time_ms: int = 0

    @property
    def passed(self) -> bool:
        return bool(math.isfinite(self.residual) and self.residual <= self.tolerance)

    def record(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "space": self.space,
            "params": self.params,
            "check": self.check,
            # non-finite residuals (e.g. a rejected precondition) become null
            "residual": float(self.residual) if math.isfinite(self.residual) else None,
            "tolerance": float(self.tolerance),
            "pass": self.passed,
            "samples": int(self.samples),
            "seed": int(self.seed),
            "engine": self.engine,
            "wall_time_ms": int(self.wall_time_ms),
        }

    def to_json(self) -> str:
        return json.dumps(self.record(), sort_keys=True, ensure_ascii=False, allow_nan=False)


def validate_record(rec: dict) -> List[str]:
    """Schema problems of a decoded report line (empty when valid)."""
    problems = []
    missing = [k for k in FIELDS if k not in rec]
    extra = [k for k in rec if k not in FIELDS]
    if missing:
        problems.append(f"missing fields {missing}")
    if extra:
        problems.append(f"unexpected fields {extra}")
    if not missing:
        if rec["schema_version"] != SCHEMA_VERSION:
            problems.append(f"schema_version {rec['schema_version']!r}")
        res = rec["residual"]
        expected = res is not None and res <= rec["tolerance"]
        if rec["pass"] != expected:
            problems.append("pass does not match residual <= tolerance")
    return problems


class ReportSink:
    """Serialized, append-only JSON-lines writer with an optional CSV mirror."""

    def __init__(self, stream: Optional[IO[str]] = None, csv_stream: Optional[IO[str]] = None):
        self._stream = stream
        self._csv = csv.DictWriter(csv_stream, fieldnames=FIELDS) if csv_stream else None
        self._csv_header = False
        self._lock = threading.Lock()
        self.reports: List[VerificationReport] = []

    def write(self, report: VerificationReport) -> None:
        with self._lock:
            self.reports.append(report)
            if self._stream is not None:
                self._stream.write(report.to_json() + "\n")
                self._stream.flush()
            if self._csv is not None:
                if not self._csv_header:
                    self._csv.writeheader()
                    self._csv_header = True
                row = report.record()
                row["params"] = json.dumps(row["params"], sort_keys=True)
                self._csv.writerow(row)

    def extend(self, reports: Iterable[VerificationReport]) -> None:
        for r in reports:
            self.write(r)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.reports)
