"""Pass/fail bookkeeping returned by the checking operations."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any


@dataclass
class Check:
    name: str
    passed: bool
    measured: Any = None
    expected: Any = None
    tolerance: float | None = None
    note: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "measured": _jsonable(self.measured),
                "expected": _jsonable(self.expected), "tolerance": self.tolerance, "note": self.note}


@dataclass
class Report:
    title: str
    checks: list[Check] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, measured=None, expected=None, tolerance=None, note="") -> Check:
        check = Check(name, bool(passed), measured, expected, tolerance, note)
        self.checks.append(check)
        return check

    def extend(self, other: "Report", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.passed, c.measured, c.expected,
                                     c.tolerance, c.note))

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"title": self.title, "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks],
                "data": _jsonable(self.data)}

    def table(self) -> str:
        rows = [f"{'check':<48} {'measured':>22} {'expected':>22}  status"]
        for c in self.checks:
            rows.append(f"{c.name:<48} {_fmt(c.measured):>22} {_fmt(c.expected):>22}  "
                        f"{'PASS' if c.passed else 'FAIL'}")
        return "\n".join(rows)

    def __bool__(self):
        return self.passed


def _fmt(v) -> str:
    if isinstance(v, float):
        return "inf" if math.isinf(v) else f"{v:.10g}"
    if isinstance(v, (list, tuple)):
        return "(" + ", ".join(_fmt(x) for x in v) + ")"
    return str(v)


def _jsonable(v):
    import numpy as np

    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else "nan"))
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v
