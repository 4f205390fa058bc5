"""Machine-readable check results.

A :class:`Check` is one yes/no verdict with an optional witness (a vector
or basis pair exhibiting a failure).  A :class:`Report` groups checks and
carries any computed data worth surfacing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .exact import Matrix, Subspace


def jsonable(value: Any) -> Any:
    """Convert exact values to JSON-friendly structures (rationals as strings)."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Matrix):
        return value.to_strings()
    if isinstance(value, Subspace):
        return value.basis.T.to_strings()
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, "to_dict"):
        return value.to_dict()
    raise TypeError(f"cannot serialise {type(value).__name__}")


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    witness: Any = None
    data: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"name": self.name, "passed": self.passed, "detail": self.detail}
        if self.witness is not None:
            out["witness"] = jsonable(self.witness)
        if self.data:
            out["data"] = jsonable(self.data)
        return out

    def __bool__(self) -> bool:
        return self.passed


@dataclass
class Report:
    name: str
    checks: list[Check] = field(default_factory=list)
    data: dict = field(default_factory=dict)
    notices: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, other: "Report", prefix: str | None = None) -> None:
        for c in other.checks:
            if prefix:
                c = Check(f"{prefix}.{c.name}", c.passed, c.detail, c.witness, c.data)
            self.checks.append(c)
        self.notices.extend(other.notices)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def first_failure(self) -> Check | None:
        fails = self.failures()
        return fails[0] if fails else None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "data": jsonable(self.data),
            "notices": list(self.notices),
        }

    def __bool__(self) -> bool:
        return self.passed
