"""Check records shared by the library checks and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from .errors import CheckFailed
from .ring import EXACT, LaurentPoly, QSeries

PASS = "pass"
FAIL = "fail"
CONJ = "conjecture-support"


@dataclass
class CheckReport:
    name: str
    status: str = PASS
    window: Dict[str, Any] = field(default_factory=dict)
    counterexample: Optional[Dict[str, Any]] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status != FAIL

    def as_dict(self) -> Dict[str, Any]:
        out = {"name": self.name, "status": self.status, "window": self.window,
               "counterexample": self.counterexample}
        if self.details:
            out["details"] = self.details
        return out


def fmt_hi(h) -> str:
    return "exact" if h == EXACT else str(h)


def assert_same(name: str, lhs: LaurentPoly, rhs: LaurentPoly, **details) -> CheckReport:
    """Compare two polynomials on their common window or raise CheckFailed."""
    diff = lhs.first_difference(rhs)
    if diff is not None:
        c, e, a, b = diff
        raise CheckFailed(name, qexp=c, exps=e, lhs=a, rhs=b)
    return CheckReport(name, PASS, lhs.window_with(rhs), None, dict(details))


def assert_zero(name: str, poly: LaurentPoly, **details) -> CheckReport:
    return assert_same(name, poly, LaurentPoly.zero(poly.arity), **details)


def assert_series(name: str, lhs: QSeries, rhs: QSeries, **details) -> CheckReport:
    c = lhs.first_difference(rhs)
    if c is not None:
        raise CheckFailed(name, qexp=c, exps=(), lhs=lhs._c.get(c, 0), rhs=QSeries._lift(rhs)._c.get(c, 0))
    hi = min(lhs.hi, QSeries._lift(rhs).hi)
    return CheckReport(name, PASS, {"q_below": fmt_hi(hi)}, None, dict(details))
