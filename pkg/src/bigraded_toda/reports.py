"""Uniform pass/fail records for identity checks."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, List, Optional

from .algebra import AlgebraElement, format_element

SCHEMA_VERSION = 1


@dataclass
class CheckReport:
    identity: str
    indices: list
    passed: bool
    max_eps_order_checked: Optional[int] = None
    first_failing_coefficient: Optional[str] = None
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "identity": self.identity,
            "indices": [_plain(i) for i in self.indices],
            "pass": self.passed,
            "max_eps_order_checked": self.max_eps_order_checked,
        }
        if self.first_failing_coefficient is not None:
            out["first_failing_coefficient"] = self.first_failing_coefficient
        if self.detail:
            out["detail"] = self.detail
        return out

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        idx = " ".join(str(_plain(i)) for i in self.indices)
        tail = f" first failure: {self.first_failing_coefficient}" if self.first_failing_coefficient else ""
        return f"[{status}] {self.identity} {idx}{tail}"

    def __bool__(self):
        return self.passed


def _plain(i: Any):
    if hasattr(i, "alpha"):
        return [i.alpha, i.p]
    if isinstance(i, (list, tuple)):
        return [_plain(x) for x in i]
    return i


def _first_failure(el: AlgebraElement) -> str:
    order = el.eps_order()
    return f"eps^{order}: {format_element(el.eps_coefficient(order))}"


def element_report(identity: str, indices: list, residual: AlgebraElement, K: int, **detail) -> CheckReport:
    """PASS iff the residual element vanishes identically to eps**K."""
    if residual.is_zero():
        return CheckReport(identity, indices, True, K, detail=detail)
    return CheckReport(identity, indices, False, K, _first_failure(residual), detail=detail)


def operator_report(identity: str, indices: list, residual, K: int, **detail) -> CheckReport:
    """PASS iff every exact coefficient of a (differential-)difference residual vanishes."""
    parts = residual.parts if hasattr(residual, "parts") else {0: residual}
    for j in sorted(parts):
        op = parts[j]
        for k in sorted(op.coeffs):
            c = op.coeffs[k]
            if not c.is_zero():
                where = f"Lambda^{k}" + (f" (eps d)^{j}" if j else "")
                return CheckReport(identity, indices, False, K, f"{where} {_first_failure(c)}", detail=detail)
    return CheckReport(identity, indices, True, K, detail=detail)


def summarize(reports: List[CheckReport]) -> dict:
    reports = sorted(reports, key=lambda r: (r.identity, json.dumps(r.to_json()["indices"])))
    return {
        "schema": SCHEMA_VERSION,
        "pass": all(r.passed for r in reports),
        "reports": [r.to_json() for r in reports],
    }


__all__ = ["CheckReport", "SCHEMA_VERSION", "element_report", "operator_report", "summarize"]
