"""Shared evaluation-result container."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class EvalResult:
    value: float
    abs_err_est: float
    method: str
    diagnostics: dict = field(default_factory=dict)

    def require(self, tol: float) -> "EvalResult":
        if self.abs_err_est > tol:
            raise ValueError(f"error estimate {self.abs_err_est:.3e} exceeds {tol:.3e}")
        return self
