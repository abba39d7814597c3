"""Points s = sigma + i t of the complex plane."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ComplexPoint:
    sigma: float
    t: float

    @classmethod
    def of(cls, s: "ComplexPoint | complex | float") -> "ComplexPoint":
        if isinstance(s, ComplexPoint):
            return s
        s = complex(s)
        return cls(s.real, s.imag)

    @property
    def s(self) -> complex:
        return complex(self.sigma, self.t)

    @property
    def tau(self) -> float:
        """|t| + 3."""
        return abs(self.t) + 3.0

    def ell(self, q: float) -> float:
        """log(q * tau)."""
        return math.log(q) + math.log(self.tau)

    def conjugate(self) -> "ComplexPoint":
        return ComplexPoint(self.sigma, -self.t)

    def __complex__(self) -> complex:
        return self.s
