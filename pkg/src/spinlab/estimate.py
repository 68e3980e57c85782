"""Correlation estimates for dichotomic (+1/-1) outcome products."""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CorrelationEstimate:
    """Sample mean of outcome products with its standard error.

    For products in {-1, +1} the variance is exactly ``1 - mean**2``, so the
    standard error needs no second pass over the data.
    """

    mean: float
    stderr: float
    n: int

    @classmethod
    def from_sum(cls, total: float, n: int) -> CorrelationEstimate:
        if n < 1:
            raise ValueError("an estimate needs at least one trial")
        mean = total / n
        return cls(mean, dichotomic_stderr(mean, n), n)

    @classmethod
    def from_products(cls, products) -> CorrelationEstimate:
        products = np.asarray(products)
        return cls.from_sum(float(np.sum(products, dtype=np.int64)), int(products.size))

    @classmethod
    def combine(cls, parts: Iterable[CorrelationEstimate]) -> CorrelationEstimate:
        """Pool chunk estimates in the order given."""
        total, n = 0.0, 0
        for part in parts:
            total += part.mean * part.n
            n += part.n
        return cls.from_sum(total, n)

    def z_score(self, expected: float) -> float:
        """Signed deviation from ``expected`` in standard errors (inf if stderr is 0)."""
        diff = self.mean - expected
        if self.stderr == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.stderr

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "n": self.n}


def dichotomic_stderr(mean: float, n: int) -> float:
    return math.sqrt(max(0.0, 1.0 - mean * mean) / n)


def binomial_stderr(p: float, n: int) -> float:
    return math.sqrt(max(0.0, p * (1.0 - p)) / n)
