"""Bell's original three-axis inequality, 1 + P(b,c) >= |P(a,b) - P(a,c)|."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .errors import InvalidCorrelationError
from .measure import joint_correlation, single_particle_correlation
from .qstate import Direction, singlet

Correlation = Callable[[Direction, Direction], float]

ANALYTIC_TOL = 1e-9
STAT_SIGMAS = 4.0

__all__ = [
    "ANALYTIC_TOL",
    "STAT_SIGMAS",
    "BellTriple",
    "InequalityReport",
    "evaluate_inequality",
    "flipped_single_particle_correlation",
    "in_reference_interval",
    "inequality_report",
    "singlet_correlation",
    "statistical_report",
    "symmetric_triple",
    "violation_scan",
]


@dataclass(frozen=True)
class BellTriple:
    a: Direction
    b: Direction
    c: Direction

    def pairs(self) -> tuple[tuple[Direction, Direction], ...]:
        """The three setting pairs in the order (a,b), (a,c), (b,c)."""
        return (self.a, self.b), (self.a, self.c), (self.b, self.c)

    def rotated(self, rotation) -> BellTriple:
        return BellTriple(self.a.rotated(rotation), self.b.rotated(rotation),
                          self.c.rotated(rotation))


@dataclass(frozen=True)
class InequalityReport:
    lhs: float
    rhs: float
    margin: float
    violated: bool
    tol: float

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "margin": self.margin,
                "violated": self.violated, "tol": self.tol}


def inequality_report(p_ab: float, p_ac: float, p_bc: float,
                      tol: float = ANALYTIC_TOL) -> InequalityReport:
    """Assemble the report from three correlation values."""
    for name, value in (("P(a,b)", p_ab), ("P(a,c)", p_ac), ("P(b,c)", p_bc)):
        if not (-1.0 - tol <= value <= 1.0 + tol) or math.isnan(value):
            raise InvalidCorrelationError(f"{name} = {value!r} lies outside [-1, 1]")
    lhs = 1.0 + p_bc
    rhs = abs(p_ab - p_ac)
    margin = lhs - rhs
    return InequalityReport(lhs, rhs, margin, margin < -tol, tol)


def evaluate_inequality(correlation: Correlation, triple: BellTriple,
                        tol: float = ANALYTIC_TOL) -> InequalityReport:
    p_ab = correlation(triple.a, triple.b)
    p_ac = correlation(triple.a, triple.c)
    p_bc = correlation(triple.b, triple.c)
    return inequality_report(p_ab, p_ac, p_bc, tol)


def singlet_correlation(a: Direction, b: Direction) -> float:
    return joint_correlation(singlet(), a, b)


def flipped_single_particle_correlation(a: Direction, b: Direction) -> float:
    """Single-particle correlation with one output sign reversed.

    Reversing one detector's sign turns cos(angle) into -cos(angle), which
    is the singlet's correlation.
    """
    return -single_particle_correlation(a, b)


def symmetric_triple(theta: float) -> BellTriple:
    """b along z, a and c at -theta and +theta from z in the phi = 0 plane."""
    return BellTriple(Direction(-theta, 0.0), Direction(0.0, 0.0), Direction(theta, 0.0))


def in_reference_interval(theta: float) -> bool:
    """Whether theta lies in the open interval (0, pi/2) where the singlet violates."""
    return 0.0 < theta < math.pi / 2


def violation_scan(theta_min: float, theta_max: float, steps: int,
                   correlation: Correlation = singlet_correlation,
                   tol: float = ANALYTIC_TOL) -> list[tuple[float, InequalityReport]]:
    """Evaluate the symmetric geometry on ``steps`` evenly spaced angles, ends included."""
    if isinstance(steps, bool) or not isinstance(steps, (int, np.integer)) or steps < 2:
        raise ValueError("steps must be an integer >= 2")
    if not (0.0 <= theta_min < theta_max <= math.pi):
        raise ValueError("need 0 <= theta_min < theta_max <= pi")
    grid = np.linspace(theta_min, theta_max, int(steps))
    return [(float(t), evaluate_inequality(correlation, symmetric_triple(float(t)), tol))
            for t in grid]


def statistical_report(estimates: tuple,
                       sigmas: float = STAT_SIGMAS) -> InequalityReport:
    """Decide the inequality from estimates of P(a,b), P(a,c), P(b,c).

    The tolerance is ``sigmas`` times the three standard errors added in
    quadrature, the standard error of the margin.
    """
    ab, ac, bc = estimates
    combined = math.sqrt(ab.stderr ** 2 + ac.stderr ** 2 + bc.stderr ** 2)
    return inequality_report(ab.mean, ac.mean, bc.mean, sigmas * combined)
