"""Analytic expectations and projective sampling of spin measurements.

Sampling draws exactly one uniform variate per measurement event and maps it
to an outcome by inverse CDF over the explicitly enumerated outcomes, in the
order (+1, -1) for one particle and (++, +-, -+, --) for a pair. A batch of
``size`` events therefore consumes the same variates, in the same order, as
``size`` scalar calls on the same generator.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .estimate import CorrelationEstimate, binomial_stderr
from .qstate import (
    ZHAT,
    Direction,
    QubitKet,
    TwoQubitKet,
    angle_between,
    eigenbasis,
    express_two_qubit_in_basis,
    spin_eigenstate,
    spin_operator,
)

PAIR_OUTCOMES = np.array([(1, 1), (1, -1), (-1, 1), (-1, -1)], dtype=np.int8)
SINGLE_OUTCOMES = np.array([1, -1], dtype=np.int8)


def expectation(state: QubitKet, axis: Direction) -> float:
    """<psi| n.sigma |psi>."""
    psi = state.amplitudes
    return float(np.vdot(psi, spin_operator(axis).matrix @ psi).real / np.vdot(psi, psi).real)


def single_particle_correlation(axis_a: Direction, axis_n: Direction) -> float:
    """Correlation of a spin prepared up along ``axis_a`` then measured along ``axis_n``.

    Since the first measurement acts as the identity on its own eigenstate,
    this is the expectation of n.sigma in the +1 eigenstate of a.sigma, which
    is cos of the angle between the axes.
    """
    return expectation(spin_eigenstate(axis_a, 1), axis_n)


def joint_correlation(psi: TwoQubitKet, axis_a: Direction, axis_b: Direction) -> float:
    """<psi| (a.sigma) (x) (b.sigma) |psi>."""
    op = np.kron(spin_operator(axis_a).matrix, spin_operator(axis_b).matrix)
    amps = psi.amplitudes
    # dividing by <psi|psi> removes the last-ulp drift of rounded 1/sqrt(2) amplitudes
    return float(np.vdot(amps, op @ amps).real / np.vdot(amps, amps).real)


def outcome_probabilities(state: QubitKet, axis: Direction) -> np.ndarray:
    """Born probabilities of (+1, -1) along ``axis``."""
    amps = eigenbasis(axis).conj().T @ state.amplitudes
    p = np.abs(amps) ** 2
    return p / p.sum()


def joint_probabilities(psi: TwoQubitKet, axis_a: Direction, axis_b: Direction) -> np.ndarray:
    """Born probabilities of (++, +-, -+, --) in the a (x) b eigenbasis."""
    p = np.abs(express_two_qubit_in_basis(psi, axis_a, axis_b)) ** 2
    return p / p.sum()


def inverse_cdf(probs: np.ndarray, u):
    cdf = np.cumsum(probs)
    idx = np.searchsorted(cdf, u, side="right")
    # guards a last cdf entry that rounds to just below 1
    return np.minimum(idx, len(probs) - 1)


def sample_measurement(state: QubitKet, axis: Direction,
                       rng: np.random.Generator) -> tuple[int, QubitKet]:
    """Projective measurement: returns the outcome and the post-measurement ket."""
    idx = int(inverse_cdf(outcome_probabilities(state, axis), rng.random()))
    sign = int(SINGLE_OUTCOMES[idx])
    return sign, spin_eigenstate(axis, sign)


def sample_outcomes(state: QubitKet, axis: Direction, rng: np.random.Generator,
                    size: int) -> np.ndarray:
    """``size`` independent outcomes (int8 array of +1/-1)."""
    idx = inverse_cdf(outcome_probabilities(state, axis), rng.random(size))
    return SINGLE_OUTCOMES[idx]


def sample_joint(psi: TwoQubitKet, axis_a: Direction, axis_b: Direction,
                 rng: np.random.Generator, size: int | None = None):
    """Sample the four-outcome joint distribution.

    Returns ``(s_a, s_b)`` as ints when ``size`` is None, else two int8 arrays.
    """
    probs = joint_probabilities(psi, axis_a, axis_b)
    if size is None:
        s_a, s_b = PAIR_OUTCOMES[int(inverse_cdf(probs, rng.random()))]
        return int(s_a), int(s_b)
    pairs = PAIR_OUTCOMES[inverse_cdf(probs, rng.random(size))]
    return pairs[:, 0], pairs[:, 1]


class Counter(enum.Enum):
    D1 = 1
    D2 = -1


@dataclass(frozen=True)
class SequentialResult:
    """Upper-arm passage: the z stage read +1 and one counter fired."""

    first_outcome: int
    counter: Counter

    @property
    def second_outcome(self) -> int:
        return self.counter.value


@dataclass(frozen=True)
class Absorbed:
    """The z stage read -1; the particle left by the lower arm, no counter fired."""

    first_outcome: int = -1


def sequential_stern_gerlach(state: QubitKet, second_axis: Direction,
                             rng: np.random.Generator) -> SequentialResult | Absorbed:
    """One particle through a z apparatus with a second apparatus in its upper arm.

    Two variates are drawn per particle whether or not it reaches the second
    stage, so trial i always uses variates 2i and 2i + 1.
    """
    u = rng.random(2)
    p_up = outcome_probabilities(state, ZHAT)
    if inverse_cdf(p_up, u[0]) == 1:
        return Absorbed()
    p_second = outcome_probabilities(spin_eigenstate(ZHAT, 1), second_axis)
    idx = int(inverse_cdf(p_second, u[1]))
    return SequentialResult(1, Counter.D1 if idx == 0 else Counter.D2)


@dataclass(frozen=True)
class SequentialStats:
    """Aggregate of a double Stern-Gerlach run.

    ``p_d1`` and ``correlation`` are conditioned on upper-arm passage; absorbed
    particles do not enter them.
    """

    n_trials: int
    n_entered: int
    n_d1: int
    correlation: CorrelationEstimate | None
    conditioning: str = "upper-arm passage (first stage +1)"

    @property
    def p_enter(self) -> float:
        return self.n_entered / self.n_trials

    @property
    def p_enter_stderr(self) -> float:
        return binomial_stderr(self.p_enter, self.n_trials)

    @property
    def p_d1(self) -> float:
        return self.n_d1 / self.n_entered if self.n_entered else math.nan

    @property
    def p_d1_stderr(self) -> float:
        return binomial_stderr(self.p_d1, self.n_entered) if self.n_entered else math.nan

    def to_dict(self) -> dict:
        return {
            "n_trials": self.n_trials,
            "n_entered": self.n_entered,
            "p_enter": self.p_enter,
            "p_enter_stderr": self.p_enter_stderr,
            "n_d1": self.n_d1,
            "n_d2": self.n_entered - self.n_d1,
            "p_d1": self.p_d1,
            "p_d1_stderr": self.p_d1_stderr,
            "correlation": None if self.correlation is None else self.correlation.to_dict(),
            "conditioning": self.conditioning,
        }


def run_sequential(state: QubitKet, second_axis: Direction, n: int,
                   rng: np.random.Generator) -> SequentialStats:
    """Vectorized :func:`sequential_stern_gerlach` over ``n`` particles."""
    if n < 1:
        raise ValueError("n must be at least 1")
    u = rng.random((n, 2))
    entered = inverse_cdf(outcome_probabilities(state, ZHAT), u[:, 0]) == 0
    p_second = outcome_probabilities(spin_eigenstate(ZHAT, 1), second_axis)
    second = SINGLE_OUTCOMES[inverse_cdf(p_second, u[entered, 1])]
    n_entered = int(entered.sum())
    # first outcome is +1 for every entered particle, so the product is the second outcome
    corr = CorrelationEstimate.from_products(second) if n_entered else None
    return SequentialStats(n, n_entered, int(np.count_nonzero(second == 1)), corr)


def analytic_sequential(second_axis: Direction) -> dict:
    """Closed-form P(D1), P(D2) and correlation for a |up_z> input to the second stage."""
    theta = angle_between(ZHAT, second_axis)
    return {
        "p_d1": math.cos(theta / 2) ** 2,
        "p_d2": math.sin(theta / 2) ** 2,
        "correlation": math.cos(theta),
    }
