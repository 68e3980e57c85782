"""Operational checks that a distant measurement leaves local statistics alone.

Two statements are checked. The local outcome distribution does not depend on
the setting chosen for the remote particle (no-signaling), and the joint
outcome distribution does not depend on which particle is measured first,
including when the first result is written into a notebook before the second
setting is used.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .estimate import binomial_stderr
from .measure import SINGLE_OUTCOMES, inverse_cdf, joint_probabilities, sample_joint
from .qstate import Direction, TwoQubitKet, eigenbasis, reduced_state, spin_eigenstate

ANALYTIC_ATOL = 1e-12
STAT_SIGMAS = 4.0


def _check_particle(local: int) -> None:
    if local not in (1, 2):
        raise ValueError(f"particle must be 1 or 2, got {local!r}")


def remote_marginal(psi: TwoQubitKet, remote_axis: Direction, local_axis: Direction,
                    local: int = 2) -> tuple[float, float]:
    """Local (p_up, p_down), summed over the unrecorded remote outcome."""
    _check_particle(local)
    if local == 2:
        p = joint_probabilities(psi, remote_axis, local_axis).reshape(2, 2).sum(axis=0)
    else:
        p = joint_probabilities(psi, local_axis, remote_axis).reshape(2, 2).sum(axis=1)
    return float(p[0]), float(p[1])


def marginal_from_reduced(psi: TwoQubitKet, local_axis: Direction,
                          local: int = 2) -> tuple[float, float]:
    """Diagonal of the reduced state in the local measurement basis."""
    _check_particle(local)
    u = eigenbasis(local_axis)
    d = np.real(np.diag(u.conj().T @ reduced_state(psi, local) @ u))
    return float(d[0]), float(d[1])


def _axis_json(axis: Direction) -> list[float]:
    return [axis.theta, axis.phi]


@dataclass(frozen=True)
class NoSignalingReport:
    local_axis: Direction
    remote_axes: tuple[Direction, ...]
    marginals: tuple[tuple[float, float], ...]
    max_discrepancy: float
    passed: bool
    mode: str = "analytic"
    empirical: tuple[tuple[float, float], ...] | None = None
    max_z: float | None = None

    def to_json(self) -> dict:
        out = {
            "local_axis": _axis_json(self.local_axis),
            "remote_axes": [_axis_json(a) for a in self.remote_axes],
            "marginals": [list(m) for m in self.marginals],
            "max_discrepancy": self.max_discrepancy,
            "pass": self.passed,
        }
        if self.empirical is not None:
            out["mode"] = self.mode
            out["empirical_marginals"] = [list(m) for m in self.empirical]
            out["max_z"] = self.max_z
        return out


def no_signaling_check(psi: TwoQubitKet, local_axis: Direction, remote_axes,
                       local: int = 2, n: int | None = None,
                       rng: np.random.Generator | None = None) -> NoSignalingReport:
    """Compare the local marginal across remote settings.

    Analytic marginals must agree pairwise within 1e-12. With ``n`` and ``rng``
    the local marginal is also estimated from ``n`` sampled pairs per remote
    axis, and empirical pairs must agree within four combined binomial
    standard errors.
    """
    remote_axes = tuple(remote_axes)
    if len(remote_axes) < 2:
        raise ValueError("no-signaling check needs at least two remote axes")
    marginals = tuple(remote_marginal(psi, r, local_axis, local) for r in remote_axes)
    ups = [m[0] for m in marginals]
    max_disc = max(abs(x - y) for x, y in itertools.combinations(ups, 2))
    passed = max_disc <= ANALYTIC_ATOL
    if n is None:
        return NoSignalingReport(local_axis, remote_axes, marginals, max_disc, passed)

    if rng is None:
        raise ValueError("Monte Carlo mode needs a random stream")
    freqs = []
    for r in remote_axes:
        axes = (r, local_axis) if local == 2 else (local_axis, r)
        outcomes = sample_joint(psi, *axes, rng, size=n)
        freqs.append(float(np.count_nonzero(outcomes[local - 1] == 1)) / n)
    max_z = 0.0
    for f, g in itertools.combinations(freqs, 2):
        se = math.hypot(binomial_stderr(f, n), binomial_stderr(g, n))
        if se > 0.0:
            max_z = max(max_z, abs(f - g) / se)
        elif f != g:
            max_z = math.inf
    empirical = tuple((f, 1.0 - f) for f in freqs)
    return NoSignalingReport(local_axis, remote_axes, marginals, max_disc,
                             passed and max_z <= STAT_SIGMAS, "monte-carlo", empirical, max_z)


class Order(enum.Enum):
    A_FIRST = "A_first"
    B_FIRST = "B_first"
    SIMULTANEOUS = "simultaneous"


@dataclass(frozen=True)
class NotebookEntry:
    """Third-party record of the first measurement, written before the second one."""

    particle: int
    setting: Direction
    outcome: int


@dataclass(frozen=True)
class OrderedProtocol:
    order: Order
    setting_a: Direction
    setting_b: Direction
    keep_notebook: bool = True

    def __post_init__(self):
        if self.order is Order.SIMULTANEOUS:
            raise ValueError("an ordered protocol needs A_first or B_first")


@dataclass(frozen=True)
class OrderedOutcome:
    """Outcomes labelled by particle, not by measurement order."""

    outcome_a: int
    outcome_b: int
    notebook: NotebookEntry | None


def _projector(axis: Direction, sign: int) -> np.ndarray:
    ket = spin_eigenstate(axis, sign).amplitudes
    return np.outer(ket, ket.conj())


def _on_particle(op: np.ndarray, particle: int) -> np.ndarray:
    eye = np.eye(2, dtype=complex)
    return np.kron(op, eye) if particle == 1 else np.kron(eye, op)


def collapse(psi: TwoQubitKet, particle: int, axis: Direction,
             sign: int) -> tuple[float, TwoQubitKet | None]:
    """Probability of ``sign`` on ``particle`` along ``axis`` and the renormalized ket."""
    projected = _on_particle(_projector(axis, sign), particle) @ psi.amplitudes
    prob = float(np.vdot(projected, projected).real)
    if prob == 0.0:
        return 0.0, None
    return prob, TwoQubitKet(projected / math.sqrt(prob))


def _stage_tables(psi: TwoQubitKet, protocol: OrderedProtocol):
    """First-stage probabilities and second-stage probabilities per first outcome."""
    first, second = (1, 2) if protocol.order is Order.A_FIRST else (2, 1)
    settings = {1: protocol.setting_a, 2: protocol.setting_b}
    first_probs = np.zeros(2)
    second_probs = np.zeros((2, 2))
    for i, s in enumerate(SINGLE_OUTCOMES):
        prob, post = collapse(psi, first, settings[first], int(s))
        first_probs[i] = prob
        if post is None:
            second_probs[i] = (1.0, 0.0)
            continue
        for j, t in enumerate(SINGLE_OUTCOMES):
            second_probs[i, j], _ = collapse(post, second, settings[second], int(t))
    first_probs /= first_probs.sum()
    second_probs /= second_probs.sum(axis=1, keepdims=True)
    return first, second, first_probs, second_probs


def ordered_experiment(psi: TwoQubitKet, protocol: OrderedProtocol,
                       rng: np.random.Generator) -> OrderedOutcome:
    """Measure one particle, collapse the pair, record, then measure the other.

    Draws two variates per trial: the first for the earlier measurement.
    """
    u = rng.random(2)
    first, second = (1, 2) if protocol.order is Order.A_FIRST else (2, 1)
    settings = {1: protocol.setting_a, 2: protocol.setting_b}

    p_plus, _ = collapse(psi, first, settings[first], 1)
    p_minus, _ = collapse(psi, first, settings[first], -1)
    s = int(SINGLE_OUTCOMES[inverse_cdf(np.array([p_plus, p_minus]) / (p_plus + p_minus), u[0])])
    _, post = collapse(psi, first, settings[first], s)
    notebook = NotebookEntry(first, settings[first], s) if protocol.keep_notebook else None

    q_plus, _ = collapse(post, second, settings[second], 1)
    q_minus, _ = collapse(post, second, settings[second], -1)
    t = int(SINGLE_OUTCOMES[inverse_cdf(np.array([q_plus, q_minus]) / (q_plus + q_minus), u[1])])

    outcomes = {first: s, second: t}
    return OrderedOutcome(outcomes[1], outcomes[2], notebook)


@dataclass(frozen=True)
class OrderedRun:
    outcome_a: np.ndarray
    outcome_b: np.ndarray
    notebook: np.ndarray | None
    notebook_particle: int


def run_ordered(psi: TwoQubitKet, protocol: OrderedProtocol, rng: np.random.Generator,
                size: int) -> OrderedRun:
    """Vectorized :func:`ordered_experiment`; same variates, same outcomes."""
    first, _, first_probs, second_probs = _stage_tables(psi, protocol)
    u = rng.random((size, 2))
    i = inverse_cdf(first_probs, u[:, 0])
    first_out = SINGLE_OUTCOMES[i]
    notebook = None
    if protocol.keep_notebook:
        notebook = first_out.copy()
        notebook.setflags(write=False)
    # per-row inverse cdf against the conditional table of the first outcome
    j = np.minimum((u[:, 1] >= second_probs[i, 0]).astype(np.intp), 1)
    second_out = SINGLE_OUTCOMES[j]
    if first == 1:
        return OrderedRun(first_out, second_out, notebook, 1)
    return OrderedRun(second_out, first_out, notebook, 2)


def joint_frequencies(outcome_a: np.ndarray, outcome_b: np.ndarray) -> np.ndarray:
    """Empirical (++, +-, -+, --) frequencies."""
    idx = (outcome_a == -1).astype(np.intp) * 2 + (outcome_b == -1).astype(np.intp)
    return np.bincount(idx, minlength=4) / len(idx)


def frequencies_agree(f: np.ndarray, g: np.ndarray, n_f: int, n_g: int,
                      sigmas: float = STAT_SIGMAS) -> bool:
    """Cellwise agreement of two empirical distributions within ``sigmas`` standard errors."""
    for p, q in zip(f, g):
        se = math.sqrt(p * (1 - p) / n_f + q * (1 - q) / n_g)
        if abs(p - q) > sigmas * se:
            return False
    return True
