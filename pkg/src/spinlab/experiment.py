"""Reproducible Monte Carlo EPR runs.

Trials are generated in fixed-size chunks, chunk ``i`` drawing from the stream
derived from ``(seed, i)``. Inside a chunk each trial consumes a fixed number
of uniform variates, taken row by row from one ``(n, k)`` draw:

=======================  ==========================================
source / order           variates per trial
=======================  ==========================================
quantum, simultaneous    1 (four-outcome inverse CDF)
quantum, ordered         2 (first measurement, then second)
lhv                      2 (hidden variable on the sphere)
furry                    2 (branch, then the branch's joint outcome)
=======================  ==========================================

A per-trial setting choice adds one variate in front of those.
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import lhv as lhv_mod
from .bell import BellTriple, InequalityReport, statistical_report
from .errors import ConfigError, EmptySelectionError
from .estimate import CorrelationEstimate
from .furry import branch_joint_probabilities, furry_mixture
from .measure import PAIR_OUTCOMES, SINGLE_OUTCOMES, inverse_cdf, joint_probabilities
from .qstate import Direction, TwoQubitKet, singlet
from .separation import Order, OrderedProtocol, _stage_tables
from .streams import DEFAULT_CHUNK, derive_seed, map_chunks

SOURCES = ("quantum", "lhv", "furry")
AXIS_MATCH_ATOL = 1e-12

SettingPair = tuple[Direction, Direction]


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines a run.

    ``settings`` is a sequence of (a, b) pairs. With ``policy="fixed"`` it must
    hold exactly one pair; with ``policy="choice"`` each trial picks one pair
    uniformly at random from the stream.
    """

    source: str
    settings: tuple[SettingPair, ...]
    n_trials: int
    seed: int
    policy: str = "fixed"
    order: Order = Order.SIMULTANEOUS
    state: TwoQubitKet = field(default_factory=singlet)
    model: str = "sign"
    chunk_size: int = DEFAULT_CHUNK

    def __post_init__(self):
        object.__setattr__(self, "settings", tuple(tuple(p) for p in self.settings))
        if self.source not in SOURCES:
            raise ConfigError(f"unknown source {self.source!r}; expected one of {SOURCES}")
        if isinstance(self.n_trials, bool) or int(self.n_trials) != self.n_trials \
                or self.n_trials < 1:
            raise ConfigError("n_trials must be a positive integer")
        if not self.settings:
            raise ConfigError("at least one setting pair is required")
        if self.policy not in ("fixed", "choice"):
            raise ConfigError(f"unknown settings policy {self.policy!r}")
        if self.policy == "fixed" and len(self.settings) != 1:
            raise ConfigError("the fixed policy takes exactly one setting pair")
        if not (0 <= self.seed < 2 ** 64):
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if not isinstance(self.order, Order):
            object.__setattr__(self, "order", Order(self.order))
        if self.source == "lhv":
            lhv_mod.get_model(self.model)

    @property
    def variates_per_trial(self) -> int:
        if self.source == "quantum":
            base = 1 if self.order is Order.SIMULTANEOUS else 2
        elif self.source == "lhv":
            base = lhv_mod.get_model(self.model).variates_per_trial
        else:
            base = 2
        return base + (1 if self.policy == "choice" else 0)


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    setting_a: Direction
    outcome_a: int
    setting_b: Direction
    outcome_b: int
    order: Order


@dataclass(frozen=True, eq=False)
class TrialRecords(Sequence):
    """Column store of a run; indexing yields :class:`TrialRecord` objects."""

    settings: tuple[SettingPair, ...]
    setting_index: np.ndarray
    outcome_a: np.ndarray
    outcome_b: np.ndarray
    order: Order

    def __post_init__(self):
        for arr in (self.setting_index, self.outcome_a, self.outcome_b):
            arr.setflags(write=False)

    def __len__(self):
        return len(self.outcome_a)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[k] for k in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        a, b = self.settings[int(self.setting_index[i])]
        return TrialRecord(i, a, int(self.outcome_a[i]), b, int(self.outcome_b[i]), self.order)

    def __iter__(self) -> Iterator[TrialRecord]:
        return (self[i] for i in range(len(self)))

    def __eq__(self, other):
        if not isinstance(other, TrialRecords):
            return NotImplemented
        return (self.settings == other.settings and self.order == other.order
                and np.array_equal(self.setting_index, other.setting_index)
                and np.array_equal(self.outcome_a, other.outcome_a)
                and np.array_equal(self.outcome_b, other.outcome_b))

    @property
    def trial_id(self) -> np.ndarray:
        return np.arange(len(self))

    def to_csv(self, path) -> None:
        """Write ``trial,order,theta_a,phi_a,outcome_a,theta_b,phi_b,outcome_b``."""
        angles = np.array([[a.theta, a.phi, b.theta, b.phi] for a, b in self.settings])
        ang = angles[self.setting_index]
        table = np.column_stack([self.trial_id, ang[:, 0], ang[:, 1], self.outcome_a,
                                 ang[:, 2], ang[:, 3], self.outcome_b])
        order = self.order.value.replace("%", "%%")
        fmt = f"%d,{order},%.17g,%.17g,%d,%.17g,%.17g,%d"
        with open(path, "w", newline="") as fh:
            np.savetxt(fh, table, fmt=fmt, delimiter=",",
                       header="trial,order,theta_a,phi_a,outcome_a,theta_b,phi_b,outcome_b",
                       comments="")


def _pair_tables(config: ExperimentConfig):
    """Per setting pair: the cumulative outcome table the trial sampler needs."""
    if config.source == "quantum" and config.order is Order.SIMULTANEOUS:
        return [np.cumsum(joint_probabilities(config.state, a, b)) for a, b in config.settings]
    if config.source == "quantum":
        tables = []
        for a, b in config.settings:
            first, _, p1, p2 = _stage_tables(config.state, OrderedProtocol(config.order, a, b))
            tables.append((first, p1, p2))
        return tables
    if config.source == "furry":
        mix = furry_mixture(config.state)
        return [(mix.weights, np.cumsum(branch_joint_probabilities(mix, a, b), axis=1))
                for a, b in config.settings]
    return None


def _chunk_trials(config: ExperimentConfig, tables, model, start: int, stop: int,
                  rng: np.random.Generator):
    n = stop - start
    u = rng.random((n, config.variates_per_trial))
    if config.policy == "choice":
        k = np.minimum((u[:, 0] * len(config.settings)).astype(np.intp),
                       len(config.settings) - 1)
        u = u[:, 1:]
    else:
        k = np.zeros(n, dtype=np.intp)

    out_a = np.empty(n, dtype=np.int8)
    out_b = np.empty(n, dtype=np.int8)
    for s, (axis_a, axis_b) in enumerate(config.settings):
        rows = np.flatnonzero(k == s)
        if rows.size == 0:
            continue
        v = u[rows]
        if config.source == "lhv":
            # hidden variables are drawn from this trial's own variates
            sub = _RowStream(v)
            a, b = lhv_mod.sample_pairs(model, axis_a, axis_b, rows.size, sub)
        elif config.source == "quantum" and config.order is Order.SIMULTANEOUS:
            cdf = tables[s]
            pairs = PAIR_OUTCOMES[np.minimum(np.searchsorted(cdf, v[:, 0], side="right"), 3)]
            a, b = pairs[:, 0], pairs[:, 1]
        elif config.source == "quantum":
            first, p1, p2 = tables[s]
            i = inverse_cdf(p1, v[:, 0])
            j = (v[:, 1] >= p2[i, 0]).astype(np.intp)
            x, y = SINGLE_OUTCOMES[i], SINGLE_OUTCOMES[j]
            a, b = (x, y) if first == 1 else (y, x)
        else:
            weights, cdf = tables[s]
            branch = inverse_cdf(weights, v[:, 0])
            idx = np.minimum((v[:, 1:2] >= cdf[branch]).sum(axis=1), 3)
            pairs = PAIR_OUTCOMES[idx]
            a, b = pairs[:, 0], pairs[:, 1]
        out_a[rows] = a
        out_b[rows] = b
    return k, out_a, out_b


class _RowStream:
    """Hands pre-drawn per-trial variates to a model's ``sample_lambda``.

    Only ``random((n, m))`` with the exact row count is supported, which is
    all a model needs to draw its hidden variables.
    """

    def __init__(self, variates: np.ndarray):
        self._v = variates
        self._used = False

    def random(self, size=None):
        if self._used:
            raise RuntimeError("per-trial variates already consumed")
        shape = size if isinstance(size, tuple) else (size,)
        if math.prod(shape) != self._v.size:
            raise RuntimeError(f"model asked for {shape} variates, budget is {self._v.shape}")
        self._used = True
        return self._v.reshape(shape)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> TrialRecords:
    """Generate ``config.n_trials`` records; identical configs give identical records."""
    tables = _pair_tables(config)
    model = lhv_mod.get_model(config.model) if config.source == "lhv" else None
    chunks = map_chunks(lambda start, stop, rng: _chunk_trials(config, tables, model,
                                                                start, stop, rng),
                        config.n_trials, config.seed, config.chunk_size, workers)
    k = np.concatenate([c[0] for c in chunks])
    a = np.concatenate([c[1] for c in chunks])
    b = np.concatenate([c[2] for c in chunks])
    return TrialRecords(config.settings, k, a, b, config.order)


def _same_axis(x: Direction, y: Direction) -> bool:
    return bool(np.allclose(x.vector, y.vector, rtol=0, atol=AXIS_MATCH_ATOL))


def estimate_correlation(records: TrialRecords | Sequence[TrialRecord],
                         setting_pair: SettingPair) -> CorrelationEstimate:
    """Mean of outcome_a * outcome_b over the records taken at ``setting_pair``."""
    a, b = setting_pair
    if isinstance(records, TrialRecords):
        wanted = [s for s, (x, y) in enumerate(records.settings)
                  if _same_axis(x, a) and _same_axis(y, b)]
        mask = np.isin(records.setting_index, wanted)
        prods = records.outcome_a[mask].astype(np.int64) * records.outcome_b[mask]
    else:
        prods = np.array([r.outcome_a * r.outcome_b for r in records
                          if _same_axis(r.setting_a, a) and _same_axis(r.setting_b, b)],
                         dtype=np.int64)
    if prods.size == 0:
        raise EmptySelectionError(f"no records at settings ({a}, {b})")
    return CorrelationEstimate.from_products(prods)


@dataclass(frozen=True)
class BellExperimentResult:
    report: InequalityReport
    estimates: tuple[CorrelationEstimate, CorrelationEstimate, CorrelationEstimate]
    triple: BellTriple

    def to_dict(self) -> dict:
        names = ("ab", "ac", "bc")
        return {
            "report": self.report.to_dict(),
            "estimates": {k: e.to_dict() for k, e in zip(names, self.estimates)},
            "triple": {k: [d.theta, d.phi] for k, d in
                       zip("abc", (self.triple.a, self.triple.b, self.triple.c))},
        }


def bell_experiment(config: ExperimentConfig, triple: BellTriple, n_per_pair: int,
                    workers: int = 1) -> BellExperimentResult:
    """Three fixed-setting runs for (a,b), (a,c), (b,c), decided at 4 sigma.

    ``config`` supplies the source, state, model, order and seed; its own
    settings and trial count are replaced. Sub-run ``k`` uses the seed
    derived from ``(config.seed, k)``.
    """
    if n_per_pair < 10_000:
        raise ConfigError("a statistical Bell decision needs n_per_pair >= 10000")
    estimates = []
    for k, pair in enumerate(triple.pairs()):
        sub = ExperimentConfig(config.source, (pair,), n_per_pair, derive_seed(config.seed, k),
                               "fixed", config.order, config.state, config.model,
                               config.chunk_size)
        estimates.append(estimate_correlation(run_experiment(sub, workers), pair))
    estimates = tuple(estimates)
    return BellExperimentResult(statistical_report(estimates), estimates, triple)
