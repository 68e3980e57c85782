"""Furry's product-state mixture and the interference it leaves out.

The hypothesis replaces an entangled pair by a classical ensemble: with
probability w_k the pair sits in the definite product state phi_k (x) xi_k,
where the terms come from the Schmidt decomposition of the pure state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measure import PAIR_OUTCOMES, expectation, inverse_cdf, joint_correlation
from .qstate import (
    Direction,
    QubitKet,
    TwoQubitKet,
    express_in_basis,
    schmidt_decompose,
    tensor_product,
)


@dataclass(frozen=True)
class Branch:
    weight: float
    state_a: QubitKet
    state_b: QubitKet


@dataclass(frozen=True)
class ProductMixture:
    branches: tuple[Branch, ...]
    degenerate: bool = False

    def __post_init__(self):
        total = sum(b.weight for b in self.branches)
        if abs(total - 1.0) > 1e-10 or any(b.weight < 0 for b in self.branches):
            raise ValueError(f"branch weights must be non-negative and sum to 1, got {total!r}")

    @property
    def weights(self) -> np.ndarray:
        return np.array([b.weight for b in self.branches])

    def describe(self) -> list[dict]:
        """Branch kets as [re, im] pairs, for output metadata."""
        def pairs(ket):
            return [[float(c.real), float(c.imag)] for c in ket.amplitudes]
        return [{"weight": b.weight, "state_a": pairs(b.state_a), "state_b": pairs(b.state_b)}
                for b in self.branches]


def furry_mixture(psi: TwoQubitKet) -> ProductMixture:
    """One branch per Schmidt term, weighted by the Schmidt weight.

    For degenerate weights (the singlet) the Schmidt basis of particle 1 is the
    z basis, so the singlet becomes an even mix of (up, down) and (down, up).
    """
    decomp = schmidt_decompose(psi)
    branches = tuple(Branch(w, a, b)
                     for w, a, b in zip(decomp.weights, decomp.basis_a, decomp.basis_b))
    return ProductMixture(branches, decomp.degenerate)


def mixture_correlation(mix: ProductMixture, axis_a: Direction, axis_b: Direction) -> float:
    return float(sum(b.weight * expectation(b.state_a, axis_a) * expectation(b.state_b, axis_b)
                     for b in mix.branches))


def interference_delta(psi: TwoQubitKet, axis_a: Direction, axis_b: Direction) -> float:
    """Quantum correlation minus the Furry-mixture correlation (signed)."""
    return joint_correlation(psi, axis_a, axis_b) - \
        mixture_correlation(furry_mixture(psi), axis_a, axis_b)


def branch_joint_probabilities(mix: ProductMixture, axis_a: Direction,
                               axis_b: Direction) -> np.ndarray:
    """(n_branches, 4) table of (++, +-, -+, --) probabilities per product branch."""
    rows = []
    for b in mix.branches:
        pa = np.abs(np.array(express_in_basis(b.state_a, axis_a))) ** 2
        pb = np.abs(np.array(express_in_basis(b.state_b, axis_b))) ** 2
        rows.append(np.outer(pa, pb).reshape(4) / (pa.sum() * pb.sum()))
    return np.array(rows)


def sample_mixture(mix: ProductMixture, axis_a: Direction, axis_b: Direction,
                   rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw a branch (one variate), then the branch's joint outcome (one variate)."""
    u = rng.random((size, 2))
    branch = inverse_cdf(mix.weights, u[:, 0])
    table = np.cumsum(branch_joint_probabilities(mix, axis_a, axis_b), axis=1)
    idx = np.minimum((u[:, 1:2] >= table[branch]).sum(axis=1), 3)
    pairs = PAIR_OUTCOMES[idx]
    return pairs[:, 0], pairs[:, 1]


def branch_state(branch: Branch) -> TwoQubitKet:
    return tensor_product(branch.state_a, branch.state_b)


def singlet_interference_closed_form(axis_a: Direction, axis_b: Direction) -> float:
    """-sin(theta_a) sin(theta_b) cos(phi_a - phi_b), the singlet's z-basis delta."""
    return -math.sin(axis_a.theta) * math.sin(axis_b.theta) * math.cos(axis_a.phi - axis_b.phi)
