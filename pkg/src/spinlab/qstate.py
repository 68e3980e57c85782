"""Exact one- and two-qubit state algebra.

Kets are stored as complex numpy vectors in the z basis. Two-qubit amplitudes
use the Kronecker ordering (up-up, up-down, down-up, down-down), so the 2x2
coefficient matrix of a :class:`TwoQubitKet` is ``amplitudes.reshape(2, 2)``
with particle 1 on the rows.

Spin is measured in units of hbar/2, so every axis operator has eigenvalues
exactly +1 and -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DOWN_Z",
    "UP_Z",
    "XHAT",
    "YHAT",
    "ZHAT",
    "Direction",
    "QubitKet",
    "SchmidtDecomposition",
    "SpinOperator",
    "TwoQubitKet",
    "angle_between",
    "express_in_basis",
    "express_two_qubit_in_basis",
    "random_direction",
    "random_qubit",
    "random_two_qubit",
    "reduced_state",
    "reduced_state_from_schmidt",
    "schmidt_decompose",
    "singlet",
    "spin_eigenstate",
    "spin_operator",
    "tensor_product",
]

TWO_PI = 2.0 * math.pi
NORM_ATOL = 1e-12
PHASE_CUTOFF = 1e-9
DEGENERACY_ATOL = 1e-10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class Direction:
    """Measurement axis on the unit sphere, in polar coordinates (radians).

    Any real ``theta``/``phi`` is accepted and folded onto theta in [0, pi],
    phi in [0, 2 pi). A negative polar angle therefore denotes the mirrored
    axis: ``Direction(-t)`` is ``Direction(t, pi)``. At the poles phi is 0.
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta = math.fmod(float(self.theta), TWO_PI)
        phi = float(self.phi)
        if theta < 0.0:
            theta += TWO_PI
        if theta > math.pi:
            theta = TWO_PI - theta
            phi += math.pi
        phi = math.fmod(phi, TWO_PI)
        if phi < 0.0:
            phi += TWO_PI
        if phi >= TWO_PI:
            phi = 0.0
        if theta == 0.0 or theta == math.pi:
            phi = 0.0
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_vector(cls, v) -> Direction:
        x, y, z = (float(c) for c in v)
        norm = math.sqrt(x * x + y * y + z * z)
        if norm == 0.0:
            raise ValueError("cannot build a direction from the zero vector")
        theta = math.acos(max(-1.0, min(1.0, z / norm)))
        phi = math.atan2(y, x) if (x or y) else 0.0
        return cls(theta, phi)

    @property
    def vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi),
                         math.cos(self.theta)])

    def angle_to(self, other: Direction) -> float:
        return angle_between(self, other)

    def rotated(self, rotation: np.ndarray) -> Direction:
        """Apply a 3x3 rotation matrix to the axis."""
        return Direction.from_vector(np.asarray(rotation) @ self.vector)

    def __str__(self):
        return f"({self.theta!r},{self.phi!r})"


ZHAT = Direction(0.0, 0.0)
XHAT = Direction(math.pi / 2, 0.0)
YHAT = Direction(math.pi / 2, math.pi / 2)


def angle_between(a: Direction, b: Direction) -> float:
    """Angle in [0, pi] between two axes (atan2 form, accurate near 0 and pi)."""
    u, v = a.vector, b.vector
    return math.atan2(float(np.linalg.norm(np.cross(u, v))), float(u @ v))


def _check_normalized(amplitudes: np.ndarray, atol: float = NORM_ATOL) -> None:
    norm2 = float(np.vdot(amplitudes, amplitudes).real)
    if abs(norm2 - 1.0) > atol:
        raise ValueError(f"ket is not normalized (|psi|^2 = {norm2!r})")


def _canonical_phase(amplitudes: np.ndarray) -> np.ndarray:
    for c in amplitudes:
        if abs(c) > PHASE_CUTOFF:
            return amplitudes * (abs(c) / c)
    return amplitudes.copy()


@dataclass(frozen=True, eq=False)
class _Ket:
    amplitudes: np.ndarray
    dim = 0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} amplitudes, got {amps.shape[0]}")
        _check_normalized(amps)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes):
        """Build a ket from unnormalized amplitudes."""
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(amps / norm)

    def canonical(self):
        """Same ray, with the first non-negligible amplitude real and >= 0."""
        return type(self)(_canonical_phase(self.amplitudes))

    def overlap(self, other) -> complex:
        """Inner product <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def equals_up_to_phase(self, other, atol: float = 1e-10) -> bool:
        return bool(np.allclose(_canonical_phase(self.amplitudes),
                                _canonical_phase(other.amplitudes), rtol=0, atol=atol))

    def __len__(self):
        return self.dim

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __repr__(self):
        return f"{type(self).__name__}({np.array2string(self.amplitudes, precision=6)})"


class QubitKet(_Ket):
    """Normalized spin-1/2 ket (c_up, c_down) in the z basis."""

    dim = 2


class TwoQubitKet(_Ket):
    """Normalized two-spin ket in the (uu, ud, du, dd) product basis."""

    dim = 4

    @property
    def coefficients(self) -> np.ndarray:
        return self.amplitudes.reshape(2, 2)


@dataclass(frozen=True, eq=False)
class SpinOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("spin operator must be 2x2")
        if not np.allclose(m, m.conj().T, rtol=0, atol=1e-12):
            raise ValueError("spin operator must be Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other):
        if isinstance(other, SpinOperator):
            return self.matrix @ other.matrix
        if isinstance(other, QubitKet):
            return self.matrix @ other.amplitudes
        return self.matrix @ np.asarray(other)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """psi = sum_k sqrt(weights[k]) basis_a[k] (x) basis_b[k]."""

    weights: tuple[float, ...]
    basis_a: tuple[QubitKet, ...]
    basis_b: tuple[QubitKet, ...]
    degenerate: bool = field(default=False)

    def __len__(self):
        return len(self.weights)

    def reconstruct(self) -> TwoQubitKet:
        amps = sum(math.sqrt(w) * np.kron(p.amplitudes, x.amplitudes)
                   for w, p, x in zip(self.weights, self.basis_a, self.basis_b))
        return TwoQubitKet.normalized(amps)


UP_Z = QubitKet([1.0, 0.0])
DOWN_Z = QubitKet([0.0, 1.0])


def spin_eigenstate(axis: Direction, sign: int) -> QubitKet:
    """Eigenket of ``spin_operator(axis)`` with eigenvalue ``sign``.

    Phase convention: up is (cos t/2, e^{i phi} sin t/2), down is
    (-e^{-i phi} sin t/2, cos t/2), so the z axis gives (1, 0) and (0, 1).
    """
    c = math.cos(axis.theta / 2)
    s = math.sin(axis.theta / 2)
    if sign == 1:
        return QubitKet([c, np.exp(1j * axis.phi) * s])
    if sign == -1:
        return QubitKet([-np.exp(-1j * axis.phi) * s, c])
    raise ValueError(f"sign must be +1 or -1, got {sign!r}")


def eigenbasis(axis: Direction) -> np.ndarray:
    """Unitary whose columns are the +1 and -1 eigenkets of ``axis``."""
    return np.column_stack([spin_eigenstate(axis, 1).amplitudes,
                            spin_eigenstate(axis, -1).amplitudes])


def express_in_basis(state: QubitKet, axis: Direction) -> tuple[complex, complex]:
    """Components (<up_n|psi>, <down_n|psi>) of ``state`` in the axis basis."""
    u = eigenbasis(axis)
    up, down = u.conj().T @ state.amplitudes
    return complex(up), complex(down)


def express_two_qubit_in_basis(psi: TwoQubitKet, axis_a: Direction,
                               axis_b: Direction) -> np.ndarray:
    """Amplitudes of ``psi`` in the (axis_a eigenbasis) x (axis_b eigenbasis)."""
    u = np.kron(eigenbasis(axis_a), eigenbasis(axis_b))
    return u.conj().T @ psi.amplitudes


def spin_operator(axis: Direction) -> SpinOperator:
    nx, ny, nz = axis.vector
    return SpinOperator(nx * PAULI_X + ny * PAULI_Y + nz * PAULI_Z)


def tensor_product(a: QubitKet, b: QubitKet) -> TwoQubitKet:
    return TwoQubitKet(np.kron(a.amplitudes, b.amplitudes))


_SINGLET = TwoQubitKet(np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2.0))


def singlet() -> TwoQubitKet:
    return _SINGLET


def schmidt_decompose(psi: TwoQubitKet) -> SchmidtDecomposition:
    """Schmidt decomposition via the SVD of the coefficient matrix.

    Weights come out sorted descending and terms with zero weight are dropped.
    When the two weights coincide the decomposition is not unique; the z
    eigenkets are then used for particle 1 and the partner kets follow from
    the coefficient matrix, so the singlet splits into (up, down), (down, up).
    """
    coeffs = psi.coefficients
    u, svals, vh = np.linalg.svd(coeffs)
    weights = svals ** 2
    weights = weights / weights.sum()

    if len(weights) == 2 and abs(weights[0] - weights[1]) <= DEGENERACY_ATOL:
        # coeffs is sqrt(1/2) times a unitary: any orthonormal basis works
        # for particle 1, pick z and derive the matching particle-2 kets.
        basis_a = (UP_Z, DOWN_Z)
        basis_b = tuple(QubitKet.normalized(coeffs[k]) for k in range(2))
        return SchmidtDecomposition((0.5, 0.5), basis_a, basis_b, degenerate=True)

    keep = [k for k in range(2) if svals[k] > PHASE_CUTOFF]
    basis_a, basis_b = [], []
    for k in keep:
        phi = u[:, k]
        xi = vh[k]
        # move the phase of phi onto xi so phi is canonical
        lead = phi[int(np.argmax(np.abs(phi) > PHASE_CUTOFF))]
        phase = abs(lead) / lead
        basis_a.append(QubitKet.normalized(phi * phase))
        basis_b.append(QubitKet.normalized(xi / phase))
    w = weights[keep]
    w = w / w.sum()
    return SchmidtDecomposition(tuple(float(x) for x in w), tuple(basis_a), tuple(basis_b))


def reduced_state(psi: TwoQubitKet, subsystem: int) -> np.ndarray:
    """Partial trace of |psi><psi| leaving particle ``subsystem`` (1 or 2)."""
    c = psi.coefficients
    if subsystem == 1:
        return np.einsum("ij,kj->ik", c, c.conj())
    if subsystem == 2:
        return np.einsum("ij,ik->jk", c, c.conj())
    raise ValueError(f"subsystem must be 1 or 2, got {subsystem!r}")


def reduced_state_from_schmidt(decomp: SchmidtDecomposition, subsystem: int) -> np.ndarray:
    """sum_k w_k |ket_k><ket_k| over the chosen side of a Schmidt decomposition."""
    kets = {1: decomp.basis_a, 2: decomp.basis_b}.get(subsystem)
    if kets is None:
        raise ValueError(f"subsystem must be 1 or 2, got {subsystem!r}")
    return sum(w * np.outer(k.amplitudes, k.amplitudes.conj())
               for w, k in zip(decomp.weights, kets))


def random_direction(rng: np.random.Generator) -> Direction:
    """Uniform axis on the sphere (uniform cos theta, uniform phi)."""
    u = rng.random(2)
    return Direction(math.acos(2.0 * u[0] - 1.0), TWO_PI * u[1])


def random_qubit(rng: np.random.Generator) -> QubitKet:
    return QubitKet.normalized(rng.normal(size=2) + 1j * rng.normal(size=2))


def random_two_qubit(rng: np.random.Generator) -> TwoQubitKet:
    return TwoQubitKet.normalized(rng.normal(size=4) + 1j * rng.normal(size=4))
