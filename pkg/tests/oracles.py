"""Independent reference computations used by the tests.

Nothing here imports the package's algebra: Pauli matrices, projectors and
partial traces are rebuilt from scratch with explicit loops or formulas, so a
shared bug cannot make both sides of a check agree.
"""

import math

import numpy as np

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def unit(theta, phi=0.0):
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi),
                     math.cos(theta)])


def pauli_dot(n):
    return n[0] * SX + n[1] * SY + n[2] * SZ


def projector(n, sign):
    """(I + s n.sigma) / 2, the spectral projector for outcome ``sign``."""
    return (I2 + sign * pauli_dot(n)) / 2


def eigvec(n, sign):
    """Eigenvector by numerical diagonalization (eigh), any phase."""
    w, v = np.linalg.eigh(pauli_dot(n))
    return v[:, int(np.argmin(np.abs(w - sign)))]


def joint_probs_by_projectors(psi, na, nb):
    """p(s_a, s_b) = <psi| P_a(s_a) (x) P_b(s_b) |psi>, order (++, +-, -+, --)."""
    out = []
    for sa in (1, -1):
        for sb in (1, -1):
            op = np.kron(projector(na, sa), projector(nb, sb))
            out.append(float(np.vdot(psi, op @ psi).real))
    return np.array(out)


def correlation_by_enumeration(psi, na, nb):
    p = joint_probs_by_projectors(psi, na, nb)
    return float(p @ np.array([1, -1, -1, 1]))


def partial_trace_loops(psi, keep):
    """Reduced density matrix by explicit index contraction."""
    c = np.asarray(psi).reshape(2, 2)
    rho = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                if keep == 1:
                    rho[i, j] += c[i, k] * np.conj(c[j, k])
                else:
                    rho[i, j] += c[k, i] * np.conj(c[k, j])
    return rho


def components_in_basis(psi, basis_a, basis_b):
    """<e_i (x) f_j | psi> by explicit double loop."""
    out = []
    for e in basis_a:
        for f in basis_b:
            out.append(np.vdot(np.kron(e, f), psi))
    return np.array(out)


def same_ray(u, v, atol):
    """True if u = e^{i g} v for some phase g."""
    u, v = np.asarray(u), np.asarray(v)
    k = int(np.argmax(np.abs(v)))
    if abs(v[k]) < 1e-14:
        return np.allclose(u, 0, atol=atol)
    phase = u[k] / v[k]
    phase /= abs(phase)
    return np.allclose(u, phase * v, rtol=0, atol=atol)


def sign_model_linear(angle):
    """Sign-model correlation from sphere geometry: a hemisphere pair disagrees
    on a fraction angle/pi of the sphere, so E[A B] = -(1 - 2 angle/pi)."""
    return 2 * angle / math.pi - 1


def sphere_by_gaussians(rng, n):
    """Uniform unit vectors by normalizing isotropic Gaussians."""
    g = rng.normal(size=(n, 3))
    return g / np.linalg.norm(g, axis=1)[:, None]


def bell_margin_symmetric(theta):
    """1 - cos t - |cos 2t - cos t| for the symmetric singlet geometry."""
    return 1 - math.cos(theta) - abs(math.cos(2 * theta) - math.cos(theta))
