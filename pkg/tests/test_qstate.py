import math

import numpy as np
import pytest
from helpers import random_axes, random_kets
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from oracles import (
    components_in_basis,
    eigvec,
    partial_trace_loops,
    pauli_dot,
    same_ray,
    unit,
)

from spinlab.qstate import (
    DOWN_Z,
    UP_Z,
    XHAT,
    ZHAT,
    Direction,
    QubitKet,
    TwoQubitKet,
    angle_between,
    express_in_basis,
    express_two_qubit_in_basis,
    reduced_state,
    reduced_state_from_schmidt,
    schmidt_decompose,
    singlet,
    spin_eigenstate,
    spin_operator,
    tensor_product,
)

R2 = math.sqrt(2) / 2
angles = st.floats(min_value=-20, max_value=20, allow_nan=False)


class TestDirection:
    @given(angles, angles)
    def test_canonical_range_and_unit_norm(self, theta, phi):
        d = Direction(theta, phi)
        assert 0 <= d.theta <= math.pi
        assert 0 <= d.phi < 2 * math.pi
        assert abs(np.linalg.norm(d.vector) - 1) < 1e-12

    @given(angles, angles)
    def test_canonicalization_preserves_vector(self, theta, phi):
        assert_allclose(Direction(theta, phi).vector, unit(theta, phi), atol=1e-12)

    @pytest.mark.parametrize("theta", [0.0, math.pi, 2 * math.pi, -math.pi])
    def test_poles_have_zero_phi(self, theta):
        assert Direction(theta, 1.3).phi == 0.0

    def test_negative_theta_is_mirror(self):
        d = Direction(-0.4)
        assert d.theta == pytest.approx(0.4)
        assert d.phi == pytest.approx(math.pi)

    def test_from_vector_roundtrip(self):
        for d in random_axes(1, 20):
            assert_allclose(Direction.from_vector(d.vector).vector, d.vector, atol=1e-12)

    def test_angle_between(self):
        assert angle_between(ZHAT, XHAT) == pytest.approx(math.pi / 2, abs=1e-15)
        assert angle_between(ZHAT, Direction(-math.pi / 3)) == pytest.approx(math.pi / 3)
        assert angle_between(Direction(0.3), Direction(0.3)) == 0.0


class TestKets:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            QubitKet([1, 1])
        with pytest.raises(ValueError):
            TwoQubitKet([1, 0, 0])

    def test_normalized_constructor(self):
        k = QubitKet.normalized([3, 4j])
        assert_allclose(k.amplitudes, [0.6, 0.8j])

    def test_canonical_phase(self):
        k = QubitKet([1j * R2, R2]).canonical()
        assert_allclose(k.amplitudes, [R2, -1j * R2], atol=1e-15)

    def test_amplitudes_are_read_only(self):
        with pytest.raises(ValueError):
            UP_Z.amplitudes[0] = 0


class TestSpinEigenstate:
    def test_z_up_convention(self):
        assert_allclose(spin_eigenstate(ZHAT, 1).amplitudes, [1, 0])
        assert_allclose(spin_eigenstate(ZHAT, -1).amplitudes, [0, 1])

    def test_x_up(self):
        # hand diagonalization of sigma_x: (1, 1)/sqrt(2) has eigenvalue +1
        assert_allclose(spin_eigenstate(XHAT, 1).amplitudes, [R2, R2], atol=1e-15)

    def test_theta_pi_over_3(self):
        assert_allclose(spin_eigenstate(Direction(math.pi / 3), 1).amplitudes,
                        [math.sqrt(3) / 2, 0.5], atol=1e-15)

    def test_bad_sign(self):
        with pytest.raises(ValueError):
            spin_eigenstate(ZHAT, 0)

    def test_matches_numerical_diagonalization(self):
        for d in random_axes(2, 50):
            for s in (1, -1):
                assert same_ray(spin_eigenstate(d, s).amplitudes, eigvec(d.vector, s), 1e-12)


class TestExpressInBasis:
    def test_identity_basis(self):
        up, down = express_in_basis(UP_Z, ZHAT)
        assert (up, down) == (1, 0)

    def test_up_z_at_right_angle(self):
        up, down = express_in_basis(UP_Z, Direction(math.pi / 2))
        assert abs(up) == pytest.approx(R2) and abs(down) == pytest.approx(R2)

    @pytest.mark.parametrize("theta", [0.3, math.pi / 3, math.pi / 2, 2.5])
    def test_half_angle_coefficients(self, theta):
        # |up_z> = cos(t/2)|up_n> + sin(t/2)|down_n> and
        # |down_z> = -sin(t/2)|up_n> + cos(t/2)|down_n> hold exactly for the axis
        # at -theta in the phi = 0 plane (the mirror of +theta under this
        # package's phase convention); at +theta they hold in magnitude.
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        mirror = Direction(-theta)
        assert_allclose(express_in_basis(UP_Z, mirror), [c, s], atol=1e-12)
        assert_allclose(express_in_basis(DOWN_Z, mirror), [-s, c], atol=1e-12)
        plus = Direction(theta)
        assert_allclose(np.abs(express_in_basis(UP_Z, plus)), [c, s], atol=1e-12)
        assert_allclose(np.abs(express_in_basis(DOWN_Z, plus)), [s, c], atol=1e-12)

    def test_round_trip(self):
        r = np.random.default_rng(3)
        for d in random_axes(3, 50):
            psi = QubitKet.normalized(r.normal(size=2) + 1j * r.normal(size=2))
            up, down = express_in_basis(psi, d)
            assert abs(up) ** 2 + abs(down) ** 2 == pytest.approx(1, abs=1e-12)
            rebuilt = up * spin_eigenstate(d, 1).amplitudes + down * spin_eigenstate(d, -1).amplitudes
            assert_allclose(rebuilt, psi.amplitudes, atol=1e-12)


class TestSpinOperator:
    def test_pauli_z_and_x(self):
        assert_allclose(spin_operator(ZHAT).matrix, [[1, 0], [0, -1]])
        assert_allclose(spin_operator(XHAT).matrix, [[0, 1], [1, 0]], atol=1e-15)

    def test_pi_over_3(self):
        # cos(t) sigma_z + sin(t) sigma_x evaluated by hand
        expected = [[0.5, math.sqrt(3) / 2], [math.sqrt(3) / 2, -0.5]]
        assert_allclose(spin_operator(Direction(math.pi / 3)).matrix, expected, atol=1e-15)

    def test_properties_over_random_axes(self):
        for d in random_axes(4, 100):
            m = spin_operator(d).matrix
            assert_allclose(m, m.conj().T, atol=1e-12)
            assert abs(np.trace(m)) < 1e-12
            assert_allclose(m @ m, np.eye(2), atol=1e-12)
            assert_allclose(m, pauli_dot(d.vector), atol=1e-12)
            for s in (1, -1):
                v = spin_eigenstate(d, s).amplitudes
                assert_allclose(m @ v, s * v, atol=1e-12)


class TestSinglet:
    def test_amplitudes(self):
        assert_allclose(singlet().amplitudes, [0, 0.7071067811865476, -0.7071067811865476, 0])

    def test_same_form_in_x_basis(self):
        amps = express_two_qubit_in_basis(singlet(), XHAT, XHAT)
        assert same_ray(amps, [0, R2, -R2, 0], 1e-12)

    def test_rotational_invariance_brute_force(self):
        target = np.array([0, R2, -R2, 0])
        for d in random_axes(5, 100):
            ours = express_two_qubit_in_basis(singlet(), d, d)
            assert same_ray(ours, target, 1e-10)
            # eigh eigenvectors carry arbitrary phases, so only magnitudes are fixed
            basis = [eigvec(d.vector, 1), eigvec(d.vector, -1)]
            oracle = components_in_basis(singlet().amplitudes, basis, basis)
            assert abs(oracle[0]) < 1e-10 and abs(oracle[3]) < 1e-10
            assert abs(oracle[1]) == pytest.approx(R2, abs=1e-10)
            assert abs(oracle[2]) == pytest.approx(R2, abs=1e-10)


class TestTensorProduct:
    def test_z_products(self):
        assert_allclose(tensor_product(UP_Z, DOWN_Z).amplitudes, [0, 1, 0, 0])
        assert_allclose(tensor_product(DOWN_Z, UP_Z).amplitudes, [0, 0, 1, 0])

    def test_x_product(self):
        up_x = spin_eigenstate(XHAT, 1)
        assert_allclose(tensor_product(up_x, up_x).amplitudes, [0.5] * 4, atol=1e-15)


class TestSchmidt:
    def test_product_state(self):
        d = schmidt_decompose(tensor_product(UP_Z, DOWN_Z))
        assert d.weights == pytest.approx((1.0,))
        assert d.basis_a[0].equals_up_to_phase(UP_Z)
        assert d.basis_b[0].equals_up_to_phase(DOWN_Z)

    def test_singlet_weights(self):
        d = schmidt_decompose(singlet())
        assert_allclose(d.weights, [0.5, 0.5], atol=1e-10)
        assert d.degenerate
        assert d.reconstruct().equals_up_to_phase(singlet(), atol=1e-10)

    def test_unequal_weights(self):
        psi = TwoQubitKet([math.sqrt(0.8), 0, 0, math.sqrt(0.2)])
        d = schmidt_decompose(psi)
        assert_allclose(d.weights, [0.8, 0.2], atol=1e-12)
        assert d.basis_a[0].equals_up_to_phase(UP_Z) and d.basis_b[0].equals_up_to_phase(UP_Z)
        assert d.basis_a[1].equals_up_to_phase(DOWN_Z) and d.basis_b[1].equals_up_to_phase(DOWN_Z)

    def test_invariants_on_random_states(self):
        for psi in random_kets(6, 100):
            d = schmidt_decompose(psi)
            assert len(d) <= 2
            assert sum(d.weights) == pytest.approx(1, abs=1e-10)
            assert list(d.weights) == sorted(d.weights, reverse=True)
            for basis in (d.basis_a, d.basis_b):
                gram = np.array([[np.vdot(x.amplitudes, y.amplitudes) for y in basis]
                                 for x in basis])
                assert_allclose(gram, np.eye(len(basis)), atol=1e-10)
            assert same_ray(d.reconstruct().amplitudes, psi.amplitudes, 1e-10)


class TestReducedState:
    def test_singlet(self):
        assert_allclose(reduced_state(singlet(), 2), np.eye(2) / 2, atol=1e-15)

    def test_product(self):
        psi = tensor_product(UP_Z, DOWN_Z)
        assert_allclose(reduced_state(psi, 1), [[1, 0], [0, 0]])
        assert_allclose(reduced_state(psi, 2), [[0, 0], [0, 1]])

    def test_bad_subsystem(self):
        with pytest.raises(ValueError):
            reduced_state(singlet(), 3)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_three_routes_agree(self, seed):
        psi = random_kets(seed, 1)[0]
        for side in (1, 2):
            rho = reduced_state(psi, side)
            assert_allclose(rho, partial_trace_loops(psi.amplitudes, side), atol=1e-12)
            assert_allclose(rho, reduced_state_from_schmidt(schmidt_decompose(psi), side),
                            atol=1e-10)
            assert np.trace(rho).real == pytest.approx(1, abs=1e-12)
            assert np.all(np.linalg.eigvalsh(rho) > -1e-12)
