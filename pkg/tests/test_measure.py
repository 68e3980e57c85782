import math

import numpy as np
import pytest
from helpers import random_axes, random_kets
from numpy.testing import assert_allclose
from oracles import correlation_by_enumeration, joint_probs_by_projectors, projector

from spinlab.estimate import binomial_stderr
from spinlab.measure import (
    Absorbed,
    Counter,
    SequentialResult,
    expectation,
    joint_correlation,
    joint_probabilities,
    outcome_probabilities,
    run_sequential,
    sample_joint,
    sample_measurement,
    sample_outcomes,
    sequential_stern_gerlach,
    single_particle_correlation,
)
from spinlab.qstate import (
    DOWN_Z,
    UP_Z,
    XHAT,
    ZHAT,
    Direction,
    QubitKet,
    singlet,
    spin_eigenstate,
    tensor_product,
)

N = 1_000_000
UP_X = spin_eigenstate(XHAT, 1)
PI3 = Direction(math.pi / 3)


def test_expectation_examples():
    assert expectation(UP_Z, ZHAT) == 1
    assert expectation(UP_Z, PI3) == pytest.approx(0.5, abs=1e-12)
    assert expectation(UP_X, ZHAT) == pytest.approx(0, abs=1e-15)


def test_single_particle_correlation_examples():
    assert single_particle_correlation(ZHAT, ZHAT) == 1
    assert single_particle_correlation(ZHAT, PI3) == pytest.approx(0.5, abs=1e-12)
    assert single_particle_correlation(ZHAT, XHAT) == pytest.approx(0, abs=1e-15)


def test_single_particle_is_cos_of_angle():
    axes = random_axes(10, 100)
    for a, b in zip(axes[::2], axes[1::2]):
        assert single_particle_correlation(a, b) == pytest.approx(
            float(a.vector @ b.vector), abs=1e-12)


def test_joint_correlation_examples():
    assert joint_correlation(singlet(), ZHAT, ZHAT) == pytest.approx(-1, abs=1e-12)
    assert joint_correlation(singlet(), ZHAT, PI3) == pytest.approx(-0.5, abs=1e-12)
    updown = tensor_product(UP_Z, DOWN_Z)
    assert joint_correlation(updown, XHAT, XHAT) == pytest.approx(0, abs=1e-15)


def test_singlet_is_minus_single_particle():
    axes = random_axes(11, 400)
    for a, b in zip(axes[::2], axes[1::2]):
        assert joint_correlation(singlet(), a, b) == pytest.approx(
            -single_particle_correlation(a, b), abs=1e-12)


def test_joint_correlation_matches_projector_enumeration():
    kets = random_kets(12, 50)
    axes = random_axes(13, 100)
    for psi, a, b in zip(kets, axes[::2], axes[1::2]):
        assert joint_correlation(psi, a, b) == pytest.approx(
            correlation_by_enumeration(psi.amplitudes, a.vector, b.vector), abs=1e-12)
        assert_allclose(joint_probabilities(psi, a, b),
                        joint_probs_by_projectors(psi.amplitudes, a.vector, b.vector), atol=1e-12)


def test_outcome_probabilities_match_projectors():
    r = np.random.default_rng(14)
    for d in random_axes(14, 30):
        psi = QubitKet.normalized(r.normal(size=2) + 1j * r.normal(size=2))
        p = [np.vdot(psi.amplitudes, projector(d.vector, s) @ psi.amplitudes).real for s in (1, -1)]
        assert_allclose(outcome_probabilities(psi, d), p, atol=1e-12)


class TestSampleMeasurement:
    def test_eigenstate_is_deterministic(self, rng):
        for _ in range(100):
            s, post = sample_measurement(UP_Z, ZHAT, rng)
            assert s == 1 and post.equals_up_to_phase(UP_Z)

    @pytest.mark.parametrize("theta, p_up", [(math.pi / 2, 0.5), (math.pi / 3, 0.75)])
    def test_born_frequencies(self, rng, theta, p_up):
        out = sample_outcomes(UP_Z, Direction(theta), rng, N)
        freq = np.mean(out == 1)
        assert abs(freq - p_up) < 0.002
        assert abs(freq - p_up) < 4 * binomial_stderr(p_up, N)

    def test_repeatability(self, rng):
        for d in random_axes(15, 200):
            s1, post = sample_measurement(UP_X, d, rng)
            s2, _ = sample_measurement(post, d, rng)
            assert s1 == s2

    def test_batch_equals_scalar_calls(self):
        a = np.random.default_rng(5)
        b = np.random.default_rng(5)
        batch = sample_outcomes(UP_X, PI3, a, 500)
        scalar = [sample_measurement(UP_X, PI3, b)[0] for _ in range(500)]
        assert list(batch) == scalar

    def test_born_rule_random_states(self, rng):
        # 4 standard errors at n = 10^6 across random states and axes
        r = np.random.default_rng(16)
        for d in random_axes(16, 5):
            psi = QubitKet.normalized(r.normal(size=2) + 1j * r.normal(size=2))
            p = outcome_probabilities(psi, d)[0]
            freq = np.mean(sample_outcomes(psi, d, rng, N) == 1)
            assert abs(freq - p) <= 4 * binomial_stderr(p, N)


class TestSampleJoint:
    def test_singlet_zz(self, rng):
        a, b = sample_joint(singlet(), ZHAT, ZHAT, rng, size=N)
        assert np.all(a == -b)
        assert abs(np.mean(a == 1) - 0.5) < 0.002

    def test_singlet_zx(self, rng):
        a, b = sample_joint(singlet(), ZHAT, XHAT, rng, size=N)
        for sa in (1, -1):
            for sb in (1, -1):
                assert abs(np.mean((a == sa) & (b == sb)) - 0.25) < 0.002

    def test_product(self, rng):
        a, b = sample_joint(tensor_product(UP_Z, DOWN_Z), ZHAT, ZHAT, rng, size=1000)
        assert np.all(a == 1) and np.all(b == -1)

    def test_scalar_form(self, rng):
        s = sample_joint(singlet(), ZHAT, ZHAT, rng)
        assert s in ((1, -1), (-1, 1))

    def test_monte_carlo_matches_analytic(self, rng):
        for psi, (a, b) in zip(random_kets(17, 5), zip(random_axes(18, 5), random_axes(19, 5))):
            x, y = sample_joint(psi, a, b, rng, size=N)
            mean = np.mean(x.astype(np.int64) * y)
            se = math.sqrt((1 - mean ** 2) / N)
            assert abs(mean - joint_correlation(psi, a, b)) < 4 * se


class TestSequential:
    def test_eigen_input_always_d1(self, rng):
        for _ in range(200):
            r = sequential_stern_gerlach(UP_Z, ZHAT, rng)
            assert isinstance(r, SequentialResult)
            assert r.counter is Counter.D1 and r.second_outcome == 1
        stats = run_sequential(UP_Z, ZHAT, 10_000, rng)
        assert stats.n_d1 == 10_000 and stats.correlation.mean == 1

    def test_pi_over_3(self, rng):
        stats = run_sequential(UP_Z, PI3, N, rng)
        assert abs(stats.p_d1 - 0.75) < 0.002
        assert abs(stats.correlation.mean - 0.5) < 0.004

    def test_x_input_enters_half_the_time(self, rng):
        stats = run_sequential(UP_X, Direction(1.1, 0.4), N, rng)
        assert abs(stats.p_enter - 0.5) < 0.002

    def test_down_input_absorbed(self, rng):
        assert sequential_stern_gerlach(DOWN_Z, PI3, rng) == Absorbed()
        stats = run_sequential(DOWN_Z, PI3, 100, rng)
        assert stats.n_entered == 0 and stats.correlation is None
        assert math.isnan(stats.p_d1)

    def test_scalar_and_batch_agree(self):
        a, b = np.random.default_rng(9), np.random.default_rng(9)
        stats = run_sequential(UP_X, PI3, 300, a)
        singles = [sequential_stern_gerlach(UP_X, PI3, b) for _ in range(300)]
        entered = [r for r in singles if isinstance(r, SequentialResult)]
        assert stats.n_entered == len(entered)
        assert stats.n_d1 == sum(r.counter is Counter.D1 for r in entered)
