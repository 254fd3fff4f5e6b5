import numpy as np
import pytest
from numpy.testing import assert_allclose

from povmlab.linalg import Operator
from povmlab.povm import are_prob_complementary, marginal
from povmlab.spin import (
    SpinPhaseSpace,
    coexist_criterion,
    coexist_oracle,
    criterion_value,
    joint_spin_observable,
    s3_operator,
    spin_effect,
    spin_observable,
    spin_phase_covariance_residual,
    spin_phase_effect,
    spin_phase_first_moment,
    spin_phase_observable,
)

X = np.array([1.0, 0.0, 0.0])
Y = np.array([0.0, 1.0, 0.0])
Z = np.array([0.0, 0.0, 1.0])


def random_pair(rng, max_norm=1.0):
    while True:
        a = rng.uniform(-1, 1, 3)
        if np.linalg.norm(a) <= max_norm:
            return a


class TestSpinEffect:
    def test_zero_vector_maximally_unsharp(self):
        assert_allclose(spin_effect(0 * Z).op.mat, np.eye(2) / 2)

    def test_sharp_z_projection(self):
        assert_allclose(spin_effect(Z).op.mat, np.diag([1.0, 0.0]), atol=1e-15)

    def test_eigenvalues(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            a = random_pair(rng)
            w = np.linalg.eigvalsh(spin_effect(a).op.mat)
            n = np.linalg.norm(a)
            assert_allclose(np.sort(w), [(1 - n) / 2, (1 + n) / 2], atol=1e-12)

    def test_rejects_long_vector(self):
        with pytest.raises(ValueError):
            spin_effect(1.2 * Z)

    def test_idempotency_only_when_sharp(self):
        e = spin_effect(0.7 * X).op.mat
        assert np.linalg.norm(e @ e - e) > 1e-3
        p = spin_effect(X).op.mat
        assert np.max(np.abs(p @ p - p)) < 1e-12


class TestCoexistence:
    def test_equal_sharp_pair_boundary(self):
        assert criterion_value(Z, Z) == pytest.approx(2.0, abs=1e-14)
        assert coexist_criterion(Z, Z)

    def test_orthogonal_sharp_pair(self):
        assert criterion_value(X, Y) == pytest.approx(2 * np.sqrt(2), abs=1e-12)
        assert not coexist_criterion(X, Y)

    def test_smeared_orthogonal_pair(self):
        assert criterion_value(0.6 * X, 0.6 * Y) == pytest.approx(
            1.2 * np.sqrt(2), abs=1e-12
        )
        assert coexist_criterion(0.6 * X, 0.6 * Y)

    def test_sharp_input_forces_commutativity(self):
        # one sharp vector: coexistence holds exactly on (anti)parallel pairs
        assert coexist_criterion(X, 0.4 * X)
        assert coexist_criterion(X, -0.4 * X)
        assert not coexist_criterion(X, 0.4 * Y)
        tilted = 0.4 * np.array([np.cos(0.05), np.sin(0.05), 0.0])
        assert not coexist_criterion(X, tilted)


class TestOracle:
    def test_complement_pair(self):
        assert coexist_oracle(0.8 * X, -0.8 * X)

    def test_orthogonal_sharp(self):
        assert not coexist_oracle(X, Y)

    def test_agrees_with_criterion(self):
        rng = np.random.default_rng(1)
        for _ in range(500):
            a1, a2 = random_pair(rng), random_pair(rng)
            assert coexist_oracle(a1, a2) == coexist_criterion(a1, a2)

    def test_grid_fallback_agrees(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            a1, a2 = random_pair(rng), random_pair(rng)
            assert coexist_oracle(a1, a2, grid_fallback="always") == coexist_criterion(
                a1, a2
            )


class TestJointObservable:
    def test_marginals(self):
        joint = joint_spin_observable(0.6 * X, 0.6 * Y)
        m1 = marginal(joint, keep=0)
        m2 = marginal(joint, keep=1)
        assert np.max(np.abs(m1.effect_for(1).op.mat - spin_effect(0.6 * X).op.mat)) < 1e-12
        assert np.max(np.abs(m2.effect_for(1).op.mat - spin_effect(0.6 * Y).op.mat)) < 1e-12

    def test_correlated_sharp_case(self):
        joint = joint_spin_observable(Z, Z)
        assert_allclose(joint.effect_for((1, 1)).op.mat, np.diag([1.0, 0.0]), atol=1e-14)
        assert np.max(np.abs(joint.effect_for((1, -1)).op.mat)) < 1e-14

    def test_positive_effects(self):
        joint = joint_spin_observable(0.6 * X, 0.6 * Y)
        for _, e in joint:
            assert np.linalg.eigvalsh(e.op.mat).min() >= -1e-12

    def test_rejects_noncoexistent(self):
        with pytest.raises(ValueError):
            joint_spin_observable(X, Y)


class TestSpinPhase:
    def test_full_circle_is_identity_exactly(self):
        for s in (0.5, 1.0, 1.5):
            e = spin_phase_effect(SpinPhaseSpace(s), (0.0, 2 * np.pi))
            assert np.array_equal(e.op.mat, np.eye(round(2 * s) + 1))

    def test_half_circle_eigenvalues(self):
        e = spin_phase_effect(SpinPhaseSpace(0.5), (0.0, np.pi))
        w = np.linalg.eigvalsh(e.op.mat)
        assert_allclose(np.sort(w), [0.5 - 1 / np.pi, 0.5 + 1 / np.pi], atol=1e-12)

    def test_uniform_diagonal(self):
        space = SpinPhaseSpace(1.5)
        for alpha in (0.3, 1.0, 5.2):
            e = spin_phase_effect(space, (0.0, alpha))
            assert np.max(np.abs(np.diag(e.op.mat) - alpha / (2 * np.pi))) < 1e-12

    def test_covariance_zero_shift(self):
        assert spin_phase_covariance_residual(SpinPhaseSpace(1.0), (0.2, 1.2), 0.0) == 0.0

    def test_covariance_wraparound(self):
        r = spin_phase_covariance_residual(SpinPhaseSpace(0.5), (0.0, np.pi), np.pi)
        assert r < 1e-10

    def test_covariance_sweep(self):
        rng = np.random.default_rng(3)
        space = SpinPhaseSpace(1.5)
        for _ in range(100):
            u = rng.uniform(0, 2 * np.pi)
            v = rng.uniform(u, 2 * np.pi)
            alpha = rng.uniform(0, 2 * np.pi)
            assert spin_phase_covariance_residual(space, (u, v), alpha) < 1e-10

    def test_additivity(self):
        space = SpinPhaseSpace(1.0)
        u, v, w = 0.3, 1.7, 4.0
        lhs = spin_phase_effect(space, (u, w)).op.mat
        rhs = spin_phase_effect(space, (u, v)).op.mat + spin_phase_effect(
            space, (v, w)
        ).op.mat
        assert np.max(np.abs(lhs - rhs)) < 1e-15

    def test_rejects_malformed_interval(self):
        with pytest.raises(ValueError):
            spin_phase_effect(SpinPhaseSpace(0.5), (1.0, 0.5))
        with pytest.raises(ValueError):
            spin_phase_effect(SpinPhaseSpace(0.5), (-0.1, 1.0))

    def test_first_moment_structure(self):
        b = spin_phase_first_moment(SpinPhaseSpace(0.5)).mat
        assert_allclose(b, [[0, 0], [1, 0]])
        assert np.max(np.abs(b @ b)) == 0.0  # nilpotent for spin 1/2
        assert np.linalg.norm(b, 2) == pytest.approx(1.0)

    def test_first_moment_equals_polar_isometry(self):
        # independent route: polar decomposition of the raising operator
        for s in (0.5, 1.0, 2.5):
            space = SpinPhaseSpace(s)
            m = space.m_values
            raising = np.zeros((space.dim, space.dim), dtype=complex)
            for i in range(space.dim - 1):
                raising[i + 1, i] = np.sqrt(s * (s + 1) - m[i] * (m[i] + 1))
            modulus = np.sqrt(raising.conj().T @ raising).real
            b = np.zeros_like(raising)
            for i in range(space.dim - 1):
                b[:, i] = raising[:, i] / modulus[i, i]
            assert np.max(np.abs(spin_phase_first_moment(space).mat - b)) < 1e-12

    def test_first_moment_from_quadrature(self):
        # Riemann sums of e^{i alpha} S(d alpha) converge to the ladder isometry
        space = SpinPhaseSpace(1.0)
        n = 4096
        edges = np.linspace(0.0, 2 * np.pi, n + 1)
        acc = np.zeros((space.dim, space.dim), dtype=complex)
        for lo, hi in zip(edges[:-1], edges[1:]):
            acc += np.exp(1j * (lo + hi) / 2) * spin_phase_effect(space, (lo, hi)).op.mat
        assert np.max(np.abs(acc - spin_phase_first_moment(space).mat)) < 1e-6

    def test_ladder_commutation(self):
        # s3 B - B s3 = B for the ladder isometry
        for s in (0.5, 1.5):
            space = SpinPhaseSpace(s)
            b = spin_phase_first_moment(space).mat
            s3 = s3_operator(space).mat
            assert np.max(np.abs(s3 @ b - b @ s3 - b)) < 1e-12

    def test_never_projection_inside(self):
        # strict eigenvalue margins at spin 1/2, looser intervals for spin 1
        space = SpinPhaseSpace(0.5)
        for length in np.linspace(0.1, 2 * np.pi - 0.1, 25):
            w = np.linalg.eigvalsh(spin_phase_effect(space, (0.0, length)).op.mat)
            assert w.min() > 1e-6 and w.max() < 1 - 1e-6
        space1 = SpinPhaseSpace(1.0)
        for length in np.linspace(1.0, 2 * np.pi - 1.0, 10):
            w = np.linalg.eigvalsh(spin_phase_effect(space1, (0.0, length)).op.mat)
            assert w.min() > 1e-6 and w.max() < 1 - 1e-6

    def test_prob_complementary_with_s3_but_lower_bounded(self):
        space = SpinPhaseSpace(0.5)
        s3_obs = spin_observable(Z)
        phase = spin_phase_observable(space, bins=8)
        assert are_prob_complementary(s3_obs, phase)
        # every nontrivial interval effect strictly dominates a multiple of
        # any spin eigenstate: its smallest eigenvalue is positive
        for length in (0.5, 2.0, 4.0):
            w = np.linalg.eigvalsh(spin_phase_effect(space, (0.0, length)).op.mat)
            assert w.min() > 0


class TestSpinPhaseSpace:
    def test_dim(self):
        assert SpinPhaseSpace(0.5).dim == 2
        assert SpinPhaseSpace(2.0).dim == 5

    def test_rejects_bad_spin(self):
        with pytest.raises(ValueError):
            SpinPhaseSpace(0.3)

    def test_m_ordering_ascending(self):
        assert_allclose(SpinPhaseSpace(1.0).m_values, [-1.0, 0.0, 1.0])
