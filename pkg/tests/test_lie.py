import numpy as np
import pytest
from hypothesis import given

from lievar.lie import (E1, E2, E3, LieAlgebra, ad_star, bracket, check_rotation, cross,
                        dexp_inv, group_exp, group_log, hat, is_rotation,
                        left_trivialized_group_derivative, pairing, right_trivialized_group_derivative,
                        so3, vee)

from strategies import vec

generic_so3 = LieAlgebra(so3.structure_constants, name="so3-generic")


def series_exp(m, terms=40):
    out, term = np.eye(3), np.eye(3)
    for n in range(1, terms):
        term = term @ m / n
        out = out + term
    return out


class TestHatVee:
    def test_zero(self):
        assert np.array_equal(hat(np.zeros(3)), np.zeros((3, 3)))
        assert np.array_equal(vee(np.zeros((3, 3))), np.zeros(3))

    def test_printed_generators(self):
        expected = np.array([[0, -3, 2], [3, 0, -1], [-2, 1, 0]], dtype=float)
        assert np.array_equal(hat([1, 2, 3]), expected)
        assert np.array_equal(hat([1, 2, 3]), 1 * E1 + 2 * E2 + 3 * E3)
        assert np.array_equal(vee(expected), [1, 2, 3])
        assert np.array_equal(vee(E1), [1, 0, 0])

    def test_rejects_non_skew(self):
        with pytest.raises(ValueError):
            vee(np.eye(3))

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            hat([1, 2])

    @given(vec())
    def test_roundtrip(self, v):
        assert np.array_equal(vee(hat(v)), v)
        m = hat(v)
        assert np.array_equal(hat(vee(m)), m)


class TestBracket:
    def test_examples(self):
        assert np.array_equal(bracket([1, 0, 0], [0, 1, 0]), [0, 0, 1])
        assert np.array_equal(bracket([1, 0, 0], [0, 2, 0]), [0, 0, 2])
        comm = E1 @ E2 - E2 @ E1
        assert np.array_equal(vee(comm), [0, 0, 1])

    @given(vec(), vec())
    def test_commutator_consistency(self, a, b):
        comm = hat(a) @ hat(b) - hat(b) @ hat(a)
        np.testing.assert_allclose(bracket(a, b), vee(comm, tol=1e-9), atol=1e-12 * (1 + np.abs(comm).max()))

    @given(vec())
    def test_self_bracket_vanishes(self, a):
        assert np.array_equal(bracket(a, a), np.zeros(3))

    @given(vec(), vec())
    def test_generic_path_matches_fast_path(self, a, b):
        np.testing.assert_allclose(generic_so3.bracket(a, b), so3.bracket(a, b), atol=1e-12 * (1 + np.abs(a).max() * np.abs(b).max()))
        np.testing.assert_allclose(generic_so3.ad_star(a, b), so3.ad_star(a, b), atol=1e-12 * (1 + np.abs(a).max() * np.abs(b).max()))
        np.testing.assert_allclose(generic_so3.ad(a) @ b, so3.bracket(a, b), atol=1e-12 * (1 + np.abs(a).max() * np.abs(b).max()))


class TestAlgebraDefinition:
    def test_rejects_non_antisymmetric(self):
        c = np.zeros((2, 2, 2))
        c[0, 1, 0] = 1.0
        with pytest.raises(ValueError, match="antisymmetric"):
            LieAlgebra(c)

    def test_rejects_jacobi_violation(self, rng):
        c = rng.normal(size=(3, 3, 3))
        c = c - c.transpose(1, 0, 2)
        with pytest.raises(ValueError, match="Jacobi"):
            LieAlgebra(c)

    def test_affine_algebra(self):
        # aff(1): [e0, e1] = e1
        c = np.zeros((2, 2, 2))
        c[0, 1, 1], c[1, 0, 1] = 1.0, -1.0
        alg = LieAlgebra(c)
        assert alg.dim == 2
        assert np.array_equal(alg.bracket([1, 0], [0, 1]), [0, 1])
        mu, xi, eta = np.array([0.3, -1.2]), np.array([0.7, 2.0]), np.array([-1.1, 0.4])
        assert alg.pairing(alg.ad_star(xi, mu), eta) == pytest.approx(alg.pairing(mu, alg.bracket(xi, eta)))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            so3.bracket([1, 0], [0, 1])


class TestCoadjoint:
    def test_example(self):
        assert np.array_equal(ad_star([1, 0, 0], [0, 1, 0]), [0, 0, -1])

    def test_basis_oracle(self):
        # brute-force the defining pairing over the basis
        xi, mu = np.array([1.0, 0, 0]), np.array([0, 1.0, 0])
        oracle = np.array([pairing(mu, bracket(xi, e)) for e in np.eye(3)])
        assert np.array_equal(ad_star(xi, mu), oracle)

    @given(vec())
    def test_zero_xi(self, mu):
        assert np.array_equal(ad_star(np.zeros(3), mu), np.zeros(3))

    @given(vec(), vec(), vec())
    def test_pairing_identity(self, xi, mu, eta):
        lhs = pairing(ad_star(xi, mu), eta)
        rhs = pairing(mu, bracket(xi, eta))
        assert abs(lhs - rhs) <= 1e-12 * (1 + np.abs(xi).max() * np.abs(mu).max() * np.abs(eta).max())


class TestPairing:
    def test_dual_basis(self):
        for i in range(3):
            for j in range(3):
                assert pairing(np.eye(3)[i], np.eye(3)[j]) == (1.0 if i == j else 0.0)

    def test_value(self):
        assert pairing([1, 2, 3], [4, 5, 6]) == 32.0

    @given(vec(), vec(), vec())
    def test_bilinear(self, a, b, c):
        assert pairing(2 * a + b, c) == pytest.approx(2 * pairing(a, c) + pairing(b, c), abs=1e-9)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            pairing([1, 2], [1, 2, 3])


class TestExpLog:
    def test_identity(self):
        assert np.array_equal(group_exp(np.zeros(3)), np.eye(3))

    def test_quarter_turn_against_series(self):
        expected = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1]], dtype=float)
        r = group_exp([0, 0, np.pi / 2])
        np.testing.assert_allclose(r, expected, atol=1e-12)
        np.testing.assert_allclose(r, series_exp(hat([0, 0, np.pi / 2])), atol=1e-12)

    @given(vec(bound=6.0))
    def test_orthogonality(self, v):
        r = group_exp(v)
        assert np.linalg.norm(r.T @ r - np.eye(3)) <= 1e-12
        assert abs(np.linalg.det(r) - 1) <= 1e-12
        assert is_rotation(r)

    @given(vec(bound=3.0))
    def test_against_series(self, v):
        np.testing.assert_allclose(group_exp(v), series_exp(hat(v)), atol=1e-12)

    def test_small_angle_branch_is_continuous(self):
        for s in (1e-9, 5e-7, 1e-6, 2e-6):
            v = s * np.array([0.6, -0.8, 0.0])
            np.testing.assert_allclose(group_exp(v), series_exp(hat(v)), atol=1e-15)

    def test_batched_matches_single(self, rng):
        v = rng.normal(size=(5, 3))
        batched = group_exp(v)
        for i in range(5):
            np.testing.assert_allclose(batched[i], group_exp(v[i]), atol=1e-15)

    @given(vec(bound=3.0))
    def test_log_roundtrip(self, v):
        if np.linalg.norm(v) >= np.pi - 1e-6:
            return
        np.testing.assert_allclose(group_log(group_exp(v)), v, atol=1e-9)

    def test_log_near_pi(self):
        axis = np.array([1.0, 2.0, -2.0]) / 3.0
        for angle in (np.pi - 1e-3, np.pi - 1e-9, np.pi):
            phi = group_log(group_exp(angle * axis))
            np.testing.assert_allclose(group_exp(phi), group_exp(angle * axis), atol=1e-9)
            assert np.linalg.norm(phi) == pytest.approx(angle, abs=1e-8)

    def test_check_rotation(self):
        with pytest.raises(ValueError):
            check_rotation(2 * np.eye(3))
        with pytest.raises(ValueError):
            check_rotation(np.diag([1.0, 1.0, -1.0]))


class TestGroupDerivative:
    def test_constant(self):
        d = left_trivialized_group_derivative(lambda g: 3.0, group_exp([0.1, 0.2, 0.3]))
        assert np.array_equal(d, np.zeros(3))

    def test_trace_at_identity(self):
        d = left_trivialized_group_derivative(np.trace, np.eye(3))
        np.testing.assert_allclose(d, 0.0, atol=1e-12)

    def test_entry_against_analytic(self):
        f = lambda g: g[2, 2]  # noqa: E731
        np.testing.assert_allclose(left_trivialized_group_derivative(f, np.eye(3)), 0.0, atol=1e-12)
        g = group_exp([np.pi / 2, 0, 0])
        # d/ds (g exp(s E_i))_33 = (g E_i)_33
        analytic = np.array([(g @ e)[2, 2] for e in (E1, E2, E3)])
        np.testing.assert_allclose(left_trivialized_group_derivative(f, g), analytic, atol=1e-10)

    def test_right_derivative_is_coadjoint(self, rng):
        g = group_exp(rng.normal(size=3))
        w = rng.normal(size=(3, 3))
        f = lambda h: float(np.sum(w * h))  # noqa: E731
        left = left_trivialized_group_derivative(f, g)
        right = right_trivialized_group_derivative(f, g)
        np.testing.assert_allclose(right, g @ left, atol=1e-10)

    def test_non_finite(self):
        with pytest.raises(FloatingPointError):
            left_trivialized_group_derivative(lambda g: np.nan, np.eye(3))


class TestDexpInv:
    def test_inverts_left_trivialized_differential(self, rng):
        for _ in range(5):
            theta, v = rng.normal(size=3), rng.normal(size=3)
            w = dexp_inv(-theta, v)
            h = 1e-6
            dexp = (group_exp(theta + h * w) - group_exp(theta - h * w)) / (2 * h)
            np.testing.assert_allclose(vee(group_exp(theta).T @ dexp, tol=1e-8), v, atol=1e-8)

    def test_small_theta(self):
        v = np.array([0.3, -0.1, 0.7])
        np.testing.assert_allclose(dexp_inv(np.zeros(3), v), v)
        np.testing.assert_allclose(dexp_inv(np.full(3, 1e-6), v), dexp_inv(np.full(3, 2e-4), v), atol=1e-3)


def test_cross_matches_numpy(rng):
    a, b = rng.normal(size=3), rng.normal(size=3)
    np.testing.assert_allclose(cross(a, b), np.cross(a, b))
    np.testing.assert_allclose(cross(rng.normal(size=(4, 3)), b).shape, (4, 3))
