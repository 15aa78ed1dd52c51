import numpy as np
import pytest

from cmcindex import ambient as amb
from cmcindex.errors import BadParameter, NotTangent, NotUnit, SingularLattice


def random_unit_quaternions(rng, n):
    q = rng.standard_normal((n, 4))
    return q / np.linalg.norm(q, axis=1)[:, None]


class TestQuaternions:
    def test_ij_equals_k(self):
        i = np.array([0.0, 1.0, 0.0, 0.0])
        j = np.array([0.0, 0.0, 1.0, 0.0])
        k = np.array([0.0, 0.0, 0.0, 1.0])
        assert np.allclose(amb.quaternion_mul(i, j), k)

    def test_conj_involution(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((50, 4))
        assert np.array_equal(amb.quaternion_conj(amb.quaternion_conj(a)), a)

    def test_norm_multiplicativity(self):
        rng = np.random.default_rng(2)
        a = rng.standard_normal((100, 4))
        b = rng.standard_normal((100, 4))
        ab = amb.quaternion_mul(a, b)
        na = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
        assert np.max(np.abs(np.linalg.norm(ab, axis=1) - na)) < 1e-12

    def test_ab_times_conj_is_squared_norms(self):
        # (a b) conj(a b) must be the scalar quaternion |a|^2 |b|^2.
        rng = np.random.default_rng(3)
        for _ in range(100):
            a = rng.standard_normal(4)
            b = rng.standard_normal(4)
            ab = amb.quaternion_mul(a, b)
            prod = amb.quaternion_mul(ab, amb.quaternion_conj(ab))
            expect = np.dot(a, a) * np.dot(b, b)
            assert abs(prod[0] - expect) < 1e-10
            assert np.max(np.abs(prod[1:])) < 1e-10

    def test_left_translation_matrix_is_mul(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            q = rng.standard_normal(4)
            p = rng.standard_normal(4)
            assert np.allclose(amb.left_translation_matrix(q) @ p, amb.quaternion_mul(q, p))


class TestGaussMap:
    def test_euclidean_identity(self):
        space = amb.euclidean3()
        eta = np.array([0.0, 0.0, 1.0])
        out = amb.gauss_map(space, np.array([3.0, -1.0, 2.0]), eta)
        assert np.array_equal(out, eta)

    def test_sphere_at_identity(self):
        space = amb.sphere3()
        p = np.array([1.0, 0.0, 0.0, 0.0])
        eta = np.array([0.0, 1.0, 0.0, 0.0])
        assert np.allclose(amb.gauss_map(space, p, eta), [1.0, 0.0, 0.0])

    def test_sphere_quaternion_example(self):
        # p = i, eta = j: conj(p) * eta = -k, so the algebra vector is (0, 0, -1).
        space = amb.sphere3()
        p = np.array([0.0, 1.0, 0.0, 0.0])
        eta = np.array([0.0, 0.0, 1.0, 0.0])
        out = amb.gauss_map(space, p, eta)
        assert np.allclose(out, [0.0, 0.0, -1.0], atol=1e-15)
        assert abs(np.linalg.norm(out) - 1.0) < 1e-12

    def test_sphere_matches_matrix_oracle(self):
        # Independent route: the 4x4 left-translation matrix by conj(p).
        rng = np.random.default_rng(5)
        space = amb.sphere3()
        p = random_unit_quaternions(rng, 50)
        eta = rng.standard_normal((50, 4))
        eta -= np.sum(eta * p, axis=1)[:, None] * p
        eta /= np.linalg.norm(eta, axis=1)[:, None]
        for k in range(50):
            out = amb.gauss_map(space, p[k], eta[k])
            oracle = (amb.left_translation_matrix(amb.quaternion_conj(p[k])) @ eta[k])[1:]
            assert np.max(np.abs(out - oracle)) < 1e-12
            assert abs(np.linalg.norm(out) - 1.0) < 1e-12

    def test_rejects_bad_inputs(self):
        space = amb.sphere3()
        with pytest.raises(NotUnit):
            amb.gauss_map(space, np.array([1.0, 0, 0, 0]), np.array([0.0, 2.0, 0, 0]))
        with pytest.raises(NotTangent):
            amb.gauss_map(space, np.array([1.0, 0, 0, 0]),
                          np.array([1.0, 1.0, 0, 0]) / np.sqrt(2.0))


class TestInvariantShapeOperator:
    def test_commutative_cases_zero(self):
        assert np.array_equal(amb.euclidean3().invariant_shape_operator(), np.zeros((2, 2)))
        assert np.array_equal(amb.flat_torus3().invariant_shape_operator(), np.zeros((2, 2)))

    def test_sphere_rotation(self):
        assert np.array_equal(amb.sphere3(+1).invariant_shape_operator(),
                              np.array([[0.0, 1.0], [-1.0, 0.0]]))
        assert np.array_equal(amb.sphere3(-1).invariant_shape_operator(),
                              np.array([[0.0, -1.0], [1.0, 0.0]]))

    def test_antisymmetric(self):
        for space in (amb.euclidean3(), amb.sphere3(+1), amb.sphere3(-1)):
            o = space.invariant_shape_operator()
            assert np.array_equal(o + o.T, np.zeros((2, 2)))

    def test_tag_invariants(self):
        assert amb.euclidean3().curvature == 0
        assert amb.sphere3().curvature == 1
        with pytest.raises(BadParameter):
            amb.AmbientSpace("S3", None, 2)
        with pytest.raises(BadParameter):
            amb.AmbientSpace("R3", None, 1)


class TestTorusWrap:
    def test_identity_lattice(self):
        out = amb.torus_wrap(np.eye(3), np.array([1.25, -0.5, 3.0]))
        assert np.allclose(out, [0.25, 0.5, 0.0], atol=1e-12)

    def test_inside_fixed(self):
        p = np.array([0.25, 0.75, 0.5])
        assert np.allclose(amb.torus_wrap(np.eye(3), p), p)

    def test_idempotent_random_lattices(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            lat = rng.standard_normal((3, 3))
            if abs(np.linalg.det(lat)) < 0.1:
                continue
            p = 10.0 * rng.standard_normal(3)
            w1 = amb.torus_wrap(lat, p)
            w2 = amb.torus_wrap(lat, w1)
            assert np.max(np.abs(w2 - w1)) < 1e-9
            # Same point modulo the lattice.
            coords = (p - w1) @ np.linalg.inv(lat)
            assert np.max(np.abs(coords - np.round(coords))) < 1e-9

    def test_singular_lattice(self):
        with pytest.raises(SingularLattice):
            amb.torus_wrap(np.zeros((3, 3)), np.zeros(3))
