import numpy as np
import pytest

from cmcindex import hodge
from cmcindex import surfaces as zoo
from cmcindex.errors import HasBoundary, KernelDimensionMismatch
from cmcindex.mesh import TriangleMesh


def planar_grid_surface(n=9, spacing=0.1):
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    verts = np.stack([ii.ravel() * spacing, jj.ravel() * spacing, np.zeros(n * n)], axis=1)
    faces = []
    for i in range(n - 1):
        for j in range(n - 1):
            a = i * n + j
            faces.append([a, a + n, a + n + 1])
            faces.append([a, a + n + 1, a + 1])
    mesh = TriangleMesh(verts, np.array(faces))
    normal = np.tile([0.0, 0.0, 1.0], (n * n, 1))
    A = np.zeros((n * n, 2, 2))
    return zoo.ImmersedSurface.from_vertex_data(mesh, normal, A, np.zeros(n * n))


class TestCochainCalculus:
    def test_d1_d0_zero_exactly(self, clifford16, sphere_lvl2):
        for s in (clifford16, sphere_lvl2):
            ops = hodge.dec(s)
            prod = (ops.d1 @ ops.d0).toarray()
            assert np.max(np.abs(prod)) == 0.0

    def test_d0_constant_is_zero(self, t3_16):
        ops = hodge.dec(t3_16)
        assert np.max(np.abs(ops.apply_d0(np.ones(t3_16.n_vertices)))) == 0.0

    def test_adjointness(self, t3_16, clifford16):
        rng = np.random.default_rng(0)
        for s in (t3_16, clifford16):
            ops = hodge.dec(s)
            phi = rng.standard_normal(s.n_vertices)
            w = rng.standard_normal(s.mesh.n_edges)
            lhs = ops.inner1(ops.apply_d0(phi), w)
            rhs = ops.inner0(phi, ops.apply_delta(w))
            assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)


class TestHarmonicBasis:
    def test_sphere_empty(self, sphere_lvl2):
        assert hodge.harmonic_basis(sphere_lvl2).dimension == 0

    def test_torus_dimension_two(self, clifford16, t3_16):
        for s in (clifford16, t3_16):
            b = hodge.harmonic_basis(s)
            assert b.dimension == 2
            assert np.max(np.abs(b.gram - np.eye(2))) < 1e-10

    def test_genus2_dimension_four(self, genus2):
        b = hodge.harmonic_basis(genus2)
        assert b.dimension == 4
        assert np.linalg.matrix_rank(b.gram, tol=1e-8) == 4

    def test_residuals_within_epsilon(self, clifford16):
        b = hodge.harmonic_basis(clifford16)
        # Members are harmonic at 1e-8 relative to the (unit) field norms.
        assert np.max(b.residual_d) < 1e-8
        assert np.max(b.residual_delta) < 1e-8

    def test_torus_span_matches_constant_fields(self, t3_16):
        # Sharps of the harmonic forms span the two constant coordinate
        # fields: compare spans through mass-weighted projections.
        b = hodge.harmonic_basis(t3_16)
        m = t3_16.mesh.metric().dual_area
        const_fields = [np.tile([1.0, 0.0], (t3_16.n_vertices, 1)),
                        np.tile([0.0, 1.0], (t3_16.n_vertices, 1))]
        for target in const_fields:
            coeffs = [np.sum(m * np.sum(target * b.fields[i], axis=1)) for i in range(2)]
            recon = coeffs[0] * b.fields[0] + coeffs[1] * b.fields[1]
            err = hodge.field_norm(t3_16, recon - target) / hodge.field_norm(t3_16, target)
            assert err < 1e-8

    def test_boundary_rejected(self):
        cyl = zoo.gen_cylinder_r3(1.0, 2.0, 8, 4)
        with pytest.raises(HasBoundary):
            hodge.harmonic_basis(cyl)

    def test_kernel_dimension_guard(self, clifford16):
        # An absurd tolerance classifies nonzero eigenvalues as kernel.
        with pytest.raises(KernelDimensionMismatch):
            hodge.harmonic_basis(clifford16, rel_tol=1.0)


class TestSharpFlat:
    def test_sharp_exact_for_linear(self):
        s = planar_grid_surface()
        phi = 2.0 * s.mesh.vertices[:, 0] - 0.7 * s.mesh.vertices[:, 1]
        w = hodge.dec(s).apply_d0(phi)
        xi = hodge.sharp(s, w)
        target = np.einsum("vd,d->v", s.e1, [2.0, -0.7, 0.0])
        expect = np.stack([target, np.einsum("vd,d->v", s.e2, [2.0, -0.7, 0.0])], axis=1)
        assert np.max(np.abs(xi - expect)) < 1e-12

    def test_zero_form_zero_field(self, clifford16):
        assert np.max(np.abs(hodge.sharp(clifford16, np.zeros(clifford16.mesh.n_edges)))) == 0.0
        assert np.max(np.abs(hodge.flat(clifford16, np.zeros((clifford16.n_vertices, 2))))) == 0.0

    def test_flat_sharp_roundtrip_first_order(self):
        errs = []
        for n in (8, 16, 32):
            s = zoo.gen_flat_torus_s3(0.6, n, n)
            b = hodge.harmonic_basis(s)
            w = b.forms[0]
            rt = hodge.flat(s, hodge.sharp(s, w))
            num = np.sqrt(hodge.dec(s).inner1(rt - w, rt - w))
            den = np.sqrt(abs(hodge.dec(s).inner1(w, w)))
            errs.append(num / den)
        assert errs[0] / errs[1] >= 2.0
        assert errs[1] / errs[2] >= 2.0


class TestJRotate:
    def test_basic_rotation(self):
        assert np.array_equal(hodge.j_rotate(np.array([[1.0, 0.0]])), [[0.0, 1.0]])

    def test_complex_structure(self):
        rng = np.random.default_rng(1)
        xi = rng.standard_normal((100, 2))
        assert np.array_equal(hodge.j_rotate(hodge.j_rotate(xi)), -xi)

    def test_isometry_and_orthogonality(self):
        rng = np.random.default_rng(2)
        xi = rng.standard_normal((100, 2))
        jxi = hodge.j_rotate(xi)
        assert np.max(np.abs(np.sum(jxi * jxi, 1) - np.sum(xi * xi, 1))) == 0.0
        assert np.max(np.abs(np.sum(jxi * xi, 1))) == 0.0

    def test_rotation_realizes_star_on_flat_torus(self):
        # flat(J sharp(w)) converges to the harmonic representative of *w:
        # it stays (numerically) inside the harmonic span, orthogonal to w,
        # with the same norm.
        prev = None
        for n in (8, 16, 32):
            s = zoo.gen_flat_torus_t3(None, n, n)
            b = hodge.harmonic_basis(s)
            w = b.forms[0]
            xi = b.fields[0]
            zeta = hodge.flat(s, hodge.j_rotate(xi))
            zsharp = hodge.sharp(s, zeta)
            m = s.mesh.metric().dual_area
            coeffs = [np.sum(m * np.sum(zsharp * b.fields[i], axis=1)) for i in range(2)]
            recon = coeffs[0] * b.fields[0] + coeffs[1] * b.fields[1]
            resid = hodge.field_norm(s, zsharp - recon) / hodge.field_norm(s, zsharp)
            ortho = abs(np.sum(m * np.sum(zsharp * xi, axis=1)))
            norm_gap = abs(hodge.field_norm(s, zsharp) - hodge.field_norm(s, xi))
            if prev is not None:
                assert resid <= prev + 1e-12
            prev = resid
            assert ortho < 1e-8
            assert norm_gap < 0.05 * hodge.field_norm(s, xi)
        assert prev < 1e-6

    def test_norm_realizations_agree(self, t3_16):
        # The cot-weighted 1-form norm and the lumped field norm are two
        # discretizations of the same L2 norm.
        b = hodge.harmonic_basis(t3_16)
        ops = hodge.dec(t3_16)
        for i in range(2):
            star_norm = ops.inner1(b.forms[i], b.forms[i])
            field_norm = hodge.field_inner(t3_16, b.fields[i], b.fields[i])
            assert abs(star_norm - field_norm) < 0.02 * abs(field_norm)


class TestFrameIdentities:
    def test_trace_identity_random_matrices(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            a, b, d = rng.standard_normal(3)
            A = np.array([[a, b], [b, d]])
            xi = rng.standard_normal(2)
            jxi = np.array([-xi[1], xi[0]])
            lhs = xi @ A @ xi + jxi @ A @ jxi
            assert abs(lhs - np.trace(A) * (xi @ xi)) < 1e-12 * max(1.0, abs(lhs))

    def test_pointwise_identities_on_zoo(self, clifford16, geodesic_lvl3):
        rng = np.random.default_rng(4)
        for s in (clifford16, geodesic_lvl3):
            A = s.shape_op
            alpha = s.space.invariant_shape_operator()
            xi = rng.standard_normal((s.n_vertices, 2))
            jxi = hodge.j_rotate(xi)
            n2 = np.sum(xi * xi, axis=1)
            Axi = np.einsum("vij,vj->vi", A, xi)
            Ajxi = np.einsum("vij,vj->vi", A, jxi)
            lhs = np.sum(Axi * xi, 1) + np.sum(Ajxi * jxi, 1)
            assert np.max(np.abs(lhs - 2.0 * s.H * n2)) < 1e-12 * max(1.0, np.max(np.abs(lhs)))
            cross = np.sum(Axi * (xi @ alpha.T), 1) + np.sum(Ajxi * (jxi @ alpha.T), 1)
            assert np.max(np.abs(cross)) < 1e-12 * max(1.0, np.max(np.abs(Axi)))

    def test_perp_norm_preserved_on_surface(self, clifford16):
        rng = np.random.default_rng(5)
        xi = rng.standard_normal((clifford16.n_vertices, 2))
        jxi = hodge.j_rotate(xi)
        assert np.array_equal(np.sum(jxi * jxi, 1), np.sum(xi * xi, 1))
