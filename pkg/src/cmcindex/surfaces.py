"""Immersed surfaces with per-vertex curvature data, and their generators.

Sign conventions, used consistently everywhere:

* the shape operator is ``A = -(tangential part of) d(eta)``, symmetric in
  any orthonormal tangent frame, with mean curvature ``H = tr(A) / 2`` and
  extrinsic curvature ``K_ext = det(A)``;
* the differential of the translated unit normal is then ``-(A + alpha)``
  in an oriented tangent frame, where ``alpha`` is the ambient invariant
  operator (zero, or a +/-90-degree rotation on S^3);
* the intrinsic curvature of analytic surfaces satisfies
  ``K = K_ext + c`` with c the ambient curvature constant.

Each generator chooses the normal side for which ``H`` comes out with the
conventional positive sign (e.g. 1/r for the round sphere), and documents
it. Shape operators are stored in the canonical per-vertex frames returned
by :func:`vertex_tangent_frames`, so surfaces round-trip through JSON.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ambient as amb
from .errors import (
    DomainError,
    InsufficientNeighbors,
    NotTangent,
    NotUnit,
    ZeroNormal,
)
from .mesh import TriangleMesh


# -- canonical tangent frames --------------------------------------------------


def _cross4(a, b, c):
    """Vector orthogonal to a, b, c in R^4 with <x, d> = det[a, b, c, d]."""
    # Cofactor expansion along the last row of det[a; b; c; e_i].
    m = np.stack([a, b, c], axis=-2)
    out = np.empty(a.shape[:-1] + (4,))
    cols = [0, 1, 2, 3]
    sign = 1.0
    for i in range(4):
        rest = cols[:i] + cols[i + 1 :]
        minor = m[..., rest]
        det3 = (
            minor[..., 0, 0] * (minor[..., 1, 1] * minor[..., 2, 2] - minor[..., 1, 2] * minor[..., 2, 1])
            - minor[..., 0, 1] * (minor[..., 1, 0] * minor[..., 2, 2] - minor[..., 1, 2] * minor[..., 2, 0])
            + minor[..., 0, 2] * (minor[..., 1, 0] * minor[..., 2, 1] - minor[..., 1, 1] * minor[..., 2, 0])
        )
        out[..., i] = -sign * det3
        sign = -sign
    return out


def vertex_tangent_frames(mesh: TriangleMesh, normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal frames (e1, e2) of the tangent planes.

    e1 projects the coordinate axis least aligned with the normal (and, on
    S^3, with the position); e2 completes the frame oriented by the normal:
    in R^3, ``e2 = eta x e1`` so that det(e1, e2, eta) = +1.
    """
    normal = np.asarray(normal, dtype=float)
    nn = np.linalg.norm(normal, axis=1)
    if np.any(nn < 1e-12):
        raise ZeroNormal(f"vertex {int(np.argmin(nn))} has |eta| = {nn.min():.3e}")
    if np.any(np.abs(nn - 1.0) > 1e-8):
        raise NotUnit("vertex normals must be unit length")
    V, d = normal.shape
    on_sphere = mesh.space.tag == amb.SPHERE3
    if on_sphere:
        p = mesh.vertices
        if np.any(np.abs(np.sum(p * normal, axis=1)) > 1e-8):
            raise NotTangent("Sphere3 normals must be orthogonal to positions")

    # Candidate axes scored by the norm of their tangent projection.
    axes = np.eye(d)
    score = np.empty((V, d))
    cand = np.empty((V, d, d))
    for k in range(d):
        v = np.tile(axes[k], (V, 1))
        v = v - np.sum(v * normal, axis=1)[:, None] * normal
        if on_sphere:
            v = v - np.sum(v * mesh.vertices, axis=1)[:, None] * mesh.vertices
        cand[:, k] = v
        score[:, k] = np.linalg.norm(v, axis=1)
    pick = np.argmax(score, axis=1)
    e1 = cand[np.arange(V), pick]
    e1 /= np.linalg.norm(e1, axis=1)[:, None]

    if on_sphere:
        e2 = _cross4(mesh.vertices, normal, e1)
    else:
        e2 = np.cross(normal, e1)
    e2 /= np.linalg.norm(e2, axis=1)[:, None]
    return e1, e2


@dataclass
class ImmersedSurface:
    """Mesh plus per-vertex normal, frames and shape data.

    ``shape_op`` is a (V, 2, 2) array in the (e1, e2) frames; ``H``,
    ``K_ext`` and ``K_sigma`` are per-vertex scalars. ``provenance`` is
    "analytic" for zoo generators with closed-form data and "fitted" for
    estimated data.
    """

    mesh: TriangleMesh
    normal: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    shape_op: np.ndarray
    H: np.ndarray
    K_ext: np.ndarray
    K_sigma: np.ndarray
    provenance: str = "analytic"

    @property
    def space(self) -> amb.AmbientSpace:
        return self.mesh.space

    @property
    def n_vertices(self) -> int:
        return self.mesh.n_vertices

    @classmethod
    def from_vertex_data(cls, mesh, normal, shape_op, K_sigma, provenance="analytic"):
        """Build a surface whose shape operator is already in canonical frames."""
        e1, e2 = vertex_tangent_frames(mesh, normal)
        shape_op = np.asarray(shape_op, dtype=float)
        H = 0.5 * (shape_op[:, 0, 0] + shape_op[:, 1, 1])
        K_ext = shape_op[:, 0, 0] * shape_op[:, 1, 1] - shape_op[:, 0, 1] * shape_op[:, 1, 0]
        return cls(mesh, np.asarray(normal, float), e1, e2, shape_op,
                   H, K_ext, np.asarray(K_sigma, float), provenance)

    @classmethod
    def from_parametric_data(cls, mesh, normal, u1, u2, shape_uv, K_sigma, provenance="analytic"):
        """Build a surface from a shape operator given in frames (u1, u2).

        The operator is conjugated into the canonical frames; any
        orthogonal frame change is valid here since the invariant ambient
        operator is defined directly in the canonical frames.
        """
        e1, e2 = vertex_tangent_frames(mesh, normal)
        # R rows: canonical frame vectors expressed in the (u1, u2) basis.
        r11 = np.sum(e1 * u1, axis=1)
        r12 = np.sum(e1 * u2, axis=1)
        r21 = np.sum(e2 * u1, axis=1)
        r22 = np.sum(e2 * u2, axis=1)
        R = np.stack([np.stack([r11, r12], -1), np.stack([r21, r22], -1)], axis=-2)
        shape_op = R @ np.asarray(shape_uv, float) @ np.swapaxes(R, -1, -2)
        H = 0.5 * (shape_op[:, 0, 0] + shape_op[:, 1, 1])
        K_ext = shape_op[:, 0, 0] * shape_op[:, 1, 1] - shape_op[:, 0, 1] * shape_op[:, 1, 0]
        return cls(mesh, np.asarray(normal, float), e1, e2, shape_op,
                   H, K_ext, np.asarray(K_sigma, float), provenance)

    def with_alpha_sign(self, sign: int) -> "ImmersedSurface":
        """Same surface with the other ambient rotation sign (S^3 only)."""
        mesh = self.mesh
        if mesh.space.tag != amb.SPHERE3 or sign == mesh.space.alpha_sign:
            return self
        # Geometry does not depend on alpha_sign; share everything but the tag.
        new_mesh = TriangleMesh.__new__(TriangleMesh)
        new_mesh.__dict__.update(mesh.__dict__)
        new_mesh.space = mesh.space.with_alpha_sign(sign)
        return ImmersedSurface(new_mesh, self.normal, self.e1, self.e2, self.shape_op,
                               self.H, self.K_ext, self.K_sigma, self.provenance)

    def rotated_frames(self, theta) -> "ImmersedSurface":
        """Covariance helper: rotate every frame by theta (scalar or per-vertex)."""
        th = np.broadcast_to(np.asarray(theta, float), (self.n_vertices,))
        c, s = np.cos(th), np.sin(th)
        e1 = c[:, None] * self.e1 + s[:, None] * self.e2
        e2 = -s[:, None] * self.e1 + c[:, None] * self.e2
        R = np.stack([np.stack([c, s], -1), np.stack([-s, c], -1)], axis=-2)
        A = R @ self.shape_op @ np.swapaxes(R, -1, -2)
        return ImmersedSurface(self.mesh, self.normal, e1, e2, A,
                               self.H, self.K_ext, self.K_sigma, self.provenance)

    def frame_field_to_ambient(self, xi: np.ndarray) -> np.ndarray:
        """(V, 2) frame coefficients -> (V, d) ambient vectors."""
        return xi[:, 0:1] * self.e1 + xi[:, 1:2] * self.e2

    def ambient_field_to_frame(self, vec: np.ndarray) -> np.ndarray:
        return np.stack([np.sum(vec * self.e1, axis=1), np.sum(vec * self.e2, axis=1)], axis=1)


# -- grid and icosphere scaffolding -------------------------------------------


def _torus_grid_faces(n_u: int, n_v: int, wrap_v: bool = True) -> np.ndarray:
    """Uniform grid triangulated along the (u+v) diagonal, u always wraps."""
    rows = n_v if wrap_v else n_v
    nv_pts = n_v if wrap_v else n_v + 1

    def vid(i, j):
        return (i % n_u) + n_u * (j % nv_pts if wrap_v else j)

    faces = []
    for j in range(rows):
        for i in range(n_u):
            v00 = vid(i, j)
            v10 = vid(i + 1, j)
            v01 = vid(i, j + 1)
            v11 = vid(i + 1, j + 1)
            faces.append([v00, v10, v11])
            faces.append([v00, v11, v01])
    return np.array(faces, dtype=np.int64)


_ICO_T = (1.0 + np.sqrt(5.0)) / 2.0
_ICO_VERTS = np.array(
    [
        [-1, _ICO_T, 0], [1, _ICO_T, 0], [-1, -_ICO_T, 0], [1, -_ICO_T, 0],
        [0, -1, _ICO_T], [0, 1, _ICO_T], [0, -1, -_ICO_T], [0, 1, -_ICO_T],
        [_ICO_T, 0, -1], [_ICO_T, 0, 1], [-_ICO_T, 0, -1], [-_ICO_T, 0, 1],
    ],
    dtype=float,
)
_ICO_FACES = np.array(
    [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ],
    dtype=np.int64,
)


def unit_icosphere(level: int) -> tuple[np.ndarray, np.ndarray]:
    """Subdivided icosahedron projected to the unit sphere."""
    verts = [v / np.linalg.norm(v) for v in _ICO_VERTS]
    faces = [tuple(f) for f in _ICO_FACES]
    for _ in range(level):
        cache = {}

        def midpoint(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                m = verts[a] + verts[b]
                m /= np.linalg.norm(m)
                verts.append(m)
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
        faces = new_faces
    return np.array(verts), np.array(faces, dtype=np.int64)


# -- zoo generators ------------------------------------------------------------


def gen_round_sphere_r3(radius: float, level: int, orientation: str = "inward") -> ImmersedSurface:
    """Round sphere of the given radius in R^3 (icosphere mesh).

    With the inward normal (default) ``A = +(1/r) I`` and ``H = +1/r``;
    with the outward normal both flip sign. ``K = 1/r^2`` either way.
    """
    if radius <= 0:
        raise DomainError(f"radius must be positive, got {radius}")
    if level < 0:
        raise DomainError("subdivision level must be >= 0")
    if orientation not in ("inward", "outward"):
        raise DomainError(f"orientation must be inward|outward, got {orientation!r}")
    unit, faces = unit_icosphere(level)
    mesh = TriangleMesh(radius * unit, faces, amb.euclidean3())
    sgn = 1.0 if orientation == "inward" else -1.0
    normal = -sgn * unit
    V = len(unit)
    A = np.tile((sgn / radius) * np.eye(2), (V, 1, 1))
    K_sigma = np.full(V, 1.0 / radius**2)
    return ImmersedSurface.from_vertex_data(mesh, normal, A, K_sigma)


def gen_geodesic_sphere_s3(rho: float, level: int) -> ImmersedSurface:
    """Distance sphere of geodesic radius rho in S^3.

    Normal points toward the center, giving ``A = cot(rho) I``,
    ``H = cot(rho)`` and ``K = 1 + cot(rho)^2``.
    """
    if not 0.0 < rho < 0.5 * np.pi:
        raise DomainError(f"rho must lie in (0, pi/2), got {rho}")
    if level < 0:
        raise DomainError("subdivision level must be >= 0")
    omega, faces = unit_icosphere(level)
    V = len(omega)
    pts = np.concatenate([np.full((V, 1), np.cos(rho)), np.sin(rho) * omega], axis=1)
    mesh = TriangleMesh(pts, faces, amb.sphere3())
    normal = np.concatenate([np.full((V, 1), np.sin(rho)), -np.cos(rho) * omega], axis=1)
    cot = 1.0 / np.tan(rho)
    A = np.tile(cot * np.eye(2), (V, 1, 1))
    K_sigma = np.full(V, 1.0 + cot**2)
    return ImmersedSurface.from_vertex_data(mesh, normal, A, K_sigma)


def gen_flat_torus_s3(r: float, n_u: int, n_v: int) -> ImmersedSurface:
    """Product torus S^1(r) x S^1(s) in S^3, s = sqrt(1 - r^2).

    Principal curvatures ``k1 = s/r`` along the first circle and
    ``k2 = -r/s`` along the second; ``H = (k1 + k2)/2`` and ``K = 0``.
    The Clifford torus r = 1/sqrt(2) is the minimal member.
    """
    if not 0.0 < r < 1.0:
        raise DomainError(f"r must lie in (0, 1), got {r}")
    if n_u < 3 or n_v < 3:
        raise DomainError("need n_u, n_v >= 3")
    s = np.sqrt(1.0 - r * r)
    # Vertex id = i + n_u * j, matching _torus_grid_faces.
    ii, jj = np.meshgrid(np.arange(n_u), np.arange(n_v), indexing="ij")
    u = (2.0 * np.pi / n_u) * ii
    v = (2.0 * np.pi / n_v) * jj
    order = (ii + n_u * jj).reshape(-1)
    u = u.reshape(-1)[np.argsort(order)]
    v = v.reshape(-1)[np.argsort(order)]
    cu, su, cv, sv = np.cos(u), np.sin(u), np.cos(v), np.sin(v)
    pts = np.stack([r * cu, r * su, s * cv, s * sv], axis=1)
    mesh = TriangleMesh(pts, _torus_grid_faces(n_u, n_v), amb.sphere3())
    normal = np.stack([-s * cu, -s * su, r * cv, r * sv], axis=1)
    u1 = np.stack([-su, cu, np.zeros_like(u), np.zeros_like(u)], axis=1)
    u2 = np.stack([np.zeros_like(u), np.zeros_like(u), -sv, cv], axis=1)
    k1, k2 = s / r, -r / s
    A_uv = np.tile(np.diag([k1, k2]), (len(pts), 1, 1))
    K_sigma = np.zeros(len(pts))
    return ImmersedSurface.from_parametric_data(mesh, normal, u1, u2, A_uv, K_sigma)


def gen_flat_torus_t3(lattice=None, n_u: int = 16, n_v: int = 16, offset=None) -> ImmersedSurface:
    """Totally geodesic 2-torus in T^3 = R^3 / Lambda.

    The surface is the plane spanned by the first two lattice vectors
    (optionally displaced by ``offset``); ``A = 0``, ``H = 0``, ``K = 0``,
    and the translated normal is constant.
    """
    if n_u < 3 or n_v < 3:
        raise DomainError("need n_u, n_v >= 3")
    space = amb.flat_torus3(lattice)
    lat = space.lattice
    a1, a2 = lat[0], lat[1]
    off = np.zeros(3) if offset is None else np.asarray(offset, dtype=float)
    ii, jj = np.meshgrid(np.arange(n_u), np.arange(n_v), indexing="ij")
    order = np.argsort((ii + n_u * jj).reshape(-1))
    fu = (ii / n_u).reshape(-1)[order]
    fv = (jj / n_v).reshape(-1)[order]
    pts = fu[:, None] * a1 + fv[:, None] * a2 + off
    pts = amb.torus_wrap(lat, pts)
    mesh = TriangleMesh(pts, _torus_grid_faces(n_u, n_v), space)
    n = np.cross(a1, a2)
    n /= np.linalg.norm(n)
    V = len(pts)
    normal = np.tile(n, (V, 1))
    A = np.zeros((V, 2, 2))
    return ImmersedSurface.from_vertex_data(mesh, normal, A, np.zeros(V))


def gen_cylinder_r3(radius: float, length: float, n_u: int, n_v: int) -> ImmersedSurface:
    """Bordered cylinder segment in R^3 (CMC with ``H = 1/(2 r)``).

    Inward normal; principal curvatures 1/r (circumferential) and 0
    (axial). The two ends are boundary loops.
    """
    if radius <= 0 or length <= 0:
        raise DomainError("radius and length must be positive")
    if n_u < 3 or n_v < 1:
        raise DomainError("need n_u >= 3 and n_v >= 1")
    ii, jj = np.meshgrid(np.arange(n_u), np.arange(n_v + 1), indexing="ij")
    order = np.argsort((ii + n_u * jj).reshape(-1))
    u = (2.0 * np.pi / n_u) * ii.reshape(-1)[order]
    z = (length / n_v) * jj.reshape(-1)[order]
    cu, su = np.cos(u), np.sin(u)
    pts = np.stack([radius * cu, radius * su, z], axis=1)
    mesh = TriangleMesh(pts, _torus_grid_faces(n_u, n_v, wrap_v=False), amb.euclidean3())
    normal = np.stack([-cu, -su, np.zeros_like(u)], axis=1)
    u1 = np.stack([-su, cu, np.zeros_like(u)], axis=1)
    u2 = np.tile(np.array([0.0, 0.0, 1.0]), (len(pts), 1))
    A_uv = np.tile(np.diag([1.0 / radius, 0.0]), (len(pts), 1, 1))
    return ImmersedSurface.from_parametric_data(mesh, normal, u1, u2, A_uv, np.zeros(len(pts)))


def gen_perturbed_sphere_r3(level: int, amplitude: float = 0.08) -> ImmersedSurface:
    """Radially perturbed sphere: NOT CMC; negative control for harmonicity.

    Radius function rho(w) = 1 + amplitude * (w_x^2 - w_y^2) w_z over the
    unit sphere, with the exact analytic normal of the perturbed surface.
    Curvature data is fitted.
    """
    if level < 0:
        raise DomainError("subdivision level must be >= 0")
    omega, faces = unit_icosphere(level)
    x, y, z = omega[:, 0], omega[:, 1], omega[:, 2]
    P = (x * x - y * y) * z
    gradP = np.stack([2 * x * z, -2 * y * z, x * x - y * y], axis=1)
    # Tangential gradient of a degree-3 homogeneous polynomial on the sphere.
    gradP_t = gradP - 3.0 * P[:, None] * omega
    rho = 1.0 + amplitude * P
    pts = rho[:, None] * omega
    mesh = TriangleMesh(pts, faces, amb.euclidean3())
    nrm = omega - (amplitude / rho)[:, None] * gradP_t
    nrm /= np.linalg.norm(nrm, axis=1)[:, None]
    normal = -nrm  # inward, matching the round-sphere convention
    A, H, K_sigma = fit_shape_operator(mesh, normal)
    return ImmersedSurface.from_vertex_data(mesh, normal, A, K_sigma, provenance="fitted")


def gen_genus2_r3(resolution: int = 60) -> ImmersedSurface:
    """Closed genus-2 surface: isosurface of a tube around a figure-eight.

    Meshed by marching cubes on ``(x^2 (1 - x^2) - y^2)^2 + z^2`` at a
    small level; normals are the analytic gradient direction, curvature
    data is fitted. Intended for topology and harmonic-dimension tests.
    """
    from skimage.measure import marching_cubes

    if resolution < 24:
        raise DomainError("resolution must be >= 24")
    iso = 0.012
    nx, ny, nz = 2 * resolution, resolution, resolution // 2
    xs = np.linspace(-1.35, 1.35, nx)
    ys = np.linspace(-0.75, 0.75, ny)
    zs = np.linspace(-0.4, 0.4, nz)
    X, Y, Z = np.meshgrid(xs, ys, zs, indexing="ij")
    G = X * X * (1.0 - X * X) - Y * Y
    F = G * G + Z * Z
    spacing = (xs[1] - xs[0], ys[1] - ys[0], zs[1] - zs[0])
    verts, faces, _, _ = marching_cubes(F, level=iso, spacing=spacing)
    verts += np.array([xs[0], ys[0], zs[0]])
    mesh = TriangleMesh(verts, faces.astype(np.int64), amb.euclidean3())
    x, y, z = verts[:, 0], verts[:, 1], verts[:, 2]
    g = x * x * (1 - x * x) - y * y
    grad = np.stack([2 * g * (2 * x - 4 * x**3), 2 * g * (-2 * y), 2 * z], axis=1)
    nn = np.linalg.norm(grad, axis=1)
    if np.any(nn < 1e-10):
        normal = mesh_vertex_normals(mesh)
    else:
        normal = grad / nn[:, None]
    A, H, K_sigma = fit_shape_operator(mesh, normal)
    return ImmersedSurface.from_vertex_data(mesh, normal, A, K_sigma, provenance="fitted")


GENERATORS = {
    "sphere_r3": gen_round_sphere_r3,
    "geodesic_sphere_s3": gen_geodesic_sphere_s3,
    "flat_torus_s3": gen_flat_torus_s3,
    "flat_torus_t3": gen_flat_torus_t3,
    "cylinder_r3": gen_cylinder_r3,
    "perturbed_sphere_r3": gen_perturbed_sphere_r3,
    "genus2_r3": gen_genus2_r3,
}


# -- estimated data for imported meshes ----------------------------------------


def mesh_vertex_normals(mesh: TriangleMesh) -> np.ndarray:
    """Angle-weighted vertex normals from face geometry (R^3 / T^3)."""
    if mesh.space.tag == amb.SPHERE3:
        raise NotTangent("estimated normals are only defined for 3-dimensional ambients")
    F = mesh.n_faces
    ch = mesh.he_chord.reshape(F, 3, 3)
    fn = np.cross(ch[:, 0], -ch[:, 2])
    fn /= np.linalg.norm(fn, axis=1)[:, None]
    ang = mesh.metric().corner_angle
    out = np.zeros((mesh.n_vertices, 3))
    for c in range(3):
        np.add.at(out, mesh.faces[:, c], ang[:, c][:, None] * fn)
    norms = np.linalg.norm(out, axis=1)
    if np.any(norms < 1e-12):
        raise ZeroNormal("degenerate vertex normal")
    return out / norms[:, None]


def fit_shape_operator(mesh: TriangleMesh, normal: np.ndarray):
    """Per-vertex shape operator by quadratic height fitting in the frame.

    Neighbor offsets (1-ring, extended to the 2-ring when fewer than 5) are
    expressed in the tangent frame; the height along the normal is fitted
    by ``h = a x^2/2 + b xy + c y^2/2 + d x + e y`` and the operator is the
    Hessian ``[[a, b], [b, c]]``. Returns ``(A, H, K_sigma)`` with
    ``K_sigma = det(A) + c_ambient``.

    Raises :class:`InsufficientNeighbors` below 5 distinct directions.
    """
    normal = np.asarray(normal, dtype=float)
    e1, e2 = vertex_tangent_frames(mesh, normal)
    V = mesh.n_vertices
    nbrs = mesh.vertex_neighbors()
    on_torus = mesh.space.tag == amb.FLAT_TORUS3
    A = np.empty((V, 2, 2))
    for v in range(V):
        nb = nbrs[v]
        if len(nb) < 5:
            ext = set(nb.tolist())
            for u in nb:
                ext.update(nbrs[u].tolist())
            ext.discard(v)
            nb = np.array(sorted(ext), dtype=np.int64)
        if len(nb) < 5:
            raise InsufficientNeighbors(f"vertex {v} has only {len(nb)} neighbors")
        d = mesh.vertices[nb] - mesh.vertices[v]
        if on_torus:
            d = amb.torus_minimal_image(mesh.space.lattice, d)
        x = d @ e1[v]
        y = d @ e2[v]
        h = d @ normal[v]
        design = np.stack([0.5 * x * x, x * y, 0.5 * y * y, x, y], axis=1)
        coef, *_ = np.linalg.lstsq(design, h, rcond=None)
        a, b, c = coef[0], coef[1], coef[2]
        A[v] = [[a, b], [b, c]]
    H = 0.5 * (A[:, 0, 0] + A[:, 1, 1])
    K_sigma = A[:, 0, 0] * A[:, 1, 1] - A[:, 0, 1] * A[:, 1, 0] + mesh.space.curvature
    return A, H, K_sigma


def surface_from_mesh(mesh: TriangleMesh, normal: np.ndarray | None = None) -> ImmersedSurface:
    """Fitted surface for an imported mesh (normals estimated if absent)."""
    if normal is None:
        normal = mesh_vertex_normals(mesh)
    A, H, K_sigma = fit_shape_operator(mesh, normal)
    return ImmersedSurface.from_vertex_data(mesh, normal, A, K_sigma, provenance="fitted")
