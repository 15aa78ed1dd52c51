"""Ambient model geometries with bi-invariant metrics.

Three model spaces are supported:

* ``Euclidean3`` - flat R^3 (commutative, curvature constant c = 0),
* ``FlatTorus3`` - R^3 / Lambda for an invertible lattice Lambda (c = 0),
* ``Sphere3``   - unit quaternions S^3 subset R^4 (c = 1).

The unit-normal translation map sends a surface normal at a point to the
unit sphere of the Lie algebra: for the commutative spaces it is the
identity, for S^3 it is left translation back to the identity quaternion.
The invariant part of the normal derivative is zero in the commutative
case and a +/-90-degree rotation (``alpha_sign`` picks the sign) on S^3.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadParameter, NotTangent, NotUnit, SingularLattice

EUCLIDEAN3 = "R3"
FLAT_TORUS3 = "T3"
SPHERE3 = "S3"

_TAGS = (EUCLIDEAN3, FLAT_TORUS3, SPHERE3)

# Matrix of the invariant shape operator for alpha_sign = +1, in any
# oriented orthonormal tangent frame.
ALPHA_PLUS = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class AmbientSpace:
    """Model space tag plus the derived constants used by the index form.

    ``curvature`` is 0 for the commutative spaces and 1 for S^3;
    ``alpha_sign`` is 0 in the commutative case and +/-1 on S^3 (both signs
    occur, depending on orientation conventions, so it is configuration).
    """

    tag: str
    lattice: np.ndarray | None = None
    alpha_sign: int = field(default=0)

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise BadParameter(f"unknown ambient tag {self.tag!r}, expected one of {_TAGS}")
        if self.tag == FLAT_TORUS3:
            lat = np.eye(3) if self.lattice is None else np.asarray(self.lattice, dtype=float)
            if lat.shape != (3, 3):
                raise SingularLattice(f"lattice must be 3x3, got {lat.shape}")
            if abs(np.linalg.det(lat)) < 1e-12:
                raise SingularLattice("lattice matrix is singular")
            object.__setattr__(self, "lattice", lat)
        elif self.lattice is not None:
            raise BadParameter(f"lattice only applies to {FLAT_TORUS3}")
        if self.tag == SPHERE3:
            sign = 1 if self.alpha_sign == 0 else self.alpha_sign
            if sign not in (-1, 1):
                raise BadParameter("alpha_sign must be +1 or -1 on Sphere3")
            object.__setattr__(self, "alpha_sign", sign)
        else:
            if self.alpha_sign not in (0,):
                raise BadParameter("alpha_sign must be 0 in the commutative case")

    @property
    def curvature(self) -> int:
        return 1 if self.tag == SPHERE3 else 0

    @property
    def point_dim(self) -> int:
        return 4 if self.tag == SPHERE3 else 3

    def with_alpha_sign(self, sign: int) -> "AmbientSpace":
        if self.tag != SPHERE3:
            return self
        return AmbientSpace(self.tag, None, sign)

    def invariant_shape_operator(self) -> np.ndarray:
        """2x2 matrix of the invariant normal derivative in an oriented frame.

        Zero in the commutative case, ``alpha_sign * [[0,1],[-1,0]]`` on S^3.
        Anti-symmetric by construction.
        """
        if self.curvature == 0:
            return np.zeros((2, 2))
        return self.alpha_sign * ALPHA_PLUS


def euclidean3() -> AmbientSpace:
    return AmbientSpace(EUCLIDEAN3)


def flat_torus3(lattice=None) -> AmbientSpace:
    return AmbientSpace(FLAT_TORUS3, np.eye(3) if lattice is None else lattice)


def sphere3(alpha_sign: int = 1) -> AmbientSpace:
    return AmbientSpace(SPHERE3, None, alpha_sign)


def invariant_shape_operator(space: AmbientSpace) -> np.ndarray:
    return space.invariant_shape_operator()


# -- quaternion arithmetic (points of S^3 are unit quaternions (w, x, y, z)) --


def quaternion_mul(a, b) -> np.ndarray:
    """Hamilton product; broadcasts over leading axes of (..., 4) arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, av = a[..., 0], a[..., 1:]
    bw, bv = b[..., 0], b[..., 1:]
    w = aw * bw - np.sum(av * bv, axis=-1)
    v = aw[..., None] * bv + bw[..., None] * av + np.cross(av, bv)
    return np.concatenate([w[..., None], v], axis=-1)


def quaternion_conj(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    out = a.copy()
    out[..., 1:] *= -1.0
    return out


def left_translation_matrix(q) -> np.ndarray:
    """4x4 matrix of p -> q * p; the differential of left translation by q."""
    w, x, y, z = np.asarray(q, dtype=float)
    return np.array(
        [
            [w, -x, -y, -z],
            [x, w, -z, y],
            [y, z, w, -x],
            [z, -y, x, w],
        ]
    )


# -- the unit-normal translation map -----------------------------------------


def gauss_map(space: AmbientSpace, p, eta) -> np.ndarray:
    """Translate the unit normal ``eta`` at point ``p`` to the Lie algebra.

    Returns a unit 3-vector. For R^3 and T^3 the translation is the
    identity; for S^3 it is the imaginary part of conj(p) * eta, which is
    purely imaginary whenever eta is tangent to S^3 at p.
    """
    eta = np.asarray(eta, dtype=float)
    if abs(np.linalg.norm(eta) - 1.0) > 1e-8:
        raise NotUnit(f"normal has norm {np.linalg.norm(eta):.3e}, expected 1")
    if space.tag != SPHERE3:
        return eta
    p = np.asarray(p, dtype=float)
    if abs(np.linalg.norm(p) - 1.0) > 1e-8:
        raise NotUnit(f"Sphere3 point has norm {np.linalg.norm(p):.3e}, expected 1")
    if abs(float(np.dot(p, eta))) > 1e-10:
        raise NotTangent(f"<p, eta> = {float(np.dot(p, eta)):.3e} exceeds 1e-10")
    return quaternion_mul(quaternion_conj(p), eta)[1:]


def gauss_map_vertices(space: AmbientSpace, points: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """Vectorized :func:`gauss_map` over per-vertex arrays."""
    normals = np.asarray(normals, dtype=float)
    norms = np.linalg.norm(normals, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-8):
        raise NotUnit("per-vertex normals must be unit vectors")
    if space.tag != SPHERE3:
        return normals
    points = np.asarray(points, dtype=float)
    dots = np.abs(np.sum(points * normals, axis=1))
    if np.any(dots > 1e-10):
        raise NotTangent(f"max |<p, eta>| = {dots.max():.3e} exceeds 1e-10")
    return quaternion_mul(quaternion_conj(points), normals)[:, 1:]


# -- flat 3-torus helpers -----------------------------------------------------


def torus_wrap(lattice, p) -> np.ndarray:
    """Canonical representative of ``p`` modulo the lattice.

    Lattice coordinates of the output lie in [0, 1). Accepts a single
    3-vector or an (n, 3) array.
    """
    lat = np.asarray(lattice, dtype=float)
    if lat.shape != (3, 3) or abs(np.linalg.det(lat)) < 1e-12:
        raise SingularLattice("lattice matrix is singular or misshapen")
    p = np.asarray(p, dtype=float)
    coords = p @ np.linalg.inv(lat)
    coords = coords - np.floor(coords)
    # Floating floor can leave coordinates at 1.0 - eps that round-trip to 1.0.
    coords = np.where(coords >= 1.0, coords - 1.0, coords)
    return coords @ lat


def torus_minimal_image(lattice, d) -> np.ndarray:
    """Shift difference vectors ``d`` by lattice vectors to the nearest image."""
    lat = np.asarray(lattice, dtype=float)
    d = np.asarray(d, dtype=float)
    coords = d @ np.linalg.inv(lat)
    coords = coords - np.round(coords)
    return coords @ lat
