"""Oriented manifold triangle meshes and their metric quantities.

Connectivity is stored halfedge-style in flat arrays: halfedge ``h`` of
face ``h // 3`` runs from ``dst(prev(h))`` to ``dst(h)``. Construction
validates manifoldness (every edge in at most two faces, every vertex ring
a single fan or half-fan) and orientation consistency (interior edges are
traversed once in each direction).

Geometry is derived from per-halfedge chord vectors so that flat-torus
meshes (positions stored in a fundamental domain) use minimal-image
differences; all other spaces use plain coordinate differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ambient as amb
from .errors import DegenerateFace, Disconnected, HasBoundary, NonManifold, NonOrientable


class TriangleMesh:
    """Immutable oriented manifold triangle mesh in an ambient model space.

    Parameters
    ----------
    vertices : (V, 3) or (V, 4) float array
        Positions in ambient coordinates (4-vectors for S^3).
    faces : (F, 3) int array
        Consistently wound vertex triples.
    space : AmbientSpace
        Ambient tag; controls chord computation and validation.
    """

    def __init__(self, vertices, faces, space: amb.AmbientSpace | None = None):
        self.space = space if space is not None else amb.euclidean3()
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.faces = np.ascontiguousarray(faces, dtype=np.int64)
        if self.faces.ndim != 2 or self.faces.shape[1] != 3:
            raise NonManifold(f"faces must be (F, 3), got {self.faces.shape}")
        if self.vertices.ndim != 2 or self.vertices.shape[1] != self.space.point_dim:
            raise NonManifold(
                f"vertices must be (V, {self.space.point_dim}) for {self.space.tag}, "
                f"got {self.vertices.shape}"
            )
        if self.faces.size and (self.faces.min() < 0 or self.faces.max() >= len(self.vertices)):
            raise NonManifold("face index out of range")
        self._build_connectivity()
        self._build_chords()
        self._metric = None

    # -- connectivity ---------------------------------------------------------

    def _build_connectivity(self):
        V, F = len(self.vertices), len(self.faces)
        f = self.faces
        if F == 0:
            raise NonManifold("mesh has no faces")
        if np.any(f[:, 0] == f[:, 1]) or np.any(f[:, 1] == f[:, 2]) or np.any(f[:, 2] == f[:, 0]):
            raise NonManifold("face with a repeated vertex")

        # Halfedge h = 3*fi + k runs f[fi, k] -> f[fi, (k+1) % 3].
        src = f[:, [0, 1, 2]].reshape(-1)
        dst = f[:, [1, 2, 0]].reshape(-1)
        self.he_src = src
        self.he_dst = dst
        self.he_face = np.repeat(np.arange(F), 3)
        H = 3 * F

        # Pair opposite halfedges through a canonical (min, max) edge key.
        # Multiplicity > 2 is non-manifold; a same-direction pair means the
        # winding cannot be made consistent (or a face is duplicated).
        lo = np.minimum(src, dst)
        hi = np.maximum(src, dst)
        key = lo * V + hi
        korder = np.argsort(key, kind="stable")
        skey = key[korder]
        twin = np.full(H, -1, dtype=np.int64)
        i = 0
        edge_first = []
        while i < H:
            j = i
            while j + 1 < H and skey[j + 1] == skey[i]:
                j += 1
            count = j - i + 1
            if count > 2:
                e = korder[i]
                raise NonManifold(f"edge ({lo[e]}, {hi[e]}) shared by {count} faces")
            if count == 2:
                a, b = korder[i], korder[i + 1]
                if src[a] == src[b]:
                    raise NonOrientable(
                        f"edge ({src[a]}, {dst[a]}) traversed twice in the same "
                        "direction (inconsistent winding or duplicate face)"
                    )
                twin[a], twin[b] = b, a
            edge_first.append(korder[i])
            i = j + 1

        self.he_twin = twin
        self.he_next = np.arange(H) - (np.arange(H) % 3) + (np.arange(H) + 1) % 3

        # Edges: one canonical halfedge per undirected edge, oriented
        # low-index -> high-index vertex for determinism.
        edge_first = np.array(sorted(edge_first, key=lambda h: (lo[h], hi[h])), dtype=np.int64)
        self.edge_halfedge = edge_first
        self.edges = np.stack([lo[edge_first], hi[edge_first]], axis=1)
        self.edge_boundary = twin[edge_first] < 0
        E = len(self.edges)

        # Map each halfedge to (edge index, +/-1 relative to canonical direction).
        edge_keys = self.edges[:, 0] * V + self.edges[:, 1]
        self.he_edge = np.searchsorted(edge_keys, key)
        self.he_sign = np.where(src == self.edges[self.he_edge, 0], 1, -1).astype(np.int64)

        self.n_vertices, self.n_edges, self.n_faces = V, E, F
        self.boundary_vertices = np.zeros(V, dtype=bool)
        b = self.edge_boundary
        self.boundary_vertices[self.edges[b].reshape(-1)] = True

        self._check_vertex_fans()

    def _check_vertex_fans(self):
        """Every vertex ring must be one fan (closed) or one half-fan (boundary)."""
        V = self.n_vertices
        out_half = [[] for _ in range(V)]
        for h in range(3 * self.n_faces):
            out_half[self.he_src[h]].append(h)
        def prev(h):
            return h - (h % 3) + (h + 2) % 3

        for v in range(V):
            hs = out_half[v]
            if not hs:
                raise NonManifold(f"isolated vertex {v}")
            if self.boundary_vertices[v]:
                # Rewind (rotating via twin(prev)) to the fan start, then count
                # in the opposite rotation (next(twin)) to the other boundary.
                h = hs[0]
                seen = 0
                while True:
                    t = self.he_twin[prev(h)]
                    if t < 0:
                        break
                    h = t
                    seen += 1
                    if seen > len(hs):
                        raise NonManifold(f"vertex {v} ring does not terminate")
                visited = 1
                while True:
                    t = self.he_twin[h]
                    if t < 0:
                        break
                    h = self.he_next[t]
                    visited += 1
                    if visited > len(hs):
                        raise NonManifold(f"vertex {v} ring wraps onto itself")
            else:
                start = hs[0]
                visited = 1
                h = start
                while True:
                    t = self.he_twin[prev(h)]
                    if t < 0:
                        raise NonManifold(f"vertex {v} touches a boundary edge unexpectedly")
                    if t == start:
                        break
                    h = t
                    visited += 1
                    if visited > len(hs):
                        raise NonManifold(f"vertex {v} ring wraps onto itself")
            if visited != len(hs):
                raise NonManifold(f"vertex {v} has a multi-fan (non-manifold) ring")

    def _build_chords(self):
        """Per-halfedge chord vectors dst - src, minimal-image on the torus."""
        d = self.vertices[self.he_dst] - self.vertices[self.he_src]
        if self.space.tag == amb.FLAT_TORUS3:
            d = amb.torus_minimal_image(self.space.lattice, d)
            cyc = d.reshape(self.n_faces, 3, 3).sum(axis=1)
            if np.any(np.linalg.norm(cyc, axis=1) > 1e-9):
                raise NonManifold(
                    "a face wraps around the torus (chord cycle nonzero); mesh too coarse "
                    "for its lattice"
                )
        self.he_chord = d
        # Canonical edge chords run low-index -> high-index vertex.
        sign = self.he_sign[self.edge_halfedge].astype(float)
        self.edge_chord = d[self.edge_halfedge] * sign[:, None]

    # -- topology --------------------------------------------------------------

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def has_boundary(self) -> bool:
        return bool(self.edge_boundary.any())

    def is_connected(self) -> bool:
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components

        i, j = self.edges[:, 0], self.edges[:, 1]
        a = coo_matrix(
            (np.ones(len(i)), (i, j)), shape=(self.n_vertices, self.n_vertices)
        )
        n, _ = connected_components(a, directed=False)
        return n == 1

    def genus(self) -> int:
        """Genus of a closed connected oriented mesh via the Euler formula."""
        if self.has_boundary:
            raise HasBoundary("genus is defined here for closed meshes only")
        if not self.is_connected():
            raise Disconnected("genus requires a connected mesh")
        chi = self.euler_characteristic
        if chi % 2 != 0 or chi > 2:
            raise NonManifold(f"Euler characteristic {chi} is not 2 - 2g")
        return (2 - chi) // 2

    # -- rings ------------------------------------------------------------------

    def vertex_neighbors(self) -> list[np.ndarray]:
        vn = [set() for _ in range(self.n_vertices)]
        for a, b in self.edges:
            vn[a].add(int(b))
            vn[b].add(int(a))
        return [np.array(sorted(x), dtype=np.int64) for x in vn]

    def metric(self) -> "MetricData":
        if self._metric is None:
            self._metric = metric_quantities(self)
        return self._metric


@dataclass
class MetricData:
    """Areas, weights and angle defects of a mesh.

    ``face_area``: (F,); ``dual_area``: (V,) mixed-Voronoi cell areas
    (clamped to barycentric shares on obtuse triangles, so they partition
    each face exactly); ``cot_weight``: (E,) one half the sum of the
    cotangents opposite each edge; ``angle_defect``: (V,) 2*pi (or pi on
    the boundary) minus the incident angle sum; ``corner_area``: (F, 3)
    the per-corner share of each face used for dual areas and averaging.
    """

    face_area: np.ndarray
    dual_area: np.ndarray
    cot_weight: np.ndarray
    angle_defect: np.ndarray
    corner_area: np.ndarray
    corner_angle: np.ndarray

    @property
    def total_area(self) -> float:
        return float(self.face_area.sum())

    def gauss_bonnet_residual(self, mesh: TriangleMesh) -> float:
        """Angle-defect sum minus 2*pi*chi (closed meshes)."""
        return float(self.angle_defect.sum() - 2.0 * np.pi * mesh.euler_characteristic)


def metric_quantities(mesh: TriangleMesh) -> MetricData:
    """Face areas, mixed-Voronoi dual areas, cotangent weights, angle defects."""
    F, V, E = mesh.n_faces, mesh.n_vertices, mesh.n_edges
    # Chords around each face: u = i->j, v = j->k, w = k->i.
    ch = mesh.he_chord.reshape(F, 3, -1)
    u, v, w = ch[:, 0], ch[:, 1], ch[:, 2]

    lu = np.linalg.norm(u, axis=1)
    lv = np.linalg.norm(v, axis=1)
    lw = np.linalg.norm(w, axis=1)

    # Gram-based area works in any ambient dimension.
    uu = np.sum(u * u, axis=1)
    ww = np.sum(w * w, axis=1)
    uw = np.sum(u * w, axis=1)
    area2 = uu * ww - uw * uw
    area = 0.5 * np.sqrt(np.maximum(area2, 0.0))

    mean_area = area.mean() if F else 0.0
    if np.any(area <= 1e-14 * max(mean_area, 1e-300)):
        bad = int(np.argmin(area))
        raise DegenerateFace(f"face {bad} has area {area[bad]:.3e}")

    # Corner angles at (i, j, k): angle at i between -w and u, etc.
    def corner(a, b, la, lb):
        cosv = np.clip(np.sum(a * b, axis=1) / (la * lb), -1.0, 1.0)
        return np.arccos(cosv)

    ang = np.stack(
        [
            corner(u, -w, lu, lw),
            corner(v, -u, lv, lu),
            corner(w, -v, lw, lv),
        ],
        axis=1,
    )

    # Cotangent weights: for each halfedge, the angle opposite it is the
    # corner at the vertex not on it; halfedge 3f+k is opposite corner k+2.
    cot = 1.0 / np.tan(ang)
    he_opp_cot = cot[:, [2, 0, 1]].reshape(-1)
    cot_weight = np.zeros(E)
    np.add.at(cot_weight, mesh.he_edge, 0.5 * he_opp_cot)

    # Mixed-Voronoi corner areas (Meyer et al. clamping).
    corner_area = np.empty((F, 3))
    lens2 = np.stack([lu, lv, lw], axis=1) ** 2  # edge k is opposite corner k+2
    obtuse = ang > 0.5 * np.pi
    any_obtuse = obtuse.any(axis=1)
    # Voronoi formula: at corner i, (|e_ij|^2 cot(angle_k) + |e_ik|^2 cot(angle_j)) / 8.
    # Edges by corner: corner 0 touches chords u (len lu) and w (len lw), with
    # opposite corners 2 and 1 respectively.
    touch = {0: ((0, 2), (2, 1)), 1: ((1, 0), (0, 2)), 2: ((2, 1), (1, 0))}
    for c in range(3):
        (e1, o1), (e2, o2) = touch[c]
        corner_area[:, c] = (lens2[:, e1] * cot[:, o1] + lens2[:, e2] * cot[:, o2]) / 8.0
    for c in range(3):
        sel = any_obtuse
        corner_area[sel, c] = np.where(obtuse[sel, c], 0.5 * area[sel], 0.25 * area[sel])

    dual_area = np.zeros(V)
    np.add.at(dual_area, mesh.faces.reshape(-1), corner_area.reshape(-1))

    angle_sum = np.zeros(V)
    np.add.at(angle_sum, mesh.faces.reshape(-1), ang.reshape(-1))
    full = np.where(mesh.boundary_vertices, np.pi, 2.0 * np.pi)
    angle_defect = full - angle_sum

    return MetricData(
        face_area=area,
        dual_area=dual_area,
        cot_weight=cot_weight,
        angle_defect=angle_defect,
        corner_area=corner_area,
        corner_angle=ang,
    )


def genus(mesh: TriangleMesh) -> int:
    return mesh.genus()


def subdivide_midpoint(mesh: TriangleMesh) -> TriangleMesh:
    """Uniform 1-to-4 split with midpoint vertices (no smoothing).

    Positions of new vertices are chord midpoints; on S^3 they are
    re-normalized to the sphere, on the torus they are wrapped.
    """
    V = mesh.n_vertices
    mid_index = {}
    verts = [mesh.vertices]
    new_pts = []
    for e, (a, b) in enumerate(mesh.edges):
        p = mesh.vertices[a] + 0.5 * mesh.edge_chord[e]
        if mesh.space.tag == amb.SPHERE3:
            p = p / np.linalg.norm(p)
        elif mesh.space.tag == amb.FLAT_TORUS3:
            p = amb.torus_wrap(mesh.space.lattice, p)
        mid_index[(int(a), int(b))] = V + len(new_pts)
        new_pts.append(p)
    verts.append(np.array(new_pts))
    vertices = np.vstack(verts)

    def mid(a, b):
        return mid_index[(a, b) if a < b else (b, a)]

    faces = []
    for a, b, c in mesh.faces:
        a, b, c = int(a), int(b), int(c)
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        faces.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]])
    return TriangleMesh(vertices, np.array(faces, dtype=np.int64), mesh.space)
