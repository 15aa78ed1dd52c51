"""Discrete exterior calculus on triangle meshes.

Cochain conventions:

* 0-forms are per-vertex values; 1-forms are integrals along canonical
  (low-index -> high-index) edges; 2-forms are integrals over faces.
* ``d0`` is the signed vertex difference, ``d1`` the signed circulation,
  so ``d1 @ d0 = 0`` holds combinatorially.
* Hodge stars are diagonal: dual areas, cotangent weights, inverse face
  areas. The codifferential on 1-forms is the L2 adjoint of ``d0``:
  ``delta = star0^-1 d0^T star1``, with the sign fixed by the adjointness
  identity <d0 f, w>_1 = <f, delta w>_0.
* ``sharp`` interpolates a 1-form per face (edge-element interpolation,
  exact for locally constant forms), averages to vertices with the
  mixed-Voronoi corner weights, and returns tangent-frame coefficients;
  ``flat`` integrates an endpoint-averaged field along edge chords.
* ``j_rotate`` is the pointwise +90-degree frame rotation
  (a, b) -> (-b, a); it is the exact realization of the 1-form star on
  fields and preserves pointwise norms by construction.

The harmonic space of a closed mesh is the kernel of the positive
semi-definite quadratic form ``|d1 w|^2 + |delta w|^2``; its dimension is
2g, checked exactly, and the returned basis is orthonormal in the lumped
L2 inner product of the sharped fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import HasBoundary, KernelDimensionMismatch, SolverFailure

_EIG_SEED = 20240901  # deterministic start vectors for iterative solves


class DecOperators:
    """Sparse DEC operators for one mesh (built once, cached on the mesh)."""

    def __init__(self, mesh):
        self.mesh = mesh
        md = mesh.metric()
        V, E, F = mesh.n_vertices, mesh.n_edges, mesh.n_faces

        e = np.arange(E)
        rows = np.concatenate([e, e])
        cols = np.concatenate([mesh.edges[:, 1], mesh.edges[:, 0]])
        vals = np.concatenate([np.ones(E), -np.ones(E)])
        self.d0 = sp.csr_matrix((vals, (rows, cols)), shape=(E, V))

        h = np.arange(3 * F)
        self.d1 = sp.csr_matrix(
            (mesh.he_sign.astype(float), (mesh.he_face, mesh.he_edge[h])), shape=(F, E)
        )

        self.star0 = md.dual_area.copy()
        self.star1 = md.cot_weight.copy()
        self.star2 = 1.0 / md.face_area
        self.metric = md

    def apply_d0(self, f: np.ndarray) -> np.ndarray:
        return self.d0 @ f

    def apply_d1(self, w: np.ndarray) -> np.ndarray:
        return self.d1 @ w

    def apply_delta(self, w: np.ndarray) -> np.ndarray:
        return (self.d0.T @ (self.star1 * w)) / self.star0

    def inner0(self, f, g) -> float:
        return float(np.sum(self.star0 * f * g))

    def inner1(self, w, s) -> float:
        return float(np.sum(self.star1 * w * s))

    def inner2(self, a, b) -> float:
        return float(np.sum(self.star2 * a * b))

    def dirichlet_energies(self, w: np.ndarray) -> tuple[float, float]:
        """(|d1 w|^2, |delta w|^2) in the respective L2 norms."""
        dw = self.d1 @ w
        dl = self.apply_delta(w)
        return float(np.sum(self.star2 * dw * dw)), float(np.sum(self.star0 * dl * dl))

    def laplacian_form(self) -> sp.csr_matrix:
        """PSD matrix of w -> |d1 w|^2 + |delta w|^2 (kernel = harmonic forms)."""
        s1d0 = sp.diags(self.star1) @ self.d0
        k_delta = s1d0 @ sp.diags(1.0 / self.star0) @ s1d0.T
        k_d = self.d1.T @ sp.diags(self.star2) @ self.d1
        return (k_delta + k_d).tocsr()


def dec(surface_or_mesh) -> DecOperators:
    mesh = getattr(surface_or_mesh, "mesh", surface_or_mesh)
    ops = getattr(mesh, "_dec_cache", None)
    if ops is None:
        ops = DecOperators(mesh)
        mesh._dec_cache = ops
    return ops


def d0(mesh, f: np.ndarray) -> np.ndarray:
    return dec(mesh).apply_d0(np.asarray(f, float))


def d1(mesh, w: np.ndarray) -> np.ndarray:
    return dec(mesh).apply_d1(np.asarray(w, float))


def delta(mesh, w: np.ndarray) -> np.ndarray:
    return dec(mesh).apply_delta(np.asarray(w, float))


# -- musical maps ----------------------------------------------------------------


def _barycentric_gradients(mesh) -> np.ndarray:
    """(F, 3, d) gradients of the corner barycentric coordinates."""
    F = mesh.n_faces
    ch = mesh.he_chord.reshape(F, 3, -1)
    grads = np.empty_like(ch)
    for corner in range(3):
        v = ch[:, (corner + 1) % 3]  # opposite edge chord
        w = -ch[:, corner]  # from the opposite edge's tail to the corner
        vv = np.sum(v * v, axis=1)
        a = w - (np.sum(w * v, axis=1) / vv)[:, None] * v
        grads[:, corner] = a / np.sum(a * a, axis=1)[:, None]
    return grads


def face_vectors(surface_or_mesh, w: np.ndarray) -> np.ndarray:
    """(F, d) per-face interpolated vector of a 1-form at the barycenter."""
    mesh = getattr(surface_or_mesh, "mesh", surface_or_mesh)
    F = mesh.n_faces
    w_he = (mesh.he_sign * np.asarray(w, float)[mesh.he_edge]).reshape(F, 3)
    grads = _barycentric_gradients(mesh)
    out = np.zeros((F, mesh.vertices.shape[1]))
    for k in range(3):
        out += w_he[:, k, None] * (grads[:, (k + 1) % 3] - grads[:, k])
    return out / 3.0


def sharp(surface, w: np.ndarray) -> np.ndarray:
    """1-form -> per-vertex tangent field (frame coefficients, shape (V, 2))."""
    mesh = surface.mesh
    gf = face_vectors(surface, w)
    md = mesh.metric()
    d = mesh.vertices.shape[1]
    amb_field = np.zeros((mesh.n_vertices, d))
    for c in range(3):
        np.add.at(amb_field, mesh.faces[:, c], md.corner_area[:, c][:, None] * gf)
    amb_field /= md.dual_area[:, None]
    return np.stack(
        [np.sum(amb_field * surface.e1, axis=1), np.sum(amb_field * surface.e2, axis=1)], axis=1
    )


def flat(surface, xi: np.ndarray) -> np.ndarray:
    """Per-vertex tangent field (frame coefficients) -> 1-form on edges."""
    mesh = surface.mesh
    amb_field = surface.frame_field_to_ambient(np.asarray(xi, float))
    avg = 0.5 * (amb_field[mesh.edges[:, 0]] + amb_field[mesh.edges[:, 1]])
    return np.sum(avg * mesh.edge_chord, axis=1)


def j_rotate(xi: np.ndarray) -> np.ndarray:
    """Pointwise +90-degree rotation in the oriented frame: (a, b) -> (-b, a)."""
    xi = np.asarray(xi, float)
    return np.stack([-xi[..., 1], xi[..., 0]], axis=-1)


def field_inner(surface, xi, zeta) -> float:
    """Lumped L2 inner product of two frame fields."""
    m = surface.mesh.metric().dual_area
    return float(np.sum(m * np.sum(np.asarray(xi) * np.asarray(zeta), axis=1)))


def field_norm(surface, xi) -> float:
    return float(np.sqrt(max(field_inner(surface, xi, xi), 0.0)))


# -- harmonic basis ----------------------------------------------------------------


@dataclass
class HarmonicBasis:
    """2g discretely harmonic 1-forms, L2-orthonormal as sharped fields.

    ``forms``: (2g, E); ``fields``: (2g, V, 2) the sharped fields;
    ``gram``: their lumped L2 Gram matrix (identity up to round-off);
    ``residual_d`` / ``residual_delta``: per-form L2 norms of d1 w and
    delta w, certifying discrete harmonicity.
    """

    forms: np.ndarray
    fields: np.ndarray
    gram: np.ndarray
    residual_d: np.ndarray
    residual_delta: np.ndarray
    kernel_eigenvalues: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def dimension(self) -> int:
        return len(self.forms)

    def to_dict(self) -> dict:
        return {"forms": self.forms.tolist(), "gram": self.gram.tolist()}


def harmonic_basis(surface, extra: int = 6, rel_tol: float = 1e-10) -> HarmonicBasis:
    """Kernel of the 1-form Dirichlet energy on a closed mesh.

    Solves for the ``2g + extra`` lowest eigenpairs of the PSD form
    ``|d1 w|^2 + |delta w|^2`` (dense below 600 edges, else shift-invert
    Lanczos with a deterministic start vector), detects the kernel at
    ``rel_tol`` times a Gershgorin scale, and checks its dimension is
    exactly 2g. The kernel vectors are then orthonormalized in the lumped
    L2 inner product of their sharped fields.
    """
    mesh = surface.mesh
    if mesh.has_boundary:
        raise HasBoundary("harmonic basis requires a closed mesh")
    g = mesh.genus()
    ops = dec(surface)
    K = ops.laplacian_form()
    E = K.shape[0]

    scale = float(np.max(np.abs(K).sum(axis=1)))
    k = min(2 * g + extra, E - 1)
    if E <= 600:
        vals, vecs = np.linalg.eigh(K.toarray())
        vals, vecs = vals[: max(k, 2 * g + 1)], vecs[:, : max(k, 2 * g + 1)]
    else:
        rng = np.random.default_rng(_EIG_SEED)
        v0 = rng.standard_normal(E)
        try:
            vals, vecs = spla.eigsh(K, k=k, sigma=-1e-8 * scale, which="LM", v0=v0)
        except Exception as exc:  # ARPACK failures surface as RuntimeError
            raise SolverFailure(f"harmonic kernel eigensolve failed: {exc}") from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]

    tol = rel_tol * scale
    n_kernel = int(np.sum(np.abs(vals) <= tol))
    if n_kernel != 2 * g:
        raise KernelDimensionMismatch(
            f"kernel dimension {n_kernel} != 2g = {2 * g} "
            f"(eigenvalues {vals[: 2 * g + 2]}, tol {tol:.3e})"
        )
    if n_kernel == 0:
        return HarmonicBasis(
            forms=np.zeros((0, E)),
            fields=np.zeros((0, mesh.n_vertices, 2)),
            gram=np.zeros((0, 0)),
            residual_d=np.zeros(0),
            residual_delta=np.zeros(0),
            kernel_eigenvalues=vals[:0],
        )

    raw_forms = vecs[:, :n_kernel].T
    raw_fields = np.array([sharp(surface, w) for w in raw_forms])
    m = mesh.metric().dual_area
    gram = np.einsum("avc,bvc,v->ab", raw_fields, raw_fields, m)
    evals, evecs = np.linalg.eigh(gram)
    if evals.min() <= 1e-12 * evals.max():
        raise SolverFailure("sharped harmonic fields are numerically dependent")
    W = evecs @ np.diag(evals**-0.5) @ evecs.T  # gram^(-1/2), symmetric
    forms = W.T @ raw_forms
    fields = np.einsum("ab,bvc->avc", W.T, raw_fields)

    gram_out = np.einsum("avc,bvc,v->ab", fields, fields, m)
    rd = np.empty(n_kernel)
    rdelta = np.empty(n_kernel)
    for i, w in enumerate(forms):
        ed, edl = ops.dirichlet_energies(w)
        rd[i] = np.sqrt(max(ed, 0.0))
        rdelta[i] = np.sqrt(max(edl, 0.0))
    return HarmonicBasis(
        forms=forms,
        fields=fields,
        gram=gram_out,
        residual_d=rd,
        residual_delta=rdelta,
        kernel_eigenvalues=vals[:n_kernel],
    )
