"""Mesh and surface file I/O: OFF, OBJ, and the native JSON schema.

JSON mesh schema::

    {
      "vertices": [[x, y, z(, w)], ...],
      "faces":    [[i, j, k], ...],
      "ambient":  "R3" | "T3" | "S3",
      "lattice":  [[...], [...], [...]]      # optional, T3 only
    }

Surface files extend the schema with per-vertex fields ``normal``,
``shape_op`` (2x2 in the canonical tangent frame), ``H`` and ``K``
(intrinsic curvature), plus ``provenance`` and ``alpha_sign``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import ambient as amb
from .errors import ParseError
from .mesh import TriangleMesh


def _read_off(path: Path) -> tuple[np.ndarray, np.ndarray]:
    tokens = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise ParseError(f"{path}: missing OFF header")
    try:
        nv, nf = int(tokens[1]), int(tokens[2])
        # tokens[3] is the (ignored) edge count
        verts = np.array(tokens[4 : 4 + 3 * nv], dtype=float).reshape(nv, 3)
        pos = 4 + 3 * nv
        faces = []
        for _ in range(nf):
            k = int(tokens[pos])
            if k != 3:
                raise ParseError(f"{path}: non-triangle face with {k} vertices")
            faces.append([int(t) for t in tokens[pos + 1 : pos + 4]])
            pos += k + 1
        return verts, np.array(faces, dtype=np.int64)
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{path}: malformed OFF file ({exc})") from exc


def _read_obj(path: Path) -> tuple[np.ndarray, np.ndarray]:
    verts, faces = [], []
    try:
        with open(path) as fh:
            for line in fh:
                parts = line.split()
                if not parts or parts[0].startswith("#"):
                    continue
                if parts[0] == "v":
                    verts.append([float(x) for x in parts[1:4]])
                elif parts[0] == "f":
                    idx = [int(p.split("/")[0]) for p in parts[1:]]
                    if len(idx) != 3:
                        raise ParseError(f"{path}: non-triangle face {parts}")
                    faces.append([i - 1 if i > 0 else len(verts) + i for i in idx])
    except (ValueError, IndexError) as exc:
        raise ParseError(f"{path}: malformed OBJ file ({exc})") from exc
    if not verts or not faces:
        raise ParseError(f"{path}: no geometry found")
    return np.array(verts, dtype=float), np.array(faces, dtype=np.int64)


def _space_from_json(data: dict) -> amb.AmbientSpace:
    tag = data.get("ambient", amb.EUCLIDEAN3)
    alpha = int(data.get("alpha_sign", 1 if tag == amb.SPHERE3 else 0))
    if tag == amb.FLAT_TORUS3:
        return amb.AmbientSpace(tag, data.get("lattice"))
    if tag == amb.SPHERE3:
        return amb.AmbientSpace(tag, None, alpha)
    return amb.AmbientSpace(tag)


def load_mesh(path, fmt: str | None = None, space: amb.AmbientSpace | None = None) -> TriangleMesh:
    """Load a mesh from OFF, OBJ, or JSON (format inferred from the suffix).

    ``space`` overrides the ambient for OFF/OBJ input (both are plain R^3
    formats); JSON input carries its own ambient tag.
    """
    path = Path(path)
    if not path.exists():
        raise ParseError(f"{path}: no such file")
    fmt = (fmt or path.suffix.lstrip(".")).upper()
    if fmt == "OFF":
        verts, faces = _read_off(path)
        return TriangleMesh(verts, faces, space)
    if fmt == "OBJ":
        verts, faces = _read_obj(path)
        return TriangleMesh(verts, faces, space)
    if fmt == "JSON":
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON ({exc})") from exc
        try:
            verts = np.array(data["vertices"], dtype=float)
            faces = np.array(data["faces"], dtype=np.int64)
        except (KeyError, ValueError) as exc:
            raise ParseError(f"{path}: missing or malformed vertices/faces ({exc})") from exc
        return TriangleMesh(verts, faces, space or _space_from_json(data))
    raise ParseError(f"{path}: unknown mesh format {fmt!r}")


def mesh_to_dict(mesh: TriangleMesh) -> dict:
    out = {
        "vertices": mesh.vertices.tolist(),
        "faces": mesh.faces.tolist(),
        "ambient": mesh.space.tag,
    }
    if mesh.space.tag == amb.FLAT_TORUS3:
        out["lattice"] = mesh.space.lattice.tolist()
    return out


def save_mesh(mesh: TriangleMesh, path) -> None:
    Path(path).write_text(json.dumps(mesh_to_dict(mesh), sort_keys=True))


def surface_to_dict(surface) -> dict:
    out = mesh_to_dict(surface.mesh)
    out.update(
        {
            "normal": surface.normal.tolist(),
            "shape_op": surface.shape_op.tolist(),
            "H": surface.H.tolist(),
            "K": surface.K_sigma.tolist(),
            "provenance": surface.provenance,
        }
    )
    if surface.space.tag == amb.SPHERE3:
        out["alpha_sign"] = int(surface.space.alpha_sign)
    return out


def save_surface(surface, path) -> None:
    Path(path).write_text(json.dumps(surface_to_dict(surface), sort_keys=True))


def load_surface(path):
    """Load a surface JSON written by :func:`save_surface`."""
    from .surfaces import ImmersedSurface

    path = Path(path)
    if not path.exists():
        raise ParseError(f"{path}: no such file")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    mesh = TriangleMesh(
        np.array(data["vertices"], dtype=float),
        np.array(data["faces"], dtype=np.int64),
        _space_from_json(data),
    )
    missing = [k for k in ("normal", "shape_op", "H", "K") if k not in data]
    if missing:
        raise ParseError(f"{path}: surface file missing fields {missing}")
    return ImmersedSurface.from_vertex_data(
        mesh,
        normal=np.array(data["normal"], dtype=float),
        shape_op=np.array(data["shape_op"], dtype=float),
        K_sigma=np.array(data["K"], dtype=float),
        provenance=data.get("provenance", "fitted"),
    )
