"""Bundled identity/bound suite behind ``cmcindex verify``.

Each check returns a row with PASS/FAIL/SKIP and a one-line detail; the
CLI prints the matrix and exits nonzero when any row fails. Without
``--mesh`` the suite runs on the built-in analytic set at the requested
grid resolution; with a surface it runs the applicable subset (refinement
checks need a regenerable surface, i.e. one produced by ``zoo``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hodge
from . import indexform as ix
from . import surfaces as zoo


@dataclass
class VerifyRow:
    name: str
    ok: bool | None  # None = skipped
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "ok": self.ok, "detail": self.detail}


def _surface_set(resolution: int, signs) -> list[tuple[str, object]]:
    out = []
    for sign in signs:
        out.append((f"geodesic_sphere(pi/4) a{sign:+d}",
                    zoo.gen_geodesic_sphere_s3(np.pi / 4, 3).with_alpha_sign(sign)))
        out.append((f"clifford({resolution}x{resolution}) a{sign:+d}",
                    zoo.gen_flat_torus_s3(2.0**-0.5, resolution, resolution).with_alpha_sign(sign)))
        out.append((f"torus_s3(r=0.5,{resolution}) a{sign:+d}",
                    zoo.gen_flat_torus_s3(0.5, resolution, resolution).with_alpha_sign(sign)))
    out.append(("sphere_r3(level 3)", zoo.gen_round_sphere_r3(1.0, 3)))
    out.append((f"flat_torus_t3({resolution})", zoo.gen_flat_torus_t3(None, resolution, resolution)))
    return out


def run_suite(surface=None, generator=None, alpha_sign=None, resolution: int = 32,
              eps_neg=None) -> list[VerifyRow]:
    rows: list[VerifyRow] = []
    signs = [alpha_sign] if alpha_sign else [1, -1]

    if surface is not None:
        named = [("input", surface)]
        if surface.space.tag == "S3" and alpha_sign is None:
            named.append(("input a-1", surface.with_alpha_sign(-surface.space.alpha_sign)))
    else:
        named = _surface_set(resolution, signs)

    # Pointwise identities.
    worst = max(ix.antisymmetry_residual(s) for _, s in named)
    rows.append(VerifyRow("antisymmetry <A,alpha> = 0", worst <= 1e-12, f"max {worst:.2e}"))

    analytic = [(n, s) for n, s in named if s.provenance == "analytic"]
    if analytic:
        worst = max(ix.gauss_equation_residual(s) for _, s in analytic)
        rows.append(VerifyRow("gauss equation K = det A + c", worst <= 1e-10, f"max {worst:.2e}"))
    else:
        rows.append(VerifyRow("gauss equation K = det A + c", None,
                              "fitted data satisfies it by construction"))

    worst = max(ix.f_expansion_residual(s, n_samples=1000) for _, s in named)
    rows.append(VerifyRow("F expansion oracle", worst <= 1e-10, f"max {worst:.2e}"))

    closed = [(n, s) for n, s in named if not s.mesh.has_boundary]
    if closed:
        worst = max(abs(s.mesh.metric().gauss_bonnet_residual(s.mesh)) for _, s in closed)
        rows.append(VerifyRow("gauss-bonnet defect sum", worst <= 1e-9, f"max {worst:.2e}"))

    # Harmonic dimension, genus bound, pairing.
    bases = {}
    dims_ok, detail = True, []
    for n, s in closed:
        try:
            bases[n] = hodge.harmonic_basis(s)
            g = s.mesh.genus()
            if bases[n].dimension != 2 * g:
                dims_ok = False
            detail.append(f"{n}: {bases[n].dimension} (g={g})")
        except Exception as exc:
            dims_ok = False
            detail.append(f"{n}: {type(exc).__name__}")
    if closed:
        rows.append(VerifyRow("harmonic dimension = 2g", dims_ok, "; ".join(detail)))

    variant_votes = []
    pairing_ok = True
    pairing_detail = []
    for n, s in closed:
        b = bases.get(n)
        if b is None or b.dimension == 0:
            continue
        pr = ix.pairing_sum(s, b.forms[0])
        key = pr.matching_variant()
        if key == "inconsistent":
            pairing_ok = False
            pairing_detail.append(f"{n}: inconsistent")
            continue
        if key != "both":
            variant_votes.append(key)
        ref = pr.predicted["double" if key == "both" else key]
        rel = abs(pr.total - ref) / max(abs(ref), 1e-30) if abs(ref) > 1e-14 else abs(pr.total)
        if rel > 0.02 and abs(ref) > 1e-14:
            pairing_ok = False
        pairing_detail.append(f"{n}: {key}, rel {rel:.2e}")
    if pairing_detail:
        if variant_votes and any(v != variant_votes[0] for v in variant_votes):
            pairing_ok = False
            pairing_detail.append("variant differs across surfaces")
        rows.append(VerifyRow("pairing identity (variant match)", pairing_ok,
                              "; ".join(pairing_detail)))

    bound_ok = True
    bound_detail = []
    zero_ok = True
    zero_detail = []
    for n, s in closed:
        b = bases.get(n)
        if b is None:
            continue
        rep = ix.index_on_harmonic_span(s, b, eps_neg=eps_neg, label=n)
        if rep.bound_required:
            if not rep.bound_satisfied:
                bound_ok = False
            bound_detail.append(f"{n}: {rep.index_estimate} >= g={rep.genus}")
        else:
            if rep.index_estimate != 0 or any(abs(l) > rep.eps_neg for l in rep.eigenvalues):
                zero_ok = False
            zero_detail.append(f"{n}: count {rep.index_estimate}")
    if bound_detail:
        rows.append(VerifyRow("genus bound on harmonic span", bound_ok, "; ".join(bound_detail)))
    if zero_detail:
        rows.append(VerifyRow("flat abelian case has index 0", zero_ok, "; ".join(zero_detail)))

    # Harmonicity residual refinement.
    if surface is None:
        pairs = [
            ("sphere_r3", zoo.gen_round_sphere_r3(1.0, 2), zoo.gen_round_sphere_r3(1.0, 3)),
            ("clifford", zoo.gen_flat_torus_s3(2.0**-0.5, resolution, resolution),
             zoo.gen_flat_torus_s3(2.0**-0.5, 2 * resolution, 2 * resolution)),
        ]
        ok, det = True, []
        for name, coarse, fine in pairs:
            r0, r1 = ix.harmonicity_residual(coarse), ix.harmonicity_residual(fine)
            if r0 < 1e-12:
                det.append(f"{name}: exactly harmonic ({r0:.1e})")
                continue
            if r0 / max(r1, 1e-300) < 2.0:
                ok = False
            det.append(f"{name}: {r0:.2e} -> {r1:.2e}")
        rows.append(VerifyRow("harmonicity residual refines >= 2x", ok, "; ".join(det)))
    elif generator:
        name = generator["name"]
        params = dict(generator["params"])
        refined = _refine_params(name, params)
        if refined is None:
            rows.append(VerifyRow("harmonicity residual refines >= 2x", None,
                                  f"no refinement rule for {name}"))
        else:
            fine = zoo.GENERATORS[name](**refined)
            r0 = ix.harmonicity_residual(surface)
            r1 = ix.harmonicity_residual(fine)
            if r0 < 1e-12:
                rows.append(VerifyRow("harmonicity residual refines >= 2x", True,
                                      f"exactly harmonic ({r0:.1e})"))
            else:
                rows.append(VerifyRow("harmonicity residual refines >= 2x",
                                      r0 / max(r1, 1e-300) >= 2.0,
                                      f"{r0:.3e} -> {r1:.3e}"))
    else:
        rows.append(VerifyRow("harmonicity residual refines >= 2x", None,
                              "needs a zoo-generated surface"))

    # Cut-off identities on a bordered cylinder.
    if surface is None:
        cyl = zoo.gen_cylinder_r3(1.0, 16.0, max(resolution, 32), 4 * max(resolution, 32))
        mesh = cyl.mesh
        u = np.arctan2(mesh.vertices[:, 1], mesh.vertices[:, 0])
        du = u[mesh.edges[:, 1]] - u[mesh.edges[:, 0]]
        w = (du + np.pi) % (2.0 * np.pi) - np.pi
        mid = np.abs(mesh.vertices[:, 2] - 8.0) + np.abs(u)
        seed = int(np.argmin(mid))
        hops = int(1.4 * max(resolution, 32))
        phi = ix.tent_function(mesh, seed, hops)
        co = ix.cutoff_second_variation(cyl, w, phi)
        rel = abs(co.value - co.decomposition("double")) / max(abs(co.value), 1e-30)
        pr = ix.cutoff_pairing(cyl, w, phi)
        ok = rel <= 0.03 and pr["total"] < 0.0
        rows.append(VerifyRow("cut-off identity on bordered cylinder", ok,
                              f"weak vs decomposition rel {rel:.2e}; pairing {pr['total']:.3e} < 0"))

    # Restriction monotonicity on small instances.
    if surface is None:
        mono_ok, det = True, []
        small = [
            ("clifford(16x16)", zoo.gen_flat_torus_s3(2.0**-0.5, 16, 16)),
            ("t3(16x16)", zoo.gen_flat_torus_t3(None, 16, 16)),
            ("sphere(level 2)", zoo.gen_round_sphere_r3(1.0, 2)),
        ]
        for n, s in small:
            span = ix.index_on_harmonic_span(s, label=n)
            full = ix.index_full_space(s, label=n)
            if full.index_estimate < span.index_estimate:
                mono_ok = False
            det.append(f"{n}: {full.index_estimate} >= {span.index_estimate}")
        rows.append(VerifyRow("full-space count >= span count", mono_ok, "; ".join(det)))

    return rows


def _refine_params(name: str, params: dict) -> dict | None:
    params = dict(params)
    if "level" in params:
        params["level"] = int(params["level"]) + 1
        return params
    if "n_u" in params:
        params["n_u"] = 2 * int(params["n_u"])
        params["n_v"] = 2 * int(params["n_v"])
        return params
    if "resolution" in params:
        params["resolution"] = 2 * int(params["resolution"])
        return params
    return None
