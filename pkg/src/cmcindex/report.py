"""Report serialization: JSON and CSV emission, reproducibility stamps."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path


def code_version() -> str:
    """Package version plus a digest of the installed sources.

    Deterministic for a given install, independent of time and host, so
    reports embedding it stay byte-identical across reruns.
    """
    import cmcindex

    h = hashlib.sha256()
    pkg_dir = Path(cmcindex.__file__).parent
    for p in sorted(pkg_dir.glob("*.py")):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    version = getattr(cmcindex, "__version__", "0")
    return f"{version}+{h.hexdigest()[:12]}"


def dumps_canonical(data: dict) -> str:
    """Stable JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def write_report(data: dict, path) -> None:
    Path(path).write_text(dumps_canonical(data))


def eigenvalue_csv(report: dict) -> str:
    """CSV eigenvalue table of an index report."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["surface", "test_space", "k", "eigenvalue", "negative"])
    eps = report.get("eps_neg", 0.0)
    for k, lam in enumerate(report.get("eigenvalues", [])):
        w.writerow([report.get("surface", ""), report.get("test_space", ""), k,
                    repr(float(lam)), int(lam < -eps)])
    return buf.getvalue()


def write_eigenvalue_csv(report: dict, path) -> None:
    Path(path).write_text(eigenvalue_csv(report))
