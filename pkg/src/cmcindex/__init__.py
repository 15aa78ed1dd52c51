"""Discrete index bounds for harmonic unit-normal maps of CMC surfaces.

Submodules are imported lazily so the CLI can pin BLAS thread counts
before any numerical library loads.
"""

__version__ = "0.1.0"

_SUBMODULES = (
    "ambient",
    "mesh",
    "meshio",
    "surfaces",
    "hodge",
    "indexform",
    "report",
    "verify",
    "errors",
    "cli",
)


def __getattr__(name):
    if name in _SUBMODULES:
        import importlib

        module = importlib.import_module(f".{name}", __name__)
        globals()[name] = module
        return module
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(list(globals()) + list(_SUBMODULES))
