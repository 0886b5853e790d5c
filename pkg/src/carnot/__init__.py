"""Numerics for non-horizontal submanifolds of stratified Lie groups.

Subpackages cover the Lie-algebra layer (structure constants, gradings,
metric extension), the Heisenberg group model (geodesics, distance, unit
ball), adapted frames with mean curvature and mean torsion, measure and
first-variation computations, explicit surface constructions, and a CLI.
"""

from . import algebra, frames, heisenberg, kernels

__all__ = ["algebra", "frames", "heisenberg", "kernels", "surfaces", "variation"]
__version__ = "0.1.0"


def __getattr__(name):
    if name in ("surfaces", "variation", "expressions", "cli"):
        import importlib

        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
