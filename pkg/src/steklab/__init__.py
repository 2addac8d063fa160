"""Steklov and Laplace spectra of simplicial manifolds, metric invariants, and eigenvalue bounds."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0+unknown"

from .errors import SteklabError  # noqa: E402
from .mesh import SimplicialMesh, load_mesh, save_mesh  # noqa: E402
from .shapes import ShapeSpec, generate_shape, steklov_domain  # noqa: E402
from .eigen import laplace_spectrum, steklov_spectrum  # noqa: E402
from .metric import compute_invariants  # noqa: E402

__all__ = [
    "SteklabError",
    "SimplicialMesh",
    "load_mesh",
    "save_mesh",
    "ShapeSpec",
    "generate_shape",
    "steklov_domain",
    "laplace_spectrum",
    "steklov_spectrum",
    "compute_invariants",
]
