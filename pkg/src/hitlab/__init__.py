"""hitlab: spectral closure laboratory for homogeneous isotropic turbulence."""

__version__ = "0.1.0"

from .grid import WavenumberGrid, make_grid

__all__ = ["WavenumberGrid", "make_grid", "__version__"]
