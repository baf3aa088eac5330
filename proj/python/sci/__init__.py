"""Cantor-space Koopman spectra, SCI towers and Xi_m decision experiments.

Thin wrapper re-exporting the pybind11 core module.
"""

try:
    # wheel layout: the extension is installed inside the package
    from ._sci import *  # noqa: F401,F403
    from ._sci import __version__  # noqa: F401
except ImportError:
    # plain CMake builds put _sci directly on sys.path
    from _sci import *  # noqa: F401,F403
    from _sci import __version__  # noqa: F401
