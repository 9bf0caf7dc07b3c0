"""Semi-classical superradiance simulator.

Thin Python wrapper over the C++ core; every symbol lives in the compiled
extension module (inside the package for installed wheels, top-level for
in-tree builds).
"""

try:
    from ._srsim import *  # noqa: F401,F403
    from ._srsim import __doc__  # noqa: F401
except ImportError:
    from _srsim import *  # noqa: F401,F403
    from _srsim import __doc__  # noqa: F401
