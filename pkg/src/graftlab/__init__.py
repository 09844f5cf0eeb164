"""graftlab: complex projective structures on a genus-2 surface, desk scale.

Subpackages cover Moebius algebra, hyperbolic/spherical geometry, a
Fuchsian octagon surface, measured laminations, fat train tracks,
bending maps into hyperbolic 3-space, and 2-pi grafting, plus a CLI
(``graftlab``) that runs the verification suites and renders figures.
"""

__version__ = "0.1.0"

from . import errors

__all__ = [
    "errors",
    "mobius",
    "hyperbolic",
    "surface",
    "lamination",
    "traintrack",
    "bending",
    "grafting",
    "figures",
    "verify",
    "cli",
    "__version__",
]
