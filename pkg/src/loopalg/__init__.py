"""Temperley-Lieb loop models on the strip: diagram algebra, link representation,
double-row and braid transfer matrices, Wenzl-Jones projectors, Jordan
structure and the Potts correspondence."""
from .linkspace import Connectivity, LinkState, get_basis, link_dim
from .link_rep import SectorMatrix, rho
from .tl_algebra import SingularParameterError, SpectralParams, TLElement
from .transfer import CapacityError, build_rho_DN_sweep, rho_FN

__all__ = [
    "CapacityError",
    "Connectivity",
    "LinkState",
    "SectorMatrix",
    "SingularParameterError",
    "SpectralParams",
    "TLElement",
    "build_rho_DN_sweep",
    "get_basis",
    "link_dim",
    "rho",
    "rho_FN",
]
