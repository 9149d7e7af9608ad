"""Zeta functions of hyperelliptic curves from p-adic cohomology with compact support."""

from .errors import MWZetaError
from .padic import FieldSpec, KCoefficient, PadicElement
from .isocrystal import CurveData
from .frobenius import empirical_precisions, required_precisions
from .zeta import ZetaResult, compute_zeta, zeta_from_counts
from .oracle import count_points_naive

__all__ = [
    "MWZetaError", "FieldSpec", "KCoefficient", "PadicElement", "CurveData",
    "empirical_precisions", "required_precisions", "ZetaResult", "compute_zeta",
    "zeta_from_counts", "count_points_naive",
]
__version__ = "0.1.0"
