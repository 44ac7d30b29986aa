"""Hessian definiteness certificates and three-point Jensen inequalities."""

__version__ = "0.1.0"

from .autodiff import HyperDual, ScalarFn, fd_hessian, gradient, hd_eval, hessian
from .errors import DomainError, NumericalError, ParseError
from .expr import function, parse
from .jensen import (
    JensenReport,
    PointTriple,
    Verdict,
    centroid,
    certify_region,
    check_jensen,
    cyclic2_triple,
    cyclic3_triple,
    jensen_gap,
    parallel_triple,
    symmetrization_coeffs,
)
from .surface import curvature_check, fundamental_forms, gauss_curvature, jet
from .symmat import Definiteness, SymMatrix, classify_eigen, classify_sylvester_strict, leading_principal_minors
