"""Generalized Swanson Hamiltonians with position-dependent ladder operators.

Builds the Hermitian equivalent of ``w(a+a + 1/2) + alpha a^2 + beta a+^2`` with
``a = A d/dx + B``, classifies the image of the Liouville map and computes
spectra analytically (ladder or box) and with a finite-difference oracle.
"""
from .errors import (ConfigError, DomainMismatch, NumericalFailure, SwansonError,
                     TruncationWarning)
from .expr import eval_jet, parse
from .mapping import CoordinateMap, DomainClass, build_map, classify_domain
from .model import LadderSpec, SwansonParams, commutator_residual, derive_b
from .oracle import fd_spectrum_x, fd_spectrum_z, hgs_residual, oracle_x
from .pipeline import make_problem, verify
from .potential import consistency_report, v_eff_general, v_eff_reduced
from .profiles import catalog, get_profile
from .specfun import hermite, hermite_correspondence, hyp1f1, hyp1f1_zero_guess
from .spectrum import (SpectrumResult, analytic_spectrum, box_spectrum_approx,
                       box_spectrum_exact, ladder_spectrum)

__all__ = [
    "ConfigError", "DomainMismatch", "NumericalFailure", "SwansonError", "TruncationWarning",
    "parse", "eval_jet", "CoordinateMap", "DomainClass", "build_map", "classify_domain",
    "LadderSpec", "SwansonParams", "commutator_residual", "derive_b",
    "fd_spectrum_x", "fd_spectrum_z", "hgs_residual", "oracle_x",
    "make_problem", "verify", "consistency_report", "v_eff_general", "v_eff_reduced",
    "catalog", "get_profile", "hermite", "hermite_correspondence", "hyp1f1", "hyp1f1_zero_guess",
    "SpectrumResult", "analytic_spectrum", "box_spectrum_approx", "box_spectrum_exact", "ladder_spectrum",
]
