"""Spectra of the open non-hermitian Kitaev chain.

Finite-chain diagonalisation, infinite-size eigenvalue curves, zero-mode
detection and skin-effect classification for arbitrary complex couplings.
"""

from .exceptions import (
    DegeneratePolynomialError,
    KitaevError,
    NumericalFailure,
    PreconditionError,
    SingularInputError,
    StructureError,
    UnsupportedStructureError,
)
from .finite import EigenDecomposition, assemble_bdg, eigensolve, localization, spectrum_closed_form_d1d2_zero
from .infinite import SpectrumCurve, SpectrumPoint, classify_branch, spectrum_curve, vieta_solutions
from .model import ModelParams, bulk_quartic, bulk_solve, periodic_lambda, phase_rotate
from .polycore import Polynomial, roots
from .skin import BistritzOutcome, SkinVerdict, bistritz, classify_skin, no_skin_conditions, spot_check_isolated
from .zeromode import ZeroModeVerdict, has_zero_mode, zero_mode_roots, zero_mode_state

__version__ = "0.1.0"

__all__ = [
    "BistritzOutcome",
    "DegeneratePolynomialError",
    "EigenDecomposition",
    "KitaevError",
    "ModelParams",
    "NumericalFailure",
    "Polynomial",
    "PreconditionError",
    "SingularInputError",
    "SkinVerdict",
    "SpectrumCurve",
    "SpectrumPoint",
    "StructureError",
    "UnsupportedStructureError",
    "ZeroModeVerdict",
    "assemble_bdg",
    "bistritz",
    "bulk_quartic",
    "bulk_solve",
    "classify_branch",
    "classify_skin",
    "eigensolve",
    "has_zero_mode",
    "localization",
    "no_skin_conditions",
    "periodic_lambda",
    "phase_rotate",
    "roots",
    "spectrum_closed_form_d1d2_zero",
    "spectrum_curve",
    "spot_check_isolated",
    "vieta_solutions",
    "zero_mode_roots",
    "zero_mode_state",
]
