"""Numerical toolkit for Bergman-space Toeplitz operators.

Parses symbol expressions in one or two complex variables, assembles
truncated Toeplitz matrices on the disc and bidisc, estimates spectra and
pseudospectra of the sections, and approximates the essential spectrum of
bidisc operators as the union of the two boundary-slice spectral families.

Submodules are imported lazily (PEP 562): importing :mod:`bergspec` alone
does not load numpy or scipy.  The command-line front end relies on this
to apply ``--threads`` to the BLAS thread pools, which only honor their
environment variables if these are set before the numeric libraries load.
"""

from __future__ import annotations

import importlib

__version__ = "0.1.0"

# public name -> defining submodule
_EXPORTS = {
    "BergspecError": "errors",
    "SymbolSyntaxError": "errors",
    "ArityError": "errors",
    "CapExceededError": "errors",
    "SolverError": "errors",
    "IllConditionedWindingError": "errors",
    "DegenerateGridError": "errors",
    "EmptyRegionError": "errors",
    "ProbeLocationError": "errors",
    "Const": "symbols",
    "VarZ": "symbols",
    "VarW": "symbols",
    "Conj": "symbols",
    "Neg": "symbols",
    "Add": "symbols",
    "Sub": "symbols",
    "Mul": "symbols",
    "Pow": "symbols",
    "Re": "symbols",
    "Im": "symbols",
    "Abs": "symbols",
    "Exp": "symbols",
    "Node": "symbols",
    "SymbolExpr": "symbols",
    "parse": "symbols",
    "evaluate": "symbols",
    "eval_grid": "symbols",
    "slice_theta1": "symbols",
    "slice_theta2": "symbols",
    "swap_variables": "symbols",
    "expand_polynomial": "symbols",
    "to_text": "symbols",
    "canonical_text": "symbols",
    "QuadratureRule": "quadrature",
    "build_quadrature": "quadrature",
    "integrate_disc": "quadrature",
    "ToeplitzMatrix1D": "toeplitz",
    "ToeplitzMatrix2D": "toeplitz",
    "monomial_entry_exact": "toeplitz",
    "matrix_entry_1d": "toeplitz",
    "build_toeplitz_1d": "toeplitz",
    "build_toeplitz_2d": "toeplitz",
    "default_quadrature": "toeplitz",
    "MAX_N_1D": "toeplitz",
    "MAX_N_2D": "toeplitz",
    "DEFAULT_Q_R": "toeplitz",
    "DEFAULT_Q_THETA": "toeplitz",
    "GridSpec": "spectra",
    "SpectrumApprox": "spectra",
    "RegionApprox": "spectra",
    "PseudospectrumGrid": "spectra",
    "eigenvalues": "spectra",
    "smallest_singular_value": "spectra",
    "pseudospectrum": "spectra",
    "essential_spectrum_1d": "spectra",
    "winding_number": "spectra",
    "spectrum_1d_estimate": "spectra",
    "ThetaGrid": "essential",
    "SliceParams": "essential",
    "EssentialSpectrumResult": "essential",
    "slice_spectra_family": "essential",
    "essential_spectrum_2d": "essential",
    "hausdorff_distance": "essential",
    "verify_against_2d_sections": "essential",
}

__all__ = ["__version__", *sorted(_EXPORTS)]


def __getattr__(name: str):
    submodule = _EXPORTS.get(name)
    if submodule is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    value = getattr(importlib.import_module(f".{submodule}", __name__), name)
    globals()[name] = value
    return value


def __dir__():
    return sorted(set(globals()) | set(__all__))
