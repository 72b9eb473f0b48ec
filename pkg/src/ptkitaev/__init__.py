"""Finite Kitaev chain with a balanced gain-loss pair: spectra, PT thresholds and exceptional points."""

from .eigen import EigenSystem, classify_spectrum, eigendecompose, eigenvalues
from .ep import ep_contours, ep_order, pair_count
from .errors import ConsistencyError, ParameterError, PtKitaevError, SolverError
from .model import Boundary, ChainParams, build_gain_loss, build_hbdg, build_hk, bulk_dispersion
from .spectral import is_pt_broken, lambda_value, pt_intervals, pt_threshold_first
from .sweep import PhaseGrid, lambda_map, threshold_map_m0_delta, threshold_map_mu_delta

__version__ = "0.1.0"

__all__ = [
    "Boundary", "ChainParams", "ConsistencyError", "EigenSystem", "ParameterError", "PhaseGrid",
    "PtKitaevError", "SolverError", "build_gain_loss", "build_hbdg", "build_hk", "bulk_dispersion",
    "classify_spectrum", "eigendecompose", "eigenvalues", "ep_contours", "ep_order",
    "is_pt_broken", "lambda_map", "lambda_value", "pair_count", "pt_intervals",
    "pt_threshold_first", "threshold_map_m0_delta", "threshold_map_mu_delta",
]
