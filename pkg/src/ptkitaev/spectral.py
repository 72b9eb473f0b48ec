"""
PT-phase classification along the gain-loss axis.

A parameter point is *broken* when ``max_k |Im E_k| > eps``.  The gain-loss
strength in ``ChainParams.gain_loss`` is ignored by the scanning routines;
they probe ``gamma`` themselves.  Default tolerances scale with the hopping J.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import eigen
from .errors import ParameterError, SolverError
from .model import build_hbdg, gain_loss_direction

EPS = 1e-8
TOL = 1e-6
GAMMA_MAX = 4.0
N_SCAN_THRESHOLD = 400
N_SCAN_INTERVALS = 800
LAMBDA_FLOOR = -16.0


@dataclass(frozen=True)
class ThresholdResult:
    gamma_th: float
    bracket: tuple
    broken_at_zero: bool = False
    capped: bool = False


@dataclass(frozen=True)
class PtIntervals:
    intervals: list = field(default_factory=list)
    boundary_points: list = field(default_factory=list)

    @property
    def reentrant(self):
        return len(self.intervals) >= 2


class GammaProbe:
    """Evaluate spectra of ``H_K(gamma)`` for a fixed Hermitian part.

    Builds ``H_BdG`` once; each call adds ``gamma`` times the unit gain-loss
    diagonal.  The result is entrywise identical to ``build_hk``.
    """

    def __init__(self, params, method="lapack"):
        self.params = params
        self.method = method
        self._h0 = build_hbdg(params)
        self._direction = gain_loss_direction(params)
        self._diag = np.diag_indices_from(self._h0)

    def matrix(self, gamma):
        h = self._h0.copy()
        h[self._diag] += gamma * self._direction
        return h

    def values(self, gamma):
        try:
            return eigen.eigenvalues(self.matrix(gamma), method=self.method)
        except SolverError as exc:
            exc.state.setdefault("gamma", gamma)
            raise SolverError(f"{exc} (at gamma={gamma!r})", **exc.state) from exc

    def max_abs_imag(self, gamma):
        return float(np.abs(self.values(gamma).imag).max())

    def broken(self, gamma, eps):
        if gamma == 0.0:
            # H_K(0) is Hermitian; never let round-off flip it
            return False
        return self.max_abs_imag(gamma) > eps


def _scaled(value, default, params):
    return default * params.hopping if value is None else value


def is_pt_broken(params, eps=None, method="lapack"):
    """True iff ``H_K(params)`` has an eigenvalue with ``|Im| > eps`` (default 1e-8 J)."""
    eps = _scaled(eps, EPS, params)
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps!r}")
    return GammaProbe(params, method).broken(params.gain_loss, eps)


def _bisect(probe, lo, hi, tol, eps):
    """Shrink ``[lo, hi]``, whose endpoints lie in opposite phases, to width <= tol."""
    broken_hi = probe.broken(hi, eps)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if probe.broken(mid, eps) == broken_hi:
            hi = mid
        else:
            lo = mid
    return lo, hi


def pt_threshold_first(params, gamma_max=None, tol=None, eps=None, n_scan=N_SCAN_THRESHOLD,
                       method="lapack"):
    """Smallest gain-loss strength at which the spectrum turns complex.

    A coarse ascending scan with step ``gamma_max / n_scan`` brackets the first
    unbroken -> broken transition, which is then bisected to ``tol``.

    Parameters
    ----------
    params : ChainParams
        ``gain_loss`` is ignored.
    gamma_max, tol, eps : float, optional
        Defaults ``4 J``, ``1e-6 J`` and ``1e-8 J``.
    n_scan : int
        Number of coarse scan steps.

    Returns
    -------
    ThresholdResult
        ``gamma_th`` is the bracket midpoint.  ``capped`` (with ``gamma_th =
        gamma_max``) if never broken; ``broken_at_zero`` (with ``gamma_th = 0``)
        if broken at both the first scan point and at ``gamma = tol``.
    """
    gamma_max = _scaled(gamma_max, GAMMA_MAX, params)
    tol = _scaled(tol, TOL, params)
    eps = _scaled(eps, EPS, params)
    if not (gamma_max > 0 and tol > 0 and eps > 0):
        raise ParameterError("gamma_max, tol and eps must be positive")
    if n_scan < 1:
        raise ParameterError(f"n_scan must be >= 1, got {n_scan}")
    probe = GammaProbe(params, method)
    step = gamma_max / n_scan
    prev = 0.0
    for k in range(1, n_scan + 1):
        gamma = k * step
        if probe.broken(gamma, eps):
            if k == 1 and probe.broken(tol, eps):
                return ThresholdResult(0.0, (0.0, tol), broken_at_zero=True)
            lo, hi = _bisect(probe, prev, gamma, tol, eps)
            return ThresholdResult(0.5 * (lo + hi), (lo, hi))
        prev = gamma
    return ThresholdResult(gamma_max, (gamma_max, math.inf), capped=True)


def pt_intervals(params, gamma_max=None, n_scan=N_SCAN_INTERVALS, tol=None, eps=None,
                 method="lapack"):
    """Maximal PT-symmetric (all-real) gamma intervals in ``[0, gamma_max]``.

    Every unbroken/broken flip on a uniform ``n_scan`` grid is refined by
    bisection.  Features narrower than ``gamma_max / n_scan`` can be missed.
    """
    gamma_max = _scaled(gamma_max, GAMMA_MAX, params)
    tol = _scaled(tol, TOL, params)
    eps = _scaled(eps, EPS, params)
    if n_scan < 100:
        raise ParameterError(f"n_scan must be >= 100, got {n_scan}")
    probe = GammaProbe(params, method)
    grid = np.linspace(0.0, gamma_max, n_scan + 1)
    states = [probe.broken(float(g), eps) for g in grid]
    boundaries = []
    intervals = []
    start = 0.0
    for k in range(1, len(grid)):
        if states[k] == states[k - 1]:
            continue
        a, b = _bisect(probe, float(grid[k - 1]), float(grid[k]), tol, eps)
        point = 0.5 * (a + b)
        boundaries.append(point)
        if states[k]:
            intervals.append((start, point))
        else:
            start = point
    if not states[-1]:
        intervals.append((start, gamma_max))
    return PtIntervals(intervals=intervals, boundary_points=boundaries)


def lambda_value(params, floor=LAMBDA_FLOOR, method="lapack"):
    """``log10(max_k Im E_k / J)``, clamped below at ``floor``."""
    if not floor < 0:
        raise ParameterError(f"floor must be negative, got {floor!r}")
    probe = GammaProbe(params, method)
    top = float(probe.values(params.gain_loss).imag.max()) / params.hopping
    if params.gain_loss == 0.0 or top <= 10.0 ** floor:
        return float(floor)
    return math.log10(top)
