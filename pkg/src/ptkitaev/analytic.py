"""
Closed-form oracles: N=5 spectra and thresholds at mu=0, and the
band-structure degeneracy line that bounds the zero-threshold region.

Two alternative N=5 expressions fail a brute-force check.  The validated
versions are the defaults; the failing ones are kept as ``*_uncorrected`` so
the difference stays inspectable:

* m0=1 threshold: the bracket needs an overall square root.  Without it the
  expression gives 1.5 J at delta=0 where diagonalization gives
  sqrt(1.5) J = 1.2247 J.
* m0=2 spectrum: the discriminant is
  ``4(J^2-d^2)^2 + g^4 - 8 g^2 (J^2 + d^2)``; using ``(J^2 + g^2)`` in the
  last factor misses diagonalization by up to ~0.7 J on the sample set.

:func:`validation_report` re-derives both verdicts numerically.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ParameterError


@dataclass(frozen=True)
class DegeneracyLine:
    k: int
    a1: float
    a2: float
    alpha: float


def _check_j(J):
    if not J > 0:
        raise ParameterError(f"J must be positive, got {J!r}")


def _n5_levels(J, delta, gamma, disc):
    """Eight doubly-degenerate levels +-(1/2sqrt2) sqrt(4(J^2+d^2) - g^2 +- sqrt(disc)), plus two zeros."""
    root = np.sqrt(complex(disc))
    base = 4.0 * (J * J + delta * delta) - gamma * gamma
    out = []
    for inner in (base + root, base - root):
        e = np.sqrt(inner) / (2.0 * math.sqrt(2.0))
        out.extend([e, e, -e, -e])
    out.extend([0.0, 0.0])
    values = np.array(out, dtype=complex)
    return values[np.lexsort((values.imag, values.real))]


def n5_spectrum_m1(J, delta, gamma):
    """All 10 eigenvalues of ``H_K`` for N=5, mu=0, gain on the end sites."""
    _check_j(J)
    disc = 4.0 * (J * J - delta * delta) ** 2 + gamma ** 4
    return _n5_levels(J, delta, gamma, disc)


def n5_discriminant_m2(J, delta, gamma):
    return 4.0 * (J * J - delta * delta) ** 2 + gamma ** 4 - 8.0 * gamma ** 2 * (J * J + delta * delta)


def n5_discriminant_m2_uncorrected(J, delta, gamma):
    return 4.0 * (J * J - delta * delta) ** 2 + gamma ** 4 - 8.0 * gamma ** 2 * (J * J + gamma * gamma)


def n5_spectrum_m2(J, delta, gamma):
    """All 10 eigenvalues of ``H_K`` for N=5, mu=0, gain on site 2."""
    _check_j(J)
    return _n5_levels(J, delta, gamma, n5_discriminant_m2(J, delta, gamma))


def n5_spectrum_m2_uncorrected(J, delta, gamma):
    _check_j(J)
    return _n5_levels(J, delta, gamma, n5_discriminant_m2_uncorrected(J, delta, gamma))


def _m1_bracket(J, delta):
    s = delta * delta + J * J
    return (3.0 * s * s + 4.0 * delta * delta * J * J) / (2.0 * J * J * s)


def n5_threshold_m1(J, delta):
    """PT threshold for N=5, mu=0, m0=1 (an EP3); increases monotonically with |delta|."""
    _check_j(J)
    return J * math.sqrt(_m1_bracket(J, delta))


def n5_threshold_m1_uncorrected(J, delta):
    _check_j(J)
    return J * _m1_bracket(J, delta)


def n5_threshold_m2(J, delta):
    """PT threshold for N=5, mu=0, m0=2 (an EP2).

    The radicand equals ``4(J^2+d^2) - 2 sqrt(3(J^2+d^2)^2 + 4 d^2 J^2)`` and is
    non-negative, vanishing only at ``|delta| = J``; round-off below zero is
    clamped, so a returned 0.0 flags the closed threshold.
    """
    _check_j(J)
    d2, j2 = delta * delta, J * J
    radicand = 4.0 * (j2 + d2) - 2.0 * math.sqrt(3.0 * d2 * d2 + 10.0 * d2 * j2 + 3.0 * j2 * j2)
    if radicand <= 1e-14 * (j2 + d2):
        return 0.0
    return math.sqrt(radicand)


def quasimomentum(k, n_sites):
    """Open-chain standing-wave momentum ``pi k / (N + 1)``."""
    return math.pi * k / (n_sites + 1)


def degeneracy_alpha(k, n_sites, partner=None):
    """Coefficients of the line where open-chain levels k and ``partner`` cross.

    Requiring equal bulk energies at two open-chain momenta gives
    ``a1 mu J + a2 (J^2 - d^2) = 0`` with ``a1 = cos q_k - cos q_p`` and
    ``a2 = a1 (cos q_k + cos q_p)``.  ``partner`` defaults to ``k - 1``, the
    adjacent level, where ``a1 < 0``; the slope is reported as
    ``alpha = |a1| / |a2|``.
    """
    partner = k - 1 if partner is None else partner
    if not (1 <= partner < k <= n_sites):
        raise ParameterError(f"need 1 <= partner < k <= {n_sites}, got k={k}, partner={partner}")
    ck = math.cos(quasimomentum(k, n_sites))
    cp = math.cos(quasimomentum(partner, n_sites))
    a1 = ck - cp
    a2 = a1 * (ck + cp)
    alpha = math.inf if a2 == 0.0 else abs(a1) / abs(a2)
    return DegeneracyLine(k=k, a1=a1, a2=a2, alpha=alpha)


def band_edge_alpha(n_sites):
    """Smallest alpha over k, attained at the band edge (k = 2); tends to 1/2."""
    return min(degeneracy_alpha(k, n_sites).alpha for k in range(2, n_sites + 1))


def zero_threshold_line(mu, J, alpha):
    """Non-negative delta solving ``alpha mu J = |J^2 - delta^2|``.

    Returns the sorted roots ``sqrt(J^2 -+ alpha mu J)`` that are real; an
    empty list when there are none.
    """
    _check_j(J)
    roots = set()
    for sign in (-1.0, 1.0):
        sq = J * J + sign * alpha * mu * J
        if sq >= 0.0:
            roots.add(math.sqrt(sq))
    return sorted(roots)


# --------------------------------------------------------------------------
# numerical validation


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    error: float
    tolerance: float
    detail: str = ""


def spectral_distance(a, b):
    """Largest eigenvalue mismatch under the optimal one-to-one matching."""
    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def _min_level_gap(values):
    distinct = np.unique(np.round(values, 12))
    if distinct.size < 2:
        return 0.0
    diff = np.abs(distinct[:, None] - distinct[None, :])
    return float(diff[np.triu_indices(distinct.size, 1)].min())


def sample_points(n=20, seed=0, min_gap=0.05):
    """(delta, gamma) pairs in [0, 1.6] x [0, 3] for J=1, kept away from EPs.

    Near an EP eigenvalues are only sqrt(eps)- or cbrt(eps)-accurate, so
    points where any two distinct analytic levels (of either gain placement)
    come closer than ``min_gap`` are rejected.
    """
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        d, g = rng.uniform(0.0, 1.6), rng.uniform(0.0, 3.0)
        gaps = (_min_level_gap(n5_spectrum_m1(1.0, d, g)), _min_level_gap(n5_spectrum_m2(1.0, d, g)))
        if min(gaps) > min_gap:
            pts.append((float(d), float(g)))
    return pts


def validation_report(tol_spectrum=1e-8, tol_threshold=1e-6, deltas=(0.0, 0.5, 1.0, 1.5)):
    """Compare every N=5 closed form against direct diagonalization.

    Returns a list of :class:`CheckResult`, including the verdicts on the
    uncorrected forms, which are expected to fail.
    """
    from .model import ChainParams, build_hk
    from .spectral import pt_threshold_first

    results = []
    pts = sample_points()
    for m0, closed, uncorrected in ((1, n5_spectrum_m1, None),
                                (2, n5_spectrum_m2, n5_spectrum_m2_uncorrected)):
        worst = worst_uncorrected = 0.0
        for d, g in pts:
            numeric = np.linalg.eigvals(build_hk(ChainParams(5, sc_order=d, gain_loss=g, gain_site=m0)))
            worst = max(worst, spectral_distance(closed(1.0, d, g), numeric))
            if uncorrected is not None:
                worst_uncorrected = max(worst_uncorrected, spectral_distance(uncorrected(1.0, d, g), numeric))
        results.append(CheckResult(f"spectrum m0={m0} (validated form)", worst <= tol_spectrum,
                                   worst, tol_spectrum, f"{len(pts)} (delta, gamma) samples"))
        if uncorrected is not None:
            results.append(CheckResult(f"spectrum m0={m0} (uncorrected form)", worst_uncorrected <= tol_spectrum,
                                       worst_uncorrected, tol_spectrum, "discriminant with (J^2+gamma^2)"))

    for m0, closed, uncorrected in ((1, n5_threshold_m1, n5_threshold_m1_uncorrected),
                                (2, n5_threshold_m2, None)):
        worst = worst_uncorrected = 0.0
        for d in deltas:
            numeric = pt_threshold_first(ChainParams(5, sc_order=d, gain_site=m0)).gamma_th
            worst = max(worst, abs(closed(1.0, d) - numeric))
            if uncorrected is not None:
                worst_uncorrected = max(worst_uncorrected, abs(uncorrected(1.0, d) - numeric))
        results.append(CheckResult(f"threshold m0={m0} (validated form)", worst <= tol_threshold,
                                   worst, tol_threshold, f"delta in {list(deltas)}"))
        if uncorrected is not None:
            results.append(CheckResult(f"threshold m0={m0} (uncorrected form)", worst_uncorrected <= tol_threshold,
                                       worst_uncorrected, tol_threshold, "bracket without square root"))
    return results
