"""
Exceptional-point diagnostics from right-eigenvector coalescence.

The overlap matrix ``M_pq = |<psi_p|psi_q>|`` of Euclidean-normalized right
eigenvectors has unit diagonal; near an exceptional point of order k, k
columns become parallel and the largest off-diagonal row sum approaches
``k - 1``.
"""

from dataclasses import dataclass, replace
from functools import partial

import numpy as np

from . import eigen
from .errors import ConsistencyError, ParameterError
from .model import build_hk
from .parallel import ordered_map
from .spectral import EPS

COALESCENCE_CUTOFF = 0.99
DEGENERACY_TOL = 1e-6
CONDITION_GATE = 1e-3


@dataclass(frozen=True)
class EpReport:
    overlap_max_rowsum: float
    estimated_order: int
    coalescing_indices: list
    values: np.ndarray


@dataclass(frozen=True)
class ContourPoint:
    """Refined location where the conjugate-pair count changes.

    ``axis`` names the grid direction that was bisected; ``count_low`` and
    ``count_high`` are the pair counts on the lower- and higher-coordinate
    side of the crossing.
    """

    delta: float
    gamma: float
    count_low: int
    count_high: int
    rowsum: float
    axis: str


def overlap_matrix(es):
    """``M_pq = |v_p^H v_q|`` for the columns of ``es.vectors``."""
    v = np.asarray(es.vectors)
    norms = np.linalg.norm(v, axis=0)
    if np.any(norms == 0):
        raise ConsistencyError("eigenvector with zero norm")
    v = v / norms
    m = np.abs(v.conj().T @ v)
    m = 0.5 * (m + m.T)
    np.fill_diagonal(m, 1.0)
    return np.minimum(m, 1.0)


def degenerate_clusters(values, tol):
    """Groups of indices whose eigenvalues chain together within ``tol``."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    close = np.abs(values[:, None] - values[None, :]) <= tol
    for i, j in zip(*np.nonzero(np.triu(close, 1))):
        parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [g for g in groups.values() if len(g) > 1]


def orthogonalize_degenerate(es, tol=DEGENERACY_TOL, gate=CONDITION_GATE):
    """Replace well-conditioned degenerate eigenspaces by orthonormal bases.

    A cluster of (numerically) equal eigenvalues whose eigenvectors span their
    full dimension (smallest/largest singular value above ``gate``) is
    diagonalizable, so any basis is valid and an orthonormal one avoids
    spurious overlaps.  Clusters whose vectors are nearly dependent are
    coalescing at an exceptional point and are left untouched.
    """
    vectors = np.array(es.vectors, copy=True)
    for idx in degenerate_clusters(es.values, tol):
        block = vectors[:, idx]
        u, s, _ = np.linalg.svd(block, full_matrices=False)
        if s[-1] > gate * s[0]:
            vectors[:, idx] = u
    return eigen.EigenSystem(values=es.values, vectors=vectors, max_residual=es.max_residual)


def ep_report(es, cutoff=COALESCENCE_CUTOFF, degeneracy_tol=DEGENERACY_TOL):
    if not 0 < cutoff < 1:
        raise ParameterError(f"cutoff must lie in (0, 1), got {cutoff!r}")
    m = overlap_matrix(orthogonalize_degenerate(es, degeneracy_tol))
    np.fill_diagonal(m, 0.0)
    rowsums = m.sum(axis=1)
    p = int(np.argmax(rowsums))
    partners = [int(q) for q in np.nonzero(m[p] > cutoff)[0]]
    return EpReport(
        overlap_max_rowsum=float(rowsums[p]),
        estimated_order=1 + len(partners),
        coalescing_indices=sorted([p] + partners),
        values=es.values,
    )


def ep_order(params, cutoff=COALESCENCE_CUTOFF, degeneracy_tol=None, method="lapack"):
    """Diagonalize ``H_K(params)`` and estimate the local EP order.

    ``estimated_order`` counts near-unit overlaps (``> cutoff``) in the row of
    the overlap matrix with the largest off-diagonal sum; that raw sum is
    reported as ``overlap_max_rowsum``.
    """
    if degeneracy_tol is None:
        degeneracy_tol = DEGENERACY_TOL * params.hopping
    es = eigen.eigendecompose(build_hk(params), method=method)
    return ep_report(es, cutoff, degeneracy_tol)


def pair_count(params, imag_eps=None, method="lapack"):
    imag_eps = EPS * params.hopping if imag_eps is None else imag_eps
    values = eigen.eigenvalues(build_hk(params), method=method)
    return eigen.classify_spectrum(values, imag_eps).pair_count


def _at(params_base, delta, gamma):
    return replace(params_base, sc_order=float(delta), gain_loss=float(gamma))


def _cell_count(point, params_base, imag_eps):
    return pair_count(_at(params_base, *point), imag_eps)


def _refine_edge(edge, params_base, eps, imag_eps, cutoff):
    axis, fixed, lo, hi, c_lo, c_hi = edge

    def point(t):
        return (t, fixed) if axis == "delta" else (fixed, t)

    def count(t):
        d, g = point(t)
        return pair_count(_at(params_base, d, g), imag_eps)

    while hi - lo > eps:
        mid = 0.5 * (lo + hi)
        c_mid = count(mid)
        if c_mid != c_lo:
            hi, c_hi = mid, c_mid
        else:
            lo = mid
    t = 0.5 * (lo + hi)
    d, g = point(t)
    report = ep_order(_at(params_base, d, g), cutoff)
    return ContourPoint(delta=d, gamma=g, count_low=c_lo, count_high=c_hi,
                        rowsum=report.overlap_max_rowsum, axis=axis)


def pair_count_grid(params_base, deltas, gammas, imag_eps=None, workers=None):
    """Conjugate-pair counts, shape ``(len(gammas), len(deltas))``."""
    imag_eps = EPS * params_base.hopping if imag_eps is None else imag_eps
    cells = [(float(d), float(g)) for g in gammas for d in deltas]
    counts = ordered_map(partial(_cell_count, params_base=params_base, imag_eps=imag_eps),
                         cells, workers)
    return np.array(counts, dtype=int).reshape(len(gammas), len(deltas))


def _axis(rng):
    lo, hi, n = float(rng[0]), float(rng[1]), int(rng[2])
    if lo == hi:
        return np.array([lo])
    if n < 32:
        raise ParameterError(f"grid axes need >= 32 points, got {n}")
    return np.linspace(lo, hi, n)


def ep_contours(params_base, delta_range, gamma_range, eps=1e-6, imag_eps=None,
                cutoff=COALESCENCE_CUTOFF, workers=None):
    """Exceptional-point contours in the (delta, gamma) plane as a point cloud.

    Parameters
    ----------
    params_base : ChainParams
        Fixed N, J, mu, m0; ``sc_order`` and ``gain_loss`` are swept.
    delta_range, gamma_range : (lo, hi, n)
        Uniform grids, ``n >= 32`` each; ``lo == hi`` pins that parameter.
    eps : float
        Bisection tolerance along each grid edge.

    Returns
    -------
    list of ContourPoint
        One point per grid edge across which the pair count changes,
        annotated with the overlap row sum from :func:`ep_order`.
    """
    deltas = _axis(delta_range)
    gammas = _axis(gamma_range)
    counts = pair_count_grid(params_base, deltas, gammas, imag_eps, workers)
    imag_eps = EPS * params_base.hopping if imag_eps is None else imag_eps
    edges = []
    for j, g in enumerate(gammas):
        for i in range(len(deltas) - 1):
            if counts[j, i] != counts[j, i + 1]:
                edges.append(("delta", float(g), float(deltas[i]), float(deltas[i + 1]),
                              int(counts[j, i]), int(counts[j, i + 1])))
    for i, d in enumerate(deltas):
        for j in range(len(gammas) - 1):
            if counts[j, i] != counts[j + 1, i]:
                edges.append(("gamma", float(d), float(gammas[j]), float(gammas[j + 1]),
                              int(counts[j, i]), int(counts[j + 1, i])))
    refine = partial(_refine_edge, params_base=params_base, eps=eps, imag_eps=imag_eps,
                     cutoff=cutoff)
    return ordered_map(refine, edges, workers)
