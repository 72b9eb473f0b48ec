"""
Dense eigendecomposition of general complex matrices.

Two interchangeable back ends sit behind :func:`eigendecompose`:

``"lapack"``
    ``numpy.linalg.eig`` (LAPACK ``zgeev``), the default.
``"qr"``
    A self-contained implementation: diagonal balancing, Householder reduction
    to upper Hessenberg form, single-shift complex QR iteration to Schur form,
    eigenvectors by back-substitution on the triangular factor.

Whatever the back end, the residual ``max_k |H v_k - l_k v_k| / |H|_F`` is
computed and recorded, and a violation of the requested tolerance raises
:class:`SolverError`.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConsistencyError, ParameterError, SolverError

DEFAULT_TOL = 1e-8
_ULP = np.finfo(float).eps
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues with unit-norm right eigenvectors (column ``k`` <-> ``values[k]``)."""

    values: np.ndarray
    vectors: np.ndarray
    max_residual: float

    @property
    def dim(self):
        return self.values.shape[0]


class SpectrumClass(NamedTuple):
    real_count: int
    pair_count: int
    max_imag: float


def _as_square(h):
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] == 0:
        raise ParameterError(f"expected a non-empty square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ParameterError("matrix contains NaN or Inf entries")
    return h


def sort_order(values):
    """Indices sorting ``values`` by (real, imag) ascending."""
    return np.lexsort((values.imag, values.real))


def residual(h, values, vectors):
    norm = np.linalg.norm(h)
    res = np.linalg.norm(h @ vectors - vectors * values, axis=0)
    worst = float(res.max(initial=0.0))
    return worst / norm if norm > 0 else worst


# --------------------------------------------------------------------------
# pure-numpy route


def balance(a):
    """Diagonal similarity scaling by powers of two.

    Returns ``(b, d)`` with ``b = diag(1/d) @ a @ diag(d)``; row and column
    1-norms of ``b`` are equalized to within a factor of 2.
    """
    b = np.array(a, dtype=complex)
    n = b.shape[0]
    d = np.ones(n)
    done = False
    while not done:
        done = True
        for i in range(n):
            off = np.arange(n) != i
            c = np.abs(b[off, i]).sum()
            r = np.abs(b[i, off]).sum()
            if c == 0.0 or r == 0.0:
                continue
            s = c + r
            f = 1.0
            g = r / 2.0
            while c < g:
                f *= 2.0
                c *= 4.0
            g = r * 2.0
            while c > g:
                f /= 2.0
                c /= 4.0
            if (c + r) / f < 0.95 * s:
                done = False
                d[i] *= f
                b[i, :] /= f
                b[:, i] *= f
    return b, d


def hessenberg(a):
    """Householder reduction ``a = q @ h @ q^H`` with ``h`` upper Hessenberg."""
    h = np.array(a, dtype=complex)
    n = h.shape[0]
    q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        # H <- (I - 2vv^H) H (I - 2vv^H)
        h[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, :])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h, q


def _givens(a, b):
    r = np.hypot(abs(a), abs(b))
    if r == 0.0:
        return np.eye(2, dtype=complex)
    return np.array([[np.conj(a), np.conj(b)], [-b, a]]) / r


def _wilkinson_shift(a, b, c, d):
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    mid = 0.5 * (a + d)
    mu1, mu2 = mid + disc, mid - disc
    return mu1 if abs(mu1 - d) < abs(mu2 - d) else mu2


def schur(h, q=None, max_iter=None):
    """Complex Schur form of an upper Hessenberg matrix by shifted QR.

    Returns ``(t, q)`` with ``t`` upper triangular and ``h_in = q t q^H`` (or
    ``q_in h_in q_in^H = q t q^H`` when ``q`` is passed in).  Exceptional
    shifts are taken after every 10 iterations without deflation.
    """
    t = np.array(h, dtype=complex)
    n = t.shape[0]
    q = np.eye(n, dtype=complex) if q is None else np.array(q, dtype=complex)
    max_iter = 30 * n if max_iter is None else max_iter
    scale = np.abs(t).max(initial=0.0)
    total = 0
    stalled = 0
    hi = n - 1
    while hi > 0:
        lo = hi
        while lo > 0:
            s = abs(t[lo, lo]) + abs(t[lo - 1, lo - 1])
            if s == 0.0:
                s = scale
            if abs(t[lo, lo - 1]) <= _ULP * s or abs(t[lo, lo - 1]) < _TINY:
                t[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            stalled = 0
            continue
        total += 1
        stalled += 1
        if total > max_iter:
            raise SolverError(
                f"QR iteration did not converge within {max_iter} iterations",
                schur=t, q=q, unconverged=hi + 1,
            )
        if stalled % 10 == 0:
            mu = t[hi, hi] + 0.75 * abs(t[hi, hi - 1])
        else:
            mu = _wilkinson_shift(t[hi - 1, hi - 1], t[hi - 1, hi], t[hi, hi - 1], t[hi, hi])
        idx = np.arange(lo, hi + 1)
        t[idx, idx] -= mu
        rotations = []
        for k in range(lo, hi):
            g = _givens(t[k, k], t[k + 1, k])
            t[k:k + 2, k:] = g @ t[k:k + 2, k:]
            t[k + 1, k] = 0.0
            rotations.append(g)
        for k, g in zip(range(lo, hi), rotations):
            top = min(k + 2, hi) + 1
            t[:top, k:k + 2] = t[:top, k:k + 2] @ g.conj().T
            q[:, k:k + 2] = q[:, k:k + 2] @ g.conj().T
        t[idx, idx] += mu
    return np.triu(t), q


def triangular_eigenvectors(t):
    """Right eigenvectors of an upper triangular matrix, one per column."""
    n = t.shape[0]
    x = np.zeros((n, n), dtype=complex)
    tnorm = np.abs(t).max(initial=0.0)
    for k in range(n):
        lam = t[k, k]
        smin = max(_ULP * abs(lam), _ULP * tnorm, _TINY)
        x[k, k] = 1.0
        for i in range(k - 1, -1, -1):
            denom = t[i, i] - lam
            if abs(denom) < smin:
                # perturb exactly-degenerate pivots, as xTREVC does
                denom = smin
            x[i, k] = -(t[i, i + 1:k + 1] @ x[i + 1:k + 1, k]) / denom
        x[:, k] /= np.linalg.norm(x[:, k])
    return x


def qr_eig(h, balanced=True):
    """Eigenvalues and right eigenvectors via the pure-numpy QR route."""
    h = _as_square(h)
    d = np.ones(h.shape[0])
    a = h
    if balanced:
        a, d = balance(h)
    hess, q = hessenberg(a)
    t, z = schur(hess, q)
    vectors = d[:, None] * (z @ triangular_eigenvectors(t))
    return np.diag(t).copy(), vectors


# --------------------------------------------------------------------------
# public API


def eigenvalues(h, method="lapack"):
    """Eigenvalues only (no vectors, no residual); the fast path for scans."""
    h = _as_square(h)
    if method == "lapack":
        return np.linalg.eigvals(h)
    if method == "qr":
        a, _ = balance(h)
        hess, _ = hessenberg(a)
        t, _ = schur(hess)
        return np.diag(t).copy()
    raise ParameterError(f"unknown eigensolver method {method!r}")


def eigendecompose(h, tol=DEFAULT_TOL, method="lapack"):
    """Full eigendecomposition with a checked residual.

    Parameters
    ----------
    h : array_like, shape (n, n)
    tol : float
        Upper bound on the relative residual ``max_k |h v_k - l_k v_k| / |h|_F``.
    method : {"lapack", "qr"}

    Returns
    -------
    EigenSystem
        Sorted by (Re, Im) ascending, columns Euclidean-normalized.

    Raises
    ------
    ParameterError
        Non-square or non-finite input, or ``tol <= 0``.
    SolverError
        Non-convergence, or residual above ``tol``.
    """
    h = _as_square(h)
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol!r}")
    if method == "lapack":
        try:
            values, vectors = np.linalg.eig(h)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"LAPACK eig failed: {exc}") from exc
    elif method == "qr":
        values, vectors = qr_eig(h)
    else:
        raise ParameterError(f"unknown eigensolver method {method!r}")
    vectors = vectors / np.linalg.norm(vectors, axis=0)
    order = sort_order(values)
    values, vectors = values[order], vectors[:, order]
    res = residual(h, values, vectors)
    if not res <= tol:
        raise SolverError(f"eigen residual {res:.3e} exceeds tolerance {tol:.1e}",
                          values=values, vectors=vectors, residual=res)
    return EigenSystem(values=values, vectors=vectors, max_residual=res)


def classify_spectrum(values, eps=1e-8, match_tol=None):
    """Count real eigenvalues and complex-conjugate pairs.

    Complex values (``|Im| > eps``) are paired greedily with the nearest
    conjugate among the remaining complex values.  Leftovers whose imaginary
    part is at most ``match_tol`` are the cube-root style splitting of a
    numerically perturbed higher-order exceptional point and are counted as
    real; any other leftover, or a best partner further than ``match_tol``,
    raises :class:`ConsistencyError`.

    ``match_tol`` defaults to ``sqrt(eps) * max(1, max|values|)``.
    """
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps!r}")
    values = np.asarray(values, dtype=complex).ravel()
    if values.size == 0:
        return SpectrumClass(0, 0, 0.0)
    if match_tol is None:
        match_tol = np.sqrt(eps) * max(1.0, float(np.abs(values).max()))
    max_imag = float(values.imag.max())
    real_mask = np.abs(values.imag) <= eps
    real_count = int(real_mask.sum())
    pending = list(values[~real_mask][np.argsort(-np.abs(values[~real_mask].imag), kind="stable")])
    pairs = 0
    while pending:
        lam = pending.pop(0)
        if pending:
            dist = np.abs(np.conj(np.array(pending)) - lam)
            j = int(np.argmin(dist))
            if dist[j] <= match_tol:
                pending.pop(j)
                pairs += 1
                continue
        if abs(lam.imag) <= match_tol:
            real_count += 1
            continue
        raise ConsistencyError(
            f"complex eigenvalue {lam:.6g} has no conjugate partner within {match_tol:.1e}"
        )
    return SpectrumClass(real_count=real_count, pair_count=pairs, max_imag=max_imag)
