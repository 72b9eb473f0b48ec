"""
Bogoliubov-de Gennes matrices of a finite Kitaev chain with one balanced
gain-loss pair.

Basis ordering is site-major with (particle, hole) inside each site, i.e. the
row index of site ``n`` (1-based) and component ``s`` (0 = particle, 1 = hole)
is ``2*(n-1) + s``.  All matrices are dense ``complex128`` arrays of shape
``(2N, 2N)``.
"""

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class Boundary(enum.Enum):
    OPEN = "open"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class ChainParams:
    """Physical parameters of the chain.

    Energies are absolute; ``hopping`` (J) sets the scale in which all
    human-readable output is reported.

    Parameters
    ----------
    n_sites : int
        Number of lattice sites N.
    hopping : float
        Nearest-neighbour hopping J > 0.
    onsite : float
        On-site potential mu.
    sc_order : float
        p-wave order parameter delta (either sign accepted).
    gain_loss : float
        Gain-loss strength gamma >= 0.
    gain_site : int
        1-based gain site m0; the loss sits on ``N + 1 - m0``.  Only checked
        where the gain-loss term is actually built.
    boundary : Boundary
    """

    n_sites: int
    hopping: float = 1.0
    onsite: float = 0.0
    sc_order: float = 0.0
    gain_loss: float = 0.0
    gain_site: int = 1
    boundary: Boundary = Boundary.OPEN

    def __post_init__(self):
        if isinstance(self.boundary, str):
            object.__setattr__(self, "boundary", Boundary(self.boundary))
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ParameterError(f"n_sites must be a positive integer, got {self.n_sites!r}")
        object.__setattr__(self, "n_sites", int(self.n_sites))
        for name in ("hopping", "onsite", "sc_order", "gain_loss"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if not self.hopping > 0:
            raise ParameterError(f"hopping must be positive, got {self.hopping!r}")
        if self.gain_loss < 0:
            raise ParameterError(f"gain_loss must be non-negative, got {self.gain_loss!r}")

    @property
    def loss_site(self):
        return self.n_sites + 1 - self.gain_site

    @property
    def dim(self):
        return 2 * self.n_sites

    def with_gamma(self, gamma):
        return replace(self, gain_loss=float(gamma))

    def scaled(self, factor):
        """Return a copy with every energy multiplied by ``factor``."""
        return replace(
            self,
            hopping=self.hopping * factor,
            onsite=self.onsite * factor,
            sc_order=self.sc_order * factor,
            gain_loss=self.gain_loss * factor,
        )

    def as_dict(self):
        return {
            "n_sites": self.n_sites,
            "hopping": self.hopping,
            "onsite": self.onsite,
            "sc_order": self.sc_order,
            "gain_loss": self.gain_loss,
            "gain_site": self.gain_site,
            "boundary": self.boundary.value,
        }


def validate_gain_site(params):
    half = params.n_sites // 2
    if not 1 <= params.gain_site <= half:
        raise ParameterError(
            f"gain_site must lie in [1, {half}] for n_sites={params.n_sites}, "
            f"got {params.gain_site}"
        )


def _block(h, row_site, col_site, block):
    # sites are 0-based here
    h[2 * row_site:2 * row_site + 2, 2 * col_site:2 * col_site + 2] += block


def build_hbdg(params):
    """Hermitian BdG matrix of the chain without gain and loss.

    On-site blocks are ``-(mu/2) sz``; every bond (n, n+1) carries
    ``-(J/2) sz + (i delta/2) sx`` on ``|n><n+1|`` and its Hermitian conjugate
    ``-(J/2) sz - (i delta/2) sx`` on ``|n+1><n|``.  For periodic chains the
    bond (N, 1) is added with the same couplings.
    """
    n = params.n_sites
    if params.boundary is Boundary.PERIODIC and n < 3:
        raise ParameterError("periodic boundary needs n_sites >= 3")
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    onsite = -0.5 * params.onsite * SIGMA_Z
    forward = -0.5 * params.hopping * SIGMA_Z + 0.5j * params.sc_order * SIGMA_X
    backward = forward.conj().T
    for site in range(n):
        _block(h, site, site, onsite)
    bonds = [(site, site + 1) for site in range(n - 1)]
    if params.boundary is Boundary.PERIODIC:
        bonds.append((n - 1, 0))
    for a, b in bonds:
        _block(h, a, b, forward)
        _block(h, b, a, backward)
    return h


def build_hbdg_periodic(params):
    return build_hbdg(replace(params, boundary=Boundary.PERIODIC))


def build_gain_loss(params):
    """Anti-Hermitian gain-loss matrix ``(i gamma/2)(|m0><m0| - |m0'><m0'|) x sz``."""
    validate_gain_site(params)
    n = params.n_sites
    g = np.zeros((2 * n, 2 * n), dtype=complex)
    term = 0.5j * params.gain_loss * SIGMA_Z
    _block(g, params.gain_site - 1, params.gain_site - 1, term)
    _block(g, params.loss_site - 1, params.loss_site - 1, -term)
    return g


def build_hk(params):
    """Non-Hermitian PT-symmetric Hamiltonian ``H_BdG + i Gamma``."""
    return build_hbdg(params) + build_gain_loss(params)


def gain_loss_direction(params):
    """Diagonal of ``build_gain_loss`` at unit gamma.

    ``build_hk(params.with_gamma(g))`` equals
    ``build_hbdg(params) + g * np.diag(gain_loss_direction(params))``, which
    lets gamma scans reuse a single Hermitian matrix.
    """
    return np.diag(build_gain_loss(params.with_gamma(1.0))).copy()


def _cos_sin(p):
    """cos and sin, exact at multiples of pi/2 so band touchings land on 0.0."""
    quarter = 2.0 * p / math.pi
    if quarter == round(quarter):
        return ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))[int(round(quarter)) % 4]
    return math.cos(p), math.sin(p)


def bulk_dispersion(p, params):
    """Return ``(E_-(p), E_+(p))`` of the infinite Hermitian chain."""
    c, s = _cos_sin(p)
    e = math.hypot(params.hopping * c + 0.5 * params.onsite, params.sc_order * s)
    return -e, e


def periodic_momenta(n_sites):
    return 2 * np.pi * np.arange(1, n_sites + 1) / n_sites


@dataclass(frozen=True)
class SymmetryOps:
    parity: np.ndarray
    chiral_s: np.ndarray


def symmetry_ops(n_sites):
    """Site-mirror parity ``P`` and chiral operator ``S = 1_N x sz``."""
    mirror = np.fliplr(np.eye(n_sites))
    parity = np.kron(mirror, np.eye(2)).astype(complex)
    chiral = np.kron(np.eye(n_sites), SIGMA_Z)
    return SymmetryOps(parity=parity, chiral_s=chiral)


def check_pt_symmetry(h, ops, which="parity"):
    """Max-abs entry of ``O conj(h) O - h`` for ``O`` = parity or chiral_s.

    Zero certifies that ``h`` commutes with the antiunitary ``O T``.
    """
    h = np.asarray(h)
    op = getattr(ops, which)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ParameterError(f"expected a square matrix, got shape {h.shape}")
    if h.shape != op.shape:
        raise ParameterError(f"matrix shape {h.shape} does not match operator shape {op.shape}")
    return float(np.max(np.abs(op @ h.conj() @ op - h), initial=0.0))
