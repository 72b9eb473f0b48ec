"""
Parameter-grid sweeps and their serialization.

Every cell is an independent task over a frozen ``ChainParams`` base; results
are placed by index, so grids are identical for any worker count.  Cells carry
a flag next to their value:

======  =========  ==========================================================
flag    name       meaning
======  =========  ==========================================================
0       OK         ordinary value
1       CAPPED     no PT breaking below ``gamma_max`` (value = gamma_max)
2       ZERO       broken at vanishing gain-loss (value = 0)
3       FLOOR      PT-symmetric cell of a Lambda map (value = floor)
4       ERROR      evaluation failed (value = NaN)
======  =========  ==========================================================
"""

import json
import math
from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from . import spectral
from .ep import pair_count
from .errors import ParameterError, PtKitaevError
from .parallel import ordered_map

SCHEMA = "ptkitaev.phasegrid/1"
DEFAULT_POINTS = 101

OK, CAPPED, ZERO, FLOOR, ERROR = range(5)
FLAG_NAMES = {OK: "ok", CAPPED: "capped", ZERO: "zero", FLOOR: "floor", ERROR: "error"}
_RED_FLAGS = (CAPPED, ERROR)

# x/y axis names -> ChainParams field
_FIELDS = {"delta": "sc_order", "mu": "onsite", "gamma": "gain_loss", "m0": "gain_site"}


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"axis {self.name!r} needs at least one point")

    @property
    def values(self):
        return np.linspace(self.lo, self.hi, self.n)

    def as_dict(self):
        return {"name": self.name, "lo": self.lo, "hi": self.hi, "n": self.n}


@dataclass
class PhaseGrid:
    """One scalar per (y, x) cell; ``cells`` and ``flags`` have shape ``(y.n, x.n)``."""

    x: Axis
    y: Axis
    cells: np.ndarray
    flags: np.ndarray
    kind: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=float)
        self.flags = np.asarray(self.flags, dtype=np.int8)
        shape = (self.y.n, self.x.n)
        if self.cells.shape != shape or self.flags.shape != shape:
            raise ParameterError(f"cells {self.cells.shape} / flags {self.flags.shape} "
                                 f"do not match axes {shape}")

    def __eq__(self, other):
        if not isinstance(other, PhaseGrid):
            return NotImplemented
        return (self.x == other.x and self.y == other.y and self.kind == other.kind
                and self.meta == other.meta
                and np.array_equal(self.cells, other.cells, equal_nan=True)
                and np.array_equal(self.flags, other.flags))


# --------------------------------------------------------------------------
# cell evaluators (module level so they pickle)


def _cell_params(params_base, overrides):
    kw = {_FIELDS[k]: (int(round(v)) if k == "m0" else float(v)) for k, v in overrides.items()}
    return replace(params_base, **kw)


def _threshold_cell(overrides, params_base, gamma_max, tol, eps, n_scan):
    try:
        res = spectral.pt_threshold_first(_cell_params(params_base, overrides),
                                          gamma_max=gamma_max, tol=tol, eps=eps, n_scan=n_scan)
    except PtKitaevError:
        return math.nan, ERROR
    if res.capped:
        return res.gamma_th, CAPPED
    if res.broken_at_zero:
        return res.gamma_th, ZERO
    return res.gamma_th, OK


def _lambda_cell(overrides, params_base, floor):
    try:
        value = spectral.lambda_value(_cell_params(params_base, overrides), floor=floor)
    except PtKitaevError:
        return math.nan, ERROR
    return value, FLOOR if value == floor else OK


def _paircount_cell(overrides, params_base, imag_eps):
    try:
        return float(pair_count(_cell_params(params_base, overrides), imag_eps)), OK
    except PtKitaevError:
        return math.nan, ERROR


def run_grid(x, y, evaluator, kind, meta, workers=None):
    """Evaluate ``evaluator({x.name: xv, y.name: yv})`` on every cell."""
    points = [{x.name: float(xv), y.name: float(yv)} for yv in y.values for xv in x.values]
    results = ordered_map(evaluator, points, workers)
    cells = np.array([r[0] for r in results], dtype=float).reshape(y.n, x.n)
    flags = np.array([r[1] for r in results], dtype=np.int8).reshape(y.n, x.n)
    return PhaseGrid(x=x, y=y, cells=cells, flags=flags, kind=kind, meta=meta)


def _axis(name, rng):
    lo, hi, n = rng
    return Axis(name, float(lo), float(hi), int(n))


def _threshold_meta(params_base, gamma_max, tol, eps, n_scan):
    J = params_base.hopping
    return {
        "params": params_base.as_dict(),
        "hopping": J,
        "gamma_max": spectral.GAMMA_MAX * J if gamma_max is None else gamma_max,
        "tol": spectral.TOL * J if tol is None else tol,
        "eps": spectral.EPS * J if eps is None else eps,
        "n_scan": n_scan,
    }


def threshold_map_m0_delta(params_base, delta_range=None, gamma_max=None, tol=None, eps=None,
                           n_scan=spectral.N_SCAN_THRESHOLD, workers=None):
    """First-breaking threshold over gain site m0 (y) and delta (x).

    The m0 axis is every integer in ``[1, floor(N/2)]``.  ``delta_range`` is
    ``(lo, hi, n)`` in absolute energy units, default ``(0, 3J, 101)``.
    """
    J = params_base.hopping
    half = params_base.n_sites // 2
    if half < 1:
        raise ParameterError("threshold maps need n_sites >= 2")
    delta_range = (0.0, 3.0 * J, DEFAULT_POINTS) if delta_range is None else delta_range
    meta = _threshold_meta(params_base, gamma_max, tol, eps, n_scan)
    evaluator = partial(_threshold_cell, params_base=params_base, gamma_max=meta["gamma_max"],
                        tol=meta["tol"], eps=meta["eps"], n_scan=n_scan)
    return run_grid(_axis("delta", delta_range), Axis("m0", 1.0, float(half), half),
                    evaluator, "threshold", meta, workers)


def threshold_map_mu_delta(params_base, mu_range=None, delta_range=None, gamma_max=None, tol=None,
                           eps=None, n_scan=spectral.N_SCAN_THRESHOLD, workers=None):
    """First-breaking threshold over mu (y) and delta (x) at fixed m0."""
    J = params_base.hopping
    mu_range = (0.0, 3.0 * J, DEFAULT_POINTS) if mu_range is None else mu_range
    delta_range = (0.0, 3.0 * J, DEFAULT_POINTS) if delta_range is None else delta_range
    meta = _threshold_meta(params_base, gamma_max, tol, eps, n_scan)
    evaluator = partial(_threshold_cell, params_base=params_base, gamma_max=meta["gamma_max"],
                        tol=meta["tol"], eps=meta["eps"], n_scan=n_scan)
    return run_grid(_axis("delta", delta_range), _axis("mu", mu_range), evaluator, "threshold",
                    meta, workers)


def lambda_map(params_base, delta_range=None, gamma_range=None, floor=spectral.LAMBDA_FLOOR,
               workers=None):
    """Lambda = log10 max Im E / J over delta (x) and gamma (y)."""
    J = params_base.hopping
    delta_range = (0.0, 2.0 * J, DEFAULT_POINTS) if delta_range is None else delta_range
    gamma_range = (0.0, 4.0 * J, DEFAULT_POINTS) if gamma_range is None else gamma_range
    meta = {"params": params_base.as_dict(), "hopping": J, "floor": floor}
    evaluator = partial(_lambda_cell, params_base=params_base, floor=floor)
    return run_grid(_axis("delta", delta_range), _axis("gamma", gamma_range), evaluator, "lambda",
                    meta, workers)


def paircount_map(params_base, delta_range=None, gamma_range=None, imag_eps=None, workers=None):
    """Number of complex-conjugate eigenvalue pairs over delta (x) and gamma (y)."""
    J = params_base.hopping
    delta_range = (0.0, 2.0 * J, DEFAULT_POINTS) if delta_range is None else delta_range
    gamma_range = (0.0, 4.0 * J, DEFAULT_POINTS) if gamma_range is None else gamma_range
    imag_eps = spectral.EPS * J if imag_eps is None else imag_eps
    meta = {"params": params_base.as_dict(), "hopping": J, "eps": imag_eps}
    evaluator = partial(_paircount_cell, params_base=params_base, imag_eps=imag_eps)
    return run_grid(_axis("delta", delta_range), _axis("gamma", gamma_range), evaluator,
                    "ep_paircount", meta, workers)


# --------------------------------------------------------------------------
# zero-threshold boundary fit


@dataclass(frozen=True)
class AlphaFit:
    alpha: float
    mu: np.ndarray
    delta0: np.ndarray
    max_deviation: float


def _downward_crossing(deltas, row, level):
    """Largest-delta point where ``row`` falls through ``level`` as delta grows."""
    for j in range(len(deltas) - 1, 0, -1):
        if row[j - 1] >= level > row[j]:
            x0, x1, y0, y1 = deltas[j - 1], deltas[j], row[j - 1], row[j]
            return x0 + (level - y0) * (x1 - x0) / (y1 - y0)
    return None


def fit_zero_threshold_alpha(grid, levels=(0.05, 0.15)):
    """Fit ``alpha mu J = delta^2 - J^2`` to the edge of the zero-threshold region.

    For every ``mu > 0`` row of a (mu, delta) threshold map, the flank where
    the threshold falls towards zero with growing delta is located at two
    heights ``levels`` (units of J) and extrapolated linearly to zero
    threshold, giving ``delta0(mu)``.  ``alpha`` is then the least-squares
    slope through the origin of ``(delta0^2 - J^2) / J`` against ``mu``.
    Finite-size thresholds inside the region are small but nonzero, which is
    why the boundary is extrapolated rather than cut at a fixed level.
    """
    if grid.x.name != "delta" or grid.y.name != "mu":
        raise ParameterError("alpha fit needs a threshold map with x=delta, y=mu")
    J = grid.meta["hopping"]
    deltas = grid.x.values
    lo_level, hi_level = sorted(levels)
    mus, d0s = [], []
    for mu, row in zip(grid.y.values, grid.cells):
        if mu <= 0:
            continue
        row = np.where(np.isfinite(row), row, 0.0) / J
        a = _downward_crossing(deltas, row, lo_level)
        b = _downward_crossing(deltas, row, hi_level)
        if a is None or b is None:
            continue
        mus.append(mu)
        d0s.append(a - lo_level * (b - a) / (hi_level - lo_level))
    if not mus:
        raise ParameterError("no rows with a zero-threshold edge inside the map")
    mus, d0s = np.array(mus), np.array(d0s)
    y = (d0s ** 2 - J * J) / J
    alpha = float(mus @ y / (mus @ mus))
    return AlphaFit(alpha=alpha, mu=mus, delta0=d0s,
                    max_deviation=float(np.abs(y - alpha * mus).max()))


# --------------------------------------------------------------------------
# serialization


def _header(grid):
    sparse = [[int(j), int(i), int(grid.flags[j, i])] for j, i in zip(*np.nonzero(grid.flags))]
    return {"schema": SCHEMA, "kind": grid.kind, "x": grid.x.as_dict(), "y": grid.y.as_dict(),
            "meta": grid.meta, "flags": sparse}


def _open_for_write(path, mode):
    try:
        return open(path, mode)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write grid to {path}: {exc.strerror}") from exc


def write_csv(grid, path):
    """``# x=<name> y=<name> <json meta>`` header, then one row per y value."""
    head = json.dumps(_header(grid), sort_keys=True, separators=(",", ":"))
    lines = [f"# x={grid.x.name} y={grid.y.name} {head}"]
    for row in grid.cells:
        lines.append(",".join(repr(float(v)) for v in row))
    with _open_for_write(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path):
    with open(path) as fh:
        first = fh.readline()
        rows = [line.strip() for line in fh if line.strip()]
    if not first.startswith("# x="):
        raise ParameterError(f"{path}: missing grid header")
    head = json.loads(first[first.index("{"):])
    return _from_header(head, [[float(v) for v in r.split(",")] for r in rows])


def _from_header(head, cells):
    if head.get("schema") != SCHEMA:
        raise ParameterError(f"unsupported grid schema {head.get('schema')!r}")
    x, y = Axis(**head["x"]), Axis(**head["y"])
    flags = np.zeros((y.n, x.n), dtype=np.int8)
    for j, i, f in head["flags"]:
        flags[j, i] = f
    return PhaseGrid(x=x, y=y, cells=np.array(cells, dtype=float), flags=flags,
                     kind=head["kind"], meta=head["meta"])


def write_json(grid, path):
    doc = _header(grid)
    doc["cells"] = [[None if math.isnan(v) else float(v) for v in row] for row in grid.cells]
    with _open_for_write(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, allow_nan=False)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        doc = json.load(fh)
    cells = [[math.nan if v is None else v for v in row] for row in doc["cells"]]
    return _from_header(doc, cells)


def to_rgb(grid):
    """``(ny, nx, 3)`` uint8 image, row 0 = highest y.

    Linear black -> white over the finite non-sentinel cells; capped and
    failed cells are red.  Floor cells of Lambda maps are ordinary minima and
    therefore black.
    """
    red = np.isin(grid.flags, _RED_FLAGS) | ~np.isfinite(grid.cells)
    finite = grid.cells[~red]
    rgb = np.zeros(grid.cells.shape + (3,), dtype=np.uint8)
    if finite.size:
        lo, hi = float(finite.min()), float(finite.max())
        span = hi - lo
        scaled = np.zeros_like(grid.cells) if span == 0 else (grid.cells - lo) / span
        gray = np.rint(255.0 * np.clip(np.where(red, 0.0, scaled), 0.0, 1.0)).astype(np.uint8)
        rgb[...] = gray[..., None]
    rgb[red] = (255, 0, 0)
    return rgb[::-1]


def write_ppm(grid, path):
    """Binary P6 heat map, one pixel per cell."""
    rgb = to_rgb(grid)
    header = f"P6\n{grid.x.n} {grid.y.n}\n255\n".encode("ascii")
    with _open_for_write(path, "wb") as fh:
        fh.write(header + rgb.tobytes())


def read_ppm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ParameterError(f"{path}: not a binary PPM")
    nx, ny = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(ny, nx, 3)
