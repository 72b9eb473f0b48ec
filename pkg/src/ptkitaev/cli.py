"""
Command-line front end.

Every run writes its result files plus a ``<stem>.run.json`` sidecar into
``--out``.  The sidecar records the argv and the resolved configuration;
``ptkitaev replay SIDECAR`` re-executes it.  Human-readable output is in units
of J, files hold absolute values with J in their metadata.

Exit codes: 0 success, 1 parameter or I/O error, 2 numerical failure.
"""

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import analytic, eigen, ep, spectral, sweep
from .errors import ConsistencyError, ParameterError, SolverError
from .model import ChainParams, build_hbdg, build_hk

log = logging.getLogger("ptkitaev")

EXIT_OK, EXIT_PARAM, EXIT_NUMERIC = 0, 1, 2
FORMATS = ("csv", "json", "ppm")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunConfig:
    subcommand: str
    argv: list
    params: dict
    out: str
    formats: list
    workers: int
    tolerances: dict
    options: dict = field(default_factory=dict)

    def write(self, path):
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _grid_shape(text):
    try:
        nx, ny = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NxM, got {text!r}") from None
    if nx < 1 or ny < 1:
        raise argparse.ArgumentTypeError(f"grid dimensions must be positive, got {text!r}")
    return nx, ny


def _range(text):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    return lo, hi


def _add_common(p, grid=False):
    p.add_argument("--n", type=int, required=True, help="number of sites N")
    p.add_argument("--j", type=float, default=1.0, help="hopping J (default 1)")
    p.add_argument("--mu", type=float, default=0.0, help="chemical potential")
    p.add_argument("--delta", type=float, default=0.0, help="superconducting order parameter")
    p.add_argument("--gamma", type=float, default=0.0, help="gain-loss strength")
    p.add_argument("--m0", type=int, default=1, help="gain site (loss at N+1-m0)")
    p.add_argument("--gamma-max", type=float, help="threshold search cap (default 4 J)")
    p.add_argument("--tol", type=float, help="bisection tolerance (default 1e-6 J)")
    p.add_argument("--eps", type=float, help="broken-phase |Im E| tolerance (default 1e-8 J)")
    p.add_argument("--workers", type=int, help="worker processes (default $PTKITAEV_WORKERS or 1)")
    p.add_argument("--out", default=".", help="output directory (default .)")
    p.add_argument("--format", choices=FORMATS + ("all",), default="all")
    if grid:
        p.add_argument("--grid", type=_grid_shape, help="NxM: points along x and y")


def build_parser():
    parser = _Parser(prog="ptkitaev", description="PT-symmetric Kitaev chain toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="eigenvalues of H_K")
    _add_common(p)
    p.add_argument("--method", choices=("lapack", "qr"), default="lapack")

    p = sub.add_parser("threshold", help="first PT-breaking gamma and PT-symmetric intervals")
    _add_common(p)
    p.add_argument("--n-scan", type=int, default=spectral.N_SCAN_THRESHOLD)
    p.add_argument("--intervals", action="store_true", help="also list all PT-symmetric intervals")

    p = sub.add_parser("map-m0-delta", help="threshold over gain site and delta")
    _add_common(p, grid=True)
    p.add_argument("--delta-range", type=_range, help="LO:HI (default 0:3J)")
    p.add_argument("--n-scan", type=int, default=spectral.N_SCAN_THRESHOLD)

    p = sub.add_parser("map-mu-delta", help="threshold over mu and delta")
    _add_common(p, grid=True)
    p.add_argument("--delta-range", type=_range, help="LO:HI (default 0:3J)")
    p.add_argument("--mu-range", type=_range, help="LO:HI (default 0:3J)")
    p.add_argument("--n-scan", type=int, default=spectral.N_SCAN_THRESHOLD)
    p.add_argument("--fit-alpha", action="store_true", help="fit the zero-threshold boundary")

    p = sub.add_parser("reentrant-map", help="Lambda (or pair-count) map over delta and gamma")
    _add_common(p, grid=True)
    p.add_argument("--delta-range", type=_range, help="LO:HI (default 0:2J)")
    p.add_argument("--gamma-range", type=_range, help="LO:HI (default 0:4J)")
    p.add_argument("--paircount", action="store_true", help="map conjugate-pair counts instead")

    p = sub.add_parser("ep-order", help="eigenvector-coalescence order at one point")
    _add_common(p)
    p.add_argument("--cutoff", type=float, default=ep.COALESCENCE_CUTOFF)

    p = sub.add_parser("ep-contours", help="EP contours in the (delta, gamma) plane")
    _add_common(p, grid=True)
    p.add_argument("--delta-range", type=_range, help="LO:HI (default 0:2J)")
    p.add_argument("--gamma-range", type=_range, help="LO:HI (default 0:4J)")
    p.add_argument("--cutoff", type=float, default=ep.COALESCENCE_CUTOFF)

    p = sub.add_parser("analytic-check", help="closed forms against diagonalization")
    p.add_argument("--out", default=".", help="output directory (default .)")

    p = sub.add_parser("replay", help="re-run from a .run.json sidecar")
    p.add_argument("sidecar")
    p.add_argument("--out", help="override the recorded output directory")
    return parser


# --------------------------------------------------------------------------


def _params(args):
    return ChainParams(n_sites=args.n, hopping=args.j, onsite=args.mu, sc_order=args.delta,
                       gain_loss=args.gamma, gain_site=args.m0)


def _formats(args):
    return list(FORMATS) if args.format == "all" else [args.format]


def _tolerances(args, params):
    J = params.hopping
    tol = {
        "gamma_max": spectral.GAMMA_MAX * J if args.gamma_max is None else args.gamma_max,
        "tol": spectral.TOL * J if args.tol is None else args.tol,
        "eps": spectral.EPS * J if args.eps is None else args.eps,
    }
    if getattr(args, "cutoff", None) is not None:
        tol["cutoff"] = args.cutoff
    return tol


def _workers(args):
    from .parallel import default_workers
    return default_workers() if args.workers is None else args.workers


def _out_dir(path):
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot create output directory {out}: {exc.strerror}") from exc
    return out


def _write_json(path, doc):
    try:
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=False)
            fh.write("\n")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def _finish(out, stem, config):
    config.write(out / f"{stem}.run.json")
    log.info("wrote %s", out / f"{stem}.run.json")


def _write_grid(grid, out, stem, formats):
    writers = {"csv": sweep.write_csv, "json": sweep.write_json, "ppm": sweep.write_ppm}
    for fmt in formats:
        writers[fmt](grid, out / f"{stem}.{fmt}")
        log.info("wrote %s", out / f"{stem}.{fmt}")


def _axis_range(args, name, default_hi, n):
    rng = getattr(args, f"{name}_range")
    lo, hi = (0.0, default_hi * args.j) if rng is None else rng
    return lo, hi, n


def _grid_counts(args):
    return args.grid if args.grid is not None else (sweep.DEFAULT_POINTS, sweep.DEFAULT_POINTS)


def _config(args, argv, params, extra=None):
    return RunConfig(subcommand=args.command, argv=list(argv), params=params.as_dict(),
                     out=str(args.out), formats=_formats(args), workers=_workers(args),
                     tolerances=_tolerances(args, params), options=extra or {})


def cmd_spectrum(args, argv):
    params = _params(args)
    h = build_hk(params) if params.gain_loss != 0.0 else build_hbdg(params)
    es = eigen.eigendecompose(h, method=args.method)
    J = params.hopping
    print(f"# eigenvalues of H_K in units of J (N={params.n_sites}, dim={es.dim})")
    for v in es.values:
        print(f"{v.real / J: .12g} {v.imag / J: .12g}")
    out = _out_dir(args.out)
    _write_json(out / "spectrum.json", {
        "params": params.as_dict(), "hopping": J, "max_residual": es.max_residual,
        "values": [[float(v.real), float(v.imag)] for v in es.values],
    })
    _finish(out, "spectrum", _config(args, argv, params, {"method": args.method}))


def cmd_threshold(args, argv):
    params = _params(args)
    tols = _tolerances(args, params)
    J = params.hopping
    res = spectral.pt_threshold_first(params, gamma_max=tols["gamma_max"], tol=tols["tol"],
                                      eps=tols["eps"], n_scan=args.n_scan)
    note = " (capped: no breaking below gamma_max)" if res.capped else (
        " (broken at zero gain-loss)" if res.broken_at_zero else "")
    print(f"gamma_th/J = {res.gamma_th / J:.9f}{note}")
    doc = {"params": params.as_dict(), "hopping": J, "gamma_th": res.gamma_th,
           "bracket": [res.bracket[0], None if math.isinf(res.bracket[1]) else res.bracket[1]],
           "capped": res.capped, "broken_at_zero": res.broken_at_zero}
    if args.intervals:
        iv = spectral.pt_intervals(params, gamma_max=tols["gamma_max"], tol=tols["tol"],
                                   eps=tols["eps"])
        for a, b in iv.intervals:
            print(f"PT-symmetric: [{a / J:.9f}, {b / J:.9f}]")
        if iv.reentrant:
            print("re-entrant PT-symmetric phase present")
        doc["intervals"] = [list(i) for i in iv.intervals]
        doc["boundary_points"] = iv.boundary_points
    out = _out_dir(args.out)
    _write_json(out / "threshold.json", doc)
    _finish(out, "threshold", _config(args, argv, params, {"n_scan": args.n_scan,
                                                           "intervals": args.intervals}))


def cmd_map_m0_delta(args, argv):
    params = _params(args)
    tols = _tolerances(args, params)
    nx, _ = _grid_counts(args)
    grid = sweep.threshold_map_m0_delta(params, _axis_range(args, "delta", 3.0, nx),
                                        gamma_max=tols["gamma_max"], tol=tols["tol"],
                                        eps=tols["eps"], n_scan=args.n_scan, workers=_workers(args))
    _report_grid(grid, params)
    out = _out_dir(args.out)
    _write_grid(grid, out, "threshold_m0_delta", _formats(args))
    _finish(out, "threshold_m0_delta", _config(args, argv, params, {"n_scan": args.n_scan}))
    return grid


def cmd_map_mu_delta(args, argv):
    params = _params(args)
    tols = _tolerances(args, params)
    nx, ny = _grid_counts(args)
    grid = sweep.threshold_map_mu_delta(params, _axis_range(args, "mu", 3.0, ny),
                                        _axis_range(args, "delta", 3.0, nx),
                                        gamma_max=tols["gamma_max"], tol=tols["tol"],
                                        eps=tols["eps"], n_scan=args.n_scan, workers=_workers(args))
    _report_grid(grid, params)
    if args.fit_alpha:
        fit = sweep.fit_zero_threshold_alpha(grid)
        print(f"zero-threshold boundary: alpha = {fit.alpha:.4f} from {len(fit.mu)} rows")
    out = _out_dir(args.out)
    _write_grid(grid, out, "threshold_mu_delta", _formats(args))
    _finish(out, "threshold_mu_delta", _config(args, argv, params, {"n_scan": args.n_scan,
                                                                    "fit_alpha": args.fit_alpha}))
    return grid


def cmd_reentrant_map(args, argv):
    params = _params(args)
    nx, ny = _grid_counts(args)
    drange = _axis_range(args, "delta", 2.0, nx)
    grange = _axis_range(args, "gamma", 4.0, ny)
    if args.paircount:
        grid = sweep.paircount_map(params, drange, grange, imag_eps=_tolerances(args, params)["eps"],
                                   workers=_workers(args))
        stem = "paircount_delta_gamma"
    else:
        grid = sweep.lambda_map(params, drange, grange, workers=_workers(args))
        stem = "lambda_delta_gamma"
    _report_grid(grid, params)
    out = _out_dir(args.out)
    _write_grid(grid, out, stem, _formats(args))
    _finish(out, stem, _config(args, argv, params, {"paircount": args.paircount}))
    return grid


def cmd_ep_order(args, argv):
    params = _params(args)
    rep = ep.ep_order(params, cutoff=args.cutoff)
    print(f"estimated EP order = {rep.estimated_order}")
    print(f"max overlap row sum = {rep.overlap_max_rowsum:.6f}")
    J = params.hopping
    for i in rep.coalescing_indices:
        v = rep.values[i]
        print(f"  E/J = {v.real / J: .9f} {v.imag / J:+.9f}i")
    out = _out_dir(args.out)
    _write_json(out / "ep_order.json", {
        "params": params.as_dict(), "hopping": J, "estimated_order": rep.estimated_order,
        "overlap_max_rowsum": rep.overlap_max_rowsum, "coalescing_indices": rep.coalescing_indices,
    })
    _finish(out, "ep_order", _config(args, argv, params))


def cmd_ep_contours(args, argv):
    params = _params(args)
    tols = _tolerances(args, params)
    nx, ny = _grid_counts(args)
    points = ep.ep_contours(params, _axis_range(args, "delta", 2.0, nx),
                            _axis_range(args, "gamma", 4.0, ny), eps=tols["tol"],
                            imag_eps=tols["eps"], cutoff=args.cutoff, workers=_workers(args))
    J = params.hopping
    print(f"{len(points)} contour points")
    out = _out_dir(args.out)
    formats = _formats(args)
    rows = [asdict(p) for p in points]
    if "csv" in formats:
        lines = [f"# hopping={J!r} params={json.dumps(params.as_dict(), sort_keys=True)}",
                 "delta,gamma,count_low,count_high,rowsum,axis"]
        lines += [f"{p.delta!r},{p.gamma!r},{p.count_low},{p.count_high},{p.rowsum!r},{p.axis}"
                  for p in points]
        path = out / "ep_contours.csv"
        try:
            path.write_text("\n".join(lines) + "\n")
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc
    if "json" in formats:
        _write_json(out / "ep_contours.json", {"params": params.as_dict(), "hopping": J,
                                               "points": rows})
    if "ppm" in formats:
        log.info("ep-contours is a point cloud; no PPM written")
    _finish(out, "ep_contours", _config(args, argv, params))


def cmd_analytic_check(args, argv):
    results = analytic.validation_report()
    results.append(_closed_form_landmarks())
    width = max(len(r.name) for r in results)
    print(f"{'check':<{width}}  verdict  error      tolerance")
    for r in results:
        print(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<7}  {r.error:.3e}  {r.tolerance:.1e}")
    out = _out_dir(args.out)
    _write_json(out / "analytic_check.json", {"results": [asdict(r) for r in results]})
    RunConfig(subcommand=args.command, argv=list(argv), params={}, out=str(args.out), formats=["json"],
              workers=1, tolerances={}).write(out / "analytic_check.run.json")
    failed = [r for r in results if not r.passed and "uncorrected" not in r.name]
    if failed:
        raise ConsistencyError(f"{len(failed)} validated closed form(s) disagree with diagonalization")


def _closed_form_landmarks():
    expected = math.sqrt(4.0 - 2.0 * math.sqrt(3.0))
    err = abs(analytic.n5_threshold_m2(1.0, 0.0) - expected)
    return analytic.CheckResult("threshold m0=2 at delta=0 vs sqrt(4-2 sqrt3)", err <= 1e-12, err,
                                1e-12)


def _report_grid(grid, params):
    J = params.hopping
    finite = grid.cells[np.isfinite(grid.cells)]
    counts = {sweep.FLAG_NAMES[f]: int((grid.flags == f).sum()) for f in sweep.FLAG_NAMES}
    summary = ", ".join(f"{k}={v}" for k, v in counts.items() if v)
    if grid.kind == "threshold" and finite.size:
        print(f"{grid.kind} map {grid.y.n}x{grid.x.n}: gamma_th/J in "
              f"[{finite.min() / J:.6f}, {finite.max() / J:.6f}]; {summary}")
    elif finite.size:
        print(f"{grid.kind} map {grid.y.n}x{grid.x.n}: values in "
              f"[{finite.min():.6f}, {finite.max():.6f}]; {summary}")


COMMANDS = {
    "spectrum": cmd_spectrum,
    "threshold": cmd_threshold,
    "map-m0-delta": cmd_map_m0_delta,
    "map-mu-delta": cmd_map_mu_delta,
    "reentrant-map": cmd_reentrant_map,
    "ep-order": cmd_ep_order,
    "ep-contours": cmd_ep_contours,
    "analytic-check": cmd_analytic_check,
}


def _replay_argv(args):
    with open(args.sidecar) as fh:
        recorded = json.load(fh)
    argv = list(recorded["argv"])
    if args.out is not None:
        argv += ["--out", args.out]
    return argv


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "replay":
            argv = _replay_argv(args)
            args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_PARAM
    except (OSError, ValueError, KeyError) as exc:
        print(f"ptkitaev: cannot replay: {exc}", file=sys.stderr)
        return EXIT_PARAM
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args, argv)
    except (SolverError, ConsistencyError) as exc:
        print(f"ptkitaev: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParameterError, ValueError, OSError) as exc:
        print(f"ptkitaev: {exc}", file=sys.stderr)
        return EXIT_PARAM
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
