"""
Acceptance suite: one test per criterion, each printing a PASS/FAIL line
(visible even under output capture) before asserting.
"""

import math
import time

import numpy as np
import pytest

from ptkitaev import analytic, ep, sweep
from ptkitaev.eigen import eigendecompose
from ptkitaev.model import (
    ChainParams,
    build_hbdg,
    build_hk,
    bulk_dispersion,
    check_pt_symmetry,
    periodic_momenta,
    symmetry_ops,
)
from ptkitaev.spectral import pt_intervals, pt_threshold_first

J = 1.0


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail, elapsed=None, budget=None):
        if budget is not None:
            ok = ok and elapsed < budget
            detail = f"{detail}; {elapsed:.2f} s (budget {budget:g} s)"
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, detail
    return emit


def threshold(**kw):
    return pt_threshold_first(ChainParams(**kw)).gamma_th


def test_01_dimer_threshold(report):
    t0 = time.perf_counter()
    g = threshold(n_sites=2, hopping=J)
    err = abs(g - J)
    report(1, "dimer threshold", err <= 1e-6 * J, f"gamma_th = {g:.9f} J, error {err:.1e}",
           time.perf_counter() - t0, 1.0)


def test_02_flat_band_spectrum(report):
    t0 = time.perf_counter()
    values = eigendecompose(build_hbdg(ChainParams(20, sc_order=J))).values
    expected = np.array([-J] * 19 + [0.0, 0.0] + [J] * 19)
    err = float(np.abs(np.sort(values.real) - expected).max() + np.abs(values.imag).max())
    report(2, "flat bands at delta = J", err <= 1e-8 * J, f"max deviation {err:.1e}",
           time.perf_counter() - t0, 1.0)


def test_03_bulk_gap_closing(report):
    t0 = time.perf_counter()
    exact = all(bulk_dispersion(math.pi, ChainParams(4, onsite=2 * J, sc_order=d)) == (0.0, 0.0)
                for d in (0.0, 0.3, 1.0, 2.7))
    worst = 0.0
    for mu, d in ((0.0, 0.0), (0.7, 1.3), (2.0, 0.5), (-1.5, 2.0)):
        params = ChainParams(40, onsite=mu, sc_order=d, boundary="periodic")
        numeric = np.linalg.eigvalsh(build_hbdg(params))
        bands = np.sort([e for p in periodic_momenta(40) for e in bulk_dispersion(p, params)])
        worst = max(worst, float(np.abs(numeric - bands).max()))
    report(3, "gap closing and periodic dispersion", exact and worst <= 1e-8 * J,
           f"E(pi) exact zero: {exact}; periodic N=40 max error {worst:.1e}",
           time.perf_counter() - t0, 1.0)


def test_04_robust_edge_threshold(report):
    t0 = time.perf_counter()
    g1 = threshold(n_sites=20, gain_site=1)
    g10 = threshold(n_sites=20, gain_site=10)
    ok = abs(g1 - J) <= 0.02 * J and abs(g10 - J) <= 0.02 * J
    report(4, "N=20 edge and centre thresholds", ok, f"m0=1: {g1:.6f} J, m0=10: {g10:.6f} J",
           time.perf_counter() - t0, 10.0)


def test_05_doubling_at_flat_band(report):
    t0 = time.perf_counter()
    ratio = threshold(n_sites=20, sc_order=J) / threshold(n_sites=20)
    report(5, "threshold doubles at delta = J", abs(ratio - 2) <= 0.2, f"ratio {ratio:.6f}",
           time.perf_counter() - t0, 10.0)


def test_06_large_delta_plateau(report):
    t0 = time.perf_counter()
    g = threshold(n_sites=20, sc_order=3 * J)
    report(6, "plateau at delta = 3J", abs(g - J / 2) <= 0.05 * J, f"gamma_th = {g:.6f} J",
           time.perf_counter() - t0, 10.0)


def test_07_odd_chain_close_pair(report):
    t0 = time.perf_counter()
    g = threshold(n_sites=21, gain_site=10)
    report(7, "N=21 adjacent gain-loss pair", abs(g - J / 2) <= 0.05 * J, f"gamma_th = {g:.6f} J",
           time.perf_counter() - t0, 10.0)


def test_08_n5_closed_forms(report):
    t0 = time.perf_counter()
    deltas = (0.0, 0.5, 1.0, 1.5)
    worst_spec = 0.0
    for m0, closed in ((1, analytic.n5_spectrum_m1), (2, analytic.n5_spectrum_m2)):
        for d in deltas:
            for g in (0.3, 1.1, 2.6):
                numeric = np.linalg.eigvals(build_hk(ChainParams(5, sc_order=d, gain_loss=g, gain_site=m0)))
                worst_spec = max(worst_spec, analytic.spectral_distance(closed(J, d, g), numeric))
    worst_th = 0.0
    m1, m2 = [], []
    for d in deltas:
        n1, n2 = threshold(n_sites=5, sc_order=d), threshold(n_sites=5, sc_order=d, gain_site=2)
        worst_th = max(worst_th, abs(analytic.n5_threshold_m1(J, d) - n1), abs(analytic.n5_threshold_m2(J, d) - n2))
        m1.append(n1)
        m2.append(n2)
    at_zero = abs(analytic.n5_threshold_m2(J, 0.0) - math.sqrt(4 - 2 * math.sqrt(3)) * J)
    monotone = bool(np.all(np.diff(m1) > 0))
    non_monotone = not (np.all(np.diff(m2) >= 0) or np.all(np.diff(m2) <= 0))
    ok = worst_spec <= 1e-6 and worst_th <= 1e-6 and at_zero <= 1e-12 and monotone and non_monotone
    report(8, "N=5 closed forms", ok,
           f"spectra {worst_spec:.1e}, thresholds {worst_th:.1e}, m2(0) {at_zero:.1e}, "
           f"m0=1 monotone {monotone}, m0=2 non-monotone {non_monotone}",
           time.perf_counter() - t0, 5.0)


def test_09_zero_threshold_line(report):
    t0 = time.perf_counter()
    grid = sweep.threshold_map_mu_delta(ChainParams(20, gain_site=10),
                                        (0.25 * J, 3.0 * J, 12), (0.8 * J, 2.0 * J, 61))
    fit = sweep.fit_zero_threshold_alpha(grid)
    elapsed = time.perf_counter() - t0
    limit = analytic.band_edge_alpha(100)
    ok = abs(fit.alpha - 0.53) <= 0.05 and abs(limit - 0.5) <= 0.05
    report(9, "zero-threshold boundary slope", ok,
           f"fitted alpha {fit.alpha:.4f} over {len(fit.mu)} mu rows; band-edge alpha(N=100) {limit:.4f}",
           elapsed, 300.0)


def test_10_reentrance(report):
    t0 = time.perf_counter()
    at_12 = pt_intervals(ChainParams(8, sc_order=1.2 * J))
    at_05 = pt_intervals(ChainParams(8, sc_order=0.5 * J))
    ok = len(at_12.intervals) >= 2 and len(at_05.intervals) == 1
    report(10, "re-entrant PT-symmetric phase", ok,
           f"delta=1.2J: {len(at_12.intervals)} intervals, boundaries "
           f"{[round(b, 4) for b in at_12.boundary_points]}; delta=0.5J: {len(at_05.intervals)}",
           time.perf_counter() - t0, 30.0)


def test_11_exceptional_point_orders(report):
    t0 = time.perf_counter()
    ep3 = ep.ep_order(ChainParams(8, sc_order=J, gain_loss=2 * J))
    p = ChainParams(8, sc_order=1.2 * J)
    ep2 = ep.ep_order(p.with_gamma(pt_threshold_first(p).gamma_th))
    ok = ep3.estimated_order == 3 and ep2.estimated_order == 2
    report(11, "EP3 landmark and EP2 boundary", ok,
           f"orders {ep3.estimated_order} (row sum {ep3.overlap_max_rowsum:.3f}) and "
           f"{ep2.estimated_order} (row sum {ep2.overlap_max_rowsum:.3f})",
           time.perf_counter() - t0, 10.0)


def test_12_property_suites(report, tmp_path):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(1, 101))
        h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        worst = max(worst, eigendecompose(h).max_residual)
    worst_qr = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 41))
        h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        worst_qr = max(worst_qr, eigendecompose(h, method="qr").max_residual)

    worst_sym = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 13))
        params = ChainParams(n, hopping=float(rng.uniform(0.2, 3)), onsite=float(rng.uniform(-3, 3)),
                             sc_order=float(rng.uniform(-3, 3)), gain_loss=float(rng.uniform(0, 3)),
                             gain_site=int(rng.integers(1, n // 2 + 1)))
        h = build_hk(params)
        values = np.linalg.eigvals(h)
        flipped = np.linalg.eigvals(build_hk(ChainParams(**{**params.as_dict(), "sc_order": -params.sc_order})))
        scale = max(1.0, float(np.abs(values).max()))
        worst_sym = max(worst_sym,
                        check_pt_symmetry(h, symmetry_ops(n)),
                        analytic.spectral_distance(values, -values) / scale,
                        analytic.spectral_distance(values, values.conj()) / scale,
                        analytic.spectral_distance(values, flipped) / scale)

    blobs = []
    for workers in (1, 2):
        grid = sweep.threshold_map_m0_delta(ChainParams(10), (0.0, 2.0, 9), workers=workers)
        stem = tmp_path / f"w{workers}"
        sweep.write_csv(grid, f"{stem}.csv")
        sweep.write_json(grid, f"{stem}.json")
        sweep.write_ppm(grid, f"{stem}.ppm")
        blobs.append([open(f"{stem}.{ext}", "rb").read() for ext in ("csv", "json", "ppm")])
    identical = blobs[0] == blobs[1]

    ok = worst <= 1e-8 and worst_qr <= 1e-8 and worst_sym <= 1e-6 and identical
    report(12, "property suites", ok,
           f"LAPACK residual {worst:.1e} (500 matrices), QR residual {worst_qr:.1e}, "
           f"symmetry defect {worst_sym:.1e} (100 chains), worker-count byte-identical {identical}",
           time.perf_counter() - t0, 120.0)
