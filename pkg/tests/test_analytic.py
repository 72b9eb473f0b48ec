import math

import numpy as np
import pytest

from ptkitaev import analytic
from ptkitaev.errors import ParameterError
from ptkitaev.model import ChainParams, build_hk
from ptkitaev.spectral import pt_threshold_first

DELTAS = (0.0, 0.5, 1.0, 1.5)


@pytest.fixture(scope="module")
def report():
    return {r.name: r for r in analytic.validation_report()}


def test_validated_forms_pass(report):
    validated = [r for name, r in report.items() if "validated" in name]
    assert len(validated) == 4
    assert all(r.passed for r in validated), [(r.name, r.error) for r in validated]


def test_uncorrected_forms_disagree(report):
    uncorrected = [r for name, r in report.items() if "uncorrected" in name]
    assert len(uncorrected) == 2
    assert not any(r.passed for r in uncorrected)


@pytest.mark.parametrize("spectrum, m0", [(analytic.n5_spectrum_m1, 1), (analytic.n5_spectrum_m2, 2)])
@pytest.mark.parametrize("delta, gamma", [(0.3, 0.4), (1.4, 2.2), (0.8, 2.9)])
def test_spectrum_against_diagonalization(spectrum, m0, delta, gamma):
    numeric = np.linalg.eigvals(build_hk(ChainParams(5, sc_order=delta, gain_loss=gamma, gain_site=m0)))
    assert analytic.spectral_distance(spectrum(1.0, delta, gamma), numeric) < 1e-6


@pytest.mark.parametrize("delta", DELTAS)
@pytest.mark.parametrize("closed, m0", [(analytic.n5_threshold_m1, 1), (analytic.n5_threshold_m2, 2)])
def test_thresholds_against_search(closed, m0, delta):
    numeric = pt_threshold_first(ChainParams(5, sc_order=delta, gain_site=m0)).gamma_th
    assert abs(closed(1.0, delta) - numeric) <= 1e-6


def test_m2_threshold_at_zero_delta():
    assert analytic.n5_threshold_m2(1.0, 0.0) == pytest.approx(math.sqrt(4 - 2 * math.sqrt(3)), abs=1e-14)


def test_m2_threshold_closes_at_flat_band():
    assert analytic.n5_threshold_m2(1.0, 1.0) == 0.0


def test_monotonicity_pattern():
    grid = np.linspace(0.0, 2.0, 81)
    m1 = [analytic.n5_threshold_m1(1.0, d) for d in grid]
    m2 = [analytic.n5_threshold_m2(1.0, d) for d in grid]
    assert np.all(np.diff(m1) >= 0)
    assert not (np.all(np.diff(m2) >= 0) or np.all(np.diff(m2) <= 0))


def test_closed_forms_scale_with_j():
    assert analytic.n5_threshold_m1(2.0, 1.0) == pytest.approx(2.0 * analytic.n5_threshold_m1(1.0, 0.5))
    assert analytic.n5_threshold_m2(3.0, 1.5) == pytest.approx(3.0 * analytic.n5_threshold_m2(1.0, 0.5))


def test_band_edge_alpha_limit():
    assert abs(analytic.band_edge_alpha(100) - 0.5) <= 0.05
    values = [analytic.band_edge_alpha(n) for n in (5, 20, 50, 100)]
    assert np.all(np.diff(values) < 0)


def test_band_edge_is_k2():
    lines = [analytic.degeneracy_alpha(k, 20) for k in range(2, 21)]
    assert min(lines, key=lambda line: line.alpha).k == 2
    assert all(line.a1 < 0 for line in lines)


def test_degeneracy_alpha_range():
    with pytest.raises(ParameterError):
        analytic.degeneracy_alpha(1, 10)


def test_zero_threshold_line():
    roots = analytic.zero_threshold_line(1.0, 1.0, 0.5)
    np.testing.assert_allclose(roots, [math.sqrt(0.5), math.sqrt(1.5)])
    for d in roots:
        assert 0.5 * 1.0 * 1.0 == pytest.approx(abs(1.0 - d * d))
    assert analytic.zero_threshold_line(4.0, 1.0, 0.5) == [math.sqrt(3.0)]


def test_sample_points_reproducible():
    assert analytic.sample_points(seed=7) == analytic.sample_points(seed=7)
