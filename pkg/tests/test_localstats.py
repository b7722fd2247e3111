import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dginibre.detequiv import OutsideBulk
from dginibre.ensemble import DeformationSpec
from dginibre.localstats import (RescaledCloud, annulus_average, default_bins,
                                 ginibre_exact_pair, pair_correlation, rescale,
                                 universal_prediction, universality_report)
from dginibre.spectra import EigenSample, sample_eigenvalues


def _cloud(points, R):
    return RescaledCloud(z0=0j, n=1, window_radius=R, points=np.asarray(points, dtype=complex))


def poisson_clouds(trials, R, intensity, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(trials):
        k = rng.poisson(intensity * math.pi * R * R)
        r = R * np.sqrt(rng.random(k))
        out.append(_cloud(r * np.exp(2j * math.pi * rng.random(k)), R))
    return out


def test_default_bins():
    e = default_bins()
    assert e.size == 41 and e[0] == 0 and e[-1] == pytest.approx(4.0)
    assert np.allclose(np.diff(e), 0.1)


def test_rescale_examples():
    z0 = 0.1j
    c = rescale(np.array([z0, z0 + 0.05, z0 + 0.9]), z0, 1.0, n=100)
    assert np.allclose(c.points, [0, 0.5])
    s = EigenSample(100, 0, 0, None, np.array([z0 + 0.05j]))
    assert np.allclose(rescale(s, z0, 1.0).points, [0.5j])


def test_window_count_near_64():
    samples, _ = sample_eigenvalues(DeformationSpec.zero(256), 0, 30)
    counts = [rescale(s, 0, 8.0).points.size for s in samples]
    # n * pi * (8 / sqrt(n))^2 / pi = 64 points expected per window
    assert abs(np.mean(counts) - 64) < 3


def test_counting_fixture():
    edges = default_bins(4.0)
    est = pair_correlation([_cloud([0, 1], 5.0)], edges, inner_margin=4.5)
    assert est.counts.sum() == 1
    assert est.counts[np.searchsorted(edges, 1.0, side="right") - 1] == 1
    assert np.all(np.isinf(est.std_err))
    est = pair_correlation([_cloud([0, 1], 1000.0)], edges)
    assert est.counts.sum() == 2
    assert est.empty.sum() == edges.size - 2
    assert np.all(est.g_hat[est.empty] == 0)


def test_pair_correlation_argument_errors():
    c = [_cloud([0, 1], 5.0)] * 2
    with pytest.raises(ValueError):
        pair_correlation(c, default_bins(4.0), inner_margin=3.0)
    with pytest.raises(ValueError):
        pair_correlation(c, default_bins(4.0), inner_margin=5.0)
    with pytest.raises(ValueError):
        pair_correlation(c, [0, 1, 1])
    with pytest.raises(ValueError):
        pair_correlation([], default_bins(1.0))


def test_counts_reconstruct_g():
    clouds = poisson_clouds(20, 6.0, 0.5, seed=1)
    est = pair_correlation(clouds, default_bins(2.0))
    e = est.bin_edges
    area = math.pi * (e[1:] ** 2 - e[:-1] ** 2)
    g = est.counts / (est.trials * est.n_inner_mean * est.density_hat * area)
    assert np.allclose(g, est.g_hat, rtol=1e-12)
    assert np.all(est.g_hat >= 0)


def test_poisson_estimator_unbiased():
    clouds = poisson_clouds(300, 8.0, 1 / math.pi, seed=7)
    est = pair_correlation(clouds, default_bins(3.0))
    z = np.abs(est.g_hat - 1) / est.std_err
    assert np.mean(z < 4) >= 0.95
    assert abs(math.pi * est.density_hat - 1) < 0.03


@given(st.integers(0, 2**31))
def test_poisson_density_estimate(seed):
    clouds = poisson_clouds(50, 5.0, 0.8, seed)
    est = pair_correlation(clouds, default_bins(1.0))
    # Poisson count over 50 windows of area 25 pi: relative sd about 1.6%
    assert abs(est.density_hat / 0.8 - 1) < 0.08


def test_exact_pair_examples():
    assert ginibre_exact_pair(256, 0, [0.0])[0] == pytest.approx(0, abs=1e-15)
    r = np.linspace(0, 3, 61)
    for n in (64, 128, 512):
        g = ginibre_exact_pair(n, 0, r)
        assert np.all(np.diff(g) > 0)
    # at z0 = 0 only the first truncated series matters, and it is e^{r^2} to rounding
    assert np.allclose(ginibre_exact_pair(4000, 0, r), 1 - np.exp(-r * r), atol=1e-12)


def test_exact_pair_translation_and_rotation():
    r = np.linspace(0, 3, 31)
    ref = 1 - np.exp(-r * r)
    for z0, ang in ((0.3 + 0.2j, 0.0), (-0.4j, 1.1), (0.5, 2.5)):
        assert np.allclose(ginibre_exact_pair(256, z0, r, direction=ang), ref, atol=1e-10)
    with pytest.raises(ValueError):
        ginibre_exact_pair(16, 1.0, [1.0])


def test_exact_pair_no_overflow_large_n():
    g = ginibre_exact_pair(20000, 0.5, [0.5, 2.0])
    assert np.all(np.isfinite(g))


def test_universal_prediction_examples():
    g, p2 = universal_prediction(1.0, [0.0, 50.0])
    assert g[0] == 0 and g[1] == 1 and p2[1] == 1
    g, p2 = universal_prediction(0.75, 1.0)
    assert float(g) == pytest.approx(0.52763, abs=5e-6)
    assert float(p2) == pytest.approx(0.75 ** 2 * float(g), rel=1e-15)
    with pytest.raises(ValueError):
        universal_prediction(0.0, 1.0)


def test_annulus_average_polynomial_exact():
    edges = np.array([0.0, 0.5, 1.7])
    # area average of r^2 over a <= r <= b is (a^2 + b^2) / 2
    assert np.allclose(annulus_average(lambda r: r * r, edges), [0.125, (0.25 + 1.7 ** 2) / 2])


@pytest.fixture(scope="module")
def ginibre128():
    samples, _ = sample_eigenvalues(DeformationSpec.zero(128), 21, 300)
    return samples


def _agree(a, b, sigmas=3.0):
    ok = ~(a.empty | b.empty)
    z = np.abs(a.g_hat - b.g_hat)[ok] / np.hypot(a.std_err, b.std_err)[ok]
    return np.mean(z < sigmas)


def test_isotropy(ginibre128):
    clouds = [rescale(s, 0, 7.0) for s in ginibre128]
    edges = default_bins(3.0)
    left = pair_correlation(clouds, edges, angle_range=(0, math.pi / 2))
    right = pair_correlation(clouds, edges, angle_range=(math.pi / 2, math.pi))
    assert _agree(left, right) >= 0.9


def test_window_independence(ginibre128):
    edges = default_bins(3.0)
    small = pair_correlation([rescale(s, 0, 4.5) for s in ginibre128], edges)
    big = pair_correlation([rescale(s, 0, 9.0) for s in ginibre128], edges)
    assert _agree(small, big) >= 0.9


def test_universality_report_small_run():
    rep = universality_report(DeformationSpec.zero(64), 0, trials=40, seed=2,
                              window_radius=4.0, r_max=1.5)
    d = rep.to_dict()
    assert d["detequiv"]["rho"] == pytest.approx(1, abs=1e-12)
    assert len(d["bins"]["g_hat"]) == 15
    assert rep.sup_distance >= 0 and rep.density_residual >= 0
    assert rep.passed == (rep.sup_distance < 0.05 and rep.density_residual < 0.03)
    with pytest.raises(OutsideBulk):
        universality_report(DeformationSpec.zero(16), 2.0, trials=2, seed=0)
