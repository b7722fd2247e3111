import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from dginibre.ensemble import DeformationSpec, sample_deformed, sample_ginibre
from dginibre.spectra import (GIRKO_DOUBLING_BAND, bump, bump_laplacian, eigenvalues,
                              gen_functional_mc, girko_check, girko_convergence,
                              logdet_smoothing_check, logdet_Y, sample_eigenvalues,
                              sigma_min, smoothing_ladder)


def _sorted(z):
    return np.array(sorted(z, key=lambda w: (round(w.real, 8), round(w.imag, 8))))


def test_eigenvalue_examples():
    assert np.allclose(_sorted(eigenvalues(np.diag([1, 2j]))), _sorted([1, 2j]))
    ev = eigenvalues(np.eye(4, k=1))
    assert ev.size == 4 and np.all(np.abs(ev) < 1e-12)
    companion = np.array([[3.0, -2.0], [1.0, 0.0]])   # lambda^2 - 3 lambda + 2
    assert np.allclose(np.sort(eigenvalues(companion).real), [1, 2], atol=1e-14)


def test_eigenvalue_errors():
    with pytest.raises(ValueError):
        eigenvalues(np.zeros((2, 3)))
    with pytest.raises(np.linalg.LinAlgError):
        eigenvalues(np.array([[np.inf, 0], [0, 1]]))


@given(st.integers(1, 40), st.integers(0, 1000))
def test_trace_consistency(n, seed):
    H = sample_deformed(DeformationSpec.scalar_shift(0.3j, n), seed, 0)
    ev = eigenvalues(H)
    assert ev.size == n
    assert abs(ev.sum() - np.trace(H)) <= 1e-8 * n * np.linalg.norm(H)


def test_sample_eigenvalues_records():
    spec = DeformationSpec.zero(8)
    samples, failures = sample_eigenvalues(spec, 7, 5)
    assert failures == [] and len(samples) == 5
    assert [s.trial_index for s in samples] == list(range(5))
    assert np.allclose(_sorted(samples[2].eigenvalues),
                       _sorted(np.linalg.eigvals(sample_ginibre(8, 7, 2).matrix)))
    again, _ = sample_eigenvalues(spec, 7, 5, workers=2)
    assert all(np.array_equal(a.eigenvalues, b.eigenvalues) for a, b in zip(samples, again))


@pytest.mark.slow
def test_circular_law_fractions():
    samples, _ = sample_eigenvalues(DeformationSpec.zero(1024), 3, 50)
    r = np.abs(np.concatenate([s.eigenvalues for s in samples]))
    N = r.size
    for q in (0.25, 0.5, 0.75):
        p = q * q
        frac = np.mean(r <= q)
        assert abs(frac - p) <= 3 * math.sqrt(p * (1 - p) / N) + 1.0 / 1024, q


def test_sigma_min_examples():
    assert sigma_min(np.eye(3), 1) == pytest.approx(0, abs=1e-15)
    assert sigma_min(np.diag([1.0, 3.0]), 0) == pytest.approx(1, abs=1e-15)


@given(st.integers(1, 8), st.integers(0, 10**6), st.floats(0, 0.5))
def test_logdet_matches_dense_determinant(n, seed, eps):
    H = sample_ginibre(n, seed, 0).matrix
    z = 0.1 - 0.2j
    Az = H - z * np.eye(n)
    ref = math.log(abs(np.linalg.det(Az @ Az.conj().T + eps * eps * np.eye(n))))
    val = logdet_Y(H, z, eps)
    assert abs(val - ref) <= 1e-8 * max(1, abs(ref))


def test_bump_laplacian_matches_finite_difference():
    h = 1e-4
    pts = np.array([0.1 + 0.05j, 0.3 - 0.2j, 0.0 + 0.35j])
    c, r = 0.05 + 0.02j, 0.45
    fd = (bump(pts + h, c, r) + bump(pts - h, c, r) + bump(pts + 1j * h, c, r)
          + bump(pts - 1j * h, c, r) - 4 * bump(pts, c, r)) / h ** 2
    assert np.allclose(bump_laplacian(pts, c, r), fd, rtol=1e-5, atol=1e-6)
    assert bump(2.0, c, r) == 0 and bump_laplacian(2.0, c, r) == 0


def test_girko_n16_single_grid():
    H = sample_ginibre(16, 0, 0).matrix
    res = girko_check(H, grid=401)
    assert res["lhs"] > 0.1
    assert res["rel_err"] < 1e-2
    assert res["flagged"] == 0


def test_girko_bump_outside_cloud():
    H = sample_ginibre(16, 0, 0).matrix
    res = girko_check(H, center=3.0, radius=0.5, grid=201)
    assert res["lhs"] == 0
    assert abs(res["rhs"]) < 1e-6


def test_girko_convergence_band():
    Hs = [sample_ginibre(16, 0, t).matrix for t in range(8)]
    res = girko_convergence(Hs, grids=(101, 201, 401))
    lo, hi = GIRKO_DOUBLING_BAND
    assert lo <= res["per_doubling"] <= hi
    assert np.all(np.diff(res["rms"]) < 0)


def test_gen_functional_collapses_to_one():
    spec = DeformationSpec.zero(12)
    pt = gen_functional_mc(spec, 0.1, (0.3, -0.2j), (0.3, -0.2j), (0.7, 0.7), 0.7,
                           trials=20, seed=1)
    assert pt.estimate == 1.0 and pt.std_error == 0.0


def test_gen_functional_rejects_nonpositive_eps():
    with pytest.raises(ValueError):
        gen_functional_mc(DeformationSpec.zero(2), 0, (0,), (0,), (0.0,), 1.0, 2, 0)


def gen_functional_n1_oracle(zeta, zeta_prime, eps_hat, eps_prime):
    """E prod_j (|h - z_j|^2 + e_j^2) / (|h - z'_j|^2 + e'^2), h ~ CN(0, 1)."""
    def integrand(y, x):
        h = complex(x, y)
        val = math.exp(-(x * x + y * y)) / math.pi
        for zj, zpj, ej in zip(zeta, zeta_prime, eps_hat):
            val *= (abs(h - zj) ** 2 + ej ** 2) / (abs(h - zpj) ** 2 + eps_prime ** 2)
        return val
    return integrate.dblquad(integrand, -9, 9, -9, 9, epsabs=1e-11, epsrel=1e-11)[0]


def test_gen_functional_n1_matches_quadrature():
    zeta, zeta_prime, eps_hat, eps_prime = (0.3, -0.4j), (0.5 + 0.2j, 0.1), (0.6, 0.9), 0.8
    ref = gen_functional_n1_oracle(zeta, zeta_prime, eps_hat, eps_prime)
    pt = gen_functional_mc(DeformationSpec.zero(1), 0.0, zeta, zeta_prime, eps_hat,
                           eps_prime, trials=20000, seed=4)
    assert abs(pt.estimate - ref) < 3 * pt.std_error
    assert pt.std_error > 0


def test_gen_functional_swap_symmetry():
    spec = DeformationSpec.zero(6)
    a = gen_functional_mc(spec, 0, (0.2, -0.5j), (0.1, 0.1), (0.5, 1.5), 1.0, 30, 2)
    b = gen_functional_mc(spec, 0, (-0.5j, 0.2), (0.1, 0.1), (1.5, 0.5), 1.0, 30, 2)
    assert a.estimate == pytest.approx(b.estimate, rel=1e-12)


def test_smoothing_zero_eps():
    res = logdet_smoothing_check(DeformationSpec.zero(8), 0, 0, 0.0, 0.0, 10, 0)
    assert res["delta"] == 0


def test_smoothing_small_run_fields():
    res = logdet_smoothing_check(DeformationSpec.zero(8), 0, 0.1, 0.4, 0.4, 50, 0)
    assert res["delta"] >= 0 and res["delta_se"] > 0
    assert res["bound_ratio"] == pytest.approx(res["delta"] / 0.16)
    # the mixed difference is a product of two nonnegative increments
    assert res["mixed"] > 0


def test_smoothing_ladder_consistent_with_single_point():
    spec = DeformationSpec.zero(8)
    lad = smoothing_ladder(spec, 0, 0, [0.8, 0.4], trials=40, seed=3, batches=4)
    one = logdet_smoothing_check(spec, 0, 0, 0.4, 0.4, 40, 3)
    assert lad["bound_ratio"][1] == pytest.approx(one["bound_ratio"], rel=1e-10)
    assert lad["mixed_ratio"][1] == pytest.approx(one["mixed_ratio"], rel=1e-10)
    assert lad["slope_se"] >= 0
