import numpy as np
import pytest
from hypothesis import given, strategies as st

from dginibre.ensemble import (DeformationSpec, realize_deformation, sample_deformed,
                               sample_ginibre, trial_rng)
from dginibre.matrixio import MatrixFormatError, write_matrix
from dginibre.spectra import parallel_map


def test_realize_examples():
    assert np.array_equal(realize_deformation(DeformationSpec.zero(4)), np.zeros((4, 4)))
    assert np.array_equal(realize_deformation(DeformationSpec.scalar_shift(0.5, 3)),
                          0.5 * np.eye(3))
    assert np.array_equal(realize_deformation(DeformationSpec.two_atom(0.5, 4)),
                          np.diag([0.5, 0.5, -0.5, -0.5]))
    J = realize_deformation(DeformationSpec.jordan(0.3j, 3))
    assert np.array_equal(J, [[0.3j, 1, 0], [0, 0.3j, 1], [0, 0, 0.3j]])


def test_spec_validation():
    with pytest.raises(ValueError, match="even"):
        DeformationSpec.two_atom(0.5, 3)
    with pytest.raises(ValueError):
        DeformationSpec("nope", 3)
    with pytest.raises(ValueError):
        DeformationSpec.zero(0)
    with pytest.raises(ValueError):
        DeformationSpec.iid(-1.0, 0, 4)


def test_iid_deformation_deterministic_and_scaled():
    spec = DeformationSpec.iid(0.01, seed=3, n=200)
    A = realize_deformation(spec)
    assert np.array_equal(A, realize_deformation(spec))
    # (1/n) sum |A_ij|^2 concentrates near n * entry_variance = 2
    a1 = np.sum(np.abs(A) ** 2) / 200
    assert abs(a1 - 2.0) < 5 * 2.0 / 200


def test_explicit_deformation(tmp_path):
    path = tmp_path / "a0.csv"
    M = np.arange(9).reshape(3, 3) * (1 + 0.5j)
    write_matrix(path, M)
    assert np.array_equal(realize_deformation(DeformationSpec.explicit(path, 3)), M)
    with pytest.raises(ValueError, match="shape"):
        realize_deformation(DeformationSpec.explicit(path, 4))
    bad = tmp_path / "bad.csv"
    bad.write_text("garbage\n")
    with pytest.raises(MatrixFormatError):
        realize_deformation(DeformationSpec.explicit(bad, 3))


@given(st.sampled_from([DeformationSpec.zero(4), DeformationSpec.two_atom(0.5 - 0.1j, 6),
                        DeformationSpec.jordan(1j, 5), DeformationSpec.iid(0.1, 7, 3),
                        DeformationSpec.scalar_shift(2, 2)]))
def test_spec_dict_roundtrip(spec):
    back = DeformationSpec.from_dict(spec.to_dict())
    assert back == spec
    assert back.digest() == spec.digest()


def test_ginibre_moments():
    # pooled over 4 x 256^2 > 10^6 entries, each moment within 5 standard errors
    n = 256
    h = np.concatenate([sample_ginibre(n, 11, t).matrix.ravel() for t in range(16)])
    N = h.size
    assert N >= 10**6
    x = n * np.abs(h) ** 2
    se_mean = np.sqrt(1.0 / n / N)
    assert abs(h.mean()) < 5 * se_mean
    assert abs(np.mean(h * h)) < 5 * np.std(h * h) / np.sqrt(N)
    assert abs(x.mean() - 1.0) < 5 * x.std() / np.sqrt(N)


def test_ginibre_examples():
    n = 256
    h = sample_ginibre(n, 0, 0).matrix
    assert abs(h.mean()) < 4 / np.sqrt(n * n * 2)
    assert 0.98 <= np.mean(n * np.abs(h) ** 2) <= 1.02
    # real and imaginary parts have equal variance 1/(2n)
    assert abs(np.var(h.real) * 2 * n - 1) < 0.03
    assert abs(np.var(h.imag) * 2 * n - 1) < 0.03


def test_sample_mean_bound_example():
    n = 256
    bound = 4 / np.sqrt(n * n * 2)
    hits = [abs(sample_ginibre(n, 5, t).matrix.mean()) < bound for t in range(20)]
    assert all(hits)


def test_determinism_and_independence():
    a = sample_ginibre(32, 99, 4).matrix
    b = sample_ginibre(32, 99, 4).matrix
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_ginibre(32, 99, 5).matrix)
    assert not np.array_equal(a, sample_ginibre(32, 98, 4).matrix)


def test_streams_identical_across_workers():
    one = parallel_map(lambda t: sample_ginibre(16, 1, t).matrix, range(6), workers=1)
    three = parallel_map(lambda t: sample_ginibre(16, 1, t).matrix, range(6), workers=3)
    assert all(np.array_equal(x, y) for x, y in zip(one, three))
    # order of requests does not matter either
    rev = [sample_ginibre(16, 1, t).matrix for t in reversed(range(6))][::-1]
    assert all(np.array_equal(x, y) for x, y in zip(one, rev))


def test_trial_rng_keyed_by_pair():
    assert trial_rng(1, 2).random() == trial_rng(1, 2).random()
    assert trial_rng(1, 2).random() != trial_rng(2, 1).random()


def test_sample_deformed_is_sum():
    spec = DeformationSpec.scalar_shift(0.7, 8)
    H = sample_deformed(spec, 3, 1)
    assert np.array_equal(H, 0.7 * np.eye(8) + sample_ginibre(8, 3, 1).matrix)
    assert np.array_equal(sample_deformed(DeformationSpec.zero(8), 3, 1),
                          sample_ginibre(8, 3, 1).matrix)
    with pytest.raises(ValueError):
        sample_deformed(spec, 3, 1, A0=np.zeros((4, 4)))


def test_scalar_shift_cloud_centered_at_shift():
    # circular law: eigenvalues of a + H0 fill the unit disk around a
    a = 0.8 - 0.3j
    ev = np.linalg.eigvals(sample_deformed(DeformationSpec.scalar_shift(a, 400), 2, 0))
    assert abs(ev.mean() - a) < 0.02
    assert np.max(np.abs(ev - a)) < 1.15
    assert np.mean(np.abs(ev - a) < 1 / np.sqrt(2)) == pytest.approx(0.5, abs=0.05)
