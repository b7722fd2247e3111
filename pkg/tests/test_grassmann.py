import numpy as np
import pytest
from hypothesis import given, strategies as st

from dginibre.susy import (AlgebraMismatch, GrassmannAlgebra, berezin_integrate, g_add,
                           g_exp, g_inv, g_log, g_mul, g_scale, substitute)

ALG = GrassmannAlgebra(["g%d" % i for i in range(6)])
coeff = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


def element(alg, terms):
    return g_add(alg.zero(), *[alg.monomial(alg.mask_names(m), c) for m, c in terms])


def elements(alg=ALG, parity=None, body=True):
    def keep(m):
        if not body and m == 0:
            return False
        if parity is None:
            return True
        return bin(m).count("1") % 2 == parity
    masks = st.integers(0, (1 << alg.m) - 1).filter(keep)
    return st.lists(st.tuples(masks, coeff), max_size=8).map(lambda t: element(alg, t))


def test_generator_products():
    g0, g1 = ALG.gens("g0", "g1")
    assert (g0 * g1).to_dict() == {("g0", "g1"): 1}
    assert (g1 * g0).to_dict() == {("g0", "g1"): -1}
    assert (g0 * g0).is_zero()
    x = 1 + g0 * g1
    assert (x * x).allclose(1 + 2 * g0 * g1, atol=0)


@given(elements(), elements(), elements())
def test_associative(a, b, c):
    assert ((a * b) * c).allclose(a * (b * c), atol=1e-12)


@given(elements(), elements(), elements())
def test_distributive(a, b, c):
    assert (a * (b + c)).allclose(a * b + a * c, atol=1e-12)


@given(st.integers(0, 5), st.integers(0, 5))
def test_anticommutation(i, j):
    gi, gj = ALG.gen(i), ALG.gen(j)
    assert (gi * gj + gj * gi).is_zero()


@given(elements(parity=0), elements())
def test_even_elements_commute(a, x):
    assert (a * x).allclose(x * a, atol=1e-12)


@given(elements(parity=1), elements(parity=1))
def test_odd_odd_is_even_and_anticommutes(a, b):
    p = a * b
    assert p.is_even()
    assert p.allclose(-(b * a), atol=1e-12)


@given(elements(parity=0), elements(parity=1))
def test_parity_grading(e, o):
    assert (e * e).is_even()
    assert (e * o).is_odd()


def test_exp_examples():
    assert g_exp(ALG.zero()).allclose(ALG.scalar(1), atol=0)
    a = 0.7 - 0.2j
    x = a * ALG.gen(0) * ALG.gen(3)
    assert g_exp(x).allclose(1 + x, atol=0)
    with pytest.raises(ValueError):
        g_exp(ALG.gen(1))


@given(elements(parity=0), elements(parity=0))
def test_exp_additive(a, b):
    a = a - a.body + 0.3 * a.body   # keep bodies moderate
    assert g_exp(a + b).allclose(g_exp(a) * g_exp(b), atol=1e-9 * max(1, abs(np.exp(a.body + b.body))))


@given(elements(parity=0, body=False))
def test_log_inverts_exp(x):
    y = x + 1.5
    assert g_exp(g_log(y)).allclose(y, atol=1e-10)
    assert (g_inv(y) * y).allclose(ALG.scalar(1), atol=1e-10)


def test_inverse_and_log_need_body():
    with pytest.raises(ValueError):
        g_inv(ALG.gen(0) * ALG.gen(1))
    with pytest.raises(ValueError):
        g_log(ALG.zero())


def test_scale_and_division():
    x = ALG.gen(0) + 2 * ALG.gen(1) * ALG.gen(2)
    assert g_scale(x, 0.5).allclose(x / 2, atol=0)
    assert (x ** 2).allclose(g_mul(x, x), atol=0)


def test_mismatched_algebras():
    other = GrassmannAlgebra(["g0"])
    with pytest.raises(AlgebraMismatch):
        ALG.gen(0) * other.gen(0)
    with pytest.raises(AlgebraMismatch):
        ALG.gen(0) + other.gen(0)


def test_berezin_examples():
    alg = GrassmannAlgebra(["p1", "p2", "a"])
    p1, p2, a = alg.gens("p1", "p2", "a")
    assert berezin_integrate(p1, ["p1"]).allclose(alg.scalar(1), atol=0)
    assert berezin_integrate(alg.scalar(1), ["p1"]).is_zero()
    # coefficient of the top monomial with d psi_2 d psi_1
    pc = 2.5 - 1j
    assert berezin_integrate(pc * p1 * p2, ["p2", "p1"]).allclose(alg.scalar(pc), atol=0)
    assert berezin_integrate(pc * p1 * p2, ["p1", "p2"]).allclose(alg.scalar(-pc), atol=0)
    # ambient generators are untouched: int a p1 dp1 = a
    assert berezin_integrate(a * p1, ["p1"]).allclose(a, atol=0)
    with pytest.raises(KeyError):
        berezin_integrate(p1, ["missing"])


@given(elements())
def test_berezin_fubini(x):
    once = berezin_integrate(x, ["g2", "g4"])
    twice = berezin_integrate(berezin_integrate(x, ["g2"]), ["g4"])
    assert once.allclose(twice, atol=0)
    swapped = berezin_integrate(x, ["g4", "g2"])
    assert once.allclose(-swapped, atol=0)


@given(elements())
def test_berezin_is_derivative_from_right(x):
    # integrating a generator twice always gives zero
    assert berezin_integrate(x, ["g1", "g1"]).is_zero()


def test_substitute_linear_map():
    alg = GrassmannAlgebra(["c0", "c1", "z0", "z1"])
    c0, c1, z0, z1 = alg.gens("c0", "c1", "z0", "z1")
    f = c0 * c1
    out = substitute(f, {"c0": z0 + 2 * z1, "c1": 3 * z0})
    assert out.allclose(-6 * z0 * z1, atol=0)


def test_dense_and_sparse_paths_agree():
    big = GrassmannAlgebra(["h%d" % i for i in range(20)])
    small = GrassmannAlgebra(["h%d" % i for i in range(12)])
    rng = np.random.default_rng(0)
    def rand(alg):
        return g_add(alg.zero(), *[alg.monomial(list(rng.choice(alg.names[:12], 3, replace=False)),
                                                complex(*rng.standard_normal(2))) for _ in range(6)])
    rng = np.random.default_rng(0)
    a_b, b_b = rand(big), rand(big)
    rng = np.random.default_rng(0)
    a_s, b_s = rand(small), rand(small)
    assert (a_b * b_b + a_b).to_dict() == pytest.approx((a_s * b_s + a_s).to_dict())
