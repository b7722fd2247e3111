"""Exact finite Grassmann algebra.

An element is a sum of monomials ``c * g_{i1} g_{i2} ... g_{ik}`` with
``i1 < i2 < ... < ik`` in the algebra's fixed generator order.  Monomials are
stored as bitmasks, kept sorted together with their complex coefficients;
only non-zero terms are held, so sparse elements in large algebras stay
cheap.

The sign of a product of two canonical monomials ``g_S g_T`` is
``(-1)^#{(i, j) : i in S, j in T, i > j}``, counted with popcounts.

Berezin integration follows the convention
``int X g dg = X``: to integrate over ``g`` the generator is moved to the
right end of each monomial and then dropped.  A written measure
``dg_a dg_b ...`` acts from left to right, so that
``int g_1 g_2 dg_2 dg_1 = 1`` and
``int exp(-sum A_jk psibar_j psi_k) prod_j dpsibar_j dpsi_j = det A``.
"""
import math

import numpy as np

__all__ = [
    "GrassmannAlgebra", "GrassmannElement", "g_mul", "g_add", "g_scale", "g_exp",
    "g_log", "g_inv", "g_taylor", "berezin_integrate", "substitute",
    "AlgebraMismatch",
]

DENSE_MAX = 16


class AlgebraMismatch(ValueError):
    """Elements from different algebras were combined."""


def _popcount(x):
    return np.bitwise_count(x).astype(np.int64)


class GrassmannAlgebra:
    """Algebra generated by named anticommuting generators.

    Parameters
    ----------
    names : sequence of str
        Generator names; their order fixes the canonical monomial ordering.
    """

    def __init__(self, names):
        names = tuple(str(n) for n in names)
        if len(set(names)) != len(names):
            raise ValueError("duplicate generator names")
        if len(names) > 62:
            raise ValueError("at most 62 generators are supported")
        self.names = names
        self.index = {n: i for i, n in enumerate(names)}
        self.m = len(names)

    def __repr__(self):
        return "GrassmannAlgebra(m=%d)" % self.m

    def _idx(self, name):
        if isinstance(name, (int, np.integer)):
            if not 0 <= name < self.m:
                raise KeyError("generator index %d out of range" % name)
            return int(name)
        try:
            return self.index[name]
        except KeyError:
            raise KeyError("generator %r not in algebra" % (name,)) from None

    def scalar(self, c):
        if c == 0:
            return self.zero()
        return GrassmannElement._raw(self, np.array([0], dtype=np.int64),
                                     np.array([complex(c)]))

    def zero(self):
        return GrassmannElement._raw(self, np.zeros(0, dtype=np.int64),
                                     np.zeros(0, dtype=complex))

    def gen(self, name):
        i = self._idx(name)
        return GrassmannElement._raw(self, np.array([1 << i], dtype=np.int64),
                                     np.array([1.0 + 0j]))

    def gens(self, *names):
        return [self.gen(n) for n in names]

    def monomial(self, names, coeff=1.0):
        """``coeff * g_{names[0]} g_{names[1]} ...`` in the written order."""
        out = self.scalar(coeff)
        for n in names:
            out = out * self.gen(n)
        return out

    def mask(self, names):
        m = 0
        for n in names:
            m |= 1 << self._idx(n)
        return m

    def mask_names(self, mask):
        return tuple(self.names[i] for i in range(self.m) if mask >> i & 1)


class GrassmannElement:
    """Immutable element of a :class:`GrassmannAlgebra`."""

    __slots__ = ("alg", "masks", "coeffs")

    @classmethod
    def _raw(cls, alg, masks, coeffs):
        self = object.__new__(cls)
        masks.flags.writeable = False
        coeffs.flags.writeable = False
        self.alg, self.masks, self.coeffs = alg, masks, coeffs
        return self

    @classmethod
    def _combine(cls, alg, masks, coeffs):
        """Sum coefficients of equal monomials and drop exact zeros."""
        if masks.size == 0:
            return alg.zero()
        if alg.m <= DENSE_MAX:
            size = 1 << alg.m
            re = np.bincount(masks, weights=coeffs.real, minlength=size)
            im = np.bincount(masks, weights=coeffs.imag, minlength=size)
            nz = np.flatnonzero((re != 0) | (im != 0))
            return cls._raw(alg, nz.astype(np.int64), re[nz] + 1j * im[nz])
        uniq, inv = np.unique(masks, return_inverse=True)
        re = np.bincount(inv, weights=coeffs.real, minlength=uniq.size)
        im = np.bincount(inv, weights=coeffs.imag, minlength=uniq.size)
        keep = (re != 0) | (im != 0)
        return cls._raw(alg, uniq[keep].astype(np.int64), re[keep] + 1j * im[keep])

    # -- inspection -------------------------------------------------------
    def __repr__(self):
        if self.masks.size == 0:
            return "0"
        parts = []
        for m, c in zip(self.masks, self.coeffs):
            mono = "*".join(self.alg.mask_names(int(m))) or "1"
            parts.append("(%s)%s" % (_fmt(c), "" if mono == "1" else "*" + mono))
        return " + ".join(parts)

    @property
    def body(self):
        """Numeric (degree zero) part."""
        hit = self.masks == 0
        return complex(self.coeffs[hit][0]) if hit.any() else 0j

    def coeff(self, names=()):
        """Coefficient of the canonical monomial on the generator set `names`."""
        m = self.alg.mask(names)
        hit = self.masks == m
        return complex(self.coeffs[hit][0]) if hit.any() else 0j

    def degrees(self):
        return _popcount(self.masks)

    def is_even(self):
        return bool(np.all(self.degrees() % 2 == 0))

    def is_odd(self):
        return bool(np.all(self.degrees() % 2 == 1))

    def is_zero(self):
        return self.masks.size == 0

    def nilpotent(self):
        return self - self.body

    def to_dict(self):
        return {self.alg.mask_names(int(m)): complex(c)
                for m, c in zip(self.masks, self.coeffs)}

    def max_abs_diff(self, other):
        d = self - other
        return float(np.max(np.abs(d.coeffs))) if d.coeffs.size else 0.0

    def allclose(self, other, atol=1e-10):
        return self.max_abs_diff(other) <= atol

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, GrassmannElement):
            if other.alg is not self.alg:
                raise AlgebraMismatch("elements belong to different algebras")
            return other
        if np.isscalar(other):
            return self.alg.scalar(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return GrassmannElement._combine(self.alg, np.r_[self.masks, other.masks],
                                         np.r_[self.coeffs, other.coeffs])

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElement._raw(self.alg, self.masks.copy(), -self.coeffs)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, GrassmannElement):
            return g_mul(self, other)
        if np.isscalar(other):
            return g_scale(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return g_scale(self, other)
        return NotImplemented

    def __truediv__(self, other):
        if np.isscalar(other):
            return g_scale(self, 1.0 / other)
        return NotImplemented

    def __pow__(self, k):
        k = int(k)
        if k < 0:
            raise ValueError("negative powers: use g_inv")
        out = self.alg.scalar(1.0)
        for _ in range(k):
            out = out * self
        return out


def _fmt(c):
    c = complex(c)
    if c.imag == 0:
        return "%.6g" % c.real
    return "%.6g%+.6gj" % (c.real, c.imag)


def g_add(*elements):
    out = elements[0]
    for e in elements[1:]:
        out = out + e
    return out


def g_scale(x, c):
    c = complex(c)
    if c == 0:
        return x.alg.zero()
    return GrassmannElement._raw(x.alg, x.masks.copy(), x.coeffs * c)


def g_mul(a, b):
    """Product ``a b`` with canonical reordering signs."""
    if a.alg is not b.alg:
        raise AlgebraMismatch("elements belong to different algebras")
    alg = a.alg
    if a.masks.size == 0 or b.masks.size == 0:
        return alg.zero()
    ma = a.masks[:, None]
    mb = b.masks[None, :]
    ok = (ma & mb) == 0
    if not ok.any():
        return alg.zero()
    ia, ib = np.nonzero(ok)
    A, B = a.masks[ia], b.masks[ib]
    # transpositions: pairs (i in A, j in B) with i > j
    cnt = np.zeros(A.size, dtype=np.int64)
    for j in range(alg.m):
        bj = (B >> j) & 1
        if bj.any():
            cnt += bj * _popcount(A >> (j + 1))
    sign = 1 - 2 * (cnt & 1)
    return GrassmannElement._combine(alg, A | B, sign * a.coeffs[ia] * b.coeffs[ib])


def g_taylor(x, derivs):
    """``f(x) = sum_k f^(k)(a) / k! (x - a)^k`` where ``a`` is the body of `x`.

    `derivs` is a callable ``k -> f^(k)(a)`` or a sequence; the series
    terminates because ``x - a`` is nilpotent.
    """
    a = x.body
    nil = x - a
    get = derivs if callable(derivs) else (lambda k: derivs[k])
    out = x.alg.scalar(get(0))
    power = x.alg.scalar(1.0)
    k = 0
    while True:
        k += 1
        power = power * nil
        if power.is_zero():
            return out
        out = out + power * (get(k) / math.factorial(k))


def g_exp(x):
    """Exponential of an even element."""
    if not x.is_even():
        raise ValueError("g_exp needs an even element")
    e = np.exp(x.body)
    return g_taylor(x, lambda k: e)


def g_log(x):
    """Principal logarithm; the body must be non-zero."""
    a = x.body
    if a == 0:
        raise ValueError("log of an element with zero body")
    return g_taylor(x, lambda k: np.log(a) if k == 0
                    else (-1) ** (k + 1) * math.factorial(k - 1) / a**k)


def g_inv(x):
    """Multiplicative inverse; the body must be non-zero."""
    a = x.body
    if a == 0:
        raise ValueError("element with zero body is not invertible")
    return g_taylor(x, lambda k: (-1) ** k * math.factorial(k) / a ** (k + 1))


def _integrate_one(x, i):
    bit = np.int64(1) << i
    hit = (x.masks & bit) != 0
    masks = x.masks[hit]
    above = _popcount(masks >> (i + 1))
    sign = 1 - 2 * (above & 1)
    return GrassmannElement._combine(x.alg, masks & ~bit, sign * x.coeffs[hit])


def berezin_integrate(x, generators):
    """Integrate `x` against the written measure ``dg_0 dg_1 ...``.

    `generators` lists names (or indices) in the written order of the
    differentials; the leftmost acts first.  Generators not listed are left
    untouched.
    """
    out = x
    for g in generators:
        out = _integrate_one(out, x.alg._idx(g))
    return out


def substitute(x, mapping):
    """Replace generators by elements: ``mapping`` is ``name -> element``.

    Each monomial is rebuilt as the ordered product of the images of its
    generators (unmapped generators map to themselves).
    """
    alg = x.alg
    images = [mapping.get(n, None) for n in alg.names]
    images = [alg.gen(i) if im is None else im for i, im in enumerate(images)]
    out = alg.zero()
    for m, c in zip(x.masks, x.coeffs):
        term = alg.scalar(c)
        for i in range(alg.m):
            if m >> i & 1:
                term = term * images[i]
        out = out + term
    return out
