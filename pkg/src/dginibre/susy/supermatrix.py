"""Matrices over a Grassmann algebra and supermatrices.

Matrices are numpy object arrays of :class:`GrassmannElement`.  A
supermatrix ``F = [[A, chi], [eta, B]]`` has even blocks ``A`` (p x p) and
``B`` (q x q) and odd blocks ``chi`` (p x q) and ``eta`` (q x p); products
are ordinary block products with entries multiplied in order.
"""
from dataclasses import dataclass
import math

import numpy as np

from .grassmann import GrassmannElement, g_inv

__all__ = [
    "as_gmatrix", "gm_mul", "gm_add", "gm_det", "gm_inv", "gm_trace", "gm_numeric",
    "gm_max_abs_diff", "gm_exp_nilpotent", "SuperMatrix",
]


def as_gmatrix(alg, M):
    """Lift a numeric or mixed array to an object array of elements."""
    M = np.asarray(M, dtype=object)
    out = np.empty(M.shape, dtype=object)
    for idx, v in np.ndenumerate(M):
        out[idx] = v if isinstance(v, GrassmannElement) else alg.scalar(v)
    return out


def gm_mul(X, Y):
    n, k = X.shape
    k2, m = Y.shape
    if k != k2:
        raise ValueError("shape mismatch %r @ %r" % (X.shape, Y.shape))
    out = np.empty((n, m), dtype=object)
    for i in range(n):
        for j in range(m):
            acc = X[i, 0] * Y[0, j]
            for t in range(1, k):
                acc = acc + X[i, t] * Y[t, j]
            out[i, j] = acc
    return out


def gm_add(X, Y, sign=1):
    out = np.empty(X.shape, dtype=object)
    for idx in np.ndindex(X.shape):
        out[idx] = X[idx] + Y[idx] if sign > 0 else X[idx] - Y[idx]
    return out


def gm_numeric(X):
    """Body (numeric part) of every entry."""
    return np.array([[e.body for e in row] for row in X], dtype=complex).reshape(X.shape)


def gm_trace(X):
    acc = X[0, 0]
    for i in range(1, min(X.shape)):
        acc = acc + X[i, i]
    return acc


def gm_det(X):
    """Determinant of a matrix with even (mutually commuting) entries.

    Laplace expansion along the first row; intended for the small sizes the
    checks use.
    """
    n = X.shape[0]
    if X.shape != (n, n):
        raise ValueError("square matrix expected")
    if n == 1:
        return X[0, 0]
    if n == 2:
        return X[0, 0] * X[1, 1] - X[0, 1] * X[1, 0]
    acc = None
    for j in range(n):
        minor = np.delete(np.delete(X, 0, axis=0), j, axis=1)
        term = X[0, j] * gm_det(minor)
        if j % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def _nilpotent_series(alg, M, coeff, start):
    """``sum_{k >= start} coeff(k) M^k`` for a matrix with nilpotent entries."""
    n = M.shape[0]
    power = as_gmatrix(alg, np.eye(n))
    for _ in range(start):
        power = gm_mul(power, M)
    out = as_gmatrix(alg, np.zeros((n, n)))
    k = start
    while not all(e.is_zero() for e in power.flat):
        c = coeff(k)
        if c != 0:
            out = gm_add(out, _scale(power, c))
        power = gm_mul(power, M)
        k += 1
    return out


def _scale(X, c):
    out = np.empty(X.shape, dtype=object)
    for idx in np.ndindex(X.shape):
        out[idx] = X[idx] * c
    return out


def gm_inv(X):
    """Inverse through the numeric part: ``X^{-1} = sum_k (-X0^{-1} N)^k X0^{-1}``.

    Raises
    ------
    numpy.linalg.LinAlgError
        If the numeric part is singular.
    """
    alg = X.flat[0].alg
    X0 = gm_numeric(X)
    X0i = np.linalg.inv(X0)
    N = gm_add(X, as_gmatrix(alg, X0), sign=-1)
    M = gm_mul(as_gmatrix(alg, -X0i), N)
    series = _nilpotent_series(alg, M, lambda k: 1.0, 0)
    return gm_mul(series, as_gmatrix(alg, X0i))


def gm_max_abs_diff(X, Y):
    return max(x.max_abs_diff(y) for x, y in zip(X.flat, Y.flat))


def _check_parity(block, even, label):
    for e in block.flat:
        if e.is_zero():
            continue
        if even and not e.is_even():
            raise ValueError("%s block must have even entries" % label)
        if not even and not e.is_odd():
            raise ValueError("%s block must have odd entries" % label)


@dataclass(frozen=True)
class SuperMatrix:
    """``[[A, chi], [eta, B]]`` over a Grassmann algebra."""
    alg: object
    A: np.ndarray
    B: np.ndarray
    chi: np.ndarray
    eta: np.ndarray

    @classmethod
    def from_blocks(cls, alg, A, B, chi=None, eta=None, check=True):
        A = as_gmatrix(alg, np.atleast_2d(A))
        B = as_gmatrix(alg, np.atleast_2d(B))
        p, q = A.shape[0], B.shape[0]
        chi = as_gmatrix(alg, np.zeros((p, q)) if chi is None else np.asarray(chi, dtype=object).reshape(p, q))
        eta = as_gmatrix(alg, np.zeros((q, p)) if eta is None else np.asarray(eta, dtype=object).reshape(q, p))
        if check:
            _check_parity(A, True, "A")
            _check_parity(B, True, "B")
            _check_parity(chi, False, "chi")
            _check_parity(eta, False, "eta")
        return cls(alg, A, B, chi, eta)

    @classmethod
    def identity(cls, alg, p, q):
        return cls.from_blocks(alg, np.eye(p), np.eye(q))

    @property
    def p(self):
        return self.A.shape[0]

    @property
    def q(self):
        return self.B.shape[0]

    def full(self):
        top = np.concatenate([self.A, self.chi], axis=1)
        bot = np.concatenate([self.eta, self.B], axis=1)
        return np.concatenate([top, bot], axis=0)

    @classmethod
    def from_full(cls, alg, X, p):
        return cls(alg, X[:p, :p], X[p:, p:], X[:p, p:], X[p:, :p])

    def __matmul__(self, other):
        if (self.p, self.q) != (other.p, other.q):
            raise ValueError("block structures differ")
        return SuperMatrix.from_full(self.alg, gm_mul(self.full(), other.full()), self.p)

    def numeric(self):
        return gm_numeric(self.full())

    def sdet(self):
        """``det(A - chi B^{-1} eta) / det B``.

        Raises
        ------
        numpy.linalg.LinAlgError
            If the numeric part of ``B`` is singular.
        """
        Binv = gm_inv(self.B)
        schur = gm_add(self.A, gm_mul(gm_mul(self.chi, Binv), self.eta), sign=-1)
        return gm_det(schur) * g_inv(gm_det(self.B))

    def str(self):
        """Supertrace ``Tr A - Tr B``."""
        return gm_trace(self.A) - gm_trace(self.B)

    def log_parts(self):
        """Factor ``F = F0 (I + M)`` with ``F0`` the numeric part.

        Returns ``(F0, M, L)`` with ``L = log(I + M)`` from the terminating
        Mercator series.
        """
        F0 = self.numeric()
        p = self.p
        if abs(np.linalg.det(F0[:p, :p])) == 0 or abs(np.linalg.det(F0[p:, p:])) == 0:
            raise ValueError("log needs invertible numeric diagonal blocks")
        F0inv = np.linalg.inv(F0)
        N = gm_add(self.full(), as_gmatrix(self.alg, F0), sign=-1)
        M = gm_mul(as_gmatrix(self.alg, F0inv), N)
        L = _nilpotent_series(self.alg, M, lambda k: (-1) ** (k + 1) / k, 1)
        return F0, M, L

    def str_log(self):
        """``Str log F = log det A0 - log det B0 + Str log(I + M)``."""
        F0, _, L = self.log_parts()
        p = self.p
        sl = np.log(np.linalg.det(F0[:p, :p])) - np.log(np.linalg.det(F0[p:, p:]))
        Ls = SuperMatrix.from_full(self.alg, L, p)
        return Ls.str() + sl


def gm_exp_nilpotent(alg, L):
    """``exp(L)`` for a matrix with nilpotent entries."""
    return _nilpotent_series(alg, L, lambda k: 1.0 / math.factorial(k), 0)

