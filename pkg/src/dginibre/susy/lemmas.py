"""Numerical checks of the determinant inequality and the 2 x 2 change of
variables lemmas.

Measures: ``dA`` on 2 x 2 Hermitian matrices is the flat measure
``dA11 dA22 dRe A12 dIm A12``; ``dW`` on 2 x 2 complex matrices is the
flat measure over the 8 real coordinates; ``dU`` is Haar measure on U(2)
with total mass `haar_volume` (1 = normalized).

For the flat Hermitian measure with normalized Haar measure the eigenvalue
Jacobian is ``pi (mu1 - mu2)^2`` on ordered eigenvalues ``mu1 > mu2``.
"""
import math

import numpy as np
from scipy import integrate

__all__ = [
    "det_M", "det_m_inequality_check", "det_m_sgrid", "jacobian_square_check",
    "jacobian_polar_check", "HERMITIAN_JACOBIAN", "STATED_HERMITIAN_JACOBIAN",
]

HERMITIAN_JACOBIAN = math.pi
STATED_HERMITIAN_JACOBIAN = 2 * math.pi


def det_M(t1, t2, S, lam):
    """``det [[T + S, lam I], [lam I, T - S]]`` for ``T = diag(t1, t2)``,
    vectorized over leading dimensions."""
    t1, t2, lam = np.broadcast_arrays(*[np.asarray(x, dtype=complex) for x in (t1, t2, lam)])
    S = np.asarray(S, dtype=complex)
    shape = np.broadcast_shapes(t1.shape, S.shape[:-2])
    M = np.zeros(shape + (4, 4), dtype=complex)
    T = np.zeros(shape + (2, 2), dtype=complex)
    T[..., 0, 0] = t1
    T[..., 1, 1] = t2
    M[..., :2, :2] = T + S
    M[..., 2:, 2:] = T - S
    M[..., 0, 2] = M[..., 1, 3] = M[..., 2, 0] = M[..., 3, 1] = lam
    return np.linalg.det(M)


def _random_hermitian(rng, size, scale):
    X = rng.standard_normal((size, 2, 2)) + 1j * rng.standard_normal((size, 2, 2))
    return scale[:, None, None] * 0.5 * (X + X.conj().transpose(0, 2, 1))


def _log_uniform(rng, size, lo=-3.0, hi=3.0):
    return 10.0 ** rng.uniform(lo, hi, size)


def det_m_inequality_check(samples=100000, interior=1000, seed=0, slack=1e-12):
    """``|det M(T, S, lam)| >= |det M(T, 0, lam)|`` on the boundary rays.

    ``t1, t2`` lie on the rays ``arg t = pi/4`` and ``arg t = 3 pi/4`` (ray
    chosen independently per coordinate), moduli, ``lam`` and the scale of
    the Hermitian ``S`` are log-uniform over six decades.  A further
    `interior` samples take ``arg t`` uniform in ``(pi/4, 3 pi/4)``.

    The slack is relative: a violation needs
    ``|det M(S)| < |det M(0)| - slack * max(1, |det M(0)|)``.
    """
    rng = np.random.default_rng(seed)

    def sweep(n, boundary):
        if boundary:
            ang = np.where(rng.random((n, 2)) < 0.5, np.pi / 4, 3 * np.pi / 4)
        else:
            ang = rng.uniform(np.pi / 4, 3 * np.pi / 4, (n, 2))
        t = _log_uniform(rng, (n, 2)) * np.exp(1j * ang)
        lam = _log_uniform(rng, n)
        S = _random_hermitian(rng, n, _log_uniform(rng, n))
        d1 = np.abs(det_M(t[:, 0], t[:, 1], S, lam))
        d0 = np.abs(det_M(t[:, 0], t[:, 1], np.zeros((n, 2, 2)), lam))
        scale = np.maximum(1.0, d0)
        margin = (d1 - d0) / scale
        return int(np.sum(margin < -slack)), float(np.min(margin))

    vb, mb = sweep(samples, True)
    vi, mi = sweep(interior, False)
    return {"samples": samples, "interior_samples": interior,
            "violations": vb, "worst_margin": mb,
            "interior_violations": vi, "interior_worst_margin": mi,
            "slack": slack, "passed": vb == 0 and vi == 0}


def det_m_sgrid(s_values, lam=1.0):
    """``t1 = t2 = e^{i pi/4}``, ``S = diag(s, -s)``: returns
    ``(|det M(S)|, |det M(0)|)`` along the grid."""
    s = np.asarray(s_values, dtype=float)
    t = np.exp(1j * np.pi / 4)
    S = np.zeros(s.shape + (2, 2), dtype=complex)
    S[..., 0, 0] = s
    S[..., 1, 1] = -s
    d1 = np.abs(det_M(t, t, S, lam))
    d0 = np.abs(det_M(t, t, np.zeros((2, 2)), lam))
    return d1, np.broadcast_to(d0, d1.shape)


# -- change of variables lemmas ---------------------------------------------

_TEST_FUNCTIONS = {
    # phi(mu1, mu2) for unitarily invariant f
    "exp": lambda m1, m2: math.exp(-(m1 + m2)),
    "exp2": lambda m1, m2: math.exp(-2 * (m1 + m2)),
    "zero": lambda m1, m2: 0.0,
}


def _eig2(a, c, r):
    """Eigenvalues of [[a, b], [conj b, c]] with |b| = r."""
    h = 0.5 * (a + c)
    d = math.sqrt(0.25 * (a - c) ** 2 + r * r)
    return h + d, h - d


def _flat_positive(g, tol):
    """``int_{H_2^+} g(a, c, r) dA`` with ``b = r e^{i phi}``:
    ``2 pi int_0^inf int_0^inf int_0^sqrt(ac) g r dr dc da``."""
    val, err = integrate.tplquad(lambda r, c, a: g(a, c, r) * r,
                                 0, np.inf, 0, np.inf, 0, lambda a, c: math.sqrt(a * c),
                                 epsabs=tol, epsrel=tol)
    return 2 * math.pi * val


def _eigen_route(g, constant, tol):
    """``constant * int_{mu1 > mu2 > 0} (mu1 - mu2)^2 g(mu1, mu2)``."""
    val, _ = integrate.dblquad(lambda m2, m1: (m1 - m2) ** 2 * g(m1, m2),
                               0, np.inf, 0, lambda m1: m1, epsabs=tol, epsrel=tol)
    return constant * val


def jacobian_square_check(test_fn_id="exp", tol=1e-10):
    """``int_{H2+} f(A) dA = 4 int_{H2+} (Tr B)^2 det B f(B^2) dB``.

    Each side is evaluated twice: by 3D quadrature in the flat coordinates
    ``(a, c, |b|)`` and by the eigenvalue reduction with the Jacobian
    ``pi (mu1 - mu2)^2``.  ``rel_err`` is the largest relative spread among
    the four numbers.  Also reported: the value the eigenvalue route gives
    with the Jacobian constant ``2 pi`` instead.
    """
    if test_fn_id not in _TEST_FUNCTIONS:
        raise ValueError("unknown test function %r (expected one of %s)"
                         % (test_fn_id, ", ".join(_TEST_FUNCTIONS)))
    phi = _TEST_FUNCTIONS[test_fn_id]

    def lhs_flat(a, c, r):
        return phi(*_eig2(a, c, r))

    def rhs_flat(a, c, r):
        m1, m2 = _eig2(a, c, r)
        return 4 * (a + c) ** 2 * (a * c - r * r) * phi(m1 * m1, m2 * m2)

    lf = _flat_positive(lhs_flat, tol)
    rf = _flat_positive(rhs_flat, tol)
    le = _eigen_route(phi, HERMITIAN_JACOBIAN, tol)
    re_ = _eigen_route(lambda m1, m2: 4 * (m1 + m2) ** 2 * m1 * m2 * phi(m1 * m1, m2 * m2),
                       HERMITIAN_JACOBIAN, tol)
    vals = np.array([lf, rf, le, re_])
    scale = np.max(np.abs(vals))
    rel = float((vals.max() - vals.min()) / scale) if scale > 0 else 0.0
    out = {"test_fn": test_fn_id, "lhs": lf, "rhs": rf, "lhs_eigen": le, "rhs_eigen": re_,
           "rel_err": rel, "passed": rel < 1e-6,
           "lhs_eigen_stated_constant": le * STATED_HERMITIAN_JACOBIAN / HERMITIAN_JACOBIAN}
    if test_fn_id == "exp2":
        # A -> A/2 scales the flat 4-dimensional measure by 2^-4
        ref = jacobian_square_check("exp", tol)["lhs"] / 16.0
        out["scaling_reference"] = ref
        out["scaling_rel_err"] = abs(lf - ref) / ref
        out["passed"] = out["passed"] and out["scaling_rel_err"] < 1e-6
    return out


def jacobian_polar_check(scale=1.0, haar_volume=1.0, tol=1e-12):
    """``int f(W) dW = 2 pi^3 int_{H2+} (Tr L)^2 det L dL int_{U(2)} f(L U) dU``
    for ``f(W) = exp(-Tr W W^* / scale^2)``.

    The left side is ``pi^4 scale^8`` (four complex Gaussians).  Since
    ``f(L U) = exp(-Tr L^2 / scale^2)`` the U integral contributes
    `haar_volume`, and the Hermitian integral is evaluated by flat 3D
    quadrature and, independently, by the eigenvalue reduction.

    Also reported: ``constant_needed``, the prefactor that would make the
    right side equal the left side.
    """
    s2 = scale * scale
    lhs = math.pi ** 4 * scale ** 8

    def g_flat(a, c, r):
        return (a + c) ** 2 * (a * c - r * r) * math.exp(-(a * a + c * c + 2 * r * r) / s2)

    I_flat = _flat_positive(g_flat, tol)
    I_eig = _eigen_route(lambda m1, m2: (m1 + m2) ** 2 * m1 * m2 * math.exp(-(m1 * m1 + m2 * m2) / s2),
                         HERMITIAN_JACOBIAN, tol)
    rhs = 2 * math.pi ** 3 * haar_volume * I_flat
    rel = abs(rhs - lhs) / lhs
    return {"scale": scale, "haar_volume": haar_volume, "lhs": lhs, "rhs": rhs,
            "hermitian_integral": I_flat, "hermitian_integral_eigen": I_eig,
            "routes_rel_err": abs(I_flat - I_eig) / abs(I_flat),
            "constant_needed": lhs / (haar_volume * I_flat),
            "rel_err": rel, "passed": rel < 1e-8}
