"""Verifiers for the Gaussian, superdeterminant, Hubbard-Stratonovich and
change-of-variables identities.

Each check returns a plain dict with the two sides (or their largest
coefficient difference), the tolerance used and a ``passed`` flag.
"""
from itertools import permutations, product
import math

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import integrate

from .grassmann import GrassmannAlgebra, berezin_integrate, g_exp, substitute
from .supermatrix import (SuperMatrix, as_gmatrix, gm_exp_nilpotent, gm_max_abs_diff,
                          gm_mul, gm_add)

__all__ = [
    "gaussian_complex_check", "gaussian_grassmann", "gaussian_grassmann_check",
    "super_gaussian_check", "sdet_properties_check", "hs_grassmann_check",
    "hs_scalar_fixture", "hs_bosonic_check", "berezinian_check", "shift_odd_check",
    "shift_even_check", "random_odd", "random_even_nilpotent", "super_gaussian_case",
    "random_supermatrix", "sdet_case",
]

GAUSSIAN_CAP = 6


def _rng(seed):
    return np.random.default_rng(seed)


def _crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hpd(rng, k, shift=1.0):
    X = _crandn(rng, k, k)
    return X @ X.conj().T / k + shift * np.eye(k)


def random_odd(alg, names, rng, cubic=True):
    """Random odd element: linear in `names`, plus one cubic term if possible."""
    out = alg.zero()
    for n in names:
        out = out + alg.gen(n) * complex(*rng.standard_normal(2))
    if cubic and len(names) >= 3:
        pick = rng.choice(len(names), 3, replace=False)
        out = out + alg.monomial([names[i] for i in pick], complex(*rng.standard_normal(2)))
    return out


def random_even_nilpotent(alg, names, rng, terms=3):
    out = alg.zero()
    for _ in range(terms):
        pick = rng.choice(len(names), 2, replace=False)
        out = out + alg.monomial([names[i] for i in pick], complex(*rng.standard_normal(2)))
    return out


# -- bosonic Gaussian --------------------------------------------------------

def gaussian_complex_check(A):
    """``int exp(-sum A_jk z_j conj(z_k)) prod d^2 z_j / pi = 1 / det A``.

    Independent route: the exponent is the real quadratic form of the
    stacked real and imaginary parts, so the integral is
    ``det(Q)^{-1/2}`` with ``Q`` the real symmetric 2k x 2k matrix of that
    form; for k = 1 a direct 2D quadrature is added.
    """
    A = np.asarray(A, dtype=complex)
    k = A.shape[0]
    if not np.allclose(A, A.conj().T) or np.min(np.linalg.eigvalsh(A)) <= 0:
        raise ValueError("A must be Hermitian positive definite")
    # z^T A conj(z) = v^T Q v with v = (x, y)
    Ar, Ai = A.real, A.imag
    Q = np.block([[Ar, Ai], [-Ai, Ar]])
    Q = 0.5 * (Q + Q.T)
    real_route = 1.0 / math.sqrt(np.linalg.det(Q))
    out = {"k": k, "rhs": float(1.0 / np.linalg.det(A).real), "real_form": real_route}
    if k == 1:
        a = A[0, 0].real
        val, _ = integrate.dblquad(lambda y, x: math.exp(-a * (x * x + y * y)) / math.pi,
                                   -np.inf, np.inf, -np.inf, np.inf, epsabs=1e-13)
        out["quadrature"] = val
    diffs = [abs(v - out["rhs"]) / abs(out["rhs"])
             for key, v in out.items() if key in ("real_form", "quadrature")]
    out["rel_err"] = max(diffs)
    out["passed"] = out["rel_err"] < 1e-8
    return out


# -- Grassmann Gaussian ------------------------------------------------------

def gaussian_grassmann(A, cap=GAUSSIAN_CAP):
    """``int exp(-sum A_jk psibar_j psi_k) prod_j dpsibar_j dpsi_j`` computed
    symbolically."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if n > cap:
        raise ValueError("n = %d exceeds the cap %d (algebra of size 2^%d)" % (n, cap, 2 * n))
    names = []
    for j in range(n):
        names += ["pb%d" % j, "p%d" % j]
    alg = GrassmannAlgebra(names)
    expo = alg.zero()
    for j in range(n):
        for k in range(n):
            if A[j, k] != 0:
                expo = expo - A[j, k] * (alg.gen("pb%d" % j) * alg.gen("p%d" % k))
    val = berezin_integrate(g_exp(expo), names)
    return val.body


def gaussian_grassmann_check(A, tol=1e-12):
    lhs = gaussian_grassmann(A)
    rhs = complex(np.linalg.det(np.asarray(A, dtype=complex)))
    rel = abs(lhs - rhs) / max(abs(rhs), 1e-300)
    return {"n": int(np.shape(A)[0]), "lhs": lhs, "rhs": rhs, "rel_err": rel,
            "passed": rel <= tol}


# -- super-Gaussian and Sdet -------------------------------------------------

def _wick(Binv, a_idx, b_idx):
    """``E[prod x_a prod conj(x_b)]`` for the Gaussian with covariance
    ``E[x_a conj(x_b)] = Binv[a, b]`` (a permanent)."""
    if len(a_idx) != len(b_idx):
        return 0j
    if not a_idx:
        return 1.0 + 0j
    tot = 0j
    for perm in permutations(range(len(b_idx))):
        term = 1.0 + 0j
        for i, j in enumerate(perm):
            term *= Binv[a_idx[i], b_idx[j]]
        tot += term
    return tot


def _expand_linear(alg, coeffs_by_var, k):
    """``exp(sum_l y_l E_l)`` as a dict ``multi-index -> element`` for even
    nilpotent ``E_l`` and commuting scalars ``y_l``."""
    per = []
    for l in range(k):
        E = coeffs_by_var[l]
        terms, power, d = {}, alg.scalar(1.0), 0
        while not power.is_zero():
            terms[d] = power * (1.0 / math.factorial(d))
            power = power * E
            d += 1
        per.append(terms)
    out = {}
    for combo in product(*[list(t.items()) for t in per]):
        idx = tuple(c[0] for c in combo)
        el = combo[0][1]
        for c in combo[1:]:
            el = el * c[1]
        out[idx] = el
    return out


def super_gaussian_check(A, B, chi, eta, alg, psi_names, tol=1e-10):
    """Both sides of the combined Gaussian integral over ``theta = (psi, x)``.

    ``-theta^* F theta = -psibar A psi - psibar chi x - xbar eta psi - xbar B x``.
    The Grassmann exponential is expanded with polynomial coefficients in
    ``x, xbar``; the ``x`` moments are evaluated with Wick's theorem
    (normalization ``1/det B``) and the ``psi`` part by Berezin integration.
    The right side is ``Sdet F`` from the Schur complement formula.

    Parameters
    ----------
    A, B : (k, k) complex arrays
        Hermitian, ``B`` positive definite.
    chi, eta : (k, k) object arrays of odd elements of `alg`
        Must not involve the integration generators.
    psi_names : list of (psibar_name, psi_name)
        Integration generators, one pair per component.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    k = A.shape[0]
    if np.min(np.linalg.eigvalsh(0.5 * (B + B.conj().T))) <= 0:
        raise ValueError("B must be positive definite")
    pb = [alg.gen(a) for a, _ in psi_names]
    ps = [alg.gen(b) for _, b in psi_names]
    # E_l multiplies x_l, F_l multiplies xbar_l
    E = [sum((-(pb[j] * chi[j, l]) for j in range(k)), alg.zero()) for l in range(k)]
    Fm = [sum((-(eta[l, j] * ps[j]) for j in range(k)), alg.zero()) for l in range(k)]
    ex = _expand_linear(alg, E, k)
    exb = _expand_linear(alg, Fm, k)
    Binv = np.linalg.inv(B)
    detB = np.linalg.det(B)
    mixed = alg.zero()
    for ia, ela in ex.items():
        a_idx = [l for l in range(k) for _ in range(ia[l])]
        for ib, elb in exb.items():
            b_idx = [l for l in range(k) for _ in range(ib[l])]
            w = _wick(Binv, a_idx, b_idx)
            if w != 0:
                mixed = mixed + (ela * elb) * (w / detB)
    quad = alg.zero()
    for j in range(k):
        for l in range(k):
            quad = quad - A[j, l] * (pb[j] * ps[l])
    integrand = g_exp(quad) * mixed
    measure = [n for pair in psi_names for n in pair]
    lhs = berezin_integrate(integrand, measure)
    F = SuperMatrix.from_blocks(alg, A, B, chi, eta)
    rhs = F.sdet()
    diff = _scaled_diff(lhs, rhs)
    return {"k": k, "lhs": lhs, "rhs": rhs, "max_abs_diff": lhs.max_abs_diff(rhs),
            "max_scaled_diff": diff, "passed": diff <= tol}


def _scaled_diff(a, b):
    """Largest coefficient difference divided by ``max(1, largest |coeff|)``."""
    scale = max([1.0] + [float(np.max(np.abs(x.coeffs))) for x in (a, b) if x.coeffs.size])
    return a.max_abs_diff(b) / scale


def sdet_properties_check(F1, F2, tol=1e-10):
    """Multiplicativity, ``exp(Str log F) = Sdet F`` and cyclicity of Str.

    Differences are coefficientwise and measured relative to
    ``max(1, largest coefficient)``: products over eight generators reach
    coefficients of order 1e6, where an absolute 1e-10 is below rounding.
    """
    s12 = (F1 @ F2).sdet()
    prod_ = F1.sdet() * F2.sdet()
    mult = _scaled_diff(s12, prod_)
    explog = []
    series = []
    for F in (F1, F2):
        explog.append(_scaled_diff(g_exp(F.str_log()), F.sdet()))
        _, M, L = F.log_parts()
        eye = as_gmatrix(F.alg, np.eye(M.shape[0]))
        series.append(gm_max_abs_diff(gm_exp_nilpotent(F.alg, L), gm_add(eye, M)))
    cyc = _scaled_diff((F1 @ F2).str(), (F2 @ F1).str())
    worst = max([mult, cyc] + explog + series)
    return {"multiplicativity": mult, "exp_str_log": max(explog),
            "log_series_inverse": max(series), "str_cyclic": cyc,
            "max_abs_diff_absolute": s12.max_abs_diff(prod_),
            "max_scaled_diff": worst, "passed": worst <= tol}


# -- Hubbard-Stratonovich ----------------------------------------------------

def hs_grassmann_check(p, pairing="conjugate", R=None, T=None):
    """``exp(Tr R T) = int exp(-Tr nu nu^* + Tr nu R + Tr nu^* T) dnu``.

    ``(nu^*)_{jk} = nubar_{kj}``.  `pairing` selects the measure:
    ``"conjugate"`` uses ``prod_{j,k} dnu_{jk} dnubar_{jk}``, ``"written"``
    uses ``prod_{j,k} dnu_{kj} dnubar_{jk}`` literally.  By default ``R`` and
    ``T`` are matrices of distinct ambient generators; the comparison is
    coefficientwise and exact.
    """
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2 (larger algebras are too big)")
    idx = [(j, k) for j in range(p) for k in range(p)]
    names = (["R%d%d" % jk for jk in idx] + ["T%d%d" % jk for jk in idx]
             + ["n%d%d" % jk for jk in idx] + ["nb%d%d" % jk for jk in idx])
    alg = GrassmannAlgebra(names)
    g = alg.gen
    if R is None:
        R = {jk: g("R%d%d" % jk) for jk in idx}
    if T is None:
        T = {jk: g("T%d%d" % jk) for jk in idx}
    if not isinstance(R, dict):
        R = {jk: R[jk] for jk in idx}
        T = {jk: T[jk] for jk in idx}
    nu = {jk: g("n%d%d" % jk) for jk in idx}
    nub = {jk: g("nb%d%d" % jk) for jk in idx}

    lhs_expo = alg.zero()
    expo = alg.zero()
    for j, k in idx:
        lhs_expo = lhs_expo + R[j, k] * T[k, j]
        expo = expo - nu[j, k] * nub[j, k]          # Tr nu nu^*
        expo = expo + nu[j, k] * R[k, j]            # Tr nu R
        expo = expo + nub[k, j] * T[k, j]           # Tr nu^* T
    if pairing == "conjugate":
        measure = [nm for j, k in idx for nm in ("n%d%d" % (j, k), "nb%d%d" % (j, k))]
    elif pairing == "written":
        measure = [nm for j, k in idx for nm in ("n%d%d" % (k, j), "nb%d%d" % (j, k))]
    else:
        raise ValueError("pairing must be 'conjugate' or 'written'")
    lhs = g_exp(lhs_expo)
    rhs = berezin_integrate(g_exp(expo), measure)
    diff = lhs.max_abs_diff(rhs)
    neg = lhs.max_abs_diff(-rhs)
    return {"p": p, "pairing": pairing, "terms": len(lhs.masks),
            "max_abs_diff": diff, "max_abs_diff_negated": neg,
            "relation": "equal" if diff == 0 else ("negated" if neg == 0 else "different"),
            "passed": diff == 0}


def hs_scalar_fixture():
    """Scalar odd form ``exp(-rho tau) = int exp(rho chi + tau eta + chi eta) deta dchi``
    under the engine's integration convention."""
    alg = GrassmannAlgebra(["rho", "tau", "chi", "eta"])
    rho, tau, chi, eta = alg.gens("rho", "tau", "chi", "eta")
    lhs = g_exp(-(rho * tau))
    rhs = berezin_integrate(g_exp(rho * chi + tau * eta + chi * eta), ["eta", "chi"])
    diff = lhs.max_abs_diff(rhs)
    return {"lhs": lhs, "rhs": rhs, "max_abs_diff": diff, "passed": diff == 0}


def hs_bosonic_check(p, A, B, samples=200000, seed=0, tol=1e-12):
    """``exp(Tr AB) = int exp(Tr A W^* + Tr B W - Tr W W^*) dW``, ``dW`` the flat
    measure over entries divided by ``pi`` per entry.

    Analytic route: the exponent splits over entries ``w_jk`` as
    ``A_jk conj(w_jk) + B_kj w_jk - |w_jk|^2``; completing the square gives
    ``exp(A_jk B_kj)`` per entry.  Monte Carlo route: average of
    ``exp(Tr A W^* + Tr B W)`` over standard complex Gaussian ``W``.
    """
    A = np.asarray(A, dtype=complex).reshape(p, p)
    B = np.asarray(B, dtype=complex).reshape(p, p)
    target = complex(np.exp(np.trace(A @ B)))
    analytic = complex(np.prod(np.exp(A * B.T)))
    rel = abs(analytic - target) / abs(target)
    rng = _rng(seed)
    W = (rng.standard_normal((samples, p, p)) + 1j * rng.standard_normal((samples, p, p))) / math.sqrt(2)
    vals = np.exp(np.einsum("jk,skj->s", A, W.conj().transpose(0, 2, 1))
                  + np.einsum("kj,sjk->s", B, W))
    mc = complex(vals.mean())
    se = float(np.sqrt(np.var(vals.real) + np.var(vals.imag)) / math.sqrt(samples))
    zscore = abs(mc - target) / se if se > 0 else (0.0 if mc == target else np.inf)
    return {"p": p, "target": target, "analytic": analytic, "analytic_rel_err": rel,
            "mc": mc, "mc_se": se, "mc_z": float(zscore),
            "passed": rel <= tol and zscore <= 4.0}


# -- change of variables -----------------------------------------------------

def _random_poly(alg, names, rng, density=1.0):
    """Random polynomial over `names` including the top monomial."""
    out = alg.zero()
    k = len(names)
    for mask in range(1 << k):
        if mask != (1 << k) - 1 and rng.random() > density:
            continue
        sub = [names[i] for i in range(k) if mask >> i & 1]
        out = out + alg.monomial(sub, complex(*rng.standard_normal(2)))
    return out


def berezinian_check(A, f=None, seed=0, tol=1e-10):
    """``int f(A zeta) dzeta = det A int f(chi) dchi`` with
    ``dchi = dchi_k ... dchi_1``.

    `f` is an element over generators ``c0..c{k-1}`` (a random polynomial by
    default); substitution maps ``c_i -> sum_j A_ij z_j``.
    """
    A = np.asarray(A, dtype=complex)
    k = A.shape[0]
    if abs(np.linalg.det(A)) < 1e-300:
        raise ValueError("A is singular")
    cn = ["c%d" % i for i in range(k)]
    zn = ["z%d" % i for i in range(k)]
    alg = GrassmannAlgebra(cn + zn)
    if f is None:
        f = _random_poly(alg, cn, _rng(seed))
    elif f.alg is not alg:
        f = _rebase(f, alg)
    image = {cn[i]: sum((A[i, j] * alg.gen(zn[j]) for j in range(k)), alg.zero())
             for i in range(k)}
    lhs = berezin_integrate(substitute(f, image), zn[::-1])
    rhs = berezin_integrate(f, cn[::-1]) * complex(np.linalg.det(A))
    diff = lhs.max_abs_diff(rhs)
    return {"k": k, "lhs": lhs.body, "rhs": rhs.body, "det": complex(np.linalg.det(A)),
            "max_abs_diff": diff, "passed": diff <= tol}


def _rebase(f, alg):
    out = alg.zero()
    for names, c in f.to_dict().items():
        out = out + alg.monomial(names, c)
    return out


def shift_odd_check(k, seed=0, ambient=4, tol=1e-10):
    """``int f(chi + psi) dchi = int f(chi) dchi`` for a constant odd vector
    ``psi`` built from `ambient` extra generators (linear and cubic terms)."""
    rng = _rng(seed)
    cn = ["c%d" % i for i in range(k)]
    an = ["a%d" % i for i in range(ambient)]
    alg = GrassmannAlgebra(cn + an)
    f = _random_poly(alg, cn, rng)
    shift = {c: alg.gen(c) + random_odd(alg, an, rng) for c in cn}
    measure = cn[::-1]
    lhs = berezin_integrate(substitute(f, shift), measure)
    rhs = berezin_integrate(f, measure)
    diff = lhs.max_abs_diff(rhs)
    return {"k": k, "lhs": lhs, "rhs": rhs, "max_abs_diff": diff, "passed": diff <= tol}


def _poly_D(c, axis):
    """Coefficients of ``(d/dx_axis - x_axis) p`` for ``p`` given by the
    coefficient array `c` (so that ``D(p e^{-|x|^2/2}) = (D p) e^{-|x|^2/2}``)."""
    shape = list(c.shape)
    shape[axis] += 1
    out = np.zeros(shape)
    n = c.shape[axis]
    k = np.arange(1, n).reshape([-1 if i == axis else 1 for i in range(c.ndim)])
    lo = [slice(None)] * c.ndim
    hi = [slice(None)] * c.ndim
    lo[axis], hi[axis] = slice(0, n - 1), slice(1, n)
    out[tuple(lo)] += k * c[tuple(hi)]
    hi[axis] = slice(1, n + 1)
    out[tuple(hi)] -= c
    return out


def _poly_eval(c, x):
    if c.ndim == 1:
        return P.polyval(x[0], c)
    return P.polyval2d(x[0], x[1], c)


def shift_even_check(k=2, seed=0, ambient=4, tol=1e-9):
    """``int_{R^k} f(x + a) dx = int_{R^k} f(x) dx`` for an even vector ``a``
    with nilpotent entries.

    ``f = p(x) exp(-|x|^2/2)`` with a random polynomial ``p``.  The shifted
    integrand is the terminating Taylor series
    ``sum_alpha a^alpha / alpha! d^alpha f(x)``; each derivative is again a
    polynomial times the Gaussian and is integrated by adaptive quadrature.
    """
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    rng = _rng(seed)
    an = ["a%d" % i for i in range(ambient)]
    alg = GrassmannAlgebra(an)
    shifts = [random_even_nilpotent(alg, an, rng, terms=2) for _ in range(k)]
    deg = 3
    c = rng.standard_normal((deg + 1,) * k)
    L = 12.0

    def quad(coef):
        if k == 1:
            return integrate.quad(lambda x: _poly_eval(coef, [x]) * math.exp(-x * x / 2),
                                  -L, L, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
        return integrate.dblquad(
            lambda y, x: _poly_eval(coef, [x, y]) * math.exp(-(x * x + y * y) / 2),
            -L, L, -L, L, epsabs=1e-12, epsrel=1e-12)[0]

    # powers of each shift component until they vanish
    powers = []
    for s in shifts:
        pw, cur = [], alg.scalar(1.0)
        while not cur.is_zero():
            pw.append(cur)
            cur = cur * s
        powers.append(pw)
    lhs = alg.zero()
    orders = []
    for alpha in product(*[range(len(pw)) for pw in powers]):
        coef = c
        for axis, a in enumerate(alpha):
            for _ in range(a):
                coef = _poly_D(coef, axis)
        mono = alg.scalar(1.0 / np.prod([math.factorial(a) for a in alpha]))
        for axis, a in enumerate(alpha):
            mono = mono * powers[axis][a]
        val = quad(coef)
        orders.append((alpha, val))
        lhs = lhs + mono * val
    rhs = alg.scalar(quad(c))
    diff = lhs.max_abs_diff(rhs)
    return {"k": k, "lhs": lhs, "rhs": rhs, "derivative_integrals": orders,
            "max_abs_diff": diff, "passed": diff <= tol}


# -- random fixtures ---------------------------------------------------------

def super_gaussian_case(k, seed=0, odd=True):
    """Random instance for :func:`super_gaussian_check`: HPD ``A, B`` and odd
    blocks whose entries are distinct ambient generators."""
    rng = _rng(seed)
    amb = ["x%d%d" % (j, l) for j in range(k) for l in range(k)]
    amb += ["y%d%d" % (l, j) for l in range(k) for j in range(k)]
    psi = [("pb%d" % j, "p%d" % j) for j in range(k)]
    alg = GrassmannAlgebra(amb + [n for pair in psi for n in pair])
    A = random_hpd(rng, k)
    B = random_hpd(rng, k)
    chi = np.empty((k, k), dtype=object)
    eta = np.empty((k, k), dtype=object)
    for j in range(k):
        for l in range(k):
            chi[j, l] = alg.gen("x%d%d" % (j, l)) if odd else alg.zero()
            eta[l, j] = alg.gen("y%d%d" % (l, j)) if odd else alg.zero()
    return dict(A=A, B=B, chi=chi, eta=eta, alg=alg, psi_names=psi)


def random_supermatrix(alg, p, q, odd_names, rng, nilpotent_even=True):
    """Random supermatrix over `alg`: numeric diagonal blocks near the
    identity (plus even nilpotent parts) and random odd blocks."""
    def even(shape, base):
        M = as_gmatrix(alg, base)
        if nilpotent_even:
            for idx in np.ndindex(shape):
                M[idx] = M[idx] + random_even_nilpotent(alg, odd_names, rng, terms=1)
        return M
    A = even((p, p), np.eye(p) + 0.3 * _crandn(rng, p, p))
    B = even((q, q), np.eye(q) + 0.3 * _crandn(rng, q, q))
    chi = np.array([[random_odd(alg, odd_names, rng) for _ in range(q)] for _ in range(p)],
                   dtype=object)
    eta = np.array([[random_odd(alg, odd_names, rng) for _ in range(p)] for _ in range(q)],
                   dtype=object)
    return SuperMatrix.from_blocks(alg, A, B, chi, eta)


def sdet_case(p=2, q=2, ambient=8, seed=0):
    rng = _rng(seed)
    names = ["g%d" % i for i in range(ambient)]
    alg = GrassmannAlgebra(names)
    return random_supermatrix(alg, p, q, names, rng), random_supermatrix(alg, p, q, names, rng)
