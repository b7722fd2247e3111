"""Deterministic equivalents of a deformation ``A0`` at a point ``z``.

Everything here is a function of the singular value decomposition
``A0 - z = U diag(s) V^*``.  With ``lambda_k^2 = s_k^2`` (the eigenvalues of
``Y0(z) = (A0 - z)(A0 - z)^*``) the fixed point ``u_*`` solves

    (1/n) sum_k 1 / (u^2 + lambda_k^2) = 1,

and ``G = (A_z A_z^* + u_*^2)^{-1} = U D U^*``,
``G_* = (A_z^* A_z + u_*^2)^{-1} = V D V^*`` with
``D = diag(1 / (s^2 + u_*^2))``.  All traces below are evaluated in that
basis, so no ill-conditioned matrix is ever inverted.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.linalg import schur
from scipy.linalg.lapack import zpotrf, ztrtri
from scipy.optimize import brentq
from skimage.measure import find_contours

__all__ = [
    "OutsideBulk", "ShiftedSpectrum", "DetEquivParams", "AssumptionReport",
    "BoundaryScan", "shifted_spectrum", "bulk_functional", "in_support",
    "solve_u_star", "scalar_params", "deterministic_equivalents", "f_profile",
    "check_assumptions", "support_boundary_scan", "pick_bulk_point",
]

_TINY = np.finfo(float).tiny


class OutsideBulk(ValueError):
    """``z`` is not an interior point of the support: no positive ``u_*``."""


@dataclass
class ShiftedSpectrum:
    z: complex
    lambda_sq: np.ndarray
    U: np.ndarray = field(default=None, repr=False)
    s: np.ndarray = field(default=None, repr=False)
    Vh: np.ndarray = field(default=None, repr=False)

    @property
    def n(self):
        return self.lambda_sq.size


@dataclass
class DetEquivParams:
    z: complex
    n: int
    u_star: float
    g2: float
    kA: complex
    hA: complex
    fA: complex
    gg_star: float
    rho: float
    c2: float
    in_bulk: bool
    trace_residual: float

    def to_dict(self):
        out = {}
        for k, v in self.__dict__.items():
            if isinstance(v, complex):
                out[k] = [v.real, v.imag]
            elif isinstance(v, (np.floating, np.integer, np.bool_)):
                out[k] = v.item()
            else:
                out[k] = v
        return out


def shifted_spectrum(A0, z):
    """Squared singular values of ``A0 - z``, ascending.

    Raises
    ------
    numpy.linalg.LinAlgError
        If the SVD fails to converge (this happens for non-finite input).
    """
    A0 = np.asarray(A0, dtype=complex)
    if A0.ndim != 2 or A0.shape[0] != A0.shape[1]:
        raise ValueError("A0 must be square, got shape %r" % (A0.shape,))
    if not np.all(np.isfinite(A0)):
        raise np.linalg.LinAlgError("non-finite entries in A0")
    Az = A0 - z * np.eye(A0.shape[0])
    U, s, Vh = np.linalg.svd(Az)
    # numpy returns s descending; flip everything to ascending
    U, s, Vh = U[:, ::-1], s[::-1], Vh[::-1, :]
    return ShiftedSpectrum(z=complex(z), lambda_sq=s**2, U=U, s=s, Vh=Vh)


def _inv_or_inf(lam_sq):
    lam_sq = np.asarray(lam_sq, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(lam_sq > 0, 1.0 / np.where(lam_sq > 0, lam_sq, 1.0), np.inf)


def bulk_functional(lambda_sq):
    """``(1/n) sum lambda_k^{-2}``; zero singular values contribute ``+inf``."""
    return float(np.mean(_inv_or_inf(lambda_sq)))


def in_support(A0, z):
    """True iff ``z`` belongs to the support ``D``."""
    return bulk_functional(shifted_spectrum(A0, z).lambda_sq) >= 1.0


def _trace_G(u, lam_sq):
    return np.mean(1.0 / (u * u + lam_sq))


def solve_u_star(spec, tol=1e-13):
    """Positive root of ``(1/n) sum 1/(u^2 + lambda_k^2) = 1``.

    The left side decreases strictly in ``u``, so a bracket plus Brent's
    method finds the unique root.  `tol` is relative in ``u``.
    """
    lam_sq = spec.lambda_sq if isinstance(spec, ShiftedSpectrum) else np.asarray(spec)
    b = bulk_functional(lam_sq)
    if not b > 1.0:
        raise OutsideBulk("(1/n) sum lambda^-2 = %.6g <= 1: no positive solution" % b)

    lo = tol
    hi = 1.0 + math.sqrt(float(np.max(lam_sq)))
    while _trace_G(lo, lam_sq) <= 1.0:
        lo *= 1e-3
        if lo < 1e-150:
            raise OutsideBulk("cannot bracket u_*: bulk margin below resolution")
    # (1/n) Tr G <= u^-2, with equality only when every lambda is 0 (root at hi)
    assert _trace_G(hi, lam_sq) <= 1.0, "right bracket must satisfy (1/n)Tr G <= 1"

    rtol = max(tol, 4 * np.finfo(float).eps)
    return brentq(lambda u: _trace_G(u, lam_sq) - 1.0, lo, hi,
                  xtol=1e-300, rtol=rtol, maxiter=500)


def f_profile(spec, u_values):
    """Saddle function ``f(u) = (1/n) sum log(u^2 + lambda^2) - u^2``.

    Returns an array of shape ``(len(u_values), 3)`` holding ``f, f', f''``
    from exact differentiation of the sum.
    """
    lam_sq = spec.lambda_sq if isinstance(spec, ShiftedSpectrum) else np.asarray(spec)
    u = np.atleast_1d(np.asarray(u_values, dtype=float))
    if np.any(lam_sq == 0) and np.any(u <= 0):
        raise ValueError("f(u) has a log singularity at u <= 0 when some lambda = 0")
    w = u[:, None] ** 2 + lam_sq[None, :]
    f = np.mean(np.log(w), axis=1) - u**2
    f1 = np.mean(2 * u[:, None] / w, axis=1) - 2 * u
    f2 = np.mean((2 * lam_sq[None, :] - 2 * u[:, None] ** 2) / w**2, axis=1) - 2.0
    return np.column_stack([f, f1, f2])


def scalar_params(A0, z, u_star, spec=None):
    """``g2, k_A, h_A, f_A, rho`` and the saddle curvature at ``u_star``."""
    if spec is None:
        spec = shifted_spectrum(A0, z)
    n = spec.n
    s, U, Vh = spec.s, spec.U, spec.Vh
    d = 1.0 / (s**2 + u_star**2)
    W = Vh @ U                  # V^* U
    X = U.conj().T @ Vh.conj().T  # U^* V
    g2 = float(np.mean(d**2))
    if not g2 > 0:
        raise FloatingPointError("g2 = %r: corrupted spectrum" % g2)
    kA = complex(np.sum(s * np.diag(W) * d) / n)
    hA = complex(np.sum(s * np.diag(W) * d**2) / n)
    # Tr(A_z G A_z G) = sum_kl s_k W_kl d_l s_l W_lk d_k
    sWd = (s[:, None] * W) * d[None, :]
    fA = complex(np.sum(sWd * sWd.T) / n)
    gg_star = float(np.real(np.sum(d[:, None] * np.abs(X) ** 2 * d[None, :])) / n)
    rho = u_star**2 * gg_star + abs(hA) ** 2 / g2
    c2 = -float(f_profile(spec, [u_star])[0, 2])
    return DetEquivParams(
        z=complex(z), n=n, u_star=float(u_star), g2=g2, kA=kA, hA=hA, fA=fA,
        gg_star=gg_star, rho=float(rho), c2=c2,
        in_bulk=bulk_functional(spec.lambda_sq) > 1.0,
        trace_residual=float(abs(_trace_G(u_star, spec.lambda_sq) - 1.0)))


def deterministic_equivalents(A0, z, tol=1e-13):
    """Solve for ``u_*`` and evaluate every scalar at ``(A0, z)``.

    Raises :class:`OutsideBulk` if ``z`` is not in the bulk.
    """
    spec = shifted_spectrum(A0, z)
    u = solve_u_star(spec, tol)
    return scalar_params(A0, z, u, spec=spec)


@dataclass
class AssumptionReport:
    a1_ok: bool
    a1_value: float
    a3_ok: bool
    a3_value: float
    a2_note: str
    histogram_counts: np.ndarray
    histogram_edges: np.ndarray
    eps: float
    d1: float
    M: float

    def to_dict(self):
        return {
            "a1_ok": bool(self.a1_ok), "a1_value": self.a1_value,
            "a3_ok": bool(self.a3_ok), "a3_value": self.a3_value,
            "a2_note": self.a2_note, "eps": self.eps, "d1": self.d1, "M": self.M,
            "nu_histogram": {"counts": self.histogram_counts.tolist(),
                             "edges": self.histogram_edges.tolist()},
        }


def check_assumptions(A0, z, eps=0.1, d1=0.01, M=10.0, bins=30):
    """Finite-n witnesses for the three assumptions on ``A0``.

    (A1) is ``(1/n) sum |A0_ij|^2 < M`` and (A3) is
    ``(1/n) Tr (Y0(z) + eps^2)^{-1} > 1 + d1``.  (A2) concerns n -> infinity
    and is only reported: the empirical histogram of ``lambda^2`` is attached
    so it can be compared across n.
    """
    A0 = np.asarray(A0, dtype=complex)
    n = A0.shape[0]
    a1 = float(np.sum(np.abs(A0) ** 2) / n)
    lam_sq = shifted_spectrum(A0, z).lambda_sq
    a3 = float(np.mean(1.0 / (lam_sq + eps**2)))
    counts, edges = np.histogram(lam_sq, bins=bins)
    note = ("A2 is an n -> infinity statement; attached histogram of the "
            "empirical nu_{z,n} (n=%d) is a witness, not a check" % n)
    return AssumptionReport(a1_ok=a1 < M, a1_value=a1, a3_ok=a3 > 1.0 + d1,
                            a3_value=a3, a2_note=note, histogram_counts=counts,
                            histogram_edges=edges, eps=eps, d1=d1, M=M)


def _is_normal(A0):
    scale = max(np.linalg.norm(A0) ** 2, 1.0)
    return np.linalg.norm(A0 @ A0.conj().T - A0.conj().T @ A0) <= 1e-12 * scale


class _BulkField:
    """``log((1/n) sum lambda^-2(z))`` evaluated many times for one ``A0``.

    Normal ``A0``: ``lambda = |eig - z|``.  Otherwise the functional equals
    ``||(T - z)^{-1}||_F^2 / n`` for the Schur factor ``T`` and is computed
    with a triangular inverse, about thirty times cheaper than an SVD.
    """

    def __init__(self, A0):
        A0 = np.asarray(A0, dtype=complex)
        self.n = A0.shape[0]
        self.normal = _is_normal(A0)
        if self.normal:
            self.ev = np.linalg.eigvals(A0)
        else:
            self.T = schur(A0, output="complex")[0]

    def a3(self, zs, eps):
        """``(1/n) Tr (Y0(z) + eps^2)^{-1}`` via Cholesky and a triangular inverse."""
        flat = np.asarray(zs, dtype=complex).ravel()
        if self.normal:
            lam = np.abs(self.ev[None, :] - flat[:, None]) ** 2
            return np.mean(1.0 / (lam + eps**2), axis=1)
        out = np.empty(flat.size)
        eye = np.eye(self.n)
        for i, z in enumerate(flat):
            Tz = self.T - z * eye
            L, info = zpotrf(Tz @ Tz.conj().T + eps**2 * eye, lower=1)
            Linv, _ = ztrtri(L, lower=1)
            out[i] = np.sum(np.abs(Linv) ** 2) / self.n
        return out

    def __call__(self, zs):
        zs = np.asarray(zs, dtype=complex)
        flat = zs.ravel()
        if self.normal:
            lam = np.abs(self.ev[None, :] - flat[:, None]) ** 2
            m = np.mean(1.0 / np.maximum(lam, _TINY), axis=1)
        else:
            m = np.empty(flat.size)
            eye = np.eye(self.n)
            with np.errstate(over="ignore", invalid="ignore"):
                for i, z in enumerate(flat):
                    inv, info = ztrtri(self.T - z * eye)
                    m[i] = np.inf if info > 0 else np.sum(np.abs(inv) ** 2) / self.n
            m[np.isnan(m)] = np.inf
        with np.errstate(over="ignore"):
            out = np.log(np.minimum(m, np.finfo(float).max))
        return out.reshape(zs.shape)


@dataclass
class BoundaryScan:
    contours: list
    xs: np.ndarray
    ys: np.ndarray
    field: np.ndarray = field(repr=False)

    @property
    def grid_step(self):
        return max(self.xs[1] - self.xs[0], self.ys[1] - self.ys[0])

    @property
    def points(self):
        if not self.contours:
            return np.zeros(0, dtype=complex)
        return np.concatenate(self.contours)

    def to_dict(self):
        return {"grid_step": float(self.grid_step),
                "xlim": [float(self.xs[0]), float(self.xs[-1])],
                "ylim": [float(self.ys[0]), float(self.ys[-1])],
                "resolution": [int(self.xs.size), int(self.ys.size)],
                "contours": [[[p.real, p.imag] for p in c] for c in self.contours]}


def support_boundary_scan(A0, xlim=(-2.0, 2.0), ylim=(-2.0, 2.0), resolution=400,
                          refine_steps=30):
    """Boundary of the support as contours of ``(1/n) sum lambda^-2(z) = 1``.

    Marching squares on ``log`` of the functional (level 0) gives the contour
    topology with linear interpolation; every vertex then sits on a grid edge
    and is refined by bisection along that edge.
    """
    A0 = np.asarray(A0, dtype=complex)
    nx, ny = (resolution, resolution) if np.isscalar(resolution) else resolution
    if nx < 2 or ny < 2:
        raise ValueError("boundary scan needs at least a 2x2 grid")
    xs = np.linspace(xlim[0], xlim[1], int(nx))
    ys = np.linspace(ylim[0], ylim[1], int(ny))
    Z = xs[None, :] + 1j * ys[:, None]
    field_fn = _BulkField(A0)
    F = field_fn(Z)

    raw = find_contours(F, 0.0)
    contours = []
    for c in raw:
        r, col = c[:, 0], c[:, 1]
        on_row = np.abs(r - np.round(r)) < 1e-9
        # endpoints of the crossing edge in grid coordinates
        r0 = np.where(on_row, np.round(r), np.floor(r))
        c0 = np.where(on_row, np.floor(col), np.round(col))
        r1 = np.where(on_row, r0, np.minimum(r0 + 1, ny - 1))
        c1 = np.where(on_row, np.minimum(c0 + 1, nx - 1), c0)
        za = np.interp(c0, np.arange(nx), xs) + 1j * np.interp(r0, np.arange(ny), ys)
        zb = np.interp(c1, np.arange(nx), xs) + 1j * np.interp(r1, np.arange(ny), ys)
        fa = F[r0.astype(int), c0.astype(int)]
        lo, hi = za.copy(), zb.copy()
        flip = fa < 0
        lo[flip], hi[flip] = zb[flip], za[flip]   # keep field(lo) >= 0 > field(hi)
        degenerate = np.abs(zb - za) == 0
        for _ in range(refine_steps):
            mid = 0.5 * (lo + hi)
            fm = field_fn(mid)
            inside = fm >= 0
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        pts = 0.5 * (lo + hi)
        pts[degenerate] = za[degenerate]
        contours.append(pts)
    return BoundaryScan(contours=contours, xs=xs, ys=ys, field=F)


def pick_bulk_point(A0, scan, margin, eps=0.1, d1=0.01):
    """Grid point of `scan` that best satisfies the (A3) margin.

    Candidates are grid points strictly inside the support and at least
    `margin` away from every boundary point.  Among those the largest
    ``(1/n) Tr (Y0 + eps^2)^{-1} - 1`` wins; ties go to the smallest ``|z|``.
    Returns ``(z0, a3_margin)``.
    """
    Z = (scan.xs[None, :] + 1j * scan.ys[:, None]).ravel()
    inside = scan.field.ravel() > 0
    bpts = scan.points
    if bpts.size:
        dist = np.min(np.abs(Z[:, None] - bpts[None, :]), axis=1)
        inside &= dist >= margin
    cand = Z[inside]
    if cand.size == 0:
        raise OutsideBulk("no grid point lies %.3g inside the support" % margin)
    a3 = _BulkField(A0).a3(cand, eps) - 1.0
    ok = a3 > d1
    if not np.any(ok):
        raise OutsideBulk("no bulk grid point passes the (A3) margin d1=%g" % d1)
    cand, a3 = cand[ok], a3[ok]
    order = np.lexsort((np.abs(cand), -np.round(a3, 12)))
    best = order[0]
    return complex(cand[best]), float(a3[best])
