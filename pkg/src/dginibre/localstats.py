"""Local two-point statistics at a bulk point in sqrt(n)-rescaled coordinates.

Eigenvalues near ``z0`` are mapped to ``zeta = sqrt(n) (z - z0)`` and kept
inside a disk of radius ``window_radius``.  The pair correlation estimator
uses erosion for edge correction: the first point of every ordered pair must
lie in the disk shrunk by ``inner_margin``, so its full annulus of radius up
to the largest bin edge sits inside the window.

Normalization: with ``d`` the point density per unit rescaled area,
``g(r) -> 1 - exp(-rho r^2)`` in the bulk, and ``pi * d -> rho``.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.special import gammaln

from .detequiv import OutsideBulk, check_assumptions, deterministic_equivalents
from .ensemble import realize_deformation
from .spectra import sample_eigenvalues

__all__ = [
    "RescaledCloud", "PairCorrEstimate", "UniversalityReport", "rescale",
    "pair_correlation", "ginibre_exact_pair", "universal_prediction",
    "annulus_average", "universality_report", "default_bins",
]


def default_bins(r_max=4.0, width=0.1):
    """Uniform bin edges ``0, width, ..., r_max``."""
    k = int(round(r_max / width))
    return np.linspace(0.0, k * width, k + 1)


@dataclass
class RescaledCloud:
    z0: complex
    n: int
    window_radius: float
    points: np.ndarray = field(repr=False)


def rescale(sample, z0, window_radius, n=None):
    """Rescale an :class:`~dginibre.spectra.EigenSample` (or a bare eigenvalue
    array together with `n`) around `z0` and crop to the window."""
    if n is None:
        n, ev = sample.n, sample.eigenvalues
    else:
        ev = np.asarray(sample)
    zeta = math.sqrt(n) * (np.asarray(ev) - z0)
    keep = np.abs(zeta) <= window_radius
    return RescaledCloud(z0=complex(z0), n=int(n), window_radius=float(window_radius),
                         points=zeta[keep])


@dataclass
class PairCorrEstimate:
    bin_edges: np.ndarray
    g_hat: np.ndarray
    counts: np.ndarray
    density_hat: float
    std_err: np.ndarray
    trials: int
    n_inner_mean: float
    empty: np.ndarray
    window_radius: float
    inner_margin: float

    @property
    def centers(self):
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])


def _cloud_counts(pts, edges, inner_radius, angle_range):
    r = np.abs(pts)
    inner_idx = np.flatnonzero(r <= inner_radius)
    if inner_idx.size == 0 or pts.size < 2:
        return np.zeros(edges.size - 1, dtype=np.int64), inner_idx.size
    diff = pts[None, :] - pts[inner_idx, None]
    dist = np.abs(diff)
    valid = np.ones(dist.shape, dtype=bool)
    valid[np.arange(inner_idx.size), inner_idx] = False
    if angle_range is not None:
        ang = np.mod(np.angle(diff), 2 * np.pi)
        valid &= (ang >= angle_range[0]) & (ang < angle_range[1])
    counts, _ = np.histogram(dist[valid], bins=edges)
    return counts, inner_idx.size


def pair_correlation(clouds, bins, inner_margin=None, window_radius=None,
                     angle_range=None):
    """Edge-corrected pair correlation estimate pooled over clouds.

    Parameters
    ----------
    clouds : list of RescaledCloud
        One cloud per trial, all with the same window.
    bins : array_like
        Bin edges in rescaled distance.
    inner_margin : float, optional
        Erosion depth; defaults to the largest bin edge and may not be
        smaller than it.
    angle_range : (float, float), optional
        Only count ordered pairs whose direction angle (in ``[0, 2 pi)``)
        falls in this range; annulus areas are scaled to match.

    Returns
    -------
    PairCorrEstimate
        ``g_hat[k] = pairs_k / (N_in * d_hat * area_k)`` summed over trials,
        with delete-one-trial jackknife standard errors.  Bins without a
        single pair are flagged in ``empty`` and carry ``g_hat = 0``.
    """
    edges = np.asarray(bins, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bins must be increasing edges")
    if not clouds:
        raise ValueError("need at least one cloud")
    R = clouds[0].window_radius if window_radius is None else float(window_radius)
    margin = edges[-1] if inner_margin is None else float(inner_margin)
    if margin < edges[-1]:
        raise ValueError("inner_margin %.3g is below the largest bin edge %.3g"
                         % (margin, edges[-1]))
    if margin >= R:
        raise ValueError("inner_margin must be smaller than the window radius")
    frac = 1.0 if angle_range is None else (angle_range[1] - angle_range[0]) / (2 * np.pi)
    area = np.pi * (edges[1:] ** 2 - edges[:-1] ** 2) * frac
    window_area = np.pi * R * R

    T = len(clouds)
    C = np.zeros((T, edges.size - 1))
    Nin = np.zeros(T)
    Ntot = np.zeros(T)
    for t, cl in enumerate(clouds):
        C[t], Nin[t] = _cloud_counts(cl.points, edges, R - margin, angle_range)
        Ntot[t] = cl.points.size

    def estimate(c, nin, ntot, trials):
        d = ntot / (trials * window_area)
        denom = nin * d * area
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(denom > 0, c / np.where(denom > 0, denom, 1.0), 0.0)
        return g, d

    csum, nsum, tsum = C.sum(0), Nin.sum(), Ntot.sum()
    g, d = estimate(csum, nsum, tsum, T)
    if T > 1:
        loo = np.array([estimate(csum - C[i], nsum - Nin[i], tsum - Ntot[i], T - 1)[0]
                        for i in range(T)])
        se = np.sqrt((T - 1) / T * np.sum((loo - loo.mean(0)) ** 2, axis=0))
    else:
        se = np.full(g.shape, np.inf)
    empty = csum == 0
    g[empty] = 0.0
    return PairCorrEstimate(bin_edges=edges, g_hat=g, counts=csum.astype(np.int64),
                            density_hat=float(d), std_err=se, trials=T,
                            n_inner_mean=float(nsum / T), empty=empty,
                            window_radius=R, inner_margin=margin)


def _log_partial_exp(x, n):
    """``log sum_{k<n} x^k / k!`` for complex `x` (principal branch)."""
    x = np.asarray(x, dtype=complex)
    out = np.zeros(x.shape, dtype=complex)
    nz = x != 0
    if np.any(nz):
        k = np.arange(n)
        terms = k[None, :] * np.log(x[nz])[:, None] - gammaln(k + 1)[None, :]
        m = terms.real.max(axis=1, keepdims=True)
        s = np.exp(terms - m).sum(axis=1)
        out[nz] = m[:, 0] + np.log(s)
    return out


def ginibre_exact_pair(n, z0, r_values, direction=0.0):
    """Exact normalized two-point function of the size-`n` Ginibre ensemble.

    Evaluates ``1 - |K(w1, w2)|^2 / (K(w1, w1) K(w2, w2))`` at ``w2 = z0``,
    ``w1 = z0 + r e^{i direction} / sqrt(n)``, for the kernel
    ``K(w1, w2) = (n/pi) e^{-n(|w1|^2+|w2|^2)/2} sum_{k<n} (n w1 conj(w2))^k / k!``.
    The Gaussian prefactors cancel, leaving truncated exponential series that
    are summed in log space.
    """
    if abs(z0) >= 1.0:
        raise ValueError("z0 must lie inside the unit disk, got |z0| = %.3g" % abs(z0))
    r = np.atleast_1d(np.asarray(r_values, dtype=float))
    w2 = complex(z0)
    w1 = w2 + r * np.exp(1j * direction) / math.sqrt(n)
    l12 = _log_partial_exp(n * w1 * np.conj(w2), n)
    l11 = _log_partial_exp(n * np.abs(w1) ** 2, n).real
    l22 = _log_partial_exp(np.array([n * abs(w2) ** 2]), n).real
    return 1.0 - np.exp(2 * l12.real - l11 - l22)


def universal_prediction(rho, r_values):
    """Bulk limit: returns ``(g, p2)`` with ``g = 1 - exp(-rho r^2)`` and
    ``p2 = rho^2 g``."""
    if not rho > 0:
        raise ValueError("rho must be positive, got %r" % (rho,))
    r = np.asarray(r_values, dtype=float)
    g = -np.expm1(-rho * r * r)
    return g, rho * rho * g


def annulus_average(fn, edges, nodes=16):
    """Area-weighted average of ``fn(r)`` over each annulus between `edges`."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    a, b = edges[:-1, None], edges[1:, None]
    r = 0.5 * (b - a) * x[None, :] + 0.5 * (b + a)
    vals = fn(r.ravel()).reshape(r.shape)
    num = np.sum(w[None, :] * vals * r, axis=1) * 0.5 * (b - a)[:, 0]
    return num / (0.5 * (b * b - a * a)[:, 0])


@dataclass
class UniversalityReport:
    z0: complex
    n: int
    trials: int
    failed_trials: list
    params: object
    assumptions: object
    estimate: PairCorrEstimate
    prediction: np.ndarray
    z_scores: np.ndarray
    sup_distance: float
    density_residual: float
    r_max: float
    thresholds: dict
    passed: bool

    def to_dict(self):
        est = self.estimate
        return {
            "units": "rescaled coordinates zeta = sqrt(n) (z - z0)",
            "z0": [self.z0.real, self.z0.imag], "n": self.n, "trials": self.trials,
            "failed_trials": list(self.failed_trials),
            "detequiv": self.params.to_dict(),
            "assumptions": self.assumptions.to_dict(),
            "density_hat": est.density_hat,
            "pi_density_hat": math.pi * est.density_hat,
            "sup_distance": self.sup_distance,
            "density_residual": self.density_residual,
            "r_max": self.r_max, "thresholds": dict(self.thresholds),
            "passed": bool(self.passed),
            "window_radius": est.window_radius, "inner_margin": est.inner_margin,
            "bins": {"edges": est.bin_edges.tolist(), "g_hat": est.g_hat.tolist(),
                     "std_err": est.std_err.tolist(), "counts": est.counts.tolist(),
                     "empty": est.empty.tolist(), "prediction": self.prediction.tolist(),
                     "z_scores": self.z_scores.tolist()},
        }


DEFAULT_THRESHOLDS = {"sup_distance": 0.05, "density_residual": 0.03}


def universality_report(spec, z0, trials, seed, bins=None, window_radius=8.0,
                        r_max=3.0, thresholds=None, workers=1, eps=0.1, d1=0.01, M=10.0,
                        A0=None):
    """Compare the Monte Carlo pair correlation at `z0` with the bulk limit.

    ``rho`` comes from the deterministic equivalents of the same finite
    ``A0``.  The prediction in each bin is the annulus average of
    ``1 - exp(-rho r^2)``; the sup distance runs over bins whose upper edge
    is at most `r_max`.

    Raises
    ------
    OutsideBulk
        If `z0` is not in the bulk of ``A0``.
    """
    thr = dict(DEFAULT_THRESHOLDS)
    thr.update(thresholds or {})
    if A0 is None:
        A0 = realize_deformation(spec)
    params = deterministic_equivalents(A0, z0)
    if not params.in_bulk:
        raise OutsideBulk("z0 = %r is not in the bulk" % (z0,))
    assumptions = check_assumptions(A0, z0, eps=eps, d1=d1, M=M)

    edges = default_bins(r_max) if bins is None else np.asarray(bins, dtype=float)
    samples, failures = sample_eigenvalues(spec, seed, trials, workers=workers, A0=A0)
    clouds = [rescale(s, z0, window_radius) for s in samples]
    est = pair_correlation(clouds, edges)

    rho = params.rho
    pred = annulus_average(lambda r: universal_prediction(rho, r)[0], edges)
    use = edges[1:] <= r_max + 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(est.std_err > 0, (est.g_hat - pred) / est.std_err, 0.0)
    sup = float(np.max(np.abs(est.g_hat - pred)[use]))
    dres = abs(math.pi * est.density_hat - rho)
    passed = sup < thr["sup_distance"] and dres < thr["density_residual"]
    return UniversalityReport(z0=complex(z0), n=spec.n, trials=trials,
                              failed_trials=failures, params=params,
                              assumptions=assumptions, estimate=est, prediction=pred,
                              z_scores=z, sup_distance=sup, density_residual=dres,
                              r_max=r_max, thresholds=thr, passed=passed)
