"""Command line front end.

Subcommands: ``detequiv``, ``support``, ``simulate``, ``localstats``,
``universality``, ``girko`` and ``verify-susy``.  Every run writes its
outputs plus ``manifest.json`` into ``--out``; the manifest is written on
every code path.

Exit codes: 0 success, 1 a check failed, 2 the point is outside the bulk,
64 usage or configuration error, 70 internal error.
"""
import argparse
from dataclasses import dataclass, field
from datetime import datetime, timezone
import hashlib
import json
import logging
import math
import os
import sys
import traceback

import numpy as np

from . import __version__
from .detequiv import (OutsideBulk, check_assumptions, deterministic_equivalents,
                       f_profile, pick_bulk_point, shifted_spectrum,
                       support_boundary_scan)
from .ensemble import DeformationSpec, realize_deformation, sample_deformed
from .localstats import (annulus_average, default_bins, ginibre_exact_pair,
                         pair_correlation, rescale, universal_prediction,
                         universality_report)
from .matrixio import MatrixFormatError
from .outputs import svg_line_plot, write_csv
from .spectra import (GIRKO_DOUBLING_BAND, girko_check, girko_convergence,
                      sample_eigenvalues, sigma_min)

log = logging.getLogger("dginibre")

EXIT_OK, EXIT_FAILED, EXIT_OUTSIDE_BULK, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 64, 70

CONVENTIONS = {
    "girko": "sum_j f(z_j) = (1/4pi) int Lap_xy f(z) log det Y(z) dx dy with Lap_xy the "
             "full 2D Laplacian; written with d^2/dz dzbar the same prefactor would be "
             "off by a factor 4",
    "hs_grassmann": "matrix form verified with the measure prod dnu_jk dnubar_jk; the "
                    "literal pairing dnu_kj dnubar_jk flips the overall sign at p = 2",
    "hs_scalar": "exp(-rho tau) = int exp(rho chi + tau eta + chi eta) deta dchi holds with "
                 "int X g dg = X and the leftmost differential acting first",
    "local_density": "rho = pi * (points per unit area in zeta = sqrt(n)(z - z0))",
}

SUBCOMMANDS = ("detequiv", "support", "simulate", "localstats", "universality", "girko",
               "verify-susy")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


def _parse_complex(v, what):
    try:
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ValueError
            return complex(float(v[0]), float(v[1]))
        if isinstance(v, str):
            return complex(v.replace(" ", "").replace("i", "j"))
        return complex(v)
    except (TypeError, ValueError):
        raise ConfigError("%s must be a number, [re, im] or a complex string; got %r"
                          % (what, v)) from None


DEFAULT_TOLERANCES = {"sup_distance": 0.05, "density_residual": 0.03, "quadrature": 1e-2}


@dataclass
class RunConfig:
    deformation: DeformationSpec
    z0: complex = 0j
    trials: int = 2000
    master_seed: int = 0
    window_radius: float = 8.0
    bins: np.ndarray = field(default_factory=lambda: default_bins(4.0))
    r_max: float = 3.0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    threads: int = 1
    assumptions: dict = field(default_factory=lambda: {"eps": 0.1, "d1": 0.01, "M": 10.0})
    support: dict = field(default_factory=dict)
    girko: dict = field(default_factory=dict)
    simulate: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.deformation.n

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("configuration must be a JSON object")
        d = dict(d)
        known = {"deformation", "z0", "n", "trials", "master_seed", "seed", "window_radius",
                 "bins", "r_max", "tolerances", "threads", "assumptions", "support",
                 "girko", "simulate", "verify"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError("unknown configuration keys: %s" % ", ".join(sorted(unknown)))
        dspec = dict(d.get("deformation", {"kind": "zero"}))
        if "n" in d:
            dspec["n"] = d["n"]
        dspec.setdefault("n", 256)
        try:
            spec = DeformationSpec.from_dict(dspec)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("bad deformation: %s" % exc) from None
        bins = d.get("bins")
        try:
            if bins is None:
                edges = default_bins(4.0)
            elif isinstance(bins, dict):
                edges = default_bins(float(bins.get("r_max", 4.0)), float(bins.get("width", 0.1)))
            else:
                edges = np.asarray(bins, dtype=float)
            tol = dict(DEFAULT_TOLERANCES)
            tol.update(d.get("tolerances", {}))
            cfg = cls(deformation=spec,
                      z0=_parse_complex(d.get("z0", 0.0), "z0"),
                      trials=int(d.get("trials", 2000)),
                      master_seed=int(d.get("master_seed", d.get("seed", 0))),
                      window_radius=float(d.get("window_radius", 8.0)),
                      bins=edges, r_max=float(d.get("r_max", 3.0)),
                      tolerances={k: float(v) for k, v in tol.items()},
                      threads=int(d.get("threads", 1)),
                      assumptions={**{"eps": 0.1, "d1": 0.01, "M": 10.0},
                                   **d.get("assumptions", {})},
                      support=dict(d.get("support", {})), girko=dict(d.get("girko", {})),
                      simulate=dict(d.get("simulate", {})), verify=dict(d.get("verify", {})))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        cfg.validate()
        return cfg

    def validate(self):
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")
        bad = [k for k, v in self.tolerances.items() if not v > 0]
        if bad:
            raise ConfigError("tolerances must be positive: %s" % ", ".join(bad))
        if self.bins.ndim != 1 or self.bins.size < 2 or np.any(np.diff(self.bins) <= 0):
            raise ConfigError("bins must be increasing edges")
        if self.window_radius <= self.bins[-1]:
            raise ConfigError("window_radius must exceed the largest bin edge")

    def to_dict(self):
        return {"deformation": self.deformation.to_dict(),
                "z0": [self.z0.real, self.z0.imag], "n": self.n, "trials": self.trials,
                "master_seed": self.master_seed, "window_radius": self.window_radius,
                "bins": self.bins.tolist(), "r_max": self.r_max,
                "tolerances": dict(self.tolerances), "assumptions": dict(self.assumptions),
                "support": self.support, "girko": self.girko, "simulate": self.simulate,
                "verify": self.verify}

    def digest(self):
        # thread count is excluded: it never changes numeric outputs
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def load_config(path, args):
    """Read the JSON config at `path` (optional) and apply CLI overrides."""
    d = {}
    if path:
        try:
            with open(path) as fh:
                d = json.load(fh)
        except OSError as exc:
            raise ConfigError("cannot read config %s: %s" % (path, exc)) from None
        except json.JSONDecodeError as exc:
            raise ConfigError("config %s is not valid JSON: %s" % (path, exc)) from None
        if not isinstance(d, dict):
            raise ConfigError("configuration must be a JSON object")
    for key, attr in (("master_seed", "seed"), ("n", "n"), ("trials", "trials"),
                      ("threads", "threads")):
        v = getattr(args, attr, None)
        if v is not None:
            d[key] = v
            if key == "master_seed":
                d.pop("seed", None)
    return RunConfig.from_dict(d)


@dataclass
class RunManifest:
    command: str
    started: str
    config_hash: str = ""
    config: dict = field(default_factory=dict)
    version: str = __version__
    finished: str = ""
    exit_code: int = EXIT_INTERNAL
    status: str = "running"
    message: str = ""
    failed_trials: list = field(default_factory=list)
    reliable: bool = True
    notes: list = field(default_factory=list)
    conventions: dict = field(default_factory=lambda: dict(CONVENTIONS))
    files: list = field(default_factory=list)

    def to_dict(self, out_dir):
        inv = []
        for name in self.files:
            p = os.path.join(out_dir, name)
            if os.path.exists(p):
                with open(p, "rb") as fh:
                    blob = fh.read()
                inv.append({"name": name, "bytes": len(blob),
                            "sha256": hashlib.sha256(blob).hexdigest()})
        return {"command": self.command, "version": self.version,
                "config_hash": self.config_hash, "config": self.config,
                "started": self.started, "finished": self.finished,
                "exit_code": self.exit_code, "status": self.status, "message": self.message,
                "failed_trials": list(self.failed_trials),
                "failed_trial_count": len(self.failed_trials),
                "reliable": self.reliable, "notes": list(self.notes),
                "conventions": self.conventions, "files": inv}


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class _Out:
    """Tracks files written into the output directory."""

    def __init__(self, root, manifest, config_hash):
        self.root, self.manifest, self.hash = root, manifest, config_hash

    def path(self, name):
        if name not in self.manifest.files:
            self.manifest.files.append(name)
        return os.path.join(self.root, name)

    def json(self, name, obj):
        with open(self.path(name), "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")

    def csv(self, name, columns, rows, extra=()):
        comments = ["config_hash=%s" % self.hash] + list(extra)
        write_csv(self.path(name), columns, rows, comments)


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError("not serializable: %r" % type(o))


# -- subcommands ---------------------------------------------------------------

def cmd_detequiv(cfg, out, manifest, args):
    A0 = realize_deformation(cfg.deformation)
    params = deterministic_equivalents(A0, cfg.z0)
    a = cfg.assumptions
    rep = check_assumptions(A0, cfg.z0, eps=a["eps"], d1=a["d1"], M=a["M"])
    fp = f_profile(shifted_spectrum(A0, cfg.z0), [params.u_star])[0]
    out.json("detequiv.json", {"detequiv": params.to_dict(), "assumptions": rep.to_dict(),
                               "saddle": {"f": fp[0], "f_prime": fp[1], "f_second": fp[2]}})
    ok = params.in_bulk and rep.a1_ok and rep.a3_ok
    return EXIT_OK if ok else EXIT_FAILED


def cmd_support(cfg, out, manifest, args):
    A0 = realize_deformation(cfg.deformation)
    s = cfg.support
    scan = support_boundary_scan(A0, xlim=tuple(s.get("xlim", (-2.0, 2.0))),
                                 ylim=tuple(s.get("ylim", (-2.0, 2.0))),
                                 resolution=s.get("resolution", 400))
    rows = [(k, p.real, p.imag) for k, c in enumerate(scan.contours) for p in c]
    out.csv("support_contours.csv", ["contour", "x", "y"], rows)
    summary = {"grid_step": scan.grid_step, "contours": len(scan.contours),
               "points": int(sum(len(c) for c in scan.contours)),
               "per_contour": [{"centroid": [complex(np.mean(c)).real, complex(np.mean(c)).imag],
                                "closed": bool(abs(c[0] - c[-1]) < 1e-9), "points": len(c)}
                               for c in scan.contours]}
    if getattr(args, "pick_bulk", False):
        margin = float(s.get("pick_margin", 0.1))
        a = cfg.assumptions
        z0, marg = pick_bulk_point(A0, scan, margin, eps=a["eps"], d1=a["d1"])
        params = deterministic_equivalents(A0, z0)
        summary["picked"] = {"z0": [z0.real, z0.imag], "a3_margin": marg,
                             "boundary_margin": margin, "detequiv": params.to_dict()}
    out.json("support.json", summary)
    return EXIT_OK


def cmd_simulate(cfg, out, manifest, args):
    spec = cfg.deformation
    A0 = realize_deformation(spec)
    samples, failures = sample_eigenvalues(spec, cfg.master_seed, cfg.trials,
                                           workers=cfg.threads, A0=A0)
    manifest.failed_trials = failures
    rows = [(s.trial_index, v.real, v.imag) for s in samples for v in s.eigenvalues]
    out.csv("eigenvalues.csv", ["trial", "re", "im"], rows,
            ["n=%d seed=%d spec=%s" % (spec.n, cfg.master_seed, spec.digest())])
    if cfg.simulate.get("sigma_min"):
        vals = [(t, spec.n * sigma_min(sample_deformed(spec, cfg.master_seed, t, A0=A0),
                                       cfg.z0) ** 2) for t in range(cfg.trials)]
        out.csv("sigma_min.csv", ["trial", "n_sigma1_sq"], vals,
                ["z0=%r diagnostic only" % (cfg.z0,)])
    return EXIT_OK if samples else EXIT_FAILED


def _clouds(cfg, A0):
    samples, failures = sample_eigenvalues(cfg.deformation, cfg.master_seed, cfg.trials,
                                           workers=cfg.threads, A0=A0)
    return [rescale(s, cfg.z0, cfg.window_radius) for s in samples], failures


def _mark_reliability(cfg, manifest, est):
    if est.trials < 2:
        manifest.reliable = False
        manifest.notes.append("a single trial gives no jackknife error bars; "
                              "statistics are unreliable")
    if np.any(est.empty):
        manifest.notes.append("%d empty bins flagged" % int(np.sum(est.empty)))


def cmd_localstats(cfg, out, manifest, args):
    A0 = realize_deformation(cfg.deformation)
    params = deterministic_equivalents(A0, cfg.z0)
    clouds, failures = _clouds(cfg, A0)
    manifest.failed_trials = failures
    est = pair_correlation(clouds, cfg.bins)
    _mark_reliability(cfg, manifest, est)
    pred = annulus_average(lambda r: universal_prediction(params.rho, r)[0], est.bin_edges)
    cols = ["r_lo", "r_hi", "g_hat", "std_err", "counts", "empty", "prediction"]
    extra = []
    if cfg.deformation.kind == "zero" and abs(cfg.z0) < 1:
        oracle = annulus_average(lambda r: ginibre_exact_pair(cfg.n, cfg.z0, r), est.bin_edges)
        cols.append("ginibre_exact")
        extra = [oracle]
    e = est.bin_edges
    rows = [tuple([e[k], e[k + 1], est.g_hat[k], est.std_err[k], est.counts[k],
                   bool(est.empty[k]), pred[k]] + [x[k] for x in extra])
            for k in range(e.size - 1)]
    out.csv("pair_correlation.csv", cols, rows,
            ["units=rescaled zeta=sqrt(n)(z-z0) density_hat=%r" % est.density_hat])
    out.json("localstats.json", {"units": "rescaled coordinates zeta = sqrt(n) (z - z0)",
                                 "density_hat": est.density_hat,
                                 "pi_density_hat": math.pi * est.density_hat,
                                 "rho": params.rho, "trials": est.trials,
                                 "n_inner_mean": est.n_inner_mean})
    return EXIT_OK


def cmd_universality(cfg, out, manifest, args):
    a = cfg.assumptions
    rep = universality_report(cfg.deformation, cfg.z0, cfg.trials, cfg.master_seed,
                              bins=cfg.bins, window_radius=cfg.window_radius, r_max=cfg.r_max,
                              thresholds={"sup_distance": cfg.tolerances["sup_distance"],
                                          "density_residual": cfg.tolerances["density_residual"]},
                              workers=cfg.threads, eps=a["eps"], d1=a["d1"], M=a["M"])
    manifest.failed_trials = rep.failed_trials
    est = rep.estimate
    _mark_reliability(cfg, manifest, est)
    e = est.bin_edges
    mid = 0.5 * (e[1:] + e[:-1])
    rows = [(e[k], e[k + 1], mid[k], est.g_hat[k], est.std_err[k], rep.prediction[k],
             rep.z_scores[k], est.counts[k], bool(est.empty[k])) for k in range(mid.size)]
    out.csv("universality_curve.csv",
            ["r_lo", "r_hi", "r_mid", "g_hat", "std_err", "prediction", "z_score", "counts",
             "empty"], rows, ["units=rescaled zeta=sqrt(n)(z-z0) rho=%r" % rep.params.rho])
    finite = np.where(np.isfinite(est.std_err), est.std_err, 0.0)
    svg_line_plot(out.path("universality.svg"), mid,
                  [(est.g_hat, "Monte Carlo g(r)"),
                   (rep.prediction, "1 - exp(-rho r^2), rho=%.4f" % rep.params.rho)],
                  band=(est.g_hat - 2 * finite, est.g_hat + 2 * finite),
                  title="pair correlation at z0=%s, n=%d, %d trials" % (cfg.z0, cfg.n, est.trials),
                  xlabel="r (rescaled)", ylabel="g(r)")
    d = rep.to_dict()
    d["reliable"] = manifest.reliable
    out.json("universality.json", d)
    return EXIT_OK if rep.passed else EXIT_FAILED


def cmd_girko(cfg, out, manifest, args):
    g = cfg.girko
    center = _parse_complex(g.get("center", 0.2), "girko.center")
    radius = float(g.get("radius", 0.4))
    grid = int(g.get("grid", 401))
    H = sample_deformed(cfg.deformation, cfg.master_seed, 0)
    res = girko_check(H, center=center, radius=radius, grid=grid,
                      margin=float(g.get("margin", 0.05)))
    ok = res["rel_err"] < cfg.tolerances["quadrature"]
    report = {"check": res, "tolerance": cfg.tolerances["quadrature"]}
    if g.get("convergence", False):
        mats = [sample_deformed(cfg.deformation, cfg.master_seed, t)
                for t in range(int(g.get("convergence_matrices", 8)))]
        conv = girko_convergence(mats, center=center, radius=radius,
                                 grids=tuple(g.get("convergence_grids", (101, 201, 401))))
        conv["band"] = list(GIRKO_DOUBLING_BAND)
        conv["passed"] = GIRKO_DOUBLING_BAND[0] <= conv["per_doubling"] <= GIRKO_DOUBLING_BAND[1]
        ok = ok and conv["passed"]
        report["convergence"] = conv
    report["passed"] = bool(ok)
    out.json("girko.json", report)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_verify_susy(cfg, out, manifest, args):
    from .susy.battery import run_battery
    v = cfg.verify
    res = run_battery(seed=int(v.get("seed", 0)), quick=bool(v.get("quick", False)))
    out.json("verify_susy.json", res)
    failed = [k for k, r in res["identities"].items() if not r["passed"]]
    if failed:
        manifest.notes.append("failed identities: %s" % ", ".join(failed))
    return EXIT_OK if res["passed"] else EXIT_FAILED


HANDLERS = {"detequiv": cmd_detequiv, "support": cmd_support, "simulate": cmd_simulate,
            "localstats": cmd_localstats, "universality": cmd_universality,
            "girko": cmd_girko, "verify-susy": cmd_verify_susy}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, "%s: error: %s\n" % (self.prog, message))


def build_parser():
    p = _Parser(prog="dginibre", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON configuration file")
        sp.add_argument("--seed", type=int, help="master seed (overrides config)")
        sp.add_argument("--n", type=int, help="matrix dimension (overrides config)")
        sp.add_argument("--trials", type=int, help="Monte Carlo trials (overrides config)")
        sp.add_argument("--threads", type=int, help="worker threads")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "support":
            sp.add_argument("--pick-bulk", action="store_true",
                            help="also pick a bulk point passing the (A3) margin")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    manifest = RunManifest(command=args.command, started=_now())
    try:
        os.makedirs(args.out, exist_ok=True)
    except OSError as exc:
        print("cannot create output directory %s: %s" % (args.out, exc), file=sys.stderr)
        return EXIT_USAGE
    code = EXIT_INTERNAL
    try:
        cfg = load_config(args.config, args)
        manifest.config_hash = cfg.digest()
        manifest.config = cfg.to_dict()
        out = _Out(args.out, manifest, manifest.config_hash)
        code = HANDLERS[args.command](cfg, out, manifest, args)
        manifest.status = "ok" if code == EXIT_OK else "check_failed"
    except (ConfigError, MatrixFormatError) as exc:
        code, manifest.status, manifest.message = EXIT_USAGE, "usage_error", str(exc)
        print("configuration error: %s" % exc, file=sys.stderr)
    except OutsideBulk as exc:
        code, manifest.status, manifest.message = EXIT_OUTSIDE_BULK, "outside_bulk", str(exc)
        print("outside the bulk: %s" % exc, file=sys.stderr)
    except Exception as exc:  # noqa: BLE001 - reported, manifest still written
        code, manifest.status, manifest.message = EXIT_INTERNAL, "error", repr(exc)
        traceback.print_exc()
    finally:
        manifest.finished = _now()
        manifest.exit_code = code
        with open(os.path.join(args.out, "manifest.json"), "w") as fh:
            json.dump(manifest.to_dict(args.out), fh, indent=2, sort_keys=True,
                      default=_json_default)
            fh.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
