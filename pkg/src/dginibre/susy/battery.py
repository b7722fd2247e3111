"""The full verification battery behind ``verify-susy``."""
import numpy as np

from .grassmann import GrassmannElement
from . import identities as ids
from . import lemmas

__all__ = ["run_battery", "jsonable", "CONVENTIONS"]

CONVENTIONS = {
    "berezin": "int X g dg = X; the leftmost differential in a written measure acts first",
    "hs_grassmann_measure": "prod_{j,k} dnu_jk dnubar_jk (conjugate pairing); the literal "
                            "pairing dnu_kj dnubar_jk is reported and differs by an overall "
                            "sign at p = 2",
    "hs_scalar": "exp(-rho tau) = int exp(rho chi + tau eta + chi eta) deta dchi holds as "
                 "written under the same convention",
    "haar": "int_{U(2)} dU = 1",
    "hermitian_jacobian": "pi (mu1 - mu2)^2 on ordered eigenvalues",
}


def jsonable(obj):
    """Convert check results to JSON-friendly structures."""
    if isinstance(obj, GrassmannElement):
        return {"*".join(k) or "1": [v.real, v.imag] for k, v in obj.to_dict().items()}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _group(results):
    return {"passed": all(r["passed"] for r in results), "cases": results}


def run_battery(seed=0, det_samples=100000, det_interior=1000, quick=False):
    """Run every identity check; returns ``{"identities": {...}, "passed": bool}``.

    `quick` trims the heavier sweeps (used by tests of the runner itself).
    """
    rng = np.random.default_rng(seed)
    out = {}

    out["gaussian_complex"] = _group([
        ids.gaussian_complex_check([[2.0]]),
        ids.gaussian_complex_check(ids.random_hpd(rng, 2)),
        ids.gaussian_complex_check(ids.random_hpd(rng, 3)),
    ])

    sizes = range(1, 4 if quick else 7)
    cases = [ids.gaussian_grassmann_check(np.eye(2)),
             ids.gaussian_grassmann_check([[1, 2], [3, 4]])]
    cases += [ids.gaussian_grassmann_check(ids._crandn(rng, n, n)) for n in sizes]
    out["gaussian_grassmann"] = _group(cases)

    out["super_gaussian"] = _group([
        ids.super_gaussian_check(**ids.super_gaussian_case(1, seed, odd=False)),
        ids.super_gaussian_check(**ids.super_gaussian_case(1, seed)),
        ids.super_gaussian_check(**ids.super_gaussian_case(2, seed)),
    ])

    out["sdet_properties"] = _group([
        ids.sdet_properties_check(*ids.sdet_case(seed=seed + i)) for i in range(1 if quick else 3)
    ])

    hs = [ids.hs_grassmann_check(1), ids.hs_grassmann_check(2)]
    out["hs_grassmann"] = _group(hs)
    out["hs_grassmann"]["written_pairing"] = [ids.hs_grassmann_check(p, "written")
                                              for p in (1, 2)]
    out["hs_scalar_fixture"] = _group([ids.hs_scalar_fixture()])

    out["hs_bosonic"] = _group([
        ids.hs_bosonic_check(1, [[0.0]], [[0.0]], samples=1000, seed=seed),
        ids.hs_bosonic_check(1, [[1.0]], [[1.0]], samples=200000, seed=seed),
        ids.hs_bosonic_check(2, 0.3 * ids._crandn(rng, 2, 2), 0.3 * ids._crandn(rng, 2, 2),
                             samples=200000, seed=seed + 1),
    ])

    out["berezinian"] = _group([
        ids.berezinian_check(np.eye(2), seed=seed),
        ids.berezinian_check(np.diag([2.0, 3.0]), seed=seed),
        ids.berezinian_check(ids._crandn(rng, 3, 3), seed=seed),
        ids.berezinian_check(ids._crandn(rng, 4, 4), seed=seed),
    ])
    out["shift_odd"] = _group([ids.shift_odd_check(k, seed=seed) for k in (1, 2, 3, 4)])
    out["shift_even"] = _group([ids.shift_even_check(k, seed=seed) for k in (1, 2)])

    out["det_m_inequality"] = _group([lemmas.det_m_inequality_check(
        samples=10000 if quick else det_samples, interior=det_interior, seed=seed)])

    out["jacobian_square"] = _group([lemmas.jacobian_square_check(f)
                                     for f in ("exp", "exp2", "zero")])
    out["jacobian_polar"] = _group([lemmas.jacobian_polar_check()])

    return {"identities": jsonable(out), "conventions": dict(CONVENTIONS),
            "passed": all(v["passed"] for v in out.values())}
