import json
import subprocess
import sys

import numpy as np
import pytest

from dginibre.matrixio import write_matrix
from dginibre.outputs import read_csv_comment
from dginibre.runner import (EXIT_FAILED, EXIT_OK, EXIT_OUTSIDE_BULK, EXIT_USAGE,
                             ConfigError, RunConfig, main)


def run(tmp_path, *argv, config=None, out="out"):
    outdir = tmp_path / out
    args = list(argv) + ["--out", str(outdir)]
    if config is not None:
        cfg = tmp_path / ("%s.json" % out)
        cfg.write_text(json.dumps(config))
        args += ["--config", str(cfg)]
    code = main(args)
    with open(outdir / "manifest.json") as fh:
        manifest = json.load(fh)
    return code, outdir, manifest


def test_detequiv_zero(tmp_path):
    code, out, man = run(tmp_path, "detequiv", config={"n": 8, "z0": 0})
    assert code == EXIT_OK
    d = json.loads((out / "detequiv.json").read_text())
    assert d["detequiv"]["u_star"] == pytest.approx(1, abs=1e-12)
    assert d["detequiv"]["rho"] == pytest.approx(1, abs=1e-12)
    assert man["exit_code"] == 0 and man["status"] == "ok"
    assert [f["name"] for f in man["files"]] == ["detequiv.json"]
    assert "girko" in man["conventions"]


def test_detequiv_outside_bulk(tmp_path):
    code, _, man = run(tmp_path, "detequiv", config={"n": 8, "z0": 2})
    assert code == EXIT_OUTSIDE_BULK
    assert man["status"] == "outside_bulk" and man["exit_code"] == 2


@pytest.mark.parametrize("config", [
    {"n": 8, "bogus": 1},
    {"n": 1},
    {"n": 8, "trials": 0},
    {"n": 8, "tolerances": {"sup_distance": -1}},
    {"n": 8, "z0": "not a number"},
    {"deformation": {"kind": "two_atom", "a": 0.5}, "n": 7},
    {"n": 8, "window_radius": 2.0},
])
def test_malformed_config_exit_64(tmp_path, config):
    code, _, man = run(tmp_path, "detequiv", config=config)
    assert code == EXIT_USAGE
    assert man["status"] == "usage_error"


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["detequiv", "--config", str(bad), "--out", str(tmp_path / "o")]) == EXIT_USAGE
    assert (tmp_path / "o" / "manifest.json").exists()


def test_bad_flags_exit_64(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["detequiv", "--n", "abc"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == EXIT_USAGE


def test_explicit_deformation_malformed_file(tmp_path):
    path = tmp_path / "a0.csv"
    path.write_text("garbage")
    code, _, _ = run(tmp_path, "detequiv",
                     config={"deformation": {"kind": "explicit", "path": str(path)}, "n": 2})
    assert code == EXIT_USAGE


def test_explicit_deformation(tmp_path):
    path = tmp_path / "a0.csv"
    write_matrix(path, 0.5 * np.eye(4))
    code, out, _ = run(tmp_path, "detequiv",
                       config={"deformation": {"kind": "explicit", "path": str(path)}, "n": 4})
    assert code == EXIT_OK
    d = json.loads((out / "detequiv.json").read_text())
    assert d["detequiv"]["rho"] == pytest.approx(1, abs=1e-12)


def test_cli_overrides_config(tmp_path):
    code, _, man = run(tmp_path, "detequiv", "--n", "6", "--seed", "9",
                       config={"n": 8, "seed": 3})
    assert code == EXIT_OK
    assert man["config"]["n"] == 6 and man["config"]["master_seed"] == 9


def test_support_unit_circle(tmp_path):
    code, out, man = run(tmp_path, "support", "--pick-bulk",
                         config={"n": 4, "support": {"resolution": 200}})
    assert code == EXIT_OK
    s = json.loads((out / "support.json").read_text())
    data = np.loadtxt(out / "support_contours.csv", delimiter=",", comments="#", skiprows=2)
    r = np.hypot(data[:, 1], data[:, 2])
    assert np.max(np.abs(r - 1)) < s["grid_step"]
    assert abs(complex(*s["picked"]["z0"])) < s["grid_step"]
    assert read_csv_comment(out / "support_contours.csv")["config_hash"] == man["config_hash"]


def test_simulate_deterministic_across_threads(tmp_path):
    cfg = {"n": 16, "trials": 6, "seed": 4, "simulate": {"sigma_min": True}}
    c1, o1, _ = run(tmp_path, "simulate", config=cfg, out="a")
    c2, o2, _ = run(tmp_path, "simulate", "--threads", "3", config=cfg, out="b")
    assert c1 == c2 == EXIT_OK
    for name in ("eigenvalues.csv", "sigma_min.csv"):
        assert (o1 / name).read_bytes() == (o2 / name).read_bytes()
    rows = np.loadtxt(o1 / "eigenvalues.csv", delimiter=",", comments="#", skiprows=3)
    assert rows.shape == (6 * 16, 3)


def test_localstats_has_oracle_column(tmp_path):
    cfg = {"n": 64, "trials": 10, "window_radius": 4.0, "bins": {"r_max": 2.0, "width": 0.2}}
    code, out, _ = run(tmp_path, "localstats", config=cfg)
    assert code == EXIT_OK
    header = [l for l in (out / "pair_correlation.csv").read_text().splitlines()
              if not l.startswith("#")][0]
    assert header.endswith("ginibre_exact")
    d = json.loads((out / "localstats.json").read_text())
    assert d["rho"] == pytest.approx(1)


def test_universality_single_trial_unreliable(tmp_path):
    cfg = {"n": 32, "trials": 1, "window_radius": 3.0, "bins": {"r_max": 1.0, "width": 0.25},
           "r_max": 1.0}
    code, out, man = run(tmp_path, "universality", config=cfg)
    assert code in (EXIT_OK, EXIT_FAILED)
    assert man["reliable"] is False
    assert json.loads((out / "universality.json").read_text())["reliable"] is False
    assert {f["name"] for f in man["files"]} == {"universality_curve.csv", "universality.svg",
                                                 "universality.json"}


def test_universality_byte_identical(tmp_path):
    cfg = {"n": 32, "trials": 8, "window_radius": 3.0, "bins": {"r_max": 1.0, "width": 0.25},
           "r_max": 1.0}
    run(tmp_path, "universality", config=cfg, out="a")
    run(tmp_path, "universality", "--threads", "2", config=cfg, out="b")
    for name in ("universality_curve.csv", "universality.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_universality_outside_bulk(tmp_path):
    code, _, man = run(tmp_path, "universality", config={"n": 16, "z0": [1.5, 0], "trials": 2})
    assert code == EXIT_OUTSIDE_BULK


def test_girko_default_grid(tmp_path):
    code, out, _ = run(tmp_path, "girko", config={"n": 16, "seed": 0})
    res = json.loads((out / "girko.json").read_text())
    assert res["check"]["rel_err"] < 1e-2
    assert code == EXIT_OK


def test_manifest_written_on_internal_error(tmp_path, monkeypatch):
    import dginibre.runner as runner

    def boom(*a, **k):
        raise RuntimeError("kaboom")
    monkeypatch.setitem(runner.HANDLERS, "detequiv", boom)
    code, _, man = run(tmp_path, "detequiv", config={"n": 4})
    assert code == 70 and man["status"] == "error" and "kaboom" in man["message"]


def test_config_digest_ignores_threads():
    a = RunConfig.from_dict({"n": 8, "threads": 1})
    b = RunConfig.from_dict({"n": 8, "threads": 4})
    c = RunConfig.from_dict({"n": 8, "seed": 1})
    assert a.digest() == b.digest() != c.digest()
    with pytest.raises(ConfigError):
        RunConfig.from_dict([1, 2])


@pytest.mark.slow
def test_verify_susy_quick(tmp_path):
    code, out, man = run(tmp_path, "verify-susy", config={"n": 2, "verify": {"quick": True}})
    res = json.loads((out / "verify_susy.json").read_text())
    failing = [k for k, v in res["identities"].items() if not v["passed"]]
    # the polar lemma constant is the one recorded discrepancy
    assert failing == ["jacobian_polar"]
    assert code == EXIT_FAILED


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dginibre", "detequiv", "--n", "4",
                           "--out", str(tmp_path / "m")], capture_output=True)
    assert proc.returncode == 0
