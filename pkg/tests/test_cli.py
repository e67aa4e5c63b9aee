import json

import numpy as np
import pytest

from kronmimo import cli, fixed_point
from kronmimo.profile import VarianceProfile, save

IID = ["--generate", "constant:1", "--N", "4", "--n", "4"]


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_solve_iid(capsys):
    code, doc, _ = run(capsys, "solve", *IID, "--t", "2")
    assert code == 0
    assert doc["schema"] == 1
    assert doc["delta"] == pytest.approx(0.5, abs=1e-14)
    assert set(doc) >= {"delta", "delta_tilde", "gamma", "gamma_tilde", "one_minus_t2gg"}
    assert doc["one_minus_t2gg"] == pytest.approx(0.75, abs=1e-14)


def test_equiv_rho_zero(capsys):
    code, doc, _ = run(capsys, "equiv", *IID, "--rho", "0")
    assert code == 0
    assert doc["v"] == 0 and doc["sigma2"] == 0


def test_equiv_bits(capsys):
    _, nats, _ = run(capsys, "equiv", *IID, "--rho", "2")
    _, bits, _ = run(capsys, "equiv", *IID, "--rho", "2", "--bits")
    assert nats["v"] == pytest.approx(4 * (2 * np.log(2) - 0.5), abs=1e-12)
    assert bits["v"] == pytest.approx(nats["v"] / np.log(2), rel=1e-14)
    assert bits["sigma2"] == pytest.approx(nats["sigma2"] / np.log(2) ** 2, rel=1e-14)
    assert bits["unit"] == "bits"


def test_outage_at_median(capsys):
    _, eq, _ = run(capsys, "equiv", *IID, "--rho", "2")
    code, doc, _ = run(capsys, "outage", *IID, "--rho", "2", "--threshold", str(eq["v"]))
    assert code == 0
    assert doc["outage"] == pytest.approx(0.5, abs=1e-12)
    _, bits, _ = run(capsys, "outage", *IID, "--rho", "2", "--threshold", str(eq["v"] / np.log(2)), "--bits")
    assert bits["outage"] == pytest.approx(0.5, abs=1e-12)


def test_simulate_is_reproducible_across_threads(capsys, tmp_path):
    blobs = []
    for threads in (1, 4, 8, 1):
        out = tmp_path / f"s{threads}_{len(blobs)}.csv"
        code, doc, _ = run(
            capsys, "simulate", *IID, "--rho", "2", "--trials", "300", "--seed", "7",
            "--threads", str(threads), "--out", str(out),
        )
        assert code == 0
        assert doc["seed"] == 7
        blobs.append(out.read_bytes())
    assert all(b == blobs[0] for b in blobs)
    lines = blobs[0].decode().splitlines()
    assert len(lines) == 300
    samples = np.array([float(x) for x in lines])
    assert np.all(samples >= 0)
    assert doc["mean"] == pytest.approx(samples.mean())
    assert set(doc) >= {"mean", "var", "ks_stat", "ks_p", "var_ratio"}


def test_simulate_default_seed_is_echoed(capsys):
    code, doc, _ = run(capsys, "simulate", *IID, "--rho", "1", "--trials", "5")
    assert code == 0 and doc["seed"] == 0
    assert doc["ks_p"] is None  # too few samples for a normality test


def test_profile_round_trip(capsys, tmp_path):
    src = tmp_path / "src.json"
    save(VarianceProfile([0.1, 1 / 3, 2.0, 0.7], [np.e / 3, 0.2, 1.1]), src)
    copy = tmp_path / "copy.json"
    _, a, _ = run(capsys, "solve", "--profile", str(src), "--t", "1.3", "--write-profile", str(copy))
    _, b, _ = run(capsys, "solve", "--profile", str(copy), "--t", "1.3")
    assert json.loads(src.read_text()) == json.loads(copy.read_text())
    for key in ("delta", "delta_tilde", "gamma", "gamma_tilde"):
        assert abs(a[key] - b[key]) <= 1e-15


def test_verify_small(capsys):
    code, doc, _ = run(
        capsys, "verify", "--profile-family", "constant:1", "--rho", "2", "--ns", "4,8,16",
        "--trials-per-n", "200", "--seed", "5",
    )
    assert code == 0
    assert doc["seed"] == 5
    assert doc["alpha_gap"]["ns"] == [4, 8, 16]
    assert doc["trials"] == [200, 800, 3200]
    assert "fitted_exponent" in doc["trace_gap"]


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["solve", *IID])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["bogus"])
    assert info.value.code == 2
    capsys.readouterr()
    code, _, err = run(capsys, "solve", "--t", "1")
    assert code == 2 and json.loads(err)["error"] == "UsageError"
    code, _, err = run(capsys, "solve", "--generate", "constant:1", "--t", "1")
    assert code == 2
    code, _, err = run(capsys, "equiv", *IID, "--rho", "-1")
    assert code == 2
    code, _, err = run(capsys, "solve", "--generate", "constant:-1", "--N", "2", "--n", "2", "--t", "1")
    assert code == 2 and json.loads(err)["error"] == "InvalidParams"
    code, _, err = run(capsys, "simulate", *IID, "--rho", "1", "--trials", "0")
    assert code == 2


def test_invalid_profile_file(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 1, "N": 2, "d": [1.0, -1.0], "d_tilde": [1.0]}))
    code, _, err = run(capsys, "solve", "--profile", str(bad), "--t", "1")
    assert code == 2 and json.loads(err)["error"] == "RejectNegativeEntry"


def test_io_errors(capsys, tmp_path):
    code, _, err = run(capsys, "solve", "--profile", str(tmp_path / "missing.json"), "--t", "1")
    assert code == 4
    garbage = tmp_path / "garbage.json"
    garbage.write_text("{not json")
    code, _, _ = run(capsys, "solve", "--profile", str(garbage), "--t", "1")
    assert code == 4


def test_numerical_error_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(fixed_point, "MAX_BISECTIONS", 2)
    code, _, err = run(capsys, "solve", "--generate", "linear-ramp:0.1,2", "--N", "30", "--n", "20", "--t", "3")
    assert code == 3
    assert json.loads(err)["error"] == "NoConvergence"
