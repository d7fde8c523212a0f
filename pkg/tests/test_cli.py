import csv
import io
import json
import subprocess
import sys

import pytest

from bdec import cli, harness, codes
from bdec.channels import ChannelParams


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_allocate_channel_two(capsys):
    code, out, err = run(capsys, "allocate", "--n", "1023", "--k", "923", "--alpha", "0.0404", "--beta", "0.01")
    assert code == 0
    assert "l_hat=30" in err and "l_tilde=28.4" in err
    summary = rows(out.split("\n\n")[0])[0]
    assert summary["l_hat"] == "30" and abs(float(summary["l_tilde"]) - 28.4) <= 0.05
    table = rows(out.split("\n\n")[1])
    assert [int(r["l"]) for r in table] == list(range(0, 101, 10))


def test_bound_all_zero_channel(capsys):
    code, out, _ = run(capsys, "bound", "--channel", "bdec", "--n", "1023", "--k", "923", "--l", "50",
                       "--r", "50", "--alpha", "0", "--beta", "0")
    assert code == 0
    got = {r["kind"]: float(r["value"]) for r in rows(out)}
    assert got["Finite"] == pytest.approx(2.0**-50 * 2, rel=1e-9)
    assert list(rows(out)[0]) == ["channel", "n", "k", "l", "r", "alpha", "beta", "e_or_u", "kind", "value"]


def test_bound_profile(capsys):
    code, out, _ = run(capsys, "bound", "--channel", "bec", "--code", "hamming74", "--alpha", "0.1",
                       "--profile", "--weights", "exact")
    assert code == 0
    prof = {int(r["e_or_u"]): (r["kind"], float(r["value"])) for r in rows(out) if r["e_or_u"]}
    assert prof[3] == ("Exact", pytest.approx(0.1)) and prof[4] == ("Exact", pytest.approx(0.5))
    assert prof[2][0] == "Zero" and prof[5][0] == "Upper"


def test_oracle_matches_library(capsys):
    code, out, _ = run(capsys, "oracle", "--code", "hamming74", "--channel", "bec", "--alpha", "0.1")
    assert code == 0
    got = {r["quantity"]: float(r["value"]) for r in rows(out) if not r["e_or_u"]}
    lib = harness.exact_failure_small(codes.hamming_7_4(), "bec", ChannelParams(alpha=0.1))
    assert got["P(D=0)"] == pytest.approx(lib.p_D, rel=1e-11)


def test_code_info_and_export(capsys, tmp_path):
    code, out, _ = run(capsys, "code-info", "--n", "15", "--k", "7", "--l", "4", "--export-dir", str(tmp_path))
    assert code == 0
    info = json.loads(out)
    assert (info["n"], info["k"], info["l"], info["d0"], info["d1"]) == (15, 7, 4, 3, 3)
    from bdec import gf2
    G0 = gf2.load_matrix(tmp_path / "G0.txt")
    assert G0.shape == (15, 4)


def test_simulate_is_byte_identical(capsys, tmp_path):
    argv = ["simulate", "--channel", "bdec", "--code", '{"family":"pbch","n":15,"k":7,"l":4}',
            "--alpha", "0.1", "--beta", "0.1", "--trials", "500", "--seed", "3", "--workers", "1"]
    assert cli.main(argv + ["--out", str(tmp_path / "a.csv")]) == 0
    assert cli.main(argv[:-2] + ["--workers", "2", "--out", str(tmp_path / "b.csv")]) == 0
    capsys.readouterr()
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    row = rows((tmp_path / "a.csv").read_text())[0]
    assert list(row) == harness.RESULT_COLUMNS and row["seed"] == "3"


def test_simulate_from_json_config(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"channel": "bec", "code": {"family": "hamming74"}, "alpha": 0.1, "trials": 100}))
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--seed", "1", "--workers", "1")
    assert code == 0 and rows(out)[0]["trials"] == "100"


def _error(err):
    lines = err.strip().splitlines()
    assert len(lines) == 1
    return json.loads(lines[0])


@pytest.mark.parametrize("argv", [
    ["simulate", "--channel", "bec", "--code", "hamming74", "--trials", "5"],  # no seed
    ["allocate", "--n", "1023", "--k", "923", "--alpha", "2", "--beta", "0"],
    ["bound", "--channel", "bdec", "--n", "10", "--k", "5", "--l", "3", "--r", "3"],
    ["bound", "--channel", "bec", "--n", "10", "--k", "5", "--beta", "0.1"],
    ["frobnicate"],
    ["oracle", "--channel", "bec", "--code", "nonsense"],
])
def test_invalid_parameters_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and _error(err)["error"] == "invalid_params"


def test_unrealizable_code_exit_3(capsys):
    code, _, err = run(capsys, "code-info", "--n", "1023", "--k", "923", "--l", "55")
    assert code == 3
    assert _error(err)["nearest"] == [50, 60]


def test_budget_exceeded_exit_4(capsys):
    code, _, err = run(capsys, "oracle", "--channel", "bec", "--code", "bch1023", "--alpha", "0.1")
    assert code == 4 and _error(err)["error"] == "budget_exceeded"


def test_duality_small(capsys):
    code, out, _ = run(capsys, "duality", "--seed", "0")
    assert code == 0 and all(r["agree"] == "1" for r in rows(out))


def test_reproduce_writes_bundle(capsys, tmp_path):
    code, _, _ = run(capsys, "reproduce", "--seed", "0", "--out-dir", str(tmp_path))
    assert code == 0
    assert {p.name for p in tmp_path.iterdir()} == {"channels.csv", "objective.csv", "allocation.csv"}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bdec", "allocate", "--n", "1023", "--k", "923",
                           "--alpha", "0.0253", "--beta", "0.0253"], capture_output=True, text=True)
    assert proc.returncode == 0 and "l_hat=50" in proc.stderr
