import json
import subprocess
import sys

import pytest

from ghostlab.cli import EXIT_OK, EXIT_USAGE, main, parse_window
from ghostlab.report import canonical_json, canonicalize, strip_timing


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_family_sl2(capsys):
    code, out, _ = run(["family", "--kind", "sl2", "--primes", "3,5,7"], capsys)
    assert code == EXIT_OK
    assert "orders: 24,120,336" in out


def test_family_alt_json(tmp_path, capsys):
    path = tmp_path / "f.json"
    code, out, _ = run(["family", "--kind", "alt", "--degrees", "4,5", "--out", str(path)], capsys)
    assert code == EXIT_OK and "orders: 12,60" in out
    data = json.loads(path.read_text())
    assert [r["order"] for r in data["levels"]] == [12, 60] and data["symmetry"]


@pytest.mark.parametrize("argv", [
    ["family", "--kind", "sl2", "--primes", "3,x"],
    ["family", "--kind", "sl2", "--primes", "4"],
    ["family", "--kind", "sl2"],
    ["certify", "--kind", "sl2", "--primes", "3", "--window", ""],
    ["certify", "--kind", "sl2", "--primes", "3", "--window", "2"],
    ["ghost", "--kind", "sl2", "--primes", "3", "--cluster-tol", "0.1"],
    ["ghost", "--kind", "sl2", "--primes", "3", "--projection-tol", "-1"],
    ["ghost", "--kind", "sl2", "--primes", "3", "--truncate", "4"],
])
def test_usage_errors(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == EXIT_USAGE and "usage error" in err


def test_argparse_usage_exit():
    with pytest.raises(SystemExit) as info:
        main(["family", "--kind", "nope"])
    assert info.value.code == EXIT_USAGE


def test_certify_complete_graph(tmp_path, capsys):
    code, out, _ = run(["certify", "--kind", "complete", "--orders", "6", "--out", str(tmp_path / "c.json")], capsys)
    assert code == EXIT_OK and "lambda1=6 " in out
    data = json.loads((tmp_path / "c.json").read_text())
    assert data["min_lambda1"] == 6.0


def test_certify_sl2_csv(tmp_path, capsys):
    csv_path = tmp_path / "s.csv"
    code, out, _ = run(["certify", "--kind", "sl2", "--primes", "3,5,7", "--csv", str(csv_path)], capsys)
    assert code == EXIT_OK
    assert "min lambda1 = 0.585786" in out
    assert csv_path.read_text().splitlines()[0] == "block_label,dim,degree,diameter,lambda1,mu2"


def test_ghost_small_window(tmp_path, capsys):
    path = tmp_path / "g.json"
    code, out, _ = run(["ghost", "--kind", "sl2", "--primes", "3,5", "--truncate", "1", "--out", str(path)], capsys)
    assert code == EXIT_OK
    rep = json.loads(path.read_text())
    assert rep["schema"] == "ghost-lab/1"
    assert rep["scope"].startswith("finite-scale evidence")
    assert rep["rank_sequence"]["diagonal"] == [3, 5]
    assert rep["truncation"]["tail_ranks"] == [0]
    for claim in ("claim1", "claim2", "claim3"):
        assert rep[claim]["verdict"] == "pass (finite scale)"
        assert rep[claim]["window"] == [1, 2]
    assert rep["tolerances"]["cluster"] == 1e-8


def test_ghost_trivial_policy(tmp_path, capsys):
    path = tmp_path / "g.json"
    code, out, _ = run(["ghost", "--kind", "sl2", "--primes", "3,5", "--policy", "trivial", "--out", str(path)], capsys)
    assert code == EXIT_OK
    rep = json.loads(path.read_text())
    assert rep["claim2"]["verdict"] == "fail: (★★) not satisfied by policy"
    assert rep["flags"]["star_star"] is False
    assert rep["claim2"]["nonzero_off_diagonal"] == 2


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("kind = sl2\nprimes = 3,5\npolicy = steinberg\nwindow = 2\n\n[tolerances]\ncluster = 1e-9\n")
    path = tmp_path / "g.json"
    code, _, _ = run(["ghost", "--config", str(cfg), "--out", str(path)], capsys)
    assert code == EXIT_OK
    rep = json.loads(path.read_text())
    assert rep["window"]["labels"] == ["SL(2,5)"]
    assert rep["tolerances"]["cluster"] == 1e-9
    cfg.write_text("kind = sl2\nprimes = 3\nbogus = 1\n")
    assert run(["family", "--config", str(cfg)], capsys)[0] == EXIT_USAGE


def test_parse_window():
    assert parse_window(None, 3) == [0, 1, 2]
    assert parse_window("2-3", 3) == [1, 2]
    assert parse_window("1,3", 3) == [0, 2]


def test_report_roundtrip(tmp_path, capsys):
    path = tmp_path / "g.json"
    run(["ghost", "--kind", "product", "--preset", "mixed", "--out", str(path)], capsys)
    text = path.read_text()
    assert canonical_json(json.loads(text)) == text


def test_canonicalize_rounding():
    assert canonicalize({"x": 0.1 + 0.2, "y": [1, True, None]}) == {"x": 0.3, "y": [1, True, None]}
    with pytest.raises(ValueError):
        canonicalize(float("nan"))
    assert "timing" not in strip_timing({"timing": 1, "a": 2})


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ghostlab", "family", "--kind", "alt", "--degrees", "4"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "orders: 12" in proc.stdout
