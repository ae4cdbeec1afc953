import json
import subprocess
import sys

import pytest

from gbam.cli import main, factory_tables, parse_pairs

GOLDEN = "golden/tables.txt"


def write(tmp_path, name="s.json", **over):
    base = {"name": "t", "seed": 1, "capacity_kbps": 622000, "factory": "mam",
            "classes": [{"bc_percent": 40}, {"bc_percent": 35}, {"bc_percent": 25}],
            "workloads": [{"count": 60}, {"count": 60, "start_delay_s": 30},
                          {"count": 60, "start_delay_s": 60}]}
    base.update(over)
    path = tmp_path / name
    path.write_text(json.dumps(base))
    return path


def test_validate_prints_bounds(tmp_path, capsys):
    assert main(["validate", str(write(tmp_path))]) == 0
    out = capsys.readouterr().out
    assert "248800" in out and "private_kbps" in out


def test_validate_rdm_bounds(tmp_path, capsys):
    assert main(["validate", str(write(tmp_path, factory="rdm"))]) == 0
    rows = [l.split() for l in capsys.readouterr().out.splitlines() if l.strip().startswith("CT")]
    assert [int(r[5]) for r in rows] == [622000, 373200, 155500]


def test_validate_rejects_oversubscription(tmp_path, capsys):
    path = write(tmp_path, classes=[{"bc_percent": 40}, {"bc_percent": 36}, {"bc_percent": 25}])
    assert main(["validate", str(path)]) == 1
    err = capsys.readouterr().err
    assert "SumExceedsCapacity" in err and str(path) in err


def test_validate_rejects_bad_keys(tmp_path, capsys):
    assert main(["validate", str(write(tmp_path, extra=1))]) == 1
    assert "unknown key" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert main(["validate", str(missing)]) == 2
    assert str(missing) in capsys.readouterr().err


def test_usage_errors(capsys):
    assert main([]) == 2
    assert main(["frobnicate"]) == 2


def test_tables_match_golden(request, capsys):
    assert main(["tables"]) == 0
    out = capsys.readouterr().out
    golden = (request.config.rootpath / "tests" / GOLDEN).read_text()
    assert out == golden == factory_tables()
    assert "248.80" in out


def test_run_writes_csv(tmp_path, capsys):
    path = write(tmp_path)
    out = tmp_path / "out"
    assert main(["run", str(path), "--engine", "gbam:rdm", "--out", str(out), "--check"]) == 0
    assert {p.name for p in out.iterdir()} == {"load.csv", "summary.csv", "meta.csv"}
    assert "link utilization" in capsys.readouterr().out


def test_run_factory_matches_oracle(tmp_path):
    path = write(tmp_path)
    for engine in ("gbam", "mam"):
        assert main(["run", str(path), "--engine", engine, "--out", str(tmp_path / engine)]) == 0
    for f in ("summary.csv", "load.csv"):
        assert (tmp_path / "gbam" / f).read_bytes() == (tmp_path / "mam" / f).read_bytes()


def test_run_unknown_engine(tmp_path, capsys):
    assert main(["run", str(write(tmp_path)), "--engine", "magic", "--out", str(tmp_path / "o")]) == 2
    assert "magic" in capsys.readouterr().err


def test_run_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert main(["run", str(write(tmp_path)), "--out", str(blocker / "x")]) == 2
    assert "blocker" in capsys.readouterr().err


def test_compare_default_pairs(tmp_path, capsys):
    assert main(["compare", str(write(tmp_path)), "--seeds", "3"]) == 0
    out = capsys.readouterr().out
    assert out.count("equivalent over 3 seeds") == 3


def test_compare_reports_divergence(tmp_path, capsys):
    path = write(tmp_path, workloads=[{"count": 300}, {"count": 0}, {"count": 0}])
    assert main(["compare", str(path), "--pairs", "gbam:mam=rdm", "--seeds", "2"]) == 1
    out = capsys.readouterr().out
    assert "DIVERGENT at seed" in out
    assert "blocked (shortfall" in out


def test_compare_zero_seeds(tmp_path, capsys):
    assert main(["compare", str(write(tmp_path)), "--seeds", "0"]) == 0
    assert capsys.readouterr().out.strip() == "no runs"


def test_parse_pairs():
    assert parse_pairs("a=b, c=d") == [("a", "b"), ("c", "d")]
    with pytest.raises(ValueError):
        parse_pairs("ab")
    with pytest.raises(ValueError):
        parse_pairs(" , ")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gbam", "tables"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("Bandwidth constraints")
