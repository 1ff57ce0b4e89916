import json
import os

import pytest

from jacobs_ladder.cli import EXIT_CONFIG, EXIT_OK, main

T_MAX = "3000"


@pytest.fixture(scope="module")
def table_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "ladder.bin"
    assert main(["ladder", "build", "--table", str(path), "--t-max", T_MAX]) == EXIT_OK
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def common(path):
    return ["--table", path, "--t-max", T_MAX]


def test_build_is_idempotent(capsys, table_path):
    before = os.stat(table_path).st_mtime_ns
    code, out, _ = run(capsys, "ladder", "build", *common(table_path))
    assert code == 0 and "cache hit" in out
    assert os.stat(table_path).st_mtime_ns == before


def test_build_force_and_csv(capsys, tmp_path, table_path):
    path = tmp_path / "t.bin"
    path.write_bytes(table_path.read_bytes())
    (tmp_path / "t.bin.hl").write_bytes((table_path.parent / "ladder.bin.hl").read_bytes())
    code, out, _ = run(capsys, "ladder", "build", *common(path), "--force", "--csv", tmp_path / "t.csv")
    assert code == 0 and out.startswith("built")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "T,phi1,hl" and len(lines) > 100


def test_corrupt_table_is_rebuilt(capsys, tmp_path, table_path):
    path = tmp_path / "t.bin"
    data = bytearray(table_path.read_bytes())
    data[-20] ^= 0xFF
    path.write_bytes(bytes(data))
    (tmp_path / "t.bin.hl").write_bytes((table_path.parent / "ladder.bin.hl").read_bytes())
    code, out, _ = run(capsys, "ladder", "build", *common(path))
    assert code == 0 and out.startswith("built")
    code, out, _ = run(capsys, "ladder", "build", *common(path))
    assert "cache hit" in out


def test_changed_constant_rebuilds(capsys, tmp_path, table_path):
    path = tmp_path / "t.bin"
    path.write_bytes(table_path.read_bytes())
    (tmp_path / "t.bin.hl").write_bytes((table_path.parent / "ladder.bin.hl").read_bytes())
    code, out, _ = run(capsys, "ladder", "build", *common(path), "--c0", "0.5")
    assert code == 0 and out.startswith("built")


def test_ladder_check(capsys, tmp_path, table_path):
    code, out, _ = run(capsys, "ladder", "check", *common(table_path), "--json", tmp_path / "c.json")
    assert code == 0
    assert "decade 1e3" in out
    rep = json.loads((tmp_path / "c.json").read_text())
    assert rep["flags"] == []


def test_cells_listing(capsys, tmp_path):
    code, out, _ = run(capsys, "cells", "--family", "sn", "--range", 0, 8, "--json", tmp_path / "c.json")
    assert code == 0
    rows = [l for l in out.splitlines()[1:] if l.strip()]
    assert len(rows) == 2 and all(r.split()[5] == "ok" for r in rows)
    data = json.loads((tmp_path / "c.json").read_text())
    assert data["generator"]["family"] == "sn"
    assert len(data["cells"]) == 2


def test_cells_marks_inadmissible(capsys):
    code, out, _ = run(capsys, "cells", "--family", "bessel", "--nu", 2, "--range", 0, 9)
    assert code == 0 and "inadmissible" in out.splitlines()[1]


def test_cells_empty_range(capsys):
    code, out, _ = run(capsys, "cells", "--family", "z", "--range", 15, 16)
    assert code == 0 and len(out.splitlines()) == 1


def test_verify_outputs(capsys, tmp_path, table_path):
    code, out, _ = run(
        capsys, "verify", "--family", "sn", "--near", 1000, *common(table_path),
        "--json", tmp_path / "v.json", "--csv", tmp_path / "v.csv",
        "--emit", "plot", "--out-dir", tmp_path / "plots",
    )
    assert code == 0 and out.startswith("PASS")
    rep = json.loads((tmp_path / "v.json").read_text())[0]
    assert rep["passed"] and all(rep["gates"].values())
    csv = (tmp_path / "v.csv").read_text().splitlines()
    assert len(csv) == 2 and "omega" in csv[0]
    plots = list((tmp_path / "plots").iterdir())
    assert len(plots) == 1
    head = plots[0].read_text().splitlines()
    assert head[0].split(",")[:3] == ["t", "x", "abs_H"] and len(head) == 1025


def test_verify_range_is_capped(capsys, table_path):
    code, out, _ = run(capsys, "verify", "--family", "z", "--range", 500, 600, "--max-cells", 2, *common(table_path))
    assert code == 0
    assert len(out.splitlines()) == 2


def test_verify_refuses_inadmissible(capsys, table_path):
    args = ["verify", "--family", "bessel", "--nu", 2, "--index", 0, *common(table_path)]
    code, _, err = run(capsys, *args)
    assert code == EXIT_CONFIG and "refused" in err
    # the override gets past admissibility; this cell then lies below the ladder image
    code, _, err = run(capsys, *args, "--allow-inadmissible")
    assert code == EXIT_CONFIG and "outside ladder image" in err


def test_verify_deformed(capsys, table_path):
    base = ["verify", "--family", "cn", "--near", 1500, *common(table_path), "--deform-at", "0.7"]
    code, out, _ = run(capsys, *base, "--deform-amps", "0.05")
    assert code == 0 and out.startswith("PASS")
    code, _, err = run(capsys, *base, "--deform-amps", "-1.5")
    assert code == EXIT_CONFIG and "sign" in err


def test_verify_outside_image(capsys, table_path):
    code, _, err = run(capsys, "verify", "--family", "sn", "--near", 5e4, *common(table_path))
    assert code == EXIT_CONFIG and "outside ladder image" in err


def test_omega_scan(capsys, tmp_path, table_path):
    code, out, _ = run(
        capsys, "omega-scan", "--family", "sn", "--bands", "500:520", "9000:9100", *common(table_path),
        "--json", tmp_path / "o.json",
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("band [500, 520]: 5 cells")
    assert "absent" in lines[1]
    data = json.loads((tmp_path / "o.json").read_text())
    assert data["bands"][1]["absent"]
    assert 0.8 < data["bands"][0]["median_omega"] < 1.0


def test_config_file_and_workers_are_deterministic(capsys, tmp_path, table_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# verification run\ntable = {table_path}\nt_max = {T_MAX}\nfamily = z\nrange = 800 820\nmax_cells = 3\n")
    code, _, _ = run(capsys, "verify", "--config", cfg, "--json", tmp_path / "a.json")
    assert code == 0
    code, _, _ = run(capsys, "verify", "--config", cfg, "--workers", 2, "--json", tmp_path / "b.json")
    assert code == 0
    assert (tmp_path / "a.json").read_text() == (tmp_path / "b.json").read_text()
    assert len(json.loads((tmp_path / "a.json").read_text())) == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        ["verify", "--family", "sn", "--near", "1000", "--tolerance", "-1"],
        ["omega-scan", "--family", "sn", "--bands", "9:3"],
        ["omega-scan", "--family", "sn", "--bands", "abc"],
        ["verify", "--config", "/nonexistent/run.cfg"],
        ["cells", "--family", "sn", "--k2", "1.5", "--range", "0", "5"],
        ["ladder", "build", "--t-max", "-5"],
    ],
)
def test_config_errors(capsys, tmp_path, argv):
    assert main(argv + ["--table", str(tmp_path / "x.bin")]) == EXIT_CONFIG


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == 0
    assert "omega-scan" in capsys.readouterr().out
