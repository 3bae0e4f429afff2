import json

import pytest

from zakeri.cli import argv_from_config, main


def run(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def config_of(err):
    return json.loads(err.strip().splitlines()[0])


def test_pi_orbit(capsys):
    code, out, err = run(capsys, ["pi-orbit", "--ma", "[0,0,1]"])
    assert code == 0
    assert json.loads(out) == [[0, 0, 1], [0]]
    assert config_of(err)["command"] == "pi-orbit"


def test_validate_ma_illegal(capsys):
    code, _, err = run(capsys, ["validate-ma", "--ma", "[0,1]"])
    assert code == 2
    assert "index 1" in err


def test_validate_ma_legal(capsys):
    code, out, _ = run(capsys, ["validate-ma", "--ma", "[1,1,2]"])
    assert code == 0 and json.loads(out)["legal"]


def test_usage_errors(capsys):
    assert run(capsys, ["frobnicate"])[0] == 1
    assert run(capsys, ["pi-orbit", "--ma", "[0]", "--bogus", "1"])[0] == 1
    assert run(capsys, ["phi", "--c", "abc"])[0] == 1
    assert run(capsys, ["render-dyn", "--family", "cubic", "--out", "x.ppm"])[0] == 1


def test_phi_unicritical(capsys):
    code, out, _ = run(capsys, ["phi", "--c", "1,0", "--rot", "golden", "--max-gen", "2"])
    assert code == 0
    d = json.loads(out)
    assert d["embedded"] == pytest.approx([1.0, 0.0], abs=1e-9)
    assert d["resolved"] is True


def test_phi_domain_error(capsys):
    assert run(capsys, ["phi", "--c=5,0", "--max-gen", "1"])[0] == 2


def test_render_param_replay(capsys, tmp_path):
    out = tmp_path / "a.ppm"
    code, _, err = run(capsys, ["render-param", "--res", "32x24", "--max-iter", "100", "--out", str(out)])
    assert code == 0
    first = out.read_bytes()
    assert first.startswith(b"P6\n32 24\n255\n") and len(first) == 13 + 3 * 32 * 24
    cfg = config_of(err)
    assert cfg["center"] == [-2.75, -2.5] and cfg["width"] == 11.0
    out.unlink()
    assert main(argv_from_config(cfg)) == 0
    assert out.read_bytes() == first
    assert not list(tmp_path.glob(".tmp-*"))


def test_render_dyn_overlay(capsys, tmp_path):
    out = tmp_path / "q.ppm"
    code, _, _ = run(capsys, ["render-dyn", "--overlay", "siegel", "--overlay", "bubbles", "--bubble-gen", "2",
                              "--res", "32x32", "--max-iter", "100", "--out", str(out)])
    assert code == 0 and len(out.read_bytes()) == len(b"P6\n32 32\n255\n") + 3 * 1024


def test_json_subcommands_replay(capsys, tmp_path):
    for argv in (["bubble-tree", "--max-gen", "2", "--max-points", "8"],
                 ["trace-ray", "--gaps", "1", "--depth", "10"],
                 ["siegel-series", "--N", "20", "--K", "50", "--Kb", "50"]):
        code, out, err = run(capsys, argv)
        assert code == 0, argv
        json.loads(out)
        code, again, _ = run(capsys, argv_from_config(config_of(err)))
        assert code == 0 and again == out


def test_siegel_series_csv(capsys, tmp_path):
    csv = tmp_path / "b.csv"
    js = tmp_path / "s.json"
    code, _, _ = run(capsys, ["siegel-series", "--N", "20", "--K", "50", "--Kb", "50",
                              "--out", str(js), "--boundary-csv", str(csv)])
    assert code == 0
    assert len(json.loads(js.read_text())["coeffs"]) > 0
    assert len(csv.read_text().strip().splitlines()) > 50
