import json
import math

import numpy as np
import pytest

from nhkitaev.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, format_complex, main, parse_complex

MIXED_FLAGS = ["--m", "0.4", "--t1", "2", "--t2", "1", "--d1", "1.7320508075688772", "--d2", "-1.7320508075688772"]


def _rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return [ln.split(",") for ln in lines[1:]], lines[0].split(",")


def _config_line(text):
    line = next(ln for ln in text.splitlines() if ln.startswith("# config: "))
    return json.loads(line[len("# config: ") :])


@pytest.mark.parametrize(
    "text, value",
    [("2", 2), ("1.5+0.5i", 1.5 + 0.5j), ("-1-2i", -1 - 2j), ("i", 1j), ("-i", -1j), ("3i", 3j), ("2.5e-1-1e1i", 0.25 - 10j), (1.5, 1.5)],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


def test_parse_complex_rejects_junk():
    from nhkitaev.cli import ConfigError

    with pytest.raises(ConfigError):
        parse_complex("1+2j+")


def test_format_complex_round_trip(rng):
    for z in rng.normal(size=20) + 1j * rng.normal(size=20):
        assert parse_complex(format_complex(complex(z))) == z


def test_periodic_single_point(capsys):
    assert main(["periodic", *MIXED_FLAGS, "--n-k", "1"]) == EXIT_OK
    rows, cols = _rows(capsys.readouterr().out)
    assert cols[0] == "k" and len(rows) == 1
    lp = complex(float(rows[0][1]), float(rows[0][2]))
    lm = complex(float(rows[0][3]), float(rows[0][4]))
    assert {round(lp.real, 12), round(lm.real, 12)} == {3.4, -3.4}


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"m": "5", "t1": "2", "t2": "1", "d1": "1", "d2": "-1", "n_k": 3}))
    assert main(["periodic", "--config", str(cfg), "--m", "0.4"]) == EXIT_OK
    out = capsys.readouterr().out
    assert _config_line(out)["m"] == format_complex(0.4)
    assert len(_rows(out)[0]) == 3


def test_config_round_trip_is_identical(tmp_path, capsys):
    assert main(["periodic", *MIXED_FLAGS, "--n-k", "7"]) == EXIT_OK
    first = capsys.readouterr().out
    cfg = tmp_path / "echo.json"
    cfg.write_text(json.dumps(_config_line(first)))
    assert main(["periodic", "--config", str(cfg)]) == EXIT_OK
    assert capsys.readouterr().out == first


def test_exit_codes(tmp_path, capsys):
    assert main(["periodic", "--m", "1"]) == EXIT_CONFIG
    assert main(["finite", *MIXED_FLAGS]) == EXIT_CONFIG
    assert main(["periodic", *MIXED_FLAGS, "--out", str(tmp_path / "no" / "dir.csv")]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": "red"}))
    assert main(["periodic", "--config", str(bad)]) == EXIT_CONFIG
    # t1*t2 = d1*d2 makes the bulk equation degenerate
    assert main(["infinite", "--m", "0.2", "--t1", "1", "--t2", "2", "--d1", "1", "--d2", "2", "--n-alpha", "16"]) == EXIT_NUMERIC
    capsys.readouterr()


def test_negative_complex_flag(capsys):
    assert main(["periodic", "--m", "0.4", "--t1", "2", "--t2", "1", "--d1", "1", "--d2", "-1.7+2i", "--n-k", "2"]) == EXIT_OK
    assert _config_line(capsys.readouterr().out)["d2"] == format_complex(-1.7 + 2j)


def test_finite_single_site(capsys):
    assert main(["finite", *MIXED_FLAGS, "--L", "1"]) == EXIT_OK
    rows, _ = _rows(capsys.readouterr().out)
    assert sorted(float(r[1]) for r in rows) == pytest.approx([-0.4, 0.4])


def test_finite_json_with_localisation(tmp_path):
    out = tmp_path / "f.json"
    assert main(["finite", *MIXED_FLAGS, "--L", "20", "--localize", "--format", "json", "--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert len(doc["rows"]) == 40
    assert "verdict" in doc["columns"]
    assert doc["meta"]["precision_flag"] in ("trusted", "suspect")


def test_infinite_writes_branch_files(tmp_path):
    out = tmp_path / "curve.csv"
    assert main(["infinite", "--m", "1.5", "--t1", "i", "--t2", "2", "--d1", "3", "--d2", "3", "--n-alpha", "32", "--out", str(out)]) == EXIT_OK
    for name in ("physical", "pair_dominant", "pair_subdominant"):
        text = (tmp_path / f"curve.{name}.csv").read_text()
        rows, cols = _rows(text)
        assert cols == ["alpha", "re_lambda", "im_lambda", "branch", "abs_kappa", "abs_s"]
        assert all(r[3] == name for r in rows)
    assert len(_rows((tmp_path / "curve.physical.csv").read_text())[0]) > 0


def test_zero_mode_with_state(tmp_path):
    out = tmp_path / "zm.json"
    assert main(["zero-mode", "--m", "0", "--t1", "1", "--t2", "1", "--d1", "0.5", "--d2", "0.5", "--state", "10", "--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["verdict"]["exists"] is True
    rows, _ = _rows((tmp_path / "zm.state.csv").read_text())
    psi = np.array([complex(float(r[1]), float(r[2])) for r in rows])
    assert psi.size == 20 and np.linalg.norm(psi) == pytest.approx(1)


def test_skin_summary(tmp_path):
    out = tmp_path / "skin.csv"
    assert main(["skin", *MIXED_FLAGS, "--n-k", "40", "--out", str(out)]) == EXIT_OK
    rows, _ = _rows(out.read_text())
    assert len(rows) == 80
    summary = json.loads((tmp_path / "skin.summary.json").read_text())["summary"]
    assert summary["n_inconsistent"] == 0
    assert summary["n_skin"] + summary["n_no_skin"] + summary["n_special"] == 80
    assert summary["conditions"][0]["label"] == "real_d1d2_negative"
    for r in rows:
        if r[4] == "false":
            assert abs(float(r[1])) < 1e-9


def test_bistritz_command(capsys):
    assert main(["bistritz", "--coeffs", "0.5,0,0.5"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert (doc["inside"], doc["on"], doc["outside"]) == (0, 2, 0)
    assert main(["bistritz", "--coeffs", "-2,1"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["outside"] == 1


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "nhkitaev", "bistritz", "--coeffs", "0,0,1"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["inside"] == 2
    assert not math.isnan(json.loads(res.stdout)["n"])
