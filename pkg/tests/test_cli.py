import csv
import json

import pytest

from arithequi.cli import list_experiments, main


def _write(tmp_path, cfg):
    p = tmp_path / "config.json"
    p.write_text(json.dumps(cfg))
    return p


def test_list(capsys):
    table = dict(list_experiments())
    assert table["mertens_K"] == "Thm 3.1"
    assert table["relheight_Q"] == "Thm 1.5"
    ids = [k for k, _ in list_experiments()]
    assert len(ids) == len(set(ids))
    assert main(["--list"]) == 0
    assert "mertens_K" in capsys.readouterr().out


@pytest.mark.parametrize("cfg", [
    {"experiment": "nope", "s_schedule": [1]},
    {"experiment": "mertens_K", "s_schedule": [10]},          # missing D
    {"experiment": "mertens_rational", "s_schedule": []},
    {"experiment": "mertens_rational", "s_schedule": ["ten"]},
    {"experiment": "mertens_rational", "s_schedule": [10], "grid": [0]},
    [1, 2, 3],
])
def test_invalid_config_exits_2_without_output(tmp_path, cfg):
    out = tmp_path / "out"
    assert main(["--config", str(_write(tmp_path, cfg)), "--out", str(out)]) == 2
    assert not out.exists()


def test_unparsable_config(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["--config", str(p), "--out", str(tmp_path / "o")]) == 2


def test_mertens_K_run(tmp_path):
    cfg = {"experiment": "mertens_K", "params": {"D": -4}, "s_schedule": [50, 100, 200, 300],
           "tolerances": {"ratio": 0.05}}
    out = tmp_path / "out"
    assert main(["--config", str(_write(tmp_path, cfg)), "--out", str(out)]) == 0
    with open(out / "mertens_K.csv", newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["s"] for r in rows] == ["50", "100", "200", "300"]
    assert list(rows[0]) == ["experiment", "s", "count", "theory_constant", "theory_value", "ratio", "flags"]
    ratios = [float(r["ratio"]) for r in rows]
    assert abs(ratios[-1] - 1) < abs(ratios[0] - 1)
    report = json.loads((out / "mertens_K.json").read_text())
    assert report["config"] == cfg
    assert report["fit"]["beta_hat"] == pytest.approx(2, abs=0.1)


def test_tolerance_failure_exit_1(tmp_path):
    cfg = {"experiment": "mertens_rational", "s_schedule": [20], "tolerances": {"ratio": 1e-6}}
    assert main(["--config", str(_write(tmp_path, cfg)), "--out", str(tmp_path / "o")]) == 1


def test_trace_discrepancy_table(tmp_path):
    cfg = {"experiment": "traces_Q", "params": {"alpha": [1, -1], "window": [0, 10]},
           "s_schedule": [20], "grid": [5]}
    out = tmp_path / "out"
    main(["--config", str(_write(tmp_path, cfg)), "--out", str(out)])
    report = json.loads((out / "traces_Q.json").read_text())
    cells = report["rows"][0]["extra"]["cells"]
    assert len(cells) == 5
    assert {"window", "normalised_mass", "target", "deviation"} <= set(cells[0])


def test_saturation_incomplete_exit_3(tmp_path):
    cfg = {"experiment": "herm_bfs", "params": {"D": -4, "form": [1, [1, 0], -1]},
           "s_schedule": [8], "saturation_cap": 8}
    p = _write(tmp_path, cfg)
    assert main(["--config", str(p), "--out", str(tmp_path / "a")]) == 3
    assert main(["--config", str(p), "--out", str(tmp_path / "b"), "--allow-incomplete"]) == 0


def test_reruns_are_byte_identical_and_thread_independent(tmp_path):
    cfg = {"experiment": "orbit_Q", "params": {"alpha": [1, -1]}, "s_schedule": [50, 100, 150]}
    p = _write(tmp_path, cfg)
    main(["--config", str(p), "--out", str(tmp_path / "a")])
    main(["--config", str(p), "--out", str(tmp_path / "b"), "--threads", "2"])
    a = (tmp_path / "a" / "orbit_Q.csv").read_bytes()
    assert a == (tmp_path / "b" / "orbit_Q.csv").read_bytes()
    ja = json.loads((tmp_path / "a" / "orbit_Q.json").read_text())
    jb = json.loads((tmp_path / "b" / "orbit_Q.json").read_text())
    ja.pop("header"), jb.pop("header")
    assert ja == jb
