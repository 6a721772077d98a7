import json
import re
import subprocess
import sys
from pathlib import Path

import pytest

from dtut.cli import EXIT_FAIL, EXIT_OK, EXIT_RESOURCE, EXIT_USAGE, main
from dtut.render import CORE_COLOR, SHELL_COLORS

DESC = Path(__file__).resolve().parents[1] / "demos" / "descriptors"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    lines = capsys.readouterr().out.strip().splitlines()
    return code, json.loads(lines[-1])


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def test_golden_verify(capsys, tmp_path):
    code, out = run(capsys, "verify", "--descriptor", DESC / "z1_golden.json", "--out", tmp_path)
    assert code == EXIT_OK and out["ok"] and out["failures"] == []
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["ok"] and all(c["status"] == "pass" for c in rep["clauses"])
    assert "wall_s" in json.loads((tmp_path / "timings.json").read_text())


def test_runs_are_byte_identical(capsys, tmp_path):
    for sub in ("a", "b"):
        main(["verify", "--descriptor", str(DESC / "z1_golden.json"), "--out", str(tmp_path / sub), "--jobs",
              "1" if sub == "a" else "4"])
    capsys.readouterr()
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_metric_lamplighter(capsys, tmp_path):
    code, out = run(capsys, "metric", "--group", "lamplighter", '{"lamps":{"-1":1,"2":1},"pos":0}',
                    "--out", tmp_path)
    assert code == EXIT_OK and out["lengths"] == [8]


def test_metric_distances(capsys, tmp_path):
    code, out = run(capsys, "metric", "--group", "f2", "ab", "aB", "--out", tmp_path)
    assert out["lengths"] == [2, 2]
    assert out["distances"] == [[0, 2], [2, 0]]


def test_tile_svg(capsys, tmp_path):
    code, out = run(capsys, "tile", "--descriptor", DESC / "z2_figure.json", "--out", tmp_path)
    assert code == EXIT_OK and out["svg"] == ["tiling_l1.svg"]
    svg = (tmp_path / "tiling_l1.svg").read_text()
    assert svg.startswith("<svg") and CORE_COLOR in svg
    assert all(c in svg for c in SHELL_COLORS.values())
    labels = re.findall(r">([^<>]+)</text>", svg)
    assert labels[:1] == ["core"] and len(labels) == 5


def test_dump_round_trip(capsys, tmp_path):
    d = DESC / "z1_golden.json"
    main(["verify", "--descriptor", str(d), "--out", str(tmp_path / "direct")])
    main(["tile", "--descriptor", str(d), "--out", str(tmp_path / "dump")])
    code = main(["verify", "--from-dump", str(tmp_path / "dump" / "manifest.json"),
                 "--out", str(tmp_path / "reloaded")])
    capsys.readouterr()
    assert code == EXIT_OK
    assert (tmp_path / "direct" / "report.json").read_bytes() == \
        (tmp_path / "reloaded" / "report.json").read_bytes()


def test_run_takes_command_from_descriptor(capsys, tmp_path):
    code, out = run(capsys, "run", "--descriptor", DESC / "z1_golden.json", "--out", tmp_path)
    assert code == EXIT_OK and out["command"] == "verify"


def test_mutation_in_descriptor_fails(capsys, tmp_path):
    desc = json.loads((DESC / "z1_golden.json").read_text())
    desc["mutation"] = "tile_merge"
    code, out = run(capsys, "verify", "--descriptor", write(tmp_path, "m.json", desc), "--out", tmp_path)
    assert code == EXIT_FAIL and not out["ok"]
    assert {f["id"] for f in out["failures"]} == {"bounded"}


def test_schema_error(capsys, tmp_path):
    bad = write(tmp_path, "bad.json", {"command": "verify", "scheme": {"scheme": "zn", "k0": 0, "k1": 2,
                                                                       "h_table": {"2": 1}}})
    code, out = run(capsys, "verify", "--descriptor", bad)
    assert code == EXIT_USAGE and out["error"]["type"] == "schema"


def test_unknown_scheme(capsys, tmp_path):
    bad = write(tmp_path, "bad.json", {"scheme": {"scheme": "sl2", "k0": 1, "k1": 2, "h_table": {"2": 1}}})
    code, out = run(capsys, "verify", "--descriptor", bad)
    assert code == EXIT_USAGE and "error" in out


def test_missing_file(capsys, tmp_path):
    code, out = run(capsys, "verify", "--descriptor", tmp_path / "nope.json")
    assert code == EXIT_USAGE and out["error"]["type"] == "io"


def test_ball_cap(capsys, tmp_path):
    desc = {"scheme": {"scheme": "h3", "k0": 1, "k1": 2, "k2": 3, "h_table": {"2": 1, "3": 1}},
            "window": {"radius": 10}}
    code, out = run(capsys, "verify", "--descriptor", write(tmp_path, "h.json", desc), "--cap-ball", 100,
                    "--out", tmp_path)
    assert code == EXIT_RESOURCE and out["error"]["type"] == "resource"
    assert out["error"]["estimate"] > out["error"]["cap"] == 100


def test_core_margin_diagnostic(capsys, tmp_path):
    desc = {"scheme": {"scheme": "zn", "n": 1, "k0": 2, "k1": 4, "h_table": {"4": 2}},
            "window": {"lo": -20, "hi": 20}}
    code, _ = run(capsys, "verify", "--descriptor", write(tmp_path, "s.json", desc), "--out", tmp_path)
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["diagnostics"][0]["kind"] == "core_margin"


def test_wreath_small(capsys, tmp_path):
    desc = write(tmp_path, "w.json", {"k0": 2, "k1": 3, "radius": 4})
    code, out = run(capsys, "wreath", "--descriptor", desc, "--out", tmp_path)
    assert code == EXIT_OK and out["ok"]
    body = json.loads((tmp_path / "wreath_report.json").read_text())
    assert body["cascade"]["ok"] and all(b["ok"] for b in body["lemma33"])


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dtut", "metric", "--group", "zn", "3,-4", "--out",
                           str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["lengths"] == [7]


def test_metric_group_as_json(capsys):
    code, out = run(capsys, "metric", "--group", '{"group": "zn", "n": 2}', "1,1", "0,-2", "--out", "")
    assert out["distances"] == [[0, 4], [4, 0]]


def test_bad_element(capsys):
    code, out = run(capsys, "metric", "--group", "zn", "[3", "--out", "")
    assert code == EXIT_USAGE and out["error"]["type"] == "usage"


@pytest.mark.parametrize("path", sorted(DESC.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_descriptors_validate(path):
    from dtut.cli import load_descriptor, validate
    validate(load_descriptor(path))


@pytest.mark.parametrize("script", ["plane_tiling", "verify_walkthrough", "fault_injection"])
def test_demo_scripts_run(script, tmp_path):
    demo = DESC.parent / f"{script}.py"
    proc = subprocess.run([sys.executable, str(demo), str(tmp_path)], capture_output=True, text=True,
                          timeout=300)
    assert proc.returncode == 0, proc.stderr


def test_run_function(capsys, tmp_path):
    from dtut.cli import run as run_desc
    desc = json.loads((DESC / "z1_golden.json").read_text())
    assert run_desc(desc, out=tmp_path) == EXIT_OK
    assert json.loads((tmp_path / "report.json").read_text())["ok"]
    assert run_desc({"command": "verify", "scheme": {"scheme": "zn"}}, out=tmp_path) == EXIT_USAGE
    err = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert err["error"]["type"] == "schema"
