import json
from fractions import Fraction

import pytest

from spacecurve.cli import RunManifest, main, strip_volatile

from conftest import FIXTURES


def fx(name):
    return str(FIXTURES / f"{name}.pol")


def run_json(capsys, *argv):
    code = main([*argv, "--json"])
    out = capsys.readouterr().out
    return code, (json.loads(out) if code == 0 else None)


def coeffs(terms):
    return [(e, Fraction(c[0], c[1])) for e, c in terms]


def test_prevariety_eq5(capsys):
    code, doc = run_json(capsys, "prevariety", fx("eq5"))
    assert code == 0
    assert sorted(map(tuple, doc["result"]["pretropisms"])) == [(1, 0, 0), (1, 0, 1), (2, 1, 1)]
    assert doc["manifest"]["command"] == "prevariety"


def test_prevariety_viviani_text(capsys):
    assert main(["prevariety", fx("viviani")]) == 0
    assert "pretropisms: (2,1,0)" in capsys.readouterr().out


def test_prevariety_classify(capsys):
    code, doc = run_json(capsys, "prevariety", fx("eq7n4"), "--classify", "2,1,1,1")
    assert code == 0
    assert "2,1,1,1" in doc["result"]["classification"]


def test_empty_file_is_parse_error(tmp_path, capsys):
    p = tmp_path / "empty.pol"
    p.write_text("")
    assert main(["prevariety", str(p)]) == 2
    assert "parse error" in capsys.readouterr().err


def test_garbage_is_parse_error(tmp_path):
    p = tmp_path / "bad.pol"
    p.write_text("x1 + + ;")
    assert main(["degree", str(p)]) == 2


def test_missing_file():
    assert main(["degree", "/nonexistent/file.pol"]) == 1


def test_series_viviani(capsys, frozen):
    code, doc = run_json(capsys, "series", fx("viviani"), "--ray", "2,1,0", "--order", "9", "--pin", "x1=2")
    assert code == 0
    br = doc["result"]["branches"]
    assert len(br) == 4
    first = br[0]["expansion"]
    assert coeffs(first["coords"][1]) == [(e, Fraction(c)) for e, c in frozen["viviani_series_x1_2"]["x2"]]
    assert br[0]["certificate"]["passed"]


def test_series_no_torus_solution(capsys):
    assert main(["series", fx("eq7n4"), "--ray", "1,1,1,1"]) == 4
    assert "endgame" in capsys.readouterr().err


def test_series_eq5_with_normalization(capsys, frozen):
    code, doc = run_json(capsys, "series", fx("eq5"), "--ray", "3,1,1", "--order", "6", "--pin", "x2=1")
    assert code == 0
    e = doc["result"]["branches"][0]["expansion"]
    assert coeffs(e["coords"][0]) == [(3, Fraction(-1, 2))]
    code, doc = run_json(capsys, "series", fx("eq5"), "--ray", "3,1,1", "--order", "6", "--pin", "x2=1",
                         "--normalize", "x1=108")
    e = doc["result"]["branches"][0]["expansion"]
    assert coeffs(e["coords"][0]) == [(3, Fraction(108))]
    printed = dict((k, Fraction(c)) for k, c in frozen["eq6_printed"]["x2"])
    got = dict(coeffs(e["coords"][1]))
    assert all(got[k] == -6 * printed[k] for k in printed)
    assert doc["result"]["branches"][0]["certificate"]["passed"]


def test_series_dimension_mismatch():
    assert main(["series", fx("viviani"), "--ray", "2,1"]) == 3
    assert main(["series", fx("viviani"), "--ray=-2,1,0"]) == 3


def test_bad_ray_argument():
    with pytest.raises(SystemExit) as exc:
        main(["series", fx("viviani"), "--ray", "a,b"])
    assert exc.value.code == 2


def test_endgame_eq4(capsys):
    code, doc = run_json(capsys, "endgame", fx("eq4"), "--seed", "7")
    assert code == 0
    res = doc["result"]
    assert res["path_count"] == 4
    groups = {tuple(g["tropism"]): g for g in res["groups"]}
    assert groups[(3, 1, 1)]["winding"] == 3
    assert groups[(3, 1, 1)]["multiplicity"] == 3
    assert res["degree_check"]["consistent"]
    assert doc["manifest"]["config"]["master_seed"] == 7


def test_endgame_eq7n6(capsys, frozen):
    code, doc = run_json(capsys, "endgame", fx("eq7n6"))
    assert code == 0
    res = doc["result"]
    assert res["path_count"] == 16
    groups = {tuple(g["tropism"]): g["multiplicity"] for g in res["groups"]}
    main_count, split = frozen["eq7_two_direction_split"]["counts"]["6"]
    assert groups[(2, 1, 1, 1, 1, 1)] == main_count
    assert groups.get((2, 1, 1, 1, 1, 2), 0) == split


def test_endgame_linear(capsys):
    code, doc = run_json(capsys, "endgame", fx("linear"))
    assert code == 0
    assert doc["result"]["path_count"] == 1
    assert doc["result"]["status_counts"] == {"converged": 1}


def test_endgame_all_inconclusive(capsys):
    # two samples per path cannot fix a winding number
    assert main(["endgame", fx("eq4"), "--max-steps", "1"]) == 5
    assert "inconclusive" in capsys.readouterr().err


def test_endgame_dimension(tmp_path):
    p = tmp_path / "one.pol"
    p.write_text("x1 + x2 + x3 - 1;")
    assert main(["endgame", str(p)]) == 3


def test_degree_and_mixedvol(capsys):
    code, doc = run_json(capsys, "degree", fx("eq4"))
    assert code == 0 and doc["result"]["degree_bound"] == 4
    assert doc["result"]["decomposition"]["total"] == 4
    assert main(["degree", fx("eq5")]) == 3
    assert main(["mixedvol", fx("eq4")]) == 3
    code, doc = run_json(capsys, "mixedvol", fx("eq5"))
    assert code == 0 and isinstance(doc["result"]["mixed_volume"], int)


def test_json_is_deterministic(capsys):
    docs = []
    for _ in range(2):
        code, doc = run_json(capsys, "endgame", fx("viviani"), "--seed", "3")
        docs.append(json.dumps(strip_volatile(doc), sort_keys=True))
    assert docs[0] == docs[1]


def test_out_and_certify_roundtrip(tmp_path, capsys):
    out = tmp_path / "series.json"
    assert main(["series", fx("viviani"), "--ray", "2,1,0", "--order", "9", "--pin", "x1=2",
                 "--json", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    doc = json.loads(out.read_text())
    assert len(doc["manifest"]["input_sha256"]) == 64
    code, cert = run_json(capsys, "certify", fx("viviani"), "--expansion", str(out), "--branch", "2")
    assert code == 0 and cert["result"]["passed"]
    code, cert = run_json(capsys, "certify", fx("eq2"), "--expansion", str(out))
    assert cert["result"]["passed"] is False


def test_sample_csv_with_manifest(tmp_path):
    out = tmp_path / "pts.csv"
    assert main(["sample", fx("viviani"), "--ray", "2,1,0", "--order", "9", "--pin", "x1=2",
                 "--count", "5", "--t-max", "0.5", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("t,x1_re,x1_im")
    assert len(lines) == 6
    man = json.loads((tmp_path / "pts.csv.manifest.json").read_text())
    assert man["command"] == "sample"


def test_manifest_strip():
    m = RunManifest("degree", "0" * 64, {"master_seed": 0}, "2026-01-01T00:00:00", 1.5)
    d = strip_volatile({"manifest": m.to_dict(), "result": {}})
    assert "timestamp" not in d["manifest"] and "wall_time" not in d["manifest"]
    assert d["manifest"]["version"]
