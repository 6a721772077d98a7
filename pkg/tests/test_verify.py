import json

import numpy as np
import pytest

from dtut.errors import UsageError
from dtut.faults import TileTranslation, recheck_witness
from dtut.families import Family
from dtut.schemes import FreeScheme, HeisenbergScheme, ZnScheme
from dtut.verify import (FAIL, PASS, WINDOW, DtutInstance, default_lvec_sample, select_lvecs,
                         verify_dtut, verify_lemma31)
from dtut.windows import BoxWindow, FreeBallWindow, make_window


def statuses(rep):
    out = {}
    for c in rep.clauses:
        out.setdefault(c["id"], set()).add(c["status"])
    return out


@pytest.fixture(scope="module")
def z1_report():
    s = ZnScheme(1, 2, 4, 2)
    w = BoxWindow(1, -60, 60, core_margin=s.declared_bound())
    return verify_dtut(DtutInstance(s, w))


def test_z1_golden_all_pass(z1_report):
    assert z1_report.ok
    st = statuses(z1_report)
    assert set(st) == {"a", "b", "c", "d", "e", "bounded", "F_structural", "extra"}
    assert all(v == {PASS} for v in st.values())
    assert z1_report.instance["lvec_mode"] == "exhaustive"


def test_report_is_deterministic(z1_report):
    s = ZnScheme(1, 2, 4, 2)
    w = BoxWindow(1, -60, 60, core_margin=s.declared_bound())
    again = verify_dtut(DtutInstance(s, w, jobs=3))
    assert again.to_json() == z1_report.to_json()
    doc = json.loads(z1_report.to_json())
    assert doc["schema_version"] == 1 and doc["ok"] is True
    assert "timings" not in doc


def test_translated_shell_fails_d_with_shared_point():
    s = ZnScheme(1, 2, 4, 2)
    bad = TileTranslation(s)
    w = BoxWindow(1, -60, 60, core_margin=s.declared_bound())
    rep = verify_dtut(DtutInstance(bad, w))
    fails = [c for c in rep.failures() if c["id"] == "d"]
    assert fails
    wit = fails[0]["witness"]
    assert "point" in wit and len(wit["translates"]) == 2
    assert recheck_witness(fails[0], bad, w)


def test_f2_clauses():
    s = FreeScheme(2, 3, 2)
    rep = verify_dtut(DtutInstance(s, FreeBallWindow(12)))
    st = statuses(rep)
    for cid in ("a", "b", "c", "e", "bounded"):
        assert st[cid] == {PASS}
    assert st["d"] <= {PASS, WINDOW}


def test_h3_window_relative():
    s = HeisenbergScheme(1, 2, 3, {2: 1, 3: 1})
    w = make_window({"kind": "ball", "group": "h3", "radius": 6})
    rep = verify_dtut(DtutInstance(s, w))
    assert rep.ok
    assert WINDOW in statuses(rep)["d"]
    assert any(d["kind"] == "window" for d in rep.diagnostics)


def test_lvec_selection():
    s = ZnScheme(2, 1, 2, 3)
    sample, mode, lines, needed = select_lvecs(s)
    assert mode == "exhaustive" and sample == [(1,), (2,), (3,)]
    with pytest.raises(UsageError):
        select_lvecs(s, lvecs=[(4,)])
    h = HeisenbergScheme(1, 2, 3, {2: 3, 3: 2}, M=10)
    with pytest.raises(UsageError):
        select_lvecs(h, cap=4)
    sample = default_lvec_sample(h.h_values())
    assert sample == [(1, 1), (1, 2), (2, 1), (3, 1), (3, 2)]
    _, _, _, needed = select_lvecs(h, sample, cap=4)
    assert set(needed) == set(h.lvecs())


def test_lemma31_singletons():
    w = BoxWindow(1, -10, 10, core_margin=1)
    pts = [[(x,)] for x in range(-10, 11, 2)] + [[(x,)] for x in range(-9, 11, 2)]
    evens = Family.from_sets(w, "even", pts[:11])
    odds = Family.from_sets(w, "odd", pts[11:])
    rep = verify_lemma31([evens, odds], {}, [2], w)
    assert rep.ok
    holed = Family.from_sets(w, "odd", [p for p in pts[11:] if p != [(3,)]])
    rep = verify_lemma31([evens, holed], {}, [2], w)
    cov = [c for c in rep.clauses if c["id"] == "c"][0]
    assert cov["status"] == FAIL and cov["witness"]["uncovered"] == ["3"]


def test_lemma31_levels_are_checked():
    w = BoxWindow(1, -10, 10)
    near = Family.from_sets(w, "near", [[(0,)], [(2,)]])
    rep = verify_lemma31([near], {1: [near]}, [1, 3], w)
    assert [c["status"] for c in rep.clauses if c["id"] == "b"] == [FAIL]
    with pytest.raises(UsageError):
        verify_lemma31([near], {2: [near]}, [1, 3], w)


def test_structural_F_independent_of_h():
    s = ZnScheme(3, 1, 2, 1)
    rep = verify_dtut(DtutInstance(s, BoxWindow(3, -4, 4)))
    row = [c for c in rep.clauses if c["id"] == "F_structural"][0]
    assert row["status"] == PASS and row["params"]["F"] == [2 ** 2 * 3 * 2 - 1]


def test_bounded_clause_uses_declared_bound(z1_report):
    assert z1_report.diameters["declared_bound"] == 2 ** 0 * (2 * 2 * 2 + 1) * 4
    assert 0 < z1_report.diameters["max_overall"] <= z1_report.diameters["declared_bound"]
