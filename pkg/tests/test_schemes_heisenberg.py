import numpy as np
import pytest

from dtut.errors import UsageError
from dtut.groups import HeisenbergGroup
from dtut.families import is_r_disjoint
from dtut.schemes.heisenberg import (HeisenbergScheme, heisenberg_dtut_families, heisenberg_lift,
                                       measure_base_bound)
from dtut.schemes.zn import ZnScheme
from dtut.windows import BoxWindow, make_window

H = HeisenbergGroup()


@pytest.fixture(scope="module")
def scheme():
    return HeisenbergScheme(1, 2, 3, {2: 1, 3: 1})


@pytest.fixture(scope="module")
def ball8():
    return make_window({"kind": "ball", "group": "h3", "radius": 8})


def test_lift_examples():
    assert heisenberg_lift([(2, 3)], 3) == [(2, 3, -6)]
    assert heisenberg_lift([(0, 0)], 17) == [(0, 0, 0)]


def test_lift_is_a_section_of_the_projection():
    # a^x b^y c^(-x*y_C) projects to (x, y)
    for (x, y), anchor in [((2, -1), 4), ((-3, 5), -2)]:
        g = H.multiply(H.multiply((x, 0, 0), (0, y, 0)), (0, 0, -x * anchor))
        assert g == heisenberg_lift([(x, y)], anchor)[0]


def test_measured_bound_is_below_closed_form(scheme):
    assert scheme.M == measure_base_bound(ZnScheme(2, 2, 3, 1)) == 10
    assert scheme.M_closed_form == ZnScheme(2, 2, 3, 1).declared_bound()
    assert scheme.M <= scheme.M_closed_form
    assert scheme.center.k0 == 10 * scheme.M ** 2


def test_declared_bound(scheme):
    assert scheme.declared_bound() == scheme.M ** 2 + 2 * scheme.M + scheme.N


def test_families_partition_window(scheme, ball8):
    lf = scheme.families((1, 1), ball8)
    count = sum(f.support().astype(int) for f in lf.all())
    assert (count == 1).all()
    assert len(lf.D[1]) == 2 and len(lf.D[2]) == 24


def test_small_window_gets_diagnostic(scheme, ball8):
    lf = scheme.families((1, 1), ball8)
    assert lf.diagnostics and lf.diagnostics[0]["kind"] == "window"
    assert all(f.clipped.all() for f in lf.all())


def test_invariants_hold(scheme, ball8):
    checks = scheme.invariant_checks(ball8)
    assert {c["id"] for c in checks} == {"anchor_within_bound", "lift_disjointness", "center_disjointness"}
    assert all(c["ok"] for c in checks)


def test_lift_keeps_base_separation(scheme):
    """Distances between lifted tiles are at least the base distances."""
    w = make_window({"kind": "ball", "group": "h3", "radius": 6})
    for c in scheme.invariant_checks(w):
        if c["id"] == "lift_disjointness" and "min_lifted" in c["params"]:
            assert c["params"]["min_lifted"] >= c["params"]["min_base"]
            assert c["params"]["min_lifted"] >= c["params"]["r"]


def test_given_M_shrinks_center(ball8):
    s = HeisenbergScheme(1, 2, 3, {2: 1, 3: 1}, M=1)
    assert s.M_source == "given" and s.center.k0 == 10
    lf = s.families((1, 1), ball8)
    # with short central tiles several of them meet the window
    assert len(lf.C[0]) > 1
    count = sum(f.support().astype(int) for f in lf.all())
    assert (count == 1).all()


def test_needs_h3_window(scheme):
    with pytest.raises(UsageError):
        scheme.families((1, 1), BoxWindow(2, -3, 3))


def test_scales_must_increase():
    with pytest.raises(UsageError):
        HeisenbergScheme(2, 2, 3, {2: 1, 3: 1})


def test_labeled_families(scheme, ball8):
    fams, diags = heisenberg_dtut_families(scheme, (1, 1), ball8)
    assert len(fams) == 1 + 2 + 8 + 16
    assert diags and diags[0]["kind"] == "window"
    assert is_r_disjoint(fams["C0"], 1)[0]
    for i in (0, 1):
        assert is_r_disjoint(fams[("D1", i)], 2)[0]
    for key, f in fams.items():
        if key[0] == "D2" and len(f) > 1:
            assert is_r_disjoint(f, 3)[0]
