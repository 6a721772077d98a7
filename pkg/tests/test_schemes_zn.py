import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dtut.errors import UsageError
from dtut.families import covers, is_r_disjoint, min_separation, tile_diameters, union_families
from dtut.schemes.zn import (ZnScheme, psi, shell_index, shell_of_index, zn_core_family,
                             zn_shell_family)
from dtut.windows import BoxWindow

from oracles import diam, l1


def tiles_1d(fam):
    return sorted(sorted(p[0] for p in t.points) for t in fam.tiles())


def test_core_intervals_on_line():
    w = BoxWindow(1, -20, 20)
    got = tiles_1d(zn_core_family(1, 1, 2, 1, 1, w))
    # {6i+2, 6i+3} clipped to the window; i=3 keeps only 20
    want = [[6 * i + 2, 6 * i + 3] for i in range(-3, 3)] + [[20]]
    assert got == want


def test_core_intervals_disjointness():
    w = BoxWindow(1, -40, 40)
    C = zn_core_family(1, 1, 2, 1, 1, w)
    assert is_r_disjoint(C, 4)[0]
    assert min_separation(C)[0] == 5


@pytest.mark.parametrize("z,start", [(0, 0), (1, 4)])
def test_shell_intervals_on_line(z, start):
    w = BoxWindow(1, -18, 17)
    got = tiles_1d(zn_shell_family(1, 1, 2, 1, 1, 1, 1, z, w))
    assert got == [[6 * i + start, 6 * i + start + 1] for i in range(-3, 3)]


def test_plane_core_tiles_are_squares():
    w = BoxWindow(2, -12, 12)
    C = zn_core_family(2, 1, 2, 1, 1, w)
    d, _, _ = tile_diameters(C)
    full = ~C.clipped
    assert full.any()
    assert set(d[full].tolist()) == {2}
    assert all(len(C.members(t)) == 4 for t in np.flatnonzero(full))


def test_psi_and_shell_indices():
    assert psi(1, 3) == (0, 0)
    assert psi(4, 3) == (1, 1)
    for n in (1, 2, 3):
        for s in range(2 ** (n - 1) * n * 2):
            assert shell_index(*shell_of_index(s, n), n) == s
    with pytest.raises(UsageError):
        shell_index(3, 1, 0, 2)
    with pytest.raises(UsageError):
        ZnScheme(2, 1, 2, 1).offset(2)


def test_shell_count_and_bound():
    s = ZnScheme(2, 2, 6, 2)
    assert s.F == (7,)
    assert s.declared_bound() == 2 * (2 * 3 * 2 + 1) * 6


def test_locate_agrees_with_families():
    s = ZnScheme(2, 1, 3, 2)
    w = BoxWindow(2, -10, 10)
    for l in (1, 2):
        lf = s.families((l,), w)
        C = lf.C[0]
        for i in range(0, w.size, 7):
            kind, *rest = s.locate(w.element(i), l)
            if kind == "C":
                assert C.support()[i]
                assert C.ids[C.labels[i]] == rest[0]
            else:
                D = lf.D[1][rest[0]]
                assert D.support()[i]
                assert D.ids[D.labels[i]] == rest[1]


def test_locate_handles_huge_coordinates():
    s = ZnScheme(1, 1, 2, 1)
    x = 6 * 10 ** 40 + 2
    assert s.locate((x,), 1) == ("C", (1, 10 ** 40))


@settings(max_examples=25)
@given(st.integers(1, 3), st.integers(2, 4), st.integers(1, 3), st.data())
def test_exclusive_families_partition_and_separate(n, k1, h, data):
    s = ZnScheme(n, 1, k1, h)
    l = data.draw(st.integers(1, h))
    half = {1: 40, 2: 14, 3: 6}[n]
    w = BoxWindow(n, -half, half)
    lf = s.families((l,), w)
    count = sum(f.support().astype(int) for f in lf.all())
    assert (count == 1).all()
    assert is_r_disjoint(lf.C[0], 2 * k1)[0]
    for D in lf.D[1]:
        if len(D) > 1:
            assert is_r_disjoint(D, k1)[0]


@settings(max_examples=15)
@given(st.integers(1, 2), st.integers(2, 3), st.integers(1, 3), st.data())
def test_shell_unions_over_translations(n, k1, h, data):
    s = ZnScheme(n, 1, k1, h)
    w = BoxWindow(n, -30 if n == 1 else -12, 30 if n == 1 else 12)
    idx = data.draw(st.integers(0, s.F[0]))
    fams = [s.families((l,), w).D[1][idx] for l in range(1, h + 1)]
    assert is_r_disjoint(union_families(fams, "u"), k1)[0]


def test_complete_tiles_within_bound():
    s = ZnScheme(2, 2, 6, 2)
    w = BoxWindow(2, -80, 80)
    for l in (1, 2):
        for f in s.families((l,), w).all():
            d, _, _ = tile_diameters(f)
            assert d.max() <= s.declared_bound()


def test_literal_strips_cover_and_separate():
    s = ZnScheme(2, 1, 2, 1, literal=True)
    w = BoxWindow(2, -12, 12)
    lf = s.families((1,), w)
    assert covers(lf.all(), w)[0]
    for D in lf.D[1]:
        assert is_r_disjoint(D, 2)[0]


def test_small_tiles_against_double_loop():
    s = ZnScheme(2, 1, 2, 1)
    w = BoxWindow(2, -7, 7)
    for f in s.families((1,), w).all():
        d, _, _ = tile_diameters(f)
        for t in range(len(f)):
            pts = [w.element(i) for i in f.members(t)]
            assert d[t] == diam(pts, l1)


def test_needs_matching_window():
    with pytest.raises(UsageError):
        ZnScheme(2, 1, 2, 1).families((1,), BoxWindow(1, -5, 5))
