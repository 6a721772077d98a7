import itertools

import numpy as np
import pytest

from dtut.errors import UsageError
from dtut.families import covers, is_r_disjoint, tile_diameters, union_families
from dtut.schemes.free import FreeScheme, annulus_rule, class_threshold, f2_asdim_families
from dtut.windows import FreeBallWindow

from oracles import free_reduce


def oracle_dist(u, v):
    inv = "".join(c.swapcase() for c in reversed(u))
    return len(free_reduce(inv + v))


def brute_check(fam, r, bound):
    """Separation >= r and diameter <= bound, by the double loop over reduced words."""
    w = fam.window
    lab = fam.labels
    pts = np.flatnonzero(lab >= 0)
    words = [w.element(i) for i in pts]
    for (i, a), (j, b) in itertools.combinations(zip(pts, words), 2):
        d = oracle_dist(a, b)
        if lab[i] == lab[j]:
            assert d <= bound, (a, b, d)
        else:
            assert d >= r, (a, b, d)


def test_class_threshold_example():
    # m=3: second annulus is lengths [3, 6) keyed by prefixes of length 2
    rule = annulus_rule(3, 0, 2, ("A",))
    assert (rule.lo, rule.hi, rule.t) == (3, 6, 2)
    assert class_threshold(3, 0, 2) == 2


def test_shared_prefix_shares_class():
    w = FreeBallWindow(9)
    _, odd_shells = f2_asdim_families(3, w)
    lab = odd_shells.labels
    aba, abab, bab = (lab[w.index(x)] for x in ("aba", "abab", "bab"))
    assert aba == abab >= 0
    assert bab != aba


@pytest.mark.parametrize("m", [1, 2, 3])
def test_asdim_families_against_double_loop(m):
    w = FreeBallWindow(5)
    fams = f2_asdim_families(m, w)
    assert covers(fams, w)[0]
    for f in fams:
        brute_check(f, m, 3 * m)


def test_asdim_families_radius_14():
    w = FreeBallWindow(14)
    fams = f2_asdim_families(4, w)
    assert covers(fams, w)[0]
    for f in fams:
        assert is_r_disjoint(f, 4)[0]
        d, _, _ = tile_diameters(f)
        assert d.max() <= 12


@pytest.mark.parametrize("h", [1, 2])
def test_dtut_families_against_double_loop(h):
    s = FreeScheme(1, 2, h)
    w = FreeBallWindow(5)
    for l in range(1, h + 1):
        C, D = s.c_family(w, l), s.d_family(w, l)
        assert covers([C, D], w)[0]
        brute_check(C, 2, s.declared_bound())
        brute_check(D, 2, s.declared_bound())


def test_translated_shells_stay_disjoint():
    s = FreeScheme(2, 3, 2)
    w = FreeBallWindow(12)
    union = union_families([s.d_family(w, l) for l in (1, 2)], "D")
    assert union.overlap() is None
    assert is_r_disjoint(union, 3)[0]


def test_declared_bound_and_range():
    s = FreeScheme(2, 3, 2)
    assert s.declared_bound() == 36
    with pytest.raises(UsageError):
        s.d_family(FreeBallWindow(4), 3)


def test_window_limit():
    with pytest.raises(UsageError):
        FreeBallWindow(19)
