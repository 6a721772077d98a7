import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dtut.errors import GroupMismatchError, OutOfRangeError, ResourceError, UsageError
from dtut.groups import (CACHE_ENV, FreeGroup2, HeisenbergGroup, LamplighterGroup, ZnGroup,
                         enumerate_ball, heisenberg_table, make_group, visiting_path_bruteforce,
                         visiting_path_length)

from oracles import f2_ball, h3_ball, lamplighter_ball, visiting_bruteforce

L = LamplighterGroup()
H = HeisenbergGroup()
F = FreeGroup2()
Z1, Z2 = ZnGroup(1), ZnGroup(2)

# frozen from the BFS oracle in oracles.py (independent multiplication rule)
LAMPLIGHTER_BALL_SIZES = {6: 1125, 8: 7537, 10: 47881}


@pytest.fixture(scope="module")
def lamp_ball10():
    return lamplighter_ball(10)


# products and inverses

def test_h3_product_normal_form():
    assert H.multiply((1, 0, 0), (0, 1, 0)) == (1, 1, 0)


def test_h3_commutator_is_c():
    a, b = (1, 0, 0), (0, 1, 0)
    g = H.multiply(H.multiply(a, b), H.multiply(H.invert(a), H.invert(b)))
    assert g == (0, 0, 1)


def test_lamplighter_product_keeps_left_lamps():
    x = L.multiply(L.element({0: 1}, 0), L.element({}, 3))
    assert x == L.element({0: 1}, 3)


def test_inverses():
    assert L.invert(L.element({2: 5}, 3)) == L.element({-1: -5}, -3)
    assert H.invert((1, 1, 0)) == (-1, -1, -1)
    assert F.invert("aB") == "bA"


@pytest.mark.parametrize("group", [Z1, Z2, H, F, L])
def test_identity_has_length_zero(group):
    assert group.word_length(group.identity) == 0


def test_mismatched_elements_rejected():
    with pytest.raises(GroupMismatchError):
        Z1.multiply((1,), "a")
    with pytest.raises(GroupMismatchError):
        F.word_length("ax")
    with pytest.raises(UsageError):
        H.multiply((1, 0), (0, 1, 0))


@given(st.tuples(*[st.integers(-5, 5)] * 3), st.tuples(*[st.integers(-5, 5)] * 3),
       st.tuples(*[st.integers(-5, 5)] * 3))
def test_h3_associative(a, b, c):
    assert H.multiply(H.multiply(a, b), c) == H.multiply(a, H.multiply(b, c))
    assert H.multiply(a, H.invert(a)) == H.identity


lamp_elems = st.builds(lambda d, p: L.element(d, p),
                       st.dictionaries(st.integers(-4, 4), st.integers(-3, 3).filter(bool), max_size=4),
                       st.integers(-4, 4))


@given(lamp_elems, lamp_elems, lamp_elems)
def test_lamplighter_group_laws(a, b, c):
    assert L.multiply(L.multiply(a, b), c) == L.multiply(a, L.multiply(b, c))
    assert L.multiply(a, L.invert(a)) == L.identity
    assert L.distance(a, b) == L.distance(b, a)


# word lengths

def test_lamplighter_spec_element_has_length_eight():
    g = L.decode({"lamps": {"-1": 1, "2": 1}, "pos": 0})
    assert L.word_length(g) == 8


def test_h3_c_is_a_generator():
    # c belongs to the generating set, so BFS gives 1
    assert H.word_length((0, 0, 1)) == 1
    assert h3_ball(1)[(0, 0, 1)] == 1


def test_h3_lengths_match_bfs_oracle():
    ref = h3_ball(7)
    coords = list(ref)
    got = H.pairwise([H.identity], coords)[0]
    assert got.tolist() == [ref[c] for c in coords]


def test_h3_outside_table_names_radius():
    with pytest.raises(OutOfRangeError) as err:
        H.word_length((0, 0, 10 ** 6))
    assert err.value.required_radius >= 2000


def test_f2_lengths_and_distances():
    assert F.word_length("aaB") == 3
    assert F.distance("a", "b") == 2
    assert F.distance("a", "ab") == 1


def test_zn_weighted_length():
    assert ZnGroup(2, [1, 3]).word_length((1, -1)) == 4
    assert Z2.distance((0, 0), (2, 2)) == 4


def test_lamplighter_lengths_match_bfs(lamp_ball10):
    elems = list(lamp_ball10)
    got = L.pairwise([L.identity], elems)[0]
    assert np.array_equal(got, [lamp_ball10[g] for g in elems])


def test_lamplighter_pairwise_matches_scalar():
    rng = np.random.default_rng(3)
    pts = [L.element({int(i): int(v) for i, v in zip(rng.integers(-5, 6, 3), rng.integers(-2, 3, 3)) if v},
                     int(rng.integers(-5, 6))) for _ in range(40)]
    mat = L.pairwise(pts, pts)
    for i, j in itertools.product(range(0, 40, 7), range(0, 40, 5)):
        assert mat[i, j] == L.distance(pts[i], pts[j])


# visiting path

@pytest.mark.parametrize("support,end,want", [([], 5, 5), ([-1, 2], 0, 6), ([3], 3, 3)])
def test_visiting_path_examples(support, end, want):
    assert visiting_path_length(support, end) == want


@given(st.lists(st.integers(-6, 6), max_size=4, unique=True), st.integers(-6, 6))
def test_two_sweep_matches_permutations(support, end):
    assert visiting_path_length(support, end) == visiting_bruteforce(support, end)
    assert visiting_path_bruteforce(support, end) == visiting_bruteforce(support, end)


# balls

def test_small_balls():
    assert sorted(enumerate_ball("zn", 2)) == [(-2,), (-1,), (0,), (1,), (2,)]
    assert len(enumerate_ball("f2", 3)) == 1 + 4 + 4 * 3 + 4 * 9
    assert len(enumerate_ball("h3", 1)) == 7


@pytest.mark.parametrize("radius", [2, 5, 8])
def test_f2_ball_matches_oracle(radius):
    assert enumerate_ball(F, radius) == f2_ball(radius)


def test_h3_ball_matches_oracle():
    assert enumerate_ball(H, 6) == h3_ball(6)


def test_zn_ball_count():
    for r in range(6):
        assert len(enumerate_ball(Z2, r)) == 2 * r * r + 2 * r + 1


@pytest.mark.parametrize("radius", [6, 8])
def test_lamplighter_ball_sizes(radius):
    ball = enumerate_ball(L, radius)
    assert len(ball) == LAMPLIGHTER_BALL_SIZES[radius]
    assert ball == lamplighter_ball(radius)


def test_lamplighter_ball_radius_ten(lamp_ball10):
    assert len(lamp_ball10) == LAMPLIGHTER_BALL_SIZES[10]
    assert enumerate_ball(L, 10) == lamp_ball10


def test_ball_cap_raises_with_estimate():
    with pytest.raises(ResourceError) as err:
        enumerate_ball(F, 30, cap=1000)
    assert err.value.estimate > err.value.cap == 1000


# encodings

@pytest.mark.parametrize("group,elem,text", [
    (Z2, (3, -1), "3,-1"),
    (H, (1, 2, -3), "1,2,-3"),
    (F, "aB", "aB"),
])
def test_text_encoding(group, elem, text):
    assert str(group.encode(elem)) == text
    assert group.decode(text) == elem


def test_lamplighter_encoding_round_trip():
    g = L.element({-1: 1, 2: 1}, 0)
    assert L.decode(L.encode(g)) == g
    assert L.encode(g) == {"lamps": {"-1": 1, "2": 1}, "pos": 0}


def test_make_group_tags():
    assert make_group("zwrz") == L
    assert make_group({"group": "zn", "n": 2}) == Z2
    with pytest.raises(UsageError):
        make_group("sl2")


def test_h3_table_disk_cache(tmp_path, monkeypatch):
    from dtut import groups
    monkeypatch.setenv(CACHE_ENV, str(tmp_path))
    monkeypatch.setattr(groups, "_H3_TABLES", {})
    tab = heisenberg_table(4)
    files = list(tmp_path.glob("*.npz"))
    assert len(files) == 1
    with np.load(files[0]) as data:
        assert int(data["version"]) == groups.TABLE_VERSION
    monkeypatch.setattr(groups, "_H3_TABLES", {})
    again = heisenberg_table(4)
    assert np.array_equal(tab.coords, again.coords)
