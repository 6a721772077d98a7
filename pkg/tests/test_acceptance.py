"""Acceptance criteria, one test each.

Every test is marked ``criterion(n, title, limit_s)``; conftest prints a
PASS/FAIL line per criterion with its wall time at the end of the session.
Runtime limits are asserted as well.
"""
import itertools
import time

import numpy as np
import pytest

from dtut.faults import MUTATIONS, recheck_witness, standard_instance
from dtut.families import covers, is_r_disjoint, tile_diameters, union_families
from dtut.groups import LamplighterGroup, visiting_path_length
from dtut.schemes import FreeScheme, HeisenbergScheme, ZnScheme
from dtut.schemes.free import f2_asdim_families
from dtut.verify import FAIL, DtutInstance, verify_dtut
from dtut.windows import BallWindow, BoxWindow, FreeBallWindow, make_window
from dtut.wreath import cascade_theorem34, lemma33_on_window

from oracles import lamplighter_ball, visiting_bruteforce
from sat_instances import check_saturated_union


class Clock:
    def __init__(self, limit):
        self.limit, self.t0 = limit, time.perf_counter()

    def check(self):
        took = time.perf_counter() - self.t0
        assert took <= self.limit, f"took {took:.1f}s, limit {self.limit}s"


def max_diameter(f):
    return int(tile_diameters(f)[0].max()) if len(f) else 0


@pytest.mark.criterion(1, "Z^2 DTUT on [-200,200]^2", 60)
def test_c1_z2_dtut():
    clock = Clock(60)
    s = ZnScheme(2, 2, 6, 2)
    bound = s.declared_bound()
    assert bound == 156  # 2^(n-1) (2(n+1)h + 1) k1 evaluated at n=2, h=2, k1=6
    w = BoxWindow(2, -200, 200, core_margin=bound)
    core = w.core_mask
    shells = {}
    for l in (1, 2):
        lf = s.families((l,), w)
        C = lf.C[0]
        assert is_r_disjoint(C, 12)[0]
        assert max_diameter(C) <= bound <= 300
        for i, D in enumerate(lf.D[1]):
            assert max_diameter(D) <= bound
            shells.setdefault(i, []).append(D)
        count = sum(f.support().astype(np.int64) for f in lf.all())
        assert (count[core] == 1).all()
        assert (count <= 1).all()
    assert len(shells) == s.F[0] + 1 == 8  # (u, v, z) with u in 1..2^(n-1), v in 1..n, z in 0..1
    for fams in shells.values():
        assert is_r_disjoint(union_families(fams, "D"), 6)[0]
    clock.check()


@pytest.mark.criterion(2, "F2 asdim-1 families, m=4, radius 14", 30)
def test_c2_f2_asdim():
    clock = Clock(30)
    w = FreeBallWindow(14, core_margin=12)
    fams = f2_asdim_families(4, w)
    assert len(fams) == 2
    for f in fams:
        assert is_r_disjoint(f, 4)[0]
        assert max_diameter(f) <= 12
    assert covers(fams, w)[0]
    clock.check()


@pytest.mark.criterion(3, "F2 (1,0)-DTUT, k0=2 k1=3 h=2, radius 16", 60)
def test_c3_f2_dtut():
    clock = Clock(60)
    s = FreeScheme(2, 3, 2)
    assert s.declared_bound() == 36
    # the bound exceeds the radius, so coverage is checked on the whole ball
    w = FreeBallWindow(16)
    Ds = []
    for l in (1, 2):
        C, D = s.c_family(w, l), s.d_family(w, l)
        assert covers([C, D], w)[0]
        for f in (C, D):
            assert is_r_disjoint(f, 3)[0]
            assert max_diameter(f) <= 36
        Ds.append(D)
    assert is_r_disjoint(union_families(Ds, "D"), 3)[0]
    clock.check()


@pytest.mark.criterion(4, "H3 (2,0)-DTUT on the BFS ball of radius 10", 300)
def test_c4_h3():
    clock = Clock(300)
    s = HeisenbergScheme(1, 2, 3, {2: 1, 3: 1})
    w = make_window({"kind": "ball", "group": "h3", "radius": 10})
    rep = verify_dtut(DtutInstance(s, w))
    assert rep.ok, rep.failures()
    lift = [c for c in s.invariant_checks(w) if c["id"] == "lift_disjointness"]
    assert lift and all(c["ok"] for c in lift)
    for c in lift:
        if "min_lifted" in c["params"]:
            assert c["params"]["min_lifted"] >= c["params"]["min_base"]
    clock.check()


@pytest.mark.criterion(5, "saturated union, 1000 seeded instances", 60)
def test_c5_saturated_union():
    clock = Clock(60)
    bad = {seed: msg for seed in range(1000) if (msg := check_saturated_union(seed))}
    assert not bad, dict(list(bad.items())[:5])
    clock.check()


@pytest.mark.criterion(6, "lamplighter metric: BFS ball 10 and permutation brute force", 120)
def test_c6_lamplighter_metric():
    clock = Clock(120)
    L = LamplighterGroup()
    oracle = lamplighter_ball(10)
    assert len(oracle) == 47881
    mine = L.enumerate_ball(10)
    assert mine == oracle
    assert all(L.word_length(g) == n for g, n in oracle.items())
    cells = range(-4, 5)
    checked = 0
    for k in range(5):
        for support in itertools.combinations(cells, k):
            for end in range(-6, 7):
                assert visiting_path_length(support, end) == visiting_bruteforce(support, end)
                checked += 1
    assert checked == 256 * 13
    clock.check()


@pytest.mark.criterion(7, "lamplighter block decomposition, k0=2 k1=3, radius 6", 300)
def test_c7_lemma33():
    clock = Clock(300)
    w = BallWindow(LamplighterGroup(), 6)
    blocks = lemma33_on_window(2, 3, w)
    covered = np.zeros(w.size, dtype=bool)
    for p, q, lf, rep in blocks:
        assert rep.ok, (p, q, rep.failures())
        names = {c["name"] for c in rep.clauses}
        assert {"U0_k0_disjoint", "U1_k1_disjoint", "covers_block_core", "B_literal"} <= names
        covered |= lf.in_block
    assert covered.all()
    clock.check()


@pytest.mark.criterion(8, "cascade with m=1, radius 6", 600)
def test_c8_cascade():
    clock = Clock(600)
    res = cascade_theorem34(2, 3, BallWindow(LamplighterGroup(), 6))
    assert res.counts["k0_families"] == 2
    assert res.counts["k1_families"] == 2 * res.J1
    rep = res.verify()
    assert rep.ok, rep.failures()
    clock.check()


@pytest.mark.criterion(9, "fault injection, five mutations", 300)
def test_c9_faults():
    clock = Clock(300)
    assert len(MUTATIONS) == 5
    for m in MUTATIONS:
        scheme, window, lvecs = standard_instance(m)
        assert verify_dtut(DtutInstance(scheme.inner, window, lvecs)).ok
        failed = verify_dtut(DtutInstance(scheme, window, lvecs)).failures()
        assert failed, m
        assert all(c["status"] == FAIL for c in failed)
        assert any(recheck_witness(c, scheme, window) for c in failed), m
    clock.check()
