"""Compiled kernels over the level-ordered Cayley tree of F2.

A word of length L >= 1 with first letter f and subsequent choices c_2..c_L
(each in 0..2, indexing the three letters that do not cancel the previous one)
gets the in-level index ``f*3^(L-1) + sum c_j 3^(L-j)``; its global index adds
``2*3^(L-1) - 1``.  Prefixes are integer divisions by powers of 3.
"""
import numpy as np
from numba import njit

LETTERS = "aAbB"
CODE = {ch: i for i, ch in enumerate(LETTERS)}
# NEXT[p] lists the letters allowed after letter p, in increasing order
NEXT = [[c for c in range(4) if c != (p ^ 1)] for p in range(4)]
CHOICE = [{c: k for k, c in enumerate(NEXT[p])} for p in range(4)]


def level_offset(L: int) -> int:
    return 0 if L == 0 else 2 * 3 ** (L - 1) - 1


def level_size(L: int) -> int:
    return 1 if L == 0 else 4 * 3 ** (L - 1)


def ball_size(R: int) -> int:
    return level_offset(R + 1)


def word_to_index(word: str) -> int:
    if not word:
        return 0
    prev = CODE[word[0]]
    idx = prev
    for ch in word[1:]:
        c = CODE[ch]
        idx = idx * 3 + CHOICE[prev][c]
        prev = c
    return level_offset(len(word)) + idx


def level_of(g: int) -> int:
    L = 0
    while level_offset(L + 1) <= g:
        L += 1
    return L


def index_to_word(g: int) -> str:
    L = level_of(g)
    if L == 0:
        return ""
    idx = g - level_offset(L)
    choices = []
    for _ in range(L - 1):
        idx, c = divmod(idx, 3)
        choices.append(c)
    prev = idx
    out = [LETTERS[prev]]
    for c in reversed(choices):
        prev = NEXT[prev][c]
        out.append(LETTERS[prev])
    return "".join(out)


def tables(radius: int):
    p3 = np.array([3 ** k for k in range(radius + 2)], dtype=np.int64)
    off = np.array([level_offset(L) for L in range(radius + 2)], dtype=np.int64)
    return p3, off


@njit(cache=True)
def _lcp(L1, i1, L2, i2, p3):
    lo = 0
    hi = min(L1, L2)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if i1 // p3[L1 - mid] == i2 // p3[L2 - mid]:
            lo = mid
        else:
            hi = mid - 1
    return lo


@njit(cache=True)
def _level(g, off, radius):
    L = 0
    while L < radius and off[L + 1] <= g:
        L += 1
    return L


@njit(cache=True)
def tree_distance(g1, g2, p3, off, radius):
    L1 = _level(g1, off, radius)
    L2 = _level(g2, off, radius)
    i1 = g1 - off[L1]
    i2 = g2 - off[L2]
    return L1 + L2 - 2 * _lcp(L1, i1, L2, i2, p3)


@njit(cache=True)
def tree_min_cross(labels, radius, below, p3, off):
    """Minimum distance between points carrying different labels (-1 = none).

    Bottom-up over levels; each node keeps its shallowest labelled descendant
    and the shallowest one with a different label.  Stops early once a pair
    closer than ``below`` is found.  Returns (distance, p, q) or (-1, -1, -1).
    """
    best = 1 << 40
    bp = -1
    bq = -1
    if radius == 0:
        return -1, -1, -1
    cd1 = np.empty(0, np.int16)
    cl1 = np.empty(0, np.int32)
    cp1 = np.empty(0, np.int64)
    cd2 = np.empty(0, np.int16)
    cl2 = np.empty(0, np.int32)
    cp2 = np.empty(0, np.int64)
    dep = np.empty(9, np.int64)
    lab = np.empty(9, np.int64)
    pts = np.empty(9, np.int64)
    src = np.empty(9, np.int64)
    for L in range(radius - 1, -1, -1):
        nL = 1 if L == 0 else 4 * p3[L - 1]
        pd1 = np.full(nL, -1, np.int16)
        pl1 = np.full(nL, -1, np.int32)
        pp1 = np.full(nL, -1, np.int64)
        pd2 = np.full(nL, -1, np.int16)
        pl2 = np.full(nL, -1, np.int32)
        pp2 = np.full(nL, -1, np.int64)
        nch = 4 if L == 0 else 3
        for idx in range(nL):
            g = off[L] + idx
            cnt = 0
            if labels[g] >= 0:
                dep[cnt] = L
                lab[cnt] = labels[g]
                pts[cnt] = g
                src[cnt] = 0
                cnt += 1
            for c in range(nch):
                cidx = c if L == 0 else idx * 3 + c
                if L + 1 == radius:
                    cg = off[L + 1] + cidx
                    if labels[cg] >= 0:
                        dep[cnt] = L + 1
                        lab[cnt] = labels[cg]
                        pts[cnt] = cg
                        src[cnt] = c + 1
                        cnt += 1
                else:
                    if cd1[cidx] >= 0:
                        dep[cnt] = cd1[cidx]
                        lab[cnt] = cl1[cidx]
                        pts[cnt] = cp1[cidx]
                        src[cnt] = c + 1
                        cnt += 1
                    if cd2[cidx] >= 0:
                        dep[cnt] = cd2[cidx]
                        lab[cnt] = cl2[cidx]
                        pts[cnt] = cp2[cidx]
                        src[cnt] = c + 1
                        cnt += 1
            if cnt == 0:
                continue
            for a in range(cnt):
                for b in range(a + 1, cnt):
                    if src[a] != src[b] and lab[a] != lab[b]:
                        d = dep[a] + dep[b] - 2 * L
                        if d < best:
                            best = d
                            bp = pts[a]
                            bq = pts[b]
                            if best < below:
                                return best, bp, bq
            k1 = 0
            for a in range(1, cnt):
                if dep[a] < dep[k1]:
                    k1 = a
            k2 = -1
            for a in range(cnt):
                if lab[a] != lab[k1] and (k2 < 0 or dep[a] < dep[k2]):
                    k2 = a
            pd1[idx] = dep[k1]
            pl1[idx] = lab[k1]
            pp1[idx] = pts[k1]
            if k2 >= 0:
                pd2[idx] = dep[k2]
                pl2[idx] = lab[k2]
                pp2[idx] = pts[k2]
        cd1, cl1, cp1, cd2, cl2, cp2 = pd1, pl1, pp1, pd2, pl2, pp2
    if bp < 0:
        return -1, -1, -1
    return best, bp, bq


@njit(cache=True)
def tree_tile_diameters(labels, ntiles, radius, p3, off):
    """Exact per-label diameters by a double sweep (exact for tree metrics)."""
    rep = np.full(ntiles, -1, np.int64)
    for L in range(radius + 1):
        nL = 1 if L == 0 else 4 * p3[L - 1]
        for idx in range(nL):
            g = off[L] + idx
            t = labels[g]
            if t >= 0 and rep[t] < 0:
                rep[t] = g
    rl = np.zeros(ntiles, np.int64)
    ri = np.zeros(ntiles, np.int64)
    for t in range(ntiles):
        if rep[t] >= 0:
            rl[t] = _level(rep[t], off, radius)
            ri[t] = rep[t] - off[rl[t]]
    far = rep.copy()
    fard = np.zeros(ntiles, np.int64)
    for L in range(radius + 1):
        nL = 1 if L == 0 else 4 * p3[L - 1]
        for idx in range(nL):
            g = off[L] + idx
            t = labels[g]
            if t >= 0:
                d = L + rl[t] - 2 * _lcp(L, idx, rl[t], ri[t], p3)
                if d > fard[t]:
                    fard[t] = d
                    far[t] = g
    for t in range(ntiles):
        if far[t] >= 0:
            rl[t] = _level(far[t], off, radius)
            ri[t] = far[t] - off[rl[t]]
    diam = np.zeros(ntiles, np.int64)
    wit = far.copy()
    for L in range(radius + 1):
        nL = 1 if L == 0 else 4 * p3[L - 1]
        for idx in range(nL):
            g = off[L] + idx
            t = labels[g]
            if t >= 0:
                d = L + rl[t] - 2 * _lcp(L, idx, rl[t], ri[t], p3)
                if d > diam[t]:
                    diam[t] = d
                    wit[t] = g
    return diam, far, wit


@njit(cache=True)
def fill_prefix_labels(labels, lo, hi, t, base, p3, off):
    """Label levels lo..hi-1 by the in-level index of the length-t prefix, plus ``base``."""
    for L in range(lo, hi):
        nL = 1 if L == 0 else 4 * p3[L - 1]
        if t == 0:
            for idx in range(nL):
                labels[off[L] + idx] = base
        else:
            div = p3[L - t]
            for idx in range(nL):
                labels[off[L] + idx] = base + idx // div
