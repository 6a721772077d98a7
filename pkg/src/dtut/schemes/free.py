"""Annulus classes in F2 and the families built from them.

An annulus rule keeps the words whose length lies in ``[lo, hi)`` and groups
them by their prefix of length ``t``; ``t = 0`` puts the whole annulus in one
class.  For thickness ``m``, offset ``p`` and shell index ``k`` the annulus is
``[(k-1)m + p, km + p)`` and ``t = ceil(p + m(k - 3/2))``.  When ``k = 1`` and
``p < m/2`` the annulus itself is a single class.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _freetree as ft
from ..errors import UsageError
from ..families import Family, LazyIds
from ..windows import FreeBallWindow
from .base import LFamilies, Scheme, check_scales


@dataclass(frozen=True)
class LevelRule:
    tag: tuple
    lo: int
    hi: int
    t: int

    @property
    def classes(self) -> int:
        return ft.level_size(self.t)


def class_threshold(m: int, p: int, k: int) -> int:
    """Prefix length keying the classes of the (m, p, k) annulus (0 = one class)."""
    if k < 1 or m < 1 or p < 0:
        raise UsageError(f"bad annulus parameters m={m}, p={p}, k={k}")
    if k == 1 and 2 * p < m:
        return 0
    num = 2 * p + m * (2 * k - 3)
    return max(0, -((-num) // 2))


def annulus_rule(m: int, p: int, k: int, tag) -> LevelRule:
    return LevelRule(tuple(tag), (k - 1) * m + p, k * m + p, class_threshold(m, p, k))


def _prefix_id(tag, i):
    t = tag[-1]
    word = ft.index_to_word(ft.level_offset(t) + i) if t else ""
    return tag[:-1] + (word,)


def family_from_rules(window: FreeBallWindow, label, rules) -> Family:
    """One tile per (rule, prefix class) meeting the window."""
    if not isinstance(window, FreeBallWindow):
        raise UsageError("annulus families need an F2 ball window")
    R = window.radius
    labels = np.full(window.size, -1, dtype=np.int32)
    segments, clipped = [], []
    base = 0
    for rule in rules:
        lo, hi = rule.lo, min(rule.hi, R + 1)
        if lo >= hi:
            continue
        if rule.t > lo:
            raise UsageError(f"prefix length {rule.t} exceeds the annulus start {lo}")
        ft.fill_prefix_labels(labels, lo, hi, rule.t, base, window.p3, window.off)
        n = rule.classes
        segments.append((rule.tag + (rule.t,), n, _prefix_id))
        clipped.append(np.full(n, rule.hi - 1 > R))
        base += n
    if base >= 2 ** 31 - 1:
        raise UsageError("too many tiles for 32-bit labels")
    clip = np.concatenate(clipped) if clipped else np.zeros(0, bool)
    return Family(window, label, LazyIds(segments), labels=labels, clipped=clip)


def _shells_up_to(m, p, R):
    """Shell indices k >= 1 whose annulus starts within radius R."""
    k = 1
    while (k - 1) * m + p <= R:
        yield k
        k += 1


def f2_asdim_families(m: int, window: FreeBallWindow):
    """Odd-shell and even-shell annulus classes of thickness m."""
    if m < 1:
        raise UsageError("m must be positive")
    odd, even = [], []
    for k in _shells_up_to(m, 0, window.radius):
        (odd if k % 2 else even).append(annulus_rule(m, 0, k, ("A", m, 0, k)))
    return (family_from_rules(window, ("F<0>", m), odd),
            family_from_rules(window, ("F<1>", m), even))


class FreeScheme(Scheme):
    """Translated annulus classes giving the (1,0) tiling of F2."""

    name = "f2"
    m = 1
    n = 0
    F = (0,)

    def __init__(self, k0: int, k1: int, h: int):
        self.scales, self.h_table = check_scales([k0, k1], {k1: h}, 1)
        self.k0, self.k1 = self.scales
        self.h = self.h_table[self.k1]

    def describe(self):
        return {"scheme": "f2", "k0": self.k0, "k1": self.k1, "h_table": {str(self.k1): self.h}}

    def with_h_table(self, h_table):
        return FreeScheme(self.k0, self.k1, h_table[self.k1])

    def declared_bound(self) -> int:
        return 3 * 2 * self.h * self.k1

    def _check_l(self, l):
        if not 1 <= l <= self.h:
            raise UsageError(f"translation index {l} outside 1..{self.h}")

    def d_rules(self, l: int, R: int):
        self._check_l(l)
        k1, h = self.k1, self.h
        out = []
        n = 1
        while True:
            k = 1 + (n - 1) * 2 * h + 2 * (l - 1)
            if (k - 1) * k1 > R:
                return out
            out.append(annulus_rule(k1, 0, k, ("D", l, n)))
            n += 1

    def c_rules(self, l: int, R: int, trimmed: bool = True):
        """Coarse annulus classes; ``trimmed`` drops the first k1 layers (where D lives)."""
        self._check_l(l)
        k1 = self.k1
        M, P = 2 * self.h * k1, 2 * (l - 1) * k1
        out = []
        if P > 0:
            out.append(LevelRule(("C", l, 0), 0, P, 0))
        for n in _shells_up_to(M, P, R):
            r = annulus_rule(M, P, n, ("C", l, n))
            if trimmed:
                r = LevelRule(r.tag, r.lo + k1, r.hi, r.t)
            out.append(r)
        return out

    def d_family(self, window, l) -> Family:
        return family_from_rules(window, ("D", l), self.d_rules(l, window.radius))

    def c_family(self, window, l) -> Family:
        return family_from_rules(window, ("C", l), self.c_rules(l, window.radius))

    def families(self, lvec, window) -> LFamilies:
        (l,) = lvec
        C = self.c_family(window, l)
        D = self.d_family(window, l)
        return LFamilies(C=[C], D={1: [D]}, extra=[("C_k1_disjoint", C, self.k1)])


def f2_dtut_families(k0, k1, h, l, window):
    s = FreeScheme(k0, k1, h)
    return s.c_family(window, l), s.d_family(window, l)
