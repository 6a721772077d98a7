"""Deliberately broken schemes, used to show the verifier catches real violations.

Each mutation wraps a correct scheme and edits its families; every one is
seeded so the edited tile or family is reproducible.
"""
from __future__ import annotations

import numpy as np

from .errors import UsageError
from .families import Family
from .schemes.base import Scheme
from .schemes.heisenberg import HeisenbergScheme

MUTATIONS = ("tile_translation", "tile_merge", "dropped_family", "shrunk_scale", "corrupted_anchor")


class _Wrapped(Scheme):
    def __init__(self, inner, seed=0):
        self.inner = inner
        self.seed = int(seed)
        self.m, self.n, self.F = inner.m, inner.n, inner.F
        self.scales, self.h_table = inner.scales, inner.h_table
        self.name = f"{inner.name}+{self.mutation}"

    def describe(self):
        return {"scheme": self.name, "inner": self.inner.describe(), "mutation": self.mutation,
                "seed": self.seed}

    def declared_bound(self):
        return self.inner.declared_bound()

    def with_h_table(self, h_table):
        return type(self)(self.inner.with_h_table(h_table), self.seed)

    def invariant_checks(self, window):
        return self.inner.invariant_checks(window)


def shift_family(fam: Family, delta: int, axis: int = 0, label=None) -> Family:
    """Translate every tile of a box-window family by ``delta`` along ``axis`` (clipping at the edge)."""
    w = fam.window
    grid = fam.labels.reshape(w.shape)
    out = np.full_like(grid, -1)
    src = [slice(None)] * grid.ndim
    dst = [slice(None)] * grid.ndim
    if delta >= 0:
        src[axis], dst[axis] = slice(0, grid.shape[axis] - delta), slice(delta, None)
    else:
        src[axis], dst[axis] = slice(-delta, None), slice(0, grid.shape[axis] + delta)
    out[tuple(dst)] = grid[tuple(src)]
    return Family.from_labels(w, label or fam.label, out.reshape(-1), fam.ids, fam.clipped)


class TileTranslation(_Wrapped):
    """Along the first translation coordinate, the last translate of a D family is
    replaced by the first one moved by one step."""

    mutation = "tile_translation"

    def families(self, lvec, window):
        lf = self.inner.families(lvec, window)
        h = self.h_values()[0]
        if lvec[0] != h or h < 2:
            return lf
        first = self.inner.families((1,) + tuple(lvec[1:]), window)
        rng = np.random.default_rng(self.seed)
        i = min(lf.D)
        s = int(rng.integers(len(lf.D[i])))
        D = list(lf.D[i])
        D[s] = shift_family(first.D[i][s], 1, label=lf.D[i][s].label)
        lf.D[i] = D
        lf.diagnostics.append({"kind": "mutation", "family": ["D", i, s]})
        return lf


class TileMerge(_Wrapped):
    """Two tiles of a C family at least two periods apart become one tile."""

    mutation = "tile_merge"

    def families(self, lvec, window):
        lf = self.inner.families(lvec, window)
        C = lf.C[0]
        if len(C) < 2:
            return lf
        lab = C.labels.copy()
        first = np.full(len(C), -1, dtype=np.int64)
        pts = np.flatnonzero(lab >= 0)
        first[lab[pts][::-1]] = pts[::-1]
        rng = np.random.default_rng(self.seed)
        a = int(rng.integers(len(C)))
        dists = np.array([window.distance(first[a], first[b]) for b in range(len(C))])
        b = int(np.argmax(dists))
        lab[lab == b] = a
        merged = Family.from_labels(window, C.label, lab, C.ids, C.clipped)
        lf.C = [merged] + lf.C[1:]
        lf.extra = [(n, merged if f is C else f, r) for n, f, r in lf.extra]
        lf.diagnostics.append({"kind": "mutation", "merged": [C.ids[a], C.ids[b]]})
        return lf


class DroppedFamily(_Wrapped):
    """One D family is left out."""

    mutation = "dropped_family"

    def families(self, lvec, window):
        lf = self.inner.families(lvec, window)
        rng = np.random.default_rng(self.seed)
        i = min(lf.D)
        s = int(rng.integers(len(lf.D[i])))
        empty = Family.from_labels(window, lf.D[i][s].label, np.full(window.size, -1, np.int32), [])
        lf.D[i] = lf.D[i][:s] + [empty] + lf.D[i][s + 1:]
        lf.diagnostics.append({"kind": "mutation", "dropped": ["D", i, s]})
        return lf


class ShrunkScale(_Wrapped):
    """Families built at a smaller top scale while the instance still claims the original.

    The schemes have one unit of slack (translated strips end up exactly
    ``k' + 1`` apart), so the default shrink is 2.
    """

    mutation = "shrunk_scale"

    def __init__(self, inner, seed=0, delta: int = 2):
        super().__init__(inner, seed)
        top = inner.scales[-1] - int(delta)
        table = {top if k == inner.scales[-1] else k: v for k, v in inner.h_table.items()}
        try:
            self.built = _rebuild_with_top(inner, top, table)
        except TypeError as exc:
            raise UsageError(f"cannot shrink the scale of {inner.name}") from exc

    def families(self, lvec, window):
        return self.built.families(lvec, window)


def _rebuild_with_top(inner, top, table):
    from .schemes.free import FreeScheme
    from .schemes.zn import ZnScheme
    if top < 2:
        raise UsageError("scale too small to shrink")
    below = min(inner.scales[-2], top - 1)
    if isinstance(inner, ZnScheme):
        return ZnScheme(inner.dim, below, top, table[top], inner.literal)
    if isinstance(inner, FreeScheme):
        return FreeScheme(below, top, table[top])
    if isinstance(inner, HeisenbergScheme):
        k0 = min(inner.k0, below - 1)
        if k0 < 1:
            raise UsageError("scales too close to shrink")
        return HeisenbergScheme(k0, below, top, {below: inner.h_table[inner.k1], top: table[top]})
    raise TypeError(type(inner).__name__)


class CorruptedAnchor(_Wrapped):
    """Heisenberg anchors moved by one period of the central tiling."""

    mutation = "corrupted_anchor"

    def __init__(self, inner, seed=0):
        if not isinstance(inner, HeisenbergScheme):
            raise UsageError("anchor corruption applies to the Heisenberg scheme")
        super().__init__(inner, seed)
        self.corrupt = HeisenbergScheme(inner.k0, inner.k1, inner.k2, inner.h_table, M=inner.M)
        period = inner.center.S
        good = inner.anchors
        self.corrupt.anchors = lambda xy, l2: good(xy, l2) + period

    def families(self, lvec, window):
        return self.corrupt.families(lvec, window)

    def invariant_checks(self, window):
        return []


MUTATORS = {c.mutation: c for c in (TileTranslation, TileMerge, DroppedFamily, ShrunkScale, CorruptedAnchor)}


def mutate(scheme, mutation: str, seed: int = 0) -> Scheme:
    if mutation not in MUTATORS:
        raise UsageError(f"unknown mutation {mutation!r}; choose from {', '.join(MUTATIONS)}")
    return MUTATORS[mutation](scheme, seed)


def recheck_witness(clause: dict, scheme, window) -> bool:
    """Independently confirm that a failing clause's witness violates the clause.

    Families are rebuilt from ``scheme`` for the translation vectors named in
    the clause; distances are recomputed from the group, not the window.
    """
    w = clause.get("witness") or {}
    g = window.group
    p = clause["params"]
    cid = clause["id"]
    if cid in ("a", "b", "e", "extra"):
        x, y = (g.decode(e) for e in w["points"])
        d = g.distance(x, y)
        return d == w["distance"] and d < p["r"] and w["tiles"][0] != w["tiles"][1]
    if cid == "bounded":
        x, y = (g.decode(e) for e in w["points"])
        return g.distance(x, y) == w["distance"] > p["bound"]
    if cid == "c":
        fams = scheme.families(tuple(p["lvec"]), window).all()
        for e in w["uncovered"]:
            i = window.index(g.decode(e))
            if i < 0 or not window.core_mask[i] or any(f.support()[i] for f in fams):
                return False
        return bool(w["uncovered"])
    if cid == "d":
        i, s = p["i"], p["s"]
        base = p["fixed"]
        hit = []
        for t in w["translates"]:
            v = tuple(t if c is None else c for c in base)
            fam = scheme.families(v, window).D[i][s]
            hit.append(bool(fam.support()[window.index(g.decode(w["point"]))]))
        return all(hit)
    return False


def standard_instance(mutation: str, seed: int = 0):
    """(mutated scheme, window, lvecs) on which each mutation is expected to be caught.

    Z^2 at scales (2, 6) with h=2 for the first four, H3 at (1, 2, 3) for
    anchor corruption.
    """
    from .schemes.zn import ZnScheme
    from .windows import BoxWindow, make_window
    if mutation == "corrupted_anchor":
        inner = HeisenbergScheme(1, 2, 3, {2: 1, 3: 1})
        window = make_window({"kind": "ball", "group": "h3", "radius": 8})
    else:
        inner = ZnScheme(2, 2, 6, 2)
        window = BoxWindow(2, -100, 100, core_margin=inner.declared_bound() // 2)
    return mutate(inner, mutation, seed), window, None
