"""Tiles, families of tiles, and the metric predicates on them.

A ``Family`` lives on a window.  It is stored either as a per-point label
array (tiles are disjoint, the common case for the tiling schemes) or as a
list of member index arrays (tiles may overlap, e.g. after a saturated union
whose hypotheses fail).  Either view is derived from the other on demand.
"""
from __future__ import annotations

import json
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import UsageError


@dataclass(frozen=True)
class Tile:
    id: tuple
    points: frozenset
    clipped: bool = False

    def __len__(self):
        return len(self.points)


class MetricOracle:
    """Word-metric distance on group elements, with a vectorized pairwise form."""

    def __init__(self, group):
        self.group = group

    def __call__(self, x, y) -> int:
        return self.group._dist(x, y)

    def pairwise(self, xs, ys) -> np.ndarray:
        return self.group.pairwise(list(xs), list(ys))


def _as_id(v):
    if isinstance(v, list):
        return tuple(_as_id(x) for x in v)
    return v


class Family:
    def __init__(self, window, label, ids, labels=None, members=None, clipped=None, meta=None):
        if labels is None and members is None:
            raise UsageError("a family needs labels or members")
        self.window = window
        self.label = label
        if getattr(ids, "distinct", False):
            self.ids = ids
        else:
            self.ids = list(ids)
            if len(set(self.ids)) != len(self.ids):
                raise UsageError(f"duplicate tile ids in family {label!r}")
        self._labels = labels
        self._members = members
        self.clipped = (np.zeros(len(self.ids), dtype=bool) if clipped is None
                        else np.asarray(clipped, dtype=bool))
        self.meta = dict(meta or {})
        self._overlap = None
        if len(self.clipped) != len(self.ids):
            raise UsageError("clipped flags must match the tile count")

    # construction
    @classmethod
    def from_labels(cls, window, label, labels, ids, clipped=None, meta=None):
        """Per-point labels (-1 = uncovered); tiles without points are dropped."""
        labels = np.asarray(labels)
        if labels.shape != (window.size,):
            raise UsageError("label array must cover the window")
        labels = labels.astype(np.int32, copy=False)
        if not getattr(ids, "distinct", False):
            ids = list(ids)
        counts = np.bincount(labels[labels >= 0], minlength=len(ids)) if len(ids) else np.zeros(0, int)
        if len(counts) > len(ids):
            raise UsageError("labels refer to missing tile ids")
        keep = counts > 0
        clipped = np.zeros(len(ids), bool) if clipped is None else np.asarray(clipped, bool)
        if not keep.all():
            remap = np.full(len(ids), -1, dtype=np.int32)
            remap[keep] = np.arange(int(keep.sum()), dtype=np.int32)
            labels = np.where(labels >= 0, remap[np.maximum(labels, 0)], -1).astype(np.int32)
            ids = [i for i, k in zip(ids, keep) if k]
            clipped = clipped[keep]
        return cls(window, label, ids, labels=labels, clipped=clipped, meta=meta)

    @classmethod
    def from_members(cls, window, label, members, ids, clipped=None, meta=None):
        members = [np.unique(np.asarray(m, dtype=np.int64)) for m in members]
        ids = list(ids)
        clipped = np.zeros(len(ids), bool) if clipped is None else np.asarray(clipped, bool)
        keep = [i for i, m in enumerate(members) if m.size]
        return cls(window, label, [ids[i] for i in keep], members=[members[i] for i in keep],
                   clipped=clipped[keep] if len(ids) else clipped, meta=meta)

    @classmethod
    def from_sets(cls, window, label, sets, ids=None, clipped=None, meta=None):
        """Tiles given as collections of group elements, all inside the window."""
        sets = [list(s) for s in sets]
        if ids is None:
            ids = [(label, i) for i in range(len(sets))]
        members = []
        for s in sets:
            idx = window.indices(s) if s else np.zeros(0, dtype=np.int64)
            if (idx < 0).any():
                bad = s[int(np.argmax(idx < 0))]
                raise UsageError(f"point {bad!r} is outside the window")
            members.append(idx)
        return cls.from_members(window, label, members, ids, clipped, meta)

    # views
    def __len__(self):
        return len(self.ids)

    def __repr__(self):
        return f"Family({self.label!r}, {len(self)} tiles)"

    @property
    def labels(self) -> np.ndarray:
        if self._labels is None:
            lab = np.full(self.window.size, -1, dtype=np.int32)
            for t in range(len(self._members) - 1, -1, -1):
                m = self._members[t]
                hit = m[lab[m] >= 0]
                if hit.size:
                    p = int(hit[0])
                    self._overlap = (p, t, int(lab[p]))
                lab[m] = t
            self._labels = lab
        return self._labels

    def overlap(self):
        """A point lying in two tiles, as (point index, tile, tile), or None."""
        if self._members is None:
            return None
        self.labels
        return self._overlap

    def members(self, t: int) -> np.ndarray:
        if self._members is None:
            lab = self._labels
            pts = np.flatnonzero(lab >= 0)
            order = pts[np.argsort(lab[pts], kind="stable")]
            counts = np.bincount(lab[pts], minlength=len(self.ids))
            bounds = np.r_[0, np.cumsum(counts)]
            self._members = [order[bounds[i]:bounds[i + 1]] for i in range(len(self.ids))]
        return self._members[t]

    def tile(self, t: int) -> Tile:
        pts = frozenset(self.window.elements_of(self.members(t)))
        return Tile(self.ids[t], pts, bool(self.clipped[t]))

    def tiles(self):
        for t in range(len(self)):
            yield self.tile(t)

    def support(self) -> np.ndarray:
        if self._members is not None and self._labels is None:
            mask = np.zeros(self.window.size, dtype=bool)
            for m in self._members:
                mask[m] = True
            return mask
        return self.labels >= 0

    def relabel(self, label):
        f = Family(self.window, label, self.ids, labels=self._labels, members=self._members,
                   clipped=self.clipped, meta=self.meta)
        f._overlap = self._overlap
        return f


class LazyIds(Sequence):
    """Tile ids generated on access from (tag, count, make) segments; distinct by construction."""

    distinct = True

    def __init__(self, segments):
        self.segments = list(segments)
        self._starts = np.cumsum([0] + [c for _, c, _ in self.segments])

    def __len__(self):
        return int(self._starts[-1])

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        k = int(np.searchsorted(self._starts, i, side="right")) - 1
        tag, _, make = self.segments[k]
        return make(tag, i - int(self._starts[k]))


def union_families(fams, label, prefix_ids=True) -> Family:
    """All tiles of several families on one window, ids prefixed by their family label."""
    fams = list(fams)
    if not fams:
        raise UsageError("need at least one family")
    window = fams[0].window
    clipped = []
    for f in fams:
        if f.window is not window:
            raise UsageError("families live on different windows")
        clipped.extend(f.clipped.tolist())
    if prefix_ids:
        ids = LazyIds([(None, len(f), lambda tag, i, f=f: (f.label, f.ids[i])) for f in fams])
    else:
        ids = [i for f in fams for i in f.ids]
    disjoint = all(f._members is None or f.overlap() is None for f in fams)
    if disjoint:
        lab = np.full(window.size, -1, dtype=np.int32)
        base = 0
        for f in fams:
            fl = f.labels
            hit = fl >= 0
            if (lab[hit] >= 0).any():
                disjoint = False
                break
            lab[hit] = fl[hit] + base
            base += len(f)
        if disjoint:
            return Family(window, label, ids, labels=lab, clipped=clipped)
    members = [f.members(t) for f in fams for t in range(len(f))]
    return Family(window, label, ids, members=members, clipped=clipped)


def _pairwise(d, xs, ys):
    if hasattr(d, "pairwise"):
        return np.asarray(d.pairwise(xs, ys))
    return np.array([[d(x, y) for y in ys] for x in xs], dtype=np.int64).reshape(len(xs), len(ys))


def _tile_points(t):
    return sorted(t.points if isinstance(t, Tile) else t, key=repr)


def min_distance(t1, t2, d, threshold=None) -> int:
    """Exact min distance between two tiles, or the first value below ``threshold``."""
    a, b = _tile_points(t1), _tile_points(t2)
    if not a or not b:
        raise UsageError("tiles must be non-empty")
    best = None
    for s in range(0, len(a), 256):
        v = int(_pairwise(d, a[s:s + 256], b).min())
        best = v if best is None else min(best, v)
        if threshold is not None and best < threshold:
            return best
    return best


def diameter(t, d) -> int:
    a = _tile_points(t)
    if not a:
        raise UsageError("tile must be non-empty")
    best = 0
    for s in range(0, len(a), 256):
        best = max(best, int(_pairwise(d, a[s:s + 256], a).max()))
    return best


def _oracle_disjoint(f, r, d):
    tiles = list(f.tiles())
    for i in range(len(tiles)):
        for j in range(i + 1, len(tiles)):
            a, b = _tile_points(tiles[i]), _tile_points(tiles[j])
            m = _pairwise(d, a, b)
            k = np.unravel_index(int(np.argmin(m)), m.shape)
            if m[k] < r:
                return False, (a[k[0]], b[k[1]])
    return True, None


def is_r_disjoint(f: Family, r: int, d=None):
    """(True, None) if distinct tiles are >= r apart, else (False, (x, y)).

    Without an explicit oracle the window's own strategy is used; an oracle
    forces a plain tile-by-tile comparison.
    """
    if r <= 0:
        raise UsageError("r must be positive")
    ov = f.overlap()
    if ov is not None:
        x = f.window.element(ov[0])
        return False, (x, x)
    if d is not None:
        return _oracle_disjoint(f, r, d)
    found = f.window.min_cross_distance(f.labels, below=r)
    if found is None:
        return True, None
    _, p, q = found
    return False, (f.window.element(p), f.window.element(q))


def min_separation(f: Family):
    """Exact smallest distance between distinct tiles with a witness, or None."""
    ov = f.overlap()
    if ov is not None:
        return 0, ov[0], ov[0]
    return f.window.min_cross_distance(f.labels)


def tile_diameters(f: Family):
    """Per-tile exact diameters and witness index pairs."""
    if f._members is not None and f.overlap() is not None:
        diam = np.zeros(len(f), dtype=np.int64)
        wa = np.zeros(len(f), dtype=np.int64)
        wb = np.zeros(len(f), dtype=np.int64)
        for t in range(len(f)):
            m = f.members(t)
            elems = f.window.elements_of(m)
            mat = f.window.group.pairwise(elems, elems)
            k = np.unravel_index(int(np.argmax(mat)), mat.shape)
            diam[t], wa[t], wb[t] = mat[k], m[k[0]], m[k[1]]
        return diam, wa, wb
    return f.window.tile_diameters(f.labels, len(f))


def is_bounded(f: Family, R: int):
    """(True, None) if every tile has diameter <= R, else (False, (x, y, dist))."""
    if len(f) == 0:
        return True, None
    diam, wa, wb = tile_diameters(f)
    t = int(np.argmax(diam))
    if diam[t] <= R:
        return True, None
    return False, (f.window.element(wa[t]), f.window.element(wb[t]), int(diam[t]))


def covers(fams, window=None, limit=None):
    """Whether the families cover the window's core; also the uncovered core points."""
    fams = list(fams)
    if window is None:
        if not fams:
            raise UsageError("need a window or at least one family")
        window = fams[0].window
    covered = np.zeros(window.size, dtype=bool)
    for f in fams:
        if f.window is not window:
            raise UsageError("families live on a different window")
        covered |= f.support()
    missing = np.flatnonzero(window.core_mask & ~covered)
    if limit is not None:
        missing = missing[:limit]
    return missing.size == 0, window.elements_of(missing)


def family_minus_set(f: Family, s) -> Family:
    """Remove a set of elements from every tile; tiles that become empty are dropped."""
    idx = f.window.indices(list(s)) if s else np.zeros(0, dtype=np.int64)
    idx = idx[idx >= 0]
    if f._members is None:
        lab = f.labels.copy()
        lab[idx] = -1
        return Family.from_labels(f.window, f.label, lab, f.ids, f.clipped, f.meta)
    members = [np.setdiff1d(f.members(t), idx) for t in range(len(f))]
    return Family.from_members(f.window, f.label, members, f.ids, f.clipped, f.meta)


def saturated_union(V: Family, U: Family, r: int, d=None) -> Family:
    """{V plus every U-tile within r of it} together with the U-tiles farther than r from all of V."""
    if V.window is not U.window:
        raise UsageError("families live on different windows")
    w = V.window
    d = d or MetricOracle(w.group)
    vt = [w.elements_of(V.members(i)) for i in range(len(V))]
    ut = [w.elements_of(U.members(j)) for j in range(len(U))]
    near = [[] for _ in range(len(V))]
    absorbed = {}
    for j, ue in enumerate(ut):
        for i, ve in enumerate(vt):
            if min_distance(ue, ve, d, threshold=r + 1) <= r:
                near[i].append(j)
                absorbed.setdefault(j, []).append(i)
    warnings = [{"tile": U.ids[j], "near": [V.ids[i] for i in vs]}
                for j, vs in sorted(absorbed.items()) if len(vs) > 1]
    members, ids, clipped = [], [], []
    for i in range(len(V)):
        parts = [V.members(i)] + [U.members(j) for j in near[i]]
        members.append(np.unique(np.concatenate(parts)))
        ids.append(("N", V.ids[i]))
        clipped.append(bool(V.clipped[i]) or any(bool(U.clipped[j]) for j in near[i]))
    for j in range(len(U)):
        if j not in absorbed:
            members.append(U.members(j))
            ids.append(("U", U.ids[j]))
            clipped.append(bool(U.clipped[j]))
    meta = {"r": r}
    if warnings:
        meta["hypothesis_warnings"] = warnings
    fam = Family.from_members(w, ("sat", V.label, U.label), members, ids, clipped, meta)
    if not warnings:
        fam.labels  # disjoint by construction; cache the label view
    return fam


def dump_jsonl(fams, fh):
    """One JSON line per tile: {"family", "tile", "points", "clipped"}."""
    for f in fams:
        for t in range(len(f)):
            pts = [f.window.encode(i) for i in f.members(t)]
            rec = {"family": f.label, "tile": f.ids[t], "points": pts, "clipped": bool(f.clipped[t])}
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_jsonl(fh, window) -> list:
    """Families from a dump, in first-appearance order."""
    order, data = [], {}
    for line in fh:
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        label = _as_id(rec["family"])
        if label not in data:
            data[label] = ([], [], [])
            order.append(label)
        ids, sets, clipped = data[label]
        ids.append(_as_id(rec["tile"]))
        sets.append([window.group.decode(p) for p in rec["points"]])
        clipped.append(bool(rec.get("clipped", False)))
    out = []
    for label in order:
        ids, sets, clipped = data[label]
        f = Family.from_sets(window, label, sets, ids, clipped)
        if f.overlap() is None:
            f = Family(window, label, f.ids, labels=f.labels, clipped=f.clipped)
        out.append(f)
    return out
