"""Finite windows of a group and the metric strategies used on them.

A window indexes its points ``0..size-1``.  Families store per-point labels
over that index, and every window knows how to answer the two questions the
verifier asks at scale:

* ``min_cross_distance(labels, below)``: the closest pair of points carrying
  different labels (or any pair closer than ``below``);
* ``tile_diameters(labels, ntiles)``: exact per-label diameters with a
  witnessing pair.

Boxes in Z^n use a taxicab distance transform and sign-vector projections,
balls in F2 use compiled tree sweeps, and explicit point sets fall back to
translating by a small ball of offsets or to chunked pairwise distances.
"""
from __future__ import annotations

import itertools
from functools import cached_property

import numpy as np
from scipy import ndimage

from . import _freetree as ft
from .errors import UsageError
from .groups import (DEFAULT_BALL_CAP, FreeGroup2, Group, HeisenbergGroup, ZnGroup,
                     make_group)


class Window:
    group: Group
    size: int
    core_margin: int

    def element(self, i: int):
        raise NotImplementedError

    def index(self, g) -> int:
        raise NotImplementedError

    def elements_of(self, idx) -> list:
        return [self.element(int(i)) for i in idx]

    def indices(self, elements) -> np.ndarray:
        return np.array([self.index(g) for g in elements], dtype=np.int64)

    def __contains__(self, g):
        return self.index(g) >= 0

    @cached_property
    def core_mask(self) -> np.ndarray:
        return self._core_mask()

    def core_indices(self) -> np.ndarray:
        return np.flatnonzero(self.core_mask)

    def distance(self, i: int, j: int) -> int:
        return self.group._dist(self.element(i), self.element(j))

    def describe(self) -> dict:
        raise NotImplementedError

    def encode(self, i: int):
        return self.group.encode(self.element(i))


def _half_offsets(weights, limit):
    """Nonzero integer vectors with positive leading coordinate and weighted norm <= limit."""
    n = len(weights)
    out = []
    ranges = [range(-(limit // w), limit // w + 1) for w in weights]
    for v in itertools.product(*ranges):
        norm = sum(w * abs(c) for w, c in zip(weights, v))
        if norm == 0 or norm > limit:
            continue
        lead = next(c for c in v if c != 0)
        if lead > 0:
            out.append((norm, v))
    out.sort()
    return out


class BoxWindow(Window):
    """Integer box ``lo <= x <= hi`` in Z^n; core shrinks each side by the margin."""

    def __init__(self, group, lo, hi, core_margin: int = 0):
        if isinstance(group, int):
            group = ZnGroup(group)
        self.group = make_group(group)
        if not isinstance(self.group, ZnGroup):
            raise UsageError("box windows live in Z^n")
        n = self.group.n
        lo = np.broadcast_to(np.asarray(lo, dtype=np.int64), (n,)).copy()
        hi = np.broadcast_to(np.asarray(hi, dtype=np.int64), (n,)).copy()
        if (hi < lo).any():
            raise UsageError("empty box")
        self.lo, self.hi = lo, hi
        self.shape = tuple(int(v) for v in hi - lo + 1)
        self.size = int(np.prod(self.shape))
        self.core_margin = int(core_margin)
        if self.core_margin < 0 or (hi - lo < 2 * self.core_margin).any():
            raise UsageError(f"core margin {core_margin} leaves an empty core in {self.describe()}")

    def describe(self):
        return {"kind": "box", **self.group.describe(), "lo": self.lo.tolist(),
                "hi": self.hi.tolist(), "core_margin": self.core_margin}

    @cached_property
    def coords(self) -> np.ndarray:
        grids = np.indices(self.shape, dtype=np.int64).reshape(len(self.shape), -1).T
        return grids + self.lo

    def element(self, i):
        return tuple(int(c) for c in np.unravel_index(int(i), self.shape) + self.lo)

    def index(self, g):
        v = np.atleast_1d(np.asarray(g, dtype=np.int64))
        if v.shape != self.lo.shape or (v < self.lo).any() or (v > self.hi).any():
            return -1
        return int(np.ravel_multi_index(tuple(v - self.lo), self.shape))

    def indices_of_coords(self, coords) -> np.ndarray:
        coords = np.asarray(coords, dtype=np.int64)
        ok = ((coords >= self.lo) & (coords <= self.hi)).all(axis=1)
        out = np.full(len(coords), -1, dtype=np.int64)
        if ok.any():
            out[ok] = np.ravel_multi_index(tuple((coords[ok] - self.lo).T), self.shape)
        return out

    def _core_mask(self):
        m = self.core_margin
        c = self.coords
        return ((c >= self.lo + m) & (c <= self.hi - m)).all(axis=1)

    def min_cross_distance(self, labels, below=None):
        if all(w == 1 for w in self.group.weights):
            found = self._cross_by_transform(labels)
        else:
            found = self._cross_by_offsets(labels, below)
        if found is None or (below is not None and found[0] >= below):
            return None
        return found

    def _cross_by_transform(self, labels):
        grid = np.asarray(labels).reshape(self.shape)
        if np.unique(grid[grid >= 0]).size < 2:
            return None
        dist, inds = ndimage.distance_transform_cdt(grid < 0, metric="taxicab", return_indices=True)
        dist = dist.astype(np.int64)
        near = np.ravel_multi_index(tuple(inds), self.shape)
        near_lab = np.asarray(labels)[near]
        best = None
        for axis in range(grid.ndim):
            a = [slice(None)] * grid.ndim
            b = [slice(None)] * grid.ndim
            a[axis] = slice(0, -1)
            b[axis] = slice(1, None)
            a, b = tuple(a), tuple(b)
            differ = near_lab[a] != near_lab[b]
            if not differ.any():
                continue
            val = np.where(differ, dist[a] + dist[b] + 1, np.iinfo(np.int64).max)
            k = np.unravel_index(int(np.argmin(val)), val.shape)
            v = int(val[k])
            if best is None or v < best[0]:
                best = (v, int(near[a][k]), int(near[b][k]))
        if best is None:
            return None
        _, p, q = best
        return (self.distance(p, q), p, q)

    def _cross_by_offsets(self, labels, below):
        grid = np.asarray(labels).reshape(self.shape)
        limit = (below - 1) if below is not None else int(np.dot(self.group.weights, np.array(self.shape) - 1))
        for norm, v in _half_offsets(self.group.weights, limit):
            a, b = [], []
            for c, s in zip(v, self.shape):
                if abs(c) >= s:
                    break
                a.append(slice(0, s - c) if c >= 0 else slice(-c, s))
                b.append(slice(c, s) if c >= 0 else slice(0, s + c))
            else:
                A, B = grid[tuple(a)], grid[tuple(b)]
                bad = (A >= 0) & (B >= 0) & (A != B)
                if bad.any():
                    k = np.argwhere(bad)[0]
                    pa = tuple(int(k[i] + a[i].start) for i in range(len(k)))
                    pb = tuple(int(k[i] + b[i].start) for i in range(len(k)))
                    return (norm, int(np.ravel_multi_index(pa, self.shape)),
                            int(np.ravel_multi_index(pb, self.shape)))
        return None

    def tile_diameters(self, labels, ntiles):
        labels = np.asarray(labels)
        diam = np.zeros(ntiles, dtype=np.int64)
        wa = np.full(ntiles, -1, dtype=np.int64)
        wb = np.full(ntiles, -1, dtype=np.int64)
        pts = np.flatnonzero(labels >= 0)
        if pts.size == 0:
            return diam, wa, wb
        lab = labels[pts]
        c = self.coords[pts]
        w = np.asarray(self.group.weights, dtype=np.int64)
        n = len(w)
        for tail in itertools.product((1, -1), repeat=n - 1):
            sigma = np.array((1,) + tail, dtype=np.int64) * w
            proj = c @ sigma
            order = np.lexsort((proj, lab))
            sl = lab[order]
            starts = np.flatnonzero(np.r_[True, sl[1:] != sl[:-1]])
            ends = np.r_[starts[1:], sl.size] - 1
            t = sl[starts]
            spread = proj[order[ends]] - proj[order[starts]]
            better = spread > diam[t]
            tb = t[better]
            diam[tb] = spread[better]
            wa[tb] = pts[order[starts[better]]]
            wb[tb] = pts[order[ends[better]]]
        single = wa < 0
        if single.any():
            first = np.full(ntiles, -1, dtype=np.int64)
            first[lab[::-1]] = pts[::-1]
            wa[single] = first[single]
            wb[single] = first[single]
        return diam, wa, wb


class PointWindow(Window):
    """An explicit finite point set with a hash index."""

    def __init__(self, group, elements, core=None, core_margin: int = 0, descriptor=None):
        self.group = make_group(group)
        self.points = list(elements)
        self.size = len(self.points)
        self.lookup = {g: i for i, g in enumerate(self.points)}
        if len(self.lookup) != self.size:
            raise UsageError("window elements must be distinct")
        self.core_margin = int(core_margin)
        self._core = core
        self._descriptor = descriptor

    def describe(self):
        if self._descriptor is not None:
            return dict(self._descriptor)
        return {"kind": "points", **self.group.describe(), "size": self.size}

    def element(self, i):
        return self.points[int(i)]

    def index(self, g):
        return self.lookup.get(g, -1)

    def _core_mask(self):
        if self._core is None:
            return np.ones(self.size, dtype=bool)
        if isinstance(self._core, np.ndarray) and self._core.dtype == bool:
            return self._core.copy()
        mask = np.zeros(self.size, dtype=bool)
        for g in self._core:
            i = self.index(g)
            if i >= 0:
                mask[i] = True
        return mask

    @cached_property
    def coords(self):
        if isinstance(self.group, (ZnGroup, HeisenbergGroup)):
            return np.array(self.points, dtype=np.int64).reshape(self.size, -1)
        return None

    @cached_property
    def _grid(self):
        c = self.coords
        lo = c.min(axis=0)
        shape = tuple(int(v) for v in c.max(axis=0) - lo + 1)
        grid = np.full(shape, -1, dtype=np.int64)
        grid[tuple((c - lo).T)] = np.arange(self.size)
        return lo, grid

    def indices_of_coords(self, coords):
        lo, grid = self._grid
        rel = np.asarray(coords, dtype=np.int64) - lo
        ok = ((rel >= 0) & (rel < np.array(grid.shape))).all(axis=1)
        out = np.full(len(rel), -1, dtype=np.int64)
        out[ok] = grid[tuple(rel[ok].T)]
        return out

    def min_cross_distance(self, labels, below=None):
        labels = np.asarray(labels)
        pts = np.flatnonzero(labels >= 0)
        if np.unique(labels[pts]).size < 2:
            return None
        if below is not None:
            if below <= 1:
                return None
            est = self.group.ball_size_estimate(below - 1)
            if est <= DEFAULT_BALL_CAP and est * pts.size <= pts.size * pts.size // 2:
                return self._cross_by_offsets(labels, pts, below)
        return self._cross_pairwise(labels, pts, below)

    def _cross_by_offsets(self, labels, pts, below):
        ball = self.group.enumerate_ball(below - 1)
        offsets = sorted((l, g) for g, l in ball.items() if l > 0)
        lab = labels[pts]
        vector = self.coords is not None and hasattr(self.group, "mul_array")
        base = self.coords[pts] if vector else None
        for l, g in offsets:
            if vector:
                tgt = self.indices_of_coords(self.group.mul_array(base, g))
                ok = tgt >= 0
                other = np.where(ok, labels[np.where(ok, tgt, 0)], -1)
                bad = ok & (other >= 0) & (other != lab)
                if bad.any():
                    k = int(np.argmax(bad))
                    return (l, int(pts[k]), int(tgt[k]))
            else:
                for k, i in enumerate(pts):
                    j = self.lookup.get(self.group._mul(self.points[i], g), -1)
                    if j >= 0 and labels[j] >= 0 and labels[j] != lab[k]:
                        return (l, int(i), int(j))
        return None

    def _cross_pairwise(self, labels, pts, below):
        best = None
        elems = [self.points[i] for i in pts]
        lab = labels[pts]
        chunk = 256
        for s in range(0, len(pts), chunk):
            rows = slice(s, min(s + chunk, len(pts)))
            d = self.group.pairwise(elems[rows], elems[s:])
            same = lab[rows][:, None] == lab[s:][None, :]
            d = np.where(same, np.iinfo(np.int64).max, d)
            k = np.unravel_index(int(np.argmin(d)), d.shape)
            v = int(d[k])
            if best is None or v < best[0]:
                if v == np.iinfo(np.int64).max:
                    continue
                best = (v, int(pts[s + k[0]]), int(pts[s + k[1]]))
                if below is not None and v < below:
                    return best
        if best is None or (below is not None and best[0] >= below):
            return None
        return best

    def tile_diameters(self, labels, ntiles):
        labels = np.asarray(labels)
        diam = np.zeros(ntiles, dtype=np.int64)
        wa = np.full(ntiles, -1, dtype=np.int64)
        wb = np.full(ntiles, -1, dtype=np.int64)
        pts = np.flatnonzero(labels >= 0)
        order = pts[np.argsort(labels[pts], kind="stable")]
        sl = labels[order]
        starts = np.flatnonzero(np.r_[True, sl[1:] != sl[:-1]]) if sl.size else np.array([], int)
        ends = np.r_[starts[1:], sl.size]
        for a, b in zip(starts, ends):
            members = order[a:b]
            t = int(sl[a])
            elems = [self.points[i] for i in members]
            d = self.group.pairwise(elems, elems)
            k = np.unravel_index(int(np.argmax(d)), d.shape)
            diam[t] = int(d[k])
            wa[t], wb[t] = members[k[0]], members[k[1]]
        return diam, wa, wb


class BallWindow(PointWindow):
    """Word-metric ball about the identity, enumerated by BFS."""

    def __init__(self, group, radius: int, core_margin: int = 0, cap: int | None = DEFAULT_BALL_CAP):
        group = make_group(group)
        if core_margin < 0 or core_margin > radius:
            raise UsageError(f"core margin {core_margin} leaves an empty core in a ball of radius {radius}")
        if isinstance(group, HeisenbergGroup):
            group.ensure_radius(2 * radius)
        ball = group.enumerate_ball(radius, cap)
        self.radius = int(radius)
        self.lengths = np.fromiter(ball.values(), dtype=np.int64, count=len(ball))
        super().__init__(group, list(ball.keys()), core=None, core_margin=core_margin)

    def describe(self):
        return {"kind": "ball", **self.group.describe(), "radius": self.radius,
                "core_margin": self.core_margin}

    def _core_mask(self):
        return self.lengths <= self.radius - self.core_margin


class FreeBallWindow(Window):
    """Ball in F2 stored implicitly in level order (see ``_freetree``)."""

    max_radius = 18

    def __init__(self, radius: int, core_margin: int = 0):
        if radius > self.max_radius:
            raise UsageError(f"implicit F2 balls are limited to radius {self.max_radius}")
        if core_margin < 0 or core_margin > radius:
            raise UsageError(f"core margin {core_margin} leaves an empty core in a ball of radius {radius}")
        self.group = FreeGroup2()
        self.radius = int(radius)
        self.core_margin = int(core_margin)
        self.size = ft.ball_size(self.radius)
        self.p3, self.off = ft.tables(self.radius)

    def describe(self):
        return {"kind": "ball", "group": "f2", "radius": self.radius, "core_margin": self.core_margin}

    def level_range(self, L: int) -> tuple[int, int]:
        return ft.level_offset(L), ft.level_offset(L + 1)

    @property
    def core_size(self) -> int:
        return ft.ball_size(self.radius - self.core_margin)

    def element(self, i):
        return ft.index_to_word(int(i))

    def index(self, g):
        if not isinstance(g, str) or len(g) > self.radius:
            return -1
        return ft.word_to_index(g)

    def _core_mask(self):
        mask = np.zeros(self.size, dtype=bool)
        mask[: self.core_size] = True
        return mask

    def distance(self, i, j):
        return int(ft.tree_distance(int(i), int(j), self.p3, self.off, self.radius))

    def min_cross_distance(self, labels, below=None):
        d, p, q = ft.tree_min_cross(labels, self.radius, 0 if below is None else int(below),
                                    self.p3, self.off)
        if p < 0 or (below is not None and d >= below):
            return None
        return (int(d), int(p), int(q))

    def tile_diameters(self, labels, ntiles):
        diam, a, b = ft.tree_tile_diameters(labels, int(ntiles), self.radius, self.p3, self.off)
        return diam, a, b


def make_window(desc: dict, cap: int | None = DEFAULT_BALL_CAP) -> Window:
    """Window from a JSON descriptor (``kind`` is ``box`` or ``ball``)."""
    kind = desc.get("kind", "ball")
    margin = int(desc.get("core_margin", 0))
    if kind == "box":
        n = int(desc.get("n", len(desc["lo"]) if isinstance(desc.get("lo"), list) else 1))
        return BoxWindow(ZnGroup(n, desc.get("weights")), desc["lo"], desc["hi"], margin)
    if kind == "ball":
        group = make_group(desc)
        if isinstance(group, FreeGroup2):
            return FreeBallWindow(int(desc["radius"]), margin)
        return BallWindow(group, int(desc["radius"]), margin, cap)
    raise UsageError(f"unknown window kind {kind!r}")
