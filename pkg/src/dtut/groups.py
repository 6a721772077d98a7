"""Normal forms, word lengths and Cayley-ball enumeration.

Four concrete groups are provided:

* ``ZnGroup``: integer vectors with a (weighted) l1 word metric.
* ``HeisenbergGroup``: triples ``(x, y, z)`` standing for ``a^x b^y c^z``,
  generated by ``a, b, c`` and their inverses; word lengths come from a BFS
  table.
* ``FreeGroup2``: reduced strings over ``aAbB`` (capitals are inverses).
* ``LamplighterGroup``: pairs ``(lamps, pos)`` where ``lamps`` is a sorted
  tuple of ``(position, value)`` with nonzero values.

Elements are plain immutable Python values so they hash, compare and
serialize cheaply.
"""
from __future__ import annotations

import itertools
import json
import math
import os
from pathlib import Path

import numpy as np

from .errors import GroupMismatchError, OutOfRangeError, ResourceError, UsageError
from .io import atomic_write_bytes

DEFAULT_BALL_CAP = 5_000_000
BRUTE_FORCE_SUPPORT_CAP = 8
TABLE_VERSION = 1
CACHE_ENV = "DTUT_CACHE_DIR"


def visiting_path_length(support, end: int) -> int:
    """Shortest walk on the integers from 0 through every support point to ``end``."""
    support = list(support)
    if not support:
        return abs(end)
    lo, hi = min(support), max(support)
    left_first = abs(lo) + (hi - lo) + abs(hi - end)
    right_first = abs(hi) + (hi - lo) + abs(end - lo)
    return min(left_first, right_first)


def visiting_path_bruteforce(support, end, metric=None, start=0) -> int:
    """Same quantity by trying every visit order; ``metric`` defaults to |a-b|."""
    support = list(dict.fromkeys(support))
    if len(support) > BRUTE_FORCE_SUPPORT_CAP:
        raise UsageError(
            f"permutation search is capped at {BRUTE_FORCE_SUPPORT_CAP} support points, got {len(support)}"
        )
    if metric is None:
        def metric(p, q):
            return abs(p - q)
    if not support:
        return metric(start, end)
    best = None
    for order in itertools.permutations(support):
        cost = metric(start, order[0]) + metric(order[-1], end)
        cost += sum(metric(p, q) for p, q in zip(order, order[1:]))
        if best is None or cost < best:
            best = cost
    return best


def _is_int(v) -> bool:
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool)


def bfs_ball(identity, generators, mul, radius: int):
    """Layered BFS by right multiplication; returns {element: length} in BFS order."""
    dist = {identity: 0}
    frontier = [identity]
    for r in range(1, radius + 1):
        nxt = []
        for g in frontier:
            for s in generators:
                h = mul(g, s)
                if h not in dist:
                    dist[h] = r
                    nxt.append(h)
        frontier = nxt
    return dist


class Group:
    """Shared plumbing; subclasses implement the ``_`` primitives."""

    tag = "group"
    identity = None

    def key(self):
        return (self.tag,)

    def __eq__(self, other):
        return isinstance(other, Group) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"{type(self).__name__}{self.key()[1:]}"

    def describe(self) -> dict:
        return {"group": self.tag}

    # public API, validated
    def multiply(self, g, h):
        self.check(g)
        self.check(h)
        return self._mul(g, h)

    def invert(self, g):
        self.check(g)
        return self._inv(g)

    def word_length(self, g) -> int:
        self.check(g)
        return self._len(g)

    def distance(self, g, h) -> int:
        self.check(g)
        self.check(h)
        return self._dist(g, h)

    def _dist(self, g, h) -> int:
        return self._len(self._mul(self._inv(g), h))

    def pairwise(self, xs, ys) -> np.ndarray:
        out = np.empty((len(xs), len(ys)), dtype=np.int64)
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                out[i, j] = self._dist(x, y)
        return out

    def ball_size_estimate(self, radius: int) -> int:
        raise NotImplementedError

    def enumerate_ball(self, radius: int, cap: int | None = DEFAULT_BALL_CAP) -> dict:
        """All elements of word length <= radius, mapped to their length."""
        if radius < 0:
            raise UsageError("radius must be non-negative")
        est = self.ball_size_estimate(radius)
        if cap is not None and est > cap:
            raise ResourceError(
                f"{self.tag} ball of radius {radius} has about {est} elements, above the cap {cap}",
                estimate=est, cap=cap,
            )
        return self._ball(radius)

    def _ball(self, radius):
        return bfs_ball(self.identity, self.generators(), self._mul, radius)

    def generators(self) -> list:
        raise NotImplementedError

    def check(self, g):
        raise NotImplementedError


class ZnGroup(Group):
    """Z^n with generators +-e_i of positive integer weight w_i."""

    tag = "zn"

    def __init__(self, n: int, weights=None):
        if n < 1:
            raise UsageError("dimension must be at least 1")
        self.n = int(n)
        if weights is None:
            weights = (1,) * self.n
        weights = tuple(int(w) for w in weights)
        if len(weights) != self.n or min(weights) < 1:
            raise UsageError("weights must be n positive integers")
        self.weights = weights
        self.identity = (0,) * self.n

    def key(self):
        return (self.tag, self.n, self.weights)

    def describe(self):
        d = {"group": self.tag, "n": self.n}
        if any(w != 1 for w in self.weights):
            d["weights"] = list(self.weights)
        return d

    def check(self, g):
        if not (isinstance(g, tuple) and len(g) == self.n and all(_is_int(c) for c in g)):
            raise GroupMismatchError(f"{g!r} is not an element of Z^{self.n}")

    def _mul(self, g, h):
        return tuple(a + b for a, b in zip(g, h))

    def _inv(self, g):
        return tuple(-a for a in g)

    def _len(self, g):
        return sum(w * abs(a) for w, a in zip(self.weights, g))

    def _dist(self, g, h):
        return sum(w * abs(a - b) for w, a, b in zip(self.weights, g, h))

    def generators(self):
        gens = []
        for i in range(self.n):
            for s in (1, -1):
                e = [0] * self.n
                e[i] = s
                gens.append(tuple(e))
        return gens

    def pairwise(self, xs, ys):
        a = np.asarray(xs, dtype=np.int64).reshape(-1, self.n)
        b = np.asarray(ys, dtype=np.int64).reshape(-1, self.n)
        w = np.asarray(self.weights, dtype=np.int64)
        return (np.abs(a[:, None, :] - b[None, :, :]) * w).sum(axis=2)

    def mul_array(self, coords, g):
        return coords + np.asarray(g, dtype=np.int64)

    def ball_size_estimate(self, radius):
        # exact count by a budget recursion over the axes
        counts = np.zeros(radius + 1, dtype=object)
        counts[0] = 1
        for w in self.weights:
            nxt = np.zeros(radius + 1, dtype=object)
            for used in range(radius + 1):
                if counts[used] == 0:
                    continue
                nxt[used] += counts[used]
                k = 1
                while used + k * w <= radius:
                    nxt[used + k * w] += 2 * counts[used]
                    k += 1
            counts = nxt
        return int(sum(counts))

    def _ball(self, radius):
        out = {}
        def rec(prefix, budget, axis):
            if axis == self.n:
                out[tuple(prefix)] = radius - budget
                return
            w = self.weights[axis]
            lim = budget // w
            for c in range(-lim, lim + 1):
                rec(prefix + [c], budget - w * abs(c), axis + 1)
        rec([], radius, 0)
        return dict(sorted(out.items(), key=lambda kv: (kv[1], kv[0])))

    def encode(self, g):
        return ",".join(str(int(c)) for c in g)

    def decode(self, s):
        if isinstance(s, (list, tuple)):
            g = tuple(int(c) for c in s)
        else:
            g = tuple(int(c) for c in str(s).split(","))
        self.check(g)
        return g


class HeisenbergTable:
    """BFS word lengths on the ball of a given radius, with a dense lookup grid."""

    def __init__(self, radius: int, coords: np.ndarray, lengths: np.ndarray):
        self.radius = int(radius)
        self.coords = coords
        self.lengths = lengths
        self.lookup = {tuple(int(v) for v in c): int(l) for c, l in zip(coords, lengths)}
        self.zmin = int(coords[:, 2].min())
        self.zmax = int(coords[:, 2].max())
        r = self.radius
        self._nz = self.zmax - self.zmin + 1
        self._grid = np.full((2 * r + 1, 2 * r + 1, self._nz), -1, dtype=np.int16)
        self._grid[coords[:, 0] + r, coords[:, 1] + r, coords[:, 2] - self.zmin] = lengths

    def lengths_of(self, x, y, z) -> np.ndarray:
        """Vectorized lookup; -1 marks elements outside the table."""
        r = self.radius
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        z = np.asarray(z, dtype=np.int64)
        ok = (np.abs(x) <= r) & (np.abs(y) <= r) & (z >= self.zmin) & (z <= self.zmax)
        out = np.full(x.shape, -1, dtype=np.int64)
        out[ok] = self._grid[x[ok] + r, y[ok] + r, z[ok] - self.zmin]
        return out


_H3_TABLES: dict[int, HeisenbergTable] = {}


def _h3_mul(g, h):
    return (g[0] + h[0], g[1] + h[1], g[2] + h[2] - h[0] * g[1])


_H3_GENS = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]


def _cache_dir(explicit=None):
    d = explicit or os.environ.get(CACHE_ENV)
    return Path(d) if d else None


def heisenberg_table(radius: int, cache_dir=None) -> HeisenbergTable:
    """BFS table for H3 over {a,b,c}+-, memoized in-process and optionally on disk."""
    for r, tab in _H3_TABLES.items():
        if r >= radius:
            return tab
    directory = _cache_dir(cache_dir)
    path = directory / f"h3_abc_r{radius}.npz" if directory else None
    if path is not None and path.exists():
        with np.load(path) as data:
            if int(data["version"]) == TABLE_VERSION and str(data["generators"]) == "abc":
                tab = HeisenbergTable(int(data["radius"]), data["coords"], data["lengths"])
                _H3_TABLES[radius] = tab
                return tab
    dist = bfs_ball((0, 0, 0), _H3_GENS, _h3_mul, radius)
    coords = np.array(list(dist.keys()), dtype=np.int64)
    lengths = np.array(list(dist.values()), dtype=np.int16)
    tab = HeisenbergTable(radius, coords, lengths)
    _H3_TABLES[radius] = tab
    if path is not None:
        import io as _io
        buf = _io.BytesIO()
        np.savez(buf, version=TABLE_VERSION, group="h3", generators="abc",
                 radius=radius, coords=coords, lengths=lengths)
        atomic_write_bytes(path, buf.getvalue())
    return tab


def commutator_length_bound(n: int) -> int:
    """Upper bound on the length of c^n from c^(pq) = [a^p, b^q] times leftover c's."""
    n = abs(n)
    best = n
    p = 1
    while p * p <= n:
        q = n // p
        best = min(best, 2 * p + 2 * q + (n - p * q))
        p += 1
    return best


class HeisenbergGroup(Group):
    """H3(Z) in the normal form a^x b^y c^z, generators {a, b, c}+-."""

    tag = "h3"
    identity = (0, 0, 0)

    def __init__(self, table_radius: int = 12, cache_dir=None):
        self.table_radius = int(table_radius)
        self.cache_dir = cache_dir

    def key(self):
        return (self.tag,)

    def describe(self):
        return {"group": self.tag, "generators": "a,b,c"}

    @property
    def table(self) -> HeisenbergTable:
        return heisenberg_table(self.table_radius, self.cache_dir)

    def ensure_radius(self, radius: int):
        if radius > self.table_radius:
            self.table_radius = int(radius)
        return self.table

    def check(self, g):
        if not (isinstance(g, tuple) and len(g) == 3 and all(_is_int(c) for c in g)):
            raise GroupMismatchError(f"{g!r} is not a Heisenberg triple")

    def _mul(self, g, h):
        return _h3_mul(g, h)

    def _inv(self, g):
        x, y, z = g
        return (-x, -y, -z - x * y)

    def _len(self, g):
        tab = self.table
        v = tab.lookup.get((int(g[0]), int(g[1]), int(g[2])))
        if v is None:
            need = max(self.upper_bound(g), tab.radius + 1)
            raise OutOfRangeError(
                f"{g} lies outside the BFS table of radius {tab.radius}; a table of radius {need} contains it",
                required_radius=need,
            )
        return v

    def upper_bound(self, g) -> int:
        """Length of an explicit word a^x b^y (commutator word for c^z)."""
        x, y, z = g
        return abs(x) + abs(y) + commutator_length_bound(z)

    def generators(self):
        return list(_H3_GENS)

    def ball_size_estimate(self, radius):
        return max(1, round(0.43 * (radius + 1) ** 4))

    def _ball(self, radius):
        if radius <= self.table_radius:
            tab = self.table
            return {tuple(int(v) for v in c): int(l)
                    for c, l in zip(tab.coords, tab.lengths) if l <= radius}
        return bfs_ball(self.identity, self.generators(), self._mul, radius)

    def mul_array(self, coords, g):
        x, y, z = (int(v) for v in g)
        out = coords.copy()
        out[:, 0] += x
        out[:, 1] += y
        out[:, 2] += z - x * coords[:, 1]
        return out

    def pairwise(self, xs, ys):
        a = np.asarray(xs, dtype=np.int64).reshape(-1, 3)
        b = np.asarray(ys, dtype=np.int64).reshape(-1, 3)
        dx = b[None, :, 0] - a[:, None, 0]
        dy = b[None, :, 1] - a[:, None, 1]
        dz = b[None, :, 2] - a[:, None, 2] + a[:, None, 1] * dx
        out = self.table.lengths_of(dx, dy, dz)
        if (out < 0).any():
            i, j = np.argwhere(out < 0)[0]
            self._len((int(dx[i, j]), int(dy[i, j]), int(dz[i, j])))
        return out

    def encode(self, g):
        return f"{g[0]},{g[1]},{g[2]}"

    def decode(self, s):
        g = tuple(int(c) for c in (s if isinstance(s, (list, tuple)) else str(s).split(",")))
        self.check(g)
        return g


_FREE_INV = {"a": "A", "A": "a", "b": "B", "B": "b"}


def free_reduce(word: str) -> str:
    """Freely reduce a word over aAbB."""
    out = []
    for ch in word:
        if ch not in _FREE_INV:
            raise UsageError(f"letter {ch!r} is not in the alphabet aAbB")
        if out and out[-1] == _FREE_INV[ch]:
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def common_prefix_length(u: str, v: str) -> int:
    return len(os.path.commonprefix([u, v]))


class FreeGroup2(Group):
    """Free group on a, b with reduced words as normal forms."""

    tag = "f2"
    identity = ""

    def check(self, g):
        if not isinstance(g, str):
            raise GroupMismatchError(f"{g!r} is not a free word")
        for x, y in zip(g, g[1:]):
            if _FREE_INV.get(x) == y:
                raise GroupMismatchError(f"{g!r} is not reduced")
        if any(ch not in _FREE_INV for ch in g):
            raise GroupMismatchError(f"{g!r} uses letters outside aAbB")

    def _mul(self, g, h):
        i = 0
        n = min(len(g), len(h))
        while i < n and _FREE_INV[g[len(g) - 1 - i]] == h[i]:
            i += 1
        return g[: len(g) - i] + h[i:]

    def _inv(self, g):
        return g[::-1].swapcase()

    def _len(self, g):
        return len(g)

    def _dist(self, g, h):
        return len(g) + len(h) - 2 * common_prefix_length(g, h)

    def generators(self):
        return ["a", "A", "b", "B"]

    def ball_size_estimate(self, radius):
        return 2 * 3 ** radius - 1 if radius > 0 else 1

    def encode(self, g):
        return g

    def decode(self, s):
        return free_reduce(str(s))


class LamplighterGroup(Group):
    """Z wr Z: finitely supported lamp configurations over Z and a cursor.

    Product ``(f, a)(g, b) = (f + g(. - a), a + b)``; generators toggle the lamp
    under the cursor by +-1 or move the cursor by +-1.
    """

    tag = "lamplighter"
    identity = ((), 0)

    def check(self, g):
        ok = (isinstance(g, tuple) and len(g) == 2 and isinstance(g[0], tuple) and _is_int(g[1]))
        if ok:
            prev = None
            for item in g[0]:
                if not (isinstance(item, tuple) and len(item) == 2 and _is_int(item[0])
                        and _is_int(item[1]) and item[1] != 0):
                    ok = False
                    break
                if prev is not None and item[0] <= prev:
                    ok = False
                    break
                prev = item[0]
        if not ok:
            raise GroupMismatchError(f"{g!r} is not a lamplighter element")

    @staticmethod
    def element(lamps: dict | None = None, pos: int = 0):
        lamps = lamps or {}
        return (tuple(sorted((int(i), int(v)) for i, v in lamps.items() if v != 0)), int(pos))

    def _mul(self, g, h):
        (f, a), (k, b) = g, h
        if not k:
            return (f, a + b)
        d = dict(f)
        for i, v in k:
            j = i + a
            nv = d.get(j, 0) + v
            if nv:
                d[j] = nv
            else:
                d.pop(j, None)
        return (tuple(sorted(d.items())), a + b)

    def _inv(self, g):
        f, a = g
        return (tuple((i - a, -v) for i, v in f), -a)

    def _len(self, g):
        f, a = g
        return sum(abs(v) for _, v in f) + visiting_path_length([i for i, _ in f], a)

    def _dist(self, g, h):
        (f, a), (k, b) = g, h
        d = dict(f)
        diff = {}
        for i, v in k:
            w = v - d.pop(i, 0)
            if w:
                diff[i] = w
        for i, v in d.items():
            diff[i] = -v
        cost = sum(abs(v) for v in diff.values())
        return cost + visiting_path_length([i - a for i in diff], b - a)

    def generators(self):
        return [(((0, 1),), 0), (((0, -1),), 0), ((), 1), ((), -1)]

    @staticmethod
    def _dense(xs, lo, width):
        lamps = np.zeros((len(xs), width), dtype=np.int64)
        pos = np.empty(len(xs), dtype=np.int64)
        for r, (f, a) in enumerate(xs):
            pos[r] = a
            for i, v in f:
                lamps[r, i - lo] = v
        return lamps, pos

    def pairwise(self, xs, ys):
        """Vectorized distances: lamp cost plus the two-sweep walk over the difference."""
        xs, ys = list(xs), list(ys)
        out = np.empty((len(xs), len(ys)), dtype=np.int64)
        if not xs or not ys:
            return out
        idx = [i for f, _ in xs + ys for i, _ in f]
        lo = min(idx, default=0)
        width = max(idx, default=0) - lo + 1
        lx, px = self._dense(xs, lo, width)
        ly, py = self._dense(ys, lo, width)
        step = max(1, 2_000_000 // (len(ys) * width))
        for s in range(0, len(xs), step):
            diff = ly[None, :, :] - lx[s:s + step, None, :]
            cost = np.abs(diff).sum(axis=2)
            nz = diff != 0
            anyz = nz.any(axis=2)
            first = np.where(anyz, np.argmax(nz, axis=2), 0) + lo
            last = np.where(anyz, width - 1 - np.argmax(nz[:, :, ::-1], axis=2), 0) + lo
            a = px[s:s + step, None]
            b = py[None, :]
            span = last - first
            walk = np.minimum(np.abs(a - first) + span + np.abs(last - b),
                              np.abs(a - last) + span + np.abs(b - first))
            out[s:s + step] = cost + np.where(anyz, walk, np.abs(b - a))
        return out

    def ball_size_estimate(self, radius):
        if radius > 40:
            return 10 ** 18
        return max(1, math.ceil(5 * 2.51 ** radius))

    def encode(self, g):
        f, a = g
        return {"lamps": {str(i): v for i, v in f}, "pos": a}

    def decode(self, s):
        if isinstance(s, str):
            s = json.loads(s)
        if not isinstance(s, dict) or "pos" not in s:
            raise UsageError(f"cannot decode lamplighter element from {s!r}")
        return self.element({int(k): int(v) for k, v in s.get("lamps", {}).items()}, int(s["pos"]))


def make_group(spec) -> Group:
    """Group from a tag or a descriptor dict."""
    if isinstance(spec, Group):
        return spec
    if isinstance(spec, str):
        spec = {"group": spec}
    tag = spec.get("group")
    if tag == "zn":
        return ZnGroup(spec.get("n", 1), spec.get("weights"))
    if tag == "h3":
        return HeisenbergGroup(spec.get("table_radius", 12))
    if tag == "f2":
        return FreeGroup2()
    if tag in ("lamplighter", "zwrz"):
        return LamplighterGroup()
    raise UsageError(f"unknown group {tag!r}")


def enumerate_ball(group, radius: int, cap: int | None = DEFAULT_BALL_CAP) -> dict:
    """Ball of word length <= radius about the identity, as {element: length}."""
    return make_group(group).enumerate_ball(radius, cap)
