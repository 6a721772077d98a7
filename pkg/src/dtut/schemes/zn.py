"""Hypercubes and shell strips in Z^n.

Per axis a translated coordinate ``w = x - x_l`` splits as ``w = q*S + r``
with ``S = (2h + 1) k1``.  The residue sits in the low edge band
(``r < k1``), the high edge band (``r >= S - k1``) or the middle.  A point
with every axis in the middle lies in the hypercube indexed by ``q``.

Shell strips of type ``(u, v, z)`` select edge band ``z`` on axis ``v``; on
each other axis the block ``q`` must have parity ``psi(u)`` and contributes
``q // 2`` to the tile index.  Taken literally these strips overlap one
another (and the cubes), so by default a point is assigned only to the strip
of its first edge axis.  That trims tiles without enlarging any of them and
turns the scheme into an exact partition.  ``literal=True`` keeps the
untrimmed strips.
"""
from __future__ import annotations

import numpy as np

from ..errors import UsageError
from ..families import Family
from .base import LFamilies, Scheme, check_scales

MIDDLE = 2


def psi(u: int, n: int) -> tuple:
    """Parity pattern on the n-1 non-strip axes, u in 1..2^(n-1)."""
    return tuple(((u - 1) >> p) & 1 for p in range(n - 1))


def shell_index(u: int, v: int, z: int, n: int) -> int:
    if not (1 <= u <= 2 ** (n - 1) and 1 <= v <= n and z in (0, 1)):
        raise UsageError(f"shell index (u={u}, v={v}, z={z}) out of range for n={n}")
    return ((u - 1) * n + (v - 1)) * 2 + z


def shell_of_index(s: int, n: int) -> tuple:
    z = s % 2
    v = (s // 2) % n + 1
    u = s // (2 * n) + 1
    return u, v, z


def _rows_to_labels(rows: np.ndarray):
    """Integer label per row and the distinct rows, ordered lexicographically."""
    if rows.shape[0] == 0:
        return np.zeros(0, dtype=np.int32), []
    uniq, inv = np.unique(rows, axis=0, return_inverse=True)
    return inv.reshape(-1).astype(np.int32), [tuple(int(c) for c in r) for r in uniq]


class ZnScheme(Scheme):
    name = "zn"
    m = 1
    n = 0

    def __init__(self, dim: int, k0: int, k1: int, h: int, literal: bool = False):
        if dim < 1:
            raise UsageError("dimension must be at least 1")
        self.dim = int(dim)
        self.scales, self.h_table = check_scales([k0, k1], {k1: h}, 1)
        self.k0, self.k1 = self.scales
        self.h = self.h_table[self.k1]
        self.S = (2 * self.h + 1) * self.k1
        self.literal = bool(literal)
        self.F = (2 ** (self.dim - 1) * self.dim * 2 - 1,)

    def describe(self):
        return {"scheme": "zn", "n": self.dim, "k0": self.k0, "k1": self.k1,
                "h_table": {str(self.k1): self.h}, "literal": self.literal}

    def with_h_table(self, h_table):
        return ZnScheme(self.dim, self.k0, self.k1, h_table[self.k1], self.literal)

    def offset(self, l: int) -> int:
        if not 1 <= l <= self.h:
            raise UsageError(f"translation index {l} outside 1..{self.h}")
        return 2 * self.k1 * (l - 1)

    def declared_bound(self) -> int:
        n = self.dim
        return 2 ** (n - 1) * (2 * (n + 1) * self.h + 1) * self.k1

    def core_tile_size(self) -> int:
        return (self.S - 2 * self.k1) ** self.dim

    def shell_tile_size(self, v: int) -> int:
        if self.literal:
            return self.k1 * self.S ** (self.dim - 1)
        return (self.S - 2 * self.k1) ** (v - 1) * self.k1 * self.S ** (self.dim - v)

    # point classification
    def _split(self, coords, l):
        w = np.asarray(coords, dtype=np.int64) - self.offset(l)
        q = w // self.S
        r = w - q * self.S
        band = np.full(w.shape, MIDDLE, dtype=np.int8)
        band[r < self.k1] = 0
        band[r >= self.S - self.k1] = 1
        return q, band

    def classify(self, coords, l: int):
        """Exclusive assignment: (is_core, shell index s, tile index rows)."""
        coords = np.asarray(coords, dtype=np.int64).reshape(-1, self.dim)
        q, band = self._split(coords, l)
        edge = band < MIDDLE
        is_core = ~edge.any(axis=1)
        v = np.argmax(edge, axis=1)
        rows = np.arange(len(coords))
        z = band[rows, v].astype(np.int64)
        u0 = np.zeros(len(coords), dtype=np.int64)
        idx = q.copy()
        for j in range(self.dim):
            p = np.where(j < v, j, j - 1)
            other = j != v
            u0 += np.where(other, (q[:, j] & 1) << np.maximum(p, 0), 0)
            idx[:, j] = np.where(other, q[:, j] >> 1, q[:, j])
        s = (u0 * self.dim + v) * 2 + z
        s[is_core] = -1
        return is_core, s, np.where(is_core[:, None], q, idx)

    def tile_lower(self, coords, l: int, axis: int) -> np.ndarray:
        """Smallest ``axis`` coordinate of the (exclusive) tile holding each point."""
        if self.literal:
            raise UsageError("tile extents are defined for the exclusive assignment")
        coords = np.asarray(coords, dtype=np.int64).reshape(-1, self.dim)
        q, band = self._split(coords, l)
        edge = band < MIDDLE
        is_core = ~edge.any(axis=1)
        v = np.argmax(edge, axis=1)
        base = self.S * q[:, axis] + self.offset(l)
        strip = base + np.where(band[:, axis] == 1, self.S - self.k1, 0)
        middle = base + self.k1
        out = np.where(v == axis, strip, np.where(axis < v, middle, base))
        return np.where(is_core, middle, out)

    def locate(self, point, l: int):
        """Scalar exclusive lookup with Python ints: ('C', id) or ('D', s, id)."""
        point = [int(c) for c in point]
        if len(point) != self.dim:
            raise UsageError(f"expected {self.dim} coordinates")
        off = self.offset(l)
        qs, bands = [], []
        for c in point:
            q, r = divmod(c - off, self.S)
            qs.append(q)
            bands.append(0 if r < self.k1 else 1 if r >= self.S - self.k1 else MIDDLE)
        if all(b == MIDDLE for b in bands):
            return ("C", (l, *qs))
        v = next(j for j, b in enumerate(bands) if b != MIDDLE)
        u0, p = 0, 0
        idx = []
        for j, q in enumerate(qs):
            if j == v:
                idx.append(q)
                continue
            u0 |= (q & 1) << p
            p += 1
            idx.append(q >> 1)
        u, z = u0 + 1, bands[v]
        return ("D", shell_index(u, v + 1, z, self.dim), (l, u, v + 1, z, *idx))

    # families
    def _coords(self, window):
        c = getattr(window, "coords", None)
        if c is None or getattr(window.group, "n", None) != self.dim:
            raise UsageError(f"the Z^{self.dim} scheme needs a window in Z^{self.dim}")
        return c

    def _family(self, window, label, mask, rows, prefix, full):
        lab = np.full(window.size, -1, dtype=np.int32)
        sub, keys = _rows_to_labels(rows[mask])
        lab[mask] = sub
        counts = np.bincount(sub, minlength=len(keys))
        ids = [prefix + k for k in keys]
        return Family.from_labels(window, label, lab, ids, clipped=counts < full)

    def core_family(self, window, l: int) -> Family:
        coords = self._coords(window)
        q, band = self._split(coords, l)
        mask = (band == MIDDLE).all(axis=1)
        return self._family(window, ("C", l), mask, q, (l,), self.core_tile_size())

    def shell_family(self, window, l: int, u: int, v: int, z: int) -> Family:
        s = shell_index(u, v, z, self.dim)
        if not self.literal:
            is_core, ss, idx = self.classify(self._coords(window), l)
            return self._family(window, ("D", l, s), ss == s, idx, (l, u, v, z),
                                self.shell_tile_size(v))
        return self._literal_shell(window, l, u, v, z)

    def _literal_shell(self, window, l, u, v, z):
        coords = self._coords(window)
        q, band = self._split(coords, l)
        bits = psi(u, self.dim)
        mask = band[:, v - 1] == z
        idx = q.copy()
        p = 0
        for j in range(self.dim):
            if j == v - 1:
                continue
            mask &= (q[:, j] & 1) == bits[p]
            idx[:, j] = q[:, j] >> 1
            p += 1
        s = shell_index(u, v, z, self.dim)
        return self._family(window, ("D", l, s), mask, idx, (l, u, v, z), self.shell_tile_size(v))

    def families(self, lvec, window) -> LFamilies:
        (l,) = lvec
        C = self.core_family(window, l)
        if self.literal:
            D = [self._literal_shell(window, l, *shell_of_index(s, self.dim))
                 for s in range(self.F[0] + 1)]
        else:
            coords = self._coords(window)
            is_core, ss, idx = self.classify(coords, l)
            D = []
            for s in range(self.F[0] + 1):
                u, v, z = shell_of_index(s, self.dim)
                D.append(self._family(window, ("D", l, s), ss == s, idx, (l, u, v, z),
                                      self.shell_tile_size(v)))
        extra = [("C_2k1_disjoint", C, 2 * self.k1)]
        return LFamilies(C=[C], D={1: D}, extra=extra)


def zn_core_family(dim, k0, k1, h, l, window) -> Family:
    return ZnScheme(dim, k0, k1, h).core_family(window, l)


def zn_shell_family(dim, k0, k1, h, l, u, v, z, window, literal=False) -> Family:
    return ZnScheme(dim, k0, k1, h, literal).shell_family(window, l, u, v, z)
