"""Central-lift tiling of H3(Z) built from a Z^2 base tiling and a Z tiling of the center.

A base tile C of the plane gets an anchor ``y_C`` (the lower y-extent of the
tile) and lifts by ``(x, y) -> a^x b^y c^(-x*y_C)``.  Multiplying by central
tiles ``c^F`` gives the H3 tiles: ``(x, y, z)`` lies in ``lift(C) * c^F``
exactly when ``(x, y)`` is in C and ``z + x*y_C`` is in F.  The central scale
is ``10 M^2`` with M the measured diameter bound of the base families.
"""
from __future__ import annotations

import numpy as np

from ..errors import UsageError
from ..families import Family
from ..groups import HeisenbergGroup, commutator_length_bound
from ..windows import BoxWindow
from .base import LFamilies, Scheme, check_scales
from .zn import ZnScheme, _rows_to_labels


def heisenberg_lift(points, anchor: int) -> list:
    return [(int(x), int(y), -int(x) * int(anchor)) for x, y in points]


def measure_base_bound(base: ZnScheme) -> int:
    """Largest diameter of a complete base tile, over every translation index."""
    S, span = base.S, 2 * base.k1 * (base.h - 1)
    box = BoxWindow(base.dim, -2 * S, 2 * S + span)
    best = 0
    for l in range(1, base.h + 1):
        for f in base.families((l,), box).all():
            diam, _, _ = f.window.tile_diameters(f.labels, len(f))
            full = ~f.clipped
            if full.any():
                best = max(best, int(diam[full].max()))
    return best


class HeisenbergScheme(Scheme):
    name = "h3"
    m = 2
    n = 0
    F = (1, 23)

    def __init__(self, k0: int, k1: int, k2: int, h_table, M: int | None = None):
        self.scales, self.h_table = check_scales([k0, k1, k2], h_table, 2)
        self.k0, self.k1, self.k2 = self.scales
        self.base = ZnScheme(2, self.k1, self.k2, self.h_table[self.k2])
        self.M_closed_form = self.base.declared_bound()
        self.M = int(M) if M is not None else measure_base_bound(self.base)
        self.M_source = "given" if M is not None else "measured"
        K = 10 * self.M ** 2
        self.center = ZnScheme(1, K, K + 1, self.h_table[self.k1])
        zc = self.center
        self.center_diam = max(zc.S - 2 * zc.k1, zc.k1) - 1
        self.N = commutator_length_bound(self.center_diam)

    def describe(self):
        return {"scheme": "h3", "k0": self.k0, "k1": self.k1, "k2": self.k2,
                "h_table": {str(k): v for k, v in sorted(self.h_table.items())},
                "M": self.M, "M_source": self.M_source, "M_closed_form": self.M_closed_form,
                "center_scale": self.center.k0, "N_upper": self.N}

    def with_h_table(self, h_table):
        return HeisenbergScheme(self.k0, self.k1, self.k2, h_table)

    def declared_bound(self) -> int:
        return self.M ** 2 + 2 * self.M + self.N

    def _coords(self, window):
        if not isinstance(window.group, HeisenbergGroup) or getattr(window, "coords", None) is None:
            raise UsageError("the Heisenberg scheme needs an H3 window")
        return window.coords

    def anchors(self, xy, l2):
        return self.base.tile_lower(xy, l2, 1)

    def decompose(self, coords, l1, l2):
        """Per point: base kind (-1 core, else shell index), base rows, center kind, center rows."""
        xy = coords[:, :2]
        is_core, s, idx = self.base.classify(xy, l2)
        zp = coords[:, 2] + coords[:, 0] * self.anchors(xy, l2)
        zcore, zs, zidx = self.center.classify(zp[:, None], l1)
        return np.where(is_core, -1, s), idx, np.where(zcore, -1, zs), zidx

    def _family(self, window, label, mask, rows, l1, l2, full):
        lab = np.full(window.size, -1, dtype=np.int32)
        sub, keys = _rows_to_labels(rows[mask])
        lab[mask] = sub
        ids = [((l2,) + k[:3], (l1,) + k[3:]) for k in keys]
        counts = np.bincount(sub, minlength=len(keys))
        return Family.from_labels(window, label, lab, ids, clipped=counts < full)

    def families(self, lvec, window) -> LFamilies:
        l1, l2 = lvec
        coords = self._coords(window)
        bk, bidx, zk, zidx = self.decompose(coords, l1, l2)
        rows = np.column_stack([bk, bidx, zk, zidx])
        b, c = self.base, self.center
        zlen = {-1: c.S - 2 * c.k1, 0: c.k1, 1: c.k1}
        blen = lambda s: b.core_tile_size() if s < 0 else b.shell_tile_size((s // 2) % 2 + 1)

        def fam(label, bsel, zsel):
            mask = (bk == bsel) & (zk == zsel)
            return self._family(window, label, mask, rows, l1, l2, blen(bsel) * zlen[zsel])

        C0 = fam(("C0", l1, l2), -1, -1)
        D1 = [fam(("D1", i, l1, l2), -1, i) for i in (0, 1)]
        D2 = [fam(("D2", j, l1, l2), j, -1) for j in range(8)]
        D2 += [fam(("D2", (u, v), l1, l2), v, u) for u in (0, 1) for v in range(8)]
        diags = []
        if all(f.clipped.all() for f in [C0] + D1 + D2 if len(f)):
            diags.append({"kind": "window", "message":
                          "no complete product tile fits in the window; clauses are window-relative",
                          "center_tile_length": int(c.k1),
                          "center_tile_diameter_upper": int(self.N)})
        return LFamilies(C=[C0], D={1: D1, 2: D2}, diagnostics=diags)

    # invariants of the two embeddings
    def invariant_checks(self, window) -> list:
        coords = self._coords(window)
        group = window.group
        R = int(np.abs(coords[:, :2]).max())
        pts = np.array([(x, y) for x in range(-R, R + 1) for y in range(-R, R + 1)
                        if abs(x) + abs(y) <= R], dtype=np.int64)
        out = []
        for l2 in range(1, self.base.h + 1):
            is_core, s, idx = self.base.classify(pts, l2)
            yC = self.anchors(pts, l2)
            out.append(self._anchor_check(pts, yC, l2))
            lifted = np.column_stack([pts, -pts[:, 0] * yC])
            inside = window.indices_of_coords(lifted) >= 0
            kinds = [("C", -1, self.k1)] + [("D", j, self.k2) for j in range(8)]
            for name, kind, r in kinds:
                mask = inside & ((s == kind) if kind >= 0 else is_core)
                out.append(self._lift_check(window, lifted[mask], idx[mask], f"{name}{'' if kind < 0 else kind}",
                                            l2, r, group))
        out.extend(self._center_checks(window, coords))
        return out

    def _center_checks(self, window, coords):
        """Central tiles c^F met by the window stay 3M apart."""
        on_axis = (coords[:, 0] == 0) & (coords[:, 1] == 0)
        out = []
        for l1 in range(1, self.center.h + 1):
            zcore, zs, zidx = self.center.classify(coords[:, 2:3], l1)
            for kind in (-1, 0, 1):
                sel = on_axis & (zcore if kind < 0 else (zs == kind))
                lab = np.full(window.size, -1, dtype=np.int32)
                sub, _ = _rows_to_labels(zidx[sel])
                lab[sel] = sub
                r = 3 * self.M
                found = window.min_cross_distance(lab, below=r)
                params = {"center_family": "C" if kind < 0 else f"D{kind}", "l1": l1, "r": r,
                          "tiles_in_window": int(sub.max() + 1) if sub.size else 0}
                out.append({"id": "center_disjointness", "params": params, "ok": found is None,
                            "witness": None if found is None else
                            {"pair": [window.encode(found[1]), window.encode(found[2])], "d": int(found[0])}})
        return out

    def _anchor_check(self, pts, yC, l2):
        dev = np.abs(pts[:, 1] - yC)
        k = int(np.argmax(dev))
        ok = int(dev[k]) <= self.M
        return {"id": "anchor_within_bound", "params": {"l2": l2, "M": self.M}, "ok": ok,
                "witness": None if ok else {"point": [int(v) for v in pts[k]], "anchor": int(yC[k])}}

    def _lift_check(self, window, lifted, rows, name, l2, r, group):
        params = {"base_family": name, "l2": l2, "r": r}
        res = {"id": "lift_disjointness", "params": params, "ok": True, "witness": None}
        if len(lifted) < 2:
            return res
        lab, _ = _rows_to_labels(rows)
        d3 = group.pairwise([tuple(p) for p in lifted], [tuple(p) for p in lifted])
        d2 = np.abs(lifted[:, None, :2] - lifted[None, :, :2]).sum(-1)
        cross = lab[:, None] != lab[None, :]
        if not cross.any():
            return res
        bad = cross & ((d3 < d2) | (d3 < r))
        params["min_lifted"] = int(d3[cross].min())
        params["min_base"] = int(d2[cross].min())
        if bad.any():
            i, j = np.argwhere(bad)[0]
            res["ok"] = False
            res["witness"] = {"pair": [group.encode(tuple(int(v) for v in lifted[i])),
                                       group.encode(tuple(int(v) for v in lifted[j]))],
                              "d_h3": int(d3[i, j]), "d_base": int(d2[i, j])}
        return res


def heisenberg_dtut_families(scheme: HeisenbergScheme, lvec, window) -> tuple[dict, list]:
    """Families keyed "C0", ("D1", i), ("D2", j) and ("D2", (u, v)); second value is the diagnostics."""
    lf = scheme.families(tuple(lvec), window)
    out = {"C0": lf.C[0]}
    for f in lf.D[1] + lf.D[2]:
        out[f.label[:2]] = f
    return out, lf.diagnostics
