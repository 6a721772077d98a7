"""Block decompositions of the lamplighter group Z wr Z and the saturated-union cascade.

Elements are ``(lamps, pos)`` (see ``groups.LamplighterGroup``).  The acting
group H = Z is cut into alternating length-k blocks; for a block X of cursor
positions the lamps are split into three zones around it:

* ``T(k0)``: positions within ``k0 + P(k0)`` of the block, where lamp values
  are sorted into the C/D tiles of a Z tiling scheme at scale ``Q(k0) < Q(k1)``;
* ``T(k1) \\ T(k0)``: lamp values sorted into length-``Q(k1)`` blocks, the
  sign pattern of which selects the translation index l1;
* everything farther out, which must agree exactly within a tile.

``U0`` collects elements whose ``T(k0)`` lamps all sit in core tiles; the
``U1[j1, s, t1]`` families key on a shell tile at one position ``s``.

The cascade glues the pieces of a top block (its intersections with the
finer blocks) by repeated saturated unions at escalating scales.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceError, StageError, UsageError
from .families import Family, saturated_union, tile_diameters, union_families
from .groups import LamplighterGroup
from .schemes.zn import ZnScheme
from .verify import FAIL, PASS, VerificationReport, disjoint_clause, verify_lemma31
from .windows import PointWindow

# Q(k) grows like k^k; beyond this many bits the cascade refuses to continue
Q_BITS_CAP = 1 << 23
ORBITS = 1


def control_P(R: int) -> int:
    """Control function of the (trivial) transversal; any monotone choice works."""
    return int(R)


def ball_h(r: int) -> int:
    """|B_Z(0, r)|."""
    return 2 * int(r) + 1


def D_H(k: int) -> int:
    """Diameter bound of the length-k blocks (they have diameter k - 1)."""
    return int(k)


def magnitude(v):
    """JSON-safe view of a possibly enormous integer."""
    v = int(v)
    return v if v.bit_length() <= 62 else {"bit_length": v.bit_length()}


def q_bits_estimate(k: int) -> int:
    P = control_P(D_H(k))
    return int(k * max(P, 2).bit_length()) + 64


def Q_literal(k: int) -> int:
    """k + sum_{i<=k} P(i) + sum_{j<=P(D(k))} 2|B_H(j)| P(D(k))^k |orb|."""
    k = int(k)
    if q_bits_estimate(k) > Q_BITS_CAP:
        raise ResourceError(f"Q({k}) needs about {q_bits_estimate(k)} bits", estimate=q_bits_estimate(k),
                            cap=Q_BITS_CAP)
    PD = control_P(D_H(k))
    head = k + sum(control_P(i) for i in range(1, k + 1))
    return head + sum(2 * ball_h(j) for j in range(1, PD + 1)) * PD ** k * ORBITS


@dataclass(frozen=True)
class HBlockCover:
    """Blocks [2kq + pk, 2kq + pk + k) of Z for p in {0, 1}."""

    k: int

    def block(self, p: int, q: int) -> range:
        lo = 2 * self.k * q + p * self.k
        return range(lo, lo + self.k)

    def locate(self, x: int) -> tuple:
        q, r = divmod(int(x), 2 * self.k)
        return (r // self.k, q)

    def blocks_meeting(self, lo: int, hi: int) -> list:
        out = []
        for x in range(int(lo), int(hi) + 1):
            b = self.locate(x)
            if not out or out[-1] != b:
                out.append(b)
        return out


def _g_block(value: int, u: int) -> tuple:
    """(v, q) with value in [2uq + vu, 2uq + vu + u): the asdim-1 cover of Z at scale u."""
    q, r = divmod(int(value), 2 * u)
    return (r // u, q)


class WreathScales:
    """Derived quantities for one block of cursor positions and scales k0 < k1."""

    def __init__(self, k0: int, k1: int, block):
        k0, k1 = int(k0), int(k1)
        if not 0 < k0 < k1:
            raise UsageError(f"need 0 < k0 < k1, got {k0}, {k1}")
        block = sorted({int(x) for x in block})
        if not block or block[-1] - block[0] + 1 != len(block):
            raise UsageError("the block must be a non-empty interval of positions")
        if control_P(k0) <= ORBITS:
            raise UsageError("the control function must exceed the orbit count at k0")
        self.k0, self.k1 = k0, k1
        self.block = (block[0], block[-1])
        self.e0 = k0 + control_P(k0)
        self.e1 = k1 + control_P(k1)
        self.Q0 = Q_literal(k0)
        self.Q1 = Q_literal(k1)
        nb = len(block)
        self.T0_size = nb + 2 * self.e0
        self.T1_size = nb + 2 * self.e1
        self.T10_size = self.T1_size - self.T0_size
        self.h = 1 << self.T1_size
        self.l_range = 1 << self.T10_size
        self.G = ZnScheme(1, self.Q0, self.Q1, self.h)
        self.F1 = self.G.F[0]

    # zones
    def dist(self, i: int) -> int:
        a, b = self.block
        return max(a - i, i - b, 0)

    def in_T0(self, i) -> bool:
        return self.dist(i) <= self.e0

    def in_T1(self, i) -> bool:
        return self.dist(i) <= self.e1

    def T0(self) -> list:
        a, b = self.block
        return list(range(a - self.e0, b + self.e0 + 1))

    def rank0(self, i: int) -> int:
        """Position of i in T(k0) ordered by distance from the block (block first)."""
        a, b = self.block
        d = self.dist(i)
        if d == 0:
            return i - a
        return (b - a + 1) + 2 * (d - 1) + (i > b)

    def rank10(self, i: int) -> int:
        d = self.dist(i)
        return 2 * (d - self.e0 - 1) + (i > self.block[1])

    # bounds
    def R_G(self) -> int:
        return self.G.declared_bound()

    def B_literal(self) -> int:
        k, P = self.k1, control_P(self.k1)
        M = D_H(k)  # conjugation is trivial in an abelian H, so M_H(k) = D(k)
        first = ORBITS * (self.R_G() + self.Q1) * ball_h(k + P) * ball_h(D_H(k))
        second = 2 * ORBITS * (k + P + M) ** 2 * ball_h(k + P + M)
        return first + second + self.Q1

    def B_tight(self) -> int:
        """Bound for U1 tiles: every coordinate moves inside a length-Q(k1) block."""
        return self.T1_size * (self.Q1 - 1) + 3 * (self.T1_size - 1)

    def J1(self) -> int:
        return (self.F1 + 1) * self.T0_size * (1 << self.T0_size)

    def complete_tile_radius(self) -> int:
        """Lower bound on the radius of a ball holding one complete U1 tile."""
        return self.T1_size * (self.Q1 // 2)

    def describe(self) -> dict:
        return {"k0": self.k0, "k1": self.k1, "block": list(self.block), "P": "identity",
                "Q_k0": magnitude(self.Q0), "Q_k1": magnitude(self.Q1),
                "T_k0": self.T0_size, "T_k1": self.T1_size, "T_k1_k0": self.T10_size,
                "h": magnitude(self.h), "l1_range": magnitude(self.l_range), "F1": self.F1,
                "B_literal": magnitude(self.B_literal()), "B_tight": magnitude(self.B_tight()),
                "J1": self.J1()}


@dataclass
class Lemma33Families:
    scales: WreathScales
    window: PointWindow
    in_block: np.ndarray
    U0: Family
    U1: dict                      # (j1, s, t1) -> Family, only those meeting the window
    diagnostics: list = field(default_factory=list)

    def all(self) -> list:
        return [self.U0] + [self.U1[k] for k in sorted(self.U1)]

    def flat_index(self, key, T: int | None = None) -> int:
        """1-based index of (j1, s, t1) among the J1 families, s by its rank in T(k0)."""
        j1, s, t1 = key
        T = self.scales.T0_size if T is None else T
        return 1 + (j1 * T + self.scales.rank0(s)) * (1 << T) + (t1 - 1)


def _check_window(window):
    if not isinstance(window, PointWindow) or not isinstance(window.group, LamplighterGroup):
        raise UsageError("the wreath construction needs a window of lamplighter elements")


def _window_radius(window) -> int:
    r = getattr(window, "radius", None)
    if r is not None:
        return int(r)
    g = window.group
    return max((g._len(x) for x in window.points), default=0)


def build_lemma33_families(scales: WreathScales, window) -> Lemma33Families:
    """U0 and U1[j1, s, t1] restricted to the elements of ``window`` whose cursor lies in the block."""
    _check_window(window)
    sc = scales
    a, b = sc.block
    G, Q1 = sc.G, sc.Q1
    u0_tiles: dict = {}
    u1: dict = {}
    in_block = np.zeros(window.size, dtype=bool)
    T0 = sc.T0()
    for idx, (lamps, pos) in enumerate(window.points):
        if not a <= pos <= b:
            continue
        in_block[idx] = True
        f = dict(lamps)
        far = tuple((i, v) for i, v in lamps if not sc.in_T1(i))
        mid = [(i, v) for i, v in lamps if sc.in_T1(i) and not sc.in_T0(i)]
        l1 = 1
        w_key = []
        for i, v in mid:
            vb = _g_block(v, Q1)
            l1 += vb[0] << sc.rank10(i)
            if vb != (0, 0):
                w_key.append((i,) + vb)
        w_key = tuple(w_key)
        locs = {i: G.locate((f.get(i, 0),), l1) for i in T0}
        shells = [i for i in T0 if locs[i][0] == "D"]
        if not shells:
            zero = G.locate((0,), l1)[1]
            c_key = tuple((i, locs[i][1][1]) for i in T0 if locs[i][1] != zero)
            u0_tiles.setdefault((l1, c_key, w_key, far), []).append(idx)
            continue
        vblocks = {i: _g_block(f.get(i, 0), Q1) for i in T0}
        for s in shells:
            t1 = 1
            v_key = []
            for i in T0:
                if i == s:
                    continue
                vb = vblocks[i]
                t1 += vb[0] << sc.rank0(i)
                if vb != (0, 0):
                    v_key.append((i,) + vb)
            _, j1, did = locs[s]
            tiles = u1.setdefault((j1, s, t1), {})
            tiles.setdefault((l1, did[-1], tuple(v_key), w_key, far), []).append(idx)

    radius = _window_radius(window)
    need = sc.complete_tile_radius()
    clipped_all = radius < need
    diags = []
    if clipped_all:
        diags.append({"kind": "window", "message": "no complete tile fits; every tile is clipped",
                      "radius": radius, "min_radius_lower_bound": magnitude(need)})

    def make(label, tiles):
        keys = sorted(tiles)
        members = [tiles[k] for k in keys]
        clip = np.full(len(keys), clipped_all)
        return Family.from_members(window, label, members, keys, clipped=clip)

    blk = list(sc.block)
    U0 = make(("U0", *blk), u0_tiles)
    U1 = {key: make(("U1", key, *blk), tiles) for key, tiles in u1.items()}
    return Lemma33Families(sc, window, in_block, U0, U1, diags)


def support_soundness(window, ks) -> list:
    """Elements of length <= k have lamps within k + P(k) of the origin."""
    g = window.group
    out = []
    for k in ks:
        e = k + control_P(k)
        bad = None
        for x in window.points:
            if g._len(x) <= k and any(abs(i) > e for i, _ in x[0]):
                bad = x
                break
        out.append({"id": "support_soundness", "params": {"k": int(k), "radius": e},
                    "ok": bad is None, "witness": None if bad is None else g.encode(bad)})
    return out


def transversal_identity(window) -> dict:
    """eta(h) = (no lamps, h); eta(h1) eta(h2) eta(h1 h2)^-1 is the identity for classical products."""
    g = window.group
    ps = sorted({x[1] for x in window.points})
    for h1 in ps:
        for h2 in ps:
            c = g._mul(g._mul(((), h1), ((), h2)), g._inv(((), h1 + h2)))
            if c != g.identity:
                return {"id": "transversal_identity", "params": {"positions": len(ps)}, "ok": False,
                        "witness": [h1, h2]}
    return {"id": "transversal_identity", "params": {"positions": len(ps)}, "ok": True, "witness": None}


def _bounded(fam, bound):
    if len(fam) == 0:
        return PASS, None, 0
    diam, wa, wb = tile_diameters(fam)
    t = int(np.argmax(diam))
    d = int(diam[t])
    if d <= bound:
        return PASS, None, d
    w = fam.window
    return FAIL, {"points": [w.encode(wa[t]), w.encode(wb[t])], "distance": d, "tiles": [fam.ids[t]] * 2}, d


def check_lemma33(lf: Lemma33Families) -> VerificationReport:
    """Disjointness, coverage of the block and boundedness of one block's families."""
    sc, w = lf.scales, lf.window
    t0 = time.perf_counter()
    rep = VerificationReport(instance={"kind": "lemma33", "scales": sc.describe(), "window": w.describe(),
                                       "families_on_window": 1 + len(lf.U1)})
    rep.diagnostics.extend(lf.diagnostics)
    rep.add("a", "U0_k0_disjoint", {"r": sc.k0, "tiles": len(lf.U0)}, *disjoint_clause(lf.U0, sc.k0))
    for key in sorted(lf.U1):
        fam = lf.U1[key]
        rep.add("b", "U1_k1_disjoint", {"family": list(key), "r": sc.k1, "tiles": len(fam)},
                *disjoint_clause(fam, sc.k1))
    covered = np.zeros(w.size, dtype=bool)
    for f in lf.all():
        covered |= f.support()
    missing = np.flatnonzero(lf.in_block & w.core_mask & ~covered)
    rep.add("c", "covers_block_core", {"points": int((lf.in_block & w.core_mask).sum())},
            PASS if missing.size == 0 else FAIL,
            None if missing.size == 0 else {"uncovered": [w.encode(i) for i in missing[:5]]})
    lit, tight = sc.B_literal(), sc.B_tight()
    worst = 0
    for f in lf.all():
        st, wit, d = _bounded(f, lit)
        worst = max(worst, d)
        if st == FAIL:
            rep.add("bounded", "B_literal", {"family": f.label, "bound": magnitude(lit)}, st, wit)
    rep.add("bounded", "B_literal", {"bound": magnitude(lit), "measured": worst}, PASS if worst <= lit else FAIL)
    worst1 = 0
    for key in sorted(lf.U1):
        st, wit, d = _bounded(lf.U1[key], tight)
        worst1 = max(worst1, d)
        if st == FAIL:
            rep.add("bounded", "B_tight_U1", {"family": list(key), "bound": magnitude(tight)}, st, wit)
    rep.add("bounded", "B_tight_U1", {"bound": magnitude(tight), "measured": worst1},
            PASS if worst1 <= tight else FAIL)
    for inv in support_soundness(w, [sc.k0, sc.k1]) + [transversal_identity(w)]:
        rep.add("invariant", inv["id"], inv["params"], PASS if inv["ok"] else FAIL, inv["witness"])
    rep.diameters = {"max_overall": worst, "max_U1": worst1}
    rep.timings = {"total_s": time.perf_counter() - t0}
    return rep


def lemma33_on_window(k0: int, k1: int, window) -> list:
    """Families and reports for every k0-block of cursor positions met by the window."""
    _check_window(window)
    ps = [x[1] for x in window.points]
    out = []
    for p, q in HBlockCover(k0).blocks_meeting(min(ps), max(ps)):
        lf = build_lemma33_families(WreathScales(k0, k1, HBlockCover(k0).block(p, q)), window)
        out.append((p, q, lf, check_lemma33(lf)))
    return out


# cascade

@dataclass
class CascadeResult:
    k0: int
    k1: int
    window: PointWindow
    first: list                   # U_0, U_1 (k0-disjoint)
    level1: dict                  # (j, v) -> Family, only those meeting the window
    J1: int
    stages: list
    diagnostics: list = field(default_factory=list)

    @property
    def counts(self) -> dict:
        return {"k0_families": len(self.first), "k1_families": 2 * self.J1, "J1": self.J1,
                "k1_families_on_window": len(self.level1)}

    def verify(self, jobs: int = 1) -> VerificationReport:
        levels = {1: [self.level1[k] for k in sorted(self.level1)]}
        rep = verify_lemma31(self.first, levels, [self.k0, self.k1], self.window, jobs=jobs)
        rep.instance["cascade"] = {"counts": self.counts, "stages": self.stages}
        rep.diagnostics.extend(self.diagnostics)
        return rep


def _pieces(k0, k1, top_block):
    base = HBlockCover(k0)
    out = []
    for x in top_block:
        b = base.locate(x)
        if not out or out[-1][0] != b:
            out.append((b, []))
        out[-1][1].append(x)
    return [xs for _, xs in out]


def _precondition(fam, r, stage, what):
    st, wit = disjoint_clause(fam, r)
    if st == FAIL:
        raise StageError(f"stage {stage}: {what} is not {r}-disjoint", stage=stage, witness=wit)


def cascade_theorem34(k0: int, k1: int, window) -> CascadeResult:
    """Glue the block decompositions of each top block by saturated unions at escalating scales.

    The top scale of stage i > 1 is 5 B_{i-1}, with B the construction's own
    bound for the families being absorbed (see ``WreathScales.B_tight``).
    """
    _check_window(window)
    ps = [x[1] for x in window.points]
    top = HBlockCover(k1)
    Tmax = k0 + 2 * (k0 + control_P(k0))
    J1 = None
    finals = {}          # (p, q) -> {flat j: Family}
    zeros = {0: [], 1: []}
    stages = []
    for p, q in top.blocks_meeting(min(ps), max(ps)):
        pieces = _pieces(k0, k1, top.block(p, q))
        if len(pieces) > ball_h(D_H(k1)):
            raise StageError(f"top block meets {len(pieces)} pieces, above |B_H(D(k1))|")
        V = None
        B_prev = None
        K = k1
        for i, piece in enumerate(pieces, start=1):
            if i > 1:
                K = 5 * B_prev
            try:
                sc = WreathScales(k0, K, piece)
            except ResourceError as exc:
                raise ResourceError(f"stage {i} of top block {(p, q)}: {exc}", exc.estimate, exc.cap) from exc
            J1 = J1 or (sc.F1 + 1) * Tmax * (1 << Tmax)
            lf = build_lemma33_families(sc, window)
            zeros[p].append(lf.U0)
            U = {lf.flat_index(key, Tmax): fam for key, fam in lf.U1.items() if len(fam)}
            info = {"top_block": [p, q], "stage": i, "piece": list(piece), "scale": magnitude(K),
                    "Q_top": magnitude(sc.Q1), "B_tight": magnitude(sc.B_tight()), "families": len(U)}
            if V is None:
                for j, fam in U.items():
                    _precondition(fam, k1, i, f"U1 family {j}")
                V, B_prev = U, sc.B_tight()
            else:
                nxt = {}
                for j in sorted(set(U) | set(V)):
                    outer, inner = U.get(j), V.get(j)
                    if outer is not None:
                        _precondition(outer, K, i, f"U1 family {j}")
                    if outer is None or inner is None:
                        nxt[j] = outer if inner is None else inner
                        continue
                    _precondition(inner, k1, i, f"carried family {j}")
                    st, wit, d = _bounded(inner, B_prev)
                    if st == FAIL:
                        raise StageError(f"stage {i}: carried family {j} exceeds its bound", stage=i, witness=wit)
                    merged = saturated_union(outer, inner, k1)
                    if merged.meta.get("hypothesis_warnings"):
                        raise StageError(f"stage {i}: saturated union hypotheses violated for family {j}",
                                         stage=i, witness=merged.meta["hypothesis_warnings"][0])
                    if not np.array_equal(merged.support(), outer.support() | inner.support()):
                        raise StageError(f"stage {i}: saturated union lost coverage for family {j}", stage=i)
                    nxt[j] = merged
                V = nxt
                B_prev = sc.B_tight() + 2 * B_prev + 2 * k1
            info["B_after"] = magnitude(B_prev)
            stages.append(info)
        finals[(p, q)] = V or {}

    first = []
    for t in (0, 1):
        fams = zeros[t]
        first.append(union_families(fams, ("U", t)) if fams else
                     Family.from_members(window, ("U", t), [], []))
    level1 = {}
    for v in (0, 1):
        by_j = {}
        for (p, q), fams in sorted(finals.items()):
            if p != v:
                continue
            for j, fam in fams.items():
                by_j.setdefault(j, []).append(fam)
        for j, fams in by_j.items():
            level1[(j, v)] = union_families(fams, ("U1", j, v))
    diags = [{"kind": "counts", "J1_formula": "(F1+1)*|T(k0)|*2^|T(k0)|", "J1": J1}]
    return CascadeResult(k0, k1, window, first, level1, J1 or 0, stages, diags)


def item1_gap_example(k0: int = 2, k1: int = 3):
    """Two elements one step apart that land in different pieces' U0 families of the same top block.

    Shows that uniting U0 over the pieces of a top block need not stay
    k0-disjoint.  Returns (window, U_t family, x, y).
    """
    g = LamplighterGroup()
    top = HBlockCover(k1).block(0, 0)
    pieces = _pieces(k0, k1, top)
    if len(pieces) < 2:
        raise UsageError("the top block has a single piece")
    a, b = pieces[0][-1], pieces[1][0]
    sa = WreathScales(k0, k1, pieces[0])
    sb = WreathScales(k0, k1, pieces[1])
    # a negative lamp in T(k1)\T(k0) of both pieces forces l1 >= 2, so zero lamps are core
    left = next(i for i in range(sa.block[0] - sa.e1, sa.block[0]) if not sa.in_T0(i))
    right = next(i for i in range(sb.block[1] + sb.e1, sb.block[1], -1) if not sb.in_T0(i))
    right = min(right, sa.block[1] + sa.e1)
    if not (sb.in_T1(right) and not sb.in_T0(right) and sa.in_T1(right) and not sa.in_T0(right)):
        raise UsageError("no shared outer position for these scales")
    lamps = {left: -1, right: -1}
    x = g.element(lamps, a)
    y = g.element(lamps, b)
    window = PointWindow(g, [x, y])
    fams = [build_lemma33_families(WreathScales(k0, k1, pc), window).U0 for pc in pieces]
    return window, union_families(fams, ("U", 0)), x, y
