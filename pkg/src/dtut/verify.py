"""Window-scale certification of tiling-through-uniform-translation schemes.

Clause ids used in reports:

``a``  each C_j is k0-disjoint
``b``  each D_{i,s} is k_i-disjoint
``c``  all families cover the core window
``d``  along coordinate i, the unions of D_{i,s} for distinct t are disjoint
       (and non-empty on the window)
``e``  along coordinate i, the family of all D_{i,s} tiles is k_i-disjoint
``bounded``  every tile is within the scheme's declared diameter bound
``F_structural``  the shell counts F_i do not change with h
``extra``  additional disjointness the scheme asserts for its own families
``invariant``  scheme-specific invariants (e.g. lifts of base tilings)
"""
from __future__ import annotations

import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError
from .families import covers, min_separation, tile_diameters, union_families
from .io import dumps

SCHEMA_VERSION = 1
DEFAULT_LVEC_CAP = 64
PASS, FAIL, WINDOW = "pass", "fail", "pass_window_relative"


def _jsonable(v):
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, np.generic):
        return v.item()
    return v


@dataclass
class VerificationReport:
    instance: dict
    clauses: list = field(default_factory=list)
    diameters: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c["status"] != FAIL for c in self.clauses)

    def failures(self) -> list:
        return [c for c in self.clauses if c["status"] == FAIL]

    def add(self, cid, name, params, status, witness=None):
        self.clauses.append({"id": cid, "name": name, "params": _jsonable(params),
                             "status": status, "witness": _jsonable(witness)})

    def to_dict(self) -> dict:
        """Deterministic content only; wall-clock timings live in ``timings``."""
        return {"schema_version": SCHEMA_VERSION, "instance": _jsonable(self.instance),
                "clauses": self.clauses, "diameters": _jsonable(self.diameters),
                "diagnostics": _jsonable(self.diagnostics), "ok": self.ok}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def summary(self) -> str:
        counts = {}
        for c in self.clauses:
            counts[c["status"]] = counts.get(c["status"], 0) + 1
        parts = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
        return f"{'OK' if self.ok else 'FAILED'} ({len(self.clauses)} clauses: {parts})"


@dataclass
class DtutInstance:
    scheme: object
    window: object
    lvecs: list | None = None
    lvec_cap: int = DEFAULT_LVEC_CAP
    jobs: int = 1

    def describe(self) -> dict:
        s = self.scheme
        return {"scheme": s.describe(), "m": s.m, "n": s.n, "F": list(s.F),
                "scales": list(s.scales), "window": self.window.describe(),
                "declared_bound": s.declared_bound(),
                "lvecs": None if self.lvecs is None else [list(v) for v in self.lvecs]}


def default_lvec_sample(hs) -> list:
    """Axis-aligned vectors (one coordinate varies, the rest at 1) plus the all-max vector."""
    out = []
    for i, h in enumerate(hs):
        for t in range(1, h + 1):
            v = [1] * len(hs)
            v[i] = t
            out.append(tuple(v))
    out.append(tuple(hs))
    return sorted(set(out))


def _witness_pair(window, fam, p, q, d):
    lab = fam.labels
    return {"points": [window.encode(p), window.encode(q)], "distance": int(d),
            "tiles": [fam.ids[int(lab[p])], fam.ids[int(lab[q])]]}


def disjoint_clause(fam, r):
    """(status, witness) for r-disjointness; witnesses name both points and tiles."""
    w = fam.window
    ov = fam.overlap()
    if ov is not None:
        p, t1, t2 = ov
        return FAIL, {"points": [w.encode(p), w.encode(p)], "distance": 0,
                      "tiles": [fam.ids[t1], fam.ids[t2]]}
    found = w.min_cross_distance(fam.labels, below=r)
    if found is None:
        return PASS, None
    d, p, q = found
    return FAIL, _witness_pair(w, fam, p, q, d)


def _cover_clause(fams, window, limit=5):
    ok, missing = covers(fams, window, limit=limit)
    return (PASS, None) if ok else (FAIL, {"uncovered": [window.group.encode(g) for g in missing]})


def _diameter_stats(fam):
    if len(fam) == 0:
        return None
    diam, wa, wb = tile_diameters(fam)
    t = int(np.argmax(diam))
    full = ~fam.clipped
    return {"max": int(diam[t]), "argmax": (int(wa[t]), int(wb[t]), t),
            "max_complete": int(diam[full].max()) if full.any() else None,
            "tiles": len(fam), "complete": int(full.sum())}


class _Runner:
    def __init__(self, jobs):
        self.jobs = max(1, int(jobs))

    def map(self, fn, items):
        items = list(items)
        if self.jobs == 1 or len(items) < 2:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(self.jobs) as ex:
            return list(ex.map(fn, items))


def _lines(sample, hs):
    """Coordinate lines through the sampled vectors: (i, vector with coordinate i blanked)."""
    lines = set()
    for v in sample:
        for i in range(len(hs)):
            lines.add((i, v[:i] + (None,) + v[i + 1:]))
    return sorted(lines, key=lambda x: (x[0], [(-1 if c is None else c) for c in x[1]]))


def select_lvecs(scheme, lvecs=None, cap: int = DEFAULT_LVEC_CAP):
    """(sample, mode, lines, needed): the vectors checked and every vector their lines touch."""
    hs = scheme.h_values()
    total = int(np.prod(hs)) if hs else 1
    if lvecs is not None:
        sample = sorted({tuple(int(c) for c in v) for v in lvecs})
        for v in sample:
            if len(v) != scheme.m or any(not 1 <= c <= h for c, h in zip(v, hs)):
                raise UsageError(f"translation vector {v} outside the h ranges {hs}")
        mode = "explicit"
    elif total <= cap:
        sample = sorted(scheme.lvecs())
        mode = "exhaustive"
    else:
        raise UsageError(f"{total} translation vectors exceed the cap {cap}; "
                         "pass an explicit sample (default_lvec_sample gives one)")
    lines = _lines(sample, hs)
    needed = set(sample)
    for i, v in lines:
        for t in range(1, hs[i] + 1):
            needed.add(v[:i] + (t,) + v[i + 1:])
    return sample, mode, lines, sorted(needed)


def verify_dtut(inst: DtutInstance) -> VerificationReport:
    scheme, window = inst.scheme, inst.window
    hs = scheme.h_values()
    sample, mode, lines, needed = select_lvecs(scheme, inst.lvecs, inst.lvec_cap)

    desc = inst.describe()
    desc["lvec_mode"] = mode
    rep = VerificationReport(instance=desc)
    runner = _Runner(inst.jobs)
    ks = scheme.scales
    bound = scheme.declared_bound()
    t0 = time.perf_counter()

    d_cache = {}
    diam_max = {"C": 0, "D": {}}
    worst = None
    diag_seen = set()
    for v in needed:
        lf = scheme.families(v, window)
        for dg in lf.diagnostics:
            key = dumps(dg)
            if key not in diag_seen:
                diag_seen.add(key)
                rep.diagnostics.append(dg)
        tasks = []
        for j, C in enumerate(lf.C):
            tasks.append(("a", "C_k0_disjoint", {"lvec": v, "j": j, "r": ks[0], "family": C.label}, C, ks[0]))
        for i in sorted(lf.D):
            for s, D in enumerate(lf.D[i]):
                tasks.append(("b", "D_ki_disjoint", {"lvec": v, "i": i, "s": s, "r": ks[i], "family": D.label},
                              D, ks[i]))
        for name, fam, r in lf.extra:
            tasks.append(("extra", name, {"lvec": v, "r": r, "family": fam.label}, fam, r))
        results = runner.map(lambda t: disjoint_clause(t[3], t[4]), tasks)
        for (cid, name, params, _, _), (status, wit) in zip(tasks, results):
            rep.add(cid, name, params, status, wit)
        status, wit = _cover_clause(lf.all(), window)
        rep.add("c", "covers_core", {"lvec": v}, status, wit)

        fams = lf.all()
        stats = runner.map(_diameter_stats, fams)
        for fam, st in zip(fams, stats):
            if st is None:
                continue
            kind = "C" if any(fam is C for C in lf.C) else "D"
            if kind == "C":
                diam_max["C"] = max(diam_max["C"], st["max"])
            else:
                key = str(next(i for i in lf.D if any(fam is D for D in lf.D[i])))
                diam_max["D"][key] = max(diam_max["D"].get(key, 0), st["max"])
            if worst is None or st["max"] > worst[0]:
                a, b, t = st["argmax"]
                worst = (st["max"], fam, a, b, t)
        for i in lf.D:
            d_cache[(v, i)] = lf.D[i]
        del lf, fams

    if bound is not None and worst is not None:
        d, fam, a, b, t = worst
        ok = d <= bound
        rep.add("bounded", "uniformly_bounded", {"bound": bound, "measured": d},
                PASS if ok else FAIL,
                None if ok else {"points": [window.encode(a), window.encode(b)], "distance": d,
                                 "tiles": [fam.ids[t]]})
    rep.diameters = {"declared_bound": bound, "max_C": diam_max["C"], "max_D": diam_max["D"],
                     "max_overall": 0 if worst is None else worst[0]}

    for i, base in lines:
        level = i + 1
        vecs = [base[:i] + (t,) + base[i + 1:] for t in range(1, hs[i] + 1)]
        nfam = len(d_cache[(vecs[0], level)])
        for s in range(nfam):
            fams = [d_cache[(vv, level)][s] for vv in vecs]
            params = {"i": level, "s": s, "fixed": [c for c in base], "t_range": [1, hs[i]]}
            rep.add("d", "translates_disjoint", params, *_translate_clause(fams, window))
            union = union_families(fams, ("union", level, s, tuple(base)))
            status, wit = disjoint_clause(union, ks[level])
            rep.add("e", "union_ki_disjoint", dict(params, r=ks[level]), status, wit)

    rep.add("F_structural", "F_independent_of_h", {"F": list(scheme.F)}, *_structural_F(scheme))
    for chk in scheme.invariant_checks(window):
        rep.add("invariant", chk["id"], chk["params"], PASS if chk["ok"] else FAIL, chk["witness"])
    rep.timings = {"total_s": time.perf_counter() - t0, "lvecs": len(needed)}
    return rep


def _translate_clause(fams, window):
    supports = [f.support() for f in fams]
    for a, b in itertools.combinations(range(len(fams)), 2):
        both = supports[a] & supports[b]
        if both.any():
            p = int(np.argmax(both))
            fa, fb = fams[a], fams[b]
            return FAIL, {"point": window.encode(p), "translates": [a + 1, b + 1],
                          "tiles": [fa.ids[int(fa.labels[p])], fb.ids[int(fb.labels[p])]]}
    empty = [t + 1 for t, sup in enumerate(supports) if not sup.any()]
    if empty:
        return WINDOW, {"empty_on_window": empty}
    return PASS, None


def _structural_F(scheme):
    try:
        doubled = scheme.with_h_table({k: 2 * v for k, v in scheme.h_table.items()})
    except NotImplementedError:
        return WINDOW, {"note": "scheme cannot be rebuilt with another h"}
    ok = len(scheme.F) == scheme.m and tuple(doubled.F) == tuple(scheme.F)
    return (PASS, None) if ok else (FAIL, {"F": list(scheme.F), "F_with_doubled_h": list(doubled.F)})


def verify_lemma31(first, levels, ks, window, jobs: int = 1) -> VerificationReport:
    """First block k0-disjoint, level i families k_i-disjoint, union covers the core.

    ``first`` is the list U_0..U_n, ``levels`` maps i >= 1 to the list U_{i,0}..U_{i,E_i}.
    """
    ks = [int(k) for k in ks]
    if any(i < 1 or i >= len(ks) for i in levels):
        raise UsageError("level indices must lie in 1..m with a scale for each")
    rep = VerificationReport(instance={
        "kind": "lemma31", "scales": ks, "window": window.describe(),
        "families": {"first": len(first), "levels": {str(i): len(v) for i, v in sorted(levels.items())}}})
    t0 = time.perf_counter()
    runner = _Runner(jobs)
    tasks = [("a", "U_k0_disjoint", {"j": j, "r": ks[0], "family": f.label}, f, ks[0])
             for j, f in enumerate(first)]
    for i in sorted(levels):
        tasks += [("b", "U_ki_disjoint", {"i": i, "p": p, "r": ks[i], "family": f.label}, f, ks[i])
                  for p, f in enumerate(levels[i])]
    results = runner.map(lambda t: disjoint_clause(t[3], t[4]), tasks)
    for (cid, name, params, _, _), (status, wit) in zip(tasks, results):
        rep.add(cid, name, params, status, wit)
    allf = list(first) + [f for i in sorted(levels) for f in levels[i]]
    rep.add("c", "covers_core", {}, *_cover_clause(allf, window))
    best = 0
    for f in allf:
        st = _diameter_stats(f)
        if st:
            best = max(best, st["max"])
    rep.diameters = {"max_overall": best}
    rep.timings = {"total_s": time.perf_counter() - t0}
    return rep


def exact_separation(fam):
    """Smallest distance between distinct tiles (None with fewer than two tiles)."""
    found = min_separation(fam)
    return None if found is None else int(found[0])
