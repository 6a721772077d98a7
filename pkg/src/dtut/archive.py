"""Family dumps on disk and a scheme that replays them.

A dump directory holds one JSONL file per translation vector plus
``manifest.json``.  The manifest records which family labels play which role
(C, D_i, extra), so families that happen to be empty on the window survive
the round trip.
"""
from __future__ import annotations

import io as _io
import json
from pathlib import Path

from .errors import ResourceError, UsageError
from .families import Family, _as_id, dump_jsonl, load_jsonl
from .io import atomic_write_text, dumps
from .schemes import LFamilies, Scheme, make_scheme
from .windows import make_window

FORMAT = "dtut-families"
VERSION = 1


def _lvec_key(v) -> str:
    return ",".join(str(int(c)) for c in v)


def write_archive(scheme, window, lvecs, outdir, cap_points: int | None = None, extra=None) -> dict:
    outdir = Path(outdir)
    lvecs = [tuple(v) for v in lvecs]
    if cap_points is not None and window.size * len(lvecs) > cap_points:
        raise ResourceError(f"dumping {len(lvecs)} vectors over {window.size} points exceeds the cap",
                            window.size * len(lvecs), cap_points)
    entries = {}
    for v in lvecs:
        lf = scheme.families(v, window)
        buf = _io.StringIO()
        dump_jsonl(lf.all(), buf)
        name = f"families_l{_lvec_key(v).replace(',', '_')}.jsonl"
        atomic_write_text(outdir / name, buf.getvalue())
        entries[_lvec_key(v)] = {
            "file": name,
            "C": [C.label for C in lf.C],
            "D": {str(i): [D.label for D in lf.D[i]] for i in sorted(lf.D)},
            "extra": [[n, f.label, r] for n, f, r in lf.extra],
            "diagnostics": lf.diagnostics,
        }
    manifest = {"format": FORMAT, "version": VERSION, "scheme": scheme.describe(),
                "window": window.describe(), "lvecs": [list(v) for v in lvecs], "entries": entries, **(extra or {})}
    atomic_write_text(outdir / "manifest.json", dumps(manifest))
    return manifest


def read_manifest(path) -> dict:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    man = json.loads(path.read_text())
    if man.get("format") != FORMAT or man.get("version") != VERSION:
        raise UsageError(f"{path} is not a version {VERSION} family dump")
    man["_dir"] = str(path.parent)
    return man


class ArchivedScheme(Scheme):
    """Families read back from a dump; everything else comes from the rebuilt scheme."""

    def __init__(self, manifest: dict, window=None, cap=None):
        self.manifest = manifest
        self.inner = make_scheme(manifest["scheme"])
        self.window = window if window is not None else make_window(manifest["window"], cap)
        if self.window.describe() != manifest["window"]:
            raise UsageError("window differs from the one the families were dumped on")
        self.name = self.inner.name
        self.m, self.n, self.F = self.inner.m, self.inner.n, self.inner.F
        self.scales, self.h_table = self.inner.scales, self.inner.h_table
        self._dir = Path(manifest.get("_dir", "."))

    @property
    def lvecs_available(self) -> list:
        return [tuple(v) for v in self.manifest["lvecs"]]

    def describe(self):
        return self.inner.describe()

    def declared_bound(self):
        return self.inner.declared_bound()

    def with_h_table(self, h_table):
        return self.inner.with_h_table(h_table)

    def invariant_checks(self, window):
        return self.inner.invariant_checks(window)

    def families(self, lvec, window) -> LFamilies:
        if window is not self.window and window.describe() != self.window.describe():
            raise UsageError("archived families only exist on their own window")
        entry = self.manifest["entries"].get(_lvec_key(lvec))
        if entry is None:
            raise UsageError(f"translation vector {tuple(lvec)} is not in the dump")
        with open(self._dir / entry["file"]) as fh:
            loaded = {f.label: f for f in load_jsonl(fh, window)}

        def get(label):
            key = _as_id(label)
            if key not in loaded:
                loaded[key] = Family.from_members(window, key, [], [])
            return loaded[key]

        C = [get(lab) for lab in entry["C"]]
        D = {int(i): [get(lab) for lab in labs] for i, labs in entry["D"].items()}
        extra = [(n, get(lab), int(r)) for n, lab, r in entry["extra"]]
        return LFamilies(C=C, D=D, extra=extra, diagnostics=list(entry["diagnostics"]))
