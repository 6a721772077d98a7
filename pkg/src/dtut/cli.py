"""Command-line entry point: ``dtut {tile,verify,metric,wreath,run} --descriptor FILE``.

Every run is fixed by its descriptor plus flags.  Reports and dumps are
written atomically under ``--out``; errors print one JSON object on stdout
and exit non-zero.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import archive
from .errors import GroupMismatchError, OutOfRangeError, ResourceError, StageError, UsageError
from .faults import MUTATIONS, mutate
from .groups import DEFAULT_BALL_CAP, make_group
from .io import atomic_write_text, dumps
from .render import render_svg
from .schemes import ZnScheme, make_scheme
from .verify import DEFAULT_LVEC_CAP, DtutInstance, default_lvec_sample, select_lvecs, verify_dtut
from .windows import make_window

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE, EXIT_STAGE = 0, 1, 2, 3, 4
COMMANDS = ("tile", "verify", "metric", "wreath")

_POS = {"type": "integer", "minimum": 1}

SCHEME_SCHEMA = {
    "type": "object",
    "required": ["scheme", "h_table"],
    "properties": {
        "scheme": {"enum": ["zn", "f2", "h3"]},
        "n": _POS, "k0": _POS, "k1": _POS, "k2": _POS, "M": _POS,
        "h_table": {"type": "object", "minProperties": 1,
                    "patternProperties": {"^[0-9]+$": _POS}, "additionalProperties": False},
        "literal": {"type": "boolean"},
    },
    "allOf": [
        {"if": {"properties": {"scheme": {"const": "h3"}}},
         "then": {"required": ["k0", "k1", "k2"]}, "else": {"required": ["k0", "k1"]}},
    ],
}

WINDOW_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["box", "ball"]},
        "group": {"enum": ["zn", "h3", "f2", "lamplighter", "zwrz"]},
        "n": _POS, "radius": {"type": "integer", "minimum": 0},
        "lo": {"type": ["integer", "array"]}, "hi": {"type": ["integer", "array"]},
        "core_margin": {"type": "integer", "minimum": 0},
        "table_radius": _POS,
    },
}

DESCRIPTOR_SCHEMA = {
    "type": "object",
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "scheme": {"oneOf": [SCHEME_SCHEMA, {"type": "string"}]},
        "window": WINDOW_SCHEMA,
        "lvecs": {"type": "array", "items": {"type": "array", "items": _POS}},
        "lvec_cap": _POS,
        "seed": {"type": "integer", "minimum": 0},
        "mutation": {"enum": list(MUTATIONS)},
        "caps": {"type": "object", "properties": {"ball": _POS, "dump_points": _POS}},
        "group": {"type": ["string", "object"]},
        "elements": {"type": "array"},
        "k0": _POS, "k1": _POS, "radius": {"type": "integer", "minimum": 0},
        "P": {"const": "identity"},
        "core_margin": {"type": "integer", "minimum": 0},
        "jobs": _POS,
    },
}


class CliError(Exception):
    def __init__(self, kind, message, code, **extra):
        super().__init__(message)
        self.payload = {"error": {"type": kind, "message": message, **extra}}
        self.code = code


# descriptor handling

def load_descriptor(path) -> dict:
    path = Path(path)
    try:
        desc = json.loads(path.read_text())
    except OSError as exc:
        raise CliError("io", f"cannot read descriptor {path}: {exc.strerror}", EXIT_USAGE)
    except json.JSONDecodeError as exc:
        raise CliError("schema", f"descriptor {path} is not JSON: {exc}", EXIT_USAGE)
    validate(desc)
    if isinstance(desc.get("scheme"), str):
        sub = path.parent / desc["scheme"]
        try:
            desc["scheme"] = json.loads(sub.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError("io", f"cannot read scheme descriptor {sub}: {exc}", EXIT_USAGE)
        validate(desc)
    return desc


def validate(desc):
    try:
        jsonschema.validate(desc, DESCRIPTOR_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise CliError("schema", f"{where}: {exc.message}", EXIT_USAGE, path=where)


def _window_group(scheme) -> dict:
    if isinstance(scheme, ZnScheme):
        return {"group": "zn", "n": scheme.dim, "kind": "box"}
    return {"group": scheme.name, "kind": "ball"}


def resolve_window(desc: dict, scheme, cap):
    """Window with the core margin filled in; the second value is a diagnostic or None."""
    wd = {**_window_group(scheme), **desc.get("window", {})}
    if "core_margin" in wd:
        return make_window(wd, cap), None
    bound = scheme.declared_bound()
    if wd["kind"] == "box":
        n = int(wd.get("n", 1))
        lo = np.broadcast_to(np.asarray(wd["lo"]), (n,))
        hi = np.broadcast_to(np.asarray(wd["hi"]), (n,))
        room = int((hi - lo).min()) // 2
    else:
        room = int(wd["radius"])
    if bound is not None and bound <= room:
        return make_window({**wd, "core_margin": int(bound)}, cap), None
    diag = {"kind": "core_margin", "message": "declared bound leaves no core; coverage is checked on the whole window",
            "declared_bound": bound, "room": room}
    return make_window({**wd, "core_margin": 0}, cap), diag


def _lvecs(desc, scheme, sample_extra: int | None):
    cap = int(desc.get("lvec_cap", DEFAULT_LVEC_CAP))
    hs = scheme.h_values()
    if desc.get("lvecs") is not None:
        return [tuple(v) for v in desc["lvecs"]], cap
    total = int(np.prod(hs)) if hs else 1
    if sample_extra is None and total <= cap:
        return None, cap
    sample = set(default_lvec_sample(hs))
    rng = np.random.default_rng(int(desc.get("seed", 0)))
    for _ in range(sample_extra or 0):
        sample.add(tuple(int(rng.integers(1, h + 1)) for h in hs))
    return sorted(sample), cap


def _caps(desc, args):
    caps = desc.get("caps", {})
    ball = args.cap_ball if args.cap_ball is not None else caps.get("ball", DEFAULT_BALL_CAP)
    return int(ball), caps.get("dump_points", 5_000_000)


def _build(desc, args):
    if "scheme" not in desc:
        raise CliError("schema", "descriptor needs a scheme", EXIT_USAGE, path="scheme")
    ball_cap, _ = _caps(desc, args)
    scheme = make_scheme(desc["scheme"])
    window, diag = resolve_window(desc, scheme, ball_cap)
    if desc.get("mutation"):
        scheme = mutate(scheme, desc["mutation"], int(desc.get("seed", 0)))
    return scheme, window, diag


# commands

def cmd_verify(desc, args) -> int:
    out = Path(args.out)
    if args.from_dump:
        man = archive.read_manifest(args.from_dump)
        ball_cap, _ = _caps(desc, args)
        scheme = archive.ArchivedScheme(man, cap=ball_cap)
        window, diag = scheme.window, man["run"]["core_margin_diagnostic"]
        lvecs, cap = _lvecs(desc, scheme, args.sample_lvec)
        if "lvecs" not in desc and args.sample_lvec is None:
            lvecs, cap = man["run"]["sample"], man["run"]["lvec_cap"]
            lvecs = None if lvecs is None else [tuple(v) for v in lvecs]
    else:
        scheme, window, diag = _build(desc, args)
        lvecs, cap = _lvecs(desc, scheme, args.sample_lvec)
    t0 = time.perf_counter()
    rep = verify_dtut(DtutInstance(scheme, window, lvecs, lvec_cap=cap, jobs=args.jobs))
    if diag:
        rep.diagnostics.insert(0, diag)
    atomic_write_text(out / "report.json", rep.to_json())
    atomic_write_text(out / "timings.json", dumps({**rep.timings, "wall_s": time.perf_counter() - t0}))
    _say({"command": "verify", "ok": rep.ok, "summary": rep.summary(), "report": str(out / "report.json"),
          "failures": [{"id": c["id"], "name": c["name"]} for c in rep.failures()][:10]})
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_tile(desc, args) -> int:
    out = Path(args.out)
    scheme, window, diag = _build(desc, args)
    _, dump_cap = _caps(desc, args)
    lvecs, cap = _lvecs(desc, scheme, args.sample_lvec)
    _, _, _, needed = select_lvecs(scheme, lvecs, cap)
    run = {"sample": None if lvecs is None else [list(v) for v in lvecs], "lvec_cap": cap,
           "core_margin_diagnostic": diag}
    archive.write_archive(scheme, window, needed, out, cap_points=dump_cap, extra={"run": run})
    svgs = []
    if isinstance(scheme, ZnScheme) and scheme.dim == 2:
        for (l,) in needed:
            name = f"tiling_l{l}.svg"
            title = f"Z^2 tiling k0={scheme.k0} k1={scheme.k1} h={scheme.h} l={l}"
            atomic_write_text(out / name, render_svg(scheme, l, window, title))
            svgs.append(name)
    _say({"command": "tile", "manifest": str(out / "manifest.json"),
          "lvecs": [list(v) for v in needed], "svg": svgs})
    return EXIT_OK


def cmd_metric(desc, args) -> int:
    spec = args.group or desc.get("group") or ""
    if isinstance(spec, str) and spec.lstrip().startswith("{"):
        spec = json.loads(spec)
    raw = list(desc.get("elements", [])) + list(args.elements or [])
    if not raw:
        raise CliError("usage", "no elements given", EXIT_USAGE)
    if spec == "zn":
        # bare tag: rank from the first element
        spec = {"group": "zn", "n": len(str(raw[0]).split(","))}
    group = make_group(spec)
    try:
        elems = [group.decode(e) for e in raw]
    except (ValueError, TypeError) as exc:
        raise CliError("usage", f"cannot decode element: {exc}", EXIT_USAGE)
    lengths = [group.word_length(g) for g in elems]
    res = {"command": "metric", "group": group.describe(),
           "elements": [group.encode(g) for g in elems], "lengths": lengths}
    if len(elems) > 1:
        res["distances"] = [[group.distance(a, b) for b in elems] for a in elems]
    if args.out:
        atomic_write_text(Path(args.out) / "metric.json", dumps(res))
    _say(res)
    return EXIT_OK


def cmd_wreath(desc, args) -> int:
    from .wreath import cascade_theorem34, lemma33_on_window
    from .windows import BallWindow
    k0, k1 = int(desc.get("k0", 2)), int(desc.get("k1", 3))
    radius = int(desc.get("radius", 6))
    ball_cap, _ = _caps(desc, args)
    window = BallWindow("lamplighter", radius, int(desc.get("core_margin", 0)), ball_cap)
    out = Path(args.out)
    blocks = []
    ok = True
    for p, q, lf, rep in lemma33_on_window(k0, k1, window):
        ok &= rep.ok
        blocks.append({"block": [p, q], "report": rep.to_dict(), "timings": rep.timings})
    res = cascade_theorem34(k0, k1, window)
    crep = res.verify(jobs=args.jobs)
    ok &= crep.ok
    body = {"k0": k0, "k1": k1, "radius": radius, "P": "identity", "window": window.describe(),
            "lemma33": [{"block": b["block"], **b["report"]} for b in blocks],
            "cascade": crep.to_dict(), "ok": bool(ok)}
    atomic_write_text(out / "wreath_report.json", dumps(body))
    atomic_write_text(out / "timings.json", dumps({"lemma33": [b["timings"] for b in blocks],
                                                   "cascade": crep.timings}))
    _say({"command": "wreath", "ok": bool(ok), "counts": res.counts,
          "stages": len(res.stages), "report": str(out / "wreath_report.json")})
    return EXIT_OK if ok else EXIT_FAIL


HANDLERS = {"tile": cmd_tile, "verify": cmd_verify, "metric": cmd_metric, "wreath": cmd_wreath}


def _say(obj):
    sys.stdout.write(json.dumps(obj, sort_keys=True, default=str) + "\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--descriptor", help="run descriptor (JSON)")
    common.add_argument("--out", default="dtut_out", help="output directory")
    common.add_argument("--jobs", type=int, default=1, help="worker threads inside the verifier")
    common.add_argument("--cap-ball", type=int, default=None, help="largest ball to enumerate")
    common.add_argument("--sample-lvec", type=int, default=None,
                        help="sample translation vectors: the axis sample plus N seeded random ones")
    p = argparse.ArgumentParser(prog="dtut", description="Build and certify tilings on finite windows.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("tile", parents=[common], help="dump families (and SVGs for Z^2)")
    v = sub.add_parser("verify", parents=[common], help="check every clause and write a report")
    v.add_argument("--from-dump", help="verify families loaded from a tile dump instead of rebuilding them")
    m = sub.add_parser("metric", parents=[common], help="word lengths and distances")
    m.add_argument("--group", help="group tag: zn, h3, f2, lamplighter")
    m.add_argument("elements", nargs="*", help="encoded elements")
    sub.add_parser("wreath", parents=[common], help="block decompositions and the cascade on a lamplighter ball")
    sub.add_parser("run", parents=[common], help="take the command from the descriptor")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    def go():
        desc = load_descriptor(args.descriptor) if args.descriptor else {}
        command = args.command
        if command == "run":
            command = desc.get("command")
            if command is None:
                raise CliError("schema", "descriptor has no command", EXIT_USAGE, path="command")
        if command == "verify" and not args.descriptor and not getattr(args, "from_dump", None):
            raise CliError("usage", "verify needs --descriptor or --from-dump", EXIT_USAGE)
        return _dispatch(command, desc, args)

    return _guarded(go)


def run(desc, out="dtut_out", jobs: int = 1, cap_ball=None, sample_lvec=None) -> int:
    """Run a descriptor (dict or path) the way ``dtut run`` would; returns the exit code."""
    args = argparse.Namespace(descriptor=None, out=str(out), jobs=jobs, cap_ball=cap_ball,
                              sample_lvec=sample_lvec)

    def go():
        d = desc
        if isinstance(d, dict):
            validate(d)
        else:
            d = load_descriptor(d)
        if d.get("command") is None:
            raise CliError("schema", "descriptor has no command", EXIT_USAGE, path="command")
        return _dispatch(d["command"], d, args)

    return _guarded(go)


def _dispatch(command, desc, args) -> int:
    for name in ("from_dump", "group", "elements"):
        if not hasattr(args, name):
            setattr(args, name, None)
    if args.jobs < 1:
        raise CliError("usage", "--jobs must be positive", EXIT_USAGE)
    return HANDLERS[command](desc, args)


def _guarded(fn) -> int:
    """Call ``fn`` and turn known errors into a JSON error line and an exit code."""
    try:
        return fn()
    except CliError as exc:
        _say(exc.payload)
        return exc.code
    except ResourceError as exc:
        _say({"error": {"type": "resource", "message": str(exc), "estimate": exc.estimate, "cap": exc.cap}})
        return EXIT_RESOURCE
    except OutOfRangeError as exc:
        _say({"error": {"type": "out_of_range", "message": str(exc), "required_radius": exc.required_radius}})
        return EXIT_RESOURCE
    except StageError as exc:
        _say({"error": {"type": "stage", "message": str(exc), "stage": exc.stage, "witness": exc.witness}})
        return EXIT_STAGE
    except GroupMismatchError as exc:
        _say({"error": {"type": "group_mismatch", "message": str(exc)}})
        return EXIT_USAGE
    except OSError as exc:
        _say({"error": {"type": "io", "message": f"{exc.strerror}: {exc.filename}"}})
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        _say({"error": {"type": "usage", "message": f"bad JSON argument: {exc}"}})
        return EXIT_USAGE
    except (UsageError, KeyError) as exc:
        msg = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
        _say({"error": {"type": "usage", "message": msg}})
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
