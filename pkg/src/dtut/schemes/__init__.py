from ..errors import UsageError
from .base import LFamilies, Scheme
from .free import FreeScheme
from .heisenberg import HeisenbergScheme
from .zn import ZnScheme


def _table(desc) -> dict:
    raw = desc.get("h_table")
    if not isinstance(raw, dict) or not raw:
        raise UsageError("descriptor needs a non-empty h_table")
    try:
        return {int(k): int(v) for k, v in raw.items()}
    except (TypeError, ValueError) as exc:
        raise UsageError(f"h_table entries must be integers: {raw}") from exc


def make_scheme(desc: dict) -> Scheme:
    """Scheme from a descriptor such as ``{"scheme": "zn", "n": 2, "k0": 2, "k1": 6, "h_table": {"6": 2}}``.

    ``describe()`` of every scheme is accepted back, so reports can be replayed.
    """
    kind = desc.get("scheme")
    table = _table(desc)
    if kind == "zn":
        k1 = int(desc["k1"])
        if k1 not in table:
            raise UsageError(f"h_table has no entry for k1={k1}")
        return ZnScheme(int(desc.get("n", 1)), int(desc["k0"]), k1, table[k1], bool(desc.get("literal", False)))
    if kind == "f2":
        k1 = int(desc["k1"])
        if k1 not in table:
            raise UsageError(f"h_table has no entry for k1={k1}")
        return FreeScheme(int(desc["k0"]), k1, table[k1])
    if kind == "h3":
        M = desc.get("M") if desc.get("M_source", "given") == "given" else None
        return HeisenbergScheme(int(desc["k0"]), int(desc["k1"]), int(desc["k2"]), table, M=M)
    raise UsageError(f"unknown scheme {kind!r}; expected zn, f2 or h3")


__all__ = ["FreeScheme", "HeisenbergScheme", "LFamilies", "Scheme", "ZnScheme", "make_scheme"]
