"""Common shape of a tiling scheme as seen by the verifier."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..errors import UsageError


@dataclass
class LFamilies:
    """The families a scheme produces for one translation vector."""
    C: list                      # C_0 .. C_n
    D: dict                      # i -> [D_{i,0} .. D_{i,F_i}]
    extra: list = field(default_factory=list)   # (clause id, family, r) extra disjointness claims
    diagnostics: list = field(default_factory=list)

    def all(self):
        out = list(self.C)
        for i in sorted(self.D):
            out.extend(self.D[i])
        return out


def check_scales(scales, h_table, m):
    scales = [int(k) for k in scales]
    if len(scales) != m + 1:
        raise UsageError(f"need {m + 1} scales, got {len(scales)}")
    if any(k <= 0 for k in scales) or any(a >= b for a, b in zip(scales, scales[1:])):
        raise UsageError(f"scales must be positive and strictly increasing: {scales}")
    h = {int(k): int(v) for k, v in dict(h_table or {}).items()}
    for k in scales[1:]:
        if h.get(k, 0) < 1:
            raise UsageError(f"h_table has no positive value at scale {k}")
    return scales, h


class Scheme:
    name = "scheme"
    m = 0
    n = 0
    F: tuple = ()

    def h_values(self) -> list:
        return [self.h_table[k] for k in self.scales[1:]]

    def lvecs(self):
        return itertools.product(*[range(1, h + 1) for h in self.h_values()])

    def families(self, lvec, window) -> LFamilies:
        raise NotImplementedError

    def declared_bound(self):
        return None

    def with_h_table(self, h_table) -> "Scheme":
        """The same scheme under a different h; used to confirm F does not depend on h."""
        raise NotImplementedError

    def invariant_checks(self, window) -> list:
        return []

    def describe(self) -> dict:
        raise NotImplementedError
