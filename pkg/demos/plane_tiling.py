"""
Tiling the plane by cores and shells
====================================

Builds the Z^2 families for k0=1, k1=2, h=1 on a small box, prints the
measured separations and diameters, and writes an SVG picture.
"""
import sys
from pathlib import Path

from dtut.families import min_separation, tile_diameters
from dtut.render import render_svg
from dtut.schemes import ZnScheme
from dtut.windows import BoxWindow

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(parents=True, exist_ok=True)

scheme = ZnScheme(2, 1, 2, 1)
window = BoxWindow(2, -12, 12)
lf = scheme.families((1,), window)

# the core squares: side 2, at least 2*k1 apart
C = lf.C[0]
sep = min_separation(C)[0]
print(f"core tiles: {len(C)}, min separation {sep} (need {2 * scheme.k1})")

# one family per shell (u, v, z); each is k1-disjoint on its own
for i, D in enumerate(lf.D[1]):
    d = tile_diameters(D)[0]
    print(f"shell family {i}: {len(D)} tiles, largest diameter {int(d.max()) if len(d) else 0}")

print(f"declared bound {scheme.declared_bound()}")

# every point of the box lies in exactly one tile
count = sum(f.support().astype(int) for f in lf.all())
print("partition:", bool((count == 1).all()))

svg = out / "plane_tiling.svg"
svg.write_text(render_svg(scheme, 1, window, "Z^2, k0=1 k1=2 h=1"))
print("wrote", svg)
