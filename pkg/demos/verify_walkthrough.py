"""
Certifying a tiling and catching a broken one
=============================================

Runs the clause checker on a Z^1 scheme, then on a copy whose shell tiles
are shifted by one step, and rechecks the witness the checker returns.
"""
from dtut.faults import TileTranslation, recheck_witness
from dtut.schemes import ZnScheme
from dtut.verify import DtutInstance, verify_dtut
from dtut.windows import BoxWindow

scheme = ZnScheme(1, 2, 4, 2)
# shrink the core by the tile bound so clipped boundary tiles cannot matter
window = BoxWindow(1, -60, 60, core_margin=scheme.declared_bound())

rep = verify_dtut(DtutInstance(scheme, window))
print("honest scheme:", "OK" if rep.ok else "FAIL", rep.summary())

# now shift the shell tiles: translates start to overlap
bad = TileTranslation(scheme)
rep = verify_dtut(DtutInstance(bad, window))
print("shifted shells:", "OK" if rep.ok else "FAIL", rep.summary())
for clause in rep.failures()[:3]:
    print(f"  clause {clause['id']} ({clause['name']}) params={clause['params']}")
    print(f"    witness {clause['witness']}")
    print(f"    witness holds on recheck: {recheck_witness(clause, bad, window)}")
