"""
Five ways to break a tiling
===========================

Each mutation wraps an honest scheme. The checker must flag every one
of them with a witness that survives an independent recheck.
"""
from dtut.faults import MUTATIONS, recheck_witness, standard_instance
from dtut.verify import DtutInstance, verify_dtut

for name in MUTATIONS:
    scheme, window, lvecs = standard_instance(name)
    honest = verify_dtut(DtutInstance(scheme.inner, window, lvecs))
    rep = verify_dtut(DtutInstance(scheme, window, lvecs))
    ids = sorted({c["id"] for c in rep.failures()})
    good = all(recheck_witness(c, scheme, window) for c in rep.failures())
    print(f"{name:17s} honest={'OK' if honest.ok else 'FAIL'} mutated fails clauses {ids}, "
          f"witnesses recheck: {good}")
