#!/usr/bin/env python3
"""Regenerate the certificate constants shipped in specreg.perturb.

Runs the calibration sweep (Jordan-block profile, n in {10, 20}, delta in
{0.1, 0.25}, 400 draws per cell, base seed 101) for every law in the catalog
and prints the DEFAULT_C1 / DEFAULT_C2 tables to paste into perturb.py.
"""

import json

from specreg.harness import calibrate
from specreg.perturb import LAWS

tables = {}
for kind, law in sorted(LAWS.items()):
    table = calibrate(law, ns=[10, 20], deltas=[0.1, 0.25], trials=400, seed=101)
    tables[kind] = table
    print(f"{kind}: c1={table.c1!r} c2={table.c2!r} kprime={table.kprime}")
    print(json.dumps(table.to_json_dict(), indent=2))

c1 = {k: round(t.c1, 4) for k, t in tables.items()}
c2 = {k: round(t.c2, 2) for k, t in tables.items()}
print("\nDEFAULT_C1 =", c1)
print("DEFAULT_C2 =", c2)
