"""Regenerate the golden core/boundary files from the brute-force reference.

Run from the repository root:  python tests/make_goldens.py
Writes src/eastlab/data/bottleneck_golden_d{d}_L{L}.json for the audited
instances.  Keep the outputs under version control; the acceptance suite
compares the main implementation against them.
"""

from __future__ import annotations

import json
from pathlib import Path

import bruteforce_reference as bf

INSTANCES = [(1, 2), (2, 2), (1, 4)]
DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "eastlab" / "data"


def golden(d: int, L: int) -> dict:
    core = sorted(bf.to_bits(d, L, v) for v in bf.brute_core(d, L))
    boundary = sorted(
        (bf.to_bits(d, L, eta), list(x)) for eta, x in bf.brute_boundary(d, L)
    )
    return {"d": d, "L": L, "core": core, "boundary": boundary}


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    for d, L in INSTANCES:
        path = DATA_DIR / f"bottleneck_golden_d{d}_L{L}.json"
        path.write_text(json.dumps(golden(d, L), indent=1, sort_keys=True) + "\n")
        print("wrote", path)


if __name__ == "__main__":
    main()
