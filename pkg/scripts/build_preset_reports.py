"""Regenerate the stored relation reports shipped with the presets.

Runs the full subset search (all 3-subsets, 50 digits, coefficients up to
10**4, cuts 20/20) for every preset and writes src/zetalab/data/preset_reports.json.
"""

import json
import sys
import time
from pathlib import Path

from zetalab.parameters import (
    DEFAULT_DIGITS,
    DEFAULT_M_CUT,
    DEFAULT_MAX_COEFF,
    DEFAULT_P_CUT,
    DEFAULT_SUBSET_SIZE,
    build_log_set,
    presets,
    relation_search,
)

OUT = Path(__file__).resolve().parents[1] / "src" / "zetalab" / "data" / "preset_reports.json"


def main(workers: int = 1) -> None:
    reports = {}
    for p in presets():
        t0 = time.perf_counter()
        L = build_log_set(p.collection, DEFAULT_P_CUT, DEFAULT_M_CUT)
        rep = relation_search(L, DEFAULT_SUBSET_SIZE, DEFAULT_DIGITS, DEFAULT_MAX_COEFF, workers=workers)
        print(f"{p.name}: |L|={len(L)} subsets={rep.subsets_checked} found={rep.found} "
              f"({time.perf_counter() - t0:.1f}s)")
        if rep.found:
            print("  relation:", rep.relation_text())
        reports[p.name] = rep.to_dict()
    OUT.write_text(json.dumps(reports, indent=1) + "\n")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 1)
