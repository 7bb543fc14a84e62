#!/usr/bin/env python3
"""Regenerate the frozen oracle values under tests/data/.

Everything here is deterministic: the enumeration is exact, the experiment
seeds are fixed, and the recorded numbers are the first-run outputs that the
regression tests then hold the code to.  Run from the repository root:

    python3 scripts/freeze_oracles.py
"""

import json
import sys
import time
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from hyperlat.quaternion import make_q17_algebra                     # noqa: E402
from hyperlat.latenum import enumerate_units, gram_matrix, save_cache  # noqa: E402
from hyperlat.diophantine import approx_search, run_window_experiment  # noqa: E402
from hyperlat.hypgeom import h2_point                                # noqa: E402

DATA = ROOT / "tests" / "data"

WINDOW = (-1.0, 1.0, 0.5, 2.0)
EPS_LIST = [0.5, 0.25, 0.125, 0.0625, 0.03125]
SEED = 17
N_PAIRS = 20
CACHE_R1 = 3.5
CACHE_R2 = 12.5


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    A = make_q17_algebra()

    G = gram_matrix(A).matrix
    with open(DATA / "gram_q17.json", "w") as fh:
        json.dump(
            {
                "basis": ["1", "w", "i", "iw", "j", "jw", "ij", "ijw"],
                "matrix": [[repr(float(v)) for v in row] for row in G],
            },
            fh,
            indent=1,
        )
    print("wrote gram_q17.json")

    c22 = enumerate_units(A, 2.0, 2.0)
    with open(DATA / "enumeration_counts.json", "w") as fh:
        json.dump(
            {
                "R1": 2.0,
                "R2": 2.0,
                "n_classes": len(c22.elements),
                "coords": [list(el.coords) for el in c22.elements],
            },
            fh,
            indent=1,
        )
    print(f"wrote enumeration_counts.json (count at (2,2) = {len(c22.elements)})")

    t0 = time.time()
    cache = enumerate_units(A, CACHE_R1, CACHE_R2, node_budget=10**11)
    print(f"cache ({CACHE_R1}, {CACHE_R2}): {len(cache.elements)} classes, "
          f"{cache.nodes} nodes, {time.time() - t0:.0f}s")
    save_cache(cache, DATA / "units_cache_window.bin")
    print("wrote units_cache_window.bin")

    x = h2_point(0.0, 1.0)
    y = h2_point(0.5, 1.0)
    res = approx_search(x, y, 0.05, CACHE_R2, cache)
    assert res is not None
    with open(DATA / "approx_regression.json", "w") as fh:
        json.dump(
            {
                "x": [0.0, 1.0],
                "y": [0.5, 1.0],
                "eps": 0.05,
                "cache_R1": CACHE_R1,
                "cache_R2": CACHE_R2,
                "R_found": repr(res.R_found),
                "coords": list(res.gamma.coords),
                "achieved_d1": repr(res.achieved_d1),
            },
            fh,
            indent=1,
        )
    print(f"wrote approx_regression.json (R_found = {res.R_found:.6f})")

    exp = run_window_experiment(cache, WINDOW, EPS_LIST, N_PAIRS, SEED)
    zetas = exp.pair_zetas
    band = {
        "window": list(WINDOW),
        "eps_list": EPS_LIST,
        "seed": SEED,
        "pairs": N_PAIRS,
        "cache_R1": CACHE_R1,
        "cache_R2": CACHE_R2,
        "pooled_zeta": repr(exp.pooled_zeta),
        "pair_zetas": [repr(z) for z in zetas],
        "pair_zeta_band": [float(np.floor(min(zetas) * 10) / 10 - 0.5),
                           float(np.ceil(max(zetas) * 10) / 10 + 0.5)]
        if zetas else None,
        "pooled_zeta_band": [float(exp.pooled_zeta - 0.75),
                             float(exp.pooled_zeta + 0.75)],
        "pigeonhole_violation_share": repr(exp.pigeonhole_violation_share),
        "n_nontrivial_points": exp.n_nontrivial_points,
        "note": (
            "Desk-scale first-run record.  The unit lattice of this order is "
            "sparse (effective covolume ~2.3e3), so nontrivial approximation "
            "sets in around R = 2 log(1/eps) + 9 and the per-pair slopes "
            "fluctuate strongly around the asymptotic exponent 2; the pooled "
            "within-pair slope is the experiment-level estimate."
        ),
    }
    with open(DATA / "diophantine_band.json", "w") as fh:
        json.dump(band, fh, indent=1)
    print(f"wrote diophantine_band.json (pooled = {exp.pooled_zeta:.4f}, "
          f"pair zetas = {[round(z, 3) for z in zetas]})")


if __name__ == "__main__":
    main()
