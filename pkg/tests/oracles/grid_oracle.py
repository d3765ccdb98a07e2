"""Exact grid-search oracle for tiny delay/phase design instances.

An instance is a 1x4 array, 16 subcarriers at 25 MHz spacing and two
equal subbands steered to two distinct grid beams.  The oracle finds the
best configuration with every delay on a 64-point grid over [0, 10 ns]
and every phase on a 64-point grid over [0, 2 pi), scoring
``sum_k log(g_k + eps)`` (equivalently the mean dB loss over all 16
subcarriers).

Plain enumeration is 4096**4 points.  Two exact reductions make it
tractable:

* a common phase step on all elements and a common delay step on all
  elements leave every g_k unchanged, so element 0 is pinned to
  (tau, phi) = (0, 0) and the others range over delay offsets in
  [-63, 63] steps with total spread <= 63 steps;
* branch and bound over elements 1..3 with the bound
  ``|S_k| <= |partial_k| + (number of unset elements)``.

Run ``python3 tests/oracles/grid_oracle.py`` to regenerate
``grid_oracle.json`` (takes a few minutes on one core).
"""

from __future__ import annotations

import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from jpta.carrier import CarrierConfig, design_indices, make_subband_plan
from jpta.geometry import ArrayGeometry, build_beam_grid, steering_vector
from jpta.solvers import Architecture, SolverOptions, solve_gd

N_INSTANCES = 20
SEED = 2024
N_TAU = 64
N_PHI = 64
TAU_MAX_S = 10e-9
EPS = 1e-9

GEOMETRY = ArrayGeometry(n_rows=1, n_cols=4)
CONFIG = CarrierConfig(scs_hz=25e6, n_sc=16, design_stride=1, eval_stride=1)
GRID = build_beam_grid()
OUT = Path(__file__).with_suffix(".json")


def instances(n: int = N_INSTANCES, seed: int = SEED) -> list[tuple[int, int]]:
    """Beam pairs on distinct azimuth columns (a 1-row array ignores elevation)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        a, b = (int(x) for x in rng.choice(len(GRID), size=2, replace=False))
        if GRID.col_of(a) != GRID.col_of(b):
            out.append((a, b))
    return out


def targets(beams) -> tuple[np.ndarray, np.ndarray]:
    plan = make_subband_plan(CONFIG, beams)
    idx = design_indices(plan, CONFIG)
    w = np.stack([steering_vector(GEOMETRY, GRID.beams[b]) for b in beams])[plan.subband_of(idx)]
    return CONFIG.frequencies(idx), w


def mean_loss_db(g: np.ndarray) -> float:
    return float(-10.0 * np.mean(np.log10(np.minimum(g, 1.0))))


def _score(s: np.ndarray, m: int) -> np.ndarray:
    g = (s.real**2 + s.imag**2) / m**2
    return np.sum(np.log(g + EPS), axis=-1)


def _bound(s: np.ndarray, m: int, free: int) -> np.ndarray:
    mag = np.minimum(np.abs(s) + free, m)
    return np.sum(np.log((mag / m) ** 2 + EPS), axis=-1)


def oracle(beams) -> dict:
    freqs, w = targets(beams)
    m = w.shape[1]
    step = TAU_MAX_S / (N_TAU - 1)
    offsets = np.arange(-(N_TAU - 1), N_TAU)
    phis = 2.0 * np.pi * np.arange(N_PHI) / N_PHI
    d_cand = np.repeat(offsets, N_PHI)
    p_cand = np.tile(phis, offsets.size)
    phase = 2.0 * np.pi * freqs[None, :] * (d_cand[:, None] * step) + p_cand[:, None]
    unit = np.exp(1j * phase)
    contrib = [w[:, e].conj()[None, :] * unit for e in range(m)]
    p0 = w[:, 0].conj() * 1.0

    # incumbent: continuous GD snapped onto the grid
    best_val = -np.inf
    best_cfg = None
    plan = make_subband_plan(CONFIG, beams)
    gd = solve_gd(plan, GRID, GEOMETRY, Architecture.THREE_D, CONFIG, SolverOptions(algorithm="gd"))
    rel = np.rint((gd.taus - gd.taus[0]) / step).astype(int)
    ph = np.mod(np.rint((gd.phis - gd.phis[0]) / (2 * np.pi / N_PHI)), N_PHI).astype(int)
    if rel.max() - min(rel.min(), 0) <= N_TAU - 1 and abs(rel).max() <= N_TAU - 1:
        idx = [(r + N_TAU - 1) * N_PHI + q for r, q in zip(rel[1:], ph[1:])]
        s = p0 + sum(contrib[e][i] for e, i in zip(range(1, m), idx))
        best_val, best_cfg = float(_score(s, m)), idx

    nodes = 0
    ub1 = _bound(p0[None, :] + contrib[1], m, m - 2)
    for c1 in np.argsort(-ub1, kind="stable"):
        if ub1[c1] <= best_val:
            break
        nodes += 1
        s1 = p0 + contrib[1][c1]
        d1 = d_cand[c1]
        lo1, hi1 = min(0, d1), max(0, d1)
        q = s1[None, :] + contrib[2]
        ok2 = (np.maximum(hi1, d_cand) - np.minimum(lo1, d_cand)) <= N_TAU - 1
        ub2 = np.where(ok2, _bound(q, m, m - 3), -np.inf)
        for c2 in np.argsort(-ub2, kind="stable"):
            if ub2[c2] <= best_val:
                break
            nodes += 1
            d2 = d_cand[c2]
            lo2, hi2 = min(lo1, d2), max(hi1, d2)
            ok3 = (np.maximum(hi2, d_cand) - np.minimum(lo2, d_cand)) <= N_TAU - 1
            vals = np.where(ok3, _score(q[c2][None, :] + contrib[3], m), -np.inf)
            c3 = int(np.argmax(vals))
            if vals[c3] > best_val:
                best_val, best_cfg = float(vals[c3]), [int(c1), int(c2), c3]

    s = p0 + sum(contrib[e][i] for e, i in zip(range(1, m), best_cfg))
    g = (s.real**2 + s.imag**2) / m**2
    return {
        "beams": list(beams),
        "objective": best_val,
        "loss_db": mean_loss_db(g),
        "tau_steps": [0] + [int(d_cand[i]) for i in best_cfg],
        "phi_steps": [0] + [int(round(p_cand[i] / (2 * np.pi / N_PHI))) for i in best_cfg],
        "nodes": nodes,
    }


def main(argv=None) -> int:
    results = []
    for beams in instances():
        t0 = time.time()
        r = oracle(beams)
        r["seconds"] = round(time.time() - t0, 1)
        print(json.dumps(r), flush=True)
        results.append(r)
    doc = {
        "seed": SEED,
        "n_tau": N_TAU,
        "n_phi": N_PHI,
        "tau_max_s": TAU_MAX_S,
        "instances": [{k: r[k] for k in ("beams", "objective", "loss_db", "tau_steps", "phi_steps")}
                      for r in results],
    }
    OUT.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
