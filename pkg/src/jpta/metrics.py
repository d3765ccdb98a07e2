"""Beam-gain loss evaluation and Monte Carlo loss statistics."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from jpta.carrier import CarrierConfig, SubbandPlan, eval_indices, make_subband_plan
from jpta.geometry import ArrayGeometry, BeamGrid, Direction, build_beam_grid, steering_vector
from jpta.solvers import (
    Algorithm,
    Architecture,
    DelayPhaseSolution,
    SolverOptions,
    precoder_matrix,
    quantize_phases,
    solve_all,
)

WORKERS_ENV = "JPTA_WORKERS"


@dataclass(frozen=True, eq=False)
class GainProfile:
    """Per-subcarrier beam gain (dB, <= 0) on the evaluation grid."""

    indices: np.ndarray
    gains_db: np.ndarray
    subbands: np.ndarray
    max_delay_ns: float = 0.0

    @property
    def losses_db(self) -> np.ndarray:
        return -self.gains_db


@dataclass(frozen=True)
class LossSample:
    effective_loss_db: float
    max_delay_ns: float

    def __post_init__(self):
        for name in ("effective_loss_db", "max_delay_ns"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class LossSummary:
    mean_db: float
    p90_db: float
    max_delay_ns: float
    n_samples: int


def gain_profile(
    solution: DelayPhaseSolution,
    plan: SubbandPlan,
    grid: BeamGrid,
    geometry: ArrayGeometry,
    config: CarrierConfig,
) -> GainProfile:
    """Gain ``20 log10(|a^H p_k| / M)`` against each subcarrier's assigned beam.

    A perfectly matched phased array scores 0 dB.
    """
    idx = eval_indices(plan, config)
    sub = plan.subband_of(idx)
    for b in plan.beam_ids:
        grid.check_beam(b)
    beams = np.stack([steering_vector(geometry, grid.beams[b]) for b in plan.beam_ids])
    p = precoder_matrix(solution, geometry, config.frequencies(idx))
    corr = np.abs(np.sum(beams[sub].conj() * p, axis=1)) / geometry.n_elements
    with np.errstate(divide="ignore"):
        gains = np.minimum(20.0 * np.log10(corr), 0.0)
    return GainProfile(
        indices=idx, gains_db=gains, subbands=sub, max_delay_ns=solution.delay_spread * 1e9
    )


def effective_loss(profile: GainProfile, plan: SubbandPlan, subband: int) -> LossSample:
    """Mean dB loss over the evaluation subcarriers of one subband."""
    if not 0 <= subband < plan.n_subbands:
        raise IndexError(f"subband {subband} outside plan of {plan.n_subbands}")
    mask = profile.subbands == subband
    if not mask.any():
        raise ValueError(f"subband {subband} has no evaluation subcarriers")
    loss = float(np.mean(profile.losses_db[mask]))
    return LossSample(effective_loss_db=max(loss, 0.0), max_delay_ns=float(profile.max_delay_ns))


def nearest_rank(values: Sequence[float] | np.ndarray, pct: float) -> float:
    """Nearest-rank percentile: element ``ceil(pct/100 n) - 1`` of the ascending sort."""
    data = np.sort(np.asarray(values, dtype=float))
    if data.size == 0:
        raise ValueError("percentile of an empty sample")
    rank = max(math.ceil(round(pct / 100.0 * data.size, 9)), 1)
    return float(data[rank - 1])


def summarize(samples: Sequence[LossSample]) -> LossSummary:
    if not samples:
        raise ValueError("cannot summarize an empty sample list")
    losses = np.array([s.effective_loss_db for s in samples])
    return LossSummary(
        mean_db=float(np.mean(np.sort(losses))),
        p90_db=nearest_rank(losses, 90),
        max_delay_ns=max(s.max_delay_ns for s in samples),
        n_samples=len(samples),
    )


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(int(workers), 1)
    return max(int(os.environ.get(WORKERS_ENV, "1") or 1), 1)


@dataclass(frozen=True)
class TrialSetup:
    architecture: Architecture
    n_beams: int
    algorithms: tuple[Algorithm, ...]
    geometry: ArrayGeometry
    grid: BeamGrid
    config: CarrierConfig
    options: SolverOptions
    phase_bits: int | None
    seed: int
    sampling: str = "grid"


def draw_beams(setup: TrialSetup, rng: np.random.Generator) -> tuple[BeamGrid, list[int]]:
    """Pick the trial's beams; AO trials draw them from one elevation row."""
    grid, n = setup.grid, setup.n_beams
    if setup.sampling == "continuous":
        az = rng.uniform(*grid.az_range_deg, size=n)
        if setup.architecture is Architecture.AZIMUTH_ONLY:
            el = np.full(n, rng.uniform(*grid.el_range_deg))
        else:
            el = rng.uniform(*grid.el_range_deg, size=n)
        dirs = [Direction(float(a), float(e)) for a, e in zip(az, el)]
        return BeamGrid.from_directions(dirs), list(range(n))
    if setup.architecture is Architecture.AZIMUTH_ONLY:
        if grid.n_az < n:
            raise ValueError(f"an elevation row holds {grid.n_az} beams, {n} requested")
        row = int(rng.integers(grid.n_el))
        cols = rng.choice(grid.n_az, size=n, replace=False)
        return grid, [row * grid.n_az + int(c) for c in cols]
    if len(grid) < n:
        raise ValueError(f"grid holds {len(grid)} beams, {n} requested")
    return grid, [int(b) for b in rng.choice(len(grid), size=n, replace=False)]


def run_trial(setup: TrialSetup, trial: int) -> dict[Algorithm, list[LossSample]]:
    """One Monte Carlo trial: per algorithm, one loss sample per subband."""
    rng = np.random.default_rng([setup.seed, trial])
    grid, beams = draw_beams(setup, rng)
    plan = make_subband_plan(setup.config, beams)
    sols = solve_all(
        plan, grid, setup.geometry, setup.architecture, setup.config, setup.options,
        setup.algorithms,
    )
    out = {}
    for alg, sol in sols.items():
        if setup.phase_bits is not None:
            sol = quantize_phases(sol, setup.phase_bits)
        profile = gain_profile(sol, plan, grid, setup.geometry, setup.config)
        out[alg] = [effective_loss(profile, plan, s) for s in range(plan.n_subbands)]
    return out


def _run_chunk(setup: TrialSetup, trials: Sequence[int]):
    return [run_trial(setup, t) for t in trials]


def monte_carlo_multi(
    architecture: Architecture | str,
    n_beams: int,
    algorithms: Sequence[Algorithm | str],
    n_trials: int,
    seed: int,
    geometry: ArrayGeometry | None = None,
    grid: BeamGrid | None = None,
    config: CarrierConfig | None = None,
    options: SolverOptions | None = None,
    phase_bits: int | None = 6,
    sampling: str = "grid",
    workers: int | None = None,
) -> dict[Algorithm, list[LossSample]]:
    """Loss samples of several algorithms on the same ``n_trials`` draws.

    Trial ``t`` draws from its own generator seeded with ``(seed, t)``, so
    the samples (kept in trial order) do not depend on the worker count.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if n_beams < 1:
        raise ValueError("n_beams must be >= 1")
    if sampling not in ("grid", "continuous"):
        raise ValueError(f"unknown sampling {sampling!r}")
    algorithms = tuple(Algorithm(a) for a in algorithms)
    setup = TrialSetup(
        architecture=Architecture(architecture),
        n_beams=int(n_beams),
        algorithms=algorithms,
        geometry=geometry or ArrayGeometry(),
        grid=grid or build_beam_grid(),
        config=config or CarrierConfig(),
        options=options or SolverOptions(algorithm=algorithms[-1]),
        phase_bits=phase_bits,
        seed=int(seed),
        sampling=sampling,
    )
    n_workers = min(worker_count(workers), n_trials)
    trials = list(range(n_trials))
    if n_workers == 1:
        per_trial = _run_chunk(setup, trials)
    else:
        chunks = [trials[i::n_workers] for i in range(n_workers)]
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_run_chunk, [setup] * n_workers, chunks))
        per_trial = [None] * n_trials
        for chunk, res in zip(chunks, results):
            for t, samples in zip(chunk, res):
                per_trial[t] = samples
    return {a: [s for trial in per_trial for s in trial[a]] for a in algorithms}


def monte_carlo_samples(
    architecture: Architecture | str,
    n_beams: int,
    algorithm: Algorithm | str,
    n_trials: int,
    seed: int,
    **kwargs,
) -> list[LossSample]:
    """Loss samples of one algorithm, ``n_beams`` per trial, in trial order."""
    algorithm = Algorithm(algorithm)
    return monte_carlo_multi(architecture, n_beams, [algorithm], n_trials, seed, **kwargs)[algorithm]


def monte_carlo_loss(
    architecture: Architecture | str,
    n_beams: int,
    algorithm: Algorithm | str,
    n_trials: int,
    seed: int,
    **kwargs,
) -> LossSummary:
    """Table-style loss statistics over ``n_trials * n_beams`` UT samples."""
    return summarize(monte_carlo_samples(architecture, n_beams, algorithm, n_trials, seed, **kwargs))
