"""Round-robin scheduling simulation of baseline, AO-JPTA and 3D-JPTA cells.

Cell-edge users are power limited, so a scheduled user's rate is modeled as
``B * SNR / l(n)`` per slot, where ``n`` is the number of distinct beams
multiplexed in that slot and ``l`` the linear beam-gain loss of an
``n``-beam JPTA design.  The JPTA multiplexing gain shows up as users being
scheduled in more slots.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from jpta.geometry import BeamGrid, build_beam_grid
from jpta.metrics import nearest_rank

DEFAULT_UT_BANDWIDTH_HZ = 25 * 120e3

# Mean GD losses (dB) of this package's Monte Carlo evaluation, 2000 trials,
# seed 0, 6-bit phases (`jpta eval --solver gd --trials 2000 --seed 0`).
DEFAULT_LOSS_TABLE_DB = {
    "ao": {1: 0.0, 2: 0.831, 3: 1.621, 4: 2.296},
    "3d": {1: 0.0, 2: 0.911, 3: 1.788, 4: 2.572},
}


class Mode(str, enum.Enum):
    BASELINE = "baseline"
    AO_JPTA = "ao"
    THREE_D_JPTA = "3d"


@dataclass(frozen=True)
class UtRecord:
    ut_id: int
    beam_id: int
    snr_linear: float
    bandwidth_hz: float = DEFAULT_UT_BANDWIDTH_HZ

    def __post_init__(self):
        if not self.snr_linear > 0:
            raise ValueError(f"UT {self.ut_id}: snr_linear must be > 0")
        if not self.bandwidth_hz > 0:
            raise ValueError(f"UT {self.ut_id}: bandwidth_hz must be > 0")


@dataclass(frozen=True)
class SnrModel:
    """SNR in dB drawn uniformly from ``[low_db, high_db]``."""

    low_db: float = -10.0
    high_db: float = 10.0

    def __post_init__(self):
        if self.high_db < self.low_db:
            raise ValueError("snr_model high_db must be >= low_db")

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return 10.0 ** (rng.uniform(self.low_db, self.high_db, size=n) / 10.0)


@dataclass(frozen=True)
class SimConfig:
    n_pool: int
    n_max: int
    mode: Mode = Mode.BASELINE
    n_slots: int | None = None
    beams_cap: int = 4
    loss_table_db: Mapping[int, float] | None = None
    snr_model: SnrModel = field(default_factory=SnrModel)
    bandwidth_hz: float = DEFAULT_UT_BANDWIDTH_HZ
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.n_pool < 1:
            raise ValueError("n_pool must be >= 1")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.n_slots is not None and self.n_slots < 1:
            raise ValueError("n_slots must be >= 1")
        if not 1 <= self.beams_cap <= 4:
            raise ValueError("beams_cap must lie in [1, 4]")
        table = self.loss_table()
        if table.get(1, None) != 0.0:
            raise ValueError("loss_table_db[1] must be 0")
        missing = [n for n in range(1, self.beams_cap + 1) if n not in table]
        if self.mode is not Mode.BASELINE and missing:
            raise ValueError(f"loss_table_db lacks entries for {missing} beams")

    @property
    def slots(self) -> int:
        return self.n_slots if self.n_slots is not None else 10 * self.n_pool

    def loss_table(self) -> dict[int, float]:
        if self.loss_table_db is not None:
            return {int(k): float(v) for k, v in self.loss_table_db.items()}
        key = "ao" if self.mode is Mode.AO_JPTA else "3d"
        return dict(DEFAULT_LOSS_TABLE_DB[key])


@dataclass(frozen=True)
class SlotSchedule:
    primary_ut: int
    secondary_uts: tuple[int, ...]
    n_beams_used: int

    @property
    def scheduled(self) -> tuple[int, ...]:
        return (self.primary_ut, *self.secondary_uts)


@dataclass(frozen=True, eq=False)
class ThroughputReport:
    per_ut_throughput: np.ndarray
    mean: float
    p05: float
    gain_vs_baseline_mean: float | None = None
    gain_vs_baseline_p05: float | None = None
    scheduled_counts: np.ndarray | None = None

    def with_gains(self, baseline: "ThroughputReport") -> "ThroughputReport":
        return ThroughputReport(
            per_ut_throughput=self.per_ut_throughput,
            mean=self.mean,
            p05=self.p05,
            gain_vs_baseline_mean=self.mean / baseline.mean - 1.0,
            gain_vs_baseline_p05=self.p05 / baseline.p05 - 1.0,
            scheduled_counts=self.scheduled_counts,
        )


def generate_pool(config: SimConfig, grid: BeamGrid | None = None) -> list[UtRecord]:
    """Synthetic UT pool: serving beams uniform over the grid, SNR per ``snr_model``."""
    grid = grid or build_beam_grid()
    rng = np.random.default_rng(config.seed)
    beams = rng.integers(len(grid), size=config.n_pool)
    snr = config.snr_model.draw(rng, config.n_pool)
    return [
        UtRecord(ut_id=i, beam_id=int(b), snr_linear=float(s), bandwidth_hz=config.bandwidth_hz)
        for i, (b, s) in enumerate(zip(beams, snr))
    ]


def _tier(mode: Mode, grid: BeamGrid, primary_beam: int, beam: int) -> int | None:
    """Priority tier of a secondary candidate; None if the mode forbids grouping."""
    if beam == primary_beam:
        return 0
    if mode is Mode.BASELINE:
        return None
    if grid.row_of(beam) == grid.row_of(primary_beam):
        return 1
    if mode is Mode.THREE_D_JPTA:
        return 2
    return None


def schedule_slot(
    queue: deque, pool: Mapping[int, UtRecord] | Sequence[UtRecord], config: SimConfig,
    grid: BeamGrid | None = None,
) -> SlotSchedule:
    """Schedule one slot and rotate the round-robin ``queue`` in place.

    The queue head is the primary.  Secondaries are taken tier by tier:
    same beam as the primary, then same elevation row (JPTA modes), then
    any beam (3D only); within a tier the earlier queue position wins.  A
    candidate on a beam not yet in the slot is skipped once ``beams_cap``
    beams are active.  Scheduled UTs move to the tail in queue order.
    """
    if not queue:
        raise ValueError("empty scheduling queue")
    grid = grid or build_beam_grid()
    lookup = pool if isinstance(pool, Mapping) else {u.ut_id: u for u in pool}
    primary = queue[0]
    p_beam = lookup[primary].beam_id
    cap = 1 if config.mode is Mode.BASELINE else config.beams_cap

    tiers: list[list[int]] = [[], [], []]
    for ut in list(queue)[1:]:
        t = _tier(config.mode, grid, p_beam, lookup[ut].beam_id)
        if t is not None:
            tiers[t].append(ut)

    chosen = [primary]
    beams = {p_beam}
    for tier in tiers:
        for ut in tier:
            if len(chosen) >= config.n_max:
                break
            b = lookup[ut].beam_id
            if b in beams or len(beams) < cap:
                chosen.append(ut)
                beams.add(b)

    picked = set(chosen)
    rest = [ut for ut in queue if ut not in picked]
    moved = [ut for ut in queue if ut in picked]
    queue.clear()
    queue.extend(rest + moved)
    return SlotSchedule(primary_ut=primary, secondary_uts=tuple(chosen[1:]), n_beams_used=len(beams))


def run_simulation(
    config: SimConfig,
    pool: Sequence[UtRecord] | None = None,
    grid: BeamGrid | None = None,
    slot_loss=None,
) -> ThroughputReport:
    """Round-robin over ``config.slots`` slots; per-UT throughput is accrued rate / slots.

    ``slot_loss(schedule, pool) -> {ut_id: loss_db}`` replaces the loss
    table lookup, e.g. with an exact per-slot solve.
    """
    grid = grid or build_beam_grid()
    pool = list(pool) if pool is not None else generate_pool(config, grid)
    lookup = {u.ut_id: u for u in pool}
    order = [u.ut_id for u in pool]
    index = {ut: i for i, ut in enumerate(order)}
    table = config.loss_table()
    queue = deque(order)
    accrued = np.zeros(len(pool))
    counts = np.zeros(len(pool), dtype=int)
    for _ in range(config.slots):
        sched = schedule_slot(queue, lookup, config, grid)
        if slot_loss is not None:
            losses = slot_loss(sched, lookup)
        else:
            loss = table[sched.n_beams_used]
            losses = {ut: loss for ut in sched.scheduled}
        for ut in sched.scheduled:
            u = lookup[ut]
            accrued[index[ut]] += u.bandwidth_hz * u.snr_linear / 10.0 ** (losses[ut] / 10.0)
            counts[index[ut]] += 1
    tput = accrued / config.slots
    return ThroughputReport(
        per_ut_throughput=tput,
        mean=float(np.mean(np.sort(tput))),
        p05=nearest_rank(tput, 5),
        scheduled_counts=counts,
    )


class SolvedSlotLoss:
    """Per-slot loss from an actual JPTA design of the slot's beams.

    The band is split equally over the slot's distinct beams; each UT gets
    the effective loss of its beam's subband.  Designs are cached per beam
    set, so this is practical for small pools only.
    """

    def __init__(self, architecture: str, algorithm: str = "ls", phase_bits: int | None = 6,
                 geometry=None, grid=None, config=None):
        from jpta.carrier import CarrierConfig
        from jpta.geometry import ArrayGeometry

        self.architecture = architecture
        self.algorithm = algorithm
        self.phase_bits = phase_bits
        self.geometry = geometry or ArrayGeometry()
        self.grid = grid or build_beam_grid()
        self.config = config or CarrierConfig()
        self._cache: dict[tuple[int, ...], dict[int, float]] = {}

    def beam_losses(self, beams: tuple[int, ...]) -> dict[int, float]:
        from jpta.carrier import make_subband_plan
        from jpta.metrics import effective_loss, gain_profile
        from jpta.solvers import SolverOptions, quantize_phases, solve

        if beams not in self._cache:
            if len(beams) == 1:
                self._cache[beams] = {beams[0]: 0.0}
            else:
                plan = make_subband_plan(self.config, beams)
                sol = solve(plan, self.grid, self.geometry, self.architecture, self.config,
                            SolverOptions(algorithm=self.algorithm))
                if self.phase_bits is not None:
                    sol = quantize_phases(sol, self.phase_bits)
                prof = gain_profile(sol, plan, self.grid, self.geometry, self.config)
                self._cache[beams] = {
                    b: effective_loss(prof, plan, s).effective_loss_db for s, b in enumerate(beams)
                }
        return self._cache[beams]

    def __call__(self, sched: SlotSchedule, lookup: Mapping[int, UtRecord]) -> dict[int, float]:
        beams = tuple(sorted({lookup[ut].beam_id for ut in sched.scheduled}))
        per_beam = self.beam_losses(beams)
        return {ut: per_beam[lookup[ut].beam_id] for ut in sched.scheduled}


@dataclass(frozen=True)
class ComparisonRow:
    n_pool: int
    n_max: int
    mode: Mode
    seed: int
    report: ThroughputReport


def compare_modes(
    pools: Iterable[int],
    n_maxes: Iterable[int],
    seeds: Iterable[int],
    modes: Sequence[Mode | str] = (Mode.BASELINE, Mode.AO_JPTA, Mode.THREE_D_JPTA),
    n_slots: int | None = None,
    loss_table_db: Mapping[str, Mapping[int, float]] | Mapping[int, float] | None = None,
    pool_override: Sequence[UtRecord] | None = None,
    grid: BeamGrid | None = None,
    **config_kwargs,
) -> list[ComparisonRow]:
    """Every mode on the identical pool and queue order per (N_pool, N_max, seed).

    ``loss_table_db`` is either one table shared by all modes or a mapping
    ``{"ao": table, "3d": table}``.
    """
    grid = grid or build_beam_grid()
    modes = [Mode(m) for m in modes]
    if Mode.BASELINE not in modes:
        modes = [Mode.BASELINE, *modes]
    rows = []
    for n_pool in pools:
        for n_max in n_maxes:
            for seed in seeds:
                base_cfg = SimConfig(n_pool=n_pool, n_max=n_max, seed=seed, n_slots=n_slots,
                                     **config_kwargs)
                pool = pool_override if pool_override is not None else generate_pool(base_cfg, grid)
                reports = {}
                for mode in modes:
                    cfg = SimConfig(n_pool=len(pool), n_max=n_max, mode=mode, seed=seed,
                                    n_slots=n_slots, loss_table_db=_table_for(mode, loss_table_db),
                                    **config_kwargs)
                    reports[mode] = run_simulation(cfg, pool, grid)
                baseline = reports[Mode.BASELINE]
                rows.extend(
                    ComparisonRow(n_pool, n_max, mode, seed, reports[mode].with_gains(baseline))
                    for mode in modes
                )
    return rows


def _table_for(mode: Mode, tables) -> dict[int, float] | None:
    if tables is None:
        return None
    if "ao" in tables or "3d" in tables:
        key = "ao" if mode is Mode.AO_JPTA else "3d"
        return dict(tables[key])
    return dict(tables)
