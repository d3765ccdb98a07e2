"""OFDM numerology and partition of the subcarriers into beam-assigned subbands."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_SUBBANDS = 4


@dataclass(frozen=True)
class CarrierConfig:
    """Subcarrier grid plus the decimation used by solvers and metrics.

    The default 3168 subcarriers (264 resource blocks) at 120 kHz occupy
    380.16 MHz of a 400 MHz channel.
    """

    scs_hz: float = 120e3
    n_sc: int = 3168
    design_stride: int = 48
    eval_stride: int = 12

    def __post_init__(self):
        if not self.scs_hz > 0:
            raise ValueError(f"scs_hz must be > 0, got {self.scs_hz!r}")
        for name in ("n_sc", "design_stride", "eval_stride"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")

    @property
    def occupied_bandwidth_hz(self) -> float:
        return self.n_sc * self.scs_hz

    def frequencies(self, indices: Sequence[int] | np.ndarray | None = None) -> np.ndarray:
        """Baseband frequencies (Hz) of ``indices``, or of every subcarrier."""
        k = np.arange(self.n_sc) if indices is None else np.asarray(indices)
        return (k - (self.n_sc - 1) / 2.0) * self.scs_hz


def subcarrier_frequency(config: CarrierConfig, k: int) -> float:
    """Baseband frequency of subcarrier ``k``; the band is centered on 0 Hz."""
    if not 0 <= k < config.n_sc:
        raise IndexError(f"subcarrier {k} outside [0, {config.n_sc})")
    return float((k - (config.n_sc - 1) / 2.0) * config.scs_hz)


@dataclass(frozen=True)
class SubbandPlan:
    """Contiguous half-open subbands ``[boundaries[i], boundaries[i+1])``."""

    boundaries: tuple[int, ...]
    beam_ids: tuple[int, ...]

    def __post_init__(self):
        b = self.boundaries
        if len(b) < 2 or b[0] != 0:
            raise ValueError("boundaries must start at 0 and define at least one subband")
        if any(hi <= lo for lo, hi in zip(b[:-1], b[1:])):
            raise ValueError(f"every subband needs at least one subcarrier: {b}")
        if len(self.beam_ids) != len(b) - 1:
            raise ValueError(
                f"{len(self.beam_ids)} beam ids for {len(b) - 1} subbands"
            )

    @property
    def n_subbands(self) -> int:
        return len(self.beam_ids)

    @property
    def n_sc(self) -> int:
        return self.boundaries[-1]

    def interval(self, subband: int) -> tuple[int, int]:
        return self.boundaries[subband], self.boundaries[subband + 1]

    def subband_of(self, k: int | np.ndarray) -> int | np.ndarray:
        """Subband index holding subcarrier(s) ``k``."""
        out = np.searchsorted(np.asarray(self.boundaries[1:]), k, side="right")
        return int(out) if np.ndim(out) == 0 else out


def make_subband_plan(
    config: CarrierConfig,
    beam_ids: Sequence[int],
    splits: Sequence[int] | None = None,
    max_subbands: int = MAX_SUBBANDS,
) -> SubbandPlan:
    """Split the band into one subband per beam.

    Without ``splits`` the band is divided equally and any remainder goes
    to the last subband.
    """
    beam_ids = tuple(int(b) for b in beam_ids)
    n = len(beam_ids)
    if n == 0:
        raise ValueError("at least one beam is required")
    if n > max_subbands:
        raise ValueError(f"at most {max_subbands} beams per plan, got {n}")
    if splits is None:
        base = config.n_sc // n
        sizes = [base] * n
        sizes[-1] += config.n_sc - base * n
    else:
        sizes = [int(s) for s in splits]
        if len(sizes) != n:
            raise ValueError(f"{len(sizes)} splits given for {n} beams")
        if sum(sizes) != config.n_sc:
            raise ValueError(f"splits sum to {sum(sizes)}, expected n_sc={config.n_sc}")
    boundaries = (0, *np.cumsum(sizes).tolist())
    return SubbandPlan(boundaries=tuple(int(x) for x in boundaries), beam_ids=beam_ids)


def design_indices(plan: SubbandPlan, config: CarrierConfig) -> np.ndarray:
    """Solver grid: every ``design_stride``-th subcarrier plus subband edges."""
    _check_plan(plan, config)
    idx = set(range(0, config.n_sc, config.design_stride))
    for s in range(plan.n_subbands):
        lo, hi = plan.interval(s)
        idx.update((lo, hi - 1))
    out = np.array(sorted(idx))
    _require_two_per_subband(plan, out, "design")
    return out


def eval_indices(plan: SubbandPlan, config: CarrierConfig) -> np.ndarray:
    """Metric grid: every ``eval_stride``-th subcarrier.

    Subbands catching fewer than two grid points get their edge
    subcarriers added.
    """
    _check_plan(plan, config)
    idx = set(range(0, config.n_sc, config.eval_stride))
    base = np.array(sorted(idx))
    counts = np.bincount(plan.subband_of(base), minlength=plan.n_subbands)
    for s in np.flatnonzero(counts < 2):
        lo, hi = plan.interval(int(s))
        idx.update((lo, hi - 1))
    out = np.array(sorted(idx))
    _require_two_per_subband(plan, out, "eval")
    return out


def _check_plan(plan: SubbandPlan, config: CarrierConfig) -> None:
    if plan.n_sc != config.n_sc:
        raise ValueError(f"plan covers {plan.n_sc} subcarriers, carrier has {config.n_sc}")


def _require_two_per_subband(plan: SubbandPlan, indices: np.ndarray, what: str) -> None:
    counts = np.bincount(plan.subband_of(indices), minlength=plan.n_subbands)
    if counts.min() < 2:
        bad = int(np.argmin(counts))
        raise ValueError(
            f"subband {bad} has {counts[bad]} {what} grid point(s); need at least 2"
        )
