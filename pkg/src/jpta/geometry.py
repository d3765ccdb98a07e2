"""Planar array geometry, steering vectors and the uniform beam-grid codebook."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform rectangular array; rows are vertical, columns horizontal."""

    n_rows: int = 24
    n_cols: int = 16
    spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if int(self.n_rows) != self.n_rows or self.n_rows < 1:
            raise ValueError(f"n_rows must be a positive integer, got {self.n_rows!r}")
        if int(self.n_cols) != self.n_cols or self.n_cols < 1:
            raise ValueError(f"n_cols must be a positive integer, got {self.n_cols!r}")
        if not self.spacing_wavelengths > 0:
            raise ValueError(f"spacing_wavelengths must be > 0, got {self.spacing_wavelengths!r}")

    @property
    def n_elements(self) -> int:
        return self.n_rows * self.n_cols

    def element_rows(self) -> np.ndarray:
        """Row index of every element in row-major order."""
        return np.repeat(np.arange(self.n_rows), self.n_cols)

    def element_cols(self) -> np.ndarray:
        """Column index of every element in row-major order."""
        return np.tile(np.arange(self.n_cols), self.n_rows)


@dataclass(frozen=True)
class Direction:
    """Pointing direction in degrees relative to array broadside."""

    azimuth_deg: float
    elevation_deg: float

    def __post_init__(self):
        for name in ("azimuth_deg", "elevation_deg"):
            value = getattr(self, name)
            if not -90.0 <= value <= 90.0:
                raise ValueError(f"{name} must lie in [-90, 90], got {value!r}")

    @property
    def u(self) -> float:
        """Horizontal directional cosine."""
        return float(np.sin(np.radians(self.azimuth_deg)) * np.cos(np.radians(self.elevation_deg)))

    @property
    def v(self) -> float:
        """Vertical directional cosine."""
        return float(np.sin(np.radians(self.elevation_deg)))


def steering_phases(geometry: ArrayGeometry, direction: Direction) -> np.ndarray:
    """Per-element phase (radians) of the steering vector, row-major."""
    rows = geometry.element_rows()
    cols = geometry.element_cols()
    return -2.0 * np.pi * geometry.spacing_wavelengths * (rows * direction.v + cols * direction.u)


def steering_vector(geometry: ArrayGeometry, direction: Direction) -> np.ndarray:
    """Unit-modulus DFT weights pointing the array at ``direction``.

    Element ``(r, c)`` sits at index ``r * n_cols + c`` and carries
    ``exp(-j 2 pi d (r v + c u))`` with ``d`` the pitch in wavelengths.
    """
    return np.exp(1j * steering_phases(geometry, direction))


@dataclass(frozen=True)
class BeamGrid:
    """Codebook of beam directions.

    Beam ``b`` sits on elevation row ``b // n_az`` and azimuth column
    ``b % n_az``.
    """

    beams: tuple[Direction, ...]
    n_az: int
    n_el: int
    az_range_deg: tuple[float, float] = (-60.0, 60.0)
    el_range_deg: tuple[float, float] = (-12.5, 12.5)

    def __post_init__(self):
        if len(self.beams) != self.n_az * self.n_el:
            raise ValueError(
                f"grid holds {len(self.beams)} beams, expected {self.n_az} x {self.n_el}"
            )

    def __len__(self) -> int:
        return len(self.beams)

    def row_of(self, beam_id: int) -> int:
        return int(beam_id) // self.n_az

    def col_of(self, beam_id: int) -> int:
        return int(beam_id) % self.n_az

    def check_beam(self, beam_id: int) -> None:
        if not 0 <= int(beam_id) < len(self.beams):
            raise ValueError(f"beam id {beam_id} outside grid of {len(self.beams)} beams")

    @classmethod
    def from_directions(cls, directions: Sequence[Direction]) -> "BeamGrid":
        """Ad hoc single-row grid, e.g. for continuous-angle sampling."""
        directions = tuple(directions)
        return cls(beams=directions, n_az=len(directions), n_el=1)


def _bin_centers(n: int, lo: float, hi: float) -> np.ndarray:
    width = (hi - lo) / n
    return lo + width * (np.arange(n) + 0.5)


def build_beam_grid(
    n_az: int = 18,
    n_el: int = 7,
    az_range_deg: tuple[float, float] = (-60.0, 60.0),
    el_range_deg: tuple[float, float] = (-12.5, 12.5),
) -> BeamGrid:
    """Uniform beam grid with beams at the centers of equal angular bins.

    The defaults give the 126-beam codebook: 18 azimuth beams over 120
    degrees and 7 elevation beams over 25 degrees.
    """
    if n_az < 1 or n_el < 1:
        raise ValueError(f"beam counts must be >= 1, got n_az={n_az}, n_el={n_el}")
    az_lo, az_hi = (float(x) for x in az_range_deg)
    el_lo, el_hi = (float(x) for x in el_range_deg)
    if not az_lo < az_hi:
        raise ValueError(f"azimuth range must be increasing, got {az_range_deg}")
    if not el_lo < el_hi:
        raise ValueError(f"elevation range must be increasing, got {el_range_deg}")
    if min(az_lo, el_lo) < -90.0 or max(az_hi, el_hi) > 90.0:
        raise ValueError("scan ranges must lie within [-90, 90] degrees")

    az = _bin_centers(n_az, az_lo, az_hi)
    el = _bin_centers(n_el, el_lo, el_hi)
    beams = tuple(Direction(float(a), float(e)) for e in el for a in az)
    return BeamGrid(
        beams=beams,
        n_az=n_az,
        n_el=n_el,
        az_range_deg=(az_lo, az_hi),
        el_range_deg=(el_lo, el_hi),
    )
