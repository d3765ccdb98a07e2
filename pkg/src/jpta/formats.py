"""File formats: solution JSON, run-config JSON and delimited tables.

Every writer goes through :func:`atomic_write`, so a crash never leaves a
half-written output behind.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from jpta.carrier import CarrierConfig
from jpta.geometry import ArrayGeometry, BeamGrid, build_beam_grid
from jpta.solvers import Architecture, DelayPhaseSolution, SolverOptions

SOLUTION_FORMAT = "jpta-solution/1"


class FormatError(ValueError):
    """Malformed input file."""


def atomic_write(path: str | os.PathLike, data: str | bytes) -> None:
    """Write to a temporary file in the target directory, then rename it into place."""
    path = Path(path)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def format_number(value: Any) -> str:
    """Six significant digits for floats, plain digits for integers."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".6g")
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) for v in row])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    atomic_write(path, render_csv(header, rows))


def read_csv(path, required: Sequence[str] = ()) -> list[dict[str, str]]:
    """Rows as dicts; raises FormatError on missing columns or an empty body."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise FormatError(f"{path}: empty file, no header")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise FormatError(f"{path}: missing required column(s) {', '.join(missing)}")
        rows = list(reader)
    if not rows:
        raise FormatError(f"{path}: no data rows")
    return rows


# -- solutions ---------------------------------------------------------------


def _plain(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    return value


def solution_to_dict(solution: DelayPhaseSolution, extra: Mapping[str, Any] | None = None) -> dict:
    """JSON-ready form; delays are nanosecond strings with six decimals."""
    out = {
        "format": SOLUTION_FORMAT,
        "architecture": solution.architecture.value,
        "taus_ns": [f"{t * 1e9:.6f}" for t in solution.taus],
        "phis_rad": [float(p) for p in solution.phis],
        "phase_bits": solution.phase_bits,
        "objective": _plain(dict(solution.info)),
    }
    if extra:
        out.update(_plain(dict(extra)))
    return out


def dumps_solution(solution: DelayPhaseSolution, extra: Mapping[str, Any] | None = None) -> str:
    return json.dumps(solution_to_dict(solution, extra), sort_keys=True, indent=1) + "\n"


def loads_solution(text: str) -> tuple[DelayPhaseSolution, dict]:
    """Parse a solution document; returns the solution and any extra keys."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"solution is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != SOLUTION_FORMAT:
        raise FormatError(f"not a {SOLUTION_FORMAT} document")
    try:
        taus = np.array([float(t) for t in doc["taus_ns"]]) * 1e-9
        phis = np.array([float(p) for p in doc["phis_rad"]])
        bits = doc["phase_bits"]
        sol = DelayPhaseSolution(
            taus=taus,
            phis=phis,
            architecture=Architecture(doc["architecture"]),
            phase_bits=None if bits is None else int(bits),
            info=dict(doc.get("objective", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad solution document: {exc}") from None
    known = {"format", "architecture", "taus_ns", "phis_rad", "phase_bits", "objective"}
    return sol, {k: v for k, v in doc.items() if k not in known}


def save_solution(path, solution: DelayPhaseSolution, extra: Mapping[str, Any] | None = None) -> None:
    atomic_write(path, dumps_solution(solution, extra))


def load_solution(path) -> tuple[DelayPhaseSolution, dict]:
    with open(path, encoding="utf-8") as fh:
        return loads_solution(fh.read())


# -- run configuration ---------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    n_az: int = 18
    n_el: int = 7
    az_range_deg: tuple[float, float] = (-60.0, 60.0)
    el_range_deg: tuple[float, float] = (-12.5, 12.5)

    def build(self) -> BeamGrid:
        return build_beam_grid(self.n_az, self.n_el, tuple(self.az_range_deg), tuple(self.el_range_deg))


@dataclass(frozen=True)
class SimSettings:
    n_slots: int | None = None
    beams_cap: int = 4
    snr_low_db: float = -10.0
    snr_high_db: float = 10.0
    bandwidth_hz: float = 25 * 120e3
    loss_table_db: dict | None = None


@dataclass(frozen=True)
class RunConfig:
    carrier: CarrierConfig = field(default_factory=CarrierConfig)
    array: ArrayGeometry = field(default_factory=ArrayGeometry)
    grid: GridSpec = field(default_factory=GridSpec)
    solver: SolverOptions = field(default_factory=SolverOptions)
    phase_bits: int | None = None
    sim: SimSettings = field(default_factory=SimSettings)


_SECTIONS = {
    "carrier": CarrierConfig,
    "array": ArrayGeometry,
    "grid": GridSpec,
    "solver": SolverOptions,
    "sim": SimSettings,
}


def _section(name: str, cls, body) -> Any:
    if not isinstance(body, dict):
        raise FormatError(f"config section {name!r} must be an object")
    allowed = {f.name for f in dataclasses.fields(cls)}
    if name == "solver":
        allowed.add("phase_bits")
    unknown = sorted(set(body) - allowed)
    if unknown:
        raise FormatError(f"config section {name!r}: unknown key(s) {', '.join(unknown)}")
    kwargs = {k: v for k, v in body.items() if k != "phase_bits"}
    for key in ("az_range_deg", "el_range_deg"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    if name == "sim" and kwargs.get("loss_table_db") is not None:
        kwargs["loss_table_db"] = _loss_table(kwargs["loss_table_db"])
    try:
        obj = cls(**kwargs)
        if name == "grid":
            obj.build()
        if name == "sim":
            if obj.snr_high_db < obj.snr_low_db:
                raise ValueError("snr_high_db must be >= snr_low_db")
            if not obj.bandwidth_hz > 0:
                raise ValueError("bandwidth_hz must be > 0")
    except (TypeError, ValueError) as exc:
        raise FormatError(f"config section {name!r}: {exc}") from None
    return obj


def _loss_table(raw) -> dict[int, float]:
    if not isinstance(raw, dict):
        raise FormatError("loss_table_db must map beam counts to dB losses")
    # a single beam is a plain phased array, so its entry defaults to 0 dB
    table = {1: 0.0}
    for k, v in raw.items():
        try:
            n, loss = int(k), float(v)
        except (TypeError, ValueError):
            raise FormatError(f"loss_table_db entry {k!r}: {v!r} is not numeric") from None
        if not math.isfinite(loss) or loss < 0:
            raise FormatError(f"loss_table_db[{n}] must be finite and >= 0")
        table[n] = loss
    return table


def parse_config(doc: Any) -> RunConfig:
    """Strict parse: unknown sections or keys are errors, missing ones take defaults."""
    if not isinstance(doc, dict):
        raise FormatError("config must be a JSON object")
    unknown = sorted(set(doc) - set(_SECTIONS))
    if unknown:
        raise FormatError(f"unknown config section(s) {', '.join(unknown)}")
    parts = {name: _section(name, cls, doc[name]) for name, cls in _SECTIONS.items() if name in doc}
    bits = doc.get("solver", {}).get("phase_bits")
    if bits is not None and (not isinstance(bits, int) or not 1 <= bits <= 16):
        raise FormatError("solver.phase_bits must be an integer in [1, 16] or null")
    return RunConfig(phase_bits=bits, **parts)


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from None
    return parse_config(doc)
