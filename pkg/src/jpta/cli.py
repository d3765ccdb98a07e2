"""``jpta`` command line: design, eval, sysim and plot.

Exit codes: 0 on success, 2 on usage or validation errors (one-line
diagnostic on stderr), 3 when a solver hits a numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from jpta import formats, plotting
from jpta.carrier import make_subband_plan
from jpta.metrics import gain_profile, monte_carlo_multi, summarize
from jpta.solvers import (
    Algorithm,
    Architecture,
    NumericalFailure,
    SolverOptions,
    quantize_phases,
    solve,
)
from jpta.sysim import DEFAULT_LOSS_TABLE_DB, Mode, SnrModel, UtRecord, compare_modes

EVAL_HEADER = ("arch", "n_beams", "algorithm", "p90_db", "mean_db", "max_delay_ns", "n_samples", "seed")
SAMPLES_HEADER = ("arch", "n_beams", "algorithm", "sample", "effective_loss_db", "max_delay_ns")
SYSIM_HEADER = ("n_pool", "n_max", "mode", "mean_tput", "p05_tput", "gain_mean", "gain_p05", "seed")
PATTERN_HEADER = ("subcarrier_index", "freq_hz", "subband", "gain_db")


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _seed_list(text: str) -> list[int]:
    """``a..b`` (inclusive) or a comma list."""
    if ".." in text:
        lo, _, hi = text.partition("..")
        try:
            lo_i, hi_i = int(lo), int(hi)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad seed range {text!r}") from None
        if hi_i < lo_i:
            raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
        return list(range(lo_i, hi_i + 1))
    return _int_list(text)


def _loss_spec(text: str) -> dict[int, float]:
    """``2=1.0,3=1.8`` style table; entry 1 defaults to 0."""
    table = {1: 0.0}
    for item in text.split(","):
        key, sep, value = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"loss entry {item!r} is not n=dB")
        try:
            table[int(key)] = float(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"loss entry {item!r} is not n=dB") from None
    return table


def _bits(text: str) -> int | None:
    if text.lower() in ("none", "0", "off"):
        return None
    value = int(text)
    if not 1 <= value <= 16:
        raise argparse.ArgumentTypeError("phase bits must lie in [1, 16] (or 'none')")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jpta", description="Joint phase-time array design and evaluation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("design", help="design delays and phases for a set of beams")
    d.add_argument("--beams", type=_int_list, required=True, help="beam ids, one per subband")
    d.add_argument("--splits", type=_int_list, help="subcarriers per subband (default: equal)")
    d.add_argument("--arch", choices=[a.value for a in Architecture], default="3d")
    d.add_argument("--solver", choices=[a.value for a in Algorithm], default="ls")
    d.add_argument("--bits", type=_bits, default=None, help="phase bits (default: continuous)")
    d.add_argument("--config", type=Path)
    d.add_argument("--out", type=Path, required=True)
    d.add_argument("--pattern", type=Path)

    e = sub.add_parser("eval", help="Monte Carlo beam gain loss statistics")
    e.add_argument("--arch", choices=[a.value for a in Architecture], required=True)
    e.add_argument("--nbeams", type=int, required=True)
    e.add_argument("--solver", choices=[a.value for a in Algorithm], required=True)
    e.add_argument("--trials", type=int, default=2000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--bits", type=_bits, default=6, help="phase bits (default 6, 'none' = continuous)")
    e.add_argument("--sampling", choices=["grid", "continuous"], default="grid")
    e.add_argument("--workers", type=int)
    e.add_argument("--config", type=Path)
    e.add_argument("--out", type=Path, required=True)
    e.add_argument("--samples", type=Path, help="also write per-sample losses")
    e.add_argument("--plot", type=Path, help="also render the loss CDF as SVG")

    s = sub.add_parser("sysim", help="round-robin throughput comparison")
    s.add_argument("--pools", type=_int_list, help="N_pool values")
    s.add_argument("--nmaxes", type=_int_list, required=True, help="N_max values")
    s.add_argument("--slots", type=int, help="slots per run (default 10 x N_pool)")
    s.add_argument("--seeds", type=_seed_list, default=[0], help="a..b or a,b,c")
    s.add_argument("--modes", default="ao,3d", help="JPTA modes to compare with the baseline")
    s.add_argument("--pool-csv", type=Path, help="fixed pool: ut_id,beam_id,snr_linear[,bandwidth_hz]")
    s.add_argument("--loss-db", type=_loss_spec, help="loss table shared by all modes, e.g. 2=1,3=2,4=3")
    s.add_argument("--config", type=Path)
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--plot", type=Path, help="also render the gain bars as SVG")

    p = sub.add_parser("plot", help="render an eval-samples or sysim CSV as SVG")
    p.add_argument("--in", dest="inp", type=Path, required=True)
    p.add_argument("--kind", choices=["gain-bars", "loss-cdf"], required=True)
    p.add_argument("--out", type=Path, required=True)
    return parser


def _config(path: Path | None) -> formats.RunConfig:
    return formats.load_config(path) if path is not None else formats.RunConfig()


def _options(cfg: formats.RunConfig, algorithm: str) -> SolverOptions:
    return SolverOptions(
        algorithm=Algorithm(algorithm),
        max_iters=cfg.solver.max_iters,
        gd_step=cfg.solver.gd_step,
        backtrack_factor=cfg.solver.backtrack_factor,
        epsilon_gain=cfg.solver.epsilon_gain,
        tol=cfg.solver.tol,
    )


def cmd_design(args) -> None:
    cfg = _config(args.config)
    grid = cfg.grid.build()
    plan = make_subband_plan(cfg.carrier, args.beams, args.splits)
    bits = args.bits if args.bits is not None else cfg.phase_bits
    sol = solve(plan, grid, cfg.array, args.arch, cfg.carrier, _options(cfg, args.solver))
    if bits is not None:
        sol = quantize_phases(sol, bits)
    extra = {"beam_ids": list(plan.beam_ids), "boundaries": list(plan.boundaries)}
    formats.save_solution(args.out, sol, extra)
    if args.pattern is not None:
        prof = gain_profile(sol, plan, grid, cfg.array, cfg.carrier)
        freqs = cfg.carrier.frequencies(prof.indices)
        rows = zip(prof.indices, freqs, prof.subbands, prof.gains_db)
        formats.write_csv(args.pattern, PATTERN_HEADER, rows)


def cmd_eval(args) -> None:
    cfg = _config(args.config)
    if not 1 <= args.nbeams <= 4:
        raise UsageError("--nbeams must lie in [1, 4]")
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    alg = Algorithm(args.solver)
    samples = monte_carlo_multi(
        args.arch, args.nbeams, [alg], args.trials, args.seed,
        geometry=cfg.array, grid=cfg.grid.build(), config=cfg.carrier,
        options=_options(cfg, args.solver), phase_bits=args.bits,
        sampling=args.sampling, workers=args.workers,
    )[alg]
    s = summarize(samples)
    row = (args.arch, args.nbeams, alg.value, s.p90_db, s.mean_db, s.max_delay_ns, s.n_samples, args.seed)
    formats.write_csv(args.out, EVAL_HEADER, [row])
    sample_rows = [
        (args.arch, args.nbeams, alg.value, i, x.effective_loss_db, x.max_delay_ns)
        for i, x in enumerate(samples)
    ]
    if args.samples is not None:
        formats.write_csv(args.samples, SAMPLES_HEADER, sample_rows)
    if args.plot is not None:
        formats.atomic_write(args.plot, plotting.loss_cdf_svg(_as_read(SAMPLES_HEADER, sample_rows)))


def _as_read(header, rows) -> list[dict[str, str]]:
    """Rows as the plot command would read them back from the written CSV."""
    return [dict(zip(header, (formats.format_number(v) for v in r))) for r in rows]


def _read_pool(path: Path, bandwidth_hz: float) -> list[UtRecord]:
    rows = formats.read_csv(path, ("ut_id", "beam_id", "snr_linear"))
    try:
        return [
            UtRecord(
                ut_id=int(r["ut_id"]),
                beam_id=int(r["beam_id"]),
                snr_linear=float(r["snr_linear"]),
                bandwidth_hz=float(r.get("bandwidth_hz") or bandwidth_hz),
            )
            for r in rows
        ]
    except ValueError as exc:
        raise formats.FormatError(f"{path}: {exc}") from None


def cmd_sysim(args) -> None:
    cfg = _config(args.config)
    grid = cfg.grid.build()
    sim = cfg.sim
    modes = [Mode(m) for m in args.modes.split(",") if m]
    pool = None
    if args.pool_csv is not None:
        pool = _read_pool(args.pool_csv, sim.bandwidth_hz)
        for u in pool:
            grid.check_beam(u.beam_id)
        pools = [len(pool)]
    elif args.pools is None:
        raise UsageError("--pools is required without --pool-csv")
    else:
        pools = args.pools
    if min(pools) < 1 or min(args.nmaxes) < 1:
        raise UsageError("pool sizes and N_max must be >= 1")
    if args.loss_db is not None:
        table = args.loss_db
    elif sim.loss_table_db is not None:
        table = sim.loss_table_db
    else:
        table = DEFAULT_LOSS_TABLE_DB
    rows = compare_modes(
        pools, args.nmaxes, args.seeds, modes,
        n_slots=args.slots if args.slots is not None else sim.n_slots,
        loss_table_db=table, pool_override=pool, grid=grid,
        beams_cap=sim.beams_cap, snr_model=SnrModel(sim.snr_low_db, sim.snr_high_db),
        bandwidth_hz=sim.bandwidth_hz,
    )
    out = [
        (r.n_pool, r.n_max, r.mode.value, r.report.mean, r.report.p05,
         r.report.gain_vs_baseline_mean, r.report.gain_vs_baseline_p05, r.seed)
        for r in rows
    ]
    formats.write_csv(args.out, SYSIM_HEADER, out)
    if args.plot is not None:
        formats.atomic_write(args.plot, plotting.gain_bars_svg(_as_read(SYSIM_HEADER, out)))


def cmd_plot(args) -> None:
    if args.kind == "gain-bars":
        rows = formats.read_csv(args.inp, plotting.GAIN_BAR_COLUMNS)
        svg = plotting.gain_bars_svg(rows)
    else:
        rows = formats.read_csv(args.inp, plotting.LOSS_CDF_COLUMNS)
        svg = plotting.loss_cdf_svg(rows)
    formats.atomic_write(args.out, svg)


COMMANDS = {"design": cmd_design, "eval": cmd_eval, "sysim": cmd_sysim, "plot": cmd_plot}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args)
    except NumericalFailure as exc:
        print(f"jpta: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, IndexError, OSError) as exc:
        msg = str(exc).replace("\n", " ") or type(exc).__name__
        print(f"jpta: error: {msg}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
