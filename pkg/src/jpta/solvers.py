"""Delay/phase design for frequency-selective analog beams.

Three solvers share one parameterization: a delay per delay element and a
phase per antenna, giving the equivalent per-subcarrier precoder
``p_k[m] = exp(j (2 pi f_k tau(m) + phi_m))``.

* ``solve_ls``: per delay element, unwrap the target phase across the
  design grid and fit a straight line in frequency.
* ``solve_iterative``: alternate between the best common phase per
  subcarrier and a line refit against the rotated targets.
* ``solve_gd``: gradient ascent on the summed log beam gain with a
  backtracking step, started from the better of the two designs above.
"""

from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from jpta.carrier import CarrierConfig, SubbandPlan, design_indices
from jpta.geometry import ArrayGeometry, BeamGrid, steering_phases, steering_vector

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


class AoPreconditionError(ValueError):
    """Azimuth-only design requested for beams on different elevation rows."""


class NumericalFailure(ArithmeticError):
    """The optimizer produced a non-finite objective."""


class Architecture(str, enum.Enum):
    THREE_D = "3d"
    AZIMUTH_ONLY = "ao"

    def n_delays(self, geometry: ArrayGeometry) -> int:
        if self is Architecture.THREE_D:
            return geometry.n_elements
        return geometry.n_cols

    def delay_index(self, geometry: ArrayGeometry) -> np.ndarray:
        """Delay element driving each antenna, row-major."""
        if self is Architecture.THREE_D:
            return np.arange(geometry.n_elements)
        return geometry.element_cols()


class Algorithm(str, enum.Enum):
    LS = "ls"
    ITERATIVE = "iter"
    GD = "gd"


@dataclass(frozen=True)
class SolverOptions:
    algorithm: Algorithm = Algorithm.LS
    max_iters: int | None = None
    gd_step: float = 0.1
    backtrack_factor: float = 0.5
    epsilon_gain: float = 1e-9
    tol: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if self.max_iters is not None and (int(self.max_iters) != self.max_iters or self.max_iters < 1):
            raise ValueError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        if not self.gd_step > 0:
            raise ValueError("gd_step must be > 0")
        if not 0 < self.backtrack_factor < 1:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if not self.epsilon_gain > 0:
            raise ValueError("epsilon_gain must be > 0")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")

    @property
    def iterations(self) -> int:
        if self.max_iters is not None:
            return int(self.max_iters)
        return 200 if self.algorithm is Algorithm.GD else 50


@dataclass(frozen=True, eq=False)
class DelayPhaseSolution:
    """Delays in seconds (one per delay element) and phases in radians (one per antenna)."""

    taus: np.ndarray
    phis: np.ndarray
    architecture: Architecture
    phase_bits: int | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "architecture", Architecture(self.architecture))
        object.__setattr__(self, "taus", np.asarray(self.taus, dtype=float))
        object.__setattr__(self, "phis", np.asarray(self.phis, dtype=float))

    @property
    def delay_spread(self) -> float:
        """max - min delay in seconds."""
        return float(self.taus.max() - self.taus.min())

    def check(self, geometry: ArrayGeometry) -> None:
        n_tau = self.architecture.n_delays(geometry)
        if self.taus.shape != (n_tau,):
            raise ValueError(
                f"{self.architecture.value} solution needs {n_tau} delays, got {self.taus.shape}"
            )
        if self.phis.shape != (geometry.n_elements,):
            raise ValueError(
                f"solution needs {geometry.n_elements} phases, got {self.phis.shape}"
            )


def _cis(phase: np.ndarray) -> np.ndarray:
    """exp(j phase); filling real and imaginary parts is faster than complex exp."""
    out = np.empty(phase.shape, dtype=complex)
    out.real = np.cos(phase)
    out.imag = np.sin(phase)
    return out


def _wrap(x):
    """Map angles onto [-pi, pi); an exact tie goes to -pi."""
    return x - TWO_PI * np.floor(x / TWO_PI + 0.5)


def unwrap_phases(phases: np.ndarray, axis: int = 0) -> np.ndarray:
    """Greedy unwrap: each sample takes the 2 pi branch nearest its predecessor."""
    phases = np.asarray(phases, dtype=float)
    d = np.diff(phases, axis=axis)
    corr = np.cumsum(_wrap(d) - d, axis=axis)
    out = phases.copy()
    sl = [slice(None)] * phases.ndim
    sl[axis] = slice(1, None)
    out[tuple(sl)] += corr
    return out


def best_branches(freqs: np.ndarray, y: np.ndarray, subbands: np.ndarray) -> np.ndarray:
    """Shift whole subbands of ``y`` by multiples of 2 pi to best fit a line.

    ``y`` (K, N) is already unwrapped; subband ``s >= 1`` and all later ones
    may move by -2 pi, 0 or +2 pi relative to their predecessor.  The
    combination with the smallest line-fit residual is kept per column;
    ties go to the first combination in enumeration order.
    """
    n_sub = int(subbands.max()) + 1
    if n_sub < 2:
        return y
    basis = np.column_stack([np.ones_like(freqs), freqs - freqs.mean()])
    q, _ = np.linalg.qr(basis)
    steps = np.stack([(subbands >= s).astype(float) for s in range(1, n_sub)], axis=1)
    p_steps = steps - q @ (q.T @ steps)
    p_y = y - q @ (q.T @ y)
    gram = p_steps.T @ p_steps
    cross = p_steps.T @ p_y
    combos = np.array(list(itertools.product((0, -1, 1), repeat=n_sub - 1)), dtype=float)
    quad = np.einsum("ci,ij,cj->c", combos, gram, combos)
    # residual(n) - residual(0) = 4 pi n.cross + 4 pi^2 n^T gram n
    cost = 2.0 * TWO_PI * (combos @ cross) + TWO_PI**2 * quad[:, None]
    choice = combos[np.argmin(cost, axis=0)]
    return y + TWO_PI * steps @ choice.T


def fit_phase_lines(
    freqs: np.ndarray, phases: np.ndarray, subbands: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares phase-versus-frequency line per column of ``phases``.

    ``phases`` has shape ``(K, N)`` over the ``K`` frequencies.  Returns
    delays ``slope / 2 pi`` in seconds and intercepts reduced to [0, 2 pi).
    With ``subbands`` given, the 2 pi branch at each subband boundary is
    chosen by :func:`best_branches` instead of greedily.
    """
    freqs = np.asarray(freqs, dtype=float)
    y = unwrap_phases(phases, axis=0)
    if subbands is not None:
        y = best_branches(freqs, y, np.asarray(subbands))
    return _line_fit(freqs, y)


def _line_fit(freqs: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fit already-unwrapped phases ``y`` (K, N); returns delays and intercepts."""
    f_mean = freqs.mean()
    x = freqs - f_mean
    sxx = float(x @ x)
    if sxx == 0.0:
        raise ValueError("line fit needs at least two distinct design frequencies")
    y_mean = y.mean(axis=0)
    slope = x @ (y - y_mean) / sxx
    intercept = y_mean - slope * f_mean
    return slope / TWO_PI, np.mod(intercept, TWO_PI)


@dataclass(frozen=True, eq=False)
class DesignProblem:
    """Target weights sampled on the design grid."""

    freqs: np.ndarray  # (K,)
    subbands: np.ndarray  # (K,)
    targets: np.ndarray  # (K, M) unit modulus
    delay_index: np.ndarray  # (M,)
    architecture: Architecture
    geometry: ArrayGeometry
    elevation_phases: np.ndarray | None = None  # (n_rows,), azimuth-only
    aperture_phases: np.ndarray | None = None  # (K, M) unwrapped across the aperture

    @property
    def n_delays(self) -> int:
        return self.architecture.n_delays(self.geometry)

    def precoders(self, taus: np.ndarray, phis: np.ndarray) -> np.ndarray:
        phase = TWO_PI * self.freqs[:, None] * taus[self.delay_index][None, :] + phis[None, :]
        return _cis(phase)


def _beam_directions(plan: SubbandPlan, grid: BeamGrid):
    for b in plan.beam_ids:
        grid.check_beam(b)
    return [grid.beams[b] for b in plan.beam_ids]


def _check_ao(plan: SubbandPlan, grid: BeamGrid) -> None:
    rows = {grid.row_of(b) for b in plan.beam_ids}
    elevations = {grid.beams[b].elevation_deg for b in plan.beam_ids}
    if len(rows) > 1 or len(elevations) > 1:
        raise AoPreconditionError(
            f"azimuth-only JPTA needs all beams on one elevation row; beams {list(plan.beam_ids)} "
            f"span rows {sorted(rows)}"
        )


def design_problem(
    plan: SubbandPlan,
    grid: BeamGrid,
    geometry: ArrayGeometry,
    architecture: Architecture,
    config: CarrierConfig,
) -> DesignProblem:
    architecture = Architecture(architecture)
    directions = _beam_directions(plan, grid)
    elevation_phases = None
    if architecture is Architecture.AZIMUTH_ONLY:
        _check_ao(plan, grid)
        v = directions[0].v
        elevation_phases = -TWO_PI * geometry.spacing_wavelengths * np.arange(geometry.n_rows) * v
    idx = design_indices(plan, config)
    beams = np.stack([steering_vector(geometry, d) for d in directions])
    # Gains ignore a common phase per subcarrier, so every target is
    # referenced to element 0; this leaves true steering vectors unchanged.
    beams = beams * (beams[:, :1].conj() / np.abs(beams[:, :1]))
    sub = plan.subband_of(idx)
    # Unwrapping across the aperture instead of per element: between
    # consecutive beams the element phases move by r * dv + c * du with
    # the wrapped per-row and per-column steps, which keeps the delay
    # progression linear over the array.
    d = TWO_PI * geometry.spacing_wavelengths
    rows, cols = geometry.element_rows(), geometry.element_cols()
    phases = [steering_phases(geometry, directions[0])]
    for prev, cur in zip(directions, directions[1:]):
        du = _wrap(-d * (cur.u - prev.u))
        dv = _wrap(-d * (cur.v - prev.v))
        phases.append(phases[-1] + rows * dv + cols * du)
    return DesignProblem(
        freqs=config.frequencies(idx),
        subbands=sub,
        targets=beams[sub],
        delay_index=architecture.delay_index(geometry),
        architecture=architecture,
        geometry=geometry,
        elevation_phases=elevation_phases,
        aperture_phases=np.stack(phases)[sub],
    )


def target_weights(
    plan: SubbandPlan, grid: BeamGrid, geometry: ArrayGeometry, k: int
) -> np.ndarray:
    """Desired weights at subcarrier ``k``: the steering vector of its subband's beam."""
    if not 0 <= k < plan.n_sc:
        raise IndexError(f"subcarrier {k} outside [0, {plan.n_sc})")
    beam = plan.beam_ids[plan.subband_of(k)]
    grid.check_beam(beam)
    return steering_vector(geometry, grid.beams[beam])


def equivalent_precoder(
    solution: DelayPhaseSolution, geometry: ArrayGeometry, f_k: float
) -> np.ndarray:
    """Per-antenna weights ``exp(j (2 pi f_k tau(m) + phi_m))`` at frequency ``f_k``."""
    return precoder_matrix(solution, geometry, np.array([f_k]))[0]


def precoder_matrix(
    solution: DelayPhaseSolution, geometry: ArrayGeometry, freqs: np.ndarray
) -> np.ndarray:
    """Equivalent precoders stacked over ``freqs``, shape ``(K, M)``."""
    solution.check(geometry)
    taus = solution.taus[solution.architecture.delay_index(geometry)]
    phase = TWO_PI * np.asarray(freqs, dtype=float)[:, None] * taus[None, :] + solution.phis[None, :]
    return _cis(phase)


def _fit(
    problem: DesignProblem, targets: np.ndarray, branch_search: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Line fit of every delay element against ``targets`` (K, M)."""
    sub = problem.subbands if branch_search else None
    if problem.architecture is Architecture.THREE_D:
        return fit_phase_lines(problem.freqs, np.angle(targets), sub)
    g = problem.geometry
    elev = problem.elevation_phases
    derot = targets.reshape(-1, g.n_rows, g.n_cols) * np.exp(-1j * elev)[None, :, None]
    col_phase = np.angle(derot.sum(axis=1))
    taus, phi_az = fit_phase_lines(problem.freqs, col_phase, sub)
    phis = np.mod(elev[:, None] + phi_az[None, :], TWO_PI).ravel()
    return taus, phis


def _aperture_start(problem: DesignProblem) -> DelayPhaseSolution:
    """Line fit to the aperture-unwrapped target phases."""
    y = problem.aperture_phases
    g = problem.geometry
    if problem.architecture is Architecture.THREE_D:
        taus, phis = _line_fit(problem.freqs, y)
    else:
        # row 0 carries no elevation phase, so its columns are the azimuth part
        taus, phi_az = _line_fit(problem.freqs, y[:, : g.n_cols])
        phis = np.mod(problem.elevation_phases[:, None] + phi_az[None, :], TWO_PI).ravel()
    return DelayPhaseSolution(_normalized(taus), phis, problem.architecture)


def _normalized(taus: np.ndarray) -> np.ndarray:
    return taus - taus.min()


def _squared_error(problem: DesignProblem, taus: np.ndarray, phis: np.ndarray) -> float:
    """Sum over k, m of |p_k[m] - exp(j a_k) w_k[m]|^2 at the best common phases a_k."""
    corr = np.abs(np.sum(problem.targets.conj() * problem.precoders(taus, phis), axis=1))
    return float(np.sum(2.0 * (problem.targets.shape[1] - corr)))


def _ls(problem: DesignProblem) -> DelayPhaseSolution:
    taus, phis = _fit(problem, problem.targets)
    return DelayPhaseSolution(_normalized(taus), phis, problem.architecture)


def solve_ls(
    plan: SubbandPlan,
    grid: BeamGrid,
    geometry: ArrayGeometry,
    architecture: Architecture,
    config: CarrierConfig,
) -> DelayPhaseSolution:
    """Closed-form design: unwrap each element's target phase and fit a line."""
    problem = design_problem(plan, grid, geometry, architecture, config)
    sol = _ls(problem)
    sol.info.update(algorithm="ls", objective=_squared_error(problem, sol.taus, sol.phis))
    return sol


def _iterate(problem: DesignProblem, max_iters: int, tol: float):
    init = _ls(problem)
    taus, phis = init.taus, init.phis
    obj = _squared_error(problem, taus, phis)
    best = (obj, taus, phis)
    n_iter = 0
    for n_iter in range(1, max_iters + 1):
        corr = np.sum(problem.targets.conj() * problem.precoders(taus, phis), axis=1)
        rotated = problem.targets * np.exp(1j * np.angle(corr))[:, None]
        taus, phis = _fit(problem, rotated, branch_search=True)
        taus = _normalized(taus)
        new_obj = _squared_error(problem, taus, phis)
        if new_obj < best[0]:
            best = (new_obj, taus, phis)
        if obj - new_obj < tol * max(1.0, abs(obj)):
            break
        obj = new_obj
    return best, n_iter


def solve_iterative(
    plan: SubbandPlan,
    grid: BeamGrid,
    geometry: ArrayGeometry,
    architecture: Architecture,
    config: CarrierConfig,
    options: SolverOptions | None = None,
) -> DelayPhaseSolution:
    """Alternating minimization with a free common phase per subcarrier.

    Each round sets every subcarrier's common phase to
    ``arg(w_k^H p_k)``, rotates the targets by it and refits the delay
    lines, choosing the 2 pi branch of each subband per element for the
    best fit.  Starts at the LS point and returns the best iterate, so the
    squared error never exceeds the LS one.
    """
    options = options or SolverOptions(algorithm=Algorithm.ITERATIVE)
    problem = design_problem(plan, grid, geometry, architecture, config)
    (obj, taus, phis), n_iter = _iterate(problem, options.iterations, options.tol)
    sol = DelayPhaseSolution(taus, phis, problem.architecture)
    sol.info.update(algorithm="iter", objective=obj, iterations=n_iter)
    return sol


class _LogGainObjective:
    """Summed log beam gain over the design grid in normalized coordinates.

    Coordinates are ``[t, phi]`` with ``t = 2 pi f_scale sqrt(R) tau``,
    ``f_scale`` the largest design frequency magnitude and ``R`` the
    number of antennas per delay element.  Both blocks then move the
    precoder phases by comparable amounts per unit step.
    """

    def __init__(self, problem: DesignProblem, epsilon: float):
        self.problem = problem
        self.eps = epsilon
        self.conj_targets = problem.targets.conj()
        self.n_delays = problem.n_delays
        self.n_ant = problem.targets.shape[1]
        share = self.n_ant // self.n_delays
        self.f_scale = float(np.max(np.abs(problem.freqs))) or 1.0
        self.tau_scale = TWO_PI * self.f_scale * np.sqrt(share)
        self.f_rel = problem.freqs / self.f_scale

    def to_x(self, taus: np.ndarray, phis: np.ndarray) -> np.ndarray:
        return np.concatenate([taus * self.tau_scale, phis])

    def from_x(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return x[: self.n_delays] / self.tau_scale, x[self.n_delays:]

    def _parts(self, x):
        taus, phis = self.from_x(x)
        z = self.conj_targets * self.problem.precoders(taus, phis)
        c = z.sum(axis=1) / self.n_ant
        g = c.real**2 + c.imag**2
        return z, c, g

    def value(self, x: np.ndarray) -> float:
        _, _, g = self._parts(x)
        return float(np.sum(np.log(g + self.eps)))

    def value_and_grad(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        z, c, g = self._parts(x)
        value = float(np.sum(np.log(g + self.eps)))
        # dJ/dphi_m = sum_k 2 Re(conj(c_k) j z_km / M) / (g_k + eps)
        t = (-2.0 / self.n_ant) * (c.conj()[:, None] * z).imag / (g + self.eps)[:, None]
        g_phi = t.sum(axis=0)
        g_tau_elem = self.f_rel @ t
        g_tau = np.bincount(
            self.problem.delay_index, weights=g_tau_elem, minlength=self.n_delays
        )
        share = self.n_ant // self.n_delays
        return value, np.concatenate([g_tau / np.sqrt(share), g_phi])


def log_gain_objective(
    plan: SubbandPlan,
    grid: BeamGrid,
    geometry: ArrayGeometry,
    architecture: Architecture,
    config: CarrierConfig,
    epsilon: float = 1e-9,
) -> _LogGainObjective:
    """The GD objective for a problem; exposes ``value``, ``value_and_grad``, ``to_x``."""
    return _LogGainObjective(design_problem(plan, grid, geometry, architecture, config), epsilon)


def _check_finite(value: float) -> float:
    if not np.isfinite(value):
        raise NumericalFailure(f"non-finite objective {value!r}")
    return value


def _ascend(
    obj: _LogGainObjective, x: np.ndarray, value: float, grad: np.ndarray, options: SolverOptions
) -> tuple[np.ndarray, float, int]:
    step = options.gd_step
    n_iter = 0
    for n_iter in range(1, options.iterations + 1):
        if not np.any(grad):
            break
        s = step
        while True:
            x_new = x + s * grad
            new_value = _check_finite(obj.value(x_new))
            if new_value >= value or s < 1e-12:
                break
            s *= options.backtrack_factor
        if new_value < value:
            break
        gain = new_value - value
        x = x_new
        value, grad = obj.value_and_grad(x)
        _check_finite(value)
        step = s / options.backtrack_factor
        if gain < options.tol * max(1.0, abs(value)):
            break
    return x, value, n_iter


def solve_all(
    plan: SubbandPlan,
    grid: BeamGrid,
    geometry: ArrayGeometry,
    architecture: Architecture,
    config: CarrierConfig,
    options: SolverOptions | None = None,
    algorithms=tuple(Algorithm),
) -> dict[Algorithm, DelayPhaseSolution]:
    """Run the requested solvers on one problem, sharing the common work.

    GD starts from the LS and iterative designs, so asking for all three
    costs about as much as GD alone.  Results are identical to calling
    each solver separately with the same options.
    """
    options = options or SolverOptions()
    wanted = {Algorithm(a) for a in algorithms}
    problem = design_problem(plan, grid, geometry, architecture, config)
    out: dict[Algorithm, DelayPhaseSolution] = {}

    ls = _ls(problem)
    ls.info.update(algorithm="ls", objective=_squared_error(problem, ls.taus, ls.phis))
    out[Algorithm.LS] = ls
    if wanted & {Algorithm.ITERATIVE, Algorithm.GD}:
        it_iters = options.max_iters if options.algorithm is Algorithm.ITERATIVE else None
        it_opts = SolverOptions(algorithm=Algorithm.ITERATIVE, max_iters=it_iters, tol=options.tol)
        (it_obj, it_taus, it_phis), n_iter = _iterate(problem, it_opts.iterations, it_opts.tol)
        it = DelayPhaseSolution(it_taus, it_phis, problem.architecture)
        it.info.update(algorithm="iter", objective=it_obj, iterations=n_iter)
        out[Algorithm.ITERATIVE] = it
    if Algorithm.GD in wanted:
        gd_opts = options if options.algorithm is Algorithm.GD else replace(
            options, algorithm=Algorithm.GD, max_iters=None
        )
        out[Algorithm.GD] = _gd(problem, gd_opts, ls, out[Algorithm.ITERATIVE])
    return {a: out[a] for a in Algorithm if a in wanted}


def _gd(
    problem: DesignProblem,
    options: SolverOptions,
    ls: DelayPhaseSolution,
    it: DelayPhaseSolution,
    init: DelayPhaseSolution | None = None,
) -> DelayPhaseSolution:
    obj = _LogGainObjective(problem, options.epsilon_gain)
    x, value, grad, start = None, -np.inf, None, None
    starts = [("ls", ls), ("iter", it), ("aperture", _aperture_start(problem))]
    if init is not None:
        starts.append(("init", init))
    ls_value = None
    for name, cand in starts:
        cand.check(problem.geometry)
        x_c = obj.to_x(cand.taus, cand.phis)
        value_c, grad_c = obj.value_and_grad(x_c)
        _check_finite(value_c)
        if ls_value is None:
            ls_value = value_c
        if value_c > value:
            x, value, grad, start = x_c, value_c, grad_c, name
    start_value = value
    x, value, n_iter = _ascend(obj, x, value, grad, options)
    taus, phis = obj.from_x(x)
    sol = DelayPhaseSolution(_normalized(taus), np.mod(phis, TWO_PI), problem.architecture)
    sol.info.update(
        algorithm="gd",
        objective=value,
        initial_objective=start_value,
        ls_objective=ls_value,
        start=start,
        iterations=n_iter,
    )
    return sol


def solve_gd(
    plan: SubbandPlan,
    grid: BeamGrid,
    geometry: ArrayGeometry,
    architecture: Architecture,
    config: CarrierConfig,
    options: SolverOptions | None = None,
    init: DelayPhaseSolution | None = None,
) -> DelayPhaseSolution:
    """Gradient ascent on ``sum_k log(g_k + eps)``.

    ``g_k = |w_k^H p_k|^2 / M^2`` is the normalized beam gain, so the
    objective is the dB-averaged gain up to scale.  The ascent starts from
    the highest-scoring of the LS design, the iterative design, a line fit
    to the aperture-unwrapped targets and ``init`` (if given), so the
    result never scores below any of them.  A step is accepted only if it
    does not lower the objective; otherwise it is shrunk by
    ``backtrack_factor``.
    """
    options = options or SolverOptions(algorithm=Algorithm.GD)
    if options.algorithm is not Algorithm.GD:
        options = replace(options, algorithm=Algorithm.GD)
    if init is None:
        return solve_all(plan, grid, geometry, architecture, config, options, (Algorithm.GD,))[
            Algorithm.GD
        ]
    sols = solve_all(
        plan, grid, geometry, architecture, config, options, (Algorithm.LS, Algorithm.ITERATIVE)
    )
    problem = design_problem(plan, grid, geometry, architecture, config)
    return _gd(problem, options, sols[Algorithm.LS], sols[Algorithm.ITERATIVE], init)


def solve(
    plan: SubbandPlan,
    grid: BeamGrid,
    geometry: ArrayGeometry,
    architecture: Architecture,
    config: CarrierConfig,
    options: SolverOptions | None = None,
) -> DelayPhaseSolution:
    """Dispatch on ``options.algorithm`` (LS when no options are given)."""
    options = options or SolverOptions()
    if options.algorithm is Algorithm.LS:
        return solve_ls(plan, grid, geometry, architecture, config)
    if options.algorithm is Algorithm.ITERATIVE:
        return solve_iterative(plan, grid, geometry, architecture, config, options)
    return solve_gd(plan, grid, geometry, architecture, config, options)


def quantize_phases(solution: DelayPhaseSolution, bits: int) -> DelayPhaseSolution:
    """Snap every phase to the nearest multiple of ``2 pi / 2**bits``.

    Ties go to the smaller multiple; delays are left untouched.
    """
    if int(bits) != bits or not 1 <= bits <= 16:
        raise ValueError(f"phase bits must be an integer in [1, 16], got {bits!r}")
    step = TWO_PI / 2**bits
    levels = np.ceil(solution.phis / step - 0.5)
    phis = np.mod(levels, 2**bits) * step
    return replace(solution, phis=phis, phase_bits=int(bits), info=dict(solution.info))


def quantize_delays(solution: DelayPhaseSolution, step_s: float) -> DelayPhaseSolution:
    """Uniform delay quantizer (nearest multiple of ``step_s``, ties down)."""
    if not step_s > 0:
        raise ValueError("delay step must be > 0")
    taus = np.ceil(solution.taus / step_s - 0.5) * step_s
    return replace(solution, taus=_normalized(taus), info=dict(solution.info))
