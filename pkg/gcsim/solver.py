import warnings
import numpy as np
from dataclasses import dataclass, field, replace
from scipy.linalg import lu_factor, lu_solve, LinAlgWarning

from gcsim.circuit import CircuitValidationError, initial_state, stamp_system, advance_state, extract_channels
from gcsim.elements.sources import SineVoltageSource, DCVoltageSource, DCCurrentSource, RAMP_SHAPES


class NonConvergenceError(RuntimeError):
    """
    Newton iteration failed. Carries the last residual norm, the iteration count and, once annotated by the
    transient loop, the time of the failing step.
    """
    def __init__(self, message, residual=None, iterations=None, time=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.time = time


class SingularJacobianError(NonConvergenceError):
    def __init__(self, message, pivot_index, residual=None, iterations=None, time=None):
        super().__init__(message, residual=residual, iterations=iterations, time=time)
        self.pivot_index = pivot_index


class TransientError(RuntimeError):
    """
    Failure in the middle of a transient run. `partial` holds the channels of every accepted step.
    """
    def __init__(self, message, partial=None, time=None):
        super().__init__(message)
        self.partial = partial
        self.time = time


@dataclass(frozen=True)
class SolverConfig:
    """
    Fixed-step trapezoidal integration with damped Newton-Raphson per step.

    Args:
        dt: Requested step in s. Runs snap it so that one source period is an integer number of steps.
        newton_tol_rel: Residual tolerance relative to the residual of the initial guess.
        newton_tol_abs: Absolute residual tolerance.
        max_newton_iters: Newton iterations allowed per step.
        max_halvings: Step halvings allowed when a full Newton step increases the residual.
        startup_ramp_cycles: Source periods over which dc sources ramp up.
        ramp_shape: "linear" or "smooth" (smootherstep). A linear ramp restarts the integration with one
            backward-Euler step after it ends.
        settle_cycles: Periods at full excitation before recording.
        analysis_cycles: Recorded periods.
        keep_full_waveforms: Also extract the channels of the entire run.
    """
    dt: float = 1e-5
    newton_tol_rel: float = 1e-9
    newton_tol_abs: float = 1e-12
    max_newton_iters: int = 50
    max_halvings: int = 8
    startup_ramp_cycles: int = 2
    ramp_shape: str = "linear"
    settle_cycles: int = 5
    analysis_cycles: int = 2
    keep_full_waveforms: bool = False

    def invalid_fields(self):
        bad = []
        for name in ("dt", "newton_tol_rel", "newton_tol_abs"):
            if not (np.isfinite(getattr(self, name)) and getattr(self, name) > 0):
                bad.append(name)
        for name in ("max_newton_iters", "startup_ramp_cycles", "settle_cycles", "analysis_cycles"):
            if getattr(self, name) < 1:
                bad.append(name)
        if self.max_halvings < 0:
            bad.append("max_halvings")
        if self.ramp_shape not in RAMP_SHAPES:
            bad.append("ramp_shape")
        return bad

    def __post_init__(self):
        bad = self.invalid_fields()
        if bad:
            raise ValueError("invalid solver settings: " + ", ".join(bad))

    def steps_per_cycle(self, frequency):
        return max(1, int(round(1.0 / (frequency * self.dt))))

    def effective_dt(self, frequency):
        return 1.0 / (frequency * self.steps_per_cycle(frequency))


@dataclass(frozen=True)
class SolverStats:
    iterations: np.ndarray
    residuals: np.ndarray

    @property
    def n_steps(self):
        return int(np.size(self.iterations))

    @property
    def max_iterations(self):
        return int(np.max(self.iterations)) if self.n_steps else 0

    @property
    def mean_iterations(self):
        return float(np.mean(self.iterations)) if self.n_steps else 0.0

    @property
    def max_residual(self):
        return float(np.max(self.residuals)) if self.n_steps else 0.0

    def to_dict(self):
        return {"steps": self.n_steps, "max_newton_iters": self.max_iterations,
                "mean_newton_iters": self.mean_iterations, "max_residual": self.max_residual}


@dataclass(frozen=True)
class TransientResult:
    """
    waveforms: Channels over the analysis window (analysis_cycles whole periods).
    full_waveforms: Channels over the entire run, or None.
    """
    waveforms: object
    full_waveforms: object
    solver_stats: SolverStats
    dt: float
    frequency: float
    steps_per_cycle: int
    circuit: object = field(default=None, repr=False)


def solve_linear(matrix, rhs, pivot_rtol=1e-14):
    """
    Dense LU solve that reports the first pivot below pivot_rtol times the inf-norm of its (permuted) row.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(matrix, check_finite=False)
    n = np.shape(matrix)[0]
    perm = np.arange(n)
    for k, p in enumerate(piv):
        perm[k], perm[p] = perm[p], perm[k]
    row_norms = np.max(np.abs(matrix), axis=1)[perm]
    small = np.where(np.abs(np.diag(lu)) <= pivot_rtol * row_norms)[0]
    if np.size(small):
        raise SingularJacobianError("singular Jacobian: pivot {0} is below {1} of its row norm".format(
            int(small[0]), pivot_rtol), pivot_index=int(small[0]))
    return lu_solve((lu, piv), rhs, check_finite=False)


def newton_solve(provider, x0, config=SolverConfig()):
    """
    Damped Newton-Raphson.

    Args:
        provider: Function x -> (residual F(x), Jacobian dF/dx).
        x0: Initial guess.
        config: SolverConfig (tolerances, iteration and halving limits).

    Returns:
        x: Solution with |F(x)| <= newton_tol_abs + newton_tol_rel |F(x0)|.
        iterations: Number of Newton updates applied.
        residual: |F(x)|.
    """
    x = np.array(x0, dtype=float, ndmin=1)
    res, jac = provider(x)
    res, jac = np.atleast_1d(res), np.atleast_2d(jac)
    norm_res = np.linalg.norm(res)
    tol = config.newton_tol_abs + config.newton_tol_rel * norm_res
    eps = np.finfo(float).eps

    for it in range(config.max_newton_iters + 1):
        if norm_res <= tol:
            return x, it, norm_res
        if it == config.max_newton_iters:
            break
        try:
            dx = solve_linear(jac, -res)
        except SingularJacobianError as e:
            e.residual, e.iterations = norm_res, it
            raise
        scale = 1.0
        for halving in range(config.max_halvings + 1):
            x_new = x + scale * dx
            res_new, jac_new = provider(x_new)
            res_new, jac_new = np.atleast_1d(res_new), np.atleast_2d(jac_new)
            norm_new = np.linalg.norm(res_new)
            if norm_new <= norm_res or halving == config.max_halvings:
                break
            scale /= 2
        stalled = np.linalg.norm(x_new - x) <= 8 * eps * np.linalg.norm(x_new)
        x, res, jac, norm_res = x_new, res_new, jac_new, norm_new
        if stalled and np.all(np.isfinite(res)):
            # update below machine precision of x: the residual is at its rounding floor
            return x, it + 1, norm_res

    raise NonConvergenceError("Newton did not converge in {0} iterations, residual {1:.6g} > {2:.6g}".format(
        config.max_newton_iters, norm_res, tol), residual=norm_res, iterations=config.max_newton_iters)


def _advance(circuit, state, config, dt):
    def provider(x):
        system = stamp_system(circuit, state, x, dt)
        return -system.rhs, system.matrix

    try:
        solution, iterations, residual = newton_solve(provider, state.unknowns, config)
    except NonConvergenceError as e:
        e.time = state.time + dt
        e.args = ("t={0:.9g} s: {1}".format(e.time, e.args[0]),)
        raise
    return advance_state(circuit, state, solution, dt), iterations, residual


def step(circuit, state, config=SolverConfig(), dt=None):
    """
    Advance the circuit by one step with trapezoidal companions (backward Euler on the first step of a fresh
    state) and Newton from the previous solution.

    Args:
        circuit: Valid Circuit.
        state: SystemState at the start of the step.
        config: SolverConfig.
        dt: Step size; config.dt if None.

    Returns:
        SystemState at state.time + dt.
    """
    return _advance(circuit, state, config, config.dt if dt is None else dt)[0]


def source_frequency(circuit):
    frequencies = sorted({e.frequency for e in circuit.elements if isinstance(e, SineVoltageSource)})
    if len(frequencies) == 0:
        raise ValueError("circuit has no sine source; pass frequency= to run_transient()")
    if len(frequencies) > 1:
        raise ValueError("sine sources at several frequencies {0}; pass frequency= to run_transient()".format(
            frequencies))
    return frequencies[0]


def default_schedule(circuit, ramp_time):
    """
    Ramp every dc source (voltage or current) over ramp_time.
    """
    return {e.label: ramp_time for e in circuit.elements if isinstance(e, (DCVoltageSource, DCCurrentSource))}


def run_transient(circuit, schedule=None, config=SolverConfig(), frequency=None):
    """
    Run the circuit to periodic steady state: dc sources ramp over startup_ramp_cycles, then settle_cycles at
    full excitation, then analysis_cycles are recorded.

    Args:
        circuit: Valid Circuit.
        schedule: Dict dc source label -> ramp time in s. Default: every dc source over startup_ramp_cycles.
        config: SolverConfig.
        frequency: Source frequency in Hz; taken from the sine source if None.

    Returns:
        TransientResult
    """
    if circuit.violations:
        raise CircuitValidationError(circuit.violations)
    frequency = source_frequency(circuit) if frequency is None else frequency
    spc = config.steps_per_cycle(frequency)
    dt = 1.0 / (frequency * spc)
    if schedule is None:
        schedule = default_schedule(circuit, config.startup_ramp_cycles / frequency)
    run_circuit = circuit.with_ramps(schedule, config.ramp_shape)
    # steps after which a linear ramp has ended
    breakpoints = {int(round(ramp / dt)) for ramp in schedule.values() if ramp} if config.ramp_shape == "linear" \
        else set()

    n_steps = (config.startup_ramp_cycles + config.settle_cycles + config.analysis_cycles) * spc
    iterations = np.zeros(n_steps, dtype=int)
    residuals = np.zeros(n_steps)
    state = initial_state(run_circuit)
    states = [state]
    for k in range(n_steps):
        try:
            state, iterations[k], residuals[k] = _advance(run_circuit, state, config, dt)
        except NonConvergenceError as e:
            partial = extract_channels(run_circuit, states, dt=dt)
            raise TransientError("transient aborted after {0} of {1} steps: {2}".format(k, n_steps, e),
                                 partial=partial, time=e.time) from e
        if k + 1 in breakpoints:
            state = replace(state, restart=True)
        states.append(state)

    window = states[-config.analysis_cycles * spc:]
    waveforms = extract_channels(run_circuit, window)
    full = extract_channels(run_circuit, states) if config.keep_full_waveforms else None
    return TransientResult(waveforms=waveforms, full_waveforms=full,
                           solver_stats=SolverStats(iterations=iterations, residuals=residuals),
                           dt=dt, frequency=frequency, steps_per_cycle=spc, circuit=run_circuit)
