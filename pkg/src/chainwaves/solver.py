"""Corrector fixed-point solve producing supersonic solitary velocity profiles.

With the ansatz w = w0 + eps^2 v on the even subspace, the traveling wave
problem becomes

    L_eps v = R_eps + S_eps + eps^2 Q_eps[v] + eps^2 N_eps[v],

where R and S collect the residual of the limiting profile and N the
higher-order force remainder. The map

    F_eps[v] = L_eps^{-1}(R_eps + S_eps + eps^2 Q_eps[v] + eps^2 N_eps[v])

is iterated from v = 0 with optional damping; the iteration stops on small
increments, and a traveling-wave residual check is mandatory before a solve
is reported as successful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    ChainwavesError,
    EmptyWindowError,
    NoConvergenceError,
)
from .grid import GridFunction, SpectralGrid, derivative, l2_norm, project_even, sup_norm
from .linearized import LinearizedOperator, linearized_operator
from .model import ChainModel, apply_P, apply_Q, kdv_profile, tw_residual
from .operators import averaging_operator, b_operator, invert_b

__all__ = [
    "SolveConfig",
    "SolveDiagnostics",
    "WaveSolution",
    "ResidualPair",
    "residuals",
    "apply_N",
    "fixed_point_map",
    "solve_wave",
    "direct_iteration",
    "eigen_identity_check",
    "measure_tail_decay",
    "SweepRow",
    "convergence_sweep",
]


@dataclass(frozen=True)
class SolveConfig:
    """Iteration controls for one corrector solve.

    ``tol_residual`` backs the mandatory final traveling-wave residual check;
    an iteration that stagnates without reaching it is reported as failed
    rather than returned silently.
    """

    epsilon: float
    tol_fixed_point: float = 1e-12
    tol_linear: float = 1e-12
    max_iterations: int = 200
    damping: float = 1.0
    tol_residual: float = 1e-9

    def __post_init__(self) -> None:
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must be in (0, 1], got {self.epsilon}")
        if min(self.tol_fixed_point, self.tol_linear, self.tol_residual) <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not 0 < self.damping <= 1:
            raise ValueError(f"damping must be in (0, 1], got {self.damping}")


@dataclass(frozen=True)
class SolveDiagnostics:
    iterations: int
    final_increment: float
    tw_residual: float
    corrector_norm: float
    sigma_min: float
    tail_decay_rate: float


@dataclass(frozen=True)
class WaveSolution:
    """Solitary wave profile with its corrector and solve diagnostics.

    ``w = w0 + eps^2 v`` holds exactly by construction; ``wave_speed_sq`` is
    c0^2 + eps^2.
    """

    model: ChainModel
    grid: SpectralGrid
    epsilon: float
    wave_speed_sq: float
    w0: GridFunction
    v: GridFunction
    w: GridFunction
    diagnostics: SolveDiagnostics

    @property
    def wave_speed(self) -> float:
        return math.sqrt(self.wave_speed_sq)


@dataclass(frozen=True)
class ResidualPair:
    """Residual of the limiting profile, split into quadratic and higher parts."""

    r: GridFunction
    s: GridFunction


def residuals(model: ChainModel, grid: SpectralGrid, eps: float) -> ResidualPair:
    """R_eps = (Q_eps[w0] - B_eps w0)/eps^2 and S_eps = P_eps[w0]; both even."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    w0 = kdv_profile(model, grid)
    r = (1.0 / eps**2) * (apply_Q(model, eps, w0) - b_operator(model, grid, eps).apply(w0))
    s = apply_P(model, eps, w0)
    # the 1/eps^2 amplifies odd round-off noise; both terms are analytically even
    return ResidualPair(project_even(r), project_even(s))


def apply_N(model: ChainModel, eps: float, v: GridFunction, w0: GridFunction) -> GridFunction:
    """Remainder map (P_eps[w0 + eps^2 v] - P_eps[w0]) / eps^2; vanishes at v = 0."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if model.psi.kind == "none":
        return GridFunction(v.grid, np.zeros(v.grid.num_points), v.parity_hint)
    shifted = w0 + eps**2 * v
    return (1.0 / eps**2) * (apply_P(model, eps, shifted) - apply_P(model, eps, w0))


def _fixed_point_rhs(
    model: ChainModel,
    eps: float,
    v: GridFunction,
    w0: GridFunction,
    pair: ResidualPair,
    nonlinear_terms: bool,
) -> GridFunction:
    rhs = pair.r + pair.s
    if nonlinear_terms:
        rhs = rhs + eps**2 * apply_Q(model, eps, v)
        if model.psi.kind != "none":
            rhs = rhs + eps**2 * apply_N(model, eps, v, w0)
    return rhs


def fixed_point_map(
    model: ChainModel,
    grid: SpectralGrid,
    eps: float,
    v: GridFunction,
    *,
    tol_linear: float = 1e-12,
    operator: LinearizedOperator | None = None,
    residual_pair: ResidualPair | None = None,
    nonlinear_terms: bool = True,
) -> GridFunction:
    """One application of F_eps; ``nonlinear_terms=False`` is a testing hook
    degenerating the map to the constant L_eps^{-1}(R + S)."""
    if operator is None:
        operator = linearized_operator(model, grid, eps)
    if residual_pair is None:
        residual_pair = residuals(model, grid, eps)
    w0 = operator.w0
    rhs = _fixed_point_rhs(model, eps, v, w0, residual_pair, nonlinear_terms)
    return operator.solve(rhs, tol_linear)


def measure_tail_decay(w: GridFunction, lower: float = 1e-10, upper: float = 1e-4) -> float:
    """Exponential decay rate from a log-linear fit on the right tail.

    Fits log w against x over the window where lower < w < upper and x > 0,
    returning the positive rate. Raises ``EmptyWindowError`` when fewer than
    two samples qualify.
    """
    x = w.grid.nodes
    values = w.values
    mask = (x > 0) & (values > lower) & (values < upper)
    if int(np.count_nonzero(mask)) < 2:
        raise EmptyWindowError(
            f"no tail samples with {lower:g} < w < {upper:g} on x > 0"
        )
    slope = np.polyfit(x[mask], np.log(values[mask]), 1)[0]
    return float(-slope)


def solve_wave(model: ChainModel, grid: SpectralGrid, config: SolveConfig) -> WaveSolution:
    """Iterate the corrector map from v = 0 until the increments stall.

    Deterministic: identical configurations produce bit-identical results.
    Raises ``NoConvergenceError`` when the iteration budget runs out or the
    final traveling-wave residual misses ``config.tol_residual``, and
    propagates ``NearSingularError``/``DomainTooSmallError`` from below.
    """
    eps = config.epsilon
    operator = linearized_operator(model, grid, eps)
    w0 = operator.w0
    pair = residuals(model, grid, eps)
    v = GridFunction(grid, np.zeros(grid.num_points), "even")
    iterations = 0
    increment = math.inf
    converged = False
    for iterations in range(1, config.max_iterations + 1):
        image = fixed_point_map(
            model,
            grid,
            eps,
            v,
            tol_linear=config.tol_linear,
            operator=operator,
            residual_pair=pair,
        )
        if config.damping < 1.0:
            image = (1.0 - config.damping) * v + config.damping * image
        increment = l2_norm(image - v)
        v = image
        if increment <= config.tol_fixed_point * max(1.0, l2_norm(v)):
            converged = True
            break
    if not converged:
        raise NoConvergenceError(
            f"fixed point increments at {increment:.3e} after "
            f"{config.max_iterations} iterations (eps = {eps:g})"
        )
    w = w0 + eps**2 * v
    residual = tw_residual(model, eps, w)
    if residual > config.tol_residual:
        raise NoConvergenceError(
            f"iteration stalled with traveling-wave residual {residual:.3e} "
            f"above {config.tol_residual:g}"
        )
    try:
        tail_rate = measure_tail_decay(w)
    except EmptyWindowError:
        tail_rate = float("nan")
    diagnostics = SolveDiagnostics(
        iterations=iterations,
        final_increment=increment,
        tw_residual=residual,
        corrector_norm=l2_norm(v),
        sigma_min=operator.smallest_singular_value(),
        tail_decay_rate=tail_rate,
    )
    return WaveSolution(
        model=model,
        grid=grid,
        epsilon=eps,
        wave_speed_sq=model.sound_speed_sq + eps**2,
        w0=w0,
        v=v,
        w=w,
        diagnostics=diagnostics,
    )


def direct_iteration(
    model: ChainModel,
    grid: SpectralGrid,
    eps: float,
    start: GridFunction,
    iterations: int,
) -> tuple[GridFunction, list[float]]:
    """Experimental whole-profile map w -> B_eps^{-1}(Q_eps[w] + eps^2 P_eps[w]).

    Exact solutions are fixed points, but no convergence promise is made;
    returned increments let callers judge the behavior themselves.
    """
    w = start
    increments: list[float] = []
    for _ in range(iterations):
        rhs = apply_Q(model, eps, w)
        if model.psi.kind != "none":
            rhs = rhs + eps**2 * apply_P(model, eps, w)
        image = invert_b(model, grid, eps, rhs)
        increments.append(l2_norm(image - w))
        w = image
    return w, increments


def eigen_identity_check(solution: WaveSolution) -> float:
    """Relative residual of the differentiated traveling-wave identity.

    The shift symmetry forces w' to be an eigenfunction, with eigenvalue
    c_eps^2, of V -> sum_m m^2 A(force_m'(m eps^2 A w) A V). Returns
    ||Lin[w'] - c_eps^2 w'||_2 / ||w'||_2, with the 0/0 guard returning 0
    for the trivial wave.
    """
    eps = solution.epsilon
    grid = solution.grid
    w_prime = derivative(solution.w, 1)
    norm = l2_norm(w_prime)
    if norm == 0.0:
        return 0.0
    total = np.zeros(grid.num_points)
    for m in range(1, solution.model.neighbor_range + 1):
        averaging = averaging_operator(grid, m * eps)
        argument = (m * eps**2) * averaging.apply(solution.w).values
        stiffness = np.asarray(solution.model.force_derivative(m, argument))
        inner = stiffness * averaging.apply(w_prime).values
        total += m**2 * averaging.apply(GridFunction(grid, inner)).values
    defect = GridFunction(grid, total - solution.wave_speed_sq * w_prime.values)
    return l2_norm(defect) / norm


@dataclass(frozen=True)
class SweepRow:
    """One resolution step of a convergence sweep; ``error`` marks failed rows."""

    epsilon: float
    l2_error: float | None = None
    sup_error: float | None = None
    order_l2: float | None = None
    order_sup: float | None = None
    iterations: int | None = None
    tw_residual: float | None = None
    sigma_min: float | None = None
    residual_norm_rs: float | None = None
    tail_rate: float | None = None
    error: str | None = None


def convergence_sweep(
    model: ChainModel,
    grid: SpectralGrid,
    epsilon_list,
    config: SolveConfig,
) -> list[SweepRow]:
    """Solve along a decreasing epsilon schedule and tabulate error orders.

    Each row reports distances to the limiting profile, the empirical order
    between consecutive rows, and per-solve diagnostics. Rows whose solve
    fails carry the error name instead of aborting the sweep; order entries
    are absent on the first row and next to failed rows.
    """
    eps_values = [float(e) for e in epsilon_list]
    if any(b >= a for a, b in zip(eps_values, eps_values[1:])):
        raise ValueError("epsilon_list must be strictly decreasing")
    w0 = kdv_profile(model, grid)
    rows: list[SweepRow] = []
    previous: tuple[float, float, float] | None = None
    for eps in eps_values:
        row_config = replace(config, epsilon=eps)
        pair = residuals(model, grid, eps)
        rs_norm = l2_norm(pair.r) + l2_norm(pair.s)
        try:
            solution = solve_wave(model, grid, row_config)
        except ChainwavesError as exc:
            rows.append(
                SweepRow(
                    epsilon=eps,
                    residual_norm_rs=rs_norm,
                    error=type(exc).__name__.removesuffix("Error"),
                )
            )
            previous = None
            continue
        l2_err = l2_norm(solution.w - w0)
        sup_err = sup_norm(solution.w - w0)
        order_l2 = order_sup = None
        if previous is not None:
            eps_prev, l2_prev, sup_prev = previous
            scale = math.log(eps_prev / eps)
            order_l2 = math.log(l2_prev / l2_err) / scale
            order_sup = math.log(sup_prev / sup_err) / scale
        rows.append(
            SweepRow(
                epsilon=eps,
                l2_error=l2_err,
                sup_error=sup_err,
                order_l2=order_l2,
                order_sup=order_sup,
                iterations=solution.diagnostics.iterations,
                tw_residual=solution.diagnostics.tw_residual,
                sigma_min=solution.diagnostics.sigma_min,
                residual_norm_rs=rs_norm,
                tail_rate=solution.diagnostics.tail_decay_rate,
            )
        )
        previous = (eps, l2_err, sup_err)
    return rows
