"""Hybrid particle-swarm then gradient-descent minimisation and time marching.

The minimisers are generic: they act on flat vectors x and take a batched
objective ``f(X) -> J`` (rows of X are candidates) and, for GD, a
``value_and_grad(x) -> (J, grad)`` callable.  ``time_march`` wires them to
the variational objective, where x = [lambda0, lambda_c...].
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import qnpu as Q
from .ansatz import AnsatzConfig, parameter_count
from .objective import Control, ProblemSpec, build_plan, effective_problem, objective_batch, reconstruct, value_and_grad

log = logging.getLogger("vqapde")

FOUR_PI = 4 * np.pi


class DivergenceError(RuntimeError):
    """Gradient descent kept increasing the objective."""


class StateprepError(RuntimeError):
    """A source or potential fit failed during time marching."""


def kv(**fields) -> str:
    """Machine-parsable ``key=value`` log line."""
    parts = []
    for k, v in fields.items():
        parts.append(f"{k}={v:.17g}" if isinstance(v, float) else f"{k}={v}")
    return " ".join(parts)


@dataclass(frozen=True)
class PsoConfig:
    particles: int | None = None  # None: 100 * n_qubits
    max_iterations: int = 1000
    inertia: float = 0.7
    cognitive: float = 1.5
    social: float = 1.5
    tolerance: float = 1e-6  # stop when the best J improves less than this ...
    patience: int = 50  # ... over this many iterations
    warm_iterations: int | None = None  # seeded steps l >= 2; None: same budget as step 1

    def __post_init__(self):
        if self.particles is not None and self.particles < 1:
            raise ValueError("need at least one particle")
        if min(self.inertia, self.cognitive, self.social) <= 0:
            raise ValueError("PSO coefficients must be positive")
        if self.max_iterations < 0 or (self.warm_iterations is not None and self.warm_iterations < 0):
            raise ValueError("iteration budgets must be non-negative")


@dataclass(frozen=True)
class GdConfig:
    step: float = 0.1
    max_iterations: int = 5000
    tolerance_exponent: int = 7
    line_search: bool = True
    armijo: float = 1e-4
    divergence_window: int = 50
    restarts: int = 3  # GD runs from the best distinct PSO particles

    def __post_init__(self):
        if not 3 <= self.tolerance_exponent <= 7:
            raise ValueError("tolerance exponent m must lie in [3, 7]")
        if self.step <= 0:
            raise ValueError("step size must be positive")
        if self.restarts < 1:
            raise ValueError("need at least one GD run")

    @property
    def tolerance(self) -> float:
        return 10.0 ** (-self.tolerance_exponent)


@dataclass
class PsoResult:
    x: np.ndarray
    value: float
    iterations: int
    best_history: list
    swarm: np.ndarray  # personal bests, best first
    swarm_values: np.ndarray


def pso_minimize(
    objective,
    dim: int,
    cfg: PsoConfig,
    rng: np.random.Generator,
    initial: np.ndarray | None = None,
    lower: np.ndarray | None = None,
    upper: np.ndarray | None = None,
    particles: int | None = None,
    iterations: int | None = None,
) -> PsoResult:
    """Global-best PSO.  ``objective`` maps an (P, dim) array to P values.

    Particles start uniformly in [lower, upper); ``initial`` replaces the
    first particle.  Positions are not clipped afterwards.
    """
    n_p = particles or cfg.particles or 100
    n_it = cfg.max_iterations if iterations is None else iterations
    lower = np.zeros(dim) if lower is None else np.asarray(lower, float)
    upper = np.ones(dim) if upper is None else np.asarray(upper, float)
    pos = lower + (upper - lower) * rng.random((n_p, dim))
    if initial is not None:
        pos[0] = np.asarray(initial, float)
    vel = 0.1 * (upper - lower) * (rng.random((n_p, dim)) - 0.5)
    vals = np.asarray(objective(pos), float)
    best_pos, best_val = pos.copy(), vals.copy()
    g = int(np.argmin(best_val))
    history = [float(best_val[g])]
    stall_ref, stall = history[0], 0
    it = 0
    for it in range(1, n_it + 1):
        r1, r2 = rng.random((n_p, dim)), rng.random((n_p, dim))
        vel = cfg.inertia * vel + cfg.cognitive * r1 * (best_pos - pos) + cfg.social * r2 * (best_pos[g] - pos)
        pos = pos + vel
        vals = np.asarray(objective(pos), float)
        better = vals < best_val
        best_pos[better], best_val[better] = pos[better], vals[better]
        g = int(np.argmin(best_val))
        history.append(float(best_val[g]))
        if stall_ref - history[-1] > cfg.tolerance:
            stall_ref, stall = history[-1], 0
        else:
            stall += 1
            if stall >= cfg.patience:
                break
    order = np.argsort(best_val)
    return PsoResult(best_pos[g].copy(), float(best_val[g]), it, history, best_pos[order], best_val[order])


@dataclass
class GdResult:
    x: np.ndarray
    value: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)


def gd_minimize(value_and_grad, x0: np.ndarray, cfg: GdConfig, label: str = "gd", scaling=None) -> GdResult:
    """Steepest descent stopped by the change of the gradient, |g_i - g_{i-1}| <= 10^-m.

    With ``line_search`` the step is chosen by Armijo backtracking (grown
    again after each accepted step); otherwise ``cfg.step`` is fixed.
    ``scaling(x)`` optionally returns a positive diagonal that multiplies
    the gradient to form the search direction.
    """
    x = np.asarray(x0, float).copy()
    val, grad = value_and_grad(x)
    history = [val]
    step, rises = cfg.step, 0
    for it in range(1, cfg.max_iterations + 1):
        direction = grad if scaling is None else scaling(x) * grad
        gg = float(grad @ direction)
        if gg == 0.0:
            return GdResult(x, val, it - 1, True, history)
        if cfg.line_search:
            step = min(step * 2.0, 1e3)
            while True:
                x_new = x - step * direction
                val_new, grad_new = value_and_grad(x_new)
                if val_new <= val - cfg.armijo * step * gg:
                    break
                step *= 0.5
                if step < 1e-18:
                    # no descent at machine precision: x is as stationary as it gets
                    return GdResult(x, val, it, True, history)
        else:
            x_new = x - step * direction
            val_new, grad_new = value_and_grad(x_new)
        if not np.isfinite(val_new):
            raise DivergenceError(kv(event="divergence", label=label, iteration=it, J=float(val_new), step=float(step)))
        rises = rises + 1 if val_new > val else 0
        if rises >= cfg.divergence_window:
            raise DivergenceError(
                kv(event="divergence", label=label, iteration=it, J=float(val_new), step=float(step))
            )
        change = float(np.linalg.norm(grad_new - grad))
        x, val, grad = x_new, val_new, grad_new
        history.append(val)
        if it % 100 == 0:
            log.debug(kv(stage=label, iteration=it, J=float(val), ch_grad=change))
        if change <= cfg.tolerance:
            return GdResult(x, val, it, True, history)
    return GdResult(x, val, cfg.max_iterations, False, history)


# ---------------------------------------------------------------- time marching


@dataclass
class StepResult:
    step: int
    control: Control
    y: np.ndarray
    value: float
    gd_iterations: int
    pso_iterations: int
    history: list
    fit_residual: float


@dataclass
class MarchResult:
    steps: list
    config: AnsatzConfig

    @property
    def solutions(self) -> np.ndarray:
        return np.array([s.y for s in self.steps])


def amplitude_scaling(x: np.ndarray) -> np.ndarray:
    """Diagonal step scaling for x = [lambda0, lambda_c...].

    J is lambda0^2 times a bounded function of the angles, so their
    curvature shrinks like lambda0^2 while the lambda0 curvature does not;
    dividing the angle components by lambda0^2 keeps both blocks on one
    scale when the solution amplitude decays.
    """
    d = np.ones_like(x)
    d[1:] = 1.0 / max(x[0] ** 2, 1e-8)
    return d


def _minimize_step(plan, cfg: AnsatzConfig, pso: PsoConfig, gd: GdConfig, rng, seed_x, step: int, threads: int):
    c = parameter_count(cfg)
    lower = np.zeros(c + 1)
    upper = np.concatenate([[1.0], np.full(c, FOUR_PI)])
    n_part = pso.particles or 100 * cfg.n_qubits
    iters = pso.max_iterations if seed_x is None or pso.warm_iterations is None else pso.warm_iterations
    res = pso_minimize(
        lambda x: objective_batch(x, plan), c + 1, pso, rng, seed_x, lower, upper, particles=n_part, iterations=iters
    )
    log.info(kv(stage="pso", step=step, iterations=res.iterations, J=res.value))
    # the seeded swarm already contains the previous control, so warm steps
    # polish only its best; cold steps also try other distinct particles
    starts = [res.x]
    for cand in res.swarm[1:] if seed_x is None else ():
        if len(starts) >= gd.restarts:
            break
        if all(np.linalg.norm(cand - s) > 1e-3 for s in starts):
            starts.append(cand)

    def run(x0):
        x0 = x0.copy()
        if x0[0] == 0.0:
            x0[0] = 1e-3
        return gd_minimize(lambda x: value_and_grad(x, plan), x0, gd, label=f"gd_step{step}", scaling=amplitude_scaling)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(threads) as ex:
            runs = list(ex.map(run, starts))
    else:
        runs = [run(s) for s in starts]
    best = min(runs, key=lambda r: r.value)
    log.info(
        kv(stage="gd", step=step, iterations=best.iterations, J=best.value, converged=best.converged, runs=len(runs))
    )
    return res, best, runs


def time_march(
    problem: ProblemSpec,
    config: AnsatzConfig,
    pso: PsoConfig = PsoConfig(),
    gd: GdConfig = GdConfig(),
    rng: np.random.Generator | None = None,
    variant: str = Q.DEEP,
    fit_config: AnsatzConfig | None = None,
    fitter=None,
    neumann_via_potential: bool = False,
    threads: int = 1,
    fit_tolerance: float = 1e-6,
) -> MarchResult:
    """Algorithm: random start at step 1, warm start from the previous control afterwards.

    Steady problems run a single step.  Each transient step refits the
    source gate for f~ = f + boundary shifts + y^{l-1}/dt.
    """
    if config.n_qubits != problem.n_qubits:
        raise ValueError("ansatz and problem disagree on the qubit count")
    if problem.transient and problem.initial is None:
        raise ValueError("transient problem needs initial data")
    rng = np.random.default_rng() if rng is None else rng
    n_steps = problem.n_steps if problem.transient else 1
    y_prev = problem.initial if problem.transient else None
    eff = effective_problem(problem, y_prev, neumann_via_potential)
    plan = build_plan(eff, config, variant, fitter=fitter, fit_config=fit_config)
    steps, seed_x = [], None
    for l in range(1, n_steps + 1):
        if l > 1:
            eff_l = effective_problem(problem, y_prev, neumann_via_potential)
            plan = plan.with_source(eff_l.f_tilde)
        fit = plan.fits.get("source")
        resid = 0.0 if fit is None else float(fit.residual)
        if resid > fit_tolerance:
            raise StateprepError(kv(event="fit_failed", step=l, residual=resid))
        res, best, _ = _minimize_step(plan, config, pso, gd, rng, seed_x, l, threads)
        ctrl = Control.from_vector(best.x)
        y = reconstruct(ctrl, config)
        steps.append(StepResult(l, ctrl, y, best.value, best.iterations, res.iterations, best.history, resid))
        log.info(kv(stage="step", step=l, J=best.value, gd_iterations=best.iterations, fit_residual=resid))
        seed_x, y_prev = best.x, y
    return MarchResult(steps, config)
