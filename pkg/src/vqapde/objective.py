"""Discrete objective J(lambda0, lambda_c) with ghost-point boundary corrections.

For interior samples y = lambda0 * u the objective is

    J = dx * [ lambda0^2 u^dag K u - 2 lambda0 Re(u^dag f~) ]

with K = (nu/dx^2) L_bc - diag(r).  L_bc is the periodic stencil
2I - S - S^T with the periodic corners removed (non-periodic case) and
``w_left``/``w_right`` subtracted from the first/last diagonal entry; the
weights and the source shifts f~ come from eliminating the ghost values
through y_ghost = a * y_adjacent + b.  ``r`` collects zeta*p and the -1/dt
shift of implicit Euler.  Minimising J over y gives K y = f~, i.e. the
finite-difference solution.

On the circuit side each piece is one Hadamard test:

    laplace      Re<u|S|u>               coefficient -2 nu/dx  (+2 nu/dx constant)
    boundary_dn  2 Re(u_1^* u_N)         +nu/dx
    boundary_n   |u_1|^2 (+|u_N|^2)      -nu/dx * w
    potential    sum r_k |u_k|^2         -dx
    source       Re<f~|u>                -2 dx (linear in lambda0)
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import qnpu as Q
from .ansatz import AnsatzConfig, ansatz_states, build_ansatz, parameter_count
from .hadamard import EXPLICIT_DAGGER, REVERSING, CompiledTerm, TermAssembly, compile_term, evaluate_term

PERIODIC, DIRICHLET, NEUMANN, ROBIN = "periodic", "dirichlet", "neumann", "robin"
FD_STEP = 1e-5


# ---------------------------------------------------------------- problem types


@dataclass(frozen=True)
class Side:
    """One boundary condition.

    Robin follows alpha * y_ghost / dx + beta * dy/dx = gamma with a
    first-order one-sided derivative.
    """

    kind: str
    value: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in (PERIODIC, DIRICHLET, NEUMANN, ROBIN):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind == ROBIN and self.alpha == 0 and self.beta == 0:
            raise ValueError("Robin condition needs alpha or beta nonzero")


def periodic() -> Side:
    return Side(PERIODIC)


def dirichlet(value: float) -> Side:
    return Side(DIRICHLET, float(value))


def neumann(slope: float) -> Side:
    return Side(NEUMANN, float(slope))


def robin(alpha: float, beta: float, gamma: float) -> Side:
    return Side(ROBIN, alpha=float(alpha), beta=float(beta), gamma=float(gamma))


@dataclass(frozen=True)
class BoundarySpec:
    left: Side
    right: Side

    def __post_init__(self):
        if (self.left.kind == PERIODIC) != (self.right.kind == PERIODIC):
            raise ValueError("periodic must be set on both sides or neither")

    @property
    def periodic(self) -> bool:
        return self.left.kind == PERIODIC


def ghost_relation(side: Side, which: str, dx: float) -> tuple[float, float]:
    """(a, b) such that y_ghost = a * y_adjacent + b."""
    if side.kind == DIRICHLET:
        return 0.0, side.value
    if side.kind == NEUMANN:
        # left: (y1 - y0)/dx = N ; right: (y_{N+1} - y_N)/dx = N
        return 1.0, (-side.value * dx if which == "left" else side.value * dx)
    if side.kind == ROBIN:
        al, be, ga = side.alpha, side.beta, side.gamma
        den = al - be if which == "left" else al + be
        if den == 0:
            raise ValueError(f"degenerate Robin coefficients on the {which} side")
        a = (-be if which == "left" else be) / den
        return a, ga * dx / den
    raise ValueError("periodic sides have no ghost relation")


@dataclass
class ProblemSpec:
    """1D reaction/diffusion problem y_t - nu y_xx - zeta p y = f on (0, 1).

    ``dt=None`` selects the steady problem.  Arrays are interior samples.
    """

    n_qubits: int
    boundary: BoundarySpec
    source: np.ndarray
    nu: float = 1.0
    zeta: float = 0.0
    potential: np.ndarray | None = None
    dt: float | None = None
    n_steps: int = 1
    initial: np.ndarray | None = None

    def __post_init__(self):
        n_p = self.n_points
        self.source = _as_samples(self.source, n_p, "source")
        self.potential = np.zeros(n_p) if self.potential is None else _as_samples(self.potential, n_p, "potential")
        if self.initial is not None:
            self.initial = _as_samples(self.initial, n_p, "initial")
        if self.nu <= 0:
            raise ValueError("diffusivity must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("time step must be positive")
        if self.n_qubits < 2:
            raise ValueError("need at least two qubits")

    @property
    def n_points(self) -> int:
        return 2 ** self.n_qubits

    @property
    def dx(self) -> float:
        # periodic grids close on themselves: x_k = (k-1)/N_p
        return 1.0 / self.n_points if self.boundary.periodic else 1.0 / (self.n_points + 1)

    @property
    def x(self) -> np.ndarray:
        k = np.arange(self.n_points)
        return k * self.dx if self.boundary.periodic else (k + 1) * self.dx

    @property
    def transient(self) -> bool:
        return self.dt is not None


def _as_samples(v, n_p: int, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n_p, float(arr))
    if arr.shape != (n_p,):
        raise ValueError(f"{name} must have {n_p} samples, got shape {arr.shape}")
    return arr


def is_singular(problem: ProblemSpec) -> bool:
    """True when the steady operator has the constant vector in its null space."""
    if np.any(problem.zeta * problem.potential != 0) or problem.transient:
        return False
    b = problem.boundary
    if b.periodic:
        return True
    return b.left.kind == NEUMANN and b.right.kind == NEUMANN


# ---------------------------------------------------------------- effective problem


@dataclass(frozen=True)
class EffectiveProblem:
    n_qubits: int
    dx: float
    nu: float
    periodic: bool
    w_left: float
    w_right: float
    reaction: np.ndarray  # zeta * p~ (steady: zeta p; transient: zeta p - 1/dt)
    f_tilde: np.ndarray
    neumann_via_potential: bool = False

    @property
    def n_points(self) -> int:
        return 2 ** self.n_qubits


def boundary_corrections(spec: BoundarySpec, problem: ProblemSpec) -> dict:
    """Neumann-like diagonal weights and source shifts from ghost elimination."""
    n_p, dx, nu = problem.n_points, problem.dx, problem.nu
    shift = np.zeros(n_p)
    if spec.periodic:
        return {"dn_active": False, "w_left": 0.0, "w_right": 0.0, "f_shift": shift}
    a_l, b_l = ghost_relation(spec.left, "left", dx)
    a_r, b_r = ghost_relation(spec.right, "right", dx)
    shift[0] += nu * b_l / dx**2
    shift[-1] += nu * b_r / dx**2
    return {"dn_active": True, "w_left": a_l, "w_right": a_r, "f_shift": shift}


def effective_problem(
    problem: ProblemSpec, y_prev: np.ndarray | None = None, neumann_via_potential: bool = False
) -> EffectiveProblem:
    corr = boundary_corrections(problem.boundary, problem)
    reaction = problem.zeta * problem.potential
    f_tilde = problem.source + corr["f_shift"]
    if problem.transient:
        if y_prev is None:
            raise ValueError("transient step needs the previous solution")
        reaction = reaction - 1.0 / problem.dt
        f_tilde = f_tilde + np.asarray(y_prev, dtype=float) / problem.dt
    w_l, w_r = corr["w_left"], corr["w_right"]
    if neumann_via_potential:
        reaction = reaction.copy()
        reaction[0] += problem.nu * w_l / problem.dx**2
        reaction[-1] += problem.nu * w_r / problem.dx**2
        w_l = w_r = 0.0
    return EffectiveProblem(
        problem.n_qubits,
        problem.dx,
        problem.nu,
        problem.boundary.periodic,
        float(w_l),
        float(w_r),
        np.asarray(reaction, dtype=float),
        np.asarray(f_tilde, dtype=float),
        neumann_via_potential,
    )


def dense_operator(eff: EffectiveProblem) -> np.ndarray:
    """K assembled from the periodic stencil plus the boundary corrections."""
    n_p = eff.n_points
    s = np.roll(np.eye(n_p), 1, axis=0)
    lap = 2 * np.eye(n_p) - s - s.T
    if not eff.periodic:
        lap[0, -1] += 1.0
        lap[-1, 0] += 1.0
        lap[0, 0] -= eff.w_left
        lap[-1, -1] -= eff.w_right
    return eff.nu / eff.dx**2 * lap - np.diag(eff.reaction)


def dense_objective(lam0: float, u: np.ndarray, eff: EffectiveProblem, f_tilde: np.ndarray | None = None) -> float:
    k = dense_operator(eff)
    f = eff.f_tilde if f_tilde is None else f_tilde
    u = np.asarray(u)
    return float(eff.dx * (lam0**2 * np.real(u.conj() @ k @ u) - 2 * lam0 * np.real(u.conj() @ f)))


# ---------------------------------------------------------------- control


@dataclass
class Control:
    lam0: float
    params: np.ndarray

    def __post_init__(self):
        self.lam0 = float(self.lam0)
        self.params = np.asarray(self.params, dtype=float).ravel()

    def as_vector(self) -> np.ndarray:
        return np.concatenate([[self.lam0], self.params])

    @classmethod
    def from_vector(cls, x) -> "Control":
        x = np.asarray(x, dtype=float)
        return cls(x[0], x[1:])


# ---------------------------------------------------------------- term plan


@dataclass
class Term:
    name: str
    qnpu: Q.Qnpu
    coefficient: float
    transform: object = None
    layout: str = REVERSING
    linear: bool = False  # True for the source overlap (enters with lambda0, not lambda0^2)
    compiled: CompiledTerm | None = None


@dataclass
class TermPlan:
    """All Hadamard tests needed for one effective problem and ansatz shape."""

    eff: EffectiveProblem
    config: AnsatzConfig
    terms: list = field(default_factory=list)
    constant: float = 0.0  # lambda0^2 coefficient that needs no circuit (<u|u> = 1)
    fits: dict = field(default_factory=dict)

    def quadratic(self, u: np.ndarray) -> np.ndarray:
        val = np.full(u.shape[:-1], self.constant, dtype=float)
        for t in self.terms:
            if not t.linear:
                val = val + t.coefficient * t.compiled(u)
        return val

    def linear(self, u: np.ndarray) -> np.ndarray:
        val = np.zeros(u.shape[:-1], dtype=float)
        for t in self.terms:
            if t.linear:
                val = val + t.coefficient * t.compiled(u)
        return val

    def with_source(self, f_tilde: np.ndarray, fitter=None) -> "TermPlan":
        """Copy of the plan with a refitted source gate (transient steps)."""
        eff = replace(self.eff, f_tilde=np.asarray(f_tilde, dtype=float))
        terms = [t for t in self.terms if t.name != "source"]
        plan = TermPlan(eff, self.config, terms, self.constant, dict(self.fits))
        plan.fits.pop("source", None)
        _add_source(plan, fitter)
        return plan


def _default_fitter(config: AnsatzConfig):
    from .stateprep import fit_function_gate

    def fit(g, name, warm=None):
        return fit_function_gate(g, config, warm_start=warm)

    return fit


def build_plan(
    eff: EffectiveProblem,
    config: AnsatzConfig,
    variant: str = Q.DEEP,
    fitter=None,
    fit_config: AnsatzConfig | None = None,
) -> TermPlan:
    """Construct and compile every active term.

    ``fitter(g, name, warm)`` returns an object with ``params`` and ``circuit``
    encoding g/|g|; by default the stateprep module fits an ansatz of shape
    ``fit_config`` (same qubit count, depth 1 unless given).
    """
    n, nu, dx = eff.n_qubits, eff.nu, eff.dx
    fit_config = fit_config or AnsatzConfig(n, 1)
    fitter = fitter or _default_fitter(fit_config)
    plan = TermPlan(eff, config)
    plan._fitter = fitter  # type: ignore[attr-defined]
    layout = REVERSING if variant == Q.DEEP else EXPLICIT_DAGGER
    transform = Q.transform_tt(n, variant)

    plan.terms.append(Term("laplace", Q.laplace_qnpu(n), -2 * nu / dx))
    plan.constant = 2 * nu / dx
    if not eff.periodic:
        plan.terms.append(Term("boundary_dn", Q.boundary_dn_qnpu(n, variant), nu / dx, transform, layout))
        wl, wr = eff.w_left, eff.w_right
        if wl != 0 and wl == wr:
            plan.terms.append(Term("boundary_n", Q.boundary_n_qnpu(n, variant, "both"), -nu / dx * wl, transform, layout))
        else:
            if wl != 0:
                plan.terms.append(
                    Term("boundary_n_left", Q.boundary_n_qnpu(n, variant, "left"), -nu / dx * wl, transform, layout)
                )
            if wr != 0:
                plan.terms.append(
                    Term("boundary_n_right", Q.boundary_n_qnpu(n, variant, "right"), -nu / dx * wr, transform, layout)
                )
    r = eff.reaction
    if np.any(r != 0):
        norm = float(np.linalg.norm(r))
        fit = fitter(r, "potential", None)
        plan.fits["potential"] = fit
        plan.terms.append(Term("potential", Q.potential_qnpu(n, fit.circuit, scale=norm), -dx))
    for t in plan.terms:
        t.compiled = compile_term(t.qnpu, t.transform)
    _add_source(plan, fitter)
    return plan


def _add_source(plan: TermPlan, fitter=None):
    fitter = fitter or getattr(plan, "_fitter", None) or _default_fitter(AnsatzConfig(plan.eff.n_qubits, 1))
    plan._fitter = fitter  # type: ignore[attr-defined]
    f = plan.eff.f_tilde
    if not np.any(f != 0):
        return
    warm = plan.fits.get("source_prev")
    fit = fitter(f, "source", None if warm is None else warm.params)
    plan.fits["source"] = fit
    plan.fits["source_prev"] = fit
    n = plan.eff.n_qubits
    term = Term("source", Q.source_qnpu(n, fit.circuit, scale=float(np.linalg.norm(f))), -2 * plan.eff.dx, linear=True)
    term.compiled = compile_term(term.qnpu, overlap=True)
    plan.terms.append(term)


# ---------------------------------------------------------------- evaluation


def term_values(control: Control, plan: TermPlan, mode: str = "compiled") -> dict:
    """Scaled raw expectation of every term (before objective coefficients).

    ``mode='circuit'`` runs each full Hadamard-test circuit; ``'compiled'``
    uses the equivalent dense data-register operators.
    """
    out = {}
    if mode == "compiled":
        u = ansatz_states(plan.config, control.params)
        for t in plan.terms:
            out[t.name] = float(t.compiled(u))
        return out
    if mode != "circuit":
        raise ValueError("mode must be 'compiled' or 'circuit'")
    circ = build_ansatz(plan.config, control.params)
    for t in plan.terms:
        a = TermAssembly(circ, t.qnpu, t.transform, t.layout, controlled_ansatz=t.linear)
        out[t.name] = t.qnpu.scale * evaluate_term(a)
    return out


def assemble_objective(lam0: float, values: dict, plan: TermPlan) -> float:
    quad = plan.constant + sum(t.coefficient * values[t.name] for t in plan.terms if not t.linear)
    lin = sum(t.coefficient * values[t.name] for t in plan.terms if t.linear)
    return float(lam0**2 * quad + lam0 * lin)


def evaluate_objective(control: Control, plan: TermPlan, mode: str = "compiled") -> float:
    return assemble_objective(control.lam0, term_values(control, plan, mode), plan)


def objective_batch(x: np.ndarray, plan: TermPlan) -> np.ndarray:
    """J for rows x = [lambda0, lambda_c...] (shape (B, 1 + c))."""
    x = np.atleast_2d(x)
    u = ansatz_states(plan.config, x[:, 1:])
    lam0 = x[:, 0]
    return lam0**2 * plan.quadratic(u) + lam0 * plan.linear(u)


def split_terms(control: Control, plan: TermPlan) -> tuple[float, float]:
    """(J_quadratic, J_source): the lambda0^2 and lambda0 parts of J."""
    u = ansatz_states(plan.config, control.params)
    return float(control.lam0**2 * plan.quadratic(u)), float(control.lam0 * plan.linear(u))


def grad_lambda0(control: Control, plan: TermPlan, parts: tuple[float, float] | None = None) -> float:
    """dJ/dlambda0 = (2 J_quadratic + J_source) / lambda0."""
    if control.lam0 == 0:
        raise ZeroDivisionError("lambda0 = 0: the scale gradient is undefined in this form; re-seed")
    jq, js = split_terms(control, plan) if parts is None else parts
    return (2 * jq + js) / control.lam0


def grad_lambda_c(control: Control, plan: TermPlan, h: float = FD_STEP) -> np.ndarray:
    """Parameter-shift rule for the quadratic terms, central differences for the source."""
    p = control.params
    c = p.size
    eye = np.eye(c)
    shifted = np.concatenate([p + np.pi / 2 * eye, p - np.pi / 2 * eye, p + h * eye, p - h * eye])
    u = ansatz_states(plan.config, shifted)
    quad = plan.quadratic(u[: 2 * c])
    lin = plan.linear(u[2 * c :])
    d_quad = 0.5 * (quad[:c] - quad[c:])
    d_lin = (lin[:c] - lin[c:]) / (2 * h)
    return control.lam0**2 * d_quad + control.lam0 * d_lin


def value_and_grad(x: np.ndarray, plan: TermPlan, h: float = FD_STEP) -> tuple[float, np.ndarray]:
    """J and its full gradient for x = [lambda0, lambda_c...], sharing one batched run."""
    x = np.asarray(x, dtype=float)
    lam0, p = x[0], x[1:]
    c = p.size
    eye = np.eye(c)
    rows = np.concatenate([p[None, :], p + np.pi / 2 * eye, p - np.pi / 2 * eye, p + h * eye, p - h * eye])
    u = ansatz_states(plan.config, rows)
    q0 = plan.quadratic(u[:1])[0]
    l0 = plan.linear(u[:1])[0]
    quad = plan.quadratic(u[1 : 2 * c + 1])
    lin = plan.linear(u[2 * c + 1 :])
    g = np.empty(c + 1)
    g[0] = 2 * lam0 * q0 + l0
    g[1:] = lam0**2 * 0.5 * (quad[:c] - quad[c:]) + lam0 * (lin[:c] - lin[c:]) / (2 * h)
    return float(lam0**2 * q0 + lam0 * l0), g


def reconstruct(control: Control, config: AnsatzConfig) -> np.ndarray:
    """Physical samples y_k = lambda0 * Re u_k."""
    return control.lam0 * np.real(ansatz_states(config, control.params))


def n_params(config: AnsatzConfig) -> int:
    return parameter_count(config)
