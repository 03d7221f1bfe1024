"""Scenario files: YAML with sections problem, boundary, ansatz, pso, gd, output.

Sampled functions (source, potential, initial) are given as a number, a
list of N_p values, or a step ``{step: {at: 0.5, left: 1.0, right: -1.0}}``
(value ``left`` for x < at, ``right`` otherwise).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from . import objective as O
from .ansatz import AnsatzConfig
from .optimizer import GdConfig, PsoConfig

SECTIONS = ("problem", "boundary", "ansatz", "pso", "gd", "output")
SIDE_KEYS = {"periodic": (), "dirichlet": ("value",), "neumann": ("value",), "robin": ("alpha", "beta", "gamma")}


class ConfigError(ValueError):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass
class ProblemSection:
    n_qubits: int
    source: object = 1.0
    nu: float = 1.0
    zeta: float = 0.0
    potential: object = 0.0
    dt: float | None = None
    n_steps: int = 1
    initial: object | None = None


@dataclass
class AnsatzSection:
    depth: int = 1
    variant: str = "deep"
    fit_depth: int | None = None  # ansatz depth for the source/potential fits
    mode: str = "compiled"  # compiled | circuit
    neumann_via_potential: bool = False


@dataclass
class PsoSection:
    seed: int = 0
    particles: int | None = None
    max_iterations: int = 1000
    inertia: float = 0.7
    cognitive: float = 1.5
    social: float = 1.5
    tolerance: float = 1e-6
    patience: int = 50
    warm_iterations: int | None = None


@dataclass
class GdSection:
    step: float = 0.1
    max_iterations: int = 5000
    tolerance_exponent: int = 7
    line_search: bool = True
    restarts: int = 3


@dataclass
class OutputSection:
    dir: str | None = None
    anchor: bool | None = None  # None: anchor only singular problems


@dataclass
class ScenarioConfig:
    name: str
    problem: ProblemSection
    boundary: dict
    ansatz: AnsatzSection = field(default_factory=AnsatzSection)
    pso: PsoSection = field(default_factory=PsoSection)
    gd: GdSection = field(default_factory=GdSection)
    output: OutputSection = field(default_factory=OutputSection)

    # ---- conversion

    def to_dict(self) -> dict:
        return {"name": self.name, **{s: _plain(asdict(getattr(self, s)) if s != "boundary" else self.boundary) for s in SECTIONS}}

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        if not isinstance(d, dict):
            raise ConfigError("<root>", "expected a mapping")
        unknown = set(d) - set(SECTIONS) - {"name"}
        if unknown:
            raise ConfigError("<root>", f"unknown sections {sorted(unknown)}")
        for req in ("problem", "boundary"):
            if req not in d:
                raise ConfigError(req, "section is required")
        cfg = cls(
            name=str(d.get("name", "scenario")),
            problem=_section(ProblemSection, d["problem"], "problem"),
            boundary=_boundary_dict(d["boundary"]),
            ansatz=_section(AnsatzSection, d.get("ansatz") or {}, "ansatz"),
            pso=_section(PsoSection, d.get("pso") or {}, "pso"),
            gd=_section(GdSection, d.get("gd") or {}, "gd"),
            output=_section(OutputSection, d.get("output") or {}, "output"),
        )
        cfg.validate()
        return cfg

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    # ---- domain objects

    def boundary_spec(self) -> O.BoundarySpec:
        return O.BoundarySpec(_side(self.boundary["left"]), _side(self.boundary["right"]))

    def problem_spec(self) -> O.ProblemSpec:
        p = self.problem
        bspec = self.boundary_spec()
        n_p = 2**p.n_qubits
        dx = 1.0 / n_p if bspec.periodic else 1.0 / (n_p + 1)
        x = np.arange(n_p) * dx if bspec.periodic else (np.arange(n_p) + 1) * dx
        return O.ProblemSpec(
            p.n_qubits,
            bspec,
            sample(p.source, x, "problem.source"),
            nu=p.nu,
            zeta=p.zeta,
            potential=sample(p.potential, x, "problem.potential"),
            dt=p.dt,
            n_steps=p.n_steps,
            initial=None if p.initial is None else sample(p.initial, x, "problem.initial"),
        )

    def ansatz_config(self) -> AnsatzConfig:
        return AnsatzConfig(self.problem.n_qubits, self.ansatz.depth)

    def fit_config(self) -> AnsatzConfig | None:
        d = self.ansatz.fit_depth
        return None if d is None else AnsatzConfig(self.problem.n_qubits, d)

    def pso_config(self) -> PsoConfig:
        kw = asdict(self.pso)
        kw.pop("seed")
        return PsoConfig(**kw)

    def gd_config(self) -> GdConfig:
        return GdConfig(**asdict(self.gd))

    def validate(self):
        p = self.problem
        _check(isinstance(p.n_qubits, int) and p.n_qubits >= 2, "problem.n_qubits", "integer >= 2 required")
        _check(p.nu > 0, "problem.nu", "must be positive")
        if p.dt is not None:
            _check(p.dt > 0, "problem.dt", "must be positive (omit for steady problems)")
            _check(p.initial is not None, "problem.initial", "transient problems need initial data")
            _check(isinstance(p.n_steps, int) and p.n_steps >= 1, "problem.n_steps", "integer >= 1 required")
        a = self.ansatz
        _check(isinstance(a.depth, int) and a.depth >= 1, "ansatz.depth", "integer >= 1 required")
        _check(a.variant in ("deep", "shallow"), "ansatz.variant", "must be 'deep' or 'shallow'")
        _check(a.mode in ("compiled", "circuit"), "ansatz.mode", "must be 'compiled' or 'circuit'")
        try:
            self.boundary_spec()
            self.problem_spec()
            self.pso_config()
            self.gd_config()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError("<scenario>", str(exc)) from None


def _plain(d):
    if isinstance(d, dict):
        return {k: _plain(v) for k, v in d.items()}
    if isinstance(d, (list, tuple)):
        return [_plain(v) for v in d]
    if isinstance(d, np.generic):
        return d.item()
    return d


def _check(ok: bool, where: str, msg: str):
    if not ok:
        raise ConfigError(where, msg)


def _section(cls, raw, name: str):
    if not isinstance(raw, dict):
        raise ConfigError(name, "expected a mapping")
    names = {f.name for f in fields(cls)}
    unknown = set(raw) - names
    if unknown:
        raise ConfigError(f"{name}.{sorted(unknown)[0]}", "unknown field")
    for f in fields(cls):
        if f.name in raw:
            raw = {**raw, f.name: _coerce(raw[f.name], f.type, f"{name}.{f.name}")}
    try:
        return cls(**raw)
    except TypeError as exc:
        raise ConfigError(name, str(exc)) from None


def _coerce(v, annotation: str, where: str):
    """Check a scalar against its annotation ('float', 'int | None', ...)."""
    kinds = [a.strip() for a in str(annotation).split("|")]
    if v is None:
        if "None" in kinds:
            return None
        raise ConfigError(where, "may not be empty")
    if "object" in kinds:
        return v
    if "bool" in kinds:
        if isinstance(v, bool):
            return v
        raise ConfigError(where, "must be true or false")
    if isinstance(v, bool):
        raise ConfigError(where, "must be a number")
    if "int" in kinds:
        if isinstance(v, int):
            return v
        raise ConfigError(where, "must be an integer")
    if "float" in kinds:
        if isinstance(v, str):
            try:  # YAML 1.1 reads '1e-6' as a string
                return float(v)
            except ValueError:
                raise ConfigError(where, f"must be a number, got {v!r}") from None
        if isinstance(v, (int, float)):
            return float(v)
        raise ConfigError(where, "must be a number")
    if "str" in kinds:
        if isinstance(v, str):
            return v
        raise ConfigError(where, "must be a string")
    return v


def _boundary_dict(raw) -> dict:
    if not isinstance(raw, dict) or set(raw) != {"left", "right"}:
        raise ConfigError("boundary", "needs exactly the keys 'left' and 'right'")
    out = {}
    for side in ("left", "right"):
        s = raw[side]
        where = f"boundary.{side}"
        if not isinstance(s, dict) or "kind" not in s:
            raise ConfigError(where, "expected a mapping with a 'kind'")
        kind = s["kind"]
        if kind not in SIDE_KEYS:
            raise ConfigError(f"{where}.kind", f"unknown kind {kind!r}; use one of {sorted(SIDE_KEYS)}")
        extra = set(s) - {"kind", *SIDE_KEYS[kind]}
        if extra:
            raise ConfigError(f"{where}.{sorted(extra)[0]}", f"not a field of a {kind} condition")
        for key in SIDE_KEYS[kind]:
            if key not in s:
                raise ConfigError(f"{where}.{key}", "missing")
            if not isinstance(s[key], (int, float)) or isinstance(s[key], bool):
                raise ConfigError(f"{where}.{key}", "must be a number")
        out[side] = {"kind": kind, **{k: float(s[k]) for k in SIDE_KEYS[kind]}}
    return out


def _side(s: dict) -> O.Side:
    kind = s["kind"]
    if kind == "periodic":
        return O.periodic()
    if kind == "dirichlet":
        return O.dirichlet(s["value"])
    if kind == "neumann":
        return O.neumann(s["value"])
    return O.robin(s["alpha"], s["beta"], s["gamma"])


def sample(spec, x: np.ndarray, where: str = "value") -> np.ndarray:
    """Evaluate a function spec on the grid x."""
    if isinstance(spec, bool):
        raise ConfigError(where, "expected a number, list or step")
    if isinstance(spec, (int, float)):
        return np.full(x.size, float(spec))
    if isinstance(spec, (list, tuple)):
        arr = np.asarray(spec, dtype=float)
        if arr.shape != x.shape:
            raise ConfigError(where, f"expected {x.size} values, got {arr.size}")
        return arr
    if isinstance(spec, dict) and set(spec) == {"step"}:
        st = spec["step"]
        try:
            return np.where(x < float(st["at"]), float(st["left"]), float(st["right"]))
        except (KeyError, TypeError):
            raise ConfigError(where, "step needs numeric 'at', 'left', 'right'") from None
    raise ConfigError(where, "expected a number, list or step")


def load(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"not valid YAML ({exc})") from None
    return ScenarioConfig.from_dict(raw)


def bundled_names() -> list[str]:
    root = resources.files("vqapde") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def bundled_path(name: str) -> Path:
    p = resources.files("vqapde") / "scenarios" / f"{name}.yaml"
    if not p.is_file():
        raise ConfigError(name, f"no bundled scenario; available: {', '.join(bundled_names())}")
    return Path(str(p))


def resolve(name_or_path: str) -> Path:
    """A file path if it exists, otherwise a bundled scenario name."""
    p = Path(name_or_path)
    return p if p.exists() else bundled_path(name_or_path)
