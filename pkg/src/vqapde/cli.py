"""Command-line scenario runner.

    vqapde run <config|bundled-name> [--seed S] [--out-dir D] [--threads T]
    vqapde census --kinds laplace,boundary_dn --n-max 12 [--variants deep,shallow]
    vqapde fit <function-spec> --n-qubits 2 [--depth 1]
    vqapde verify

Exit codes: 0 success, 1 failed verification, 2 invalid configuration,
3 optimizer divergence, 4 state-preparation failure.  Column layouts are
described in FORMATS.md.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from . import config as C
from . import qnpu as Q
from .ansatz import AnsatzConfig
from .fd_oracle import anchor_central, fd_march, fd_solve_steady, with_boundary
from .metrics import l2_error, time_average, trace_distance, trace_distance_overlap
from .objective import is_singular
from .optimizer import DivergenceError, StateprepError, kv, time_march
from .stateprep import fit_function_gate

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_DIVERGED, EXIT_STATEPREP = 0, 1, 2, 3, 4
CENSUS_KINDS = ("laplace", "transform", "boundary_dn", "boundary_n", "potential", "source", "ansatz")
CENSUS_HEADER = ["kind", "variant", "n", "one_qubit", "two_qubit", "total"]

log = logging.getLogger("vqapde")


def fmt(v: float) -> str:
    return f"{float(v):.17g}"


def _safe(metric, a, b) -> float:
    try:
        return metric(a, b)
    except ValueError:
        return float("nan")


# ---------------------------------------------------------------- run


def run_scenario(cfg: C.ScenarioConfig, out_dir: Path, seed: int | None = None, threads: int = 1) -> dict:
    """Solve one scenario and write solution.csv, metrics.csv and summary.yaml."""
    seed = cfg.pso.seed if seed is None else seed
    problem = cfg.problem_spec()
    anchor = is_singular(problem) if cfg.output.anchor is None else cfg.output.anchor
    t0 = time.perf_counter()
    result = time_march(
        problem,
        cfg.ansatz_config(),
        cfg.pso_config(),
        cfg.gd_config(),
        rng=np.random.default_rng(seed),
        variant=cfg.ansatz.variant,
        fit_config=cfg.fit_config(),
        neumann_via_potential=cfg.ansatz.neumann_via_potential,
        threads=threads,
    )
    elapsed = time.perf_counter() - t0
    reference = fd_march(problem) if problem.transient else fd_solve_steady(problem)[None, :]
    out_dir.mkdir(parents=True, exist_ok=True)
    rows, metrics = [], []
    for step, (s, y_fd) in enumerate(zip(result.steps, reference), start=1):
        y_vqa = s.y
        if anchor:
            y_vqa, y_fd = anchor_central(y_vqa), anchor_central(y_fd)
        e2 = l2_error(y_fd, y_vqa)
        etr, eov = _safe(trace_distance, y_fd, y_vqa), _safe(trace_distance_overlap, y_fd, y_vqa)
        metrics.append((step, e2, etr, eov, s.value, s.gd_iterations, s.pso_iterations))
        x, yv = with_boundary(problem, y_vqa)
        _, yf = with_boundary(problem, y_fd)
        t = step * problem.dt if problem.transient else 0.0
        for xi, a, b in zip(x, yv, yf):
            rows.append((step, t, xi, a, b))
    with open(out_dir / "solution.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["step", "t", "x", "y_vqa", "y_fd"])
        for step, t, xi, a, b in rows:
            w.writerow([step, fmt(t), fmt(xi), fmt(a), fmt(b)])
    with open(out_dir / "metrics.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(
            ["step", "l2_error", "trace_distance", "trace_distance_overlap", "objective", "gd_iterations", "pso_iterations"]
        )
        for step, e2, etr, eov, j, gi, pi in metrics:
            w.writerow([step, fmt(e2), fmt(etr), fmt(eov), fmt(j), gi, pi])
    e2s = [m[1] for m in metrics]
    summary = {
        "scenario": cfg.name,
        "seed": int(seed),
        "threads": int(threads),
        "steps": len(metrics),
        "l2_error_final": float(e2s[-1]),
        "l2_error_mean": time_average(e2s),
        "trace_distance_mean": time_average([m[2] for m in metrics]),
        "trace_distance_overlap_mean": time_average([m[3] for m in metrics]),
        "objective_final": float(metrics[-1][4]),
        "gd_iterations_total": int(sum(m[5] for m in metrics)),
        "anchored": bool(anchor),
        "wall_seconds": round(elapsed, 3),
        "config": cfg.to_dict(),
    }
    (out_dir / "summary.yaml").write_text(yaml.safe_dump(summary, sort_keys=False))
    return summary


def cmd_run(args) -> int:
    try:
        cfg = C.load(C.resolve(args.config))
    except C.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.out_dir or cfg.output.dir or Path("runs") / cfg.name)
    try:
        summary = run_scenario(cfg, out_dir, args.seed, args.threads)
    except DivergenceError as exc:
        print(f"optimizer diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except StateprepError as exc:
        print(f"state preparation failed: {exc}", file=sys.stderr)
        return EXIT_STATEPREP
    print(
        kv(
            stage="done",
            scenario=cfg.name,
            l2_error_mean=summary["l2_error_mean"],
            l2_error_final=summary["l2_error_final"],
            out_dir=str(out_dir),
        )
    )
    return EXIT_OK


# ---------------------------------------------------------------- census


def census_rows(kinds, n_min: int, n_max: int, variants=(Q.DEEP, Q.SHALLOW), decompose: bool = True) -> list:
    rows = []
    for kind in kinds:
        if kind not in CENSUS_KINDS:
            raise ValueError(f"unknown kind {kind!r}; choose from {', '.join(CENSUS_KINDS)}")
        # only boundary and transform units have a carry-qubit variant
        kind_variants = variants if kind in ("transform", "boundary_dn", "boundary_n") else (Q.DEEP,)
        for variant in kind_variants:
            for n in range(n_min, n_max + 1):
                c = Q.gate_census(Q.build_kind(kind, n, variant), decompose_toffoli=decompose)
                rows.append((kind, variant, n, c.one_qubit, c.two_qubit, c.total))
    return rows


def census_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CENSUS_HEADER)
    w.writerows(rows)
    return buf.getvalue()


def cmd_census(args) -> int:
    kinds = [k for k in args.kinds.split(",") if k.strip()] if args.kinds else []
    variants = [v for v in args.variants.split(",") if v]
    try:
        rows = census_rows([k.strip() for k in kinds], args.n_min, args.n_max, variants, not args.no_decompose)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = census_csv(rows)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "census.csv").write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- fit


def parse_function(spec: str, n_qubits: int) -> np.ndarray:
    """'1.0', '0.1,0.2,0.3,0.4', or 'step:AT:LEFT:RIGHT' sampled on the interior grid."""
    n_p = 2**n_qubits
    x = (np.arange(n_p) + 1) / (n_p + 1)
    if spec.startswith("step:"):
        _, at, left, right = spec.split(":")
        return C.sample({"step": {"at": float(at), "left": float(left), "right": float(right)}}, x, "function")
    parts = [float(v) for v in spec.split(",")]
    return C.sample(parts[0] if len(parts) == 1 else parts, x, "function")


def cmd_fit(args) -> int:
    try:
        g = parse_function(args.function, args.n_qubits)
        cfg = AnsatzConfig(args.n_qubits, args.depth)
    except (ValueError, C.ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    cache = None
    if args.out_dir:
        from .stateprep import FitCache

        cache = FitCache(Path(args.out_dir) / "fits.json")
    try:
        r = fit_function_gate(g, cfg, rng=np.random.default_rng(args.seed or 0), cache=cache)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(kv(lam0=r.lam0, residual=r.residual, converged=r.converged))
    print("params=" + ",".join(fmt(p) for p in r.params))
    print("state=" + ",".join(fmt(v) for v in r.state.real))
    return EXIT_OK if r.converged else EXIT_STATEPREP


# ---------------------------------------------------------------- verify


def cmd_verify(args) -> int:
    from .verify import run_all

    results = run_all()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}" + (f" ({detail})" if detail else ""))
    failed = sum(not ok for _, ok, _ in results)
    print(kv(checks=len(results), failed=failed))
    return EXIT_OK if failed == 0 else EXIT_VERIFY


# ---------------------------------------------------------------- entry


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (overrides the scenario)")
    common.add_argument("--out-dir", default=None, help="output directory")
    common.add_argument("--threads", type=int, default=1, help="parallel GD restarts")
    common.add_argument("-v", "--verbose", action="store_true", help="debug-level progress lines")

    p = argparse.ArgumentParser(prog="vqapde", description="Variational solver for 1D reaction/diffusion problems")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", parents=[common], help="run a scenario file or bundled scenario")
    r.add_argument("config", help=f"YAML path or bundled name ({', '.join(C.bundled_names())})")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("census", parents=[common], help="gate counts per unit and qubit count (CSV)")
    c.add_argument("--kinds", default=",".join(CENSUS_KINDS), help="comma-separated unit kinds")
    c.add_argument("--n-max", type=int, default=12)
    c.add_argument("--n-min", type=int, default=2)
    c.add_argument("--variants", default="deep,shallow")
    c.add_argument("--no-decompose", action="store_true", help="count Toffoli/multi-controlled gates whole")
    c.set_defaults(func=cmd_census)

    f = sub.add_parser("fit", parents=[common], help="fit an ansatz state to a sampled function")
    f.add_argument("function", help="'1.0', comma list, or 'step:AT:LEFT:RIGHT'")
    f.add_argument("--n-qubits", type=int, default=2)
    f.add_argument("--depth", type=int, default=1)
    f.set_defaults(func=cmd_fit)

    v = sub.add_parser("verify", parents=[common], help="matrix-oracle invariant suite")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("config error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(
        stream=sys.stdout, level=logging.DEBUG if args.verbose else logging.INFO, format="%(message)s", force=True
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
