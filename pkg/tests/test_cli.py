import csv

import numpy as np
import pytest
import yaml

from vqapde import config as C
from vqapde.cli import CENSUS_HEADER, census_csv, census_rows, main, parse_function


def _write(tmp_path, text, name="scenario.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


BASE = """
name: tiny
problem: {n_qubits: 2, source: 1.0}
boundary:
  left: {kind: dirichlet, value: 0.0}
  right: {kind: dirichlet, value: 0.0}
"""


# ---------------------------------------------------------------- config


@pytest.mark.parametrize("name", C.bundled_names())
def test_bundled_scenarios_round_trip(name):
    cfg = C.load(C.bundled_path(name))
    again = C.ScenarioConfig.from_dict(yaml.safe_load(cfg.dump()))
    assert again == cfg
    assert again.to_dict() == cfg.to_dict()


def test_thirteen_bundled_scenarios():
    assert len(C.bundled_names()) == 13


def test_defaults_and_sampling(tmp_path):
    cfg = C.load(_write(tmp_path, BASE))
    assert cfg.ansatz.depth == 1 and cfg.pso.seed == 0 and cfg.gd.tolerance_exponent == 7
    x = np.array([0.2, 0.4, 0.6, 0.8])
    assert np.array_equal(C.sample({"step": {"at": 0.5, "left": 1, "right": -1}}, x), [1, 1, -1, -1])
    assert np.array_equal(C.sample([1, 2, 3, 4], x), [1, 2, 3, 4])
    cfg2 = C.ScenarioConfig.from_dict({**yaml.safe_load(BASE), "pso": {"tolerance": "1e-6"}})
    assert cfg2.pso.tolerance == 1e-6


@pytest.mark.parametrize(
    "patch,where",
    [
        ({"boundary": {"left": {"kind": "dirichlet"}, "right": {"kind": "dirichlet", "value": 0}}}, "boundary.left.value"),
        ({"boundary": {"left": {"kind": "wall"}, "right": {"kind": "dirichlet", "value": 0}}}, "boundary.left.kind"),
        ({"boundary": {"left": {"kind": "periodic"}, "right": {"kind": "dirichlet", "value": 0}}}, "<scenario>"),
        ({"problem": {"n_qubits": 1}}, "problem.n_qubits"),
        ({"problem": {"n_qubits": 2, "source": [1, 2]}}, "problem.source"),
        ({"problem": {"n_qubits": 2, "dt": 0.1}}, "problem.initial"),
        ({"problem": {"n_qubits": "two"}}, "problem.n_qubits"),
        ({"gd": {"tolerance_exponent": 9}}, "<scenario>"),
        ({"ansatz": {"variant": "medium"}}, "ansatz.variant"),
        ({"ansatz": {"colour": 1}}, "ansatz.colour"),
        ({"extras": {}}, "<root>"),
    ],
)
def test_config_errors_name_the_field(patch, where):
    d = {**yaml.safe_load(BASE), **patch}
    with pytest.raises(C.ConfigError) as e:
        C.ScenarioConfig.from_dict(d)
    assert e.value.where == where


def test_resolve_unknown_name():
    with pytest.raises(C.ConfigError):
        C.resolve("no_such_scenario")


# ---------------------------------------------------------------- run


def test_run_writes_files_and_is_deterministic(tmp_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", "poisson_dirichlet_n2", "--out-dir", str(out1)]) == 0
    assert main(["run", "poisson_dirichlet_n2", "--out-dir", str(out2), "--threads", "2"]) == 0
    assert (out1 / "metrics.csv").read_bytes() == (out2 / "metrics.csv").read_bytes()
    assert (out1 / "solution.csv").read_bytes() == (out2 / "solution.csv").read_bytes()
    summary = yaml.safe_load((out1 / "summary.yaml").read_text())
    assert summary["seed"] == 0 and summary["l2_error_final"] <= 1e-5
    assert summary["config"]["name"] == "poisson_dirichlet_n2"
    rows = list(csv.DictReader(open(out1 / "solution.csv")))
    assert len(rows) == 6 and float(rows[0]["y_fd"]) == 0.0
    m = list(csv.DictReader(open(out1 / "metrics.csv")))
    assert list(m[0]) == ["step", "l2_error", "trace_distance", "trace_distance_overlap", "objective", "gd_iterations", "pso_iterations"]
    assert "stage=done" in capsys.readouterr().out


def test_seed_flag_changes_run(tmp_path):
    assert main(["run", "poisson_dirichlet_n2", "--out-dir", str(tmp_path / "a"), "--seed", "4"]) == 0
    assert yaml.safe_load((tmp_path / "a" / "summary.yaml").read_text())["seed"] == 4


def test_malformed_boundary_exit_2_no_files(tmp_path, capsys):
    bad = _write(tmp_path, BASE.replace("value: 0.0}\n  right", "}\n  right"))
    out = tmp_path / "out"
    assert main(["run", str(bad), "--out-dir", str(out)]) == 2
    assert not out.exists()
    assert "boundary.left.value" in capsys.readouterr().err


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_exit_3(tmp_path):
    text = BASE + "gd: {step: 1000.0, line_search: false}\npso: {max_iterations: 0, particles: 2}\n"
    assert main(["run", str(_write(tmp_path, text)), "--out-dir", str(tmp_path / "o")]) == 3


def test_stateprep_failure_exit_4(tmp_path):
    # depth-1 fits at n=3 leave qubit 2 untouched, so a constant source is unreachable
    text = BASE.replace("n_qubits: 2", "n_qubits: 3")
    assert main(["run", str(_write(tmp_path, text)), "--out-dir", str(tmp_path / "o")]) == 4


def test_threads_must_be_positive():
    assert main(["verify", "--threads", "0"]) == 2


# ---------------------------------------------------------------- census / fit / verify


def test_census_csv(capsys):
    assert main(["census", "--kinds", "laplace,boundary_dn", "--n-max", "6"]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == CENSUS_HEADER
    lap6 = [r for r in rows if r[0] == "laplace" and r[2] == "6"]
    assert lap6 == [["laplace", "deep", "6", "90", "64", "154"]]
    assert {r[1] for r in rows[1:] if r[0] == "boundary_dn"} == {"deep", "shallow"}


def test_census_empty_and_unknown(tmp_path, capsys):
    assert main(["census", "--kinds", "", "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "census.csv").read_text() == ",".join(CENSUS_HEADER) + "\n"
    assert main(["census", "--kinds", "teleporter"]) == 2
    assert census_csv(census_rows([], 2, 4)) == ",".join(CENSUS_HEADER) + "\n"


def test_fit_command(tmp_path, capsys):
    assert main(["fit", "step:0.5:1:-1", "--out-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "converged=True" in out and (tmp_path / "fits.json").exists()
    assert main(["fit", "0,0,0,0"]) == 2
    assert np.allclose(parse_function("0.1,0.2,0.3,0.4", 2), [0.1, 0.2, 0.3, 0.4])


def test_verify_command(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "failed=0" in out
