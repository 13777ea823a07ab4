"""External-solver adapter: file formats and command plumbing."""

import sys

import numpy as np
import pytest

from flexsched.errors import SolverAborted
from flexsched.linmodel import BINARY, GE, LE, LinearModel, write_lp
from flexsched.solver.engine import OPTIMAL, SolveOptions, solve_mip
from flexsched.solver.external import (parse_solution_file, solve_with_command,
                                       write_solution_file)


def _small_model():
    model = LinearModel(name="demo")
    x = model.add_var("x", 0, 4, obj=1.0)
    y = model.add_var("y", 0, 1, BINARY, obj=-3.0)
    model.add_row([(x, 1.0), (y, 2.0)], GE, 2.0)
    model.add_row([(x, 1.0)], LE, 4.0)
    return model


def test_lp_dump_mentions_every_piece(tmp_path):
    model = _small_model()
    path = tmp_path / "demo.lp"
    write_lp(model, path)
    text = path.read_text()
    assert "Minimize" in text and "Subject To" in text
    assert "Binaries" in text and "y" in text
    assert "End" in text


def test_solution_file_roundtrip(tmp_path):
    path = tmp_path / "demo.sol"
    write_solution_file(path, {"x": 1.5, "y": 1.0}, objective=-1.5)
    status, objective, values = parse_solution_file(path)
    assert status == "optimal"
    assert objective == -1.5
    assert values == {"x": 1.5, "y": 1.0}


def test_command_adapter_roundtrip(tmp_path):
    # the stand-in "solver" answers with a pre-computed optimal point
    model = _small_model()
    ref = solve_mip(model)
    sol_text_path = tmp_path / "canned.sol"
    write_solution_file(sol_text_path, dict(zip(model.var_names, ref.values)),
                        objective=ref.objective)
    cmd = f"{sys.executable} -c \"import shutil,sys; shutil.copy('{sol_text_path}', '{{sol}}')\""
    got = solve_with_command(model, cmd)
    assert got.status == OPTIMAL
    assert got.objective == pytest.approx(ref.objective)
    assert np.allclose(got.values, ref.values)


def test_command_adapter_integrates_with_solve_mip(tmp_path):
    model = _small_model()
    ref = solve_mip(model)
    sol_text_path = tmp_path / "canned.sol"
    write_solution_file(sol_text_path, dict(zip(model.var_names, ref.values)),
                        objective=ref.objective)
    cmd = f"{sys.executable} -c \"import shutil,sys; shutil.copy('{sol_text_path}', '{{sol}}')\""
    got = solve_mip(model, SolveOptions(solver="external", external_cmd=cmd))
    assert got.status == OPTIMAL
    assert got.objective == pytest.approx(ref.objective)


def test_failing_command_raises(tmp_path):
    model = _small_model()
    with pytest.raises(SolverAborted):
        solve_with_command(model, "false")
    with pytest.raises(SolverAborted):
        solve_with_command(model, "true")  # exits 0 but writes nothing


def test_infeasible_status_passthrough(tmp_path):
    model = _small_model()
    cmd = (f"{sys.executable} -c \"open('{{sol}}','w').write('# status infeasible')\"")
    got = solve_with_command(model, cmd)
    assert got.status == "Infeasible"
