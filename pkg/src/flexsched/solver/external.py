"""External-solver seam: LP text dump out, solution file back in.

The command template receives {lp} and {sol} placeholders. The solution
file format is one `name value` pair per line, with optional comment
headers `# objective <v>` and `# status <optimal|infeasible|...>`.
"""

from __future__ import annotations

import subprocess
import tempfile
from pathlib import Path

import numpy as np

from flexsched.errors import IoError, SolverAborted
from flexsched.linmodel import LinearModel, write_lp


def write_solution_file(path, values_by_name, objective, status="optimal"):
    lines = [f"# status {status}", f"# objective {objective!r}"]
    for name, value in values_by_name.items():
        lines.append(f"{name} {float(value)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def parse_solution_file(path):
    """Returns (status, objective, {name: value})."""
    status = "optimal"
    objective = None
    values = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    parts = line[1:].split()
                    if len(parts) >= 2 and parts[0] == "status":
                        status = parts[1].lower()
                    elif len(parts) >= 2 and parts[0] == "objective":
                        objective = float(parts[1])
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise IoError(f"{path}:{lineno}: expected 'name value'")
                values[parts[0]] = float(parts[1])
    except OSError as exc:
        raise IoError(f"cannot read solution file: {exc}")
    return status, objective, values


def solve_with_command(model: LinearModel, cmd_template: str, timeout_s=None):
    """Dump the model, run the external command, read the solution back.

    Returns a Solution (import deferred to avoid a cycle with engine).
    """
    from flexsched.solver.engine import (ABORTED, INFEASIBLE, OPTIMAL,
                                         UNBOUNDED, Solution)

    with tempfile.TemporaryDirectory(prefix="flexsched_ext_") as tmp:
        lp_path = Path(tmp) / "model.lp"
        sol_path = Path(tmp) / "model.sol"
        write_lp(model, lp_path)
        cmd = cmd_template.format(lp=lp_path, sol=sol_path)
        try:
            proc = subprocess.run(cmd, shell=True, capture_output=True,
                                  timeout=timeout_s)
        except subprocess.TimeoutExpired:
            raise SolverAborted(f"external solver timed out: {cmd}")
        if proc.returncode != 0:
            raise SolverAborted(
                f"external solver failed ({proc.returncode}): "
                f"{proc.stderr.decode(errors='replace')[:400]}"
            )
        if not sol_path.exists():
            raise SolverAborted("external solver wrote no solution file")
        status, objective, by_name = parse_solution_file(sol_path)

    status_map = {
        "optimal": OPTIMAL,
        "feasible": "FeasibleGapLimit",
        "infeasible": INFEASIBLE,
        "unbounded": UNBOUNDED,
    }
    mapped = status_map.get(status, ABORTED)
    if mapped in (INFEASIBLE, UNBOUNDED):
        return Solution(mapped, None, float("inf"), float("inf"))
    values = np.zeros(model.n_vars)
    for j, name in enumerate(model.var_names):
        if name not in by_name:
            raise SolverAborted(f"external solution misses variable {name}")
        values[j] = by_name[name]
    obj = model.objective_value(values) if objective is None else objective
    return Solution(mapped, values, obj, 0.0)
