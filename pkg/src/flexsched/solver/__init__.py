"""Solve engines: built-in LP/MILP, enumeration oracle, external adapter."""

from flexsched.solver.engine import (ABORTED, FEASIBLE_GAP_LIMIT, INFEASIBLE,
                                     OPTIMAL, UNBOUNDED, Solution, SolveOptions,
                                     check_values, require_solution, solve_lp,
                                     solve_mip)
from flexsched.solver.oracle import OracleResult, oracle_enumerate
from flexsched.solver.simplex import BoundedSimplex

__all__ = [
    "ABORTED", "FEASIBLE_GAP_LIMIT", "INFEASIBLE", "OPTIMAL", "UNBOUNDED",
    "Solution", "SolveOptions", "check_values", "require_solution",
    "solve_lp", "solve_mip", "OracleResult", "oracle_enumerate", "BoundedSimplex",
]
