"""LP/MILP solve entry points over the bounded simplex.

Branch & bound keeps a single evolving tableau: every node is just a set of
binary bound fixings, applied before a dual warm restart. Node selection is
best-bound (ties by node id), branching most-fractional (ties by lowest
variable index), so runs are deterministic for fixed options. A rounding
heuristic (fix binaries to the rounded LP point, polish the continuous part)
seeds incumbents early; callers can also inject a known feasible point.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

import numpy as np

from flexsched.errors import SolverAborted
from flexsched.linmodel import EQ, GE, INF, LE, LinearModel
from flexsched.solver import simplex
from flexsched.solver.simplex import BoundedSimplex

OPTIMAL = "Optimal"
FEASIBLE_GAP_LIMIT = "FeasibleGapLimit"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
ABORTED = "Aborted"

INT_TOL = 1e-7


@dataclass
class SolveOptions:
    mip_gap_rel: float = 1e-6
    time_limit_s: float = None
    node_limit: int = 500_000
    branching: str = "most-fractional"  # or "first-index"
    heuristic_every: int = 50
    max_lp_iter: int = None
    # optional model-aware rounding: maps an LP point to candidate binary
    # assignments (full-length arrays); each is polished and validated
    pattern_heuristic: object = None
    solver: str = "builtin"  # or "external"
    external_cmd: str = None  # template with {lp} and {sol} placeholders


@dataclass
class Solution:
    status: str
    values: np.ndarray
    objective: float
    gap: float
    nodes: int = 0
    iterations: int = 0
    wall_s: float = 0.0
    bound: float = -INF

    @property
    def ok(self):
        return self.status in (OPTIMAL, FEASIBLE_GAP_LIMIT)

    def value_map(self, model: LinearModel):
        return dict(zip(model.var_names, self.values))


def _clean(x):
    # +0.0 normalizes negative zeros so exports are backend-independent
    return np.asarray(x, dtype=np.float64) + 0.0


def _lp_status(st):
    return {
        simplex.OPTIMAL: OPTIMAL,
        simplex.INFEASIBLE: INFEASIBLE,
        simplex.UNBOUNDED: UNBOUNDED,
    }[st]


def solve_lp(model: LinearModel, opts: SolveOptions = None) -> Solution:
    """Solve the continuous relaxation to proven optimality."""
    opts = opts or SolveOptions()
    model.validate()
    t0 = time.monotonic()
    A, rels, b, c, lo, up, _is_bin = model.dense()
    eng = BoundedSimplex(A, rels, b, c, lo, up)
    res = eng.solve(max_iter=opts.max_lp_iter)
    wall = time.monotonic() - t0
    if res.status != simplex.OPTIMAL:
        return Solution(_lp_status(res.status), None, res.objective, INF,
                        iterations=res.iterations, wall_s=wall)
    return Solution(OPTIMAL, _clean(res.x), res.objective + model.obj_const, 0.0,
                    iterations=res.iterations, wall_s=wall,
                    bound=res.objective + model.obj_const)


def check_values(model: LinearModel, values, tol=1e-6):
    """True when values satisfy bounds, integrality, and all rows within tol."""
    x = np.asarray(values, dtype=np.float64)
    if x.shape != (model.n_vars,) or not np.all(np.isfinite(x)):
        return False
    lo = np.asarray(model.lo)
    up = np.asarray(model.up)
    if (x < lo - tol).any() or (x > up + tol).any():
        return False
    for j, kind in enumerate(model.kinds):
        if kind == "B" and abs(x[j] - round(x[j])) > INT_TOL:
            return False
    for idx, coef, rel, rhs, _name in model.rows:
        lhs = float(np.dot(coef, x[idx]))
        scale = 1.0 + abs(rhs)
        if rel == LE and lhs > rhs + tol * scale:
            return False
        if rel == GE and lhs < rhs - tol * scale:
            return False
        if rel == EQ and abs(lhs - rhs) > tol * scale:
            return False
    return True


class _Mip:
    """One branch & bound run; state shared across nodes via the engine."""

    def __init__(self, model, opts, warm_values):
        self.model = model
        self.opts = opts
        A, rels, b, c, lo, up, is_bin = model.dense()
        self.root_lo = lo
        self.root_up = up
        self.c = c
        # node LPs run on perturbed costs (anti-degeneracy); their objective
        # understates the true node minimum by at most this slack, which is
        # folded into every bound used for pruning
        self.eng = BoundedSimplex(A, rels, b, c, lo, up, keep_perturbed=True)
        self.slack = self.eng.perturbation_slack
        # binaries fixed at construction are constants, not branch candidates
        free_bin = is_bin & (self.eng.orig_to_compact >= 0)
        self.bin_idx = np.flatnonzero(free_bin)
        self.bin_eng = self.eng.orig_to_compact[self.bin_idx]
        self.fixed_bin = np.flatnonzero(is_bin & ~free_bin)
        self.inc_obj = INF  # engine-space objective (no constant)
        self.inc_x = None
        self.nodes = 0
        self.t0 = time.monotonic()
        if warm_values is not None and check_values(model, warm_values):
            self.inc_x = _clean(warm_values)
            self.inc_obj = float(np.dot(c, self.inc_x))

    # -- helpers ----------------------------------------------------------

    def _gap_abs(self):
        if self.inc_obj == INF:
            return 0.0
        return self.opts.mip_gap_rel * abs(self.inc_obj)

    def _apply(self, fixings):
        eng = self.eng
        eng.lo[self.bin_eng] = self.root_lo[self.bin_idx]
        eng.up[self.bin_eng] = self.root_up[self.bin_idx]
        for j, v in fixings.items():
            je = eng.orig_to_compact[j]
            eng.lo[je] = eng.up[je] = v

    def _try_incumbent(self, x):
        """Fix binaries to round(x), polish the continuous part, validate
        the candidate against the model rows directly (no tableau trust)."""
        eng, bi, be = self.eng, self.bin_idx, self.bin_eng
        pattern = np.round(x[bi])
        save_lo = eng.lo[be].copy()
        save_up = eng.up[be].copy()
        eng.lo[be] = pattern
        eng.up[be] = pattern
        res = eng.resolve(max_iter=self.opts.max_lp_iter)
        eng.lo[be] = save_lo
        eng.up[be] = save_up
        if res.status != simplex.OPTIMAL:
            return
        xx = res.x.copy()
        xx[bi] = pattern
        obj = float(np.dot(self.c, xx))
        if obj >= self.inc_obj or not check_values(self.model, xx):
            return
        self.inc_obj = obj
        self.inc_x = xx

    def _branch_var(self, x):
        frac = np.abs(x[self.bin_idx] - np.round(x[self.bin_idx]))
        if self.opts.branching == "first-index":
            j = int(np.flatnonzero(frac > INT_TOL)[0])
        else:
            j = int(np.argmax(frac))
        return int(self.bin_idx[j]), x[self.bin_idx[j]]

    def _out_of_time(self):
        return (
            self.opts.time_limit_s is not None
            and time.monotonic() - self.t0 > self.opts.time_limit_s
        )

    # -- main loop ---------------------------------------------------------

    def run(self):
        root = self.eng.solve(max_iter=self.opts.max_lp_iter)
        if root.status != simplex.OPTIMAL:
            return self._finish(_lp_status(root.status), bound=root.objective)

        heap = [(root.objective - self.slack, 0, {})]
        next_id = 1
        bound_glb = root.objective - self.slack
        limited = False

        while heap:
            if self.nodes >= self.opts.node_limit or self._out_of_time():
                limited = True
                bound_glb = min(heap[0][0], self.inc_obj)
                break
            bound, _nid, fixings = heapq.heappop(heap)
            if bound >= self.inc_obj - self._gap_abs():
                bound_glb = min(bound, self.inc_obj)
                break
            bound_glb = bound
            self._apply(fixings)
            res = self.eng.resolve(max_iter=self.opts.max_lp_iter)
            self.nodes += 1
            if res.status != simplex.OPTIMAL:
                continue
            node_lb = res.objective - self.slack
            if node_lb >= self.inc_obj - self._gap_abs():
                continue
            x = res.x
            frac = np.abs(x[self.bin_idx] - np.round(x[self.bin_idx]))
            if float(frac.max(initial=0.0)) <= INT_TOL:
                self._try_incumbent(x)
                continue
            if self.nodes == 1 or self.nodes % self.opts.heuristic_every == 0:
                self._try_incumbent(x)
                if self.opts.pattern_heuristic is not None:
                    for cand in self.opts.pattern_heuristic(x):
                        self._try_incumbent(cand)
                if node_lb >= self.inc_obj - self._gap_abs():
                    continue
            jvar, _xv = self._branch_var(x)
            for v in (0.0, 1.0):
                child = dict(fixings)
                child[jvar] = v
                heap_item = (node_lb, next_id, child)
                next_id += 1
                heapq.heappush(heap, heap_item)
        else:
            bound_glb = self.inc_obj if self.inc_x is not None else bound_glb

        if limited:
            status = FEASIBLE_GAP_LIMIT if self.inc_x is not None else ABORTED
        elif self.inc_x is None:
            status = INFEASIBLE
            bound_glb = INF
        else:
            status = OPTIMAL
        return self._finish(status, bound=bound_glb)

    def _finish(self, status, bound):
        const = self.model.obj_const
        wall = time.monotonic() - self.t0
        iters = self.eng.iterations
        if status in (INFEASIBLE, UNBOUNDED) or self.inc_x is None:
            obj = INF if status != UNBOUNDED else -INF
            sol = Solution(status, None, obj, INF, self.nodes, iters, wall)
            return sol
        obj = self.inc_obj + const
        gap = max(0.0, (self.inc_obj - bound) / max(abs(self.inc_obj), 1e-9))
        if status == OPTIMAL:
            gap = min(gap, self.opts.mip_gap_rel)  # proven by the prune rule
        x = _clean(self.inc_x)
        x[self.bin_idx] = np.round(x[self.bin_idx])
        return Solution(status, x, obj, gap, self.nodes, iters, wall,
                        bound=bound + const)


def solve_mip(model: LinearModel, opts: SolveOptions = None, warm_values=None) -> Solution:
    """Branch & bound MILP solve; deterministic for fixed options."""
    opts = opts or SolveOptions()
    model.validate()
    if opts.solver == "external":
        from flexsched.solver.external import solve_with_command

        if not opts.external_cmd:
            raise SolverAborted("external solver selected but no command configured")
        return solve_with_command(model, opts.external_cmd, opts.time_limit_s)
    if not any(k == "B" for k in model.kinds):
        return solve_lp(model, opts)
    return _Mip(model, opts, warm_values).run()


def require_solution(sol: Solution, what="model"):
    """Raise SolverAborted unless the solution is usable."""
    if not sol.ok:
        raise SolverAborted(f"{what}: solver returned {sol.status}")
    return sol
