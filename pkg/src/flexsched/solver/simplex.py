"""Bounded-variable simplex over a dense tableau, with dual warm restarts.

The engine keeps one evolving tableau

    M[:m, :ncols]  basis-inverse image of [structural | slack | artificial]
    M[:m,  ncols]  basis-inverse image of the rhs
    M[ m, :ncols]  reduced costs

Nonbasic variables sit at one of their bounds (or at zero when free); basic
values are maintained incrementally and recomputed from the rhs column on
warm restarts. Cold solves start from the slack basis: when every variable
can be placed dual-feasibly (always true for the plant models, whose
variables are boxed) a pure dual loop reaches the optimum; otherwise a
classic two-phase primal with artificial columns runs. Warm restarts after
bound changes (branch & bound node moves) keep the basis, reprice nothing,
and re-establish primal feasibility with the dual loop, since reduced costs
do not depend on bounds.

Anti-cycling: Dantzig pricing with a most-violated dual row, falling back to
Bland's rule after a degenerate streak. Accumulated round-off is squashed by
periodic refactorization (exact basis solve against the original columns).
"""

from __future__ import annotations

import numpy as np

from flexsched import _kernels
from flexsched.errors import NumericalBreakdown
from flexsched.linmodel import EQ, GE, INF, LE

AT_LO, AT_UP, BASIC, FREE = 0, 1, 2, 3

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_DEG_STREAK = 400  # degenerate pivots before switching to Bland's rule
_GOLDEN = 0.6180339887498949


class _ResetRetry(Exception):
    """Internal: basis went singular and was reset; redo the solve loops."""


class LPResult:
    __slots__ = ("status", "objective", "x", "iterations")

    def __init__(self, status, objective, x, iterations):
        self.status = status
        self.objective = objective
        self.x = x
        self.iterations = iterations


class BoundedSimplex:
    """One LP instance; supports a cold solve and warm dual re-solves."""

    def __init__(self, A, rels, b, c, lo, up, dtol=1e-9, ptol=1e-7, refactor_every=2000,
                 keep_perturbed=False):
        A = np.asarray(A, dtype=np.float64).copy()
        b = np.asarray(b, dtype=np.float64).copy()
        c = np.asarray(c, dtype=np.float64)
        lo = np.asarray(lo, dtype=np.float64)
        up = np.asarray(up, dtype=np.float64)
        m, n_orig = A.shape
        self.m = m
        self.dtol = dtol
        self.ptol = ptol
        self.piv_tol = 1e-9
        # refactorization costs O(m^2 n); space it so pivot work dominates
        self.refactor_every = max(refactor_every, 3 * m)

        # columns fixed at construction never pivot; fold them into the rhs
        # and keep the tableau narrow (they reappear in structural_values)
        fixed = lo == up
        self.n_orig = n_orig
        self.fixed_values = np.where(fixed, lo, 0.0)
        self._fixed_cost = float(np.dot(c[fixed], lo[fixed]))
        self.keep = np.flatnonzero(~fixed)
        self.orig_to_compact = np.full(n_orig, -1, dtype=np.int64)
        self.orig_to_compact[self.keep] = np.arange(self.keep.size)
        if fixed.any():
            b = b - A[:, fixed] @ lo[fixed]
            A = A[:, self.keep]
            c = c[self.keep]
            lo = lo[self.keep]
            up = up[self.keep]
        n = self.keep.size
        self.n_struct = n

        # row equilibration: positive scaling leaves the solution and the
        # slack bound structure unchanged but keeps pivots well-conditioned
        if m:
            scale = np.abs(A).max(axis=1, initial=0.0)
            scale[scale == 0.0] = 1.0
            A /= scale[:, None]
            b /= scale
        self.b = b

        slack_lo = np.zeros(m)
        slack_up = np.zeros(m)
        for i, rel in enumerate(rels):
            if rel == LE:
                slack_lo[i], slack_up[i] = 0.0, INF
            elif rel == GE:
                slack_lo[i], slack_up[i] = -INF, 0.0
            elif rel == EQ:
                slack_lo[i], slack_up[i] = 0.0, 0.0
            else:
                raise ValueError(f"bad relation {rel!r}")

        self.A_all = np.hstack([A, np.eye(m)])
        self.c_all = np.concatenate([np.asarray(c, dtype=np.float64), np.zeros(m)])
        self.lo = np.concatenate([np.asarray(lo, dtype=np.float64), slack_lo])
        self.up = np.concatenate([np.asarray(up, dtype=np.float64), slack_up])
        self.ncols = n + m
        self.n_art = 0

        self.M = None
        self.basis = None
        self.status = None
        self.xval = None
        self.xb = None
        self.iterations = 0
        self._since_refactor = 0
        self._scratch = None
        self._resets = 0
        # Deterministic anti-degeneracy cost perturbation. Directions follow
        # the bound structure (so dual-feasible placements stay so) and sizes
        # shrink with the variable's range, which caps the total objective
        # error at perturbation_slack: a branch & bound caller that keeps the
        # perturbation active subtracts that slack from its node bounds.
        scale = 1e-6 * (1.0 + float(np.abs(self.c_all).max(initial=0.0)))
        jitter = np.modf((np.arange(self.ncols) + 1) * _GOLDEN)[0]
        direction = np.where(self.lo > -INF, 1.0, np.where(self.up < INF, -1.0, 0.0))
        ranges = self.up - self.lo
        bounded = np.isfinite(ranges)
        pert = np.where(bounded, scale * (0.5 + jitter) / (1.0 + np.where(bounded, ranges, 0.0)), 0.0)
        self._pert = pert * direction
        self._c_perturbed = self.c_all + self._pert
        self.perturbation_slack = float(np.dot(np.abs(self._pert[bounded]), ranges[bounded]))
        self.keep_perturbed = keep_perturbed
        self._c_active = self._c_perturbed

    # ---------------------------------------------------------------- setup

    def _place_nonbasic(self, c):
        """Put each column at a bound; report whether the placement is dual feasible."""
        nc = self.ncols
        status = np.empty(nc, dtype=np.int8)
        xval = np.zeros(nc)
        dual_ok = True
        lo, up = self.lo, self.up
        for j in range(nc):
            if lo[j] == up[j]:
                status[j] = AT_LO
                xval[j] = lo[j]
            elif c[j] > 0:
                if lo[j] > -INF:
                    status[j], xval[j] = AT_LO, lo[j]
                else:
                    status[j], xval[j] = (AT_UP, up[j]) if up[j] < INF else (FREE, 0.0)
                    dual_ok = False
            elif c[j] < 0:
                if up[j] < INF:
                    status[j], xval[j] = AT_UP, up[j]
                else:
                    status[j], xval[j] = (AT_LO, lo[j]) if lo[j] > -INF else (FREE, 0.0)
                    dual_ok = False
            else:
                if lo[j] > -INF:
                    status[j], xval[j] = AT_LO, lo[j]
                elif up[j] < INF:
                    status[j], xval[j] = AT_UP, up[j]
                else:
                    status[j], xval[j] = FREE, 0.0
        return status, xval, dual_ok

    def solve(self, max_iter=None):
        """Cold solve from the slack basis. Returns an LPResult."""
        m = self.m
        # drop artificial columns from any previous two-phase attempt
        base = self.n_struct + m
        if self.ncols > base:
            self.A_all = self.A_all[:, :base]
            self.c_all = self.c_all[:base]
            self.lo = self.lo[:base]
            self.up = self.up[:base]
            self._c_perturbed = self._c_perturbed[:base]
            self._pert = self._pert[:base]
            self.ncols = base
            self.n_art = 0
        self._c_active = self._c_perturbed
        nc = self.ncols

        status, xval, dual_ok = self._place_nonbasic(self._c_perturbed)
        if m == 0:
            # bounds-only model: each variable sits at its cost-preferred bound
            self.status, self.xval = status, xval
            self.basis = np.zeros(0, dtype=np.int64)
            self.xb = np.zeros(0)
            self.M = np.zeros((1, nc + 1))
            self.M[0, :nc] = self.c_all
            self._scratch = np.empty_like(self.M)
            return self._result(OPTIMAL if dual_ok else UNBOUNDED)
        resid = self.b - self.A_all[:, : self.n_struct] @ xval[: self.n_struct]

        if dual_ok:
            self.M = np.zeros((m + 1, nc + 1))
            self.M[:m, :nc] = self.A_all
            self.M[:m, nc] = self.b
            self.M[m, :nc] = self._c_perturbed
            self.basis = np.arange(self.n_struct, self.n_struct + m, dtype=np.int64)
            self.status = status
            self.status[self.basis] = BASIC
            self.xval = xval
            self.xb = resid.copy()
            self._scratch = np.empty_like(self.M)
            self._since_refactor = 0
            for _attempt in range(4):
                try:
                    st = self._dual_loop(max_iter)
                    if st == OPTIMAL and not self.keep_perturbed:
                        self._c_active = self.c_all
                        self._set_cost_row(self.c_all)
                    if st == OPTIMAL:
                        st = self._primal_loop(max_iter, phase1=False)
                    if st == OPTIMAL:
                        st = self._checked_optimum(phase1=False)
                    return self._result(st)
                except _ResetRetry:
                    continue
            raise NumericalBreakdown("cold solve kept losing its basis")

        try:
            return self._solve_two_phase(status, xval, resid, max_iter)
        except _ResetRetry:
            return self.solve(max_iter)

    def _solve_two_phase(self, status, xval, resid, max_iter):
        m, n = self.m, self.n_struct
        # clamp each slack to its bounds; the remainder goes to an artificial
        s_lo, s_up = self.lo[n : n + m], self.up[n : n + m]
        s_val = np.clip(resid, s_lo, s_up)
        art_resid = resid - s_val
        art_rows = np.flatnonzero(np.abs(art_resid) > 1e-12)
        n_art = art_rows.size
        self.n_art = n_art
        nc = self.ncols = n + m + n_art

        sigma = np.sign(art_resid[art_rows])
        art_cols = np.zeros((m, n_art))
        art_cols[art_rows, np.arange(n_art)] = sigma
        self.A_all = np.hstack([self.A_all, art_cols])
        self.c_all = np.concatenate([self.c_all, np.zeros(n_art)])
        self.lo = np.concatenate([self.lo, np.zeros(n_art)])
        self.up = np.concatenate([self.up, np.full(n_art, INF)])

        self.M = np.zeros((m + 1, nc + 1))
        self.M[:m, :nc] = self.A_all
        self.M[:m, nc] = self.b
        self.M[art_rows] *= sigma[:, None]

        self.basis = np.arange(n, n + m, dtype=np.int64)
        self.basis[art_rows] = n + m + np.arange(n_art)
        self.status = np.concatenate([status, np.full(n_art, BASIC, dtype=np.int8)])
        self.status[self.basis] = BASIC
        slack_nb = np.ones(m, dtype=bool)
        slack_nb[self.basis[self.basis < n + m] - n] = False
        for i in np.flatnonzero(slack_nb):
            j = n + i
            self.status[j] = AT_UP if s_val[i] == s_up[i] and s_up[i] < INF else AT_LO
        self.xval = np.concatenate([xval, np.zeros(n_art)])
        self.xval[n : n + m] = s_val
        self.xb = np.where(slack_nb, np.abs(art_resid), resid)
        self._scratch = np.empty_like(self.M)
        self._since_refactor = 0

        # phase 1: minimize the artificial total
        c1 = np.zeros(nc)
        c1[n + m :] = 1.0
        self._set_cost_row(c1)
        self._art_mark = np.zeros(nc, dtype=bool)
        self._art_mark[n + m :] = True
        st = self._primal_loop(max_iter, phase1=True)
        if st != OPTIMAL:
            return self._result(st)
        art_total = float(np.sum(self.xb[self.basis >= n + m]))
        if art_total > 1e-6 * (1.0 + float(np.abs(self.b).max(initial=0.0))):
            return self._result(INFEASIBLE)
        # lock artificials out and switch to the real objective (exact costs:
        # this path only serves general LPs, never the perturbed MIP engine)
        self.lo[n + m :] = 0.0
        self.up[n + m :] = 0.0
        self.xval[n + m :] = 0.0
        self._c_active = self.c_all
        self._set_cost_row(self.c_all)
        st = self._primal_loop(max_iter, phase1=False)
        if st == OPTIMAL:
            st = self._checked_optimum(phase1=False)
        return self._result(st)

    def _set_cost_row(self, c):
        m, nc = self.m, self.ncols
        cb = c[self.basis]
        self.M[m, :nc] = c - cb @ self.M[:m, :nc]
        self.M[m, self.basis] = 0.0

    # ------------------------------------------------------------- restarts

    def resolve(self, max_iter=None, verify=False):
        """Re-establish feasibility after bound changes; dual loop to optimum.

        Node re-solves skip exact verification for speed; pass verify=True
        for results that leave the solver (incumbents, final answers).
        """
        if self.M is None:
            return self.solve(max_iter)
        for _attempt in range(4):
            try:
                # bound changes can leave a nonbasic on the dual-infeasible
                # side (e.g. a binary unfixed after a node); flip it over
                d = self.M[self.m, : self.ncols]
                movable = self.up > self.lo
                flip = (self.status == AT_LO) & movable & (d < -self.dtol) & (self.up < INF)
                self.status[flip] = AT_UP
                flip = (self.status == AT_UP) & movable & (d > self.dtol) & (self.lo > -INF)
                self.status[flip] = AT_LO
                at_lo = self.status == AT_LO
                at_up = self.status == AT_UP
                self.xval[at_lo] = self.lo[at_lo]
                self.xval[at_up] = self.up[at_up]
                self._recompute_xb()
                st = self._dual_loop(max_iter)
                if st == OPTIMAL:
                    # un-flippable dual violations (free or one-sided vars)
                    # need a primal cleanup; exits after one scan when clean
                    st = self._primal_loop(max_iter, phase1=False)
                if st == OPTIMAL and verify:
                    st = self._checked_optimum(phase1=False)
                return self._result(st)
            except _ResetRetry:
                continue
        raise NumericalBreakdown("warm restart kept losing its basis")

    def verify_optimal(self):
        """Exact re-check of the current claimed optimum (refactor + residuals)."""
        return self._result(self._checked_optimum(phase1=False))

    def _recompute_xb(self):
        m, nc = self.m, self.ncols
        nb = np.flatnonzero(self.status != BASIC)
        vals = self.xval[nb]
        nz = vals != 0.0
        self.xb = self.M[:m, nc].copy()
        if np.any(nz):
            self.xb -= self.M[:m, nb[nz]] @ vals[nz]

    # ----------------------------------------------------------------- loops

    def _primal_loop(self, max_iter, phase1):
        m, nc = self.m, self.ncols
        limit = max_iter or max(20000, 10 * (m + nc))
        degen = 0
        for _ in range(limit):
            d = self.M[m, :nc]
            movable = self.up > self.lo
            viol = np.zeros(nc)
            sel = (self.status == AT_LO) & movable & (d < -self.dtol)
            viol[sel] = -d[sel]
            sel = (self.status == AT_UP) & movable & (d > self.dtol)
            viol[sel] = d[sel]
            sel = (self.status == FREE) & (np.abs(d) > self.dtol)
            viol[sel] = np.abs(d[sel])
            if not viol.any():
                return OPTIMAL
            if degen > _DEG_STREAK:
                q = int(np.flatnonzero(viol > 0)[0])  # Bland
            else:
                q = int(np.argmax(viol))
            direction = -1.0 if d[q] > 0 else 1.0

            alpha = self.M[:m, q]
            delta = direction * alpha
            lo_b = self.lo[self.basis]
            up_b = self.up[self.basis]
            t_rows = np.full(m, INF)
            dec = delta > self.piv_tol
            sel = dec & (lo_b > -INF)
            t_rows[sel] = (self.xb[sel] - lo_b[sel]) / delta[sel]
            inc = delta < -self.piv_tol
            sel = inc & (up_b < INF)
            t_rows[sel] = (self.xb[sel] - up_b[sel]) / delta[sel]
            np.maximum(t_rows, 0.0, out=t_rows)
            t_block = float(t_rows.min(initial=INF))
            t_own = INF
            if self.status[q] != FREE and self.up[q] < INF and self.lo[q] > -INF:
                t_own = self.up[q] - self.lo[q]

            t = min(t_block, t_own)
            if t == INF:
                return UNBOUNDED
            degen = degen + 1 if t < 1e-11 else 0

            if t_own < t_block - 1e-12:
                # bound flip, no pivot
                self.xb -= delta * t_own
                self.xval[q] = self.up[q] if self.status[q] == AT_LO else self.lo[q]
                self.status[q] = AT_UP if self.status[q] == AT_LO else AT_LO
                self.iterations += 1
                continue

            cand = np.flatnonzero(t_rows <= t + 1e-10)
            if degen > _DEG_STREAK:
                r = int(cand[np.argmin(self.basis[cand])])
            else:
                r = int(cand[np.argmax(np.abs(delta[cand]))])
            self._pivot(r, q, self.xval[q] + direction * t, delta, t, leaving_low=dec[r])
        raise NumericalBreakdown(
            f"primal simplex iteration limit ({limit}) hit; possible cycling"
        )

    def _dual_loop(self, max_iter):
        m, nc = self.m, self.ncols
        if m == 0:
            return OPTIMAL
        limit = max_iter or max(20000, 10 * (m + nc))
        degen = 0
        for _ in range(limit):
            lo_b = self.lo[self.basis]
            up_b = self.up[self.basis]
            below = lo_b - self.xb
            above = self.xb - up_b
            worst = np.maximum(below, above)
            r = int(np.argmax(worst))
            if worst[r] <= self.ptol:
                return OPTIMAL
            if degen > _DEG_STREAK:
                # Bland: lowest basis-variable index among violated rows
                rows = np.flatnonzero(worst > self.ptol)
                r = int(rows[np.argmin(self.basis[rows])])
            is_below = below[r] >= above[r]

            row = self.M[r, :nc]
            d = self.M[m, :nc]
            movable = self.up > self.lo
            if is_below:  # need to raise xb[r]
                elig = movable & (
                    ((self.status == AT_LO) & (row < -self.piv_tol))
                    | ((self.status == AT_UP) & (row > self.piv_tol))
                    | ((self.status == FREE) & (np.abs(row) > self.piv_tol))
                )
            else:
                elig = movable & (
                    ((self.status == AT_LO) & (row > self.piv_tol))
                    | ((self.status == AT_UP) & (row < -self.piv_tol))
                    | ((self.status == FREE) & (np.abs(row) > self.piv_tol))
                )
            cols = np.flatnonzero(elig)
            if cols.size == 0:
                return INFEASIBLE
            ratios = np.abs(d[cols]) / np.abs(row[cols])
            theta = float(ratios.min())
            degen = degen + 1 if theta < 1e-11 else 0
            near = cols[ratios <= theta + 1e-12]
            if degen > _DEG_STREAK:
                q = int(near.min())
            else:
                q = int(near[np.argmax(np.abs(row[near]))])

            target = lo_b[r] if is_below else up_b[r]
            step = (self.xb[r] - target) / row[q]
            self.xb -= self.M[:m, q] * step
            leaving = self.basis[r]
            self.xval[leaving] = target
            self.status[leaving] = AT_LO if is_below else AT_UP
            new_val = self.xval[q] + step
            self.basis[r] = q
            self.status[q] = BASIC
            self.xb[r] = new_val
            self._eliminate(r, q)
        raise NumericalBreakdown(
            f"dual simplex iteration limit ({limit}) hit; possible cycling"
        )

    def _pivot(self, r, q, entering_value, delta, t, leaving_low):
        if t != 0.0:
            self.xb -= delta * t
        leaving = self.basis[r]
        if leaving_low:
            self.xval[leaving] = self.lo[leaving]
            self.status[leaving] = AT_LO
        else:
            self.xval[leaving] = self.up[leaving]
            self.status[leaving] = AT_UP
        if getattr(self, "_art_mark", None) is not None and self._art_mark[leaving]:
            self.lo[leaving] = self.up[leaving] = 0.0
            self.xval[leaving] = 0.0
        self.basis[r] = q
        self.status[q] = BASIC
        self.xb[r] = entering_value
        self._eliminate(r, q)

    def _eliminate(self, r, q):
        _kernels.eliminate(self.M, r, q, self._scratch)
        self.iterations += 1
        self._since_refactor += 1
        if self._since_refactor >= self.refactor_every:
            self.refactor()

    # ------------------------------------------------------------- numerics

    def refactor(self):
        """Rebuild the tableau exactly from the original columns and the basis.

        A singular basis means accumulated round-off corrupted earlier pivot
        choices; recovery resets to the slack basis and replays the solve
        loops (signalled with _ResetRetry).
        """
        m, nc = self.m, self.ncols
        B = self.A_all[:, self.basis]
        try:
            sol = np.linalg.solve(B, np.hstack([self.A_all, self.b[:, None]]))
        except np.linalg.LinAlgError:
            self._resets += 1
            if self._resets > 3:
                raise NumericalBreakdown("basis keeps going singular; giving up")
            self._cold_reset()
            raise _ResetRetry()
        self.M[:m, :] = sol
        self._set_cost_row(self._c_active)
        self._recompute_xb()
        self._since_refactor = 0

    def _cold_reset(self):
        """Fall back to the slack basis, everything else at its nearest bound."""
        m, nc = self.m, self.ncols
        status = np.full(nc, FREE, dtype=np.int8)
        xval = np.zeros(nc)
        has_up = self.up < INF
        status[has_up] = AT_UP
        xval[has_up] = self.up[has_up]
        has_lo = self.lo > -INF
        status[has_lo] = AT_LO
        xval[has_lo] = self.lo[has_lo]
        self.basis = np.arange(self.n_struct, self.n_struct + m, dtype=np.int64)
        status[self.basis] = BASIC
        self.status = status
        self.xval = xval
        self.M = np.zeros((m + 1, nc + 1))
        self.M[:m, :nc] = self.A_all
        self.M[:m, nc] = self.b
        self.M[m, :nc] = self._c_active
        self._scratch = np.empty_like(self.M)
        self._recompute_xb()
        self._since_refactor = 0

    def _checked_optimum(self, phase1):
        """Verify the claimed optimum exactly; refactor and continue if round-off lied."""
        for _ in range(3):
            self.refactor()
            lo_b = self.lo[self.basis]
            up_b = self.up[self.basis]
            feas = max(
                float((lo_b - self.xb).max(initial=0.0)),
                float((self.xb - up_b).max(initial=0.0)),
            )
            d = self.M[self.m, : self.ncols]
            movable = self.up > self.lo
            dual_viol = 0.0
            sel = (self.status == AT_LO) & movable
            if sel.any():
                dual_viol = max(dual_viol, float(-(d[sel].min(initial=0.0))))
            sel = (self.status == AT_UP) & movable
            if sel.any():
                dual_viol = max(dual_viol, float(d[sel].max(initial=0.0)))
            sel = self.status == FREE
            if sel.any():
                dual_viol = max(dual_viol, float(np.abs(d[sel]).max(initial=0.0)))
            if feas <= self.ptol and dual_viol <= 1e-6:
                return OPTIMAL
            st = self._dual_loop(None)
            if st != OPTIMAL:
                return st
            st = self._primal_loop(None, phase1=phase1)
            if st != OPTIMAL:
                return st
        raise NumericalBreakdown("could not stabilize the claimed optimum")

    # --------------------------------------------------------------- output

    def full_values(self):
        x = self.xval.copy()
        x[self.basis] = self.xb
        return x

    def structural_values(self):
        """Values on the original (pre-compaction) structural indexing."""
        x = self.fixed_values.copy()
        x[self.keep] = self.full_values()[: self.n_struct]
        return x

    def objective(self):
        return float(self.c_all @ self.full_values()) + self._fixed_cost

    def set_bounds(self, orig_idx, lo, up):
        """Change one structural variable's bounds (original indexing)."""
        j = int(self.orig_to_compact[orig_idx])
        if j < 0:
            raise ValueError("cannot rebound a variable fixed at construction")
        self.lo[j] = lo
        self.up[j] = up

    def dual_bound(self):
        """Objective of the dual solution implied by the basis (for weak duality)."""
        try:
            y = np.linalg.solve(
                self.A_all[:, self.basis].T, self.c_all[self.basis]
            )
        except np.linalg.LinAlgError:
            return -INF
        # bound contribution of nonbasic variables at their bounds
        d = self.c_all - y @ self.A_all
        nb = self.status != BASIC
        contrib = float(np.dot(d[nb], self.xval[nb]))
        return float(y @ self.b) + contrib + self._fixed_cost

    def _result(self, status):
        if status == OPTIMAL:
            return LPResult(OPTIMAL, self.objective(), self.structural_values(), self.iterations)
        return LPResult(status, INF if status == INFEASIBLE else -INF, None, self.iterations)
