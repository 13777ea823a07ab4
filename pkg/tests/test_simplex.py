"""LP engine: reference cases, scipy cross-checks, duality, warm restarts."""

import numpy as np
import pytest

from flexsched.linmodel import EQ, GE, INF, LE
from flexsched.solver.simplex import (INFEASIBLE, OPTIMAL, UNBOUNDED,
                                      BoundedSimplex)

scipy_opt = pytest.importorskip("scipy.optimize")


def _scipy_ref(A, rels, b, c, lo, up):
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for i, rel in enumerate(rels):
        if rel == LE:
            A_ub.append(A[i]); b_ub.append(b[i])
        elif rel == GE:
            A_ub.append(-A[i]); b_ub.append(-b[i])
        else:
            A_eq.append(A[i]); b_eq.append(b[i])
    bounds = list(zip(np.where(np.isfinite(lo), lo, None),
                      np.where(np.isfinite(up), up, None)))
    kw = dict(
        A_ub=np.array(A_ub) if A_ub else None, b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(A_eq) if A_eq else None, b_eq=np.array(b_eq) if b_eq else None,
        bounds=bounds, method="highs",
    )
    res = scipy_opt.linprog(c, **kw)
    if res.status == 2:
        # HiGHS presolve sometimes calls unbounded corner cases infeasible
        res = scipy_opt.linprog(c, options={"presolve": False}, **kw)
    return res


def test_min_x_with_floor():
    # min x subject to x >= 3, x otherwise free
    eng = BoundedSimplex(np.array([[1.0]]), [GE], np.array([3.0]),
                         np.array([1.0]), np.array([-INF]), np.array([INF]))
    res = eng.solve()
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(3.0)
    assert res.x[0] == pytest.approx(3.0)


def test_infeasible_pair():
    A = np.array([[1.0], [1.0]])
    eng = BoundedSimplex(A, [LE, GE], np.array([1.0, 2.0]),
                         np.array([0.0]), np.array([0.0]), np.array([INF]))
    assert eng.solve().status == INFEASIBLE


def test_unbounded_direction():
    eng = BoundedSimplex(np.array([[1.0, -1.0]]), [LE], np.array([1.0]),
                         np.array([-1.0, 0.0]), np.zeros(2), np.full(2, INF))
    assert eng.solve().status == UNBOUNDED


def test_bounds_only_model():
    eng = BoundedSimplex(np.zeros((0, 2)), [], np.zeros(0),
                         np.array([2.0, -1.0]), np.array([1.0, 0.0]), np.array([5.0, 4.0]))
    res = eng.solve()
    assert res.status == OPTIMAL
    assert res.x == pytest.approx([1.0, 4.0])


def _random_lp(rng):
    m = int(rng.integers(1, 9))
    n = int(rng.integers(1, 10))
    A = np.round(rng.normal(size=(m, n)) * 3, 1)
    b = np.round(rng.normal(size=m) * 4, 1)
    c = np.round(rng.normal(size=n) * 2, 1)
    rels = [[LE, EQ, GE][int(rng.integers(0, 3))] for _ in range(m)]
    lo = np.where(rng.random(n) < 0.8, 0.0, -INF)
    up = np.where(rng.random(n) < 0.7, rng.integers(1, 10, n).astype(float), INF)
    fix = rng.random(n) < 0.1
    up[fix] = lo[fix] = np.where(np.isfinite(lo[fix]), lo[fix], 0.0)
    return A, rels, b, c, lo, up


def test_random_lps_match_reference(rng):
    agree = 0
    for _ in range(120):
        A, rels, b, c, lo, up = _random_lp(rng)
        ref = _scipy_ref(A, rels, b, c, lo, up)
        res = BoundedSimplex(A, rels, b, c, lo, up).solve()
        if ref.status == 0:
            assert res.status == OPTIMAL
            assert res.objective == pytest.approx(ref.fun, rel=1e-6, abs=1e-6)
            agree += 1
        elif ref.status == 2:
            assert res.status == INFEASIBLE
        elif ref.status == 3:
            assert res.status == UNBOUNDED
    assert agree > 30  # the sweep must actually exercise optimal cases


def test_weak_duality_on_random_instances(rng):
    for _ in range(40):
        A, rels, b, c, lo, up = _random_lp(rng)
        eng = BoundedSimplex(A, rels, b, c, lo, up)
        res = eng.solve()
        if res.status != OPTIMAL:
            continue
        bound = eng.dual_bound()
        assert res.objective >= bound - 1e-7 * (1.0 + abs(res.objective))
        # at optimality the bound is tight
        assert res.objective == pytest.approx(bound, rel=1e-6, abs=1e-5)


def test_warm_restart_matches_cold(rng):
    for _ in range(40):
        A, rels, b, c, lo, up = _random_lp(rng)
        eng = BoundedSimplex(A, rels, b, c, lo, up)
        if eng.solve().status != OPTIMAL:
            continue
        n = len(c)
        j = int(rng.integers(0, n))
        v = float(rng.integers(0, 3))
        lo2, up2 = lo.copy(), up.copy()
        lo2[j] = up2[j] = v
        if eng.orig_to_compact[j] < 0:
            continue  # fixed at construction, not re-boundable
        eng.set_bounds(j, v, v)
        warm = eng.resolve(verify=True)
        cold = BoundedSimplex(A, rels, b, c, lo2, up2).solve()
        assert warm.status == cold.status
        if warm.status == OPTIMAL:
            assert warm.objective == pytest.approx(cold.objective, rel=1e-6, abs=1e-6)


def test_solutions_respect_bounds_and_rows(rng):
    for _ in range(40):
        A, rels, b, c, lo, up = _random_lp(rng)
        res = BoundedSimplex(A, rels, b, c, lo, up).solve()
        if res.status != OPTIMAL:
            continue
        x = res.x
        assert (x >= lo - 1e-7).all() and (x <= up + 1e-7).all()
        for i, rel in enumerate(rels):
            lhs = float(A[i] @ x)
            scale = 1.0 + abs(b[i])
            if rel == LE:
                assert lhs <= b[i] + 1e-6 * scale
            elif rel == GE:
                assert lhs >= b[i] - 1e-6 * scale
            else:
                assert lhs == pytest.approx(b[i], abs=1e-6 * scale)


def test_determinism():
    rng = np.random.default_rng(4)
    A, rels, b, c, lo, up = _random_lp(rng)
    r1 = BoundedSimplex(A, rels, b, c, lo, up).solve()
    r2 = BoundedSimplex(A, rels, b, c, lo, up).solve()
    assert r1.status == r2.status
    if r1.status == OPTIMAL:
        assert np.array_equal(r1.x, r2.x)
        assert r1.iterations == r2.iterations
