"""Pivot kernel backends agree bitwise and implement the elimination."""

import numpy as np
import pytest

from flexsched import _kernels
from flexsched._kernels import _pykernels


def _reference_eliminate(M, r, q):
    out = M.copy()
    out[r] = out[r] / out[r, q]
    for i in range(out.shape[0]):
        if i != r:
            out[i] = out[i] - out[i, q] * out[r]
    out[:, q] = 0.0
    out[r, q] = 1.0
    return out


def test_numpy_kernel_matches_reference(rng):
    for _ in range(20):
        m = int(rng.integers(2, 12))
        n = int(rng.integers(2, 12))
        M = rng.normal(size=(m, n))
        r = int(rng.integers(0, m))
        q = int(rng.integers(0, n))
        if abs(M[r, q]) < 1e-3:
            M[r, q] = 1.0
        ref = _reference_eliminate(M, r, q)
        got = M.copy()
        _pykernels.eliminate(got, r, q)
        assert np.allclose(got, ref, atol=1e-12)
        assert np.array_equal(got[:, q], np.eye(m)[r] * 0 + np.where(np.arange(m) == r, 1.0, 0.0))


def test_backends_bitwise_identical(rng):
    if not _kernels.HAVE_COMPILED:
        pytest.skip("compiled kernel not built")
    for _ in range(30):
        m = int(rng.integers(2, 40))
        n = int(rng.integers(2, 40))
        M = rng.normal(size=(m, n))
        r = int(rng.integers(0, m))
        q = int(rng.integers(0, n))
        if abs(M[r, q]) < 1e-3:
            M[r, q] = -1.5
        a = M.copy()
        b = M.copy()
        _kernels.eliminate(a, r, q)
        _pykernels.eliminate(b, r, q)
        assert (a == b).all()


def test_pure_fallback_solves_identically():
    # a full solve through the numpy backend gives the same answer
    import subprocess
    import sys

    code = (
        "import numpy as np\n"
        "from flexsched.linmodel import LE, GE\n"
        "from flexsched.solver.simplex import BoundedSimplex\n"
        "from flexsched import _kernels\n"
        "A = np.array([[1.0, 2.0], [3.0, -1.0]])\n"
        "eng = BoundedSimplex(A, [LE, GE], np.array([4.0, 1.0]),\n"
        "                     np.array([1.0, -2.0]), np.zeros(2), np.array([5.0, 5.0]))\n"
        "res = eng.solve()\n"
        "print(_kernels.BACKEND, repr(res.objective), repr(list(res.x)))\n"
    )
    runs = {}
    for env_val in ("0", "1"):
        out = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True, text=True,
            env={"FLEXSCHED_PURE": env_val, "PATH": "/usr/bin:/bin:/usr/local/bin"},
        )
        assert out.returncode == 0, out.stderr
        backend, rest = out.stdout.split(" ", 1)
        runs[env_val] = rest
        if env_val == "1":
            assert backend == "numpy"
    assert runs["0"] == runs["1"]
