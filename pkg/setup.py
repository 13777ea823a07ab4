"""Build script: compiles the simplex pivot kernel when a toolchain is present.

The package works without the extension (a numpy fallback is selected at
import), so any build failure here downgrades to a pure-Python install
instead of aborting.
"""

import sys

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    # -ffp-contract=off keeps the compiled kernel bitwise-identical to the
    # numpy fallback (no fused multiply-add), so results do not depend on
    # which path was selected at import.
    extensions = cythonize(
        [
            Extension(
                "flexsched._kernels._speedups",
                ["src/flexsched/_kernels/_speedups.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - toolchain-dependent
    print(f"flexsched: building without compiled kernels ({exc})", file=sys.stderr)
    extensions = []

setup(ext_modules=extensions)
