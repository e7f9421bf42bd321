"""Build script: compiles the optional FDTD update kernel extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so a failed compile only costs speed.
"""

import sys

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    # -ffp-contract=off keeps the C arithmetic bit-identical to the NumPy
    # fallback (no FMA contraction), which the backend parity test relies on.
    extensions = cythonize(
        [
            Extension(
                "rotsim.fdtd._kernels",
                ["src/rotsim/fdtd/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"rotsim: skipping compiled kernels ({exc}); pure-Python backend "
          "will be used", file=sys.stderr)
    extensions = []

setup(ext_modules=extensions)
