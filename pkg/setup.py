"""Build script: compiles the simulation core unless GSRES_PURE is set.

The core lives in ``src/gsres/_core.py`` and is valid both as plain Python
and as Cython pure-Python-mode source.  When compiled, the extension module
shadows the .py file on import; without it the package falls back to the
interpreted twin.  ``-ffp-contract=off`` keeps the compiled float arithmetic
bit-identical to the interpreted one (no FMA contraction).
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("GSRES_PURE"):
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "gsres._core",
                ["src/gsres/_core.py"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
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

setup(ext_modules=ext_modules)
