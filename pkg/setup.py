"""Build the optional compiled kernels; the package works without them."""
import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("IFRA_NO_EXTENSIONS", "") in ("", "0"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "ifra._smo",
                    ["src/ifra/_smo.pyx"],
                    include_dirs=[np.get_include()],
                    # no FMA contraction: results must match the Python twin bit for bit
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError as exc:
        print(f"ifra: building without compiled kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
