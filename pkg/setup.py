"""Build script: compiles the optional fast scan kernel.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed compile only costs speed. Run
``python setup.py build_ext --inplace`` to rebuild in a source checkout.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Degrade to the pure-NumPy backend if the C toolchain is missing."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            sys.stderr.write(f"warning: skipping compiled kernel build: {exc}\n")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            sys.stderr.write(f"warning: could not compile {ext.name}: {exc}\n")


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "derexpo._kernels",
        sources=["src/derexpo/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": "3",
        },
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
