"""Build glue for the optional compiled kernels.

The package is pure Python plus one Cython extension holding the training
hot loop (fused softmax / cross-entropy / gradient). If Cython or a C
toolchain is missing the build silently skips the extension and the
package runs on the numpy fallbacks in ``spantag.kernels``.

Set SPANTAG_PURE=1 at build time to skip the extension on purpose.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class OptionalBuildExt(build_ext):
    """build_ext that degrades to a pure install instead of failing."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, broken toolchain
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"WARNING: building spantag._ckernels failed ({exc}); "
            "installing with the numpy kernel fallbacks only",
            file=sys.stderr,
        )


def extensions():
    if cythonize is None or os.environ.get("SPANTAG_PURE"):
        return []
    ext = Extension(
        "spantag._ckernels",
        ["src/spantag/_ckernels.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
