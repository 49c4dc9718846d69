"""Build hook for the optional compiled statevector kernels.

The package works without the extension (a numpy fallback is selected at
import time); any build failure here is therefore non-fatal.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/thermospin/sim/_kernels.pyx"],
        compiler_directives={"language_level": 3},
    )
except Exception as exc:  # pragma: no cover - environment without Cython
    print(f"skipping compiled kernels ({exc}); numpy fallback will be used")

setup(ext_modules=ext_modules)
