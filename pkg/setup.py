"""Build script: compiles the optional tape-evaluation extension.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so any build failure here degrades to a pure wheel
instead of aborting the install.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "deltaforms._evaltape",
                ["src/deltaforms/_evaltape.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - depends on build host
    import sys

    print(f"deltaforms: building without compiled kernel ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
