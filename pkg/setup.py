import sys

from setuptools import setup, Extension

ext_modules = []
try:
    from Cython.Build import cythonize
    import numpy

    ext_modules = cythonize(
        [Extension(
            "raildimer.fastsamp._engine",
            ["src/raildimer/fastsamp/_engine.pyx"],
            include_dirs=[numpy.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            extra_compile_args=["-O3"],
        )],
        language_level=3,
    )
except ImportError:
    print("Cython/numpy unavailable at build time; installing the pure-Python "
          "sampler only", file=sys.stderr)

setup(ext_modules=ext_modules)
