import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "qbattery._lanczos",
                ["src/qbattery/_lanczos.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # -fcx-limited-range: inline complex multiplies instead of
                # the __muldc3 inf/nan fixup; the kernels never see those.
                extra_compile_args=["-O3", "-fcx-limited-range"],
            )
        ],
        language_level="3",
    )
else:
    # No Cython: install pure Python only; qbattery.kernels falls back at import.
    ext_modules = []

setup(ext_modules=ext_modules)
