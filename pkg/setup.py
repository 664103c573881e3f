import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "vacuumbell._kernels",
                sources=["src/vacuumbell/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    # without Cython the package installs pure-Python; backend.py falls back
    extensions = []

setup(ext_modules=extensions)
