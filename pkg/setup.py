from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# The compiled search core is optional: when Cython (or a C++ toolchain) is
# missing the package falls back to the pure-Python twin at import time.
extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "sat2track._core",
                ["src/sat2track/_core.pyx"],
                language="c++",
                extra_compile_args=["-O2", "-std=c++11"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions)
