import warnings

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "entsync.kernels._native",
                sources=["src/entsync/kernels/_native.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
else:
    warnings.warn(
        "Cython is not available; building without the compiled kernels. "
        "The pure-numpy fallback will be used at runtime."
    )
    extensions = []

setup(ext_modules=extensions)
