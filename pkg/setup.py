"""Build script: compiles the optional fast kernel.

The package is pure Python plus one optional Cython extension
(``cubicfano.kernels._batch_c``).  If Cython or a C compiler is missing the
install still succeeds and the package falls back to the vectorised numpy
kernel at import time.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "cubicfano.kernels._batch_c",
                ["src/cubicfano/kernels/_batch_c.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": 3},
    )
except Exception:  # pragma: no cover - builds without the extension
    extensions = []

setup(ext_modules=extensions)
