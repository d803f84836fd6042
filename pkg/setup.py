import os

import numpy
from setuptools import Extension, setup

# The compiled kernels are an optional speedup; the package falls back to
# numpy implementations when the extension is absent (HIERPERC_SKIP_EXT=1
# installs pure-python only).
if os.environ.get("HIERPERC_SKIP_EXT"):
    ext_modules = []
else:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "hierperc._kernels",
                ["src/hierperc/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
