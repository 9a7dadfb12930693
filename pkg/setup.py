"""Build script for the optional compiled kernels.

The package is pure Python plus one Cython extension holding the dense
scatter-add kernel used when embedding few-site operators into the full
tensor-product space.  If Cython (or a C compiler) is unavailable the
extension is skipped and the numpy fallback in ``macrolab._kernels_py``
is used at import time instead.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "macrolab._kernels",
                ["src/macrolab/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
