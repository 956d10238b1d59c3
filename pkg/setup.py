"""Build script for the compiled kinematics kernels.

The package works without the extension (a numpy fallback is selected at
import time), but the compiled kernels are what make the benchmark grid and
the simulator soundness suite fast.
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "multitalk.kinesim._native",
        sources=["src/multitalk/kinesim/_native.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
