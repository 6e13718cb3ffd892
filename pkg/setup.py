import os
import platform

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; the fallback kernels are used
    cythonize = None

compile_args = ["-O3"]
if platform.machine().lower() in ("x86_64", "amd64"):
    # hardware popcount; without it __builtin_popcountll is a libgcc call
    compile_args.append("-mpopcnt")

ext_modules = []
if cythonize is not None and not os.environ.get("KITAEVNET_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "kitaevnet._core",
                ["src/kitaevnet/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=compile_args,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
