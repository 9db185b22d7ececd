import os

import numpy as np
from setuptools import Extension, setup

extensions = []
if os.environ.get("NLSSCAT_NO_EXT", "") != "1":
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "nlsscat._kernels",
                ["src/nlsscat/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions)
