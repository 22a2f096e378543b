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
                "instreval._kernels._jacobi",
                ["src/instreval/_kernels/_jacobi.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-march=native"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
