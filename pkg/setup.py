import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("PSDTLS_NO_EXTENSION"):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "psdtls._kernels._cy_impl",
                    sources=["src/psdtls/_kernels/_cy_impl.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
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
    except ImportError:
        # No Cython toolchain: the package still works through the
        # pure-Python kernel fallback in psdtls._kernels._py_impl.
        ext_modules = []

setup(ext_modules=ext_modules)
