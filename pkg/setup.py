import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("DIRICHLET_XRAY_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "dirichlet_xray._hurwitz",
                    ["src/dirichlet_xray/_hurwitz.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
