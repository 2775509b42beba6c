import sys

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    print("cython not found, installing without the compiled kernel "
          "(the numpy fallback will be used at runtime)", file=sys.stderr)
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "cocyclekit._kernels._mc",
                ["src/cocyclekit/_kernels/_mc.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
