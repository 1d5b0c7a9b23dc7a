from setuptools import Extension, setup

# The compiled invariant-imbedding kernel is optional: the package falls back
# to the pure-Python implementation in asymscat._imbed_py when the extension
# is unavailable.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "asymscat._imbed",
                ["src/asymscat/_imbed.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
