from setuptools import setup, Extension

try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        [Extension("opspread._kernels", ["src/opspread/_kernels.pyx"])],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": 3,
        },
    )
except ImportError:
    # package still works on the pure-numpy backend
    ext_modules = []

setup(ext_modules=ext_modules)
