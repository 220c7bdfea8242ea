from setuptools import setup

try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "lstregress._kernels._ext",
                ["src/lstregress/_kernels/_ext.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except ImportError:
    # No Cython available: install without the compiled kernels; the pure
    # numpy backend is selected automatically at import.
    ext_modules = []

setup(ext_modules=ext_modules)
