import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext = Extension(
    "kspaug._kernels",
    ["src/kspaug/_kernels.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    # -ffp-contract=off keeps the C arithmetic bit-compatible with the
    # NumPy fallback (no fused multiply-adds).
    extra_compile_args=["-O3", "-ffp-contract=off"],
)
# The compiled kernels are an accelerator, not a requirement: kspaug.kernels
# falls back to the NumPy implementation when the extension is missing.
ext.optional = True

setup(ext_modules=cythonize([ext], language_level=3) if cythonize else [])
