from setuptools import Extension, setup
from Cython.Build import cythonize

# -ffp-contract=off: the compiled kernel must produce bit-identical results to
# the pure-Python fallback, so fused multiply-adds are disabled.
ext = Extension(
    "virosim._kernel_c",
    sources=["src/virosim/_kernel_c.pyx"],
    extra_compile_args=["-O2", "-ffp-contract=off"],
)

setup(ext_modules=cythonize([ext], language_level="3"))
