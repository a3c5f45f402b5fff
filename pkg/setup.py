"""Build the optional GMP-backed convolution kernel.

If Cython or the GMP headers are unavailable the package still installs and
falls back to the pure-Python kernel at import time.
"""
import os
import sys

from setuptools import setup


def _extensions():
    if os.environ.get("PHI4WAVE_NO_EXT"):
        return []
    try:
        import gmpy2
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError as exc:
        print(f"phi4wave: skipping compiled kernel ({exc})", file=sys.stderr)
        return []
    gmpy2_dir = os.path.dirname(gmpy2.__file__)
    ext = Extension(
        "phi4wave._trigconv",
        ["src/phi4wave/_trigconv.pyx"],
        include_dirs=[gmpy2_dir],
        libraries=["gmp"],
        extra_compile_args=["-O3"],
    )
    return cythonize(
        [ext],
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
        include_path=[os.path.dirname(gmpy2_dir)],
    )


setup(ext_modules=_extensions())
