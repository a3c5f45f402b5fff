"""Backend selection for the convolution kernel.

The compiled GMP kernel is used when it was built; otherwise the pure-Python
twin is loaded.  Set ``PHI4WAVE_PURE_PYTHON=1`` to force the fallback.
"""
import os

from phi4wave import _trigconv_py

if os.environ.get("PHI4WAVE_PURE_PYTHON"):
    _impl = _trigconv_py
    BACKEND = "python"
else:
    try:
        from phi4wave import _trigconv as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _trigconv_py
        BACKEND = "python"

trig_product = _impl.trig_product
python_trig_product = _trigconv_py.trig_product

MODES = {
    ("cos", "cos"): 0,
    ("sin", "sin"): 1,
    ("sin", "cos"): 2,
    ("cos", "sin"): 3,
}


def product_basis(a, b):
    """Basis kind of the product of two 1D bases ('sin' or 'cos')."""
    return "cos" if a == b else "sin"
