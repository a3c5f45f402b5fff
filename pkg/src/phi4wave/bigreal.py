"""Configurable-precision reals on top of mpmath.

All numerics run in the ambient ``mpmath.mp`` context.  This module holds the
few helpers that every other module needs: a precision context manager,
fixed-point conversion for the convolution kernel, and lossless decimal
string serialization.
"""
from contextlib import contextmanager

import mpmath
from mpmath import mp, mpf
from mpmath.libmp import from_man_exp, repr_dps, to_fixed, to_str

DEFAULT_DIGITS = 40
GUARD_BITS = 64


def set_precision(digits):
    mp.dps = int(digits)


@contextmanager
def precision(digits):
    """Run a block at ``digits`` decimal digits, restoring the old setting."""
    with mpmath.workdps(int(digits)):
        yield


def fixed_bits():
    """Fixed-point scale (in bits) used by the kernel at the current precision."""
    return mp.prec + GUARD_BITS


def to_fixed_int(x, bits):
    return to_fixed(mpf(x)._mpf_, bits)


def from_fixed_int(n, bits):
    return mpf(from_man_exp(int(n), -bits, mp.prec, "n"))


def to_decimal(x):
    """Shortest decimal string that parses back to exactly ``x`` at the current precision."""
    return to_str(mpf(x)._mpf_, repr_dps(mp.prec))


def from_decimal(s):
    return mpf(s)


def eps_at(digits=None):
    """Unit roundoff for ``digits`` (or the current) decimal digits."""
    d = mp.dps if digits is None else digits
    return mpf(10) ** (-d)
