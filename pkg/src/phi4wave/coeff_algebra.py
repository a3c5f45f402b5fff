"""Coefficient-space algebra for standing-wave trigonometric series.

A standing wave is stored by its coefficients on the product basis
``sin(n x) sin(j t)``.  Products are formed exactly with the product-to-sum
identities (see :mod:`phi4wave.kernels`), so no collocation grid and no
aliasing is involved: the output of a product carries every harmonic up to
the sum of the input truncations.

Residual normalization
----------------------
``resonance_residuals`` returns, for every odd ``j``, sixteen times the
``sin(j x) sin(j t)`` coefficient of ``2*omega1*d2phi0/dt2 + phi0**3``.  With
``a_1 = 1`` this is exactly the quantity the original REDUCE program prints
as ``R(j,j)``, so values compare directly with the published table.
"""
from dataclasses import dataclass, field

import numpy as np
from mpmath import mp, mpf, isfinite
from mpmath.libmp import from_man_exp

from phi4wave.bigreal import fixed_bits, to_fixed_int
from phi4wave.kernels import MODES, product_basis, trig_product

SIN = "sin"
COS = "cos"


def _as_mpf_tuple(values):
    return tuple(mpf(v) for v in values)


@dataclass(frozen=True)
class DiagonalSeq:
    """Odd-harmonic coefficients ``a_1, a_3, ..., a_{2N-1}`` of a diagonal field.

    The field is ``sum_j a_j sin(j x) sin(j t)`` over odd ``j``; even harmonics
    are identically zero and are not stored.
    """

    coeffs: tuple

    def __post_init__(self):
        vals = _as_mpf_tuple(self.coeffs)
        if not vals:
            raise ValueError("DiagonalSeq needs at least one coefficient")
        if not all(isfinite(v) for v in vals):
            raise ValueError("DiagonalSeq entries must be finite")
        object.__setattr__(self, "coeffs", vals)

    @property
    def N(self):
        return len(self.coeffs)

    @property
    def harmonics(self):
        return [2 * i + 1 for i in range(self.N)]

    @property
    def max_harmonic(self):
        return 2 * self.N - 1

    def at(self, j):
        """Coefficient of harmonic ``j`` (zero for even or out-of-range ``j``)."""
        if j < 1 or j % 2 == 0 or j > self.max_harmonic:
            return mpf(0)
        return self.coeffs[(j - 1) // 2]

    def scaled(self, lam):
        lam = mpf(lam)
        return DiagonalSeq([lam * c for c in self.coeffs])

    def normalized(self):
        """Return ``c_j = a_j / a_1``."""
        a1 = self.coeffs[0]
        if a1 == 0:
            raise ZeroDivisionError("cannot normalize a sequence with a_1 = 0")
        return DiagonalSeq([c / a1 for c in self.coeffs])

    def truncated(self, n):
        vals = list(self.coeffs[:n])
        vals += [mpf(0)] * (n - len(vals))
        return DiagonalSeq(vals)

    def __len__(self):
        return self.N

    def __iter__(self):
        return iter(self.coeffs)


@dataclass(frozen=True, eq=False)
class CoeffGrid:
    """Dense 2D coefficient array ``C[n, j]`` on a product trig basis.

    ``coeffs`` has shape ``(nx + 1, nt + 1)``; row/column 0 hold the constant
    (cos) or identically zero (sin) terms so that ``C[n, j]`` is indexed by
    harmonic number directly.  ``basis`` names the x and t basis kinds.
    """

    coeffs: np.ndarray
    basis: tuple = (SIN, SIN)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=object)
        if arr.ndim != 2:
            raise ValueError("CoeffGrid needs a 2D coefficient array")
        arr = np.vectorize(mpf, otypes=[object])(arr) if arr.size else arr
        if not all(isfinite(v) for v in arr.flat):
            raise ValueError("CoeffGrid entries must be finite")
        for axis, kind in enumerate(self.basis):
            if kind not in (SIN, COS):
                raise ValueError(f"unknown basis kind {kind!r}")
            if kind == SIN:
                if axis == 0 and any(v != 0 for v in arr[0, :]):
                    raise ValueError("sin basis has no harmonic 0 in x")
                if axis == 1 and any(v != 0 for v in arr[:, 0]):
                    raise ValueError("sin basis has no harmonic 0 in t")
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "basis", tuple(self.basis))

    @classmethod
    def zeros(cls, nx, nt, basis=(SIN, SIN)):
        arr = np.empty((nx + 1, nt + 1), dtype=object)
        arr.fill(mpf(0))
        return cls(arr, basis)

    @classmethod
    def from_terms(cls, terms, nx=None, nt=None, basis=(SIN, SIN)):
        """Build from a mapping ``{(n, j): value}``."""
        nx = max([n for n, _ in terms] + [0]) if nx is None else nx
        nt = max([j for _, j in terms] + [0]) if nt is None else nt
        arr = np.empty((nx + 1, nt + 1), dtype=object)
        arr.fill(mpf(0))
        for (n, j), v in terms.items():
            arr[n, j] = mpf(v)
        return cls(arr, basis)

    @property
    def nx(self):
        return self.coeffs.shape[0] - 1

    @property
    def nt(self):
        return self.coeffs.shape[1] - 1

    def __getitem__(self, idx):
        n, j = idx
        if 0 <= n <= self.nx and 0 <= j <= self.nt:
            return self.coeffs[n, j]
        return mpf(0)

    def nonzero(self):
        """Yield ``(n, j, value)`` for every nonzero coefficient, row-major."""
        arr = self.coeffs
        for n in range(arr.shape[0]):
            row = arr[n]
            for j in range(arr.shape[1]):
                if row[j]:
                    yield n, j, row[j]

    def diagonal(self):
        m = min(self.nx, self.nt)
        return [self.coeffs[j, j] for j in range(m + 1)]

    def resized(self, nx, nt):
        """Zero-pad or truncate to the given harmonic bounds."""
        arr = np.empty((nx + 1, nt + 1), dtype=object)
        arr.fill(mpf(0))
        mx, mt = min(nx, self.nx), min(nt, self.nt)
        arr[: mx + 1, : mt + 1] = self.coeffs[: mx + 1, : mt + 1]
        return CoeffGrid(arr, self.basis)

    def with_zero_diagonal(self):
        arr = self.coeffs.copy()
        for j in range(min(self.nx, self.nt) + 1):
            arr[j, j] = mpf(0)
        return CoeffGrid(arr, self.basis)

    def transpose(self):
        return CoeffGrid(self.coeffs.T.copy(), self.basis[::-1])

    def max_abs(self):
        return max((abs(v) for v in self.coeffs.flat), default=mpf(0))

    def scaled(self, lam):
        lam = mpf(lam)
        return CoeffGrid(self.coeffs * lam, self.basis)

    def _aligned(self, other):
        if self.basis != other.basis:
            raise ValueError(f"basis mismatch: {self.basis} vs {other.basis}")
        nx, nt = max(self.nx, other.nx), max(self.nt, other.nt)
        return self.resized(nx, nt).coeffs, other.resized(nx, nt).coeffs

    def __add__(self, other):
        a, b = self._aligned(other)
        return CoeffGrid(a + b, self.basis)

    def __sub__(self, other):
        a, b = self._aligned(other)
        return CoeffGrid(a - b, self.basis)

    def __neg__(self):
        return CoeffGrid(-self.coeffs, self.basis)

    def t_second_derivative(self):
        """Coefficients of the second t-derivative (sin or cos basis alike)."""
        j2 = np.array([mpf(-(j * j)) for j in range(self.nt + 1)], dtype=object)
        return CoeffGrid(self.coeffs * j2[None, :], self.basis)

    def x_second_derivative(self):
        n2 = np.array([mpf(-(n * n)) for n in range(self.nx + 1)], dtype=object)
        return CoeffGrid(self.coeffs * n2[:, None], self.basis)

    def wave_operator(self):
        """Coefficients of ``d2/dx2 - d2/dt2`` applied to the field."""
        return self.x_second_derivative() - self.t_second_derivative()

    def allclose(self, other, tol):
        a, b = self._aligned(other)
        return all(abs(x - y) <= tol for x, y in zip(a.flat, b.flat))


def diagonal_field(a):
    """Embed a :class:`DiagonalSeq` as a sin-sin :class:`CoeffGrid`."""
    m = a.max_harmonic
    return CoeffGrid.from_terms({(j, j): a.at(j) for j in a.harmonics}, m, m)


def multiply(u, v, nx=None, nt=None):
    """Exact product of two trig-series fields.

    The output basis per axis is cos for like kinds and sin otherwise.  By
    default the output carries all harmonics up to ``u.nx + v.nx`` and
    ``u.nt + v.nt``; pass ``nx``/``nt`` to drop harmonics above a bound.
    """
    nx = u.nx + v.nx if nx is None else nx
    nt = u.nt + v.nt if nt is None else nt
    bits = fixed_bits()
    uterms = list(u.nonzero())
    vterms = list(v.nonzero())
    acc = trig_product(
        [n for n, _, _ in uterms], [j for _, j, _ in uterms],
        [to_fixed_int(c, bits) for _, _, c in uterms],
        [n for n, _, _ in vterms], [j for _, j, _ in vterms],
        [to_fixed_int(c, bits) for _, _, c in vterms],
        MODES[(u.basis[0], v.basis[0])], MODES[(u.basis[1], v.basis[1])],
        nx + 1, nt + 1,
    )
    # kernel returns 4x the product at scale 2**(2*bits)
    exp = -(2 * bits + 2)
    zero = mpf(0)
    arr = np.empty((nx + 1, nt + 1), dtype=object)
    arr.fill(zero)
    width = nt + 1
    for idx, val in enumerate(acc):
        if val:
            arr[idx // width, idx % width] = mpf(from_man_exp(val, exp, mp.prec, "n"))
    basis = (product_basis(u.basis[0], v.basis[0]), product_basis(u.basis[1], v.basis[1]))
    return CoeffGrid(arr, basis)


def product_sine_sine(u, v):
    """Product of two sin-sin fields, returned on the cos-cos basis."""
    if u.basis != (SIN, SIN) or v.basis != (SIN, SIN):
        raise ValueError("product_sine_sine expects sin-sin grids")
    return multiply(u, v)


def cube_diagonal_field(a):
    """Sin-sin Fourier coefficients ``D[n, j]`` of the cube of a diagonal field."""
    u = diagonal_field(a)
    return multiply(product_sine_sine(u, u), u)


def cosine_cube(f):
    """Cosine coefficients of ``(sum_j f_j cos(j z))**3`` for an odd-harmonic sequence.

    Returns a list indexed by harmonic, length ``3 * (2N - 1) + 1``.
    """
    m = f.max_harmonic
    arr = np.empty((m + 1, 1), dtype=object)
    arr.fill(mpf(0))
    for j in f.harmonics:
        arr[j, 0] = f.at(j)
    g = CoeffGrid(arr, (COS, COS))
    cube = multiply(multiply(g, g), g)
    return [cube[n, 0] for n in range(cube.nx + 1)]


def resonance_residuals(a, omega1):
    """Raw diagonal residuals ``16 * (D_jj - 2 omega1 j^2 a_j)`` for odd j.

    One entry per odd harmonic ``1, 3, ..., 6N - 1`` (``3N`` equations, the
    count the Galerkin program builds); the last is identically zero.
    """
    omega1 = mpf(omega1)
    d = cube_diagonal_field(a)
    out = []
    for i in range(3 * a.N):
        j = 2 * i + 1
        out.append(16 * (d[j, j] - 2 * omega1 * j * j * a.at(j)))
    return DiagonalSeq(out)


def diagonal_residuals(c, omega1_coeff):
    """Residuals ``R_jj(c)`` of the resonance system for normalized ``c``.

    ``c`` must satisfy ``c_1 = 1``; ``omega1_coeff`` is ``c_omega`` in
    ``omega1 = c_omega * a_1**2``.  Under that normalization the raw residual
    is already divided by ``a_1**3``.
    """
    if c.coeffs[0] != 1:
        raise ValueError(f"diagonal_residuals expects c_1 = 1, got {c.coeffs[0]}")
    return resonance_residuals(c, omega1_coeff)


def offdiagonal_residuals(a, b, omega1):
    """Full residual grid of the first-order equation.

    ``R[n, j]`` is the ``sin(n x) sin(j t)`` coefficient of
    ``phi1_xx - phi1_tt - 2 omega1 phi0_tt - phi0**3`` with ``phi0`` given by
    the diagonal sequence ``a`` and ``phi1`` by the sin-sin grid ``b``.  It
    is affine in ``b``.
    """
    omega1 = mpf(omega1)
    d = cube_diagonal_field(a)
    phi0 = diagonal_field(a)
    rhs = phi0.t_second_derivative().scaled(2 * omega1) + d
    return b.wave_operator() - rhs
