"""Poincare-Lindstedt assembly of the standing-wave solution.

With ``t~ = omega t`` and ``omega = 1 + eps omega1 + eps^2 omega2`` the field
``phi = phi0 + eps phi1 + eps^2 phi2`` solves

    phi_xx - phi_tt - eps phi^3 = O(eps^3).

``phi0`` is the elliptic closed form, a diagonal sin-sin series.  Each
correction solves ``(d2/dx2 - d2/dt~2) phi_n = H_n`` harmonic by harmonic,
``phi_n[n, j] = H_n[n, j] / (j^2 - n^2)``, which requires the diagonal of the
forcing to vanish.  The diagonal gauge of every correction is fixed to zero.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from mpmath import mp, mpf, sin

from phi4wave.coeff_algebra import (
    CoeffGrid,
    DiagonalSeq,
    cube_diagonal_field,
    diagonal_field,
    multiply,
    product_sine_sine,
)
from phi4wave.elliptic import default_closed_form, f_sequence

DEFAULT_MODES = 20
DEFAULT_HARMONICS = 60
RESONANCE_TOL = mpf("1e-15")


class ResonanceError(ArithmeticError):
    """A diagonal (resonant) harmonic of the forcing does not vanish."""

    def __init__(self, harmonics, residuals):
        self.harmonics = list(harmonics)
        self.residuals = list(residuals)
        self.harmonic = self.harmonics[0]
        j = self.harmonic[0]
        super().__init__(
            f"resonant harmonic sin({j}x)sin({j}t) is forced with coefficient "
            f"{mp.nstr(self.residuals[0], 6)}; no periodic correction exists "
            f"(offending diagonal harmonics: {self.harmonics})"
        )


@dataclass(frozen=True, eq=False)
class AsymptoticSolution:
    A: mpf
    params: object
    phi0_diag: DiagonalSeq
    phi1: CoeffGrid
    phi2: CoeffGrid
    omega1: mpf
    omega2: mpf
    epsilon: mpf
    meta: dict = field(default_factory=dict)

    @property
    def omega(self):
        return 1 + self.omega1 * self.epsilon + self.omega2 * self.epsilon ** 2

    def phi0(self):
        return diagonal_field(self.phi0_diag)

    def total_grid(self, epsilon=None):
        eps = self.epsilon if epsilon is None else mpf(epsilon)
        return self.phi0() + self.phi1.scaled(eps) + self.phi2.scaled(eps * eps)


def build_phi0(A, N=DEFAULT_MODES, params=None):
    """Diagonal coefficients ``a_{2n-1} = 2 A gamma f_{2n-1} / k``."""
    params = default_closed_form().params if params is None else params
    scale = 2 * mpf(A) * params.gamma / params.k
    return DiagonalSeq([scale * f for f in f_sequence(params.q, N)])


def _check_diagonal(diag_residuals, scale, tol, protected=()):
    bound = tol * scale
    bad = [(j, r) for j, r in diag_residuals if abs(r) > bound]
    if not bad:
        return
    # harmonics that no choice of the frequency correction can reach go first
    bad.sort(key=lambda jr: (jr[0] not in protected, jr[0]))
    raise ResonanceError([(j, j) for j, _ in bad], [r for _, r in bad])


def _solve_wave(forcing, harmonics):
    """Invert ``d2/dx2 - d2/dt2`` off the diagonal, zero gauge on the diagonal."""
    h = min(harmonics, forcing.nx), min(harmonics, forcing.nt)
    arr = np.empty((h[0] + 1, h[1] + 1), dtype=object)
    arr.fill(mpf(0))
    src = forcing.coeffs
    for n in range(1, h[0] + 1):
        for j in range(1, h[1] + 1):
            if n != j and src[n, j]:
                arr[n, j] = src[n, j] / (j * j - n * n)
    return CoeffGrid(arr)


def first_order_forcing(phi0, omega1):
    """Sin-sin coefficients of ``2 omega1 phi0_tt + phi0^3``."""
    return diagonal_field(phi0).t_second_derivative().scaled(2 * mpf(omega1)) + cube_diagonal_field(phi0)


def build_phi1(phi0, omega1, harmonics=None, tol=RESONANCE_TOL):
    """First correction ``b[n, j] = D[n, j] / (j^2 - n^2)``, zero diagonal.

    Raises :class:`ResonanceError` when the diagonal of the forcing does not
    vanish, i.e. when ``phi0`` does not solve the resonance system.
    """
    forcing = first_order_forcing(phi0, omega1)
    d = cube_diagonal_field(phi0)
    m = min(forcing.nx, forcing.nt)
    diag = [(j, forcing[j, j]) for j in range(1, m + 1)]
    unreachable = {j for j in range(1, m + 1) if phi0.at(j) == 0}
    _check_diagonal(diag, d.max_abs(), tol, unreachable)
    return _solve_wave(forcing, m if harmonics is None else harmonics)


def second_order_forcing(phi0, phi1, omega1, omega2, harmonics=None):
    """Sin-sin coefficients of ``2 w1 phi1_tt + (2 w2 + w1^2) phi0_tt + 3 phi1 phi0^2``."""
    omega1, omega2 = mpf(omega1), mpf(omega2)
    p0 = diagonal_field(phi0)
    nmax = phi1.nx + 2 * p0.nx if harmonics is None else harmonics
    sq = product_sine_sine(p0, p0)
    cubic = multiply(phi1, sq, nx=nmax, nt=nmax).scaled(3)
    out = phi1.t_second_derivative().scaled(2 * omega1) + cubic
    out = out + p0.t_second_derivative().scaled(2 * omega2 + omega1 ** 2)
    return out.resized(nmax, nmax)


def build_phi2(phi0, phi1, omega1, harmonics=None, tol=RESONANCE_TOL):
    """Second correction and ``omega2 = -omega1^2 / 2``.

    ``phi1`` must have a zero diagonal; then ``phi1 phi0^2`` is antisymmetric
    under ``x <-> t`` and contributes no diagonal harmonics.
    """
    if any(v != 0 for v in phi1.diagonal()):
        raise ValueError("build_phi2 requires phi1 with zero diagonal")
    omega1 = mpf(omega1)
    omega2 = -omega1 ** 2 / 2
    nmax = phi1.nx if harmonics is None else harmonics
    forcing = second_order_forcing(phi0, phi1, omega1, omega2, nmax)
    diag = [(j, forcing[j, j]) for j in range(1, nmax + 1)]
    _check_diagonal(diag, max(forcing.max_abs(), mpf(0)) or mpf(1), tol)
    return _solve_wave(forcing, nmax), omega2


def frequency(A, epsilon, params=None):
    """``omega = 1 + omega1 eps + omega2 eps^2`` with ``omega1 = gamma^2 A^2 / (64 k^2)``."""
    params = default_closed_form().params if params is None else params
    w1 = params.omega1_coeff * mpf(A) ** 2
    w2 = -w1 ** 2 / 2
    eps = mpf(epsilon)
    return 1 + w1 * eps + w2 * eps ** 2


def build_solution(A=1, epsilon=mpf("0.01"), modes=DEFAULT_MODES, harmonics=DEFAULT_HARMONICS, params=None):
    """Assemble phi0, phi1, phi2 and the frequency corrections."""
    params = default_closed_form().params if params is None else params
    A = mpf(A)
    phi0 = build_phi0(A, modes, params)
    omega1 = params.omega1_coeff * A ** 2
    phi1 = build_phi1(phi0, omega1, harmonics)
    phi2, omega2 = build_phi2(phi0, phi1, omega1, harmonics)
    meta = {"modes": modes, "harmonics": harmonics, "digits": mp.dps}
    return AsymptoticSolution(A, params, phi0, phi1, phi2, omega1, omega2, mpf(epsilon), meta)


def evaluate_field(sol, x, t):
    """``phi0 + eps phi1 + eps^2 phi2`` at ``(x, t~ = omega t)`` by direct summation."""
    x = mpf(x)
    tt = sol.omega * mpf(t)
    grid = sol.total_grid()
    sx = [sin(n * x) for n in range(grid.nx + 1)]
    st = [sin(j * tt) for j in range(grid.nt + 1)]
    return sum(sx[n] * st[j] * c for n, j, c in grid.nonzero())


def _sine_matrix(nodes, nmax, exact):
    if exact:
        return np.array([[sin(n * x) for n in range(nmax + 1)] for x in nodes], dtype=object)
    ns = np.arange(nmax + 1)
    return np.sin(np.outer(np.asarray(nodes, dtype=float), ns))


def pde_residual(sol, epsilon, grid_size=64, exact=False):
    """Sup-norm of ``phi_xx - omega^2 phi_t~t~ - eps phi^3`` on a uniform grid.

    Derivatives are exact term by term; the cube is taken pointwise.  The
    default float64 path is ample for residuals down to ~1e-13; ``exact=True``
    evaluates in the working big-real precision.
    """
    if grid_size < 64:
        raise ValueError("grid_size must be at least 64")
    eps = mpf(epsilon)
    grid = sol.total_grid(eps)
    w1, w2 = sol.omega1, sol.omega2
    omega2_sq = (1 + w1 * eps + w2 * eps ** 2) ** 2
    if exact:
        nodes = [2 * mp.pi * i / grid_size for i in range(grid_size)]
        C = grid.coeffs
        n2 = np.array([mpf(n * n) for n in range(grid.nx + 1)], dtype=object)
        j2 = np.array([mpf(j * j) for j in range(grid.nt + 1)], dtype=object)
        eps_c, w_c = eps, omega2_sq
    else:
        nodes = [2 * math.pi * i / grid_size for i in range(grid_size)]
        C = np.array(grid.coeffs, dtype=float)
        n2 = np.arange(grid.nx + 1, dtype=float) ** 2
        j2 = np.arange(grid.nt + 1, dtype=float) ** 2
        eps_c, w_c = float(eps), float(omega2_sq)
    Sx = _sine_matrix(nodes, grid.nx, exact)
    St = _sine_matrix(nodes, grid.nt, exact)
    phi = Sx.dot(C).dot(St.T)
    phi_xx = Sx.dot(-n2[:, None] * C).dot(St.T)
    phi_tt = Sx.dot(-j2[None, :] * C).dot(St.T)
    res = phi_xx - w_c * phi_tt - eps_c * phi ** 3
    worst = max(abs(v) for v in res.flat)
    return mpf(worst) if exact else float(worst)


def pde_residual_scan(sol, epsilon_list, grid_size=64, exact=False):
    """Residual sup-norms for each ``eps``; returns a list of ``(eps, residual)``."""
    return [(mpf(e), pde_residual(sol, e, grid_size, exact)) for e in epsilon_list]


def scaling_ratios(scan):
    """Successive residual ratios of a scan; 8 for halving eps under O(eps^3)."""
    return [float(scan[i][1]) / float(scan[i + 1][1]) for i in range(len(scan) - 1)]
