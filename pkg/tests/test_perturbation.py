import random

import numpy as np
import pytest
from mpmath import mp, mpf, pi

from paper_values import OMEGA1_COEFF, OMEGA2_COEFF, TABLE_D
from phi4wave.coeff_algebra import CoeffGrid, DiagonalSeq, cube_diagonal_field, offdiagonal_residuals
from phi4wave.perturbation import (
    ResonanceError,
    build_phi0,
    build_phi1,
    build_phi2,
    build_solution,
    evaluate_field,
    first_order_forcing,
    frequency,
    pde_residual,
    pde_residual_scan,
    scaling_ratios,
    second_order_forcing,
)

TOL20 = mpf("1e-20")


def offdiag(grid):
    return [(n, j, v) for n, j, v in grid.nonzero() if n != j]


def test_phi0_values(params):
    a = build_phi0(1, 20, params)
    assert mp.nstr(a.coeffs[0], 6) == "1.97117"
    assert abs(a.at(3) / a.at(1) - mpf(TABLE_D[3])) < mpf("1e-12")
    assert all(v == 0 for v in build_phi0(0, 5, params))


def test_phi1_entry_formula(solution):
    d = cube_diagonal_field(solution.phi0_diag)
    assert solution.phi1[1, 3] == d[1, 3] / 8


def test_phi1_solves_first_order_equation(solution):
    r = offdiagonal_residuals(solution.phi0_diag, solution.phi1, solution.omega1)
    h = solution.phi1.nx
    worst = max(abs(r[n, j]) for n in range(1, h + 1) for j in range(1, h + 1))
    assert worst < TOL20


def test_phi1_antisymmetric_zero_diagonal(solution):
    b = solution.phi1
    assert all(v == 0 for v in b.diagonal())
    assert all(b[j, n] == -v for n, j, v in b.nonzero())


def test_homogeneity(params):
    s1 = build_solution(1, params=params, modes=10, harmonics=30)
    s2 = build_solution(2, params=params, modes=10, harmonics=30)
    tol = mpf("1e-30")
    assert all(abs(y - 2 * x) <= tol * abs(y) for x, y in zip(s1.phi0_diag, s2.phi0_diag))
    for grid1, grid2, power in ((s1.phi1, s2.phi1, 3), (s1.phi2, s2.phi2, 5)):
        for n, j, v in grid1.nonzero():
            assert abs(grid2[n, j] - 2 ** power * v) <= tol * abs(grid2[n, j])
    assert abs(s2.omega1 - 4 * s1.omega1) < tol
    assert abs(s2.omega2 - 16 * s1.omega2) < tol


def test_gauge_independence(solution):
    rng = random.Random(5)
    b = solution.phi1
    arr = np.array(b.coeffs, dtype=object)
    for n in range(1, b.nx + 1):
        arr[n, n] = mpf(rng.uniform(-1, 1))
    shifted = CoeffGrid(arr)
    r0 = offdiagonal_residuals(solution.phi0_diag, b, solution.omega1)
    r1 = offdiagonal_residuals(solution.phi0_diag, shifted, solution.omega1)
    assert all(x == y for x, y in zip(r0.coeffs.flat, r1.coeffs.flat))


@pytest.mark.parametrize("omega1", [mpf(9) / 32, 0, 1])
def test_single_mode_is_obstructed(omega1):
    with pytest.raises(ResonanceError) as info:
        build_phi1(DiagonalSeq([1]), omega1)
    assert info.value.harmonic == (3, 3)
    assert "(3, 3)" in str(info.value) or "sin(3x)sin(3t)" in str(info.value)


def test_phi2_diagonal_cancels(solution):
    f = second_order_forcing(solution.phi0_diag, solution.phi1, solution.omega1, solution.omega2,
                             solution.phi2.nx)
    assert max(abs(f[j, j]) for j in range(1, f.nx + 1)) < TOL20
    assert all(v == 0 for v in solution.phi2.diagonal())


def test_phi2_requires_zero_gauge(solution):
    arr = np.array(solution.phi1.coeffs, dtype=object)
    arr[1, 1] = mpf("0.1")
    with pytest.raises(ValueError):
        build_phi2(solution.phi0_diag, CoeffGrid(arr), solution.omega1)


def test_phi2_wrong_omega_is_resonant(solution):
    # with omega2 perturbed the first diagonal harmonic no longer cancels
    f = second_order_forcing(solution.phi0_diag, solution.phi1, solution.omega1,
                             solution.omega2 + mpf("1e-3"), solution.phi2.nx)
    assert abs(f[1, 1]) > mpf("1e-6")


def test_zero_amplitude(params):
    s = build_solution(0, params=params, modes=5, harmonics=15)
    assert not list(s.phi1.nonzero()) and not list(s.phi2.nonzero())
    assert s.omega2 == 0 and s.omega == 1


def test_frequency_coefficients(solution, params):
    assert abs(solution.omega1 - mpf(OMEGA1_COEFF)) < mpf("1e-9")
    assert abs(solution.omega2 - mpf(OMEGA2_COEFF)) < mpf("1e-9")
    assert frequency(1, 0, params) == 1
    assert abs(frequency(1, 1, params) - mpf("1.4951626456")) < mpf("1e-9")
    assert abs(frequency(1, mpf("0.01"), params) - solution.omega) < mpf("1e-35")


def test_field_boundary_and_parity(solution):
    for t in (mpf("0.1"), mpf("1.7")):
        assert evaluate_field(solution, 0, t) == 0
        assert abs(evaluate_field(solution, pi, t)) < mpf("1e-35")
        x = mpf("0.9")
        v = evaluate_field(solution, x, t)
        assert abs(evaluate_field(solution, -x, t) + v) < mpf("1e-35")
        assert abs(evaluate_field(solution, x + 2 * pi, t) - v) < mpf("1e-35")
        t_shift = t + 2 * pi / solution.omega
        assert abs(evaluate_field(solution, x, t_shift) - v) < mpf("1e-35")


def test_residual_at_zero_epsilon(solution):
    assert pde_residual(solution, 0, exact=True) < mpf("1e-30")


def test_residual_scaling(solution):
    scan = pde_residual_scan(solution, ["1e-2", "5e-3", "2.5e-3"])
    ratios = scaling_ratios(scan)
    assert all(6 <= r <= 10 for r in ratios)
    assert all(abs(r - 8) < mpf("0.1") for r in ratios)
    scaled = [float(r) / float(e) ** 3 for e, r in scan]
    assert max(scaled) / min(scaled) < 2


def test_float_and_exact_residual_agree(solution):
    a = pde_residual(solution, "1e-2")
    b = pde_residual(solution, "1e-2", exact=True)
    assert abs(a - float(b)) < 1e-12


def test_residual_grid_floor(solution):
    with pytest.raises(ValueError):
        pde_residual(solution, "1e-2", grid_size=32)


def test_first_order_forcing_diagonal_is_absorbed(solution):
    f = first_order_forcing(solution.phi0_diag, solution.omega1)
    assert max(abs(f[j, j]) for j in range(1, f.nx + 1)) < TOL20
