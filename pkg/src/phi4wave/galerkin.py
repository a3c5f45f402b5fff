"""Galerkin solution of the truncated resonance system.

This replays the original REDUCE program step by step.  The unknowns are
``c_3, c_5, ..., c_{2N-1}`` (``c_1 = 1``) and ``c_omega``.  For
``k = 2..N`` the new unknown ``c_{2k-1}`` is freed, ``c_omega`` is
eliminated through the first equation, equation ``k`` is solved as a cubic
in ``c_{2k-1}``, and then equations ``2..k`` are swept, re-solving any whose
residual exceeds ``delta`` for its own unknown, until all pass.

Equations are indexed by harmonic number: equation ``k`` is ``R_jj`` with
``j = 2k - 1``.  The program builds ``3N`` equations; only the first ``N``
are solved, the rest are reported as the tail.
"""
import logging
from dataclasses import dataclass, field

from mpmath import mp, mpf, acos, cbrt, cos, lu_solve, matrix, pi, sqrt

from phi4wave.coeff_algebra import DiagonalSeq, resonance_residuals

log = logging.getLogger(__name__)

ROOT_PICKS = ("smallest-abs", "first-found")
MAX_SWEEPS = 100
SAMPLE_POINTS = (-1, mpf(-1) / 2, mpf(1) / 2, 1)


class NoQualifyingRoot(ValueError):
    """No real root with ``|x| < 1``."""

    def __init__(self, message, roots=(), k=None):
        super().__init__(message)
        self.roots = list(roots)
        self.k = k


class NonConvergence(RuntimeError):
    pass


def _polyval(coeffs, x):
    acc = mpf(0)
    for c in coeffs:
        acc = acc * x + c
    return acc


def _newton_polish(coeffs, x):
    deriv = [c * (len(coeffs) - 1 - i) for i, c in enumerate(coeffs[:-1])]
    d = _polyval(deriv, x)
    if d == 0:
        return x
    return x - _polyval(coeffs, x) / d


def _real_cbrt(x):
    return cbrt(x) if x >= 0 else -cbrt(-x)


def cubic_real_roots(coeffs):
    """Real roots of ``a x^3 + b x^2 + c x + d`` (or lower degree), ascending.

    Closed form classified by the discriminant, then one Newton step per root.
    Leading coefficients that are exactly zero drop the degree.
    """
    coeffs = [mpf(c) for c in coeffs]
    while coeffs and coeffs[0] == 0:
        coeffs = coeffs[1:]
    if len(coeffs) <= 1:
        if coeffs:
            return []
        raise ValueError("zero polynomial has no isolated roots")
    if len(coeffs) == 2:
        return [-coeffs[1] / coeffs[0]]
    if len(coeffs) == 3:
        a, b, c = coeffs
        disc = b * b - 4 * a * c
        if disc < 0:
            return []
        if disc == 0:
            return [-b / (2 * a)]
        s = sqrt(disc)
        qq = -(b + s) / 2 if b >= 0 else -(b - s) / 2
        roots = [qq / a, c / qq] if qq != 0 else [mpf(0), -b / a]
        return sorted(_newton_polish(coeffs, r) for r in roots)
    a, b, c, d = coeffs
    b, c, d = b / a, c / a, d / a
    shift = b / 3
    p = c - b * b / 3
    q = 2 * b ** 3 / 27 - b * c / 3 + d
    disc = -(4 * p ** 3 + 27 * q ** 2)
    # a double root leaves a discriminant at rounding level; treat it as zero
    if abs(disc) <= mpf(2) ** (16 - mp.prec) * (4 * abs(p) ** 3 + 27 * q ** 2):
        disc = mpf(0)
    if disc > 0:
        m = 2 * sqrt(-p / 3)
        arg = 3 * q / (p * m)
        arg = max(min(arg, mpf(1)), mpf(-1))
        theta = acos(arg) / 3
        ts = [m * cos(theta - 2 * pi * i / 3) for i in range(3)]
    elif disc < 0:
        r = sqrt(q * q / 4 + p ** 3 / 27)
        u = _real_cbrt(-q / 2 - r if q >= 0 else -q / 2 + r)
        ts = [u - p / (3 * u)] if u != 0 else [mpf(0)]
    elif p == 0:
        ts = [mpf(0)]
    else:
        ts = [3 * q / p, -3 * q / (2 * p)]
    monic = [mpf(1), b, c, d]
    return sorted(_newton_polish(monic, t - shift) for t in ts)


def solve_cubic_real_unit(poly, root_pick="smallest-abs"):
    """Pick a real root with ``|x| < 1`` of a cubic given highest degree first.

    ``root_pick`` is ``"smallest-abs"`` (default) or ``"first-found"``
    (first qualifying root in ascending order).  Roots within a few ulps of
    ``+-1`` do not qualify.
    """
    if root_pick not in ROOT_PICKS:
        raise ValueError(f"root_pick must be one of {ROOT_PICKS}")
    roots = cubic_real_roots(poly)
    margin = mpf(2) ** (-(mp.prec - 10))
    ok = [r for r in roots if abs(r) < 1 - margin]
    if not ok:
        raise NoQualifyingRoot(f"no real root with |x| < 1 among {roots}", roots)
    if root_pick == "first-found":
        return ok[0]
    return min(ok, key=abs)


def interpolate_cubic(func, points=SAMPLE_POINTS):
    """Coefficients (highest first) of the cubic through ``func`` at 4 points."""
    xs = [mpf(x) for x in points]
    vand = matrix([[x ** 3, x ** 2, x, 1] for x in xs])
    sol = lu_solve(vand, matrix([func(x) for x in xs]))
    return [sol[i] for i in range(4)]


def _raw(c):
    """Residuals at ``c_omega = 0`` (``R_jj`` is affine in ``c_omega``)."""
    return list(resonance_residuals(DiagonalSeq(c), 0))


def _with_comega(raw, c, c_omega):
    out = []
    for i, r in enumerate(raw):
        j = 2 * i + 1
        cj = c[i] if i < len(c) else 0
        out.append(r - 32 * j * j * c_omega * cj)
    return out


def eliminate_comega(c):
    """The unique ``c_omega`` with ``R_11(c, c_omega) = 0``.

    ``R_11`` is affine in ``c_omega`` with slope ``-32``, so one Newton step
    from zero is exact.
    """
    seq = c if isinstance(c, DiagonalSeq) else DiagonalSeq(c)
    if seq.coeffs[0] != 1:
        raise ValueError("eliminate_comega expects c_1 = 1")
    return _raw(list(seq.coeffs))[0] / 32


@dataclass(frozen=True)
class SolveReport:
    N: int
    delta: mpf
    c: DiagonalSeq
    c_omega: mpf
    residuals: DiagonalSeq
    iterations: int
    converged: bool
    root_pick: str = "smallest-abs"
    trace: list = field(default_factory=list, compare=False)

    @property
    def solved_residuals(self):
        return list(self.residuals.coeffs[: self.N])

    @property
    def tail_residuals(self):
        return list(self.residuals.coeffs[self.N:])

    @property
    def tail_max(self):
        return max((abs(r) for r in self.tail_residuals), default=mpf(0))

    @property
    def max_residual(self):
        return max(abs(r) for r in self.residuals.coeffs)

    @property
    def sufficient(self):
        """All ``3N`` residuals below ``delta``."""
        return self.converged and self.max_residual < self.delta


def galerkin_solve(N, delta=mpf("1e-11"), root_pick="smallest-abs", max_sweeps=MAX_SWEEPS):
    """Solve the ``N`` leading resonance equations; see the module docstring."""
    if not 2 <= N <= 50:
        raise ValueError(f"N must satisfy 2 <= N <= 50, got {N}")
    delta = mpf(delta)
    c = [mpf(1)] + [mpf(0)] * (N - 1)
    c_omega = mpf(0)
    total_sweeps = 0
    trace = []

    def equation(i, c_omega_fixed=None):
        # residual of equation i (harmonic 2i+1) as a function of c[i]
        def g(x):
            trial = list(c)
            trial[i] = x
            raw = _raw(trial)
            cw = raw[0] / 32 if c_omega_fixed is None else c_omega_fixed
            return raw[i] - 32 * (2 * i + 1) ** 2 * cw * x
        return g

    for k in range(2, N + 1):
        i = k - 1
        for m in range(i, N):
            c[m] = mpf(0)
        try:
            c[i] = solve_cubic_real_unit(interpolate_cubic(equation(i)), root_pick)
        except NoQualifyingRoot as exc:
            raise NoQualifyingRoot(f"step k={k} (c_{2 * k - 1}): {exc}", exc.roots, k) from exc
        sweeps = 0
        while True:
            sweeps += 1
            if sweeps > max_sweeps:
                raise NonConvergence(f"step k={k}: no convergence after {max_sweeps} sweeps")
            c_omega = eliminate_comega(c)
            clean = True
            for jj in range(1, k):
                r = _with_comega(_raw(c), c, c_omega)[jj]
                if abs(r) > delta:
                    clean = False
                    try:
                        c[jj] = solve_cubic_real_unit(interpolate_cubic(equation(jj, c_omega)), root_pick)
                    except NoQualifyingRoot as exc:
                        raise NoQualifyingRoot(
                            f"step k={k}, re-solving c_{2 * jj + 1}: {exc}", exc.roots, k
                        ) from exc
            if clean:
                break
        total_sweeps += sweeps
        trace.append({"k": k, "sweeps": sweeps, "c": c[i]})
        log.debug("k=%d c_%d=%s sweeps=%d", k, 2 * k - 1, c[i], sweeps)

    residuals = _with_comega(_raw(c), c, c_omega)
    converged = all(abs(r) < delta for r in residuals[:N])
    return SolveReport(
        N=N, delta=delta, c=DiagonalSeq(c), c_omega=c_omega,
        residuals=DiagonalSeq(residuals), iterations=total_sweeps,
        converged=converged, root_pick=root_pick, trace=trace,
    )


def sufficiency_scan(N_max, delta=mpf("1e-11"), N_min=2, root_pick="smallest-abs", stop=False):
    """Smallest ``N`` whose full residual set passes ``delta``.

    Returns ``(N_star, tail_maxima)`` where ``tail_maxima`` maps each scanned
    ``N`` to the largest unsolved-tail residual.  ``N_star`` is ``None`` when
    no ``N <= N_max`` is sufficient.  With ``stop=True`` the scan ends at the
    first sufficient ``N``.
    """
    delta = mpf(delta)
    best = None
    maxima = {}
    for n in range(N_min, N_max + 1):
        rep = galerkin_solve(n, delta, root_pick)
        maxima[n] = rep.tail_max
        if best is None and rep.sufficient:
            best = n
            if stop:
                break
    return best, maxima
