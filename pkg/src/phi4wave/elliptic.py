"""Elliptic-function toolkit for the closed-form standing wave.

The leading-order standing wave is built from the elliptic cosine, whose
Fourier coefficients are proportional to

    f_{2n-1} = q**(n - 1/2) / (1 + q**(2n - 1)),

with ``q`` the nome.  The resonance system is solved by this sequence for a
single nome, the root of :func:`nome_equation_residual`.
"""
from dataclasses import dataclass

from mpmath import mp, mpf, agm, asin, cos, exp, log, pi, sin, sqrt

from phi4wave.coeff_algebra import DiagonalSeq, cosine_cube, resonance_residuals


class DomainError(ValueError):
    pass


class BracketError(RuntimeError):
    pass


def _check_unit_interval(x, name):
    if not 0 < x < 1:
        raise DomainError(f"{name} must lie in (0, 1), got {x}")


def agm_elliptic_K(k):
    """Complete elliptic integral of the first kind via the AGM."""
    k = mpf(k)
    _check_unit_interval(k, "modulus k")
    kprime = sqrt((1 - k) * (1 + k))
    return pi / (2 * agm(1, kprime))


def nome(k):
    """Nome ``q = exp(-pi K(k') / K(k))``."""
    k = mpf(k)
    _check_unit_interval(k, "modulus k")
    kprime = sqrt((1 - k) * (1 + k))
    return exp(-pi * agm_elliptic_K(kprime) / agm_elliptic_K(k))


def _series_terms(q, digits=None):
    """Number of terms so that q**n drops below 10**-(digits + 10)."""
    digits = mp.dps if digits is None else digits
    return max(4, int((digits + 10) * log(10) / -log(q)) + 2)


def theta2(q):
    q = mpf(q)
    n_terms = int(sqrt(_series_terms(q))) + 3
    return 2 * sum(q ** ((n + mpf(1) / 2) ** 2) for n in range(n_terms))


def theta3(q):
    q = mpf(q)
    n_terms = int(sqrt(_series_terms(q))) + 3
    return 1 + 2 * sum(q ** (n * n) for n in range(1, n_terms))


def modulus_from_nome(q):
    """Inverse nome: ``k = theta2(q)**2 / theta3(q)**2``."""
    q = mpf(q)
    _check_unit_interval(q, "nome q")
    return (theta2(q) / theta3(q)) ** 2


@dataclass(frozen=True)
class EllipticParams:
    """Modulus, periods and derived scalings of the closed-form solution.

    ``gamma = 2 pi / K`` is the wavenumber scale in the cn Fourier series and
    ``alpha = 2 K / pi`` rescales the cn argument so the standing wave has
    period ``2 pi``; their product is exactly 4.
    """

    k: mpf
    kprime: mpf
    K: mpf
    Kprime: mpf
    q: mpf
    gamma: mpf
    alpha: mpf

    @classmethod
    def from_nome(cls, q):
        q = mpf(q)
        _check_unit_interval(q, "nome q")
        t2, t3 = theta2(q), theta3(q)
        k = (t2 / t3) ** 2
        kprime = sqrt((1 - k) * (1 + k))
        K = pi * t3 ** 2 / 2
        Kprime = agm_elliptic_K(kprime)
        return cls(k, kprime, K, Kprime, q, 2 * pi / K, 2 * K / pi)

    @classmethod
    def from_modulus(cls, k):
        k = mpf(k)
        _check_unit_interval(k, "modulus k")
        kprime = sqrt((1 - k) * (1 + k))
        K = agm_elliptic_K(k)
        Kprime = agm_elliptic_K(kprime)
        return cls(k, kprime, K, Kprime, exp(-pi * Kprime / K), 2 * pi / K, 2 * K / pi)

    def check(self, tol=None):
        """Return the invariant defects; raise if any exceeds ``tol``."""
        tol = mpf(10) ** (-(mp.dps - 5)) if tol is None else mpf(tol)
        defects = {
            "k^2 + k'^2 - 1": abs(self.k ** 2 + self.kprime ** 2 - 1),
            "q - exp(-pi K'/K)": abs(self.q - exp(-pi * self.Kprime / self.K)),
            "alpha*gamma - 4": abs(self.alpha * self.gamma - 4),
        }
        bad = {name: v for name, v in defects.items() if v > tol}
        if bad:
            raise ValueError(f"inconsistent elliptic parameters: {bad}")
        return defects

    @property
    def omega1_coeff(self):
        """Frequency correction per unit ``A**2``: ``gamma**2 / (64 k**2)``."""
        return self.gamma ** 2 / (64 * self.k ** 2)


def f_sequence(q, N):
    """First ``N`` odd-harmonic terms of ``f_{2n-1} = q**(n-1/2) / (1 + q**(2n-1))``."""
    q = mpf(q)
    _check_unit_interval(q, "nome q")
    rq = sqrt(q)
    return DiagonalSeq([rq * q ** (n - 1) / (1 + q ** (2 * n - 1)) for n in range(1, N + 1)])


def nome_equation_residual(q, N_terms=None):
    """Left-hand side of the nome equation.

    ``3 sum f_{2n-1}**2 - (1/4 + sum q**n/(1+q**2n))**2 + 2 (sum f_{2n-1})**2``;
    it vanishes exactly when ``sum f_n**2 = (1 - 2k**2) / (3 gamma**2)``.
    """
    q = mpf(q)
    _check_unit_interval(q, "nome q")
    if N_terms is None:
        N_terms = _series_terms(q)
    rq = sqrt(q)
    s_f = mpf(0)
    s_f2 = mpf(0)
    s_l = mpf(0)
    for n in range(1, N_terms + 1):
        fn = rq * q ** (n - 1) / (1 + q ** (2 * n - 1))
        s_f += fn
        s_f2 += fn * fn
        s_l += q ** n / (1 + q ** (2 * n))
    return 3 * s_f2 - (mpf(1) / 4 + s_l) ** 2 + 2 * s_f ** 2


def scan_sign_changes(func, lo=mpf("1e-4"), hi=mpf("0.9"), points=200):
    """Log-spaced scan of ``func`` on ``[lo, hi]``; return bracketing intervals."""
    lo, hi = mpf(lo), mpf(hi)
    ratio = (hi / lo) ** (mpf(1) / (points - 1))
    xs = [lo * ratio ** i for i in range(points)]
    xs[-1] = hi
    vals = [func(x) for x in xs]
    return [(xs[i], xs[i + 1]) for i in range(points - 1) if vals[i] * vals[i + 1] < 0]


def solve_nome(tolerance=None, max_iter=400):
    """Root of the nome equation on (0, 1) by bisection plus Newton polish.

    The scan brackets exactly one sign change; more than one is reported as
    a :class:`BracketError` since the root would then be ambiguous.
    """
    tolerance = mpf(10) ** (-(mp.dps - 5)) if tolerance is None else mpf(tolerance)
    floor = mpf(10) ** (-(mp.dps - 5))
    if tolerance < floor:
        raise ValueError(f"tolerance {tolerance} is below the working-precision floor {floor}")
    brackets = scan_sign_changes(nome_equation_residual)
    if not brackets:
        raise BracketError("no sign change of the nome equation on the scan grid")
    if len(brackets) > 1:
        raise BracketError(f"nome equation changes sign {len(brackets)} times: {brackets}")
    lo, hi = brackets[0]
    flo = nome_equation_residual(lo)
    # bisect to a few digits, then Newton with a bracketed safeguard
    for _ in range(max_iter):
        mid = (lo + hi) / 2
        fmid = nome_equation_residual(mid)
        if fmid * flo > 0:
            lo, flo = mid, fmid
        else:
            hi = mid
        if hi - lo < mpf("1e-6") * hi:
            break
    x = (lo + hi) / 2
    h = mpf(2) ** (-(mp.prec // 2))
    for _ in range(60):
        fx = nome_equation_residual(x)
        dfx = (nome_equation_residual(x + h) - nome_equation_residual(x - h)) / (2 * h)
        step = fx / dfx
        x_new = x - step
        if not lo <= x_new <= hi:
            x_new = (lo + hi) / 2
        if nome_equation_residual(x_new) * flo > 0:
            lo = x_new
        else:
            hi = x_new
        done = abs(x_new - x) < floor * x_new
        x = x_new
        if done:
            break
    if abs(step) > tolerance:
        raise BracketError(f"nome iteration did not reach tolerance {tolerance}")
    return x


def cn_eval(z, params, n_terms=None):
    """Elliptic cosine from its Fourier series.

    ``cn(z) = (gamma / k) sum f_{2n-1} cos((2n-1) gamma z / 4)``.
    """
    z = mpf(z)
    if n_terms is None:
        n_terms = _series_terms(params.q)
    f = f_sequence(params.q, n_terms)
    theta = params.gamma * z / 4
    return params.gamma / params.k * sum(fj * cos(j * theta) for j, fj in zip(f.harmonics, f))


def cn_landen(z, k):
    """Elliptic cosine by the descending Landen (AGM) transformation."""
    z, k = mpf(z), mpf(k)
    _check_unit_interval(k, "modulus k")
    a = [mpf(1)]
    c = [k]
    b = sqrt((1 - k) * (1 + k))
    eps = mpf(2) ** (-mp.prec)
    while abs(c[-1]) > eps:
        an, bn = a[-1], b
        a.append((an + bn) / 2)
        c.append((an - bn) / 2)
        b = sqrt(an * bn)
    n = len(a) - 1
    phi = 2 ** n * a[n] * z
    for i in range(n, 0, -1):
        phi = (phi + asin(c[i] / a[i] * sin(phi))) / 2
    return cos(phi)


def sample_points(params, count):
    """``count`` points spread over one full period ``4K`` (endpoint excluded)."""
    period = 4 * params.K
    return [period * (mpf(i) + mpf(1) / 3) / count for i in range(count)]


def verify_cn_ode(params, sample_count=64, n_terms=None):
    """Max defect of ``cn'' - (2k^2 - 1) cn + 2 k^2 cn^3`` over sample points.

    The second derivative is taken term by term from the Fourier series.
    """
    if n_terms is None:
        n_terms = _series_terms(params.q)
    f = f_sequence(params.q, n_terms)
    g, k = params.gamma, params.k
    k2 = k * k
    worst = mpf(0)
    for z in sample_points(params, sample_count):
        theta = g * z / 4
        cn = mpf(0)
        cn2 = mpf(0)
        for j, fj in zip(f.harmonics, f):
            term = fj * cos(j * theta)
            cn += term
            cn2 -= term * (j * g / 4) ** 2
        cn *= g / k
        cn2 *= g / k
        worst = max(worst, abs(cn2 - (2 * k2 - 1) * cn + 2 * k2 * cn ** 3))
    return worst


def proportionality_terms(params, N):
    """Return ``(j, F_j, factor_j * f_j)`` for the odd ``j`` of an ``N``-mode f sequence.

    ``F_j`` is four times the cosine coefficient of the cube of
    ``sum f_j cos(j z)``; the cn equation forces
    ``F_j = (2 (2k^2 - 1) / gamma^2 + j^2 / 8) f_j``.
    """
    f = f_sequence(params.q, N)
    cube = cosine_cube(f)
    g2 = params.gamma ** 2
    base = 2 * (2 * params.k ** 2 - 1) / g2
    return [(j, 4 * cube[j], (base + mpf(j * j) / 8) * f.at(j)) for j in f.harmonics]


def verify_proportionality(params, N, j_max=None):
    """Max relative defect of the cube-proportionality identity over odd ``j <= j_max``."""
    worst = mpf(0)
    for j, lhs, rhs in proportionality_terms(params, N):
        if j_max is not None and j > j_max:
            break
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return worst


def lemma_residuals(q, N):
    """Resonance residuals of the raw f sequence with ``omega1 = 1/256``."""
    return resonance_residuals(f_sequence(q, N), mpf(1) / 256)


@dataclass(frozen=True)
class ClosedForm:
    params: EllipticParams
    omega1_coeff: mpf
    omega1_f_normalized: mpf
    sum_f2: mpf
    sum_f2_target: mpf

    @property
    def sum_f2_defect(self):
        return abs(self.sum_f2 - self.sum_f2_target)


def closed_form_params(tolerance=None):
    """Solve the nome equation and derive every closed-form parameter."""
    q = solve_nome(tolerance)
    params = EllipticParams.from_nome(q)
    f = f_sequence(q, _series_terms(q))
    sum_f2 = sum(v * v for v in f)
    target = (1 - 2 * params.k ** 2) / (3 * params.gamma ** 2)
    return ClosedForm(params, params.omega1_coeff, mpf(1) / 256, sum_f2, target)


_CLOSED_FORM_CACHE = {}


def default_closed_form():
    """Closed-form parameters at the current precision, solved once and cached."""
    key = mp.prec
    if key not in _CLOSED_FORM_CACHE:
        _CLOSED_FORM_CACHE[key] = closed_form_params()
    return _CLOSED_FORM_CACHE[key]
