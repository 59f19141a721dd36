"""Floating evaluation of the special functions built on the exact polynomials.

Conventions: g(x) = exp(-x^2/2), e(x) = -sgn(x) * int_{|x|}^oo g, and
h_nu = P_nu e + Q_nu g.  Everything is binary64 unless stated otherwise.
"""
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from . import exactpoly as ep

SQRT2PI = math.sqrt(2 * math.pi)
EULER_GAMMA = 0.57721566490153286061
LOG2 = math.log(2.0)


class DomainError(ValueError):
    """Argument outside the domain where the function is defined."""


class SpecialValue(float):
    """A float carrying an absolute error estimate."""

    def __new__(cls, value, abs_error_estimate=0.0):
        obj = float.__new__(cls, value)
        obj.abs_error_estimate = float(abs_error_estimate)
        return obj


@lru_cache(maxsize=None)
def _float_coeffs(family, n):
    poly = getattr(ep, family)(n)
    return tuple(float(c) for c in poly.coeffs)


def polyval(coeffs, x):
    acc = np.zeros_like(x, dtype=float) if isinstance(x, np.ndarray) else 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def p_val(nu, x):
    return polyval(_float_coeffs("p_poly", nu), x)


def q_val(nu, x):
    return polyval(_float_coeffs("q_poly", nu), x)


def gauss(x):
    return np.exp(-np.square(x) / 2) if isinstance(x, np.ndarray) else math.exp(-x * x / 2)


def err_anti(x):
    if isinstance(x, np.ndarray):
        if np.any(x == 0):
            raise DomainError("e(x) has a jump at 0")
        return -np.sign(x) * math.sqrt(math.pi / 2) * special.erfc(np.abs(x) / math.sqrt(2))
    if x == 0:
        raise DomainError("e(x) has a jump at 0")
    return -math.copysign(1.0, x) * math.sqrt(math.pi / 2) * special.erfc(abs(x) / math.sqrt(2))


def _h_ratio_miller(nu, x):
    """h_nu(x)/g(x) for x > 0 by backward recurrence on the minimal solution.

    R_nu = h_nu/g obeys nu R_nu = x R_{nu-1} + R_{nu-2}, R_{-1} = 1, and is the
    recessive solution, so it is computed downward from a zero seed.
    """
    x = np.asarray(x, dtype=float)
    top = nu + 300
    r_hi = np.zeros_like(x)          # R_{m}
    r_lo = np.full_like(x, 1e-300)   # R_{m-1}
    vals = {}
    for m in range(top, -1, -1):
        # R_{m-2} = m R_m - x R_{m-1}
        r_new = m * r_hi - x * r_lo
        r_hi, r_lo = r_lo, r_new
        big = np.abs(r_lo) > 1e250
        if np.any(big):
            scale = np.where(big, 1e-250, 1.0)
            r_hi = r_hi * scale
            r_lo = r_lo * scale
            vals = {k: v * scale for k, v in vals.items()}
        if m - 2 <= nu:
            vals[m - 2] = r_lo.copy()
        if m - 1 <= nu and (m - 1) not in vals:
            vals[m - 1] = r_hi.copy()
    r0 = -math.sqrt(math.pi / 2) * special.erfcx(x / math.sqrt(2))
    return vals[nu] * r0 / vals[0] if nu >= 0 else vals[nu] / vals[-1]


def h_fn(nu, x):
    """h_nu(x); vectorized over numpy arrays."""
    arr = isinstance(x, np.ndarray)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if nu <= -1:
        out = q_val(nu, xa) * gauss(xa)
        return out if arr else float(out[0])
    if np.any(xa == 0):
        raise DomainError("h_nu has a jump at 0 for nu >= 0")
    out = np.empty_like(xa)
    ax = np.abs(xa)
    small = ax <= 2.0
    if np.any(small):
        xs = xa[small]
        out[small] = p_val(nu, xs) * err_anti(xs) + q_val(nu, xs) * gauss(xs)
    big = ~small
    if np.any(big):
        xb = ax[big]
        val = _h_ratio_miller(nu, xb) * gauss(xb)
        sign = np.where(xa[big] < 0, (-1.0) ** (nu - 1), 1.0)
        out[big] = sign * val
    return out if arr else float(out[0])


def h_limit_left(j):
    """lim_{x -> 0^-} h_j(x) = Q_j(0) + sqrt(pi/2) P_j(0)."""
    return float(ep.q_poly(j)[0]) + math.sqrt(math.pi / 2) * float(ep.p_poly(j)[0])


def h_hat(nu, t):
    """Fourier transform int h_nu(x) exp(-2 pi i x t) dx, nu >= -1."""
    if nu < -1:
        raise DomainError("h_hat defined for nu >= -1")
    s = 2j * math.pi * t
    if abs(s) <= 2.0:
        # odd P_r(0) vanish; 60 even terms exhaust binary64 for |s| <= 2
        total = 0j
        for r in range(nu + 1, nu + 122):
            if r % 2 == 0:
                total += float(ep.p_poly(r)[0]) * s ** (r - nu - 1)
        return SQRT2PI * total
    out = gauss(2 * math.pi * t) / s ** (nu + 1)
    for r in range(nu + 1):
        out -= float(ep.p_poly(r)[0]) / s ** (nu - r + 1)
    return SQRT2PI * out


def expi(x):
    """Exponential integral Ei (principal value for x > 0)."""
    return float(special.expi(x))


def inc_gamma_ext(mu, t):
    """Gamma(mu, t) for integer mu, with the principal value for t < 0."""
    if mu >= 1:
        s = 0.0
        term = 1.0
        for a in range(mu):
            if a:
                term *= t / a
            s += term
        return math.exp(-t) * math.factorial(mu - 1) * s
    if t == 0:
        raise DomainError("Gamma(mu, 0) has a pole for mu <= 0")
    n = -mu
    g0 = -expi(-t)
    s = 0.0
    for a in range(n):
        s += math.factorial(a) / (-t) ** (a + 1)
    return (-1) ** n / math.factorial(n) * (g0 + math.exp(-t) * s)


def phi_sing(n, kappa, T, r=2 * math.pi):
    """Singular term phi_n(kappa, T; r) used in the cusp regularization."""
    if T <= 0 or r <= 0:
        raise DomainError("T and r must be positive")
    if n != 0:
        return inc_gamma_ext(kappa, r * n * T) / (r * n) ** kappa
    if kappa != 0:
        return -T ** kappa / kappa
    return -math.log(T)


def harmonic(n):
    return ep.harmonic(n)


def c_const(l):
    odd = sum((Fraction(1, a) for a in range(1, l + 1, 2)), Fraction(0))
    return (EULER_GAMMA + LOG2) / 2 - float(odd)


def periodic_bernoulli(mu, w):
    """1-periodic Bernoulli function, with value 0 at integers for mu = 1."""
    frac = w - math.floor(w)
    if frac == 0:
        if mu == 1:
            return 0.0
        return float(ep.bernoulli(mu)[1])
    poly, _ = ep.bernoulli(mu)
    return poly(frac)


def polygamma(m, z):
    if z <= 0:
        raise DomainError("polygamma requires z > 0 here")
    return float(special.polygamma(m, z))


def _rep_01(w):
    """Representative of w mod 1 in (0, 1]."""
    f = w - math.floor(w)
    return 1.0 if f == 0 else f


def _is_integral(w):
    return (w - math.floor(w)) == 0


@lru_cache(maxsize=None)
def _f_numerator(j):
    """Numerator N_j with sum_{m>=1} m^j q^m = N_j(q)/(1-q)^(j+1)."""
    num = ep.ExactPoly([0, 1])  # q/(1-q)
    for i in range(j):
        # q d/dq [N/(1-q)^(i+1)] = (q N' (1-q) + (i+1) q N)/(1-q)^(i+2)
        q = ep.ExactPoly([0, 1])
        num = q * num.deriv() * ep.ExactPoly([1, -1]) + q * num * (i + 1)
    return num


def f_neg(w, j):
    """F(e(w), -j) = sum_{m>=1} m^j e(m w), continued to |q| = 1, q != 1."""
    if _is_integral(w):
        raise DomainError("F(e(w), -j) has a pole at integral w")
    q = complex(math.cos(2 * math.pi * w), math.sin(2 * math.pi * w))
    num = _f_numerator(j)
    val = 0j
    for c in reversed(num.coeffs):
        val = val * q + float(c)
    return val / (1 - q) ** (j + 1)


def phi_cap(kappa, w):
    if kappa >= 1:
        return -periodic_bernoulli(kappa, w) / kappa
    m = -kappa
    return -(polygamma(m, _rep_01(-w)) + (-1) ** kappa * polygamma(m, _rep_01(w))) / (2 * math.factorial(m))


def xi_cap(kappa, w):
    pref = (-2j * math.pi) ** (1 - kappa) / SQRT2PI
    if kappa <= 0 and not _is_integral(w):
        return pref * (f_neg(w, -kappa) / math.factorial(-kappa) + (0.5 if kappa == 0 else 0.0))
    if kappa <= 1 and _is_integral(w):
        return pref * (-periodic_bernoulli(1 - kappa, 0.0) / math.factorial(1 - kappa))
    return 0j


# I functions ---------------------------------------------------------------

def _he0_over_fact(mu):
    return float(ep.hermite(mu)[0]) / math.factorial(mu) if mu >= 0 else 0.0


def _gauss_tail_over_pow(w, nu):
    """(exp(-w^2/2) - sum_{mu<=nu} He_mu(0) w^mu/mu!) / w^(nu+1), stable near 0."""
    if nu <= -1:
        return math.exp(-w * w / 2) * w ** (-nu - 1)
    if abs(w) < 1.0:
        # series: sum over 2b > nu of (-1/2)^b/b! w^(2b-nu-1)
        s = 0.0
        b = nu // 2 + 1
        while True:
            term = (-0.5) ** b / math.factorial(b) * w ** (2 * b - nu - 1)
            s += term
            if abs(term) < 1e-18 * max(abs(s), 1e-300) and 2 * b - nu - 1 > 0 or b > nu // 2 + 60:
                break
            b += 1
        return s
    poly = sum(_he0_over_fact(mu) * w ** mu for mu in range(nu + 1))
    return (math.exp(-w * w / 2) - poly) / w ** (nu + 1)


def _quad(f, a, b, **kw):
    opts = dict(epsabs=1e-15, epsrel=1e-13, limit=400)
    opts.update(kw)
    val, err = integrate.quad(f, a, b, **opts)
    return val, err


def i_fn(nu, j, eta, t):
    """I_{nu,j}(eta, t) by adaptive quadrature plus analytic polynomial tails."""
    if j < 0:
        raise DomainError("j must be nonnegative")
    if nu >= 0 and eta <= 0:
        raise DomainError("I_{nu,j} diverges for eta <= 0 when nu >= 0")
    lower = -t
    jf = math.factorial(j)

    def integrand(w):
        return (w + t) ** j / jf * math.exp(-eta * w) * _gauss_tail_over_pow(w, nu)

    total = 0.0
    err = 0.0
    a0 = lower
    if lower < 0:
        v, e = _quad(integrand, lower, 0.0, points=None)
        total += v
        err += e
        a0 = 0.0
    a1 = max(a0, 1.0)
    if a1 > a0:
        v, e = _quad(integrand, a0, a1)
        total += v
        err += e
    # [a1, oo): Gaussian part numerically, polynomial part in closed form
    def gpart(w):
        return (w + t) ** j / jf * math.exp(-eta * w - w * w / 2) / w ** (nu + 1)
    v, e = _quad(gpart, a1, np.inf)
    total += v
    err += e
    if nu >= 0:
        for mu in range(nu + 1):
            c = _he0_over_fact(mu)
            if not c:
                continue
            for a in range(j + 1):
                coef = math.comb(j, a) * t ** (j - a) / jf * c
                if coef == 0:
                    continue
                p = a + mu - nu - 1
                # int_{a1}^oo w^p exp(-eta w) dw = eta^(-p-1) Gamma(p+1, eta a1)
                total -= coef * inc_gamma_ext(p + 1, eta * a1) / eta ** (p + 1)
    return SpecialValue(total, err)


def i_simple(nu, eta):
    return i_fn(nu, 0, eta, 0.0)


def j_fn(nu, eta):
    """J_nu(eta) = P~_nu J_0 - Q~_nu J_{-1}."""
    return j_fn_scaled(nu, eta) * math.exp(eta * eta / 2)


def j_fn_scaled(nu, eta):
    """exp(-eta^2/2) J_nu(eta), avoiding overflow for large eta."""
    pt, qt = ep.pq_modified(nu)
    j0s = -math.sqrt(2) * float(special.dawsn(eta / math.sqrt(2)))
    return pt(eta) * j0s - qt(eta)


def ei_series(x, terms=200):
    """Ei by its power series (used only as a cross-check for moderate |x|)."""
    s = 0.0
    term = 1.0
    for k in range(1, terms):
        term *= x / k
        s += term / k
    return EULER_GAMMA + math.log(abs(x)) + s
