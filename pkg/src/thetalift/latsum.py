"""Lattice sums of the singular Schwartz functions g_{kappa,l} and their asymptotics."""
import math
from dataclasses import dataclass

import numpy as np

from . import exactpoly as ep
from . import specfun as sf

SQRT2PI = sf.SQRT2PI


@dataclass(frozen=True)
class LatticeSumResult:
    value: float
    terms_used: int
    tail_bound: float


def g_bold(kappa, l, xi, eta=0.0):
    """sum_nu (-1)^nu/(l-nu)! (xi+i eta)^(kappa+l-nu-1) h_nu(xi); vectorized in xi."""
    if l < 0:
        raise sf.DomainError("l must be nonnegative")
    arr = isinstance(xi, np.ndarray)
    x = np.atleast_1d(np.asarray(xi, dtype=float))
    w = x + 1j * eta
    if eta == 0 and kappa + l - 1 < 0 and np.any(x == 0):
        raise sf.DomainError("g_bold is singular at (0, 0)")
    total = np.zeros_like(w)
    for nu in range(l + 1):
        total += (-1) ** nu / math.factorial(l - nu) * w ** (kappa + l - nu - 1) * sf.h_fn(nu, x)
    if eta == 0:
        total = total.real.astype(complex)
    return total if arr else complex(total[0])


def _e_pow(n):
    """Coefficients of d^n/du^n [(g(u)-1)/(i u)] evaluator."""

    def series(u):
        # (g(u)-1)/(i u) = -i sum_{b>=1} (-1/2)^b u^(2b-1)/b!
        s = 0j
        for b in range(1, 40):
            p = 2 * b - 1
            if p < n:
                continue
            s += (-0.5) ** b / math.factorial(b) * math.perm(p, n) * u ** (p - n)
        return -1j * s

    def closed(u):
        # d^n [g/u] - d^n [1/u], using g^(k) = (-1)^k He_k g
        g = math.exp(-u * u / 2)
        s = 0.0
        for k in range(n + 1):
            he = float(ep.hermite(k)(u))
            s += math.comb(n, k) * (-1) ** k * he * g * (-1) ** (n - k) * math.factorial(n - k) * u ** (-(n - k) - 1)
        s -= (-1) ** n * math.factorial(n) * u ** (-n - 1)
        return -1j * s

    return lambda u: series(u) if abs(u) < 1.0 else closed(u)


def e_kappa_hat(kappa, t, eta):
    """Fourier transform of (xi + i eta)^(kappa-1) e(xi)."""
    u = 2 * math.pi * t
    if kappa >= 1:
        total = 0j
        for mu in range(kappa):
            total += math.comb(kappa - 1, mu) * (1j * eta) ** (kappa - 1 - mu) * 1j ** mu * _e_pow(mu)(u)
        return SQRT2PI * total
    if eta <= 0:
        raise sf.DomainError("kappa <= 0 requires eta > 0")
    return SQRT2PI * 1j ** kappa * math.exp(-eta * u) * sf.i_fn(0, -kappa, eta, u)


def g_kappa_hat(kappa, t, eta):
    """Fourier transform of (xi + i eta)^(kappa-1) g(xi)."""
    u = 2 * math.pi * t
    if kappa >= 1:
        he = float(ep.hermite(kappa - 1)(u - eta))
        return SQRT2PI * (-1j) ** (kappa - 1) * he * math.exp(-u * u / 2)
    if eta <= 0:
        raise sf.DomainError("kappa <= 0 requires eta > 0")
    return SQRT2PI * 1j ** (kappa - 1) * math.exp(-eta * u) * sf.i_fn(-1, -kappa, eta, u)


def _cval(poly, z):
    val = 0j
    for c in reversed(poly.coeffs):
        val = val * z + float(c)
    return val


def g_bold_hat(kappa, l, t, eta):
    """Fourier transform of g_bold(kappa, l, . ; eta) at t.

    Uses g_bold = P_l(i eta) e_kappa + (Pi~_l(xi + i eta, i eta) - Q_l(i eta)) g_kappa, where
    Pi~_l is divisible by its first argument, so each monomial shifts kappa.
    """
    if kappa <= 0 and eta <= 0:
        raise sf.DomainError("kappa <= 0 requires eta > 0")
    z = 1j * eta
    total = _cval(ep.p_poly(l), z) * e_kappa_hat(kappa, t, eta)
    total -= _cval(ep.q_poly(l), z) * g_kappa_hat(kappa, t, eta)
    by_power = {}
    for (a, b), c in ep.pi_tilde_full(l).to_dict().items():
        by_power[a] = by_power.get(a, 0j) + float(c) * z ** b
    for a, coef in sorted(by_power.items()):
        if coef:
            total += coef * g_kappa_hat(kappa + a, t, eta)
    return total


def g_bold_hat_t0(kappa, l, eta):
    """Closed form of g_bold_hat at t = 0."""
    if kappa != 0:
        if kappa + l < 0:
            raise sf.DomainError("closed form needs kappa + l >= 0")
        he_kl = float(ep.hermite(kappa + l)(eta))
        he_l = float(ep.hermite(l)(eta))
        return -SQRT2PI * 1j ** (kappa + l) / (kappa * math.factorial(l)) * (he_kl - eta ** kappa * he_l)
    return SQRT2PI * (-1j) ** l * (sf.i_simple(l, eta) - ep.omega_tilde(l)(eta))


def _cutoff(kappa, l, tol, upsilon):
    """X with X^p g(X) < tol * upsilon / 10 for the dominant power p."""
    p = max(kappa + l, 0)
    target = tol * upsilon / 10
    x = 1.0
    while x ** p * math.exp(-x * x / 2) >= target:
        x += 0.25
    return x


def _lattice_points(w, upsilon, xmax):
    """Nonzero points of Z + w with |upsilon xi| <= xmax, by increasing |xi|, negative first."""
    frac = w - math.floor(w)
    nmax = int(math.ceil(xmax / upsilon)) + 2
    n = np.arange(-nmax, nmax + 1)
    xi = n + frac
    xi = xi[(xi != 0) & (np.abs(upsilon * xi) <= xmax)]
    order = np.lexsort((np.sign(xi), np.abs(xi)))
    return xi[order]


def lattice_sum(kappa, l, w, upsilon, tol=1e-15):
    """Direct sum over 0 != xi in Z + w of g_bold(kappa, l, upsilon xi; 0)."""
    if upsilon <= 0:
        raise sf.DomainError("upsilon must be positive")
    xmax = _cutoff(kappa, l, tol, upsilon)
    xi = _lattice_points(w, upsilon, xmax)
    vals = g_bold(kappa, l, upsilon * xi, 0.0).real
    value = math.fsum(vals)
    # Gaussian-geometric envelope past the cutoff: ratio <= exp(-upsilon * xmax)
    edge = abs(g_bold(kappa, l, xmax + upsilon, 0.0).real) + abs(g_bold(kappa, l, -xmax - upsilon, 0.0).real)
    ratio = math.exp(-upsilon * xmax) * (1 + upsilon / xmax) ** max(kappa + l, 0)
    tail = edge / (1 - min(ratio, 0.999))
    return LatticeSumResult(value=value, terms_used=int(xi.size), tail_bound=tail)


def lattice_sum_minus_gauss(kappa, w, upsilon, tol=1e-15):
    """Second summation route for l = 1: -sum (upsilon xi)^(kappa-1) g(upsilon xi)."""
    xmax = _cutoff(kappa, 1, tol, upsilon)
    xi = _lattice_points(w, upsilon, xmax)
    x = upsilon * xi
    return -math.fsum(x ** (kappa - 1) * np.exp(-x * x / 2))


def lattice_sum_asymptotic(kappa, l, w, upsilon):
    """Main terms of G_{kappa,l}(w; upsilon) as upsilon -> 0."""
    p0 = float(ep.p_poly(l)[0])
    q0 = float(ep.q_poly(l)[0])
    main = -SQRT2PI * upsilon ** (kappa - 1) * (p0 * sf.phi_cap(kappa, w) + q0 * sf.xi_cap(kappa, w))
    if kappa >= 1:
        he0 = float(ep.hermite(kappa + l)[0])
        extra = -SQRT2PI * 1j ** (kappa + l) * he0 / (upsilon * kappa * math.factorial(l))
    elif kappa == 0:
        extra = SQRT2PI / upsilon * p0 * (math.log(upsilon) + sf.c_const(l))
    else:
        extra = 0.0
    total = complex(main + extra)
    if abs(total.imag) > 1e-9 * max(1.0, abs(total.real)):
        raise ArithmeticError("asymptotic main term is not real")
    return total.real


def _slow_coeffs(kappa, l, eta):
    """Coefficients a_mu with g_bold_hat(t) - sum_mu a_mu u^(-mu-1) Gaussian-small, u = 2 pi t."""
    pl = _cval(ep.p_poly(l), 1j * eta)
    out = []
    for mu in range(kappa):
        c = math.comb(kappa - 1, mu) * (1j * eta) ** (kappa - 1 - mu) * 1j ** mu
        out.append(SQRT2PI * pl * c * 1j * (-1) ** mu * math.factorial(mu))
    return out


def poisson_sum(kappa, l, w, upsilon, eta, tol=1e-15):
    """(1/upsilon) sum_m e(m w) g_bold_hat(kappa, l, m/upsilon; eta) for kappa >= 1, w not integral.

    The algebraic part of the transform is summed in closed form through
    sum_{m != 0} e(m w)/(2 pi i m)^n = -B_n(w)/n!, leaving a Gaussian remainder.
    """
    if kappa < 1:
        raise sf.DomainError("Poisson side implemented for kappa >= 1")
    slow = _slow_coeffs(kappa, l, eta)
    total = g_bold_hat(kappa, l, 0.0, eta)
    for mu, a in enumerate(slow):
        n = mu + 1
        total += a * (-(upsilon ** n) * 1j ** n * sf.periodic_bernoulli(n, w) / math.factorial(n))
    m = 1
    while True:
        term = 0j
        for sgn in (1, -1):
            t = sgn * m / upsilon
            u = 2 * math.pi * t
            rem = g_bold_hat(kappa, l, t, eta) - sum(a * u ** (-mu - 1) for mu, a in enumerate(slow))
            term += complex(math.cos(2 * math.pi * sgn * m * w), math.sin(2 * math.pi * sgn * m * w)) * rem
        total += term
        u = 2 * math.pi * m / upsilon
        if abs(term) < tol and u * u / 2 > -math.log(tol) + (kappa + l) * math.log(u + 1):
            break
        m += 1
    return total / upsilon


def residual_orders(kappa, l, w, upsilons=(0.2, 0.1, 0.05, 0.025), rel_floor=1e-11):
    """log2 slopes of |direct - asymptotic| under successive halving of upsilon.

    A pair whose residuals both sit below rel_floor times the summed magnitudes
    is at roundoff and reported as None: it meets any predicted order.
    """
    resid, floor = [], []
    for u in upsilons:
        d = lattice_sum(kappa, l, w, u).value
        xi = _lattice_points(w, u, _cutoff(kappa, l, 1e-15, u))
        scale = math.fsum(np.abs(g_bold(kappa, l, u * xi, 0.0).real))
        resid.append(abs(d - lattice_sum_asymptotic(kappa, l, w, u)))
        floor.append(rel_floor * max(1.0, scale))
    out = []
    for i in range(len(upsilons) - 1):
        if resid[i] <= floor[i] and resid[i + 1] <= floor[i + 1]:
            out.append(None)
        elif resid[i] == 0 or resid[i + 1] == 0:
            out.append(None if max(resid[i], resid[i + 1]) <= max(floor[i], floor[i + 1]) else float("-inf"))
        else:
            step = math.log2(upsilons[i] / upsilons[i + 1])
            out.append(math.log2(resid[i] / resid[i + 1]) / step)
    return out
