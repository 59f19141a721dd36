"""Traces of level-one nearly holomorphic forms: CM values, closed geodesics, regularized split geodesics."""
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from . import exactpoly as ep
from . import modforms as mf
from . import qforms as qf
from . import specfun as sf

DEFAULT_T = 8.0
DEFAULT_NODES = 128
EXTENDED_DPS = 60
ROUNDOFF = 1e-15


class TraceError(ValueError):
    """Invalid input for a trace."""


@dataclass(frozen=True)
class TraceValue:
    value: complex
    err: float
    regularization_T: float = None

    def __add__(self, other):
        t = self.regularization_T if self.regularization_T is not None else other.regularization_T
        return TraceValue(self.value + other.value, self.err + other.err, t)

    def scale(self, s):
        return TraceValue(s * self.value, abs(s) * self.err, self.regularization_T)


def _half_weight(f):
    return f.weight // 2


# CM traces ---------------------------------------------------------------------

def trace_cm(f, d, tol=1e-10):
    """sum over positive definite classes of 2/|Gamma_lambda| f(z_lambda)."""
    if f.weight != 0:
        raise TraceError("CM traces are defined for weight 0")
    if d >= 0 or d % 4 not in (0, 1):
        raise TraceError("d must be a negative discriminant")
    total = 0j
    for form in qf.class_reps(d):
        if form.a <= 0:
            continue
        p = qf.cm_point(form)
        total += 2 / p.stabilizer_order * mf.evaluate(f, p.z, tol=tol)
    return TraceValue(total, tol * len(qf.class_reps(d)))


def signed_cm_trace(f, d, kappa, tol=1e-10):
    """sum over all definite classes of (sign)^kappa / |Gamma| f(z), sign that of -A."""
    if f.weight != 0:
        raise TraceError("CM traces are defined for weight 0")
    total = 0j
    for form in qf.class_reps(d):
        p = qf.cm_point(form if form.a > 0 else -form)
        sgn = -1 if form.a > 0 else 1
        total += sgn ** kappa / p.stabilizer_order * mf.evaluate(f, p.z, tol=tol)
    return TraceValue(total, tol * len(qf.class_reps(d)))


# quadrature ----------------------------------------------------------------------

@lru_cache(maxsize=None)
def _gl(m):
    x, w = np.polynomial.legendre.leggauss(m)
    return x, w


@lru_cache(maxsize=None)
def _gl_mp(degree, dps):
    with mpmath.workdps(dps):
        rule = mpmath.calculus.quadrature.GaussLegendre(mpmath.mp)
        return tuple(rule.calc_nodes(degree, mpmath.mp.prec))


def _panels(a, b, width):
    n = max(1, math.ceil((b - a) / width))
    edges = np.linspace(a, b, n + 1)
    return list(zip(edges[:-1], edges[1:]))


def _per_panel(nodes, npanels):
    return max(8, math.ceil(nodes / npanels))


def _composite(func, panels, m):
    """Composite Gauss-Legendre value and the absolute mass sum |w f|."""
    x, w = _gl(m)
    total, mass = 0j, 0.0
    for a, b in panels:
        half, mid = (b - a) / 2, (a + b) / 2
        vals = np.array([func(half * t + mid) for t in x])
        total += half * np.dot(w, vals)
        mass += half * np.dot(w, np.abs(vals))
    return complex(total), mass


MAX_PER_PANEL = 64


def _integrate(func, panels, nodes):
    """Value with the finer rule; err is the node-doubling change plus a roundoff floor.

    The per-panel rule is doubled while the doubling change is above the roundoff
    floor and still shrinking.
    """
    m = _per_panel(nodes, len(panels))
    lo, _ = _composite(func, panels, m)
    hi, mass = _composite(func, panels, 2 * m)
    change = abs(hi - lo)
    while 2 * m < MAX_PER_PANEL and change > 1e-13 * mass:
        m *= 2
        nxt, mass = _composite(func, panels, 2 * m)
        new_change = abs(nxt - hi)
        if new_change >= change:
            break
        hi, change = nxt, new_change
    return hi, float(change + ROUNDOFF * mass)


# extended precision evaluation --------------------------------------------------

def _mp_coeff(c):
    if isinstance(c, Fraction):
        return mpmath.mpf(c.numerator) / c.denominator
    return mpmath.mpf(c)


@lru_cache(maxsize=64)
def _mp_layers(form_json):
    f = mf.NearlyHolForm.from_json(form_json)
    return f.weight, tuple(tuple((n, _mp_coeff(c)) for n, c in layer.items()) for layer in f.layers)


def _eval_mp(f_json, z):
    """f(z) in mpmath; z an mpc. Reduction matrix from a double approximation."""
    weight, layers = _mp_layers(f_json)
    _, m = mf.reduce_point(complex(z))
    (a, b), (c, d) = m
    w = (a * z + b) / (c * z + d)
    q = mpmath.exp(2j * mpmath.pi * w)
    yi = 1 / w.imag
    total = mpmath.mpc(0)
    eps = mpmath.mpf(10) ** (-mpmath.mp.dps)
    for l, layer in enumerate(layers):
        s = mpmath.mpc(0)
        qn, last, small = None, None, 0
        for n, coeff in layer:
            # q^n built incrementally; stop once two successive terms drop below working precision
            qn = q ** n if last is None or n - last > 1 else qn * q
            last = n
            term = coeff * qn
            s += term
            if n > 0 and coeff:
                small = small + 1 if abs(term) < eps * abs(s) else 0
                if small >= 2:
                    break
        total += s * yi ** l
    return (c * z + d) ** (-weight) * total


def _inc_gamma_mp(mu, t):
    if mu >= 1:
        s = mpmath.mpf(0)
        term = mpmath.mpf(1)
        for a in range(mu):
            if a:
                term *= t / a
            s += term
        return mpmath.exp(-t) * math.factorial(mu - 1) * s
    n = -mu
    g0 = -mpmath.ei(-t)
    s = mpmath.mpf(0)
    for a in range(n):
        s += math.factorial(a) / (-t) ** (a + 1)
    return (-1) ** n / mpmath.mpf(math.factorial(n)) * (g0 + mpmath.exp(-t) * s)


def _phi_mp(n, kappa, T):
    r = 2 * mpmath.pi
    if n != 0:
        return _inc_gamma_mp(kappa, r * n * T) / (r * n) ** kappa
    if kappa != 0:
        return -mpmath.mpf(T) ** kappa / kappa
    return -mpmath.log(T)


# closed geodesics -----------------------------------------------------------------

def _geodesic_path(form):
    """z(s), dz/ds and period L of the oriented geodesic, s hyperbolic arclength from the top."""
    g = qf.geodesic_data(form)
    c0, rad = g.center, g.radius
    sigma = 1.0 if g.end > g.start else -1.0

    def z(s):
        return complex(c0 + rad * sigma * math.tanh(s), rad / math.cosh(s))

    def dz(s):
        sech = 1 / math.cosh(s)
        return complex(rad * sigma * sech * sech, -rad * sech * math.tanh(s))

    return z, dz, 2 * math.log(g.epsilon)


def cycle_integral(f, form, nodes=DEFAULT_NODES, tol=1e-12):
    """Integral of f(z) lambda(z)^(k-1) dz over one period of the closed geodesic of form."""
    d = form.disc
    if d <= 0 or qf.is_square(d):
        raise TraceError("cycle integrals need a positive nonsquare discriminant")
    k = _half_weight(f)
    z, dz, length = _geodesic_path(form)

    def integrand(s):
        p = z(s)
        lam = form.a * p * p + form.b * p + form.c
        return mf.evaluate(f, p, tol=tol) * lam ** (k - 1) * dz(s)

    # one period centred on the top of the arc keeps the path away from the cusps
    value, err = _integrate(integrand, _panels(-length / 2, length / 2, 0.5), nodes)
    return TraceValue(value, err)


def trace_cycle(f, d, nodes=DEFAULT_NODES):
    """Sum of cycle integrals over the classes of discriminant d > 0, d nonsquare."""
    if d <= 0 or d % 4 not in (0, 1):
        raise TraceError("d must be a positive discriminant")
    if qf.is_square(d):
        raise TraceError("square discriminant: use trace_square")
    total = TraceValue(0j, 0.0)
    for form in qf.class_reps(d):
        total = total + cycle_integral(f, form, nodes)
    return total


# split geodesics ------------------------------------------------------------------

def _split_params(form):
    rep, _ = qf.canonical_rep(form)
    r, j = rep.b, rep.c
    return rep, r, j


def sing_term(f, form, T, extended=False):
    """i^k (2 sqrt Q)^(k-1) sum_{n,l} c(n,l) e(n r_lambda) phi_n(k-l, T; 2 pi), r_lambda = -j/r."""
    d = form.disc
    if d <= 0 or not qf.is_square(d):
        raise TraceError("Sing needs a positive square discriminant")
    rep, r, j = _split_params(form)
    k = _half_weight(f)
    if extended:
        with mpmath.workdps(EXTENDED_DPS):
            total = mpmath.mpc(0)
            for l, layer in enumerate(f.layers):
                for n, c in layer.items():
                    phase = mpmath.expjpi(-2 * mpmath.mpf(n * j) / r)
                    total += _mp_coeff(c) * phase * _phi_mp(n, k - l, T)
            return (1j) ** k * mpmath.mpf(r) ** (k - 1) * total
    total = 0j
    for l, layer in enumerate(f.layers):
        for n, c in layer.items():
            phase = complex(math.cos(2 * math.pi * n * j / r), -math.sin(2 * math.pi * n * j / r))
            total += complex(c) * phase * sf.phi_sing(n, k - l, T)
    return (1j) ** k * r ** (k - 1) * total


def _needs_extended(f, T, tol):
    nmin = min((n for layer in f.layers for n, c in layer.items() if c), default=0)
    if nmin >= 0:
        return False
    return math.exp(2 * math.pi * (-nmin) * T) * 1e-16 > tol


def _vertical_panels(f, r, g, T):
    """Panels in u = log y on [log(g^2/(r^2 T)), log T], refined where the integrand is exponential."""
    nmin = min((n for layer in f.layers for n, c in layer.items() if c), default=0)
    rate0 = 2 * math.pi * max(-nmin, 0)
    lo, hi = math.log(g * g / (r * r * T)), math.log(T)
    cb = g * g / (r * r)
    panels, u = [], lo

    def rate(v):
        y = math.exp(v)
        return rate0 * max(y, cb / y) + 1.0

    while u < hi:
        h = min(0.25, 3.0 / rate(u))
        h = min(h, 3.0 / rate(min(u + h, hi)))
        b = min(u + h, hi)
        panels.append((u, b))
        u = b
    return panels


def _split_bracket_double(f, form, T, nodes, tol):
    rep, r, j = _split_params(form)
    g = math.gcd(j, r)
    k = _half_weight(f)
    x0 = -j / r

    def integrand(u):
        y = math.exp(u)
        z = complex(x0, y)
        return mf.evaluate(f, z, tol=tol) * (r * 1j * y) ** (k - 1) * 1j * y

    value, err = _integrate(integrand, _vertical_panels(f, r, g, T), nodes)
    sing = sing_term(f, rep, T) + (-1) ** k * sing_term(f, -rep, T)
    return value + sing, err


def _split_bracket_mp(f, form, T, nodes):
    rep, r, j = _split_params(form)
    g = math.gcd(j, r)
    k = _half_weight(f)
    fj = f.to_json()
    panels = _vertical_panels(f, r, g, T)
    with mpmath.workdps(EXTENDED_DPS):
        x0 = -mpmath.mpf(j) / r
        lo_deg = 4 if _per_panel(nodes, len(panels)) <= 24 else 5
        results = []
        for degree in (lo_deg, lo_deg + 1):
            rule = _gl_mp(degree, EXTENDED_DPS)
            total = mpmath.mpc(0)
            for a, b in panels:
                a = mpmath.mpf(a) if a != panels[0][0] else mpmath.log(mpmath.mpf(g * g) / (r * r * mpmath.mpf(T)))
                b = mpmath.mpf(b) if b != panels[-1][1] else mpmath.log(mpmath.mpf(T))
                half, mid = (b - a) / 2, (a + b) / 2
                for x, w in rule:
                    u = half * x + mid
                    y = mpmath.exp(u)
                    z = mpmath.mpc(x0, y)
                    total += half * w * _eval_mp(fj, z) * (r * 1j * y) ** (k - 1) * 1j * y
            results.append(total)
        sing = sing_term(f, rep, T, extended=True) + (-1) ** k * sing_term(f, -rep, T, extended=True)
        value = complex(results[1] + sing)
        err = float(abs(results[1] - results[0])) + ROUNDOFF * abs(value)
    return value, err


def split_class_trace(f, form, T=DEFAULT_T, nodes=DEFAULT_NODES, precision="auto", tol=1e-12):
    """Regularized trace of one split class: cutoff integral plus Sing_lambda + (-1)^k Sing_{-lambda}."""
    if T <= 1:
        raise TraceError("regularization cutoff must exceed 1")
    if precision not in ("auto", "double", "extended"):
        raise TraceError("precision must be auto, double or extended")
    extended = precision == "extended" or (precision == "auto" and _needs_extended(f, T, 1e-9))
    if extended:
        value, err = _split_bracket_mp(f, form, T, nodes)
    else:
        value, err = _split_bracket_double(f, form, T, nodes, tol)
    return TraceValue(value, err, T)


def orbits(d):
    """One form per SL2(Z)-orbit; for d = r^2 the r forms [0, r, j], since -[0,r,j] ~ [0,r,-1/j]."""
    reps = qf.class_reps(d)
    if d > 0 and qf.is_square(d):
        return [f for f in reps if f.b > 0]
    return reps


def trace_square(f, d, T=DEFAULT_T, nodes=DEFAULT_NODES, precision="auto"):
    """Regularized trace for d = r^2: sum of split class traces over the r orbits."""
    if d <= 0 or not qf.is_square(d):
        raise TraceError("trace_square needs a positive square")
    total = TraceValue(0j, 0.0, T)
    for form in orbits(d):
        total = total + split_class_trace(f, form, T, nodes, precision)
    return total


def trace_zero(f):
    """c(0,0) times the constant term of zeta at 1-k (gamma when k = 0)."""
    k = _half_weight(f)
    if k < 0 or k % 2:
        raise TraceError("trace_zero needs k even and nonnegative")
    c00 = f.coeff(0, 0)
    if k == 0:
        return TraceValue(complex(c00) * sf.EULER_GAMMA, 0.0)
    _, bk = ep.bernoulli(k)
    return TraceValue(complex(c00) * float(-bk / k), 0.0)


def trace_d(f, d, T=DEFAULT_T, nodes=DEFAULT_NODES, precision="auto"):
    """Tr_d(f) for any discriminant d, dispatching on its sign and squareness."""
    if d % 4 not in (0, 1):
        raise TraceError("d must be a discriminant")
    if d < 0:
        return trace_cm(f, d)
    if d == 0:
        return trace_zero(f)
    if qf.is_square(d):
        return trace_square(f, d, T, nodes, precision)
    return trace_cycle(f, d, nodes)


def class_trace(f, form, T=DEFAULT_T, nodes=DEFAULT_NODES, precision="auto"):
    d = form.disc
    if d <= 0:
        raise TraceError("class traces here are for positive discriminants")
    if qf.is_square(d):
        return split_class_trace(f, form, T, nodes, precision)
    return cycle_integral(f, form, nodes)


def twisted_trace(f, delta, D, T=DEFAULT_T, nodes=DEFAULT_NODES, precision="auto"):
    """sum over classes of discriminant delta*D of chi_delta(lambda) Tr_lambda(f)."""
    if delta >= 0 or not qf.is_fundamental(delta):
        raise TraceError("delta must be a negative fundamental discriminant")
    if D >= 0 or D % 4 not in (0, 1):
        raise TraceError("D must be a negative discriminant")
    total = TraceValue(0j, 0.0, T if qf.is_square(delta * D) else None)
    for form in orbits(delta * D):
        chi = qf.genus_char(delta, form)
        if chi:
            total = total + class_trace(f, form, T, nodes, precision).scale(chi)
    return total
