"""Fourier expansions of weight k + 1/2 theta lifts of weight 2k forms for SL2(Z).

An expansion is a list of tagged terms; each term is a coefficient times a
y-shape times q^d, with q = e(tau). Shapes, with X = 2 sqrt(2 pi |d| y):

    holo          1
    ypow(b)       (16 pi y)^-b
    h_shape(l)    h_l(X) / X^l
    J_shape(l)    J_l(X) / X^l
    I_shape(l)    (I_l(X) - Om~_l(X)) / X^l
    log_shape(p, C)  (log(8 pi y)/2 + C) / (16 pi y)^p
    const(e)      (8 pi y)^(-e/2)
"""

import cmath
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exactpoly as ep
from . import modforms as mf
from . import qforms as qf
from . import specfun as sf
from . import traces as tr

SQRT2PI = math.sqrt(2 * math.pi)
DEFAULT_DMAX = 20
KINDS = ("holo", "ypow", "h_shape", "J_shape", "I_shape", "log_shape", "const")
SAMPLE_POINTS = (complex(0.1, 0.8), complex(-0.3, 0.95), complex(0.25, 1.1),
                 complex(0.4, 1.3), complex(-0.15, 1.5))


class LiftError(ValueError):
    pass


class PreconditionError(LiftError):
    pass


class CertificationError(LiftError):
    pass


@dataclass(frozen=True)
class LiftTerm:
    d: int
    kind: str
    coeff: complex
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise LiftError(f"unknown term kind {self.kind!r}")
        object.__setattr__(self, "coeff", complex(self.coeff))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    def shape_times_q(self, y):
        """y-shape times exp(-2 pi d y), combined in the exponent where it matters."""
        d, kind, p = self.d, self.kind, self.params
        decay = -2 * math.pi * d * y
        if kind == "holo":
            return math.exp(decay)
        if kind == "ypow":
            return (16 * math.pi * y) ** -p[0] * math.exp(decay)
        if kind == "log_shape":
            return (math.log(8 * math.pi * y) / 2 + p[1]) / (16 * math.pi * y) ** p[0] * math.exp(decay)
        if kind == "const":
            return (8 * math.pi * y) ** (-p[0] / 2) * math.exp(decay)
        if d == 0:
            raise LiftError(f"{kind} needs d != 0")
        l = int(p[0])
        x = 2 * math.sqrt(2 * math.pi * abs(d) * y)
        if kind == "h_shape":
            if x <= 2 or l <= -1:
                val = sf.h_fn(l, x) * math.exp(decay)
            else:
                ratio = float(sf._h_ratio_miller(l, np.array([x]))[0])
                val = ratio * math.exp(decay - x * x / 2)
            return val / x ** l
        if kind == "J_shape":
            return sf.j_fn_scaled(l, x) * math.exp(decay + x * x / 2) / x ** l
        # I_shape
        return (float(sf.i_simple(l, x)) - float(ep.omega_tilde(l)(x))) / x ** l * math.exp(decay)

    def evaluate(self, tau):
        return self.coeff * self.shape_times_q(tau.imag) * cmath.exp(2j * math.pi * self.d * tau.real)


@dataclass(frozen=True)
class LiftExpansion:
    k: int
    terms: tuple
    theorem: str
    d_max: int
    delta: int = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def weight(self):
        return Fraction(2 * self.k + 1, 2)

    def by_kind(self, kind):
        return [t for t in self.terms if t.kind == kind]

    def coefficient(self, d, kind="holo", params=()):
        params = tuple(float(p) for p in params)
        return sum((t.coeff for t in self.terms
                    if t.d == d and t.kind == kind and (not params or t.params == params)), 0j)

    def holomorphic_part(self):
        return {t.d: t.coeff for t in self.terms if t.kind == "holo"}

    def in_plus_space(self):
        sign = -1 if self.k % 2 else 1
        return all((sign * t.d) % 4 in (0, 1) for t in self.terms)

    def to_json(self):
        doc = {"theorem": self.theorem, "k": self.k}
        if self.delta is not None:
            doc["delta"] = self.delta
        doc["terms"] = [{"d": t.d, "kind": t.kind, "coeff_re": t.coeff.real,
                         "coeff_im": t.coeff.imag, "params": list(t.params)} for t in self.terms]
        doc["meta"] = {"d_max": self.d_max, "tolerances": dict(self.meta.get("tolerances", {}))}
        return doc

    @classmethod
    def from_json(cls, doc):
        if isinstance(doc, str):
            doc = json.loads(doc)
        terms = tuple(LiftTerm(t["d"], t["kind"], complex(t["coeff_re"], t["coeff_im"]), tuple(t["params"]))
                      for t in doc["terms"])
        meta = {"tolerances": dict(doc.get("meta", {}).get("tolerances", {}))}
        return cls(doc["k"], terms, doc["theorem"], doc["meta"]["d_max"], doc.get("delta"), meta)


# traces with caching ------------------------------------------------------------

_TRACE_CACHE = {}


def _form_key(f):
    return json.dumps(f.to_json(), sort_keys=True)


def _is_zero(f):
    return all(not c for fl in f.layers for _, c in fl.items())


def full_trace(f, d, T=tr.DEFAULT_T, nodes=tr.DEFAULT_NODES, precision="auto"):
    """Tr_d over all classes; at d < 0 both definite classes count, each with 2/|Gamma| and sign (-A)^k."""
    key = (_form_key(f), d, T, nodes, precision)
    if key not in _TRACE_CACHE:
        if d < 0:
            _TRACE_CACHE[key] = tr.signed_cm_trace(f, d, 0).scale(2)
        else:
            _TRACE_CACHE[key] = tr.trace_d(f, d, T=T, nodes=nodes, precision=precision)
    return _TRACE_CACHE[key]


def _discriminants(lo, hi):
    return [d for d in range(lo, hi + 1) if d % 4 in (0, 1)]


def _collect(terms, errs):
    return tuple(terms), {"tolerances": {"trace_err_max": max(errs, default=0.0)}}


# assemblers ---------------------------------------------------------------------

def lift_e2k(k, d_max=DEFAULT_DMAX, T=tr.DEFAULT_T, nodes=tr.DEFAULT_NODES, precision="auto",
             q_order=mf.DEFAULT_ORDER):
    """Lift of (pi/3 E_2^*)^k divided by k!, for even k > 0."""
    if k <= 0 or k % 2:
        raise PreconditionError("k must be even and positive")
    powers = {j: mf.e2k_power(j, q_order) for j in range(0, k + 1, 2)}
    terms, errs = [], []
    for d in _discriminants(0, d_max):
        for b in range(k // 2 + 1):
            j = k - 2 * b
            t = full_trace(powers[j], d, T, nodes, precision)
            errs.append(t.err)
            c = t.value / (math.factorial(j) * math.factorial(b))
            terms.append(LiftTerm(d, "holo", c) if b == 0 else LiftTerm(d, "ypow", c, (b,)))
    for d in reversed(_discriminants(-d_max, -1)):
        c = 2 * SQRT2PI * float(qf.hurwitz(-d)) * abs(d) ** ((k - 1) / 2)
        terms.append(LiftTerm(d, "h_shape", c, (k,)))
    terms.append(LiftTerm(0, "log_shape", -1 / math.factorial(k // 2), (k // 2, sf.c_const(k))))
    terms.append(LiftTerm(0, "const", SQRT2PI * float(ep.q_poly(k - 1)[0]) / 6, (k - 1,)))
    for a in range(1, math.isqrt(d_max) + 1):
        terms.append(LiftTerm(a * a, "I_shape", -2 * 1j ** k * a ** k, (k,)))
    terms, meta = _collect(terms, errs)
    return LiftExpansion(k, terms, "E2klift", d_max, meta=meta)


def lift_nearly_hol(f, d_max=DEFAULT_DMAX, T=tr.DEFAULT_T, nodes=tr.DEFAULT_NODES, precision="auto",
                    allow_c0k=False):
    """Lift of a nearly holomorphic form of weight 2k, k even, with c(0,k) = 0.

    With allow_c0k the hypothesis is not enforced and the families it would
    add are simply left out.
    """
    if f.weight % 4:
        raise PreconditionError("weight must be 2k with k even")
    k = f.weight // 2
    if k < 0:
        raise PreconditionError("k must be nonnegative")
    p = f.depth
    if f.coeff(0, k) and not allow_c0k:
        raise PreconditionError(
            f"c(0,{k}) = {f.coeff(0, k)} is nonzero; the expansion needs c(0,k) = 0 (use the E_2^* power lift)")
    if _is_zero(f):
        return LiftExpansion(k, (), "liftnoc0k", d_max)
    terms, errs = [], []
    lowered = [f]
    for _ in range(p):
        lowered.append(mf.lower(lowered[-1]))
    for d in _discriminants(0, d_max):
        for b in range(p // 2 + 1):
            g = lowered[2 * b]
            if _is_zero(g):
                continue
            t = full_trace(g, d, T, nodes, precision)
            errs.append(t.err)
            c = t.value / math.factorial(b)
            terms.append(LiftTerm(d, "holo", c) if b == 0 else LiftTerm(d, "ypow", c, (b,)))
    for l in range(k, p + 1):
        g = lowered[l]
        for _ in range(l - k):
            g = mf.raise_op(g)
        if _is_zero(g):
            continue
        for d in reversed(_discriminants(-d_max, -1)):
            t = full_trace(g, d, T, nodes, precision)
            errs.append(t.err)
            c = SQRT2PI * t.value / (2 ** (l - k) * math.factorial(l - k)) * abs(d) ** ((k - 1) / 2)
            terms.append(LiftTerm(d, "h_shape", c, (l,)))
    for l in range(max(k - 1, 0), p + 1):
        c0l = f.coeff(0, l)
        if l % 2 == 0 or not c0l:
            continue
        h = (l - 1) // 2
        num = math.factorial(h) * (-2) ** h * float(ep.bernoulli(l + 1 - k)[1]) * (-1) ** (k // 2) * complex(c0l)
        den = (2 * math.pi) ** (k - l - 0.5) * math.factorial(l + 1 - k)
        terms.append(LiftTerm(0, "const", num / den, (l,)))
    for r in range(1, math.isqrt(d_max) + 1):
        for l in range(k, p + 1):
            c = 0j
            for n, cnl in f.layer(l).items():
                if n < 0 and n % r == 0 and cnl:
                    c += ((2 * math.pi * n) ** (l - k) / (-1) ** (k // 2) * math.factorial(l) * complex(cnl)
                          / math.factorial(l - k) * r ** k)
            if c:
                terms.append(LiftTerm(r * r, "J_shape", -math.sqrt(8 * math.pi) * c, (l,)))
    if k == 0:
        vol = regularized_integral(f)
        terms.append(LiftTerm(0, "const", 2 * vol / math.sqrt(8 * math.pi), (-1,)))
    terms, meta = _collect(terms, errs)
    return LiftExpansion(k, terms, "liftnoc0k", d_max, meta=meta)


def twisted_cm_sum(delta, D, f=None, tol=1e-10):
    """sum over positive definite classes of disc Delta*D of chi_Delta / |PSL stabilizer| f(z)."""
    f = mf.named_form("J") if f is None else f
    total = 0j
    for form in qf.class_reps(delta * D):
        if form.a <= 0:
            continue
        chi = qf.genus_char(delta, form)
        if chi:
            p = qf.cm_point(form)
            total += chi * 2 / p.stabilizer_order * mf.evaluate(f, p.z, tol=tol)
    return total


def lift_jE2(delta, d_max=DEFAULT_DMAX, T=tr.DEFAULT_T, nodes=tr.DEFAULT_NODES, precision="auto",
             q_order=mf.DEFAULT_ORDER):
    """Weight 3/2 lift of J E_2^* twisted by the genus character of Delta."""
    if delta >= 0 or not qf.is_fundamental(delta):
        raise PreconditionError("Delta must be a negative fundamental discriminant")
    fje = mf.named_form("JE2star", q_order)
    terms = [LiftTerm(0, "holo", 48 * abs(delta) * float(qf.hurwitz(-delta)))]
    errs = []
    for D in reversed(_discriminants(-d_max, -1)):
        key = ("twisted", _form_key(fje), delta, D, T, nodes, precision)
        if key not in _TRACE_CACHE:
            _TRACE_CACHE[key] = tr.twisted_trace(fje, delta, D, T=T, nodes=nodes, precision=precision)
        t = _TRACE_CACHE[key]
        errs.append(t.err)
        terms.append(LiftTerm(-D, "holo", t.value))
    for D in _discriminants(1, d_max):
        s = twisted_cm_sum(delta, D)
        if s:
            terms.append(LiftTerm(-D, "h_shape", -12 / SQRT2PI * s, (1,)))
    terms.append(LiftTerm(-delta, "J_shape", 12 / SQRT2PI * math.sqrt(-delta), (1,)))
    terms, meta = _collect(terms, errs)
    return LiftExpansion(1, terms, "cycjE2", d_max, delta=delta, meta=meta)


# evaluation ---------------------------------------------------------------------

def _raw_sum(L, tau):
    groups = {}
    for t in L.terms:
        v = t.evaluate(tau)
        groups[abs(t.d)] = groups.get(abs(t.d), 0j) + v
    return groups


def tail_estimate(groups):
    """Geometric extrapolation past the largest |d| from a log-linear fit over the upper half."""
    idx = sorted(i for i, v in groups.items() if i > 0 and abs(v) > 0)
    if len(idx) < 2:
        return 0.0
    window = idx[len(idx) // 2:] if len(idx) >= 4 else idx
    logs = [math.log(abs(groups[i])) for i in window]
    slope, icpt = np.polyfit(window, logs, 1)
    if slope >= 0:
        return math.inf
    rho = math.exp(slope)
    top = max(abs(groups[window[-1]]), math.exp(icpt + slope * window[-1]))
    return top * rho / (1 - rho)


def evaluate_lift(L, tau, tol=1e-8):
    tau = complex(tau)
    if tau.imag <= 0:
        raise LiftError("tau must lie in the upper half plane")
    groups = _raw_sum(L, tau)
    tail = tail_estimate(groups)
    if tail > tol:
        raise CertificationError(f"tail estimate {tail:.3g} exceeds tol {tol:.3g}; increase d_max")
    return sum(groups.values(), 0j)


def evaluate_unchecked(L, tau):
    return sum(_raw_sum(L, complex(tau)).values(), 0j)


# lowering and xi ----------------------------------------------------------------

def _lower_term(t):
    """L = -2 i y^2 d/dtaubar acts on F(y) q^d as y^2 F'(y) q^d."""
    d, c, p = t.d, t.coeff, t.params
    if t.kind == "holo":
        return []
    if t.kind == "ypow":
        b = p[0]
        nb = b - 1
        return [LiftTerm(d, "holo", -b * c / (16 * math.pi))] if nb == 0 else \
            [LiftTerm(d, "ypow", -b * c / (16 * math.pi), (nb,))]
    if t.kind == "const":
        return [LiftTerm(d, "const", -p[0] * c / (16 * math.pi), (p[0] - 2,))]
    if t.kind == "log_shape":
        pw, C = p
        if pw == 0:
            return [LiftTerm(d, "ypow", c / (32 * math.pi), (-1,))]
        return [LiftTerm(d, "log_shape", -pw * c / (16 * math.pi), (pw - 1, C - 1 / (2 * pw)))]
    scale = c / (16 * math.pi * abs(d))
    l = int(p[0])
    if t.kind == "h_shape":
        return [LiftTerm(d, "h_shape", -scale, (l - 2,))]
    if t.kind == "J_shape":
        return [LiftTerm(d, "J_shape", scale, (l - 2,))]
    # I_shape: x^3 d/dx (I_l/x^l) = I_{l-2}/x^(l-2), but Om~ leaves a constant behind
    if l < 2:
        raise LiftError("I_shape lowering needs l >= 2")
    out = [LiftTerm(d, "I_shape", scale, (l - 2,))]
    # residual sum_j r_j x^(-2j), with x^(-2j) = (2|d|)^j (16 pi y)^(-j)
    for j, r in omega_residual(l).items():
        c = -scale * float(r) * (2 * abs(d)) ** j
        out.append(LiftTerm(d, "holo", c) if j == 0 else LiftTerm(d, "ypow", c, (j,)))
    return out


def omega_residual(l):
    """x^3 d/dx (Om~_l / x^l) - Om~_{l-2} / x^(l-2) as {j: r_j} with terms r_j x^(-2j)."""
    om, om2 = ep.omega_tilde(l), ep.omega_tilde(l - 2)
    # x^3 d/dx (Om/x^l) = (x Om' - l Om) / x^(l-2)
    diff = om.deriv() * ep.X - om * l - om2
    out = {}
    for i in range(diff.degree + 1):
        if diff[i]:
            if (l - 2 - i) % 2 or i > l - 2:
                raise LiftError("Om~ residual is not a polynomial in 1/x^2")
            out[(l - 2 - i) // 2] = diff[i]
    return out


def lower_expansion(L):
    terms = []
    for t in L.terms:
        terms.extend(_lower_term(t))
    return LiftExpansion(L.k - 2, tuple(terms), L.theorem + ":lowered", L.d_max, L.delta)


def _fd_lower(L, tau, h=1e-3):
    def g(z):
        return evaluate_unchecked(L, z)

    def d1(step):
        return (-g(tau + 2 * step) + 8 * g(tau + step) - 8 * g(tau - step) + g(tau - 2 * step)) / (12 * h)

    gx, gy = d1(h), d1(1j * h)
    y = tau.imag
    return y * y * (gy - 1j * gx)


def lower_check(L, points=SAMPLE_POINTS, h=1e-3):
    """Compare the termwise lowering with a finite-difference -2 i y^2 d/dtaubar."""
    lowered = lower_expansion(L)
    rows = []
    for tau in points:
        sym = evaluate_unchecked(lowered, tau)
        fd = _fd_lower(L, complex(tau), h)
        rows.append({"tau": complex(tau), "symbolic": sym, "finite_difference": fd, "dev": abs(sym - fd)})
    return {"max_dev": max(r["dev"] for r in rows), "points": rows}


def xi_shadow(L):
    """Termwise xi_{3/2} of a weight 3/2 expansion, as {exponent: coefficient}."""
    if L.k != 1:
        raise LiftError("xi_shadow handles weight 3/2 expansions")
    out = {}
    for t in L.terms:
        if t.kind == "holo":
            continue
        if t.params != (1.0,) or t.kind not in ("h_shape", "J_shape"):
            raise LiftError(f"no q-series image for {t.kind}{t.params}")
        n = abs(t.d)
        sign = -1 if t.kind == "h_shape" else 1
        out[-t.d] = out.get(-t.d, 0) + sign * t.coeff.conjugate() / (4 * math.sqrt(2 * math.pi * n))
    return dict(sorted(out.items()))


# fundamental domain integrals ----------------------------------------------------

def _eval_array(f, z):
    """Vectorized series evaluation for points already in the fundamental domain."""
    q = np.exp(2j * np.pi * z)
    y = z.imag
    out = np.zeros_like(z, dtype=complex)
    for l, fl in enumerate(f.layers):
        acc = np.zeros_like(out)
        for n, c in fl.items():
            if c:
                acc += complex(c) * q ** n
        out += acc / y ** l
    return out


def _domain_nodes(y_top, nx, ny, width):
    """Tensor Gauss-Legendre nodes on {|x| <= 1/2, |z| >= 1, y <= y_top} with weights dx dy."""
    gx, wx = np.polynomial.legendre.leggauss(nx)
    gy, wy = np.polynomial.legendre.leggauss(ny)
    xs = 0.5 * gx
    wxs = 0.5 * wx
    zs, ws = [], []
    for x, w in zip(xs, wxs):
        y0 = math.sqrt(1 - x * x)
        n_pan = max(1, math.ceil((y_top - y0) / width))
        edges = np.linspace(y0, y_top, n_pan + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            ys = 0.5 * (b - a) * gy + 0.5 * (a + b)
            zs.append(x + 1j * ys)
            ws.append(w * 0.5 * (b - a) * wy)
    return np.concatenate(zs), np.concatenate(ws)


def regularized_integral(f, nx=48, ny=24):
    """lim_T int_{F_T} f dmu for weight 0: the part below y = 1 by quadrature, the rest from c(0, l)."""
    if f.weight != 0:
        raise LiftError("regularized integral is for weight 0")
    z, w = _domain_nodes(1.0, nx, ny, 0.5)
    lower = np.sum(w * _eval_array(f, z) / z.imag ** 2)
    upper = sum(complex(f.coeff(0, l)) / (l + 1) for l in range(len(f.layers)))
    return complex(lower + upper)


@dataclass(frozen=True)
class OracleResult:
    value: complex
    err: float
    lattice_points: int


def _lattice_pairs(m, s_max, y_min, y_max):
    """(A, b) with b even, b^2 - 4AC = 4m for integral C, and |s| <= s_max possible on y_min <= y <= y_max."""
    pairs = []
    a_max = int((s_max * y_min + math.sqrt(s_max ** 2 * y_min ** 2 + 4 * m)) / (2 * y_min ** 2)) + 1
    for a in range(-a_max, a_max + 1):
        if a == 0:
            continue
        reach = math.sqrt(m + s_max * abs(a) * y_max)
        b_lim = int(2 * (abs(a) / 2 + reach)) + 2
        for b in range(-b_lim - (b_lim % 2), b_lim + 1, 2):
            if (b * b - 4 * m) % (4 * a) == 0:
                pairs.append((a, b))
    return pairs


def _oracle_once(f, m, v, T, nx, ny, s_max):
    z, w = _domain_nodes(T, nx, ny, 0.25)
    x, y = z.real, z.imag
    theta = np.zeros_like(x)
    pairs = _lattice_pairs(m, s_max, math.sqrt(3) / 2, T)
    for a, b in pairs:
        s = ((a * x + b / 2) ** 2 + a * a * y * y - m) / (a * y)
        theta += np.exp(-math.pi * v * s * s)
    vals = math.sqrt(v) * _eval_array(f, z) * theta / y ** 2
    return complex(np.sum(w * vals)), len(pairs), vals


def theta_oracle(f, m, v=1.0, T=6.0, nx=64, ny=24, eps=1e-14):
    """sqrt(v) int_{F_T} f(z) sum_{Q(lambda) = m} exp(-pi v (lambda, Z^perp(z))^2) dmu, directly.

    lambda runs over forms [A, b, C] with b even and b^2 - 4AC = 4m, and
    (lambda, Z^perp(z)) = (A|z|^2 + b x + C) / y. For weight 0 and nonsquare m
    this equals the trace of f over discriminant 4m.
    """
    if f.weight != 0:
        raise LiftError("theta oracle is for weight 0")
    if m <= 0 or qf.is_square(m):
        raise LiftError("m must be positive and not a square")
    pole = max((-n for fl in f.layers for n, c in fl.items() if c and n < 0), default=0)
    s_max = math.sqrt((math.log(1 / eps) + 2 * math.pi * pole * T) / (math.pi * v))
    hi, npts, _ = _oracle_once(f, m, v, T, nx, ny, s_max)
    lo, _, _ = _oracle_once(f, m, v, T, nx // 2, ny // 2, s_max)
    # integrand along y = T bounds what the cutoff discards
    zt = np.linspace(-0.5, 0.5, 41) + 1j * T
    th = np.zeros(zt.shape)
    for a, b in _lattice_pairs(m, s_max, T, T):
        s = ((a * zt.real + b / 2) ** 2 + a * a * T * T - m) / (a * T)
        th += np.exp(-math.pi * v * s * s)
    edge = float(np.max(np.abs(_eval_array(f, zt) * th))) * math.sqrt(v) / T
    if edge > 1e-8:
        raise CertificationError(f"integrand {edge:.3g} at y = T is not negligible; raise T")
    return OracleResult(hi, abs(hi - lo) + edge, npts)
