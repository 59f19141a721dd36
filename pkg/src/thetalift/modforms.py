"""q-expansions of level-one forms, nearly holomorphic layers, and the operators L, R, Delta.

A nearly holomorphic form of weight 2k is stored as layers f_0, ..., f_p with
f(z) = sum_l f_l(q) y^(-l).  Coefficients are Fractions in exact mode and floats otherwise.
"""
import cmath
import json
import math
from dataclasses import dataclass
from fractions import Fraction

DEFAULT_ORDER = 64


class TruncationError(ValueError):
    """A requested coefficient or evaluation lies beyond the stored truncation."""


def _is_exact(c):
    return isinstance(c, (int, Fraction))


@dataclass(frozen=True)
class QSeries:
    """sum_{valuation <= n < order} coeffs[n - valuation] q^n."""

    valuation: int
    coeffs: tuple
    order: int

    def __post_init__(self):
        if self.valuation + len(self.coeffs) != self.order:
            raise ValueError("coefficient count does not match truncation")

    @classmethod
    def from_dict(cls, d, order):
        if not d:
            return cls(order, (), order)
        v = min(d)
        return cls(v, tuple(d.get(n, 0) for n in range(v, order)), order)

    @classmethod
    def zero(cls, order):
        return cls(order, (), order)

    @property
    def exact(self):
        return all(_is_exact(c) for c in self.coeffs)

    def __getitem__(self, n):
        if n >= self.order:
            raise TruncationError(f"coefficient q^{n} beyond truncation order {self.order}")
        if n < self.valuation:
            return 0
        return self.coeffs[n - self.valuation]

    def items(self):
        for i, c in enumerate(self.coeffs):
            if c:
                yield self.valuation + i, c

    def to_dict(self):
        return dict(self.items())

    def is_zero(self):
        return not any(self.coeffs)

    def principal_part(self):
        return {n: c for n, c in self.items() if n < 0}

    def __add__(self, other):
        order = min(self.order, other.order)
        v = min(self.valuation, other.valuation, order)
        return QSeries(v, tuple(self[n] + other[n] for n in range(v, order)), order)

    def __neg__(self):
        return QSeries(self.valuation, tuple(-c for c in self.coeffs), self.order)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        return QSeries(self.valuation, tuple(s * c for c in self.coeffs), self.order)

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return self.scale(other)
        if self.is_zero() or other.is_zero():
            return QSeries.zero(min(self.order, other.order))
        v = self.valuation + other.valuation
        order = min(self.order + other.valuation, other.order + self.valuation)
        out = [0] * max(order - v, 0)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                k = i + j
                if k >= len(out):
                    break
                out[k] += a * b
        return QSeries(v, tuple(out), max(order, v))

    __rmul__ = scale

    def truncate(self, order):
        if order > self.order:
            raise TruncationError("cannot extend truncation")
        v = min(self.valuation, order)
        return QSeries(v, tuple(self[n] for n in range(v, order)), order)

    def inverse(self):
        """1/f for f with nonzero leading coefficient."""
        nz = [(n, c) for n, c in self.items()]
        if not nz:
            raise ZeroDivisionError("inverse of zero series")
        v0, c0 = nz[0]
        length = self.order - v0
        a = [self[v0 + i] for i in range(length)]
        inv0 = Fraction(1) / c0 if _is_exact(c0) else 1.0 / c0
        b = [inv0]
        for n in range(1, length):
            s = sum(a[i] * b[n - i] for i in range(1, n + 1))
            b.append(-s * inv0)
        return QSeries(-v0, tuple(b), -v0 + length)

    def theta(self):
        """q d/dq."""
        return QSeries(self.valuation, tuple(n * c for n, c in zip(range(self.valuation, self.order), self.coeffs)),
                       self.order)

    def to_float(self):
        return QSeries(self.valuation, tuple(float(c) for c in self.coeffs), self.order)

    def evaluate(self, q):
        total = 0j
        for n, c in self.items():
            total += complex(c) * q ** n
        return total

    def tail_bound(self, absq):
        """Geometric estimate of the omitted tail sum_{n >= order} |c_n| |q|^n."""
        tail_terms = [(n, abs(complex(c))) for n, c in self.items() if n >= self.order - 4]
        if not tail_terms:
            return 0.0
        mags = [(n, a) for n, a in tail_terms if a]
        if len(mags) < 2:
            n, a = mags[-1] if mags else (self.order - 1, 0.0)
            return a * absq ** (n + 1) / (1 - absq)
        ratios = [mags[i + 1][1] / mags[i][1] for i in range(len(mags) - 1)]
        r = max(ratios) * absq
        n, a = mags[-1]
        if r >= 1:
            return math.inf
        return a * absq ** n * r / (1 - r)


def sigma(n, k):
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


def eisenstein(k, order=DEFAULT_ORDER):
    if k == 2:
        c = -24
    elif k == 4:
        c = 240
    elif k == 6:
        c = -504
    else:
        raise ValueError("eisenstein implemented for k in {2, 4, 6}")
    d = {0: 1}
    for n in range(1, order):
        d[n] = c * sigma(n, k - 1)
    return QSeries.from_dict(d, order)


def delta_cusp(order=DEFAULT_ORDER):
    e4, e6 = eisenstein(4, order), eisenstein(6, order)
    return (e4 * e4 * e4 - e6 * e6).scale(Fraction(1, 1728))


def j_fun(order=DEFAULT_ORDER):
    e4 = eisenstein(4, order + 2)
    dl = delta_cusp(order + 2)
    return (e4 * e4 * e4 * dl.inverse()).truncate(order)


def j_normalized(order=DEFAULT_ORDER):
    j = j_fun(order)
    return j - QSeries.from_dict({0: 744}, order)


def theta_jacobi(order=DEFAULT_ORDER):
    d = {0: 1}
    n = 1
    while n * n < order:
        d[n * n] = 2
        n += 1
    return QSeries.from_dict(d, order)


@dataclass(frozen=True)
class NearlyHolForm:
    weight: int
    layers: tuple  # QSeries f_0, ..., f_p

    def __post_init__(self):
        if self.weight % 2:
            raise ValueError("weight must be even")

    @property
    def depth(self):
        p = len(self.layers) - 1
        while p > 0 and self.layers[p].is_zero():
            p -= 1
        return p

    @property
    def order(self):
        return min(layer.order for layer in self.layers)

    @property
    def exact(self):
        return all(layer.exact for layer in self.layers)

    @property
    def coefficient_mode(self):
        return "exact" if self.exact else "floating"

    def layer(self, l):
        if l < len(self.layers):
            return self.layers[l]
        return QSeries.zero(self.order)

    def coeff(self, n, l):
        """c(n, l): coefficient of q^n y^(-l)."""
        return self.layer(l)[n]

    def trimmed(self):
        return NearlyHolForm(self.weight, self.layers[: self.depth + 1])

    def scale(self, s):
        return NearlyHolForm(self.weight, tuple(f.scale(s) for f in self.layers))

    def __add__(self, other):
        if self.weight != other.weight:
            raise ValueError("weights differ")
        p = max(len(self.layers), len(other.layers))
        order = min(self.order, other.order)
        return NearlyHolForm(self.weight, tuple(
            self.layer(l).truncate(order) + other.layer(l).truncate(order) for l in range(p))).trimmed()

    def __sub__(self, other):
        return self + other.scale(-1)

    def principal_indices(self):
        """(n, l) with n <= 0 and c(n, l) != 0."""
        out = []
        for l, f in enumerate(self.layers):
            for n, c in f.items():
                if n <= 0 and c:
                    out.append((n, l))
        return out

    def evaluate_series(self, z):
        """Direct evaluation of the layers at z (no reduction)."""
        q = cmath.exp(2j * math.pi * z)
        y = z.imag
        return sum(f.evaluate(q) * y ** (-l) for l, f in enumerate(self.layers))

    def to_json(self):
        def enc(c):
            if isinstance(c, Fraction):
                return f"{c.numerator}/{c.denominator}" if c.denominator != 1 else str(c.numerator)
            if isinstance(c, int):
                return str(c)
            return float(c)

        doc = {
            "weight": self.weight,
            "mode": self.coefficient_mode,
            "truncation": self.order,
            "depth": self.depth,
            "layers": [{str(n): enc(c) for n, c in f.items()} for f in self.layers],
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        order = int(doc["truncation"])

        def dec(c):
            if isinstance(c, str):
                return Fraction(c)
            return float(c)

        layers = tuple(QSeries.from_dict({int(n): dec(c) for n, c in layer.items()}, order)
                       for layer in doc["layers"])
        if not layers:
            layers = (QSeries.zero(order),)
        return cls(int(doc["weight"]), layers)


def holomorphic(f, weight):
    return NearlyHolForm(weight, (f,))


def multiply(f, g):
    p = len(f.layers) + len(g.layers) - 1
    order = min(f.order + min(x.valuation for x in g.layers), g.order + min(x.valuation for x in f.layers))
    layers = []
    for l in range(p):
        acc = None
        for a in range(len(f.layers)):
            b = l - a
            if 0 <= b < len(g.layers):
                term = f.layers[a] * g.layers[b]
                acc = term if acc is None else acc + term
        layers.append(acc)
    order = min(min(x.order for x in layers), order)
    return NearlyHolForm(f.weight + g.weight, tuple(x.truncate(order) for x in layers)).trimmed()


def power(f, k):
    if k < 0:
        raise ValueError("nonnegative powers only")
    out = NearlyHolForm(0, (QSeries.from_dict({0: 1}, f.order),))
    for _ in range(k):
        out = multiply(out, f)
    return out


def e2_star(order=DEFAULT_ORDER):
    """E_2^* = E_2 - 3/(pi y)."""
    f0 = eisenstein(2, order)
    f1 = QSeries.from_dict({0: -3 / math.pi}, order)
    return NearlyHolForm(2, (f0, f1))


def lower(f):
    """L = -2 i y^2 d/dzbar: layer l - 1 receives -l f_l."""
    if f.depth == 0:
        return NearlyHolForm(f.weight - 2, (QSeries.zero(f.order),))
    layers = tuple(f.layers[l].scale(-l) for l in range(1, len(f.layers)))
    return NearlyHolForm(f.weight - 2, layers).trimmed()


def raise_op(f):
    """R_kappa = 2 i d/dz + kappa/y on the layers (2 i d/dz q^n = -4 pi n q^n)."""
    kappa = f.weight
    p = len(f.layers)
    out = [QSeries.zero(f.order) for _ in range(p + 1)]
    for l, fl in enumerate(f.layers):
        out[l] = out[l] + fl.theta().scale(-4 * math.pi)
        out[l + 1] = out[l + 1] + fl.scale(kappa - l)
    return NearlyHolForm(kappa + 2, tuple(out)).trimmed()


def laplacian(f):
    """Delta_kappa = -R_{kappa-2} L."""
    low = lower(f)
    return raise_op(low).scale(-1) if not all(x.is_zero() for x in low.layers) else \
        NearlyHolForm(f.weight, (QSeries.zero(f.order),))


def laplacian_direct(f):
    """Delta(f_l y^-l) = 2 i l f_l' y^(1-l) + l (kappa-l-1) f_l y^-l, from the defining formula."""
    kappa = f.weight
    p = len(f.layers)
    out = [QSeries.zero(f.order) for _ in range(p)]
    for l, fl in enumerate(f.layers):
        if l == 0:
            continue
        out[l - 1] = out[l - 1] + fl.theta().scale(-4 * math.pi * l)
        out[l] = out[l] + fl.scale(l * (kappa - l - 1))
    return NearlyHolForm(kappa, tuple(out)).trimmed()


# evaluation ------------------------------------------------------------------

def reduce_point(z):
    """(w, M) with w = M z in the standard fundamental domain, M in SL2(Z)."""
    if z.imag <= 0:
        raise ValueError("point must lie in the upper half plane")
    m = ((1, 0), (0, 1))
    w = complex(z)
    for _ in range(10000):
        n = math.floor(w.real + 0.5)
        if n:
            w -= n
            m = ((m[0][0] - n * m[1][0], m[0][1] - n * m[1][1]), m[1])
        if abs(w) < 1 - 1e-15:
            w = -1 / w
            m = ((-m[1][0], -m[1][1]), (m[0][0], m[0][1]))
            continue
        return w, m
    raise ArithmeticError("reduction did not terminate")


def evaluate(f, z, tol=1e-10):
    """f(z) = (c z + d)^(-2k) f(M z) with M z reduced."""
    w, m = reduce_point(z)
    c, d = m[1]
    absq = math.exp(-2 * math.pi * w.imag)
    bound = sum(layer.tail_bound(absq) * w.imag ** (-l) for l, layer in enumerate(f.layers))
    if bound > tol:
        raise TruncationError(f"truncation order {f.order} too small for tol {tol} (tail ~ {bound:.3g})")
    return (c * z + d) ** (-f.weight) * f.evaluate_series(w)


# named inputs ------------------------------------------------------------------

def e2k_power(k, order=DEFAULT_ORDER):
    """(pi/3 E_2^*)^k."""
    return power(e2_star(order).scale(math.pi / 3), k)


def named_form(name, order=DEFAULT_ORDER):
    """Parse J, E2star, JE2star, E2k:k, file:path, or 1."""
    if name == "1":
        return NearlyHolForm(0, (QSeries.from_dict({0: 1}, order),))
    if name == "J":
        return holomorphic(j_normalized(order), 0)
    if name == "E2star":
        return e2_star(order)
    if name == "JE2star":
        return multiply(holomorphic(j_normalized(order + 1), 0), e2_star(order + 1))
    if name.startswith("E2k:"):
        return e2k_power(int(name.split(":", 1)[1]), order)
    if name.startswith("file:"):
        with open(name.split(":", 1)[1], encoding="utf-8") as fh:
            return NearlyHolForm.from_json(fh.read())
    raise ValueError(f"unknown form {name!r}")
