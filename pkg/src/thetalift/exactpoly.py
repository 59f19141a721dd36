"""Exact rational polynomial families.

Univariate polynomials are tuples of Fractions indexed by degree, bivariate
ones are dense rational matrices indexed by (deg in first var, deg in second).
"""
from fractions import Fraction
from math import comb, factorial
import threading

_lock = threading.Lock()


def _frac(c):
    return c if isinstance(c, Fraction) else Fraction(c)


class ExactPoly:
    """Polynomial with Fraction coefficients, coeffs[i] multiplies x^i."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [_frac(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("ExactPoly is immutable")

    @classmethod
    def monomial(cls, n, c=1):
        return cls([0] * n + [c])

    @property
    def degree(self):
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self):
        return not self.coeffs

    def __getitem__(self, i):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ExactPoly([other])
        return isinstance(other, ExactPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        if not isinstance(other, ExactPoly):
            other = ExactPoly([other])
        n = max(len(self.coeffs), len(other.coeffs))
        return ExactPoly([self[i] + other[i] for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return ExactPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other if isinstance(other, ExactPoly) else -_frac(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, ExactPoly):
            c = _frac(other)
            return ExactPoly([c * a for a in self.coeffs])
        if self.is_zero() or other.is_zero():
            return ExactPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return ExactPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, c):
        c = _frac(c)
        return ExactPoly([a / c for a in self.coeffs])

    def __pow__(self, n):
        out = ExactPoly([1])
        for _ in range(n):
            out = out * self
        return out

    def deriv(self):
        return ExactPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def __call__(self, x):
        """Horner evaluation; exact for Fraction/int input."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + (c if isinstance(x, (int, Fraction)) else float(c))
        return acc

    def compose(self, other):
        out = ExactPoly()
        for c in reversed(self.coeffs):
            out = out * other + c
        return out

    def rotate(self, s):
        """Return i^s p(i x); raises if the result is not real."""
        out = []
        for m, c in enumerate(self.coeffs):
            e = (s + m) % 4
            if c and e % 2:
                raise ValueError("rotation is not real")
            out.append(c if e == 0 else -c)
        return ExactPoly(out)

    def parity(self):
        """+1 even, -1 odd, 0 mixed; zero polynomial counts as both (+1)."""
        odd = any(c for i, c in enumerate(self.coeffs) if i % 2)
        even = any(c for i, c in enumerate(self.coeffs) if i % 2 == 0)
        if odd and even:
            return 0
        return -1 if odd else 1

    def to_str(self, var="x"):
        if not self.coeffs:
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if i == 0:
                body = str(a)
            else:
                mon = var if i == 1 else f"{var}^{i}"
                body = mon if a == 1 else f"{a}*{mon}"
            parts.append((sign, body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self):
        return f"ExactPoly({self.to_str()})"


class ExactBiPoly:
    """Polynomial in two variables; coeffs[i][j] multiplies x^i z^j."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        rows = [[_frac(c) for c in row] for row in coeffs]
        width = max((len(r) for r in rows), default=0)
        rows = [r + [Fraction(0)] * (width - len(r)) for r in rows]
        while rows and not any(rows[-1]):
            rows.pop()
        while rows and width and not any(r[width - 1] for r in rows):
            width -= 1
            rows = [r[:width] for r in rows]
        if width == 0:
            rows = []
        object.__setattr__(self, "coeffs", tuple(tuple(r) for r in rows))

    def __setattr__(self, name, value):
        raise AttributeError("ExactBiPoly is immutable")

    @classmethod
    def from_dict(cls, d):
        if not d:
            return cls()
        nx = max(i for i, _ in d) + 1
        nz = max(j for _, j in d) + 1
        rows = [[0] * nz for _ in range(nx)]
        for (i, j), c in d.items():
            rows[i][j] += c
        return cls(rows)

    def to_dict(self):
        return {(i, j): c for i, row in enumerate(self.coeffs)
                for j, c in enumerate(row) if c}

    def is_zero(self):
        return not self.coeffs

    def __eq__(self, other):
        return isinstance(other, ExactBiPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        d = self.to_dict()
        for k, c in other.to_dict().items():
            d[k] = d.get(k, 0) + c
        return ExactBiPoly.from_dict(d)

    def __neg__(self):
        return ExactBiPoly.from_dict({k: -c for k, c in self.to_dict().items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, ExactBiPoly):
            c = _frac(other)
            return ExactBiPoly.from_dict({k: c * v for k, v in self.to_dict().items()})
        d = {}
        for (i, j), a in self.to_dict().items():
            for (k, l), b in other.to_dict().items():
                d[(i + k, j + l)] = d.get((i + k, j + l), 0) + a * b
        return ExactBiPoly.from_dict(d)

    __rmul__ = __mul__

    def d_x(self):
        return ExactBiPoly.from_dict({(i - 1, j): i * c for (i, j), c in self.to_dict().items() if i})

    def d_z(self):
        return ExactBiPoly.from_dict({(i, j - 1): j * c for (i, j), c in self.to_dict().items() if j})

    def __call__(self, x, z):
        exact = isinstance(x, (int, Fraction)) and isinstance(z, (int, Fraction))
        acc = 0
        for (i, j), c in self.to_dict().items():
            acc += (c if exact else float(c)) * x ** i * z ** j
        return acc

    def substitute(self, px, pz):
        """Compose with bivariate polynomials: returns self(px(x,z), pz(x,z))."""
        out = ExactBiPoly()
        for (i, j), c in self.to_dict().items():
            term = ExactBiPoly([[c]])
            for _ in range(i):
                term = term * px
            for _ in range(j):
                term = term * pz
            out = out + term
        return out

    def restrict_diag(self, a, b):
        """Univariate poly t -> self(a t, b t) for integers a, b."""
        out = {}
        for (i, j), c in self.to_dict().items():
            out[i + j] = out.get(i + j, 0) + c * Fraction(a) ** i * Fraction(b) ** j
        n = max(out, default=-1) + 1
        return ExactPoly([out.get(i, 0) for i in range(n)])

    def divide_x(self):
        """Exact division by the first variable; raises if not divisible."""
        d = self.to_dict()
        if any(i == 0 for i, _ in d):
            raise ArithmeticError("polynomial not divisible by the first variable")
        return ExactBiPoly.from_dict({(i - 1, j): c for (i, j), c in d.items()})

    def coeff_in_z(self, j):
        """Univariate coefficient polynomial of z^j (as poly in x)."""
        return ExactPoly([row[j] if j < len(row) else 0 for row in self.coeffs])

    def to_str(self, xv="x", zv="z"):
        d = self.to_dict()
        if not d:
            return "0"
        parts = []
        for (i, j) in sorted(d, key=lambda k: (-(k[0] + k[1]), -k[0])):
            c = d[(i, j)]
            mons = []
            if i:
                mons.append(xv if i == 1 else f"{xv}^{i}")
            if j:
                mons.append(zv if j == 1 else f"{zv}^{j}")
            mon = "*".join(mons)
            a = abs(c)
            body = str(a) if not mon else (mon if a == 1 else f"{a}*{mon}")
            parts.append(("-" if c < 0 else "+", body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self):
        return f"ExactBiPoly({self.to_str()})"


X = ExactPoly([0, 1])
ONE = ExactPoly([1])
ZERO = ExactPoly()


def harmonic(n):
    return sum((Fraction(1, a) for a in range(1, n + 1)), Fraction(0))


_cache = {}


def _memo(key, build):
    v = _cache.get(key)
    if v is None:
        v = build()
        with _lock:
            _cache.setdefault(key, v)
            v = _cache[key]
    return v


def hermite(n):
    if n < 0:
        raise ValueError("hermite index must be nonnegative")

    def build():
        cs = [Fraction(0)] * (n + 1)
        for b in range(n // 2 + 1):
            cs[n - 2 * b] = Fraction((-1) ** b * factorial(n), factorial(b) * factorial(n - 2 * b) * 2 ** b)
        return ExactPoly(cs)
    return _memo(("He", n), build)


def p_poly(nu):
    if nu < 0:
        return ZERO

    def build():
        cs = [Fraction(0)] * (nu + 1)
        for a in range(nu // 2 + 1):
            cs[nu - 2 * a] = Fraction(1, factorial(a) * factorial(nu - 2 * a) * 2 ** a)
        return ExactPoly(cs)
    return _memo(("P", nu), build)


def q_poly(nu):
    if nu == 0:
        return ZERO
    if nu < 0:
        return hermite(-1 - nu) * (-1) ** (1 - nu)

    def build():
        out = ZERO
        for a in range((nu - 1) // 2 + 1):
            out = out + p_poly(nu - 1 - 2 * a) * Fraction(factorial(nu - 1 - a), factorial(nu))
        return out
    return _memo(("Q", nu), build)


def pi_poly(l):
    """Pi_l(x, z) = sum_nu (-1)^nu/(l-nu)! (x+z)^(l-nu) Q_nu(x)."""
    if l < 0:
        raise ValueError("index must be nonnegative")

    def build():
        s = ExactBiPoly([[0, 1], [1]])  # x + z
        out = ExactBiPoly()
        for nu in range(l + 1):
            q = q_poly(nu)
            if q.is_zero():
                continue
            qb = ExactBiPoly([[c] for c in q.coeffs])
            pw = ExactBiPoly([[1]])
            for _ in range(l - nu):
                pw = pw * s
            out = out + pw * qb * Fraction((-1) ** nu, factorial(l - nu))
        return out
    return _memo(("Pi", l), build)


def pi_tilde(l):
    """Pi~_l(w, z) := Pi_l(w - z, z) + Q_l(z), divided by w.

    Returns the quotient polynomial R with Pi~_l = w * R, so callers can use
    the regular ratio Pi~_l(w, z)/w directly.
    """
    def build():
        sub = pi_poly(l).substitute(ExactBiPoly([[0, -1], [1]]), ExactBiPoly([[0, 1]]))
        ql = ExactBiPoly([[c for c in q_poly(l).coeffs]]) if l else ExactBiPoly()
        full = sub + ql
        return full.divide_x()
    return _memo(("PiT", l), build)


def pi_tilde_full(l):
    """The polynomial Pi~_l(w, z) itself (quotient times w)."""
    return pi_tilde(l) * ExactBiPoly([[0], [1]])


def omega_poly(l):
    if l < 0:
        raise ValueError("index must be nonnegative")

    def build():
        cs = [Fraction(0)] * (l + 1)
        hl = harmonic(l)
        for nu in range(1, l + 1):
            p0 = p_poly(nu)[0]
            if p0:
                cs[l - nu] += p0 * (hl - harmonic(l - nu)) / factorial(l - nu)
        return ExactPoly(cs) * (-1) ** l
    return _memo(("Om", l), build)


def omega_tilde(k):
    # (-i)^k Om(i eta) = i^{-k} Om(i eta) = i^{3k} Om(i eta)
    return omega_poly(k).rotate(3 * k)


def e_poly(l):
    if l < 0:
        raise ValueError("index must be nonnegative")

    def build():
        es = [ZERO, ZERO]
        for m in range(1, l):
            es.append((X * es[m] + es[m - 1] - p_poly(m - 1) / m) / (m + 1))
        return es[l]
    return _memo(("E", l), build)


def bernoulli_numbers(n):
    """B_0..B_n with B_1 = -1/2."""
    def build():
        b = [Fraction(1)]
        for m in range(1, n + 1):
            b.append(-sum(comb(m + 1, j) * b[j] for j in range(m)) / (m + 1))
        return tuple(b)
    return _memo(("Bn", n), build)


def bernoulli(mu):
    if mu < 0:
        raise ValueError("index must be nonnegative")
    b = bernoulli_numbers(mu)
    poly = ExactPoly([comb(mu, mu - i) * b[mu - i] for i in range(mu + 1)])
    return poly, b[mu]


def pq_modified(nu):
    """(P~_nu, Q~_nu) with P~(eta) = i^nu P(i eta), Q~(eta) = i^(nu-1) Q(i eta)."""
    return p_poly(nu).rotate(nu), q_poly(nu).rotate(nu - 1)


FAMILIES = {
    "P": p_poly,
    "Q": q_poly,
    "He": hermite,
    "Pi": pi_poly,
    "Omega": omega_poly,
    "E": e_poly,
}
