"""Binary quadratic forms under SL2(Z): classes, class numbers, characters, CM points, geodesics.

A form [A, B, C] is F(x, y) = A x^2 + B x y + C y^2 and lambda(z) = F(z, 1).  Matrices act
on the right by F o M (x, y) = F(alpha x + beta y, gamma x + delta y), so the root of F o M
in the upper half plane is M^{-1} applied to the root of F.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache


class FormError(ValueError):
    """Input outside the domain of a form operation."""


Matrix = tuple  # ((alpha, beta), (gamma, delta))

IDENTITY = ((1, 0), (0, 1))


def mat_mul(m, n):
    (a, b), (c, d) = m
    (e, f), (g, h) = n
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def mat_inv(m):
    (a, b), (c, d) = m
    return ((d, -b), (-c, a))


def mobius(m, z):
    (a, b), (c, d) = m
    return (a * z + b) / (c * z + d)


@dataclass(frozen=True, order=True)
class QuadForm:
    a: int
    b: int
    c: int

    @property
    def disc(self):
        return self.b * self.b - 4 * self.a * self.c

    @property
    def content(self):
        return math.gcd(math.gcd(self.a, self.b), self.c)

    def __neg__(self):
        return QuadForm(-self.a, -self.b, -self.c)

    def __call__(self, x, y=1):
        return self.a * x * x + self.b * x * y + self.c * y * y

    def act(self, m):
        """F o M."""
        (al, be), (ga, de) = m
        a, b, c = self.a, self.b, self.c
        return QuadForm(
            a * al * al + b * al * ga + c * ga * ga,
            2 * a * al * be + b * (al * de + be * ga) + 2 * c * ga * de,
            a * be * be + b * be * de + c * de * de,
        )

    def primitive(self):
        g = self.content
        return QuadForm(self.a // g, self.b // g, self.c // g)

    def to_list(self):
        return [self.a, self.b, self.c]


def _check_disc(d):
    if d % 4 not in (0, 1) or d == 0:
        raise FormError(f"{d} is not a nonzero discriminant (need d = 0, 1 mod 4)")


def is_square(n):
    return n >= 0 and math.isqrt(n) ** 2 == n


def is_fundamental(d):
    if d == 1 or d % 4 not in (0, 1) or d == 0:
        return False
    if d % 4 == 1:
        return _squarefree(abs(d))
    m = d // 4
    return m % 4 in (2, 3) and _squarefree(abs(m))


def _squarefree(n):
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True


# definite forms --------------------------------------------------------------

def reduce_definite(f):
    """Reduced form equivalent to positive or negative definite f, with M such that f o M is it."""
    if f.disc >= 0:
        raise FormError("reduce_definite needs negative discriminant")
    sign = 1 if f.a > 0 else -1
    g = QuadForm(sign * f.a, sign * f.b, sign * f.c)
    m = IDENTITY
    while True:
        # normalize b into (-a, a]
        s = (g.a - g.b) // (2 * g.a)
        if s:
            t = ((1, s), (0, 1))
            g = g.act(t)
            m = mat_mul(m, t)
        if g.a > g.c or (g.a == g.c and g.b < 0):
            t = ((0, -1), (1, 0))
            g = g.act(t)
            m = mat_mul(m, t)
            continue
        break
    return QuadForm(sign * g.a, sign * g.b, sign * g.c), m


def stabilizer_order(f):
    """|Gamma_f| including -I for definite f (2, 4 or 6)."""
    r, _ = reduce_definite(f)
    r = QuadForm(abs(r.a), abs(r.b), abs(r.c))
    if r.a == r.b == r.c:
        return 6
    if r.b == 0 and r.a == r.c:
        return 4
    return 2


@lru_cache(maxsize=None)
def _reduced_positive(n):
    """Reduced positive-definite forms (all contents) of discriminant -n."""
    out = []
    a = 1
    while 3 * a * a <= n:
        for b in range(-a + 1, a + 1):
            if (b * b + n) % (4 * a):
                continue
            c = (b * b + n) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            out.append(QuadForm(a, b, c))
        a += 1
    return tuple(out)


# indefinite forms ------------------------------------------------------------

def _is_reduced_indef(f):
    r = math.sqrt(f.disc)
    return 0 < f.b < r and r - f.b < 2 * abs(f.a) < r + f.b


def _rho(f):
    """One step (a, b, c) -> (c, b', *) with b' = -b mod 2c, as F o [[0,-1],[1,s]]."""
    d = f.disc
    sd = math.sqrt(d)
    c = f.c
    ac = abs(c)
    if ac > sd:
        # b' = -b mod 2|c| in (-|c|, |c|]
        bp = (-f.b) % (2 * ac)
        if bp > ac:
            bp -= 2 * ac
    else:
        # b' = -b mod 2|c| in (sqrt d - 2|c|, sqrt d)
        isd = math.isqrt(d)
        top = isd if isd * isd < d else isd - 1
        bp = top - ((top + f.b) % (2 * ac))
    s = (bp + f.b) // (2 * c)
    m = ((0, -1), (1, s))
    return f.act(m), m


def reduce_indefinite(f):
    """Reduced indefinite form equivalent to f (nonsquare disc) and M with f o M equal to it."""
    d = f.disc
    if d <= 0 or is_square(d):
        raise FormError("reduce_indefinite needs positive nonsquare discriminant")
    g, m = f, IDENTITY
    for _ in range(10000):
        if _is_reduced_indef(g):
            return g, m
        g, t = _rho(g)
        m = mat_mul(m, t)
    raise ArithmeticError("indefinite reduction did not terminate")


def cycle(f):
    """The rho-cycle of a reduced indefinite form, with cumulative matrices from f."""
    g, m = f, IDENTITY
    out = []
    while True:
        out.append((g, m))
        g, t = _rho(g)
        m = mat_mul(m, t)
        if g == f:
            return out


@lru_cache(maxsize=None)
def _indefinite_classes(d):
    sd = math.sqrt(d)
    reduced = []
    for b in range(1, math.isqrt(d) + 1):
        if b >= sd or (b * b - d) % 4:
            continue
        ac = (b * b - d) // 4  # a c < 0
        for a in range(1, abs(ac) + 1):
            if abs(ac) % a:
                continue
            for sa in (a, -a):
                f = QuadForm(sa, b, ac // sa)
                if _is_reduced_indef(f):
                    reduced.append(f)
    seen = set()
    reps = []
    for f in sorted(reduced):
        if f in seen:
            continue
        cyc = [g for g, _ in cycle(f)]
        seen.update(cyc)
        reps.append(min(cyc, key=_rep_key))
    return tuple(sorted(reps, key=_rep_key))


def _rep_key(f):
    return (f.a <= 0, abs(f.a), f.b, f.c)


# classes ----------------------------------------------------------------------

def class_reps(d):
    """One representative per SL2(Z)-orbit on all forms of discriminant d."""
    _check_disc(d)
    if d < 0:
        pos = list(_reduced_positive(-d))
        return pos + [-f for f in pos]
    if is_square(d):
        # indexed as +-[0, r, j]; each SL2(Z)-orbit occurs twice in this list
        r = math.isqrt(d)
        pos = [QuadForm(0, r, j) for j in range(r)]
        return pos + [-f for f in pos]
    return list(_indefinite_classes(d))


def canonical_rep(f):
    """The class_reps element equivalent to f, with M such that f o M is that element."""
    d = f.disc
    if d < 0:
        return reduce_definite(f)
    if is_square(d):
        return _reduce_split(f)
    g, m = reduce_indefinite(f)
    for h, t in cycle(g):
        if h in _indefinite_classes(d):
            return h, mat_mul(m, t)
    raise ArithmeticError("reduced form not found in class list")


def _rational_roots(f):
    """Primitive (p, q) with F(p, q) = 0 for square discriminant."""
    r = math.isqrt(f.disc)
    if f.a == 0:
        roots = [(1, 0)]
        if f.b or f.c:
            g = math.gcd(f.c, f.b)
            roots.append((-f.c // g, f.b // g))
        return roots
    roots = []
    for sgn in (1, -1):
        num, den = -f.b + sgn * r, 2 * f.a
        g = math.gcd(num, den)
        roots.append((num // g, den // g))
    return roots


def _reduce_split(f):
    """Square discriminant r^2: move f to +-[0, r, j], 0 <= j < r."""
    r = math.isqrt(f.disc)
    best = None
    for p, q in _rational_roots(f):
        _, u, v = _ext_gcd(p, q)
        t = ((p, -v), (q, u))  # det = p u + q v = 1
        g = f.act(t)
        if g.a != 0:
            raise ArithmeticError("split reduction failed")
        if best is None or g.b > best[0].b:
            best = (g, t)
    g, m = best
    if abs(g.b) != r:
        raise ArithmeticError("split reduction failed")
    sgn = 1 if g.b > 0 else -1
    j = (sgn * g.c) % r
    s = (sgn * j - g.c) // g.b
    t = ((1, s), (0, 1))
    g = g.act(t)
    return g, mat_mul(m, t)


def _ext_gcd(a, b):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


# class numbers ---------------------------------------------------------------

def hurwitz(n):
    """Hurwitz class number H(n) as a Fraction; H(0) = -1/12."""
    if n == 0:
        return Fraction(-1, 12)
    if n < 0 or n % 4 in (1, 2):
        return Fraction(0)
    total = Fraction(0)
    for f in _reduced_positive(n):
        total += Fraction(2, stabilizer_order(f))
    return total


def class_number(d):
    """Number of classes (all contents) of discriminant d; for d < 0, positive definite ones."""
    if d < 0:
        return len(_reduced_positive(-d))
    return len(class_reps(d))


# characters ------------------------------------------------------------------

def kronecker(a, n):
    """Kronecker symbol (a/n), with (a/-1) = sign(a)."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a/n) for odd n > 0
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def genus_char(delta, f):
    """chi_Delta(f): (Delta/n) for n represented by f with gcd(n, Delta) = 1, else 0."""
    if not is_fundamental(delta):
        raise FormError(f"{delta} is not a fundamental discriminant")
    d = f.disc
    if d % delta or (d // delta) % 4 not in (0, 1):
        raise FormError("Delta must divide disc(f) with a discriminant cofactor")
    if math.gcd(f.content, delta) != 1:
        return 0
    bound = 2
    while True:
        for x in range(-bound, bound + 1):
            for y in range(-bound, bound + 1):
                if math.gcd(x, y) != 1:
                    continue
                n = f(x, y)
                if n and math.gcd(n, delta) == 1:
                    return kronecker(delta, n)
        bound *= 2
        if bound > 1 << 12:
            raise ArithmeticError("no represented value coprime to Delta found")


# CM points and geodesics -------------------------------------------------------

@dataclass(frozen=True)
class CMPoint:
    z: complex
    stabilizer_order: int


def cm_point(f):
    if f.disc >= 0:
        raise FormError("CM point needs a definite form")
    if f.a <= 0:
        raise FormError("CM point needs a positive definite form")
    z = complex(-f.b, math.sqrt(-f.disc)) / (2 * f.a)
    return CMPoint(z=z, stabilizer_order=stabilizer_order(f))


def pell(d):
    """Fundamental solution (t, u) of t^2 - d u^2 = 4, u > 0, read off the principal cycle."""
    if d <= 0 or is_square(d):
        raise FormError("Pell equation needs positive nonsquare d")
    b = d % 2
    while (b + 2) ** 2 < d:
        b += 2
    principal = QuadForm(1, b, (b * b - d) // 4)
    m = automorph(principal)
    return m[0][0] + m[1][1], m[1][0]


@dataclass(frozen=True)
class GeodesicData:
    center: float
    radius: float
    vertical: bool
    real_part: float
    start: float
    end: float
    automorph: Matrix
    orientation: int
    epsilon: float


def automorph(f):
    """Generator of the stabilizer of indefinite f modulo +-I, normalized to trace > 0, u > 0.

    It is the product of the reduction steps around the cycle of f, conjugated back to f;
    it has the shape [[(t - b u)/2, -c u], [a u, (t + b u)/2]] for the primitive part.
    """
    d = f.disc
    if d <= 0 or is_square(d):
        raise FormError("automorph needs positive nonsquare discriminant")
    p = f.primitive()
    g, m = reduce_indefinite(p)
    steps = cycle(g)
    last, t_last = steps[-1]
    _, close = _rho(last)
    prod = mat_mul(t_last, close)
    gen = mat_mul(mat_mul(m, prod), mat_inv(m))
    if gen[0][0] + gen[1][1] < 0:
        gen = ((-gen[0][0], -gen[0][1]), (-gen[1][0], -gen[1][1]))
    if gen[1][0] * p.a < 0 or (gen[1][0] == 0 and gen[0][1] * p.c > 0):
        gen = mat_inv(gen)
    return gen


def geodesic_data(f):
    """Semicircle {A|z|^2 + B x + C = 0} oriented from (-B+sqrt d)/2A to (-B-sqrt d)/2A."""
    d = f.disc
    if d <= 0 or is_square(d):
        raise FormError("geodesic data needs positive nonsquare discriminant")
    sd = math.sqrt(d)
    p = f.primitive()
    m = automorph(f)
    t, u = m[0][0] + m[1][1], m[1][0] // p.a
    start = (-f.b + sd) / (2 * f.a)
    end = (-f.b - sd) / (2 * f.a)
    return GeodesicData(
        center=-f.b / (2 * f.a), radius=sd / (2 * abs(f.a)), vertical=False, real_part=float("nan"),
        start=start, end=end, automorph=automorph(f), orientation=1 if end > start else -1,
        epsilon=(t + u * math.sqrt(p.disc)) / 2,
    )


def split_data(f):
    """For f = [0, r, j] (r > 0) the vertical line Re z = -j/r traversed upward."""
    if f.a != 0 or f.b == 0:
        raise FormError("split data needs [0, r, j]")
    if f.b > 0:
        return {"real_part": -f.c / f.b, "upward": True}
    return {"real_part": -f.c / f.b, "upward": False}
