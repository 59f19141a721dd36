import math
import random
from fractions import Fraction

import pytest

from thetalift import modforms as mf
from thetalift import qforms as qf
from thetalift import specfun as sf
from thetalift import traces as tr
from thetalift.modforms import NearlyHolForm, QSeries
from thetalift.qforms import QuadForm

ONE = mf.named_form("1")
J = mf.named_form("J")
E2 = mf.e2_star()


def random_sl2(rng, bound=5):
    while True:
        a, b, c = (rng.randint(-bound, bound) for _ in range(3))
        if a and (1 + b * c) % a == 0:
            return ((a, b), (c, (1 + b * c) // a))


def pell_by_search(d):
    u = 1
    while True:
        t2 = d * u * u + 4
        t = math.isqrt(t2)
        if t * t == t2:
            return t, u
        u += 1


def test_trace_cm_examples():
    assert tr.trace_cm(J, -3).value == pytest.approx(-248, abs=1e-6)
    assert tr.trace_cm(J, -4).value == pytest.approx(492, abs=1e-6)
    assert tr.trace_cm(ONE, -3).value == pytest.approx(1 / 3)
    assert tr.trace_cm(ONE, -4).value == pytest.approx(1 / 2)


def test_trace_cm_of_one_is_twice_hurwitz_weighting():
    for n in (3, 4, 7, 8, 11, 12, 15, 20, 23):
        assert tr.trace_cm(ONE, -n).value == pytest.approx(float(qf.hurwitz(n)), rel=1e-12)


def test_trace_cm_against_mpmath_kleinj():
    import mpmath
    total = 0
    for f in qf.class_reps(-23):
        if f.a > 0:
            z = qf.cm_point(f).z
            total += 2 / qf.stabilizer_order(f) * (1728 * complex(mpmath.kleinj(z)) - 744)
    assert abs(tr.trace_cm(J, -23).value - total) < 1e-6


def test_trace_cm_domain():
    with pytest.raises(tr.TraceError):
        tr.trace_cm(E2, -3)
    with pytest.raises(tr.TraceError):
        tr.trace_cm(J, 5)


@pytest.mark.parametrize("f", [QuadForm(1, 1, -1), QuadForm(1, 0, -2), QuadForm(2, 2, -2),
                               QuadForm(-1, 0, 3), QuadForm(3, 4, -2), QuadForm(1, 5, -3)])
def test_cycle_integral_of_one_is_length_over_sqrt_d(f):
    # dz / lambda(z) = i ds / sqrt(d) up to orientation, with period 2 log eps by a Pell search
    t, u = pell_by_search(f.primitive().disc)
    eps = (t + u * math.sqrt(f.primitive().disc)) / 2
    val = tr.cycle_integral(ONE, f).value
    assert val == pytest.approx(2 * math.log(eps) / math.sqrt(f.disc), rel=1e-12)


def test_period_matches_translation_of_automorph():
    for f in (QuadForm(1, 1, -1), QuadForm(1, 0, -3), QuadForm(2, 1, -2)):
        z, _, length = tr._geodesic_path(f)
        w = z(0.0)
        m = qf.automorph(f)
        mw = qf.mobius(m, w)
        # hyperbolic distance between w and Mw
        dist = math.acosh(1 + abs(mw - w) ** 2 / (2 * w.imag * mw.imag))
        assert dist == pytest.approx(length, rel=1e-10)


def test_trace_20_of_one():
    assert tr.trace_cycle(ONE, 20).value == pytest.approx(1.7216357638560162, rel=1e-12)


@pytest.mark.parametrize("d", [5, 8, 12, 13, 17, 21, 24, 28, 29, 33, 37, 40])
def test_cycle_node_doubling(d):
    a = tr.trace_cycle(E2, d, nodes=128).value
    b = tr.trace_cycle(E2, d, nodes=256).value
    assert abs(a - b) < 1e-9


def test_class_function_consistency():
    rng = random.Random(11)
    for f in (QuadForm(1, 1, -1), QuadForm(1, 0, -3), QuadForm(-1, 0, 3), QuadForm(2, 2, -1)):
        base = tr.cycle_integral(mf.named_form("JE2star"), f).value
        for _ in range(3):
            g = f.act(random_sl2(rng))
            assert abs(tr.cycle_integral(mf.named_form("JE2star"), g).value - base) < 1e-10 * max(1, abs(base))


def test_orientation_flip_negates_odd_weight_trace():
    for f in (QuadForm(1, 0, -3), QuadForm(1, 1, -1), QuadForm(2, 1, -2)):
        a = tr.cycle_integral(E2, f).value
        b = tr.cycle_integral(E2, -f).value
        assert abs(a + b) < 1e-12


def test_path_reversal_negates():
    f = QuadForm(1, 0, -3)
    z, dz, length = tr._geodesic_path(f)

    def integrand(s):
        return mf.evaluate(E2, z(s)) * dz(s)

    fwd, _ = tr._composite(integrand, tr._panels(0.0, length, 0.5), 24)
    back, _ = tr._composite(integrand, tr._panels(0.0, -length, 0.5), 24)
    assert abs(fwd + back) < 1e-12


def _coprime_pairs():
    for delta in (-3, -4, -7, -8):
        for dd in (-3, -4, -7, -8):
            if math.gcd(delta, dd) == 1:
                yield delta, dd


@pytest.mark.parametrize("delta,dd", list(_coprime_pairs()))
def test_twisted_e2_identity(delta, dd):
    expected = -12 * float(qf.hurwitz(-delta) * qf.hurwitz(-dd))
    assert abs(tr.twisted_trace(E2, delta, dd).value - expected) < 1e-5


def test_twisted_examples():
    assert tr.twisted_trace(E2, -3, -4).value == pytest.approx(-2, abs=1e-9)
    assert tr.twisted_trace(E2, -4, -3).value == pytest.approx(-2, abs=1e-9)
    assert tr.twisted_trace(E2, -3, -7).value == pytest.approx(-4, abs=1e-9)


@pytest.mark.parametrize("delta,dd", [(-3, -3), (-4, -4), (-3, -12), (-7, -7), (-8, -8), (-4, -16)])
def test_twisted_e2_identity_square(delta, dd):
    expected = -12 * float(qf.hurwitz(-delta) * qf.hurwitz(-dd))
    vals = [tr.twisted_trace(E2, delta, dd, T=T) for T in (4.0, 8.0, 16.0)]
    for v in vals:
        assert abs(v.value - expected) < 1e-5
    errs = max(v.err for v in vals)
    assert max(abs(v.value - vals[0].value) for v in vals) <= 3 * errs


def test_twisted_domain():
    with pytest.raises(tr.TraceError):
        tr.twisted_trace(E2, -12, -7)
    with pytest.raises(tr.TraceError):
        tr.twisted_trace(E2, 5, -3)


def test_twisted_matches_pairwise_sum():
    # chi-weighted sum equals the sum over pairs (lambda, -lambda) with signs +1, -1
    for delta, dd in ((-3, -4), (-4, -7), (-3, -8)):
        reps = qf.class_reps(delta * dd)
        paired = 0j
        seen = set()
        for f in reps:
            if f in seen:
                continue
            chi = qf.genus_char(delta, f)
            if chi == 0:
                continue
            neg = qf.canonical_rep(-f)[0]
            seen.update({f, neg})
            pos, negf = (f, neg) if chi == 1 else (neg, f)
            paired += tr.cycle_integral(E2, pos).value - tr.cycle_integral(E2, negf).value
        assert abs(paired - tr.twisted_trace(E2, delta, dd).value) < 1e-10


def test_trace_zero():
    assert tr.trace_zero(ONE).value == pytest.approx(sf.EULER_GAMMA)
    f2 = NearlyHolForm(4, (QSeries.from_dict({0: 1, 1: 5}, 8),))
    assert tr.trace_zero(f2).value == pytest.approx(-1 / 12)
    f4 = NearlyHolForm(8, (QSeries.from_dict({0: 3}, 8),))
    assert tr.trace_zero(f4).value == pytest.approx(3 / 120)
    cusp = NearlyHolForm(4, (QSeries.from_dict({1: 1}, 8),))
    assert tr.trace_zero(cusp).value == 0


def test_zeta_oracle_for_trace_zero():
    # zeta(1-k) via Euler-Maclaurin style closed form -B_k/k against mpmath.zeta
    import mpmath
    for k in (2, 4, 6, 8):
        f = NearlyHolForm(2 * k, (QSeries.from_dict({0: 1}, 4),))
        assert tr.trace_zero(f).value == pytest.approx(float(mpmath.zeta(1 - k)), rel=1e-14)


def test_sing_examples():
    assert tr.sing_term(ONE, QuadForm(0, 1, 0), 8.0) == pytest.approx(-math.log(8.0))
    # phase e(n r) with r = -1/2 and n = -1 is -1
    f = NearlyHolForm(0, (QSeries.from_dict({-1: 1}, 4),))
    val = tr.sing_term(f, QuadForm(0, 2, 1), 3.0)
    assert val == pytest.approx(0.5 * -1 * sf.phi_sing(-1, 0, 3.0))
    # cusp form: Sing decays with T
    delta = mf.holomorphic(mf.delta_cusp(16), 12)
    assert abs(tr.sing_term(delta, QuadForm(0, 1, 0), 8.0)) < 1e-15
    with pytest.raises(tr.TraceError):
        tr.sing_term(ONE, QuadForm(1, 1, -1), 4.0)


def test_sing_matches_derivative_of_cutoff_integral():
    # d/dT of the top part of the cutoff integral is minus d/dT Sing
    f = J
    form = QuadForm(0, 1, 0)
    T, h = 2.0, 1e-4
    dsing = (tr.sing_term(f, form, T + h) - tr.sing_term(f, form, T - h)) / (2 * h)
    integrand = mf.evaluate(f, complex(0, T)) * (1j * T) ** (-1) * 1j
    assert dsing == pytest.approx(-integrand, rel=1e-6)


@pytest.mark.parametrize("r", [1, 2, 3, 4, 6])
def test_square_trace_of_one(r):
    # per orbit [0, r, j]: (2/r) log(r / gcd(j, r))
    expected = sum(2 / r * math.log(r / math.gcd(j, r)) for j in range(r))
    for T in (4.0, 8.0):
        assert tr.trace_square(ONE, r * r, T=T).value == pytest.approx(expected, abs=1e-12)


def test_square_trace_of_j_cutoff_independent():
    a = tr.trace_square(J, 1, T=2.0)
    b = tr.trace_square(J, 1, T=6.0)
    assert abs(a.value - b.value) < 1e-8


def test_square_trace_domain():
    with pytest.raises(tr.TraceError):
        tr.trace_cycle(J, 4)
    with pytest.raises(tr.TraceError):
        tr.trace_square(J, 5)
    with pytest.raises(tr.TraceError):
        tr.split_class_trace(J, QuadForm(0, 1, 0), T=0.5)


def test_regularized_je2_stable_in_cutoff():
    f = mf.named_form("JE2star", 24)
    vals = [tr.twisted_trace(f, -3, -3, T=T) for T in (4.0, 8.0, 16.0)]
    err = max(v.err for v in vals)
    assert max(abs(v.value - vals[0].value) for v in vals) <= 3 * err
    assert err < 1e-10


def test_extended_matches_double_when_both_apply():
    f = mf.named_form("JE2star", 24)
    a = tr.split_class_trace(f, QuadForm(0, 3, 1), T=2.0, precision="double")
    b = tr.split_class_trace(f, QuadForm(0, 3, 1), T=2.0, precision="extended")
    assert abs(a.value - b.value) < 1e-8


def test_orbits_square():
    assert tr.orbits(9) == [QuadForm(0, 3, 0), QuadForm(0, 3, 1), QuadForm(0, 3, 2)]
    assert tr.orbits(-3) == qf.class_reps(-3)


def test_trace_d_dispatch():
    assert tr.trace_d(J, -4).value == pytest.approx(492, abs=1e-6)
    assert tr.trace_d(ONE, 0).value == pytest.approx(sf.EULER_GAMMA)
    assert tr.trace_d(ONE, 5).value == pytest.approx(tr.trace_cycle(ONE, 5).value)
    assert tr.trace_d(ONE, 4).value == pytest.approx(math.log(2))
    with pytest.raises(tr.TraceError):
        tr.trace_d(ONE, 7)
