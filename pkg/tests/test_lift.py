import json
import math
from fractions import Fraction

import pytest

from thetalift import exactpoly as ep
from thetalift import lift
from thetalift import modforms as mf
from thetalift import qforms as qf
from thetalift import specfun as sf
from thetalift import traces as tr
from thetalift.lift import LiftExpansion, LiftTerm

SQRT2PI = math.sqrt(2 * math.pi)
ONE = mf.named_form("1")
J = mf.named_form("J")

# coefficients of the weight 1/2 form q^-3 - 248 q + 26752 q^4 - ... (Zagier's table of f_3)
F3 = {-3: 1, 1: -248, 4: 26752, 5: -85995, 8: 1707264, 9: -4096248, 12: 44330496}


@pytest.fixture(scope="module")
def e2k2():
    return lift.lift_e2k(2, 20)


@pytest.fixture(scope="module")
def je2():
    return lift.lift_jE2(-3, 12)


# term shapes -------------------------------------------------------------------

def test_holo_term_is_exponential():
    L = LiftExpansion(0, (LiftTerm(3, "holo", 2 - 1j),), "test", 3)
    tau = complex(0.17, 0.9)
    assert lift.evaluate_lift(L, tau) == pytest.approx((2 - 1j) * complex(math.e) ** (2j * math.pi * 3 * tau))


def test_shape_rules():
    y, d = 0.9, -3
    x = 2 * math.sqrt(2 * math.pi * abs(d) * y)
    q = math.exp(-2 * math.pi * abs(d) * y)
    t = LiftTerm(d, "h_shape", 1, (2,))
    assert t.shape_times_q(y) == pytest.approx(sf.h_fn(2, x) / x ** 2 / q, rel=1e-12)
    t = LiftTerm(0, "log_shape", 1, (1, 0.3))
    assert t.shape_times_q(y) == pytest.approx((math.log(8 * math.pi * y) / 2 + 0.3) / (16 * math.pi * y))
    t = LiftTerm(0, "const", 1, (1,))
    assert t.shape_times_q(y) == pytest.approx((8 * math.pi * y) ** -0.5)
    t = LiftTerm(2, "ypow", 1, (2,))
    assert t.shape_times_q(y) == pytest.approx((16 * math.pi * y) ** -2 * math.exp(-4 * math.pi * y))


def test_h_shape_decay_envelope():
    t = LiftTerm(-3, "h_shape", 1, (2,))
    assert abs(t.evaluate(1j)) < math.exp(-2 * math.pi * 3)


def test_params_coerced():
    assert LiftTerm(0, "ypow", 1, (2,)).params == (2.0,)


# E_2^* power lift ---------------------------------------------------------------

def test_e2k_support_and_families(e2k2):
    assert e2k2.in_plus_space()
    assert e2k2.weight == Fraction(5, 2)
    assert {t.kind for t in e2k2.terms} == {"holo", "ypow", "h_shape", "log_shape", "const", "I_shape"}


def test_e2k_examples(e2k2):
    assert e2k2.coefficient(0, "ypow", (1,)) == pytest.approx(sf.EULER_GAMMA, rel=1e-12)
    assert e2k2.coefficient(0, "const", (1,)) == pytest.approx(SQRT2PI / 6, rel=1e-14)
    assert e2k2.coefficient(-3, "h_shape", (2,)) == pytest.approx(2 * SQRT2PI / 3 * math.sqrt(3), rel=1e-14)
    (log_term,) = e2k2.by_kind("log_shape")
    assert log_term.params == (1.0, pytest.approx(sf.c_const(2)))
    assert log_term.coeff == -1


def test_e2k_hurwitz_family(e2k2):
    for t in e2k2.by_kind("h_shape"):
        assert t.coeff.real == pytest.approx(2 * SQRT2PI * float(qf.hurwitz(-t.d)) * abs(t.d) ** 0.5)


def test_e2k_square_family(e2k2):
    assert {t.d: t.coeff for t in e2k2.by_kind("I_shape")} == {a * a: 2 * a * a for a in range(1, 5)}


def test_e2k_trace_coefficients(e2k2):
    g2 = mf.e2k_power(2)
    assert e2k2.coefficient(5) == pytest.approx(tr.trace_cycle(g2, 5).value / 2, rel=1e-10)
    assert e2k2.coefficient(-4, "ypow", (1,)) == 0
    assert e2k2.coefficient(5, "ypow", (1,)) == pytest.approx(tr.trace_cycle(ONE, 5).value, rel=1e-10)


def test_e2k_precondition():
    with pytest.raises(lift.PreconditionError):
        lift.lift_e2k(3, 8)
    with pytest.raises(lift.PreconditionError):
        lift.lift_e2k(0, 8)


def test_json_round_trip(e2k2):
    text = json.dumps(e2k2.to_json())
    back = LiftExpansion.from_json(text)
    assert back == e2k2
    doc = json.loads(text)
    assert set(doc) == {"theorem", "k", "terms", "meta"}
    assert set(doc["terms"][0]) == {"d", "kind", "coeff_re", "coeff_im", "params"}


# lowering -------------------------------------------------------------------------

def test_lower_check_e2k(e2k2):
    report = lift.lower_check(e2k2)
    assert len(report["points"]) == 5
    assert report["max_dev"] < 1e-5


@pytest.mark.parametrize("term", [
    LiftTerm(-3, "h_shape", 1.3, (3,)),
    LiftTerm(-4, "h_shape", 1.0, (2,)),
    LiftTerm(1, "J_shape", 0.7, (3,)),
    LiftTerm(4, "I_shape", 1.0, (4,)),
    LiftTerm(1, "I_shape", 1.0, (2,)),
    LiftTerm(0, "log_shape", 2.0, (2, 0.4)),
    LiftTerm(0, "log_shape", 2.0, (0, 0.4)),
    LiftTerm(0, "const", 1.5, (3,)),
    LiftTerm(5, "ypow", 0.8, (2,)),
])
def test_termwise_lowering_matches_finite_difference(term):
    L = LiftExpansion(2, (term,), "test", 8)
    report = lift.lower_check(L, h=1e-3)
    scale = max(abs(r["symbolic"]) for r in report["points"]) + 1e-3
    assert report["max_dev"] / scale < 1e-7


def test_holomorphic_terms_lower_to_zero():
    L = LiftExpansion(2, (LiftTerm(5, "holo", 3.0),), "test", 8)
    assert lift.lower_expansion(L).terms == ()


def test_h_shape_lowering_normalization():
    (t,) = lift.lower_expansion(LiftExpansion(2, (LiftTerm(-3, "h_shape", 1.0, (2,)),), "t", 3)).terms
    assert (t.kind, t.params) == ("h_shape", (0.0,))
    assert t.coeff == pytest.approx(-1 / (16 * math.pi * 3))


def test_omega_residual_values():
    # x^3 (Om~_l/x^l)' - Om~_(l-2)/x^(l-2) expressed in powers x^(-2j)
    for l in (2, 3, 4, 5, 6):
        res = lift.omega_residual(l)
        om, om2 = ep.omega_tilde(l), ep.omega_tilde(l - 2)
        x = 1.7
        direct = (x * om.deriv()(x) - l * om(x)) / x ** (l - 2) - om2(x) / x ** (l - 2)
        assert sum(float(r) * x ** (-2 * j) for j, r in res.items()) == pytest.approx(float(direct), abs=1e-12)


# J E_2^* lift ------------------------------------------------------------------------

def test_je2_holomorphic_part(je2):
    hol = je2.holomorphic_part()
    assert hol[0] == pytest.approx(48)
    assert abs(hol.get(1, 0)) < 1e-5 and abs(hol.get(2, 0)) < 1e-5
    f = mf.named_form("JE2star")
    assert hol[3] == pytest.approx(tr.twisted_trace(f, -3, -3).value, abs=1e-9)
    assert hol[3].real == pytest.approx(65.10758026111537, rel=1e-9)


def test_je2_support(je2):
    assert je2.in_plus_space()
    assert je2.weight == Fraction(3, 2)


def test_je2_nonholomorphic_terms(je2):
    (jt,) = je2.by_kind("J_shape")
    assert (jt.d, jt.params) == (3, (1.0,))
    assert jt.coeff == pytest.approx(12 / SQRT2PI * math.sqrt(3))
    for t in je2.by_kind("h_shape"):
        assert t.coeff == pytest.approx(-12 / SQRT2PI * lift.twisted_cm_sum(-3, -t.d))


def test_je2_shadow_matches_zagier_f3(je2):
    shadow = lift.xi_shadow(je2)
    unit = 3 / (2 * math.pi)
    assert set(shadow) == set(F3)
    for n, c in F3.items():
        assert shadow[n] / unit == pytest.approx(c, rel=1e-9)
    # principal q^Delta term enters with +, the D terms with - against twisted traces of J
    assert shadow[-3].real > 0 and shadow[1].real < 0


def test_xi_shadow_matches_finite_difference():
    # xi_k f = 2i y^k conj(df/dtaubar); for weight 3/2 check on a two-term expansion
    L = LiftExpansion(1, (LiftTerm(-4, "h_shape", 2.0, (1,)), LiftTerm(3, "J_shape", 0.5, (1,))), "t", 4)
    shadow = lift.xi_shadow(L)
    tau, h = complex(0.13, 1.05), 1e-4

    def g(z):
        return lift.evaluate_unchecked(L, z)

    gx = (g(tau + h) - g(tau - h)) / (2 * h)
    gy = (g(tau + 1j * h) - g(tau - 1j * h)) / (2 * h)
    dbar = (gx + 1j * gy) / 2
    xi = 2j * tau.imag ** 1.5 * dbar.conjugate()
    expect = sum(c * complex(math.e) ** (2j * math.pi * n * tau) for n, c in shadow.items())
    assert xi == pytest.approx(expect, rel=1e-6)


def test_je2_precondition():
    with pytest.raises(lift.PreconditionError):
        lift.lift_jE2(-12, 8)
    with pytest.raises(lift.PreconditionError):
        lift.lift_jE2(5, 8)


# nearly holomorphic lift -------------------------------------------------------------

def test_weakly_holomorphic_k2_only_holo():
    # depth 0 < k, so c(0, 2) = 0 and only the trace series survives
    g = mf.multiply(mf.holomorphic(mf.eisenstein(4), 4), J)
    L = lift.lift_nearly_hol(g, d_max=8)
    assert {t.kind for t in L.terms} == {"holo"}
    assert L.coefficient(5) == pytest.approx(tr.trace_cycle(g, 5).value, rel=1e-9)


def test_zero_form_gives_empty():
    zero = mf.holomorphic(mf.eisenstein(4).scale(0), 4)
    assert lift.lift_nearly_hol(zero, d_max=8).terms == ()


def test_c0k_precondition():
    with pytest.raises(lift.PreconditionError, match="c\\(0,2\\)"):
        lift.lift_nearly_hol(mf.e2k_power(2), d_max=8)
    with pytest.raises(lift.PreconditionError):
        lift.lift_nearly_hol(mf.e2_star(), d_max=8)


def test_k0_lift_of_j():
    L = lift.lift_nearly_hol(J, d_max=8)
    assert L.coefficient(5) == pytest.approx(tr.trace_cycle(J, 5).value, rel=1e-10)
    assert L.coefficient(-3, "h_shape", (0,)) == pytest.approx(
        SQRT2PI * 2 * tr.signed_cm_trace(J, -3, 0).value * 3 ** -0.5, rel=1e-10)
    assert L.coefficient(0, "const", (-1,)) == pytest.approx(2 * (-8 * math.pi) / math.sqrt(8 * math.pi), rel=1e-9)
    assert L.coefficient(1, "J_shape", (0,)) == pytest.approx(-math.sqrt(8 * math.pi), rel=1e-14)
    assert L.in_plus_space()


def test_cross_theorem_consistency(e2k2):
    g = lift.lift_nearly_hol(mf.e2k_power(2), d_max=20, allow_c0k=True)
    shared = ("holo", "ypow", "h_shape", "const")
    mine = {(t.d, t.kind, t.params): t.coeff for t in g.terms if t.kind in shared}
    other = {(t.d, t.kind, t.params): 2 * t.coeff for t in e2k2.terms if t.kind in shared}
    # Tr_1(1) = 0, so drop numerically zero coefficients on both sides
    mine = {k: v for k, v in mine.items() if abs(v) > 1e-12}
    other = {k: v for k, v in other.items() if abs(v) > 1e-12}
    assert set(mine) == set(other)
    for key, v in other.items():
        assert abs(mine[key] - v) < 1e-9 * max(1, abs(v)), key


# fundamental domain integrals and the theta oracle ----------------------------------

def test_regularized_integrals():
    assert lift.regularized_integral(ONE) == pytest.approx(math.pi / 3, rel=1e-10)
    assert lift.regularized_integral(J) == pytest.approx(-8 * math.pi, rel=1e-9)


@pytest.mark.parametrize("name,trace", [("1", 1.7216357638560162), ("J", -52.543330690504)])
def test_theta_oracle(name, trace):
    res = lift.theta_oracle(mf.named_form(name), 5)
    assert abs(res.value - trace) < 1e-3
    assert abs(res.value - tr.trace_cycle(mf.named_form(name), 20).value) < 1e-3
    assert res.err < 1e-3


def test_theta_oracle_domain():
    with pytest.raises(lift.LiftError):
        lift.theta_oracle(ONE, 4)
    with pytest.raises(lift.LiftError):
        lift.theta_oracle(mf.e2_star(), 5)
    with pytest.raises(lift.CertificationError):
        lift.theta_oracle(J, 5, T=1.2)


def test_lattice_symmetry():
    # lambda -> -lambda leaves the Gaussian kernel unchanged
    pairs = lift._lattice_pairs(5, 6.0, math.sqrt(3) / 2, 4.0)
    assert pairs
    z = complex(0.2, 1.3)
    for a, b in pairs[:20]:
        c = (b * b / 4 - 5) / a
        s = (a * abs(z) ** 2 + b * z.real + c) / z.imag
        s_neg = (-a * abs(z) ** 2 - b * z.real - c) / z.imag
        assert math.exp(-math.pi * s * s) == math.exp(-math.pi * s_neg * s_neg)


# evaluation and tail certification --------------------------------------------------

def test_evaluate_e2k(e2k2):
    v = lift.evaluate_lift(e2k2, complex(0.1, 1.0))
    assert math.isfinite(abs(v))


def test_tail_certification_failure():
    terms = tuple(LiftTerm(d, "holo", math.exp(8 * d)) for d in range(0, 13))
    with pytest.raises(lift.CertificationError):
        lift.evaluate_lift(LiftExpansion(0, terms, "test", 12), complex(0, 1))


def test_evaluate_rejects_lower_half_plane(e2k2):
    with pytest.raises(ValueError):
        lift.evaluate_lift(e2k2, complex(0, -1))
