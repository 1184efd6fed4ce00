import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from chiral2d import chiral_algebra as ca, fields, functions as fns, geometry as geo, kernels as kr
from chiral2d.exact import Exact, I, PI
from chiral2d.functional import UNIT, Functional

S0 = geo.standard_surface()
f = fns.bump(0.0, 1.0, label="f")
g = fns.bump(0.4, 0.9, label="g")


def fgp(a, b):
    return integrate.quad(lambda s: a(s) * b.d(s, 1), -1.5, 1.5, epsabs=1e-14, limit=200)[0]


def test_self_bracket_vanishes():
    assert ca.poisson_bracket(fields.PSI(f), fields.PSI(f)).is_zero()


def test_bracket_value():
    br = ca.poisson_bracket(fields.PSI(f), fields.PSI(g))
    assert br.degree() == 0
    val = fields.evaluate_functional(br, S0, None)
    assert val == pytest.approx(-0.5 * fgp(f, g), rel=1e-10)


def test_stress_psi_bracket_derived_value():
    # {T(h), Psi(f)} = -1/2 Psi(h f'); see criterion 3 in the acceptance file
    h = fns.bump(0.2, 1.2, label="h")
    br = ca.poisson_bracket(fields.STRESS(h), fields.PSI(f))
    assert br == Functional.smeared(1, [(h, 0), (f, 1)], Fraction(-1, 2))


def test_star_of_linear_observables():
    F, G = fields.PSI(f), fields.PSI(g)
    S = ca.star_product(F, G, order=3)
    assert S[0] == F * G
    W = ca.HadamardChiralKernel()
    val = complex(fields.evaluate_functional(S[1], S0, None))
    assert val == pytest.approx(kr.pair(W.kernel, f, g), rel=1e-10)
    assert S[2].is_zero() and S[3].is_zero()


def test_star_order_zero_is_pointwise():
    psi = fns.expr_function("sin(x) + 0.5")
    F, G = fields.STRESS(f), fields.PSI(g)
    S = ca.star_product(F, G)
    lhs = fields.evaluate_functional(S[0], S0, psi)
    rhs = fields.evaluate_functional(F, S0, psi) * fields.evaluate_functional(G, S0, psi)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_tt_hbar2_coefficient_at_zero():
    # (1/32 pi^2) <BV_4, f (x) g>: pair against the stored kernel with coefficient 1/(32 pi^2)
    S = ca.star_product(fields.STRESS(f), fields.STRESS(g))
    val = complex(fields.evaluate_functional(S[2], S0, None))
    ref = kr.pair(kr.boundary_value(4, 1, Exact.from_parts(Fraction(1, 32), -2, 0)), f, g)
    assert val == pytest.approx(ref, rel=1e-9)


def test_commutator_of_linear_observables():
    C = ca.commutator(fields.PSI(f), fields.PSI(g))
    assert C[0].is_zero() and all(C[k].is_zero() for k in range(2, C.nmax + 1))
    val = complex(fields.evaluate_functional(C[1], S0, None))
    assert val == pytest.approx(1j * -0.5 * fgp(f, g), rel=1e-10)
    assert ca.commutator(fields.STRESS(f), fields.STRESS(f)).is_zero()


def test_gaussian_state():
    st = ca.GaussianState()
    assert ca.gaussian_state_eval(st, fields.PSI(f)).is_zero()
    one = ca.gaussian_state_eval(st, Functional({UNIT: Exact(1)}))
    assert one[0] == 1
    S = ca.star_product(fields.PSI(f), fields.PSI(g))
    val = ca.gaussian_state_eval(st, S)
    assert val[1] == pytest.approx(kr.pair(ca.HadamardChiralKernel().kernel, f, g), rel=1e-10)
    assert val[0] == 0


def test_beta_identity_and_scale_shift():
    F = fields.STRESS(f) * fields.PSI(g)
    assert ca.beta_transform(F, kr.KernelExpr()) == ca.HbarSeries.of(F)
    shift = ca.chiral_shift_from_bulk(-sp_log_lambda())
    assert shift.is_zero()
    assert ca.beta_transform(F, shift) == ca.HbarSeries.of(F)


def sp_log_lambda():
    import sympy as sp
    return sp.log(sp.Rational(3)) / (2 * sp.pi)


def test_beta_intertwines_star_products():
    H = kr.smooth(kr.SmoothKernel("exp(-(s-t)**2)"), Exact(Fraction(1, 3)))
    W = ca.HadamardChiralKernel()
    W2 = ca.HadamardChiralKernel(shift=H)
    F, G = fields.STRESS(f), fields.STRESS(g)
    lhs = ca.beta_transform(ca.star_product(F, G, W, 2), H)
    rhs = ca.star_product(ca.beta_transform(F, H), ca.beta_transform(G, H), W2, 2)
    for k in range(3):
        assert lhs[k] == rhs[k]


def test_hadamard_parts():
    W = ca.HadamardChiralKernel()
    E = ca.ChiralCommutator().kernel
    assert W.antisymmetric_part() == E.scale(I * Exact(Fraction(1, 2)))
    assert W.symmetric_part() == kr.principal_value(2, Exact.from_parts(Fraction(-1, 4), -1, 0))


def test_ope_psi_psi():
    t = ca.ope_extract(fields.PSI, fields.PSI)
    assert t.powers() == [2]
    assert t.term(2).coefficient("1") == Exact.from_parts(Fraction(-1, 4), -1, 0)
    assert t.term(2).hbar_pow == 1


def test_ope_unit_is_empty():
    assert ca.ope_extract(fields.UNIT_FIELD, fields.STRESS).terms == []


def test_ope_tt_central_term():
    t = ca.ope_extract(fields.STRESS, fields.STRESS)
    c = t.term(4)
    assert c.coefficient("1") == Exact.from_parts(Fraction(1, 32), -2, 0) and c.hbar_pow == 2
    js = t.to_json()["terms"]
    central = [x for x in js if x["power"] == 4][0]["coefficient"]
    assert central == [{"q": "1/32", "piPow": -2, "iPow": 0, "hbarPow": 2}]


def test_ope_tt_derived_subleading_terms():
    # from Wick's theorem with W = -(1/4 pi) 1/(x + i0)^2
    t = ca.ope_extract(fields.STRESS, fields.STRESS)
    assert t.term(2).coefficient("T") == Exact.from_parts(Fraction(-1, 2), -1, 0)
    assert t.term(1).coefficient("T'") == Exact.from_parts(Fraction(-1, 4), -1, 0)


def test_scaling_fit_mixed_weights_vanishes():
    fit = ca.scaling_constraint_fit(fields.PSI, fields.STRESS)
    assert fit.order == 2
    assert abs(fit.a) < 1e-12
