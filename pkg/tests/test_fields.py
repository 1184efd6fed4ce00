import math

import numpy as np
import pytest
import sympy as sp
from scipy import integrate

from chiral2d import fields, functions as fns, geometry as geo
from chiral2d.descriptors import random_configuration
from chiral2d.exact import Exact

S0 = geo.standard_surface()
s = np.linspace(-2, 2, 41)


@pytest.mark.parametrize("surf,expr,value", [
    (S0, "u", 1.0),
    (S0, "v", 0.0),
    (geo.CauchySurface(fns.affine_diffeo(2.0)), "u", 1 / math.sqrt(2)),
])
def test_chiral_derivative_examples(surf, expr, value):
    assert np.allclose(fields.chiral_derivative(surf, fields.ExprBulk(expr))(s), value)


def test_anti_chiral_derivative_sees_right_movers():
    assert np.allclose(fields.anti_chiral_derivative(S0, fields.ExprBulk("v"))(s), 1.0)


def test_solve_constant_data_gives_u():
    phi = fields.solve_from_chiral_data(S0, fns.constant(1.0))
    u = np.linspace(-1, 1, 5)
    assert np.allclose(phi.value(u, 0 * u) - phi.value(0 * u, 0 * u), u)
    zero = fields.solve_from_chiral_data(S0, fns.constant(0.0))
    assert np.allclose(zero.value(u, u), 0.0)


def test_cylinder_solution_has_zero_mean_and_mode():
    cyl = geo.standard_surface(geo.CYLINDER)
    psi = fns.expr_function("0.25 + cos(x)", periodic=geo.TWO_PI)
    phi = fields.solve_from_chiral_data(cyl, psi)
    assert phi.p == pytest.approx(2 * math.pi * 0.25)
    assert np.max(np.abs(fields.chiral_derivative(cyl, phi)(s) - psi(s))) < 1e-10


def test_weighted_pullback_dilation():
    psi = fns.expr_function("exp(-x**2)")
    lam = 2.5
    rho = fns.affine_diffeo(lam)
    assert np.allclose(fields.weighted_pullback(rho, 0, psi)(s), psi(lam * s))
    assert np.allclose(fields.weighted_pullback(rho, 1, psi)(s), lam * psi(lam * s))
    assert np.allclose(fields.weighted_pullback(fns.identity_diffeo(), 1, psi)(s), psi(s))


def test_field_pushforward():
    f = fns.bump(0.0, 1.0)
    lam = 2.0
    rho = fns.affine_diffeo(lam)
    assert np.allclose(fields.field_pushforward(rho, 2, f)(s), lam * f(s / lam))
    sine = fns.sine_diffeo(0.3)
    assert np.allclose(fields.field_pushforward(sine, 1, f)(sine(s)), f(s), atol=1e-12)


def test_eta_average_product():
    h = fields.BulkTestFunction("exp(-(u+0.2)**2) * (1 - v**2)**2", (-1.2, 0.8), (-1.0, 1.0))
    ref_b, _ = integrate.quad(lambda v: (1 - v * v) ** 2, -1, 1)
    got = fields.eta_average(None, S0, h)(np.array([-0.5, 0.0, 0.3]))
    assert np.allclose(got, np.exp(-(np.array([0.5, 0.0, -0.3]) + 0.2) ** 2) * ref_b, atol=1e-12)


def test_eta_average_bump_product_against_quadrature():
    h = fields.BulkTestFunction.bump_product(0.1, 0.7, -0.2, 0.5)
    ss = np.array([-0.5, -0.1, 0.3])
    got = fields.eta_average(None, S0, h)(ss)
    ref = [integrate.quad(lambda v, x=x: float(h(-x, v)), -0.7, 0.3, epsabs=1e-15, epsrel=1e-13)[0] for x in ss]
    assert np.allclose(got, ref, atol=1e-9, rtol=0)


def test_local_field_weights():
    assert fields.PSI.weight == 1
    assert fields.STRESS.weight == 2


def test_diffeo_action_dilation_on_psi():
    f = fns.bump(0.0, 1.0, label="f")
    lam = 2.0
    rho = fns.affine_diffeo(lam)
    image = fields.diffeo_action_on_functional(rho, fields.PSI(f))
    rng = np.random.default_rng(3)
    for _ in range(5):
        psi = random_configuration(rng)
        lhs = fields.evaluate_functional(fields.PSI(f), S0, fields.weighted_pullback(rho, 1, psi))
        rhs = fields.evaluate_functional(image, S0, psi)
        assert abs(lhs - rhs) < 1e-9


def test_test_function_validation():
    with pytest.raises(fields.FieldError):
        fields.test_function(fns.expr_function("exp(-x**2)"))
