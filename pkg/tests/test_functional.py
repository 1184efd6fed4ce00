import numpy as np
import pytest
from scipy import integrate

from chiral2d import fields, functions as fns, geometry as geo
from chiral2d.exact import Exact
from chiral2d.functional import Functional, register

S0 = geo.standard_surface()


def test_linear_evaluation():
    f = fns.bump(0.0, 1.0, label="f")
    psi = fns.expr_function("cos(x)")
    ref, _ = integrate.quad(lambda x: f(x) * np.cos(x), -1, 1, epsabs=1e-14)
    assert fields.evaluate_functional(fields.PSI(f), S0, psi) == pytest.approx(ref, rel=1e-10)


def test_stress_is_half_square():
    f = fns.bump(0.0, 1.0, label="f")
    psi = fns.expr_function("1 + x")
    ref, _ = integrate.quad(lambda x: 0.5 * f(x) * (1 + x) ** 2, -1, 1, epsabs=1e-14)
    assert fields.evaluate_functional(fields.STRESS(f), S0, psi) == pytest.approx(ref, rel=1e-10)


def test_flat_variable_on_tilted_surface():
    surf = geo.CauchySurface(fns.affine_diffeo(4.0))
    f = fns.bump(0.0, 1.0, label="f")
    one = fns.constant(1.0)
    ref, _ = integrate.quad(f, -1, 1)
    assert fields.evaluate_functional(fields.PSI(f), surf, one) == pytest.approx(2 * ref, rel=1e-10)


def test_algebra_of_functionals():
    f = fns.bump(0.0, 1.0, label="f")
    F = fields.PSI(f)
    assert (F - F).is_zero()
    assert F.scale(Exact(2)) == F + F
    assert Functional.zero().is_zero()
    assert (F * F).degree() == 2


@pytest.mark.parametrize("k", [0, 1, 2])
@pytest.mark.parametrize("swap", [False, True])
def test_delta_times_smooth_localization(k, swap):
    from math import comb

    import sympy as sp

    from chiral2d import kernels as kr
    from chiral2d.functional import evaluate, make_vertex

    f = fns.bump(0.0, 1.0, label="f")
    g = fns.bump(0.4, 0.9, label="g")
    a, b = (g, f) if swap else (f, g)
    S = kr.SmoothKernel("exp(-(s-t)**2)*(1+s+2*t**2)")
    F = Functional({((make_vertex([(register(a), 0)], []), make_vertex([(register(b), 0)], [])),
                     ((0, 1, ("delta", k)), (0, 1, ("smooth", S)))): 1})
    dS = [sp.lambdify(kr._S, sp.diff(S.expr, kr._T, m).subs(kr._T, kr._S)) for m in range(k + 1)]

    def integrand(x):
        return a(x) * sum(comb(k, m) * dS[m](x) * b.d(x, k - m) for m in range(k + 1))
    ref, _ = integrate.quad(integrand, -0.5, 1.0, epsabs=1e-13)
    assert complex(evaluate(F, None)).real == pytest.approx(ref, rel=1e-10)


def test_diagonal_factors_are_derivative_free():
    from chiral2d import kernels as kr
    from chiral2d.functional import diagonal_uid, make_vertex

    f = fns.bump(0.0, 1.0, label="f")
    h = kr.SmoothKernel("exp(-(s-t)**2)*(1+s*t)")
    d = diagonal_uid(h, 0, 0)
    # int f' diag(h) = -int f (h_s + h_t)(s, s) = -2 int f h_s(s, s) for symmetric h
    lhs = Functional({((make_vertex([(register(f), 1), (d, 0)], []),), ()): 1})
    rhs = Functional({((make_vertex([(f.uid, 0), (diagonal_uid(h, 1, 0), 0)], []),), ()): -2})
    assert lhs == rhs
