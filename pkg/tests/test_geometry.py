import math

import numpy as np
import pytest
from scipy import optimize

from chiral2d import functions as fns, geometry as geo

S0 = geo.standard_surface()


def test_null_project_identity_surface():
    p = geo.Point(-2.0, 5.0)
    assert geo.null_project(S0, p, "left") == 2.0
    assert geo.null_project(S0, p, "right") == pytest.approx(5.0, abs=1e-12)


def test_null_project_sine_surface_against_brentq():
    surf = geo.CauchySurface(fns.sine_diffeo(0.3))
    s = geo.null_project(surf, geo.Point(-1.0, 2.0), "right")
    ref = optimize.brentq(lambda x: x + 0.3 * math.sin(x) - 2.0, 0.0, 4.0, xtol=1e-14)
    assert s == pytest.approx(ref, abs=1e-12)


def test_bad_side_rejected():
    with pytest.raises(ValueError):
        geo.null_project(S0, geo.Point(0, 0), "up")


def test_cylinder_identification():
    p = geo.Point(0.5, 0.5 + 4 * math.pi, True)
    q = geo.Point(0.5 + 2 * math.pi, 0.5 + 2 * math.pi, True)
    assert (p.u, p.v) == pytest.approx((q.u, q.v))


def test_surface_must_be_increasing():
    with pytest.raises(geo.GeometryError):
        geo.CauchySurface(fns.diffeo_from_expr("-x"))


@pytest.mark.parametrize("rho,factor", [(fns.identity_diffeo(), 1.0), (fns.affine_diffeo(1.0, 0.7), 1.0),
                                        (fns.affine_diffeo(3.0), 3.0)])
def test_extend_diffeo_factors(rho, factor):
    emb = geo.extend_diffeo(rho, S0, S0)
    x = np.linspace(-2, 2, 11)
    assert np.allclose(emb.omega_l(x), factor)
    assert np.allclose(emb.omega_r(x), factor)


def test_extend_diffeo_identity_map():
    emb = geo.extend_diffeo(fns.identity_diffeo(), S0, S0)
    u = np.linspace(-2, 2, 7)
    cu, cv = emb.chi(u, u[::-1])
    assert np.allclose(cu, u) and np.allclose(cv, u[::-1])


def test_commuting_square_on_surface():
    dst = geo.CauchySurface(fns.sine_diffeo(0.2))
    rho = fns.sine_diffeo(0.3)
    emb = geo.extend_diffeo(rho, S0, dst)
    s = np.linspace(-3, 3, 61)
    cu, cv = emb.chi(-s, s)
    assert np.allclose(cu, -rho(s), atol=1e-12)
    assert np.allclose(cv, dst.gamma(rho(s)), atol=1e-12)


def test_dilation_constant_graphs():
    one = fns.constant(1.0)
    rho = geo.dilation_diffeo(one, one)
    x = np.linspace(-3, 3, 13)
    assert np.allclose(rho(x), 4 * x, atol=1e-10)
    assert np.allclose(rho.margin(one, x), 8.0)


def test_dilation_unequal_graphs():
    # ledger: with density 2(1/t+ + 1/t-) the margins are 12 and 6
    tp, tm = fns.constant(2.0), fns.constant(1.0)
    rho = geo.dilation_diffeo(tp, tm)
    x = np.linspace(-3, 3, 13)
    assert np.allclose(rho(x), 3 * x, atol=1e-10)
    assert np.allclose(rho.margin(tp, x), 12.0)
    assert np.allclose(rho.margin(tm, x), 6.0)


def test_dilation_rejects_non_spacelike_graph():
    with pytest.raises(geo.GeometryError):
        geo.dilation_diffeo(fns.expr_function("2 + 1.5*sin(x)"), fns.constant(1.0))


def test_cauchy_development_diamond():
    D = geo.cauchy_development(S0, (0.0, 1.0))
    assert D.kind == "diamond"
    assert D.box == pytest.approx((-1.0, 0.0, 0.0, 1.0))
    with pytest.raises(geo.GeometryError):
        geo.cauchy_development(S0, (1.0, 1.0))


def test_causal_disjointness():
    A = geo.cauchy_development(S0, (0.0, 1.0))
    B = geo.cauchy_development(S0, (2.0, 3.0))
    assert geo.causally_disjoint(A, B)
    assert not geo.causally_disjoint(A, A)
    assert not geo.causally_disjoint(A, geo.cauchy_development(S0, (0.2, 0.5)))
