"""Configurations, local fields and functionals on a Cauchy surface."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import sympy as sp

from .exact import Exact
from .functional import AlgebraError, Functional, base, evaluate, register
from .functions import Diffeo, Fn, antiderivative, constant, expr_function, identity_fn, _X
from .geometry import TWO_PI, CauchySurface, ConformalEmbedding, GeometryError, Spacetime
from .quadrature import composite_nodes, integrate

U, V = sp.symbols("u v", real=True)


class FieldError(ValueError):
    pass


# ---------------------------------------------------------------- test functions

def test_function(fn: Fn) -> Fn:
    """Validate a compactly supported smooth function."""
    if fn.support is None:
        raise FieldError("test functions need a finite support")
    a, b = fn.support
    w = b - a
    outside = np.concatenate([np.linspace(a - w, a, 64), np.linspace(b, b + w, 64)])
    if np.any(np.abs(fn(outside)) >= 1e-14):
        raise FieldError("function does not vanish outside its declared support")
    return fn


# ---------------------------------------------------------------- bulk configurations

class BulkConfiguration:
    """phi(u, v) with first partial derivatives."""

    cylinder = False

    def value(self, u, v):
        raise NotImplementedError

    def du(self, u, v):
        raise NotImplementedError

    def dv(self, u, v):
        raise NotImplementedError


class ExprBulk(BulkConfiguration):
    def __init__(self, expr, cylinder: bool = False):
        if isinstance(expr, str):
            expr = sp.sympify(expr, locals={"u": U, "v": V})
        self.expr = expr
        self.cylinder = cylinder
        self._f = sp.lambdify((U, V), expr, "numpy")
        self._fu = sp.lambdify((U, V), sp.diff(expr, U), "numpy")
        self._fv = sp.lambdify((U, V), sp.diff(expr, V), "numpy")

    def _ev(self, f, u, v):
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        return np.broadcast_to(f(u, v), np.broadcast_shapes(u.shape, v.shape)) * 1.0

    def value(self, u, v):
        return self._ev(self._f, u, v)

    def du(self, u, v):
        return self._ev(self._fu, u, v)

    def dv(self, u, v):
        return self._ev(self._fv, u, v)

    def duv(self, u, v):
        g = sp.lambdify((U, V), sp.diff(self.expr, U, V), "numpy")
        return self._ev(g, u, v)


class DAlembert(BulkConfiguration):
    """phi = phi_l(u) + phi_r(v) + (p / 2 pi)(u + v)."""

    def __init__(self, phi_l: Fn, phi_r: Fn | None = None, p: float = 0.0, cylinder: bool = False):
        self.phi_l = phi_l
        self.phi_r = phi_r if phi_r is not None else constant(0.0)
        self.p = float(p)
        self.cylinder = cylinder
        if not cylinder and self.p != 0.0:
            raise FieldError("the zero mode p is only meaningful on the cylinder")
        if cylinder:
            grid = np.linspace(0, TWO_PI, 257)
            for f in (self.phi_l, self.phi_r):
                if np.max(np.abs(f(grid + TWO_PI) - f(grid))) > 1e-9:
                    raise FieldError("phi_l and phi_r must be 2 pi periodic on the cylinder")

    def value(self, u, v):
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        return self.phi_l(u) + self.phi_r(v) + self.p / TWO_PI * (u + v)

    def du(self, u, v):
        u = np.asarray(u, float)
        return self.phi_l.d(u, 1) + self.p / TWO_PI + 0 * np.asarray(v, float)

    def dv(self, u, v):
        v = np.asarray(v, float)
        return self.phi_r.d(v, 1) + self.p / TWO_PI + 0 * np.asarray(u, float)


class PulledBack(BulkConfiguration):
    """chi^* phi for a conformal embedding chi."""

    def __init__(self, phi: BulkConfiguration, embedding: ConformalEmbedding):
        self.phi = phi
        self.embedding = embedding
        self.cylinder = phi.cylinder

    def value(self, u, v):
        cu, cv = self.embedding.chi(u, v)
        return self.phi.value(cu, cv)

    def du(self, u, v):
        cu, cv = self.embedding.chi(u, v)
        return self.phi.du(cu, cv) * self.embedding.omega_l(np.asarray(u, float))

    def dv(self, u, v):
        cu, cv = self.embedding.chi(u, v)
        return self.phi.dv(cu, cv) * self.embedding.omega_r(np.asarray(v, float))


def _neg(f: Fn) -> Fn:
    return f.compose(identity_fn() * -1.0)


def _check_host(surface: CauchySurface, phi: BulkConfiguration):
    if phi.cylinder != surface.cylinder:
        raise GeometryError("configuration and surface live on different spacetimes")


def chiral_derivative(surface: CauchySurface, phi: BulkConfiguration) -> Fn:
    """s -> gamma'(s)^(-1/2) (d_u phi)(-s, gamma(s))."""
    _check_host(surface, phi)
    gp = surface.gamma.derivative(1)
    period = TWO_PI if surface.cylinder else None
    if isinstance(phi, DAlembert):
        inner = _neg(phi.phi_l.derivative(1)) + phi.p / TWO_PI
        out = (gp ** -0.5) * inner
        out.periodic = period
        out.label = "psi"
        return out
    if isinstance(phi, ExprBulk) and surface.gamma.expr is not None:
        gexpr, gsym = surface.gamma.expr
        gexpr = gexpr.subs(gsym, _X)
        e = sp.diff(phi.expr, U).subs({U: -_X, V: gexpr}, simultaneous=True) / sp.sqrt(sp.diff(gexpr, _X))
        return expr_function(sp.simplify(e), _X, label="psi", periodic=period)

    def tay(s, K):
        if K > 0:
            raise FieldError("derivatives of this chiral configuration are not available")
        return np.array([surface.gamma.d(s, 1) ** -0.5 * phi.du(-s, surface.gamma(s))])
    return Fn(tay, None, "psi", max_order=0, periodic=period)


def anti_chiral_derivative(surface: CauchySurface, phi: BulkConfiguration) -> Fn:
    """s -> gamma'(s)^(1/2) (d_v phi)(-s, gamma(s))."""
    _check_host(surface, phi)

    def tay(s, K):
        if K > 0:
            raise FieldError("derivatives of the anti-chiral configuration are not available")
        return np.array([surface.gamma.d(s, 1) ** 0.5 * phi.dv(-s, surface.gamma(s))])
    return Fn(tay, None, "psibar", max_order=0)


def solve_from_chiral_data(surface: CauchySurface, psi: Fn) -> DAlembert:
    """A solution phi with chiral_derivative(surface, phi) = psi."""
    g = (surface.gamma.derivative(1) ** 0.5) * psi
    if not surface.cylinder:
        return DAlembert(antiderivative(_neg(g), 0.0, "phi_l"))
    grid = np.linspace(0, TWO_PI, 257)
    if np.max(np.abs(psi(grid + TWO_PI) - psi(grid))) > 1e-10:
        raise FieldError("chiral data on the cylinder must be 2 pi periodic")
    mean = integrate(lambda s: g(s), 0.0, TWO_PI) / TWO_PI
    phi_l = antiderivative(_neg(g) - mean, 0.0, "phi_l")
    return DAlembert(phi_l, None, TWO_PI * mean, cylinder=True)


# ---------------------------------------------------------------- pullbacks and pushforwards

def _omega(rho, omega: Fn | None) -> Fn:
    if omega is not None:
        return omega
    if isinstance(rho, ConformalEmbedding):
        return rho.omega_surface()
    return rho.derivative(1)


def _rho(rho) -> Diffeo:
    return rho.rho if isinstance(rho, ConformalEmbedding) else rho


def weighted_pullback(rho, mu, psi: Fn, omega: Fn | None = None) -> Fn:
    """s -> omega(s)^mu psi(rho(s))."""
    w = _omega(rho, omega)
    pulled = psi.compose(_rho(rho))
    if mu == 0:
        return pulled
    return (w ** mu) * pulled


def field_pushforward(rho, mu, f: Fn, omega_l: Fn | None = None) -> Fn:
    """(omega_l^(mu - 1) f) o rho^{-1}, supported on rho(supp f)."""
    r = _rho(rho)
    w = omega_l if omega_l is not None else r.derivative(1)
    if f.support is not None:
        grid = np.linspace(f.support[0], f.support[1], 257)
        if np.any(w(grid) <= 0):
            raise FieldError("rho is not invertible on the support of f")
    g = f if mu == 1 else (w ** (mu - 1)) * f
    sup = r.image(f.support)
    out = g.compose(r.inverse(), support=sup)
    out.label = f"push({f.label})"
    return out


class BulkTestFunction:
    """h(u, v) given by a sympy expression with a box support."""

    def __init__(self, expr, u_support: tuple, v_support: tuple):
        if isinstance(expr, str):
            expr = sp.sympify(expr, locals={"u": U, "v": V})
        self.expr = expr
        self.u_support = tuple(map(float, u_support))
        self.v_support = tuple(map(float, v_support))
        self._du = {}

    def du_k(self, k: int):
        if k not in self._du:
            self._du[k] = sp.lambdify((U, V), sp.diff(self.expr, U, k), "numpy")
        f = self._du[k]
        ua, ub = self.u_support
        va, vb = self.v_support

        def ev(u, v):
            u = np.asarray(u, float)
            v = np.asarray(v, float)
            inside = (u > ua) & (u < ub) & (v > va) & (v < vb)
            with np.errstate(all="ignore"):
                val = np.broadcast_to(f(u, v), inside.shape) * 1.0
            return np.where(inside, np.nan_to_num(val), 0.0)
        return ev

    def __call__(self, u, v):
        return self.du_k(0)(u, v)

    @classmethod
    def bump_product(cls, uc: float, ur: float, vc: float, vr: float) -> "BulkTestFunction":
        yu = (U - uc) / ur
        yv = (V - vc) / vr
        expr = sp.exp(-1 / (1 - yu ** 2)) * sp.exp(-1 / (1 - yv ** 2))
        return cls(expr, (uc - ur, uc + ur), (vc - vr, vc + vr))


def eta_average(U_region: Spacetime | None, surface: CauchySurface, h: BulkTestFunction,
                panels: int = 32) -> Fn:
    """s -> int h(-s, v) dv."""
    if U_region is not None and U_region.kind in ("subset", "diamond"):
        from .geometry import Point
        us = np.linspace(*h.u_support, 9)[1:-1]
        vs = np.linspace(*h.v_support, 9)[1:-1]
        for u in us:
            for v in vs:
                if not U_region.contains(Point(u, v, surface.cylinder)):
                    raise FieldError("bulk test function is not supported inside the region")
    va, vb = h.v_support
    if not (math.isfinite(va) and math.isfinite(vb)):
        raise FieldError("unbounded v-support")
    nodes, weights = composite_nodes(va, vb, panels, 32)

    def tay(s, K):
        out = np.zeros((K + 1, s.size))
        for k in range(K + 1):
            vals = h.du_k(k)(-s[:, None], nodes[None, :])
            out[k] = (-1) ** k * (vals @ weights) / math.factorial(k)
        return out
    sup = (-h.u_support[1], -h.u_support[0])
    return Fn(tay, sup, "eta(h)")


# ---------------------------------------------------------------- local fields

class LocalField:
    """Unsmeared polynomial field sum_n c_n Psi^n; smearing gives a Functional."""

    def __init__(self, monomials, name: str = "field"):
        self.monomials = tuple((int(n), Exact.coerce(c)) for n, c in monomials)
        self.name = name

    def __call__(self, f: Fn) -> Functional:
        register(f)
        out = Functional.zero()
        for n, c in self.monomials:
            out = out + Functional.monomial(n, f, c)
        return out

    @property
    def weight(self):
        powers = {n for n, _ in self.monomials}
        if len(powers) != 1:
            raise FieldError("field is not homogeneous")
        return powers.pop()

    def is_unit(self) -> bool:
        return all(n == 0 for n, _ in self.monomials)

    def __repr__(self):
        return f"LocalField({self.name})"


def psi_power(n: int, c=1) -> LocalField:
    return LocalField([(n, c)], "Psi" if n == 1 else f"Psi^{n}")


PSI = psi_power(1)
STRESS = LocalField([(2, Fraction(1, 2))], "T")
UNIT_FIELD = LocalField([(0, 1)], "1")


def flat_configuration(surface: CauchySurface, psi: Fn) -> Fn:
    """chi = psi sqrt(gamma')."""
    return psi * (surface.gamma.derivative(1) ** 0.5)


def evaluate_functional(F: Functional, surface: CauchySurface, psi: Fn | None) -> complex:
    chi = None if psi is None else flat_configuration(surface, psi)
    return evaluate(F, chi)


def diffeo_action_on_functional(rho, F: Functional) -> Functional:
    """F o rho*_(1): each Psi^n(f) becomes Psi^n(field_pushforward(rho, n, f))."""
    from .functional import make_vertex
    out = Functional.zero()
    for t, c in F.terms.items():
        verts, edges = t
        if edges:
            raise AlgebraError("diffeo action is implemented for local functionals")
        new_verts = []
        for v in verts:
            if any(a != 0 for a in v[1]):
                raise AlgebraError("diffeo action expects monomials without chi derivatives")
            fn = None
            for uid, k in v[0]:
                piece = base(uid).derivative(k)
                fn = piece if fn is None else fn * piece
            pushed = field_pushforward(rho, len(v[1]), fn)
            register(pushed)
            new_verts.append(make_vertex([(pushed.uid, 0)], v[1]))
        out = out + Functional({(tuple(new_verts), ()): c})
    return out
