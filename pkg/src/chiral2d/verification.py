"""Property suites run by `chiral2d verify <suite>`.

Each suite returns a list of checks {"name", "value", "tol", "pass"}.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import sympy as sp

from . import bulk, chiral_algebra as ca, fields, functions as fns, geometry as geo, kernels as kr
from .descriptors import random_configuration
from .exact import Exact, I, PI


def check(name: str, value, tol, ok: bool) -> dict:
    if isinstance(value, complex):
        value = {"re": value.real, "im": value.imag}
    elif isinstance(value, (np.floating, np.integer)):
        value = value.item()
    return {"name": name, "value": value, "tol": tol, "pass": bool(ok)}


def suite_roundtrip(rng) -> list:
    out = []
    x = fns._X
    s = np.linspace(-3, 3, 301)
    psi = fns.expr_function(sp.sin(x) * sp.exp(-x ** 2 / 4) + sp.Float(0.3), x)
    for name, surf in [("plane", geo.standard_surface()),
                       ("plane-sine", geo.CauchySurface(fns.sine_diffeo(0.3)))]:
        phi = fields.solve_from_chiral_data(surf, psi)
        err = float(np.max(np.abs(fields.chiral_derivative(surf, phi)(s) - psi(s))))
        out.append(check(f"roundtrip {name}", err, 1e-10, err < 1e-10))
        # independent: centred differences of the reconstructed values
        h = 1e-4
        g = surf.gamma(s)
        fd = (phi.value(-s + h, g) - phi.value(-s - h, g)) / (2 * h) * surf.gamma.d(s, 1) ** -0.5
        err = float(np.max(np.abs(fd - psi(s))))
        out.append(check(f"finite-difference {name}", err, 1e-7, err < 1e-7))
    cyl = geo.standard_surface(geo.CYLINDER)
    for name, e in [("cylinder cos", sp.cos(x)), ("cylinder zero mode", 0.7 + sp.cos(x) + 0.2 * sp.sin(2 * x))]:
        ps = fns.expr_function(e, x, periodic=geo.TWO_PI)
        phi = fields.solve_from_chiral_data(cyl, ps)
        err = float(np.max(np.abs(fields.chiral_derivative(cyl, phi)(s) - ps(s))))
        out.append(check(f"roundtrip {name} (p={phi.p:.12g})", err, 1e-10, err < 1e-10))
    return out


def _covariance_cases():
    S0 = geo.standard_surface()
    St = geo.CauchySurface(fns.sine_diffeo(0.3))
    rhos = [("id", fns.identity_diffeo(), S0), ("translation", fns.affine_diffeo(1.0, 0.5), S0),
            ("dilation 2", fns.affine_diffeo(2.0), S0), ("sine", fns.sine_diffeo(0.3), S0),
            ("id to sine surface", fns.identity_diffeo(), St)]
    sols = ["u", "u**2", "sin(u)", "exp(-u**2/4) + v**3"]
    return S0, rhos, sols


def suite_covariance(rng) -> list:
    out = []
    S0, rhos, sols = _covariance_cases()
    s = np.linspace(-3, 3, 401)
    for name, rho, dst in rhos:
        emb = geo.extend_diffeo(rho, S0, dst)
        worst = 0.0
        for e in sols:
            phi = fields.ExprBulk(e)
            lhs = fields.chiral_derivative(S0, fields.PulledBack(phi, emb))(s)
            rhs = fields.weighted_pullback(emb, 1, fields.chiral_derivative(dst, phi))(s)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        out.append(check(f"covariance square {name}", worst, 1e-10, worst < 1e-10))
    return out


def suite_dilation(rng) -> list:
    t = fns.expr_function(sp.exp(-fns._X ** 2), fns._X, label="exp(-x^2)")
    rho = geo.dilation_diffeo(t, t)
    x = np.linspace(-6, 6, 2001)
    m = rho.margin(t, x)
    worst = float(np.min(m) - 2)
    return [check("dilation margin - 2 (min over grid)", worst, 0.05, worst > 0.05)]


def suite_causality(rng) -> list:
    out = []
    f = fns.bump(-1.5, 0.8, label="f")
    g = fns.bump(1.0, 0.7, label="g")
    for n in (1, 2):
        for m in (1, 2):
            C = ca.commutator(fields.psi_power(n)(f), fields.psi_power(m)(g))
            out.append(check(f"[Psi^{n}(f), Psi^{m}(g)] = 0", repr(C), 0, C.is_zero()))
    S0 = geo.standard_surface()
    A = geo.cauchy_development(S0, f.support)
    B = geo.cauchy_development(S0, g.support)
    out.append(check("developments causally disjoint", None, 0, geo.causally_disjoint(A, B)))
    return out


def random_solution(rng) -> fields.DAlembert:
    x = fns._X
    a, b, c, d = rng.normal(size=4)
    k1, k2 = rng.uniform(0.5, 2.0, size=2)
    phi_l = fns.expr_function(sp.Float(a) * sp.sin(sp.Float(k1) * x) + sp.Float(b) * x ** 2 / 4, x)
    phi_r = fns.expr_function(sp.Float(c) * sp.cos(sp.Float(k2) * x) + sp.Float(d) * x, x)
    return fields.DAlembert(phi_l, phi_r)


def suite_mollifier(rng) -> list:
    out = []
    s = np.linspace(-2, 2, 81)
    S0 = geo.standard_surface()
    sols = [random_solution(rng) for _ in range(20)]
    for w in (0.3, 0.1, 0.03):
        D = bulk.MollifiedChiralDerivative(S0, w)
        worst = 0.0
        for phi in sols:
            a = bulk.mollified_chiral_derivative(D, phi)(s)
            b = fields.chiral_derivative(S0, phi)(s)
            worst = max(worst, float(np.max(np.abs(a - b))))
        out.append(check(f"on-shell mollifier width {w}", worst, 1e-8, worst < 1e-8))
    f = fns.bump(0.0, 1.0, label="f")
    g = fns.bump(0.3, 0.9, label="g")
    for w in (0.3, 0.1, 0.03):
        rep = bulk.commutator_consistency(bulk.MollifiedChiralDerivative(S0, w), None, f, g)
        out.append(check(f"(d x d)E = E_Sigma width {w}", rep["error"], 1e-8, rep["pass"]))
    return out


def suite_scaling(rng) -> list:
    out = []
    for k in range(5):
        d = kr.scaling_degree(kr.delta(k))
        out.append(check(f"tagged degree delta^({k})", d, 0, d == k + 1))
    for name, K, target in [("delta'", kr.delta(1), 2), ("FP(1/x^2)", kr.principal_value(2), 2),
                            ("FP(1/x^4)", kr.principal_value(4), 4)]:
        d = kr.numeric_scaling_degree(K)
        out.append(check(f"numeric degree {name}", d, 0.05, abs(d - target) <= 0.05))
    for A, B, K in [(fields.PSI, fields.PSI, 1), (fields.STRESS, fields.STRESS, 3)]:
        fit = ca.scaling_constraint_fit(A, B)
        out.append(check(f"fit {A.name},{B.name} on delta^({K}): a = {fit.exact} hbar^{fit.hbar_pow}",
                         fit.residual, 1e-10, fit.residual < 1e-10 and fit.order == K))
    return out


def suite_fourier(rng) -> list:
    out = []
    xis = np.concatenate([-np.geomspace(1e-2, 1e2, 500), np.geomspace(1e-2, 1e2, 500)])
    for n in (0, 1, 2):
        for label, alpha in [("-i pi", -I * PI), ("+i pi", I * PI), ("0", Exact(0)), ("1", Exact(1))]:
            ext = kr.extend_homogeneous(n, alpha)
            vals = np.array([kr.fourier_symbol(ext, x) for x in xis])
            zero_pos = bool(np.all(vals[xis > 0] == 0))
            zero_neg = bool(np.all(vals[xis < 0] == 0))
            cls = kr.classify_wavefront(ext)
            expect = {"-i pi": "positive-axis", "+i pi": "negative-axis"}.get(label, "both")
            consistent = cls == expect and zero_neg == (cls == "positive-axis") \
                and zero_pos == (cls == "negative-axis")
            out.append(check(f"n={n} alpha={label}: {cls}", None, 0, consistent))
        ext = kr.extend_homogeneous(n, Exact(1))
        worst = 0.0
        for xi in (-3.0, -1.0, 1.0, 3.0):
            a = kr.fourier_numeric(ext, xi)
            b = kr.fourier_symbol(ext, xi)
            worst = max(worst, abs(a - b) / abs(b))
        out.append(check(f"numeric transform n={n}", worst, 1e-3, worst < 1e-3))
    return out


def suite_hadamard(rng) -> list:
    f = fns.bump(-2.0, 0.8, label="f")
    g = fns.bump(1.0, 0.7, label="g")
    W = ca.HadamardChiralKernel()
    a = bulk.hadamard_chiral_oracle(f, g)
    b = kr.pair(W.kernel, f, g)
    rel = abs(a - b) / abs(b)
    E = ca.ChiralCommutator().kernel
    anti = W.antisymmetric_part() == E.scale(I * Exact(Fraction(1, 2)))
    return [check("eps oracle vs W_Sigma (disjoint)", rel, 1e-4, rel < 1e-4),
            check("antisymmetric part = (i/2) E", repr(W.antisymmetric_part()), 0, anti)]


def _monomials():
    return [fields.psi_power(n) for n in (0, 1, 2)]


def suite_semiclassical(rng) -> list:
    out = []
    f = fns.bump(0.0, 1.0, label="f")
    g = fns.bump(0.4, 0.9, label="g")
    for A in _monomials():
        for B in _monomials():
            C = ca.commutator(A(f), B(g), order=1)
            pb = ca.poisson_bracket(A(f), B(g)).scale(I)
            out.append(check(f"hbar^1 [{A.name}, {B.name}] = i {{,}}", None, 0, C[1] == pb))
    return out


def suite_bracket(rng) -> list:
    out = []
    for i in range(5):
        c1, c2 = rng.uniform(-0.5, 0.5, size=2)
        r1, r2 = rng.uniform(0.6, 1.2, size=2)
        f = fns.bump(float(c1), float(r1), label=f"f{i}")
        g = fns.bump(float(c2), float(r2), label=f"g{i}")
        val = complex(fields.evaluate_functional(ca.poisson_bracket(fields.PSI(f), fields.PSI(g)),
                                                 geo.standard_surface(), None))
        ref = -0.5 * fns.integral(f * g.derivative(1))
        rel = abs(val - ref) / abs(ref)
        out.append(check(f"{{Psi(f{i}), Psi(g{i})}} = -1/2 int f g'", rel, 1e-10, rel < 1e-10))
        rep = bulk.canonical_bracket_check(f, g)
        out.append(check(f"canonical bracket pair {i}", rep["value"], 0, rep["match"]))
    return out


SUITES = {
    "bracket": suite_bracket,
    "causality": suite_causality,
    "covariance": suite_covariance,
    "dilation": suite_dilation,
    "fourier": suite_fourier,
    "hadamard": suite_hadamard,
    "mollifier": suite_mollifier,
    "roundtrip": suite_roundtrip,
    "scaling": suite_scaling,
    "semiclassical": suite_semiclassical,
}
