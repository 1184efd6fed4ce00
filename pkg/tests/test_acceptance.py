"""Acceptance criteria 1-13.

Each test records a PASS/FAIL line in RESULTS; conftest prints them after the run.
Run this file directly (python3 tests/test_acceptance.py) to get the same lines
without pytest.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from scipy import integrate

from chiral2d import bulk, chiral_algebra as ca, fields, functions as fns, geometry as geo, kernels as kr
from chiral2d.descriptors import random_configuration
from chiral2d.exact import Exact, I, PI
from chiral2d.functional import Functional
from chiral2d.verification import random_solution

RESULTS: dict[int, tuple[bool, str]] = {}

S0 = geo.standard_surface()


def record(n: int, ok: bool, detail: str):
    RESULTS[n] = (bool(ok), detail)
    assert ok, detail


def quad(fn, a, b):
    val, _ = integrate.quad(fn, a, b, epsabs=1e-14, epsrel=1e-13, limit=400)
    return val


def oracle_f_gprime(f, g):
    lo = max(f.support[0], g.support[0])
    hi = min(f.support[1], g.support[1])
    if lo >= hi:
        return 0.0
    return quad(lambda s: f(s) * g.d(s, 1), lo, hi)


# 1 ------------------------------------------------------------------

BUMP_PAIRS = [(-0.3, 1.0, 0.2, 1.1), (0.0, 0.8, 0.5, 0.9), (0.4, 1.2, -0.1, 0.7),
              (-0.6, 0.9, -0.2, 1.3), (0.1, 0.6, 0.3, 0.6)]


def test_criterion_01_chiral_commutator():
    worst = 0.0
    anti = True
    for i, (a, r, b, q) in enumerate(BUMP_PAIRS):
        f = fns.bump(a, r, label=f"a{i}")
        g = fns.bump(b, q, label=f"b{i}")
        F, G = fields.PSI(f), fields.PSI(g)
        br = ca.poisson_bracket(F, G)
        anti &= (br + ca.poisson_bracket(G, F)).is_zero()
        val = complex(fields.evaluate_functional(br, S0, None))
        ref = -0.5 * oracle_f_gprime(f, g)
        worst = max(worst, abs(val - ref) / abs(ref))
    record(1, worst < 1e-10 and anti, f"max rel err {worst:.2e}, antisymmetric {anti}")


# 2 ------------------------------------------------------------------

def test_criterion_02_tt_ope():
    table = ca.ope_extract(fields.STRESS, fields.STRESS)
    want = {
        4: ("1", Exact.from_parts(Fraction(1, 32), -2, 0), 2),
        2: ("T", Exact.from_parts(Fraction(2, 4), -1, 0), 1),
        1: ("T'", Exact.from_parts(Fraction(1, 4), -1, 0), 1),
    }
    bad = []
    if sorted(table.powers()) != sorted(want):
        bad.append(f"powers {table.powers()}")
    for p, (basis, c, hp) in want.items():
        t = table.term(p)
        got = None if t is None else t.coefficient(basis)
        if got is None or not (got - c).is_zero() or t.hbar_pow != hp:
            bad.append(f"power {p}: got {got} hbar^{None if t is None else t.hbar_pow}, want {c} hbar^{hp}")
    record(2, not bad, "; ".join(bad) or "three terms match exactly")


# 3 ------------------------------------------------------------------

def test_criterion_03_stress_generates_conformal():
    h = fns.bump(0.2, 1.2, label="h")
    f = fns.bump(-0.1, 0.9, label="f")
    br = ca.poisson_bracket(fields.STRESS(h), fields.PSI(f))
    target = Functional.smeared(1, [(h, 0), (f, 1)], -1)
    symbolic = br == target
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(5):
        psi = random_configuration(rng)
        val = complex(fields.evaluate_functional(br, S0, psi))
        ref = -quad(lambda s: h(s) * f.d(s, 1) * psi(s), -1.0, 1.4)
        worst = max(worst, abs(val - ref))
    record(3, symbolic and worst < 1e-9, f"symbolic identity {symbolic}, numeric max err {worst:.2e}")


# 4 ------------------------------------------------------------------

def test_criterion_04_covariance_square():
    rhos = [("id", fns.identity_diffeo()), ("translation", fns.affine_diffeo(1.0, 0.5)),
            ("dilation 2", fns.affine_diffeo(2.0)), ("s + 0.3 sin s", fns.sine_diffeo(0.3))]
    sols = ["u", "u**2", "sin(u)", "exp(-u**2/4) + v**3"]
    s = np.linspace(-3, 3, 401)
    worst = 0.0
    worst_fd = 0.0
    for _, rho in rhos:
        emb = geo.extend_diffeo(rho, S0, S0)
        for e in sols:
            phi = fields.ExprBulk(e)
            lhs = fields.chiral_derivative(S0, fields.PulledBack(phi, emb))(s)
            rhs = fields.weighted_pullback(emb, 1, fields.chiral_derivative(S0, phi))(s)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
            # oracle: centred difference of phi o chi along u at (-s, s)
            dh = 1e-5
            cp = emb.chi(-s + dh, s)
            cm = emb.chi(-s - dh, s)
            fd = (phi.value(*cp) - phi.value(*cm)) / (2 * dh)
            worst_fd = max(worst_fd, float(np.max(np.abs(fd - rhs))))
    record(4, worst < 1e-10 and worst_fd < 1e-5,
           f"grid max err {worst:.2e} (finite-difference oracle {worst_fd:.1e})")


# 5 ------------------------------------------------------------------

def test_criterion_05_dilation_lemma():
    t = fns.expr_function(sp.exp(-fns._X ** 2), fns._X)
    rho = geo.dilation_diffeo(t, t)
    x = np.linspace(-6, 6, 2001)
    margin = rho.margin(t, x)
    worst = float(np.min(margin) - 2)
    # oracle: rho' = 4 exp(x^2); integrate over x + t(x) sigma, sigma in [-1, 1]
    # (x +- t(x) collapses to x in floating point near |x| = 6)
    sub = x[::50]
    ref = np.array([quad(lambda sg, c=c: 4 * math.exp(-c * c) * math.exp((c + math.exp(-c * c) * sg) ** 2), -1, 1)
                    for c in sub])
    rel = float(np.max(np.abs(margin[::50] - ref) / ref))
    record(5, worst > 0.05 and rel < 1e-10, f"min margin - 2 = {worst:.4f}, oracle rel err {rel:.1e}")


# 6 ------------------------------------------------------------------

def test_criterion_06_chiral_causality():
    f = fns.bump(-1.5, 0.8, label="f")
    g = fns.bump(1.0, 0.7, label="g")
    zero = True
    for n in (0, 1, 2):
        for m in (0, 1, 2):
            zero &= ca.commutator(fields.psi_power(n)(f), fields.psi_power(m)(g)).is_zero()
    disjoint = geo.causally_disjoint(geo.cauchy_development(S0, f.support),
                                     geo.cauchy_development(S0, g.support))
    record(6, zero and disjoint, f"all commutators zero {zero}, developments disjoint {disjoint}")


# 7 ------------------------------------------------------------------

def test_criterion_07_mollifier():
    rng = np.random.default_rng(2024)
    s = np.linspace(-2, 2, 81)
    sols = [random_solution(rng) for _ in range(20)]
    worst = 0.0
    for w in (0.3, 0.1, 0.03):
        D = bulk.MollifiedChiralDerivative(S0, w)
        for phi in sols:
            got = bulk.mollified_chiral_derivative(D, phi)(s)
            ref = phi.phi_l.d(-s, 1)
            worst = max(worst, float(np.max(np.abs(got - ref))))
    f = fns.bump(0.0, 1.0, label="f")
    g = fns.bump(0.3, 0.9, label="g")
    ref = -0.5 * oracle_f_gprime(f, g)
    worst_e = 0.0
    for w in (0.3, 0.1, 0.03):
        val = bulk.bulk_bracket(f, g, bulk.MollifiedChiralDerivative(S0, w))
        worst_e = max(worst_e, abs(val - ref))
    record(7, worst < 1e-8 and worst_e < 1e-8,
           f"mollified vs sharp {worst:.2e}, smeared E vs E_Sigma {worst_e:.2e}")


# 8 ------------------------------------------------------------------

def test_criterion_08_scaling_degrees():
    tagged = all(kr.scaling_degree(kr.delta(k)) == k + 1 for k in range(6))
    nums = {name: kr.numeric_scaling_degree(K) for name, K in
            [("delta'", kr.delta(1)), ("FP(1/x^2)", kr.principal_value(2)), ("FP(1/x^4)", kr.principal_value(4))]}
    target = {"delta'": 2, "FP(1/x^2)": 2, "FP(1/x^4)": 4}
    ok = tagged and all(abs(nums[k] - target[k]) <= 0.05 for k in nums)
    record(8, ok, f"tagged exact {tagged}, numeric " + ", ".join(f"{k}={v:.3f}" for k, v in nums.items()))


# 9 ------------------------------------------------------------------

XIS = np.concatenate([-np.geomspace(1e-2, 1e2, 500), np.geomspace(1e-2, 1e2, 500)])


def _vanishes(ext, mask):
    return all(kr.fourier_symbol(ext, float(x)) == 0 for x in XIS[mask])


def test_criterion_09_extension_classification():
    bad = []
    alphas = [("-i pi", -I * PI), ("+i pi", I * PI), ("0", Exact(0)), ("1", Exact(1)),
              ("i pi / 2", I * PI * Exact(Fraction(1, 2)))]
    for n in (0, 1, 2):
        for label, alpha in alphas:
            ext = kr.extend_homogeneous(n, alpha)
            on_pos = _vanishes(ext, XIS > 0)
            on_neg = _vanishes(ext, XIS < 0)
            if on_pos != (label == "-i pi"):
                bad.append(f"n={n} alpha={label}: zero on R+ is {on_pos}")
            if on_neg != (label == "+i pi"):
                bad.append(f"n={n} alpha={label}: zero on R- is {on_neg}")
    worst = _numeric_symbol_error()
    if worst >= 1e-3:
        bad.append(f"numeric transform rel err {worst:.1e}")
    record(9, not bad, "; ".join(bad[:4]) + (" ..." if len(bad) > 4 else "") or "classification exact")


def _numeric_symbol_error():
    worst = 0.0
    for n in (0, 1, 2):
        ext = kr.extend_homogeneous(n, Exact(1))
        for xi in (-3.0, -1.0, 1.0, 3.0):
            a = kr.fourier_numeric(ext, xi)
            b = kr.fourier_symbol(ext, xi)
            worst = max(worst, abs(a - b) / abs(b))
    return worst


def test_criterion_09_numeric_transform_only():
    # the discrete-FT half of criterion 9 on its own
    assert _numeric_symbol_error() < 1e-3


# 10 -----------------------------------------------------------------

def test_criterion_10_hadamard_oracle():
    f = fns.bump(-2.0, 0.8, label="f")
    g = fns.bump(1.0, 0.7, label="g")
    W = ca.HadamardChiralKernel()
    a = bulk.hadamard_chiral_oracle(f, g)
    b = kr.pair(W.kernel, f, g)
    rel = abs(a - b) / abs(b)
    E = ca.ChiralCommutator().kernel
    anti = W.antisymmetric_part() == E.scale(I * Exact(Fraction(1, 2)))
    record(10, rel < 1e-4 and anti, f"oracle rel err {rel:.1e}, antisymmetric part = (i/2)E {anti}")


# 11 -----------------------------------------------------------------

def test_criterion_11_round_trip():
    x = fns._X
    s = np.linspace(-3, 3, 301)
    cases = [("plane", S0, fns.expr_function(sp.sin(x) * sp.exp(-x ** 2 / 4) + sp.Float(0.3), x)),
             ("plane sine surface", geo.CauchySurface(fns.sine_diffeo(0.3)), fns.expr_function(sp.cos(2 * x), x)),
             ("cylinder", geo.standard_surface(geo.CYLINDER), fns.expr_function(sp.cos(x), x, periodic=geo.TWO_PI)),
             ("cylinder zero mode", geo.standard_surface(geo.CYLINDER),
              fns.expr_function(0.7 + sp.cos(x) + 0.2 * sp.sin(2 * x), x, periodic=geo.TWO_PI))]
    worst = 0.0
    worst_fd = 0.0
    p_zero_mode = None
    for name, surf, psi in cases:
        phi = fields.solve_from_chiral_data(surf, psi)
        worst = max(worst, float(np.max(np.abs(fields.chiral_derivative(surf, phi)(s) - psi(s)))))
        dh = 1e-4
        gs = surf.gamma(s)
        fd = (phi.value(-s + dh, gs) - phi.value(-s - dh, gs)) / (2 * dh) * surf.gamma.d(s, 1) ** -0.5
        worst_fd = max(worst_fd, float(np.max(np.abs(fd - psi(s)))))
        if name == "cylinder zero mode":
            p_zero_mode = phi.p
    ok = worst < 1e-10 and worst_fd < 1e-7 and abs(p_zero_mode - 2 * math.pi * 0.7) < 1e-10
    record(11, ok, f"round trip {worst:.1e}, finite-difference {worst_fd:.1e}, zero mode p = {p_zero_mode:.6f}")


# 12 -----------------------------------------------------------------

def test_criterion_12_semiclassical_limit():
    f = fns.bump(0.0, 1.0, label="f")
    g = fns.bump(0.4, 0.9, label="g")
    ok = True
    for n in (0, 1, 2):
        for m in (0, 1, 2):
            A, B = fields.psi_power(n)(f), fields.psi_power(m)(g)
            ok &= ca.commutator(A, B, order=1)[1] == ca.poisson_bracket(A, B).scale(I)
    record(12, ok, "order-hbar coefficient equals i {,} for all 9 pairs" if ok else "mismatch")


# 13 -----------------------------------------------------------------

def test_criterion_13_scaling_constraint():
    psi_fit = ca.scaling_constraint_fit(fields.PSI, fields.PSI)
    tt_fit = ca.scaling_constraint_fit(fields.STRESS, fields.STRESS)
    # frozen by hand: i {Psi(f), Psi(g)} = -(i/2) int f g'; the hbar^2 TT jump is
    # 2 * (1/32 pi^2) * (i pi / 6) = i / (96 pi)
    ok = (psi_fit.order == 1 and tt_fit.order == 3
          and psi_fit.residual < 1e-10 and tt_fit.residual < 1e-10
          and abs(psi_fit.a - (-0.5j)) < 1e-10 and abs(tt_fit.a - 1j / (96 * math.pi)) < 1e-12
          and psi_fit.exact == Exact(Fraction(-1, 2)) * I
          and tt_fit.exact == Exact.from_parts(Fraction(1, 96), -1, 1))
    record(13, ok, f"Psi,Psi a={psi_fit.a:.6g} res {psi_fit.residual:.1e}; "
                   f"T,T a={tt_fit.a:.6g} res {tt_fit.residual:.1e}")


def report_lines() -> list[str]:
    return [f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
            for n, (ok, detail) in sorted(RESULTS.items())]


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_") and "only" not in name:
            t0 = time.perf_counter()
            try:
                fn()
            except AssertionError:
                pass
            print(f"  ({name}: {time.perf_counter() - t0:.1f} s)")
    print("\n".join(report_lines()))
