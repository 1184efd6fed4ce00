"""Chiral Poisson bracket, truncated star product, Gaussian states, OPE and scaling fits.

All kernels here act on the flat variable chi = psi * sqrt(gamma'), where they
are translation invariant. surface_kernel() gives the psi-frame version.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy as sp

from .exact import Exact, I, ONE, PI, ZERO
from .fields import LocalField, flat_configuration
from .functional import (AlgebraError, Functional, base, contract, evaluate, self_contract)
from .functions import Fn, bump, constant
from .geometry import CauchySurface, standard_surface
from .kernels import (KernelExpr, SmoothKernel, boundary_value, delta, pair, smooth, _S, _T)

N_MAX = 4
# -1/(4 pi)
W_COEFF = Exact.from_parts(Fraction(-1, 4), -1, 0)


def _psi_frame(kernel: KernelExpr, surface: CauchySurface) -> KernelExpr:
    w = surface.gamma.derivative(1) ** -0.5
    from .kernels import KernelTerm
    return KernelExpr(KernelTerm(t.shape, t.coeff, (w, w)) for t in kernel.terms)


class ChiralCommutator:
    """E = -1/2 delta'(s - s'), so that <E, f (x) g> = -1/2 int f g'."""

    def __init__(self):
        self.kernel = delta(1, Fraction(-1, 2))

    def surface_kernel(self, surface: CauchySurface) -> KernelExpr:
        return _psi_frame(self.kernel, surface)


class HadamardChiralKernel:
    """W = -1/(4 pi) (x + i0)^-2 plus an optional smooth symmetric shift."""

    def __init__(self, lambda_scale: float = 1.0, shift: KernelExpr | None = None):
        if lambda_scale <= 0:
            raise AlgebraError("scale must be positive")
        self.lambda_scale = lambda_scale
        # rescaling Lambda shifts the bulk kernel by a constant with vanishing chiral derivative
        self.shift = shift if shift is not None else KernelExpr()
        self.kernel = boundary_value(2, 1, W_COEFF) + self.shift

    def surface_kernel(self, surface: CauchySurface) -> KernelExpr:
        return _psi_frame(self.kernel, surface)

    def symmetric_part(self) -> KernelExpr:
        return self.kernel.symmetric_part()

    def antisymmetric_part(self) -> KernelExpr:
        return self.kernel.antisymmetric_part()


def chiral_shift_from_bulk(expr) -> KernelExpr:
    """Smooth chiral kernel d_u d_u' h on the standard surface for a bulk shift h(u, v, u', v')."""
    u, v, u2, v2 = sp.symbols("u v u2 v2", real=True)
    if isinstance(expr, str):
        expr = sp.sympify(expr, locals={"u": u, "v": v, "u2": u2, "v2": v2})
    k = sp.diff(expr, u, u2).subs({u: -_S, v: _S, u2: -_T, v2: _T}, simultaneous=True)
    k = sp.simplify(k)
    if k == 0:
        return KernelExpr()
    return smooth(SmoothKernel(k))


def _kernel(K) -> KernelExpr:
    if isinstance(K, (ChiralCommutator, HadamardChiralKernel)):
        return K.kernel
    return K


class HbarSeries:
    """Truncated power series sum_k hbar^k c_k."""

    def __init__(self, coefficients, nmax: int = N_MAX):
        coeffs = list(coefficients)[: nmax + 1]
        self.nmax = nmax
        self.coefficients = coeffs + [None] * (nmax + 1 - len(coeffs))
        self.scalar = any(c is not None and not isinstance(c, Functional) for c in coeffs)

    @classmethod
    def of(cls, F, nmax: int = N_MAX) -> "HbarSeries":
        if isinstance(F, HbarSeries):
            return F
        return cls([F], nmax)

    def __getitem__(self, k: int):
        c = self.coefficients[k] if k <= self.nmax else None
        if c is None:
            return 0j if self.scalar else Functional.zero()
        return c

    def _zero(self):
        return 0j if self.scalar else Functional.zero()

    def __add__(self, other: "HbarSeries") -> "HbarSeries":
        n = min(self.nmax, other.nmax)
        out = HbarSeries([self[k] + other[k] for k in range(n + 1)], n)
        return out

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "HbarSeries":
        if self.scalar:
            return HbarSeries([self[k] * complex(Exact.coerce(c) if not isinstance(c, complex) else c)
                               for k in range(self.nmax + 1)], self.nmax)
        return HbarSeries([self[k].scale(c) for k in range(self.nmax + 1)], self.nmax)

    def is_zero(self) -> bool:
        if self.scalar:
            return all(self[k] == 0 for k in range(self.nmax + 1))
        return all(self[k].is_zero() for k in range(self.nmax + 1))

    def __eq__(self, other):
        if not isinstance(other, HbarSeries):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def value(self, hbar: float) -> complex:
        if not self.scalar:
            raise AlgebraError("numeric value needs a scalar series")
        return sum(self[k] * hbar ** k for k in range(self.nmax + 1))

    def __repr__(self):
        parts = [f"hbar^{k}: {self[k]!r}" for k in range(self.nmax + 1)
                 if (self[k] != 0 if self.scalar else not self[k].is_zero())]
        return "HbarSeries(" + ("; ".join(parts) or "0") + ")"

    def to_json(self) -> list:
        out = []
        for k in range(self.nmax + 1):
            c = self[k]
            if self.scalar:
                if c != 0:
                    out.append({"hbarPow": k, "re": c.real, "im": c.imag})
            elif not c.is_zero():
                out.append({"hbarPow": k, "terms": c.to_json()})
        return out


def poisson_bracket(F: Functional, G: Functional, E: ChiralCommutator | None = None) -> Functional:
    E = E or ChiralCommutator()
    return contract(F, G, _kernel(E), 1)


def star_product(F, G, W=None, order: int = N_MAX) -> HbarSeries:
    """sum_n hbar^n / n! <W^n, F^(n) (x) G^(n)>, truncated at hbar^order."""
    K = _kernel(W if W is not None else HadamardChiralKernel())
    A = HbarSeries.of(F, order)
    B = HbarSeries.of(G, order)
    out = [Functional.zero() for _ in range(order + 1)]
    for a in range(order + 1):
        Fa = A[a]
        if Fa.is_zero():
            continue
        for b in range(order + 1 - a):
            Gb = B[b]
            if Gb.is_zero():
                continue
            for n in range(order + 1 - a - b):
                term = contract(Fa, Gb, K, n) if n else Fa * Gb
                out[a + b + n] = out[a + b + n] + term
    return HbarSeries(out, order)


def commutator(F, G, W=None, order: int = N_MAX) -> HbarSeries:
    return star_product(F, G, W, order) - star_product(G, F, W, order)


@dataclass
class GaussianState:
    hadamard: HadamardChiralKernel = field(default_factory=HadamardChiralKernel)
    psi: Fn | None = None
    surface: CauchySurface | None = None

    def chi(self):
        if self.psi is None:
            return None
        return flat_configuration(self.surface or standard_surface(), self.psi)


def gaussian_state_eval(state: GaussianState, A) -> HbarSeries:
    A = HbarSeries.of(A)
    chi = state.chi()
    return HbarSeries([evaluate(A[k], chi) for k in range(A.nmax + 1)], A.nmax)


def beta_transform(F, deltaH: KernelExpr) -> HbarSeries:
    """sum_n hbar^n / (2^n n!) <deltaH^n, F^(2n)>."""
    for t in deltaH.terms:
        if t.shape[0] != "smooth":
            raise AlgebraError("deltaH must be smooth")
        if not t.shape[1].is_symmetric():
            raise AlgebraError("deltaH must be symmetric")
    A = HbarSeries.of(F)
    out = [Functional.zero() for _ in range(A.nmax + 1)]
    for a in range(A.nmax + 1):
        if A[a].is_zero():
            continue
        out[a] = out[a] + A[a]
        if deltaH.is_zero():
            continue
        for n in range(1, A.nmax + 1 - a):
            term = self_contract(A[a], deltaH, n)
            if term.is_zero():
                break
            out[a + n] = out[a + n] + term
    return HbarSeries(out, A.nmax)


# ---------------------------------------------------------------- OPE

def _jet_poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for a, x in p.items():
        for b, y in q.items():
            k = tuple(sorted(a + b))
            out[k] = out.get(k, ZERO) + x * y
    return {k: v for k, v in out.items() if not v.is_zero()}


def _jet_poly_d(p: dict) -> dict:
    out: dict = {}
    for jet, c in p.items():
        for i in range(len(jet)):
            k = tuple(sorted(jet[:i] + (jet[i] + 1,) + jet[i + 1:]))
            out[k] = out.get(k, ZERO) + c
    return {k: v for k, v in out.items() if not v.is_zero()}


def _jet_str(jet) -> str:
    if not jet:
        return "1"
    return "*".join("psi" + "'" * a if a <= 3 else f"psi^({a})" for a in jet)


# named jet polynomials for reporting attached fields
BASIS_FIELDS = {
    "1": {(): ONE},
    "Psi": {(0,): ONE},
    "T": {(0, 0): Exact(Fraction(1, 2))},
    "T'": {(0, 1): ONE},
}


@dataclass
class OpeTerm:
    power: int
    hbar_pow: int
    field: dict  # jet tuple -> Exact, evaluated at s'

    def coefficient(self, basis) -> Exact | None:
        """lambda with field = lambda * basis, or None when not proportional."""
        if isinstance(basis, str):
            basis = BASIS_FIELDS[basis]
        if set(basis) != set(self.field):
            return None
        lam = None
        for jet, b in basis.items():
            q, p, m = b.monomial()
            # 1 / (q pi^p i^m), using 1/i = -i
            ratio = self.field[jet] * Exact.from_parts((-1) ** m / Fraction(q), -p, m)
            if lam is None:
                lam = ratio
            elif not (lam - ratio).is_zero():
                return None
        return lam

    def name(self) -> str:
        for nm in BASIS_FIELDS:
            if self.coefficient(nm) is not None:
                return nm
        return " + ".join(f"({c})*{_jet_str(j)}" for j, c in sorted(self.field.items()))

    def to_json(self) -> dict:
        nm = self.name()
        if nm in BASIS_FIELDS:
            coeff = self.coefficient(nm)
        else:
            coeff = ONE
        return {"power": self.power, "field": nm, "coefficient": coeff.to_json(self.hbar_pow)}


@dataclass
class OpeTable:
    fields: tuple
    terms: list

    def powers(self):
        return [t.power for t in self.terms]

    def term(self, power: int) -> OpeTerm | None:
        for t in self.terms:
            if t.power == power:
                return t
        return None

    def to_json(self) -> dict:
        return {"fields": list(self.fields), "terms": [t.to_json() for t in self.terms]}


def ope_extract(Fi: LocalField, Fj: LocalField, state: GaussianState | None = None) -> OpeTable:
    """Singular part of Fi(s) * Fj(s') as s -> s', coefficients as fields at s'.

    Only the most singular part of W (a pure pole in s - s') contributes at
    separated points; the smooth remainder and powers <= 0 are dropped.
    """
    if state is not None and state.surface is not None:
        g = state.surface.gamma
        if g.expr is None or sp.simplify(sp.diff(g.expr[0], g.expr[1], 2)) != 0:
            raise AlgebraError("OPE extraction is implemented on flat surfaces")
    acc: dict = {}
    for n, cn in Fi.monomials:
        for m, cm in Fj.monomials:
            for k in range(1, min(n, m) + 1):
                base_c = cn * cm * Exact(math.factorial(k) * math.comb(n, k) * math.comb(m, k)) * W_COEFF ** k
                left = {tuple([0] * (n - k)): ONE}
                right = {tuple([0] * (m - k)): ONE}
                for j in range(0, 2 * k):
                    p = 2 * k - j
                    attached = _jet_poly_mul(left, right)
                    coef = base_c * Exact(Fraction(1, math.factorial(j)))
                    key = (p, k)
                    cur = acc.setdefault(key, {})
                    for jet, c in attached.items():
                        cur[jet] = cur.get(jet, ZERO) + c * coef
                    left = _jet_poly_d(left)
                    if not left:
                        break
    terms = []
    for (p, k), poly in sorted(acc.items(), key=lambda kv: (-kv[0][0], kv[0][1])):
        poly = {j: c for j, c in poly.items() if not c.is_zero()}
        if poly:
            terms.append(OpeTerm(p, k, poly))
    powers = [t.power for t in terms]
    if len(set(powers)) != len(powers):
        raise AlgebraError("mixed hbar orders at one singular power")
    return OpeTable((Fi.name, Fj.name), terms)


# ---------------------------------------------------------------- scaling constraint

@dataclass
class ScalingFit:
    a: complex
    residual: float
    order: int
    exact: Exact | None
    hbar_pow: int | None

    def __iter__(self):
        return iter((self.a, self.residual))


def default_test_pairs():
    params = [(-0.3, 1.0, 0.2, 1.1), (0.0, 0.8, 0.5, 0.9), (0.4, 1.2, -0.1, 0.7),
              (-0.6, 0.9, -0.2, 1.3), (0.1, 0.6, 0.3, 0.6), (-0.2, 1.5, 0.6, 1.0)]
    return [(bump(a, r, label=f"f{i}"), bump(b, q, label=f"g{i}")) for i, (a, r, b, q) in enumerate(params)]


def _exact_local_coefficient(C: HbarSeries, f: Fn, g: Fn, K: int):
    """Exact a with the psi = 0 part of C equal to a * int f g^(K), else None."""
    total = None
    hp = None
    for k in range(C.nmax + 1):
        part = C[k].constant_part()
        for (verts, edges), c in part.terms.items():
            if edges or len(verts) != 1:
                return None, None
            smear = dict((uid, o) for uid, o in verts[0][0])
            if set(smear) != {f.uid, g.uid} or sum(smear.values()) != K:
                return None, None
            if hp is not None and hp != k:
                return None, None
            hp = k
            term = c * Exact((-1) ** smear[f.uid])
            total = term if total is None else total + term
    return (total if total is not None else ZERO), hp


def scaling_constraint_fit(Fi: LocalField, Fj: LocalField, W=None, pairs=None,
                           order: int = N_MAX) -> ScalingFit:
    """Fit the psi = 0 commutator kernel against a * delta^(mu_i + mu_j - 1)."""
    K = Fi.weight + Fj.weight - 1
    pairs = pairs or default_test_pairs()
    state = GaussianState(HadamardChiralKernel() if W is None else W)
    xs, ys = [], []
    exact_a, hp = None, None
    for idx, (f, g) in enumerate(pairs):
        C = commutator(Fi(f), Fj(g), W, order)
        if idx == 0:
            exact_a, hp = _exact_local_coefficient(C, f, g, K)
        ys.append(gaussian_state_eval(state, C).value(1.0))
        xs.append(pair(delta(K), f, g))
    x = np.array(xs, complex)
    y = np.array(ys, complex)
    ny = np.linalg.norm(y)
    if ny == 0:
        return ScalingFit(0j, 0.0, K, exact_a, hp)
    nx = np.vdot(x, x).real
    if nx == 0:
        raise AlgebraError("singular fit: the delta pairings vanish on every test pair")
    a = np.vdot(x, y) / nx
    res = float(np.linalg.norm(y - a * x) / ny)
    return ScalingFit(complex(a), res, K, exact_a, hp)
