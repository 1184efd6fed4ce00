"""Bulk two-point kernels, the mollified chiral derivative and chiral-vs-bulk checks."""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy as sp
from scipy.integrate import IntegrationWarning, quad

from .exact import Exact, ZERO
from .fields import BulkConfiguration, evaluate_functional
from .functional import Functional, make_vertex, register
from .functions import Fn, _X, expr_function
from .geometry import MINKOWSKI, TWO_PI, CauchySurface, GeometryError, Point, Spacetime, standard_surface
from .kernels import _Correlation
from .quadrature import composite_nodes, integrate, integrate_from, richardson


class BulkError(ValueError):
    pass


class SlabError(BulkError):
    pass


def _sgn(x: float) -> int:
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class PauliJordanKernel:
    host: Spacetime = MINKOWSKI

    def n_img(self, du: float, dv: float) -> int:
        return math.ceil((abs(du) + abs(dv)) / TWO_PI) + 1


def pauli_jordan(E: PauliJordanKernel, x: Point, y: Point) -> float:
    """-1/4 (sgn(u - u') + sgn(v - v')), image-summed on the cylinder."""
    du, dv = x.u - y.u, x.v - y.v
    if not E.host.cylinder:
        return -0.25 * (_sgn(du) + _sgn(dv))
    n = E.n_img(du, dv)
    total = 0
    for k in range(-n, n + 1):
        total += _sgn(du - TWO_PI * k) + _sgn(dv + TWO_PI * k)
    return -0.25 * total


@dataclass(frozen=True)
class HadamardBulkKernel:
    epsilon: float = 1e-6
    lambda_scale: float = 1.0
    host: Spacetime = MINKOWSKI

    def __post_init__(self):
        if self.host.cylinder:
            raise BulkError("the bulk Hadamard kernel is implemented on subsets of Minkowski space")
        if self.lambda_scale <= 0 or self.epsilon < 0:
            raise BulkError("need epsilon >= 0 and Lambda > 0")


def hadamard_bulk(W: HadamardBulkKernel, x: Point, y: Point) -> complex:
    """-1/(4 pi) log((-du dv + i eps dt) / Lambda^2), principal branch."""
    du, dv = x.u - y.u, x.v - y.v
    dt = 0.5 * (du + dv)
    arg = (-du * dv + 1j * W.epsilon * dt) / W.lambda_scale ** 2
    if arg == 0 or (W.epsilon == 0 and arg.real < 0):
        raise BulkError("logarithm argument on the branch cut")
    return -cmath.log(arg) / (4 * math.pi)


# ---------------------------------------------------------------- W on the standard surface

_u, _v, _u2, _v2, _e = sp.symbols("u v u2 v2 epsilon", real=True)


def _restricted_kernel(form: str):
    """x -> (d_u d_u' W_eps) at (-x, x), (0, 0) as a complex numpy function of (x, eps)."""
    du, dv = _u - _u2, _v - _v2
    if form == "literal":
        expr = -sp.log(-du * dv + sp.I * _e * (du + dv) / 2) / (4 * sp.pi)
    elif form == "complexified":
        # log of the product -(du - i eps/2)(dv - i eps/2), equal to the literal
        # argument up to eps^2 / 4 but non-degenerate on t = const slices
        expr = -(sp.log(-(du - sp.I * _e / 2)) + sp.log(dv - sp.I * _e / 2)) / (4 * sp.pi)
    else:
        raise BulkError(f"unknown regularization {form!r}")
    k = sp.diff(expr, _u, _u2).subs({_u: -_X, _v: _X, _u2: 0, _v2: 0}, simultaneous=True)
    return sp.lambdify((_X, _e), sp.simplify(k), "numpy")


def hadamard_chiral_oracle(f: Fn, g: Fn, eps=None, form: str | None = None) -> complex:
    """Richardson-extrapolated <(d x d) W_eps restricted to the standard surface, f (x) g>.

    Overlapping supports need eps well above roundoff: the kernel grows like eps^-2 at 0.
    """
    a0, a1 = f.support
    b0, b1 = g.support
    lo, hi = a0 - b1, a1 - b0
    overlap = lo < 0 < hi
    if form is None:
        form = "complexified" if overlap else "literal"
    if eps is None:
        eps = (4e-3, 2e-3, 1e-3) if overlap else (4e-6, 2e-6, 1e-6)
    kern = _restricted_kernel(form)
    phi = _Correlation(f, g, 32)
    vals = []
    for e in eps:
        def part(x, fn):
            return fn(phi(x, 0)[0] * complex(kern(x, e)))
        pts = [0.0] if overlap else None
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            re = quad(lambda x: part(x, lambda z: z.real), lo, hi, points=pts, limit=1000,
                      epsabs=1e-14, epsrel=1e-12)[0]
            im = quad(lambda x: part(x, lambda z: z.imag), lo, hi, points=pts, limit=1000,
                      epsabs=1e-14, epsrel=1e-12)[0]
        vals.append(re + 1j * im)
    return complex(richardson(vals, eps, 1))


# ---------------------------------------------------------------- mollifier

_BUMP_Z = None


def _bump_mass() -> float:
    global _BUMP_Z
    if _BUMP_Z is None:
        y = sp.Symbol("y")
        _BUMP_Z = float(sp.Integral(sp.exp(-1 / (1 - y ** 2)), (y, -1, 1)).evalf(30))
    return _BUMP_Z


def nascent_delta(width: float) -> Fn:
    """exp(-1/(1 - (x/eps)^2)) / (eps Z), unit mass on [-eps, eps]."""
    y = _X / width
    expr = sp.exp(-1 / (1 - y ** 2)) / (width * _bump_mass())
    edge = width * 1e-6
    return expr_function(expr, _X, (-width, width), lambda x: np.abs(x) < width - edge,
                         label=f"delta_{width:g}")


@dataclass
class MollifiedChiralDerivative:
    surface: CauchySurface = field(default_factory=standard_surface)
    width: float = 0.1
    nascent: Fn | None = None
    panels: int = 8

    def __post_init__(self):
        if self.width <= 0:
            raise BulkError("mollifier width must be positive")
        if self.nascent is None:
            self.nascent = nascent_delta(self.width)


def _slab_check(D: MollifiedChiralDerivative, s: np.ndarray):
    host = D.surface.host
    if host.kind not in ("subset", "diamond"):
        return
    for si in np.linspace(s.min(), s.max(), 17):
        for w in (-D.width, 0.0, D.width):
            v = si + 2 * w
            p = Point(-si, float(D.surface.gamma(v)), D.surface.cylinder)
            if not host.contains(p):
                raise SlabError("mollifier slab leaves the host region; re-embed with a dilation first")


def mollified_chiral_derivative(D: MollifiedChiralDerivative, phi: BulkConfiguration) -> Fn:
    """s -> g'(s)^(-1/2) * 1/2 int (d_u phi)(-s, g(v)) delta_eps((v - s)/2) dv."""
    gam = D.surface.gamma
    # v = s + 2 w, dv = 2 dw
    ws, ww = composite_nodes(-D.width, D.width, D.panels, 32)
    dw = D.nascent(ws) * ww

    def tay(s, K):
        if K > 0:
            raise BulkError("the mollified derivative is tabulated by value only")
        _slab_check(D, s)
        v = s[:, None] + 2 * ws[None, :]
        vals = phi.du(np.broadcast_to(-s[:, None], v.shape), gam(v.ravel()).reshape(v.shape))
        out = vals @ dw
        return np.array([out * gam.d(s, 1) ** -0.5])
    return Fn(tay, None, f"d_eps({D.width:g})", max_order=0)


class BulkFunctional:
    """phi -> F[mollified chiral derivative of phi]."""

    def __init__(self, F: Functional, D: MollifiedChiralDerivative):
        self.F = F
        self.D = D

    def __call__(self, phi: BulkConfiguration) -> complex:
        psi = mollified_chiral_derivative(self.D, phi)
        return evaluate_functional(self.F, self.D.surface, psi)


def embed_chiral_observable(F: Functional, D: MollifiedChiralDerivative) -> BulkFunctional:
    return BulkFunctional(F, D)


# ---------------------------------------------------------------- bracket consistency

_SPECTRAL = {}


def _spectral_matrix(order: int) -> np.ndarray:
    """M[i, j] = int_{-1}^{x_i} L_j for the Lagrange basis on Gauss-Legendre nodes x."""
    if order not in _SPECTRAL:
        L = np.polynomial.legendre
        x, _ = L.leggauss(order)
        V = L.legvander(x, order - 1)
        coeffs = np.linalg.solve(V, np.eye(order))  # column j: Legendre coefficients of L_j
        M = np.empty((order, order))
        for j in range(order):
            anti = L.legint(coeffs[:, j], lbnd=-1)
            M[:, j] = L.legval(x, anti)
        _SPECTRAL[order] = M
    return _SPECTRAL[order]


def _sign_pair(A, B, lo: float, hi: float, h: float, order: int = 16) -> float:
    """int int A(x) B(y) sgn(x - y) dx dy = int A(x) (2 int_lo^x B - int B) dx.

    Panels of width <= h; inside a panel the partial integral of B uses the
    spectral integration matrix on the panel's own Gauss nodes.
    """
    n = max(1, math.ceil((hi - lo) / h))
    xs, wx = composite_nodes(lo, hi, n, order)
    half = 0.5 * (hi - lo) / n
    bx = B(xs).reshape(n, order)
    full = np.concatenate([[0.0], np.cumsum((wx.reshape(n, order) * bx).sum(axis=1))])
    part = (bx @ _spectral_matrix(order).T) * half
    cum = (full[:-1, None] + part).ravel()
    return float(np.sum(wx * A(xs) * (2 * cum - full[-1])))


def _smearing_marginals(f: Fn, D: MollifiedChiralDerivative, panels: int):
    """u and v marginals of h_f = -1/2 d_u [f(-u) delta_eps((u + v)/2)] as callables."""
    eps = D.width
    dl = D.nascent
    a, b = f.support

    def h(u, v):
        u, v = np.broadcast_arrays(u, v)
        shape = u.shape
        u, v = u.ravel(), v.ravel()
        w = 0.5 * (u + v)
        out = -0.5 * (-f.d(-u, 1) * dl(w) + 0.5 * f(-u) * dl.d(w, 1))
        return out.reshape(shape)

    ws, ww = composite_nodes(-eps, eps, panels, 16)
    t, wt = composite_nodes(0.0, 1.0, panels, 16)

    def H_u(us):
        us = np.atleast_1d(us)
        # v = 2 w - u, dv = 2 dw
        return (h(us[:, None], 2 * ws[None, :] - us[:, None]) * 2) @ ww

    def H_v(vs):
        vs = np.atleast_1d(vs)
        lo = np.maximum(-b, -vs - 2 * eps)
        hi = np.minimum(-a, -vs + 2 * eps)
        span = np.clip(hi - lo, 0.0, None)
        uu = lo[:, None] + span[:, None] * t[None, :]
        return (h(uu, np.broadcast_to(vs[:, None], uu.shape)) @ wt) * span

    return (H_u, (-b, -a)), (H_v, (a - 2 * eps, b + 2 * eps))


def bulk_bracket(f: Fn, g: Fn, D: MollifiedChiralDerivative, panels: int = 4) -> float:
    """<E, h_f (x) h_g> for the bulk smearings of the mollified Psi(f), Psi(g)."""
    (Huf, If), (Hvf, Jf) = _smearing_marginals(f, D, panels)
    (Hug, Ig), (Hvg, Jg) = _smearing_marginals(g, D, panels)
    h = D.width / panels
    su = _sign_pair(Huf, Hug, min(If[0], Ig[0]), max(If[1], Ig[1]), h)
    sv = _sign_pair(Hvf, Hvg, min(Jf[0], Jg[0]), max(Jf[1], Jg[1]), h)
    return -0.25 * (su + sv)


def commutator_consistency(D: MollifiedChiralDerivative, E: PauliJordanKernel | None, f: Fn, g: Fn,
                           tol: float = 1e-8) -> dict:
    from .chiral_algebra import ChiralCommutator
    from .kernels import pair
    E = E or PauliJordanKernel()
    if E.host.cylinder:
        raise BulkError("commutator consistency is implemented on Minkowski space")
    prev = None
    for panels in (2, 4, 8):
        val = bulk_bracket(f, g, D, panels)
        if prev is not None and abs(val - prev) <= 1e-12 * max(1.0, abs(val)):
            break
        prev = val
    chiral = pair(ChiralCommutator().kernel, f, g).real
    err = abs(val - chiral)
    return {"bulk": val, "chiral": chiral, "error": err, "pass": err <= tol * max(1.0, abs(chiral))}


class CanonicalLinear:
    """Linear combination of Phi(a) and Pi(b) with a, b derivatives of test functions."""

    def __init__(self, terms: dict | None = None):
        # (kind, uid, order) -> Exact
        self.terms = {k: Exact.coerce(c) for k, c in (terms or {}).items()}

    @classmethod
    def phi(cls, f: Fn, order: int = 0, c=1):
        register(f)
        return cls({("Phi", f.uid, order): c})

    @classmethod
    def pi(cls, f: Fn, order: int = 0, c=1):
        register(f)
        return cls({("Pi", f.uid, order): c})

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, ZERO) + c
        return CanonicalLinear(out)

    def scale(self, c):
        return CanonicalLinear({k: v * Exact.coerce(c) for k, v in self.terms.items()})


def canonical_bracket(A: CanonicalLinear, B: CanonicalLinear) -> Functional:
    """{Phi(a), Pi(b)} = int a b = -{Pi(b), Phi(a)}; other brackets vanish."""
    out = Functional.zero()
    for (ka, ua, oa), ca in A.terms.items():
        for (kb, ub, ob), cb in B.terms.items():
            if ka == kb:
                continue
            sign = 1 if ka == "Phi" else -1
            v = make_vertex([(ua, oa), (ub, ob)], [])
            out = out + Functional({((v,), ()): ca * cb * Exact(sign)})
    return out


def chiral_as_canonical(f: Fn) -> CanonicalLinear:
    """1/2 (Pi(f) + Phi(*df)) on the standard surface."""
    return (CanonicalLinear.pi(f) + CanonicalLinear.phi(f, 1)).scale(Fraction(1, 2))


def canonical_bracket_check(f: Fn, g: Fn) -> dict:
    from .chiral_algebra import poisson_bracket
    from .fields import PSI
    can = canonical_bracket(chiral_as_canonical(f), chiral_as_canonical(g))
    chi = poisson_bracket(PSI(f), PSI(g))
    value = complex(evaluate_functional(can, standard_surface(), None)).real
    return {"canonical": repr(can), "chiral": repr(chi), "match": can == chi, "value": value}
