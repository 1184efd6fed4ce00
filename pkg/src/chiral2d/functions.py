"""Smooth functions of one variable with Taylor-jet access.

A jet at points x is an array c of shape (K+1, N) with c[k] = f^(k)(x)/k!.
Products, compositions, powers and monotone inverses are computed on jets,
so derivatives of pushforwards and pullbacks are exact to rounding.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Optional, Sequence

import numpy as np
import sympy as sp

from .quadrature import integrate, integrate_from

_uid = itertools.count(1)

Support = Optional[tuple]


class RootFindError(RuntimeError):
    pass


def _as_array(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


def series_mul(a, b):
    K = min(a.shape[0], b.shape[0]) - 1
    out = np.zeros((K + 1,) + np.broadcast_shapes(a.shape[1:], b.shape[1:]),
                   dtype=np.result_type(a, b))
    for k in range(K + 1):
        for j in range(k + 1):
            out[k] = out[k] + a[j] * b[k - j]
    return out


def series_compose(outer, inner):
    """Jet of F(g) from F's jet at g(x) and g's jet at x."""
    K = inner.shape[0] - 1
    delta = inner.copy()
    delta[0] = 0
    out = np.zeros_like(np.broadcast_to(outer[:1], (K + 1,) + outer.shape[1:]),
                    dtype=np.result_type(outer, inner))
    out[0] = outer[0]
    power = None
    for j in range(1, K + 1):
        power = delta if power is None else series_mul(power, delta)
        out = out + outer[j] * power
    return out


def series_power(c, alpha):
    """Jet of g**alpha (g > 0 or integer alpha)."""
    K = c.shape[0] - 1
    g0 = c[0]
    outer = np.empty_like(c, dtype=np.result_type(c, float))
    coeff = 1.0
    for j in range(K + 1):
        outer[j] = coeff * g0 ** (alpha - j)
        coeff *= (alpha - j) / (j + 1)
    return series_compose(outer, c)


def series_invert(c):
    """Given the jet of rho at x0, return the jet of rho^{-1} at rho(x0)."""
    K = c.shape[0] - 1
    q = np.zeros_like(c)
    q[0] = 0
    if K >= 1:
        q[1] = 1.0 / c[1]
    for k in range(2, K + 1):
        acc = np.zeros_like(c[0])
        power = None
        for j in range(1, k + 1):
            power = q if power is None else series_mul(power, q)
            acc = acc + c[j] * power[k]
        q[k] = -acc / c[1]
    return q


def jet_to_derivs(c):
    return np.array([c[k] * math.factorial(k) for k in range(c.shape[0])])


def intersect(a: Support, b: Support) -> Support:
    if a is None:
        return b
    if b is None:
        return a
    lo, hi = max(a[0], b[0]), min(a[1], b[1])
    return (lo, hi) if lo < hi else (lo, lo)


def hull(a: Support, b: Support) -> Support:
    if a is None or b is None:
        return None
    return (min(a[0], b[0]), max(a[1], b[1]))


def support_empty(s: Support) -> bool:
    return s is not None and not s[0] < s[1]


class Fn:
    """A smooth function given by its jet map (x, K) -> (K+1, N) array."""

    def __init__(self, taylor: Callable, support: Support = None, label: str = "fn",
                 max_order: int | None = None, periodic: float | None = None, expr=None):
        self._taylor = taylor
        self.support = None if support is None else (float(support[0]), float(support[1]))
        self.label = label
        self.max_order = max_order
        self.periodic = periodic
        self.expr = expr
        self.uid = next(_uid)

    def taylor(self, x, order: int = 0):
        if self.max_order is not None and order > self.max_order:
            raise ValueError(f"{self.label}: derivatives above order {self.max_order} unavailable")
        x = _as_array(x)
        return self._taylor(x, order)

    def __call__(self, x):
        return self.d(x, 0)

    def d(self, x, k: int = 1):
        shape = np.shape(x)
        out = self.taylor(np.ravel(x), k)[k] * math.factorial(k)
        return out[0] if not shape else out.reshape(shape)

    def derivative(self, k: int = 1) -> "Fn":
        if k == 0:
            return self

        def tay(x, K):
            c = self.taylor(x, K + k)
            return np.array([c[j + k] * math.factorial(j + k) / math.factorial(j)
                             for j in range(K + 1)])

        return Fn(tay, self.support, f"{self.label}^({k})",
                  None if self.max_order is None else self.max_order - k, self.periodic)

    def __mul__(self, other):
        if not isinstance(other, Fn):
            c = other
            return Fn(lambda x, K: c * self.taylor(x, K), self.support, self.label,
                      self.max_order, self.periodic)
        return Fn(lambda x, K: series_mul(self.taylor(x, K), other.taylor(x, K)),
                  intersect(self.support, other.support), f"({self.label}*{other.label})",
                  _min_order(self.max_order, other.max_order))

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, Fn):
            c = other

            def tay(x, K):
                t = self.taylor(x, K).astype(np.result_type(float, type(c)))
                t[0] = t[0] + c
                return t
            return Fn(tay, None, self.label, self.max_order, self.periodic)
        return Fn(lambda x, K: self.taylor(x, K) + other.taylor(x, K),
                  hull(self.support, other.support), f"({self.label}+{other.label})",
                  _min_order(self.max_order, other.max_order))

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __pow__(self, alpha):
        return Fn(lambda x, K: series_power(self.taylor(x, K), alpha),
                  self.support if alpha > 0 else None, f"{self.label}^{alpha}", self.max_order)

    def compose(self, inner: "Fn", support: Support = None) -> "Fn":
        """self o inner."""
        def tay(x, K):
            ci = inner.taylor(x, K)
            co = self.taylor(ci[0].real, K)
            return series_compose(co, ci)
        return Fn(tay, support, f"{self.label}o{inner.label}",
                  _min_order(self.max_order, inner.max_order))

    def restricted(self, support: Support) -> "Fn":
        """Same function with a declared support."""
        return Fn(self._taylor, support, self.label, self.max_order, self.periodic, self.expr)

    def __repr__(self):
        return f"Fn({self.label})"


def _min_order(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


_X = sp.Symbol("x", real=True)


class _ExprJet:
    """Lazily lambdified derivatives of a sympy expression."""

    def __init__(self, expr, sym):
        self.expr = expr
        self.sym = sym
        self._derivs = []
        self._fns = []

    def fn(self, k: int):
        while len(self._fns) <= k:
            j = len(self._fns)
            e = self.expr if j == 0 else sp.diff(self._derivs[-1], self.sym)
            self._derivs.append(e)
            f = sp.lambdify(self.sym, e, "numpy")
            self._fns.append(f)
        return self._fns[k]


def expr_function(expr, sym=None, support: Support = None, mask: Callable | None = None,
                  label: str | None = None, periodic: float | None = None) -> Fn:
    """Fn from a sympy expression; mask(x) selects where the expression is evaluated."""
    if isinstance(expr, str):
        sym = sym or _X
        expr = sp.sympify(expr, locals={"x": sym})
    sym = sym if sym is not None else _X
    jet = _ExprJet(expr, sym)
    is_complex = bool(expr.has(sp.I))

    def tay(x, K):
        out = np.zeros((K + 1, x.size), dtype=complex if is_complex else float)
        sel = np.ones(x.shape, bool) if mask is None else mask(x)
        if support is not None:
            sel &= (x > support[0]) & (x < support[1])
        xs = x[sel]
        with np.errstate(all="ignore"):
            for k in range(K + 1):
                v = jet.fn(k)(xs)
                v = np.broadcast_to(v, xs.shape)
                out[k, sel] = np.nan_to_num(v / math.factorial(k), nan=0.0, posinf=0.0, neginf=0.0) \
                    if support is not None else v / math.factorial(k)
        return out

    return Fn(tay, support, label or str(expr), periodic=periodic, expr=(expr, sym))


def constant(c: float) -> Fn:
    def tay(x, K):
        out = np.zeros((K + 1, x.size), dtype=np.result_type(float, type(c)))
        out[0] = c
        return out
    return Fn(tay, None, f"{c}")


def identity_fn() -> Fn:
    def tay(x, K):
        out = np.zeros((K + 1, x.size))
        out[0] = x
        if K >= 1:
            out[1] = 1.0
        return out
    return Fn(tay, None, "id")


def bump(center: float = 0.0, radius: float = 1.0, amplitude: float = 1.0, label: str | None = None) -> Fn:
    """amplitude * exp(-1/(1 - y^2)), y = (x - center)/radius."""
    y = (_X - center) / radius
    expr = amplitude * sp.exp(-1 / (1 - y ** 2))
    a, b = center - radius, center + radius
    edge = radius * 1e-6

    def mask(x):
        return (x > a + edge) & (x < b - edge)

    return expr_function(expr, _X, (a, b), mask,
                         label=label or f"bump({center:g},{radius:g},{amplitude:g})")


def gaussian_poly(center: float = 0.0, width: float = 1.0, coeffs: Sequence[float] = (1.0,),
                  cutoff: float = 1e-16) -> Fn:
    """Polynomial times Gaussian, declared zero where the Gaussian drops below cutoff."""
    y = (_X - center) / width
    poly = sum(sp.Float(c) * y ** k for k, c in enumerate(coeffs))
    expr = poly * sp.exp(-y ** 2)
    r = width * math.sqrt(-math.log(cutoff))
    return expr_function(expr, _X, (center - r, center + r), label=f"gpoly({center:g},{width:g})")


def spline_function(samples, support: Support = None, degree: int = 5, periodic: float | None = None) -> Fn:
    from scipy.interpolate import make_interp_spline

    pts = np.asarray(samples, dtype=float)
    order = np.argsort(pts[:, 0])
    s, y = pts[order, 0], pts[order, 1]
    spl = make_interp_spline(s, y, k=min(degree, len(s) - 1))
    ders = [spl] + [spl.derivative(j) for j in range(1, spl.k + 1)]
    lo, hi = s[0], s[-1]

    def tay(x, K):
        out = np.zeros((K + 1, x.size))
        if periodic:
            xx = lo + np.mod(x - lo, periodic)
        else:
            xx = x
        inside = (xx >= lo) & (xx <= hi)
        for k in range(min(K, spl.k) + 1):
            out[k, inside] = ders[k](xx[inside]) / math.factorial(k)
        return out

    return Fn(tay, support, f"spline[{len(s)}]", periodic=periodic)


def antiderivative(g: Fn, x0: float = 0.0, label: str | None = None) -> Fn:
    """x -> int_{x0}^x g."""
    def tay(x, K):
        out = np.zeros((K + 1, x.size), dtype=float)
        out[0] = integrate_from(lambda t: np.real(g(t)), x0, x)
        if K >= 1:
            c = g.taylor(x, K - 1)
            for k in range(1, K + 1):
                out[k] = np.real(c[k - 1]) / k
        return out
    return Fn(tay, None, label or f"int({g.label})", g.max_order + 1 if g.max_order is not None else None)


class Diffeo(Fn):
    """Strictly increasing smooth map of an interval (default the real line)."""

    def __init__(self, fn: Fn, domain: tuple = (-math.inf, math.inf), label: str | None = None,
                 period_shift: float | None = None):
        super().__init__(fn._taylor, None, label or fn.label, fn.max_order, None, fn.expr)
        self.base = fn
        self.domain = domain
        # rho(s + P) = rho(s) + P on the cylinder lift
        self.period_shift = period_shift

    def inverse_values(self, y, tol: float = 1e-12, max_iter: int = 200):
        y = _as_array(y)
        lo = np.full(y.shape, -1.0)
        hi = np.full(y.shape, 1.0)
        dlo, dhi = self.domain
        if math.isfinite(dlo):
            lo[:] = dlo
        if math.isfinite(dhi):
            hi[:] = dhi
        for _ in range(200):
            bad = self(lo) > y
            if not bad.any():
                break
            if math.isfinite(dlo):
                raise RootFindError("value below the range of the diffeomorphism")
            lo[bad] = lo[bad] * 2 - 1
        for _ in range(200):
            bad = self(hi) < y
            if not bad.any():
                break
            if math.isfinite(dhi):
                raise RootFindError("value above the range of the diffeomorphism")
            hi[bad] = hi[bad] * 2 + 1
        x = 0.5 * (lo + hi)
        for _ in range(max_iter):
            c = self.taylor(x, 1)
            r = c[0] - y
            done = np.abs(r) <= tol * np.maximum(1.0, np.abs(y))
            if done.all():
                return x
            lo = np.where(r < 0, x, lo)
            hi = np.where(r > 0, x, hi)
            with np.errstate(all="ignore"):
                step = x - r / c[1]
            ok = (step > lo) & (step < hi) & np.isfinite(step)
            x = np.where(done, x, np.where(ok, step, 0.5 * (lo + hi)))
            if np.all(hi - lo <= 1e-15 * np.maximum(1.0, np.abs(x))) and not done.all():
                c0 = self(x) - y
                if np.all(np.abs(c0) <= 1e-10 * np.maximum(1.0, np.abs(y))):
                    return x
        raise RootFindError("monotone inversion did not converge in 200 iterations")

    def inverse(self) -> "Diffeo":
        def tay(y, K):
            x0 = self.inverse_values(y)
            c = self.taylor(x0, K)
            q = series_invert(c)
            q[0] = x0
            return q
        dom = (self(self.domain[0]) if math.isfinite(self.domain[0]) else -math.inf,
               self(self.domain[1]) if math.isfinite(self.domain[1]) else math.inf)
        return Diffeo(Fn(tay, None, f"inv({self.label})"), dom, period_shift=self.period_shift)

    def then(self, outer: "Diffeo") -> "Diffeo":
        """outer o self."""
        return Diffeo(outer.compose(self), self.domain, f"{outer.label}o{self.label}",
                      self.period_shift)

    def check_monotone(self, grid=None) -> bool:
        if grid is None:
            lo = self.domain[0] if math.isfinite(self.domain[0]) else -10.0
            hi = self.domain[1] if math.isfinite(self.domain[1]) else 10.0
            grid = np.linspace(lo, hi, 1024)
        return bool(np.all(self.d(grid, 1) > 0))

    def image(self, support: Support) -> Support:
        if support is None:
            return None
        return (float(self(support[0])), float(self(support[1])))


def diffeo_from_expr(expr, label=None, domain=(-math.inf, math.inf), period_shift=None) -> Diffeo:
    return Diffeo(expr_function(expr, label=label), domain, label, period_shift)


def identity_diffeo() -> Diffeo:
    return Diffeo(identity_fn(), label="id")


def affine_diffeo(scale: float = 1.0, shift: float = 0.0) -> Diffeo:
    if scale <= 0:
        raise ValueError("affine diffeomorphism needs a positive scale")
    return diffeo_from_expr(sp.Float(scale) * _X + sp.Float(shift), label=f"{scale:g}x+{shift:g}")


def sine_diffeo(amplitude: float, frequency: float = 1.0, phase: float = 0.0) -> Diffeo:
    if abs(amplitude * frequency) >= 1:
        raise ValueError("x + a sin(kx + c) is monotone only for |a k| < 1")
    period = 2 * math.pi / frequency if float(frequency).is_integer() else None
    return diffeo_from_expr(_X + sp.Float(amplitude) * sp.sin(sp.Float(frequency) * _X + sp.Float(phase)),
                            label=f"x+{amplitude:g}sin({frequency:g}x+{phase:g})",
                            period_shift=period)


def spline_diffeo(samples) -> Diffeo:
    f = spline_function(samples)
    pts = np.asarray(samples, float)
    return Diffeo(f, (pts[:, 0].min(), pts[:, 0].max()), f"spline[{len(pts)}]")


def integral(f: Fn, a: float | None = None, b: float | None = None, **kw) -> complex:
    """int f over its support (or [a, b])."""
    if a is None or b is None:
        if f.support is None:
            raise ValueError("integral over the real line needs a support or explicit bounds")
        a, b = f.support
    if not a < b:
        return 0.0
    return integrate(lambda x: f(x), a, b, **kw)
