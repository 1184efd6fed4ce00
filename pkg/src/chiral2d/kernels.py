"""Tagged distribution kernels in the difference variable x = s - s'.

Shapes:
    ("delta", k)        delta^(k)(x)
    ("fp", n)           PV(1/x) for n = 1, finite part of 1/x^n for n >= 2
    ("bv", n, side)     1/(x + side*i0)^n, side = +1 or -1
    ("smooth", h)       a two-variable SmoothKernel h(s, s')

Pairing convention: <c delta^(k)(s - s'), A (x) B> = int (-1)^k A^(k)(s) B(s) ds.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
import sympy as sp
from scipy.integrate import quad

from .exact import Exact, I, PI, ZERO
from .functions import Fn, intersect, support_empty
from .quadrature import QuadratureError, composite_nodes, integrate, richardson

_S, _T = sp.symbols("s t", real=True)
_kuid = itertools.count(1)


class KernelError(ValueError):
    pass


class SmoothKernel:
    """A smooth two-variable kernel h(s, t) given by a sympy expression."""

    def __init__(self, expr, label: str | None = None, _transpose_of: "SmoothKernel | None" = None):
        if isinstance(expr, str):
            expr = sp.sympify(expr, locals={"s": _S, "t": _T})
        self.expr = sp.sympify(expr)
        self.label = label or str(self.expr)
        self.uid = next(_kuid)
        self._fn = sp.lambdify((_S, _T), self.expr, "numpy")
        self._transpose = _transpose_of
        self._derivs = {}

    def __call__(self, s, t):
        with np.errstate(all="ignore"):
            return np.broadcast_to(self._fn(np.asarray(s, float), np.asarray(t, float)),
                                   np.broadcast_shapes(np.shape(s), np.shape(t)))

    def is_symmetric(self) -> bool:
        return sp.simplify(self.expr - self.expr.subs({_S: _T, _T: _S}, simultaneous=True)) == 0

    def transpose(self) -> "SmoothKernel":
        if self._transpose is None:
            if self.is_symmetric():
                self._transpose = self
            else:
                self._transpose = SmoothKernel(self.expr.subs({_S: _T, _T: _S}, simultaneous=True),
                                               f"({self.label})^T", self)
        return self._transpose

    def derivative(self, a: int, b: int) -> "SmoothKernel":
        """d_s^a d_t^b h."""
        if (a, b) == (0, 0):
            return self
        if (a, b) not in self._derivs:
            self._derivs[(a, b)] = SmoothKernel(sp.diff(self.expr, _S, a, _T, b),
                                                f"d{a},{b}({self.label})")
        return self._derivs[(a, b)]

    def diagonal(self) -> Fn:
        from .functions import expr_function, _X
        return expr_function(self.expr.subs({_S: _X, _T: _X}, simultaneous=True), _X,
                             label=f"diag({self.label})")

    def __repr__(self):
        return f"SmoothKernel({self.label})"


def shape_key(shape) -> tuple:
    """Orderable key for a shape."""
    tag = shape[0]
    if tag == "delta":
        return (0, shape[1], 0)
    if tag == "fp":
        return (1, shape[1], 0)
    if tag == "bv":
        return (2, shape[1], shape[2])
    return (3, shape[1].uid, 0)


def shape_degree(shape):
    tag = shape[0]
    if tag == "delta":
        return shape[1] + 1
    if tag in ("fp", "bv"):
        return shape[1]
    return 0


def shape_transpose(shape):
    """Shape and sign under s <-> s'."""
    tag = shape[0]
    if tag == "delta":
        return shape, (-1) ** shape[1]
    if tag == "fp":
        return shape, (-1) ** shape[1]
    if tag == "bv":
        return ("bv", shape[1], -shape[2]), (-1) ** shape[1]
    return ("smooth", shape[1].transpose()), 1


def shape_derivative(shape, a: int, b: int):
    """(d_s^a d_s'^b shape) as (coefficient, shape)."""
    tag = shape[0]
    if tag == "smooth":
        return Fraction(1), ("smooth", shape[1].derivative(a, b))
    # d_s' = -d_x on functions of x = s - s'
    sign = (-1) ** b
    m = a + b
    if tag == "delta":
        return Fraction(sign), ("delta", shape[1] + m)
    n = shape[1]
    # d^m x^{-n} = (-1)^m n (n+1) ... (n+m-1) x^{-n-m}, also for PV/FP and boundary values
    c = Fraction((-1) ** m * math.prod(range(n, n + m)))
    if tag == "fp":
        return sign * c, ("fp", n + m)
    return sign * c, ("bv", n + m, shape[2])


def sokhotski(n: int, side: int) -> Exact:
    """Coefficient c with 1/(x + side i0)^n = FP(1/x^n) + c delta^(n-1)."""
    return Exact.from_parts(Fraction(-side * (-1) ** (n - 1), math.factorial(n - 1)), 1, 1)


@dataclass(frozen=True)
class KernelTerm:
    shape: tuple
    coeff: Exact = Exact(1)
    prefactor: Optional[tuple] = None  # separable (a, b): a(s) b(s')

    def pre_key(self):
        return None if self.prefactor is None else (self.prefactor[0].uid, self.prefactor[1].uid)


class KernelExpr:
    """Finite sum of kernel terms in canonical (merged, sorted) form."""

    def __init__(self, terms=()):
        merged: dict = {}
        protos: dict = {}
        for t in terms:
            if not isinstance(t, KernelTerm):
                raise TypeError("KernelExpr takes KernelTerm entries")
            key = (shape_key(t.shape), t.pre_key())
            merged[key] = merged.get(key, ZERO) + t.coeff
            protos[key] = t
        self.terms = tuple(
            KernelTerm(protos[k].shape, c, protos[k].prefactor)
            for k, c in sorted(merged.items(), key=lambda kv: (kv[0][0], kv[0][1] or (0, 0)))
            if not c.is_zero())

    def __add__(self, other: "KernelExpr") -> "KernelExpr":
        return KernelExpr(self.terms + other.terms)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "KernelExpr":
        c = Exact.coerce(c)
        return KernelExpr(KernelTerm(t.shape, t.coeff * c, t.prefactor) for t in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def expanded(self) -> "KernelExpr":
        out = []
        for t in self.terms:
            if t.shape[0] == "bv":
                n, side = t.shape[1], t.shape[2]
                out.append(KernelTerm(("fp", n), t.coeff, t.prefactor))
                out.append(KernelTerm(("delta", n - 1), t.coeff * sokhotski(n, side), t.prefactor))
            else:
                out.append(t)
        return KernelExpr(out)

    def recombined(self) -> "KernelExpr":
        """Fold FP(n) + c delta^(n-1) pairs back into boundary values where exact."""
        terms = list(self.expanded().terms)
        used = set()
        out = []
        for i, t in enumerate(terms):
            if t.shape[0] != "fp" or i in used:
                continue
            n = t.shape[1]
            for j, d in enumerate(terms):
                if j in used or d.shape != ("delta", n - 1) or d.pre_key() != t.pre_key():
                    continue
                for side in (1, -1):
                    if d.coeff == t.coeff * sokhotski(n, side):
                        out.append(KernelTerm(("bv", n, side), t.coeff, t.prefactor))
                        used.update((i, j))
                        break
                if i in used:
                    break
        out.extend(t for k, t in enumerate(terms) if k not in used)
        return KernelExpr(out)

    def transpose(self) -> "KernelExpr":
        out = []
        for t in self.terms:
            shape, sign = shape_transpose(t.shape)
            pre = None if t.prefactor is None else (t.prefactor[1], t.prefactor[0])
            out.append(KernelTerm(shape, t.coeff * sign, pre))
        return KernelExpr(out)

    def symmetric_part(self) -> "KernelExpr":
        return (self + self.transpose()).scale(Fraction(1, 2)).expanded()

    def antisymmetric_part(self) -> "KernelExpr":
        return (self - self.transpose()).scale(Fraction(1, 2)).expanded()

    def equals(self, other: "KernelExpr") -> bool:
        return (self.expanded() - other.expanded()).is_zero()

    def __eq__(self, other):
        if not isinstance(other, KernelExpr):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def __repr__(self):
        if not self.terms:
            return "KernelExpr(0)"
        return " + ".join(f"({t.coeff})*{_shape_str(t.shape)}" for t in self.terms)

    def to_json(self) -> list:
        out = []
        for t in self.terms:
            item = {"coefficient": t.coeff.to_json(), "prefactor": None}
            tag = t.shape[0]
            item["shape"] = {"delta": "DeltaDeriv", "fp": "PrincipalValue",
                             "bv": "BoundaryValue", "smooth": "Smooth"}[tag]
            if tag == "delta":
                item["order"] = t.shape[1]
            elif tag == "fp":
                item["power"] = t.shape[1]
            elif tag == "bv":
                item["power"] = t.shape[1]
                item["side"] = "+i0" if t.shape[2] > 0 else "-i0"
            else:
                item["expr"] = str(t.shape[1].expr)
            if t.prefactor is not None:
                item["prefactor"] = [t.prefactor[0].label, t.prefactor[1].label]
            out.append(item)
        return out

    @classmethod
    def from_json(cls, items) -> "KernelExpr":
        terms = []
        for it in items:
            if it.get("prefactor") is not None:
                raise KernelError("prefactor descriptors cannot be rebuilt from labels")
            c = Exact.from_json(it["coefficient"])
            kind = it["shape"]
            if kind == "DeltaDeriv":
                shape = ("delta", int(it["order"]))
            elif kind == "PrincipalValue":
                shape = ("fp", int(it["power"]))
            elif kind == "BoundaryValue":
                shape = ("bv", int(it["power"]), 1 if it["side"] == "+i0" else -1)
            elif kind == "Smooth":
                shape = ("smooth", SmoothKernel(it["expr"]))
            else:
                raise KernelError(f"unknown shape {kind!r}")
            terms.append(KernelTerm(shape, c))
        return cls(terms)


def _shape_str(shape) -> str:
    tag = shape[0]
    if tag == "delta":
        return f"delta^({shape[1]})"
    if tag == "fp":
        return "PV(1/x)" if shape[1] == 1 else f"FP(1/x^{shape[1]})"
    if tag == "bv":
        return f"1/(x{'+' if shape[2] > 0 else '-'}i0)^{shape[1]}"
    return f"smooth[{shape[1].label}]"


def delta(k: int = 0, coeff=1, prefactor=None) -> KernelExpr:
    return KernelExpr([KernelTerm(("delta", k), Exact.coerce(coeff), prefactor)])


def principal_value(n: int = 1, coeff=1, prefactor=None) -> KernelExpr:
    if n < 1:
        raise KernelError("power must be >= 1")
    return KernelExpr([KernelTerm(("fp", n), Exact.coerce(coeff), prefactor)])


def boundary_value(n: int, side: int, coeff=1, prefactor=None) -> KernelExpr:
    if n < 1 or side not in (1, -1):
        raise KernelError("boundary value needs n >= 1 and side = +1 or -1")
    return KernelExpr([KernelTerm(("bv", n, side), Exact.coerce(coeff), prefactor)])


def smooth(handle, coeff=1, prefactor=None) -> KernelExpr:
    if not isinstance(handle, SmoothKernel):
        handle = SmoothKernel(handle)
    return KernelExpr([KernelTerm(("smooth", handle), Exact.coerce(coeff), prefactor)])


ZERO_KERNEL = KernelExpr()


def scaling_degree(kernel: KernelExpr):
    degs = [shape_degree(t.shape) for t in kernel.terms]
    return max(degs) if degs else -math.inf


# ---------------------------------------------------------------- pairing

class _Correlation:
    """Phi^(k)(x) = int A^(k)(s' + x) B(s') ds', inner rule on the overlap of supports."""

    def __init__(self, A: Fn, B: Fn, panels: int, order: int = 32):
        if A.support is None or B.support is None:
            raise KernelError("singular pairing needs compactly supported arguments")
        self.A, self.B = A, B
        self.t, self.w = composite_nodes(0.0, 1.0, panels, order)

    def __call__(self, x, k: int):
        x = np.atleast_1d(np.asarray(x, float))
        a0, a1 = self.A.support
        b0, b1 = self.B.support
        lo = np.maximum(b0, a0 - x)
        hi = np.minimum(b1, a1 - x)
        span = np.clip(hi - lo, 0.0, None)
        pts = lo[:, None] + span[:, None] * self.t[None, :]
        flat = pts.ravel()
        av = self.A.taylor(flat + np.repeat(x, self.t.size), k)[k].reshape(pts.shape) * math.factorial(k)
        bv = self.B(flat).reshape(pts.shape)
        return np.sum(av * bv * self.w[None, :], axis=1) * span


def _fp_pair(n: int, A: Fn, B: Fn, rel: float = 1e-12) -> complex:
    a0, a1 = A.support
    b0, b1 = B.support
    X = max(abs(a0 - b1), abs(a1 - b0))
    if X == 0:
        return 0.0
    k = n - 1
    prev = None
    for panels in (16, 32, 64, 128):
        phi = _Correlation(A, B, panels)
        xs, ws = composite_nodes(0.0, X, panels, 32)
        vals = (phi(xs, k) - phi(-xs, k)) / xs
        val = np.sum(ws * vals) / math.factorial(k)
        if prev is not None and abs(val - prev) <= rel * max(abs(val), 1e-300) + 1e-15:
            return complex(val)
        prev = val
    raise QuadratureError("finite-part pairing did not converge")


def _delta_pair(k: int, A: Fn, B: Fn) -> complex:
    sup = intersect(A.support, B.support)
    if sup is None:
        raise KernelError("delta pairing needs a compact support")
    if support_empty(sup):
        return 0.0
    f = lambda x: (-1) ** k * A.d(x, k) * B(x)
    return complex(integrate(f, sup[0], sup[1], rel=1e-14))


def _smooth_pair(h: SmoothKernel, A: Fn, B: Fn) -> complex:
    if A.support is None or B.support is None:
        raise KernelError("smooth pairing needs compact supports")
    prev = None
    for panels in (8, 16, 32, 64, 128):
        xs, wx = composite_nodes(*A.support, panels)
        ys, wy = composite_nodes(*B.support, panels)
        H = h(xs[:, None], ys[None, :])
        val = (wx * A(xs)) @ H @ (wy * B(ys))
        if prev is not None and abs(val - prev) <= 1e-13 * max(abs(val), 1e-300) + 1e-16:
            return complex(val)
        prev = val
    raise QuadratureError("smooth kernel pairing did not converge")


def pair_shape(shape, A: Fn, B: Fn) -> complex:
    tag = shape[0]
    if tag == "delta":
        return _delta_pair(shape[1], A, B)
    if tag == "fp":
        return _fp_pair(shape[1], A, B)
    if tag == "bv":
        n, side = shape[1], shape[2]
        return _fp_pair(n, A, B) + complex(sokhotski(n, side)) * _delta_pair(n - 1, A, B)
    return _smooth_pair(shape[1], A, B)


def _absorb(t: KernelTerm, f: Fn, g: Fn):
    if t.prefactor is None:
        return f, g
    return t.prefactor[0] * f, t.prefactor[1] * g


def pair(kernel: KernelExpr, f: Fn, g: Fn) -> complex:
    total = 0j
    for t in kernel.terms:
        A, B = _absorb(t, f, g)
        total += complex(t.coeff) * pair_shape(t.shape, A, B)
    return total


def _regularized_shape(shape, A: Fn, B: Fn, eps: float) -> complex:
    """Pairing with 1/(x +- i eps)^n in place of the singular shape."""
    tag, n = shape[0], shape[1]
    phi = _Correlation(A, B, 32)
    a0, a1 = A.support
    b0, b1 = B.support
    lo, hi = a0 - b1, a1 - b0
    k = n - 1
    sides = (shape[2],) if tag == "bv" else (1, -1)
    total = 0j
    for side in sides:
        def re(x, side=side):
            return (phi(x, k)[0] / (x + 1j * side * eps)).real

        def im(x, side=side):
            return (phi(x, k)[0] / (x + 1j * side * eps)).imag
        pts = [0.0] if lo < 0 < hi else None
        r = quad(re, lo, hi, points=pts, limit=800, epsabs=1e-13, epsrel=1e-12)[0]
        i = quad(im, lo, hi, points=pts, limit=800, epsabs=1e-13, epsrel=1e-12)[0]
        total += r + 1j * i
    total /= len(sides)
    # 1/(x + i eps)^n = (-1)^k / k! d^k 1/(x + i eps); move derivatives onto Phi
    return total / math.factorial(k)


def pair_regularized(kernel: KernelExpr, f: Fn, g: Fn,
                     eps=(1e-2, 5e-3, 2.5e-3, 1.25e-3)) -> complex:
    """Independent i*eps evaluation of singular terms with Richardson extrapolation."""
    total = 0j
    for t in kernel.terms:
        A, B = _absorb(t, f, g)
        if t.shape[0] in ("fp", "bv"):
            vals = [_regularized_shape(t.shape, A, B, e) for e in eps]
            total += complex(t.coeff) * complex(richardson(vals, eps, 1))
        else:
            total += complex(t.coeff) * pair_shape(t.shape, A, B)
    return total


# ---------------------------------------------------------------- one-variable view

def pair1d(kernel: KernelExpr, phi: Fn) -> complex:
    """<u, phi> for the kernel read as a distribution in x = s - s'."""
    total = 0j
    for t in kernel.expanded().terms:
        tag = t.shape[0]
        c = complex(t.coeff)
        if t.prefactor is not None:
            phi_t = t.prefactor[0] * phi * complex(t.prefactor[1](0.0))
        else:
            phi_t = phi
        if tag == "delta":
            k = t.shape[1]
            total += c * (-1) ** k * complex(phi_t.d(0.0, k))
        elif tag == "fp":
            n = t.shape[1]
            k = n - 1
            if phi_t.support is None:
                raise KernelError("probe needs compact support")
            X = max(abs(phi_t.support[0]), abs(phi_t.support[1]))
            fk = lambda x: (phi_t.d(x, k) - phi_t.d(-x, k)) / x
            total += c * integrate(fk, 0.0, X, rel=1e-13, abs_tol=1e-300, panels=16, max_panels=1 << 16) / math.factorial(k)
        else:
            h = t.shape[1]
            lo, hi = phi_t.support
            total += c * integrate(lambda x: h(x, 0.0) * phi_t(x), lo, hi)
    return total


def scaled_probe(probe: Fn, lam: float) -> Fn:
    """x -> probe(x/lam)/lam."""
    def tay(x, K):
        c = probe.taylor(x / lam, K)
        return np.array([c[k] * lam ** (-k) / lam for k in range(K + 1)])
    sup = None if probe.support is None else (probe.support[0] * lam, probe.support[1] * lam)
    return Fn(tay, sup, f"{probe.label}_{lam:g}")


def default_probe() -> Fn:
    from .functions import bump, identity_fn
    b = bump(0.0, 1.0)
    return b * (identity_fn() + 1.0)


def numeric_scaling_degree(kernel: KernelExpr, probe: Fn | None = None,
                           lambdas=None) -> float:
    probe = probe if probe is not None else default_probe()
    lambdas = lambdas if lambdas is not None else [2.0 ** -j for j in range(11)]
    mags = []
    for lam in lambdas:
        m = abs(pair1d(kernel, scaled_probe(probe, lam)))
        if m == 0:
            raise KernelError("degenerate fit: pairing vanishes")
        mags.append(m)
    slope = np.polyfit(np.log(lambdas), np.log(mags), 1)[0]
    return float(-slope)


# ---------------------------------------------------------------- homogeneous extensions

def extend_homogeneous(n: int, alpha) -> KernelExpr:
    """FP(1/x^{n+1}) + alpha (-1)^n/n! delta^(n)."""
    if n < 0:
        raise KernelError("order must be >= 0")
    alpha = Exact.coerce(alpha)
    c = alpha * Fraction((-1) ** n, math.factorial(n))
    return (principal_value(n + 1) + delta(n, c)).recombined()


def extension_parameters(ext: KernelExpr):
    """Recover (n, alpha) from a kernel of the extend_homogeneous form."""
    terms = ext.expanded().terms
    fps = [t for t in terms if t.shape[0] == "fp"]
    if len(fps) != 1 or fps[0].coeff != 1 or fps[0].prefactor is not None:
        raise KernelError("not a homogeneous extension")
    n = fps[0].shape[1] - 1
    rest = [t for t in terms if t is not fps[0]]
    if any(t.shape != ("delta", n) or t.prefactor is not None for t in rest):
        raise KernelError("not a homogeneous extension")
    c = rest[0].coeff if rest else ZERO
    alpha = c * Fraction((-1) ** n * math.factorial(n))
    return n, alpha


def fourier_symbol_exact(ext: KernelExpr, sign: int) -> Exact:
    """The bracket alpha - i pi sgn(xi) of the closed form, exactly."""
    _, alpha = extension_parameters(ext)
    return alpha - I * PI * sign


def fourier_symbol(ext: KernelExpr, xi: float) -> complex:
    """((-i xi)^n / n!) (alpha - i pi sgn xi), with u^(xi) = int u(x) e^{-i xi x} dx."""
    n, _ = extension_parameters(ext)
    xi = float(xi)
    sgn = (xi > 0) - (xi < 0)
    bracket = fourier_symbol_exact(ext, sgn)
    if bracket.is_zero():
        return 0j
    return (-1j * xi) ** n / math.factorial(n) * complex(bracket)


def classify_wavefront(ext: KernelExpr) -> str:
    """Frequency support of the symbol: positive-axis, negative-axis or both."""
    pos = not fourier_symbol_exact(ext, 1).is_zero()
    neg = not fourier_symbol_exact(ext, -1).is_zero()
    if pos and neg:
        return "both"
    return "positive-axis" if pos else "negative-axis"


def fourier_numeric(ext: KernelExpr, xi: float, width: float = 50.0) -> complex:
    """<u, e^{-i xi x} w(x)> with a wide Gaussian window, w(x) = exp(-x^2 / (2 width^2))."""
    from .functions import expr_function, _X
    cut = width * math.sqrt(2 * 40)
    expr = sp.exp(-sp.I * sp.Float(xi) * _X) * sp.exp(-_X ** 2 / (2 * sp.Float(width) ** 2))
    phi = expr_function(expr, _X, (-cut, cut), label=f"wave({xi:g})")
    return pair1d(ext, phi)
