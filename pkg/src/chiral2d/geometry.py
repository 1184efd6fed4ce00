"""Null-coordinate spacetimes, Cauchy surfaces as graphs, conformal embeddings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .functions import Diffeo, Fn, RootFindError, antiderivative, identity_diffeo, identity_fn
from .quadrature import integrate_from, composite_nodes

TWO_PI = 2 * math.pi


class GeometryError(ValueError):
    pass


class NoIntersection(GeometryError):
    pass


@dataclass(frozen=True)
class Point:
    u: float
    v: float
    cylinder: bool = False

    def __post_init__(self):
        if self.cylinder:
            x = 0.5 * (self.v - self.u)
            n = math.floor(x / TWO_PI)
            if n:
                object.__setattr__(self, "u", self.u + TWO_PI * n)
                object.__setattr__(self, "v", self.v - TWO_PI * n)

    @classmethod
    def from_tx(cls, t: float, x: float, cylinder: bool = False) -> "Point":
        return cls(t - x, t + x, cylinder)

    @property
    def t(self) -> float:
        return 0.5 * (self.u + self.v)

    @property
    def x(self) -> float:
        return 0.5 * (self.v - self.u)


@dataclass(frozen=True, eq=False)
class Spacetime:
    """kind is one of minkowski, cylinder, subset, diamond.

    subset: region lower(x) < t < upper(x) of parent (either graph may be None).
    diamond: open null box ulo < u < uhi, vlo < v < vhi of parent.
    """

    kind: str
    parent: Optional["Spacetime"] = None
    lower: Optional[Fn] = None
    upper: Optional[Fn] = None
    box: Optional[tuple] = None
    grid: np.ndarray = field(default_factory=lambda: np.linspace(-10, 10, 1024))

    def __post_init__(self):
        if self.kind not in ("minkowski", "cylinder", "subset", "diamond"):
            raise GeometryError(f"unknown spacetime kind {self.kind!r}")
        if self.kind in ("subset", "diamond") and self.parent is None:
            raise GeometryError(f"{self.kind} needs a parent spacetime")
        if self.kind == "subset":
            g = self.grid
            for b in (self.lower, self.upper):
                if b is not None and np.any(np.abs(b.d(g, 1)) >= 1):
                    raise GeometryError("boundary graph is not spacelike on the grid")
            if self.lower is not None and self.upper is not None:
                if np.any(self.lower(g) >= self.upper(g)):
                    raise GeometryError("lower boundary must lie below the upper boundary")
        if self.kind == "diamond":
            ulo, uhi, vlo, vhi = self.box
            if not (ulo < uhi and vlo < vhi):
                raise GeometryError("empty null box")

    @property
    def cylinder(self) -> bool:
        return self.kind == "cylinder" or (self.parent is not None and self.parent.cylinder)

    def contains(self, p: Point) -> bool:
        if self.kind in ("minkowski", "cylinder"):
            return True
        if not self.parent.contains(p):
            return False
        if self.kind == "subset":
            t, x = p.t, p.x
            if self.lower is not None and not t > self.lower(x):
                return False
            if self.upper is not None and not t < self.upper(x):
                return False
            return True
        ulo, uhi, vlo, vhi = self.box
        if self.cylinder:
            return any(ulo < p.u - TWO_PI * n < uhi and vlo < p.v + TWO_PI * n < vhi
                       for n in range(-3, 4))
        return ulo < p.u < uhi and vlo < p.v < vhi


MINKOWSKI = Spacetime("minkowski")
CYLINDER = Spacetime("cylinder")


def truncated(T: float, parent: Spacetime = MINKOWSKI) -> Spacetime:
    """The region t < T."""
    from .functions import constant
    return Spacetime("subset", parent, None, constant(float(T)))


class CauchySurface:
    """Sigma = {(-s, gamma(s))}."""

    def __init__(self, gamma: Diffeo | None = None, host: Spacetime = MINKOWSKI,
                 domain: tuple = (-math.inf, math.inf), grid=None):
        self.gamma = gamma if gamma is not None else identity_diffeo()
        self.host = host
        self.cylinder = host.cylinder
        self.domain = domain
        if grid is None:
            lo = domain[0] if math.isfinite(domain[0]) else -10.0
            hi = domain[1] if math.isfinite(domain[1]) else 10.0
            if self.cylinder:
                lo, hi = 0.0, TWO_PI
            grid = np.linspace(lo, hi, 1024)
        if np.any(self.gamma.d(grid, 1) <= 0):
            raise GeometryError("gamma must be strictly increasing")
        if self.cylinder:
            if np.max(np.abs(self.gamma(grid + TWO_PI) - self.gamma(grid) - TWO_PI)) > 1e-10:
                raise GeometryError("cylinder surface needs gamma(s + 2 pi) = gamma(s) + 2 pi")
        if host.kind in ("subset", "diamond"):
            inner = grid[1:-1]
            if not all(host.contains(Point(-s, g)) for s, g in zip(inner, self.gamma(inner))):
                raise GeometryError("surface leaves its host spacetime")

    def gamma_prime(self) -> Fn:
        return self.gamma.derivative(1)

    def point(self, s: float) -> Point:
        return Point(-s, float(self.gamma(s)), self.cylinder)

    def in_domain(self, s) -> bool:
        return self.domain[0] < s < self.domain[1] or self.cylinder


def standard_surface(host: Spacetime = MINKOWSKI) -> CauchySurface:
    return CauchySurface(identity_diffeo(), host)


def null_project(surface: CauchySurface, p: Point, side: str) -> float:
    if side == "left":
        s = -p.u
        if surface.cylinder:
            return s % TWO_PI
        if not surface.in_domain(s):
            raise NoIntersection("point lies outside the domain of dependence")
        return s
    if side != "right":
        raise ValueError("side must be 'left' or 'right'")
    v = p.v
    if surface.cylinder:
        g0 = float(surface.gamma(0.0))
        v = g0 + (v - g0) % TWO_PI
    lo, hi = surface.domain
    if not surface.cylinder:
        if math.isfinite(lo) and v <= surface.gamma(lo):
            raise NoIntersection("point lies outside the domain of dependence")
        if math.isfinite(hi) and v >= surface.gamma(hi):
            raise NoIntersection("point lies outside the domain of dependence")
    try:
        return float(surface.gamma.inverse_values(v)[0])
    except RootFindError as exc:
        raise NoIntersection(str(exc)) from exc


def _neg_arg(f: Fn) -> Fn:
    """u -> f(-u)."""
    neg = identity_fn() * -1.0
    return f.compose(neg)


class ConformalEmbedding:
    """chi(u, v) = (-rho(-u), gt(rho(g^{-1}(v)))) with conformal factors."""

    def __init__(self, rho: Diffeo, src: CauchySurface, dst: CauchySurface):
        self.rho = rho
        self.src = src
        self.dst = dst
        self._ginv = src.gamma.inverse()
        rp = rho.derivative(1)
        self.omega_l = _neg_arg(rp)
        gtp = dst.gamma.derivative(1)
        inner = rho.compose(self._ginv)
        self.omega_r = gtp.compose(inner) * rp.compose(self._ginv) * (src.gamma.derivative(1).compose(self._ginv)) ** -1
        self._right = dst.gamma.compose(inner)

    def chi(self, u, v):
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        return -self.rho(-u), self._right(v)

    def omega_surface(self) -> Fn:
        """Factor on the surface: sqrt(omega_l omega_r) at (-s, gamma(s))."""
        rp = self.rho.derivative(1)
        gtp = self.dst.gamma.derivative(1).compose(self.rho)
        return (gtp * rp * rp * self.src.gamma.derivative(1) ** -1) ** 0.5

    def compose(self, other: "ConformalEmbedding") -> "ConformalEmbedding":
        """other o self."""
        return ConformalEmbedding(self.rho.then(other.rho), self.src, other.dst)


def extend_diffeo(rho: Diffeo, src: CauchySurface, dst: CauchySurface, grid=None) -> ConformalEmbedding:
    if grid is None:
        lo = src.domain[0] if math.isfinite(src.domain[0]) else -10.0
        hi = src.domain[1] if math.isfinite(src.domain[1]) else 10.0
        grid = np.linspace(lo, hi, 1024)
    if np.any(rho.d(grid, 1) <= 0):
        raise GeometryError("rho is not strictly increasing")
    if src.cylinder != dst.cylinder:
        raise GeometryError("source and target surfaces live on different spacetimes")
    img = rho(grid)
    if not src.cylinder:
        lo, hi = dst.domain
        if np.any(img <= lo) or np.any(img >= hi):
            raise GeometryError("rho does not map the source domain into the target domain")
    return ConformalEmbedding(rho, src, dst)


def escapes(embedding: ConformalEmbedding, region: Spacetime, points) -> Optional[Point]:
    """First sample point whose image under chi leaves region, else None."""
    for p in points:
        cu, cv = embedding.chi(p.u, p.v)
        q = Point(float(cu), float(cv), region.cylinder)
        if not region.contains(q):
            return p
    return None


class DilationDiffeo(Diffeo):
    """rho(x) = 2 int_0^x (1/t_plus + 1/t_minus)."""

    def __init__(self, t_plus: Fn, t_minus: Fn):
        self.t_plus = t_plus
        self.t_minus = t_minus
        self.density = (t_plus ** -1 + t_minus ** -1) * 2.0
        super().__init__(antiderivative(self.density, 0.0, "dilation"), label="dilation")

    def margin(self, t: Fn, x) -> np.ndarray:
        """rho(x + t(x)) - rho(x - t(x)), integrated directly to avoid cancellation."""
        x = np.atleast_1d(np.asarray(x, float))
        tt = t(x)
        nodes, weights = composite_nodes(-1.0, 1.0, 16)
        pts = x[:, None] + tt[:, None] * nodes[None, :]
        vals = self.density(pts.ravel()).reshape(pts.shape)
        return tt * np.sum(vals * weights[None, :], axis=1)


def dilation_diffeo(t_plus: Fn, t_minus: Fn, grid=None) -> DilationDiffeo:
    if grid is None:
        grid = np.linspace(-10, 10, 1024)
    for t in (t_plus, t_minus):
        vals = t(grid)
        if np.any(vals <= 0):
            raise GeometryError("boundary graphs must be positive")
        if np.any(np.abs(t.d(grid, 1)) >= 1):
            raise GeometryError("boundary graph is not spacelike")
    rho = DilationDiffeo(t_plus, t_minus)
    if not np.all(np.isfinite(rho.density(grid))):
        raise GeometryError("quadrature failure in the dilation density")
    return rho


def cauchy_development(surface: CauchySurface, interval: tuple) -> Spacetime:
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise GeometryError("empty subinterval")
    box = (-b, -a, float(surface.gamma(a)), float(surface.gamma(b)))
    return Spacetime("diamond", surface.host, box=box)


def _future_meets(A, B) -> bool:
    """Some point of box B is in the causal future of some point of box A."""
    return B[1] > A[0] and B[3] > A[2]


def causally_disjoint(A: Spacetime, B: Spacetime) -> bool:
    if A.kind != "diamond" or B.kind != "diamond":
        raise GeometryError("causally_disjoint expects null boxes")
    a, b = A.box, B.box
    shifts = [0]
    if A.cylinder or B.cylinder:
        span = max(a[1] - a[0], a[3] - a[2], b[1] - b[0], b[3] - b[2])
        reach = int(math.ceil((abs(a[0]) + abs(a[1]) + abs(b[0]) + abs(b[1]) + 4 * span) / TWO_PI)) + 2
        shifts = range(-reach, reach + 1)
    for n in shifts:
        bn = (b[0] - TWO_PI * n, b[1] - TWO_PI * n, b[2] + TWO_PI * n, b[3] + TWO_PI * n)
        if _future_meets(a, bn) or _future_meets(bn, a):
            return False
    return True
