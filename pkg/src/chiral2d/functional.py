"""Symbolic polynomial functionals of the flat chiral variable chi = psi * sqrt(gamma').

A term is a graph. Each vertex is an integral over one surface variable of

    (product of derivatives of smearing functions) * (product of chi derivatives),

stored as (smear, jet) with smear a sorted tuple of (function uid, order) and
jet a sorted tuple of chi derivative orders. Edges (i, j, shape) carry a
kernel shape in s_i - s_j. In the chi variable every kernel is the flat one,
so the algebra does not depend on the surface.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterable

import numpy as np

from .exact import Exact, ZERO
from .functions import Fn, intersect, support_empty
from .kernels import (KernelExpr, pair_shape, shape_derivative, shape_key, shape_transpose,
                      sokhotski)
from .quadrature import composite_nodes, integrate


class AlgebraError(ValueError):
    pass


_BASES: dict = {}
_DIAGONALS: dict = {}


def register(fn: Fn) -> int:
    _BASES[fn.uid] = fn
    return fn.uid


def base(uid: int) -> Fn:
    return _BASES[uid]


_DIAG_INFO: dict = {}
_SYMMETRIC: dict = {}


def diagonal_uid(kernel, a: int, b: int) -> int:
    """uid of s -> (d_s^a d_t^b h)(s, s); such factors never carry derivatives themselves."""
    if kernel.uid not in _SYMMETRIC:
        _SYMMETRIC[kernel.uid] = kernel.is_symmetric()
    if _SYMMETRIC[kernel.uid] and a < b:
        a, b = b, a
    key = (kernel.uid, a, b)
    if key not in _DIAGONALS:
        uid = register(kernel.derivative(a, b).diagonal())
        _DIAGONALS[key] = uid
        _DIAG_INFO[uid] = (kernel, a, b)
    return _DIAGONALS[key]


# ---------------------------------------------------------------- vertices

def make_vertex(smear: Iterable, jet: Iterable) -> tuple:
    return (tuple(sorted(smear)), tuple(sorted(jet)))


def vertex_support(v):
    sup = None
    for uid, _ in v[0]:
        sup = intersect(sup, base(uid).support)
    return sup


def vertex_d(v) -> dict:
    """Leibniz derivative of a vertex: {vertex: multiplicity}."""
    smear, jet = v
    out: dict = {}
    for i, (uid, k) in enumerate(smear):
        if uid in _DIAG_INFO:
            # (h(s, s))' = h_s(s, s) + h_t(s, s)
            h, a, b = _DIAG_INFO[uid]
            for a2, b2 in ((a + 1, b), (a, b + 1)):
                nv = make_vertex(smear[:i] + ((diagonal_uid(h, a2, b2), 0),) + smear[i + 1:], jet)
                out[nv] = out.get(nv, 0) + 1
            continue
        nv = make_vertex(smear[:i] + ((uid, k + 1),) + smear[i + 1:], jet)
        out[nv] = out.get(nv, 0) + 1
    for i, a in enumerate(jet):
        nv = make_vertex(smear, jet[:i] + (a + 1,) + jet[i + 1:])
        out[nv] = out.get(nv, 0) + 1
    return out


def vertex_dk(v, k: int) -> dict:
    cur = {v: 1}
    for _ in range(k):
        nxt: dict = {}
        for w, c in cur.items():
            for x, m in vertex_d(w).items():
                nxt[x] = nxt.get(x, 0) + c * m
        cur = nxt
    return cur


def merge_vertices(a, b) -> tuple:
    return make_vertex(a[0] + b[0], a[1] + b[1])


def vertex_order(v) -> int:
    return sum(k for _, k in v[0]) + sum(v[1])


# ---------------------------------------------------------------- integration by parts

def _badness(v):
    return (tuple(sorted(v[1], reverse=True)), tuple(k for _, k in v[0]))


def _distribute(v0, K):
    """All vertices with the factors of v0 (orders stripped) and total order K."""
    uids = [u for u, _ in v0[0]]
    d = len(v0[1])
    slots = len(uids) + d
    free = [n for n in range(slots) if n >= len(uids) or uids[n] not in _DIAG_INFO]
    out = set()
    for combo in itertools.combinations_with_replacement(free, K):
        orders = [0] * slots
        for c in combo:
            orders[c] += 1
        out.add(make_vertex(zip(uids, orders[:len(uids)]), orders[len(uids):]))
    return out


_IBP_CACHE: dict = {}


def _pivots(v):
    key = (tuple(u for u, _ in v[0]), len(v[1]), vertex_order(v))
    if key in _IBP_CACHE:
        return _IBP_CACHE[key]
    K = key[2]
    pivots: dict = {}
    if K > 0:
        stripped = make_vertex(((u, 0) for u in key[0]), [0] * key[1])
        for w in sorted(_distribute(stripped, K - 1), key=_badness):
            row = {x: Fraction(m) for x, m in vertex_d(w).items()}
            row = _reduce(row, pivots)
            own = [x for x in row if _uids(x) == key[0]]
            if own:
                p = max(own, key=_badness)
                c = row[p]
                pivots[p] = {x: y / c for x, y in row.items()}
    _IBP_CACHE[key] = pivots
    return pivots


def _reduce(row: dict, pivots: dict) -> dict:
    row = {k: v for k, v in row.items() if v != 0}
    while True:
        hits = [x for x in row if x in pivots]
        if not hits:
            return row
        p = max(hits, key=_badness)
        c = row[p]
        for x, y in pivots[p].items():
            row[x] = row.get(x, Fraction(0)) - c * y
            if row[x] == 0:
                del row[x]


def _uids(v) -> tuple:
    return tuple(u for u, _ in v[0])


def ibp_reduce(v) -> dict:
    """Canonical representative of int v modulo total derivatives."""
    if vertex_order(v) == 0:
        return {v: Fraction(1)}
    row = _reduce({v: Fraction(1)}, _pivots(v))
    out: dict = {}
    for x, c in row.items():
        # lower-order leftovers from differentiated diagonal factors
        sub = {x: Fraction(1)} if _uids(x) == _uids(v) else ibp_reduce(x)
        for y, m in sub.items():
            out[y] = out.get(y, Fraction(0)) + c * m
    return {x: c for x, c in out.items() if c != 0}


# ---------------------------------------------------------------- canonical terms

UNIT = ((), ())


def _edge_sort_key(e):
    return (e[0], e[1], shape_key(e[2]))


def _orient(i, j, shape):
    if i < j:
        return (i, j, shape), 1
    s2, sign = shape_transpose(shape)
    return (j, i, s2), sign


def _merge_group(shapes):
    """Product of kernels on the same vertex pair: (coefficient, [shapes])."""
    bvs = [s for s in shapes if s[0] == "bv"]
    smooths = [s for s in shapes if s[0] == "smooth"]
    others = [s for s in shapes if s[0] not in ("bv", "smooth")]
    out = list(smooths)
    if bvs:
        sides = {s[2] for s in bvs}
        if len(sides) > 1:
            raise AlgebraError("product of boundary values with opposite sides")
        if others:
            raise AlgebraError("product of a boundary value with a delta or finite part")
        out.append(("bv", sum(s[1] for s in bvs), bvs[0][2]))
    if others:
        if len(others) > 1:
            raise AlgebraError(f"unsupported kernel product {others}")
        out.append(others[0])
    return sorted(out, key=shape_key)


def _rewrite(term, c):
    """One rewriting step: returns list of (term, coeff) or None when final."""
    verts, edges = term
    for v in verts:
        if support_empty(vertex_support(v)):
            return []
    groups: dict = {}
    sign = 1
    for (i, j, shape) in edges:
        e, s = _orient(i, j, shape)
        sign *= s
        groups.setdefault((e[0], e[1]), []).append(e[2])
    c = c * sign
    new_edges = []
    changed = sign != 1
    for (i, j), shapes in sorted(groups.items()):
        merged = _merge_group(shapes)
        if len(merged) != len(shapes):
            changed = True
        new_edges.extend((i, j, s) for s in merged)
    new_edges.sort(key=_edge_sort_key)
    term = (verts, tuple(new_edges))
    if changed:
        return [(term, c)]
    pair_count: dict = {}
    for (i, j, _) in new_edges:
        pair_count[(i, j)] = pair_count.get((i, j), 0) + 1
    for idx, (i, j, shape) in enumerate(new_edges):
        if pair_count[(i, j)] != 1:
            if shape[0] == "bv":
                rest = new_edges[:idx] + new_edges[idx + 1:]
                n, side = shape[1], shape[2]
                return [((verts, tuple(rest + [(i, j, ("fp", n))])), c),
                        ((verts, tuple(rest + [(i, j, ("delta", n - 1))])), c * sokhotski(n, side))]
            if shape[0] == "delta":
                return _localize_smooth(verts, new_edges, idx, c)
            continue
        if shape[0] == "bv":
            rest = new_edges[:idx] + new_edges[idx + 1:]
            n, side = shape[1], shape[2]
            return [((verts, tuple(rest + [(i, j, ("fp", n))])), c),
                    ((verts, tuple(rest + [(i, j, ("delta", n - 1))])), c * sokhotski(n, side))]
        if shape[0] == "delta":
            return _localize(verts, new_edges, idx, c)
    return None


def _localize(verts, edges, idx, c):
    i, j, shape = edges[idx]
    k = shape[1]
    rest = edges[:idx] + edges[idx + 1:]
    deg = [0] * len(verts)
    for (a, b, _) in rest:
        deg[a] += 1
        deg[b] += 1
    # <delta^(k)(s_i - s_j), A (x) B> = int (-1)^k A^(k) B = int A B^(k)
    if deg[i] == 0:
        target, other, sgn = i, j, (-1) ** k
    elif deg[j] == 0:
        target, other, sgn = j, i, 1
    else:
        raise AlgebraError("delta edge between two vertices that carry further edges")
    keep = min(i, j)
    drop = max(i, j)
    out = []
    for dv, m in vertex_dk(verts[target], k).items():
        merged = merge_vertices(dv, verts[other])
        nverts = list(verts)
        nverts[keep] = merged
        del nverts[drop]
        remap = lambda x: keep if x in (i, j) else (x - 1 if x > drop else x)
        nedges = [(remap(a), remap(b), s) for (a, b, s) in rest]
        out.append(((tuple(nverts), tuple(nedges)), c * (sgn * m)))
    return out


_PRODUCTS: dict = {}


def _smooth_product(kernels):
    if len(kernels) == 1:
        return kernels[0]
    key = tuple(k.uid for k in kernels)
    if key not in _PRODUCTS:
        from .kernels import SmoothKernel
        expr = 1
        for k in kernels:
            expr = expr * k.expr
        _PRODUCTS[key] = SmoothKernel(expr, "*".join(k.label for k in kernels))
    return _PRODUCTS[key]


def _localize_smooth(verts, edges, idx, c):
    """delta^(k)(s_i - s_j) h(s_i, s_j): Leibniz onto the free vertex, h enters through its diagonals."""
    i, j, shape = edges[idx]
    k = shape[1]
    same = [e for n, e in enumerate(edges) if n != idx and (e[0], e[1]) == (i, j)]
    if any(e[2][0] != "smooth" for e in same):
        raise AlgebraError(f"unsupported kernel product {[e[2] for e in same]} with a delta")
    h = _smooth_product([e[2][1] for e in same])
    rest = [e for n, e in enumerate(edges) if n != idx and (e[0], e[1]) != (i, j)]
    deg = [0] * len(verts)
    for (a, b, _) in rest:
        deg[a] += 1
        deg[b] += 1
    # <delta^(k)(s_i - s_j) h, A (x) B> = int A d_t^k[h B] = (-1)^k int d_s^k[A h] B on the diagonal
    if deg[j] == 0:
        target, other, sgn = j, i, 1
    elif deg[i] == 0:
        target, other, sgn = i, j, (-1) ** k
    else:
        raise AlgebraError("delta edge between two vertices that carry further edges")
    keep, drop = min(i, j), max(i, j)
    remap = lambda x: keep if x in (i, j) else (x - 1 if x > drop else x)
    nedges = tuple((remap(a), remap(b), s) for (a, b, s) in rest)
    out = []
    for m in range(k + 1):
        duid = diagonal_uid(h, m, 0) if target == i else diagonal_uid(h, 0, m)
        for dv, mult in vertex_dk(verts[target], k - m).items():
            merged = merge_vertices(dv, verts[other])
            merged = make_vertex(merged[0] + ((duid, 0),), merged[1])
            nverts = list(verts)
            nverts[keep] = merged
            del nverts[drop]
            out.append(((tuple(nverts), nedges), c * (sgn * math.comb(k, m) * mult)))
    return out


def _label(term, c):
    """Canonical vertex order; returns (term, coeff) or None if the term vanishes by symmetry."""
    verts, edges = term
    n = len(verts)
    order = sorted(range(n), key=lambda a: verts[a])
    blocks = [list(g) for _, g in itertools.groupby(order, key=lambda a: verts[a])]
    best = None
    signs = {}
    for perm_blocks in itertools.product(*(itertools.permutations(b) for b in blocks)):
        perm = [a for b in perm_blocks for a in b]
        pos = {old: new for new, old in enumerate(perm)}
        sign = 1
        es = []
        for (a, b, shape) in edges:
            e, s = _orient(pos[a], pos[b], shape)
            sign *= s
            es.append(e)
        es.sort(key=_edge_sort_key)
        key = tuple((e[0], e[1], shape_key(e[2])) for e in es)
        if key in signs and signs[key] != sign:
            return None
        signs[key] = sign
        if best is None or key < best[0]:
            best = (key, tuple(verts[a] for a in perm), tuple(es), sign)
    _, nv, ne, sign = best
    return (nv, ne), c * sign


def canonical(term, c) -> dict:
    out: dict = {}
    work = [(term, Exact.coerce(c))]
    while work:
        t, k = work.pop()
        if k.is_zero():
            continue
        step = _rewrite(t, k)
        if step is not None:
            work.extend(step)
            continue
        verts, edges = t
        touched = {a for (a, b, _) in edges} | {b for (a, b, _) in edges}
        expansions = []
        for idx, v in enumerate(verts):
            if idx in touched:
                expansions.append([(v, Fraction(1))])
            else:
                expansions.append(list(ibp_reduce(v).items()))
        for choice in itertools.product(*expansions):
            coef = k
            for _, q in choice:
                coef = coef * q
            nt = (tuple(v for v, _ in choice), edges)
            lab = _label(nt, coef)
            if lab is None:
                continue
            key, val = lab
            out[key] = out.get(key, ZERO) + val
    return {k: v for k, v in out.items() if not v.is_zero()}


# ---------------------------------------------------------------- functionals

class Functional:
    """Finite sum of canonical terms with exact coefficients."""

    def __init__(self, terms: dict | None = None, _canonical: bool = False):
        if _canonical:
            self.terms = dict(terms or {})
            return
        acc: dict = {}
        for t, c in (terms or {}).items():
            for k, v in canonical(t, c).items():
                acc[k] = acc.get(k, ZERO) + v
        self.terms = {k: v for k, v in acc.items() if not v.is_zero()}

    @classmethod
    def unit(cls, c=1) -> "Functional":
        return cls({UNIT: Exact.coerce(c)})

    @classmethod
    def zero(cls) -> "Functional":
        return cls({}, True)

    @classmethod
    def monomial(cls, n: int, f: Fn, c=1) -> "Functional":
        register(f)
        if n == 0:
            return cls({((make_vertex([(f.uid, 0)], []),), ()): Exact.coerce(c)})
        return cls({((make_vertex([(f.uid, 0)], [0] * n),), ()): Exact.coerce(c)})

    @classmethod
    def smeared(cls, n: int, factors, c=1) -> "Functional":
        """c * int f1^(k1) f2^(k2) ... chi^n for factors [(f1, k1), (f2, k2), ...]."""
        smear = [(register(f), int(k)) for f, k in factors]
        return cls({((make_vertex(smear, [0] * n),), ()): Exact.coerce(c)})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "Functional") -> "Functional":
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, ZERO) + v
        return Functional({k: v for k, v in out.items() if not v.is_zero()}, True)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "Functional":
        c = Exact.coerce(c)
        if c.is_zero():
            return Functional.zero()
        return Functional({k: v * c for k, v in self.terms.items()}, True)

    def __mul__(self, other):
        if isinstance(other, Functional):
            return pointwise_product(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Functional):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def degree(self) -> int:
        return max((sum(len(v[1]) for v in t[0]) for t in self.terms), default=0)

    def constant_part(self) -> "Functional":
        return Functional({t: c for t, c in self.terms.items()
                           if all(not v[1] for v in t[0])}, True)

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({c})*{term_str(t)}" for t, c in sorted(self.terms.items(), key=_term_sort))

    def to_json(self) -> list:
        out = []
        for t, c in sorted(self.terms.items(), key=_term_sort):
            out.append({"term": term_str(t), "coefficient": c.to_json()})
        return out


def _term_sort(item):
    t = item[0]
    return (len(t[0]), repr([(v, [(a, b, shape_key(s)) for a, b, s in t[1]]) for v in t[0]]))


def _vertex_str(v) -> str:
    parts = []
    for uid, k in v[0]:
        parts.append(base(uid).label + ("'" * k if k <= 3 else f"^({k})"))
    for a in v[1]:
        parts.append("chi" + ("'" * a if a <= 3 else f"^({a})"))
    return "*".join(parts) if parts else "1"


def term_str(t) -> str:
    verts, edges = t
    if not verts:
        return "1"
    from .kernels import _shape_str
    vs = [f"[{_vertex_str(v)}](s{i})" for i, v in enumerate(verts)]
    es = [f"{_shape_str(s)}(s{a}-s{b})" for a, b, s in edges]
    return "int " + " ".join(vs + es)


def pointwise_product(F: Functional, G: Functional) -> Functional:
    out: dict = {}
    for tf, cf in F.terms.items():
        for tg, cg in G.terms.items():
            off = len(tf[0])
            t = (tf[0] + tg[0], tf[1] + tuple((a + off, b + off, s) for a, b, s in tg[1]))
            out[t] = out.get(t, ZERO) + cf * cg
    return Functional(out)


# ---------------------------------------------------------------- contractions

def _legs(term):
    return [(vi, li) for vi, v in enumerate(term[0]) for li in range(len(v[1]))]


def _strip(verts, used):
    """Remove jet entries listed in used: {vertex: [leg indices]}."""
    out = []
    for vi, v in enumerate(verts):
        drop = set(used.get(vi, ()))
        out.append(make_vertex(v[0], [a for li, a in enumerate(v[1]) if li not in drop]))
    return tuple(out)


def _kernel_shapes(K: KernelExpr):
    out = []
    for t in K.terms:
        if t.prefactor is not None:
            raise AlgebraError("algebra kernels act in the flat chi frame and take no prefactor")
        if t.shape[0] == "smooth" and t.shape[1].expr == 0:
            continue
        out.append((t.shape, t.coeff))
    return out


def contract(F: Functional, G: Functional, K: KernelExpr, n: int) -> Functional:
    """Sum over sets of n contractions between legs of F and legs of G through K."""
    shapes = _kernel_shapes(K)
    out: dict = {}
    for tf, cf in F.terms.items():
        lf = _legs(tf)
        for tg, cg in G.terms.items():
            lg = _legs(tg)
            if n > min(len(lf), len(lg)):
                continue
            off = len(tf[0])
            base_edges = tf[1] + tuple((a + off, b + off, s) for a, b, s in tg[1])
            for cf_legs in itertools.combinations(lf, n):
                for cg_legs in itertools.combinations(lg, n):
                    for perm in itertools.permutations(cg_legs):
                        used_f: dict = {}
                        used_g: dict = {}
                        pairs = []
                        for (vf, lfi), (vg, lgi) in zip(cf_legs, perm):
                            used_f.setdefault(vf, []).append(lfi)
                            used_g.setdefault(vg, []).append(lgi)
                            pairs.append((vf, tf[0][vf][1][lfi], vg + off, tg[0][vg][1][lgi]))
                        verts = _strip(tf[0], used_f) + _strip(tg[0], used_g)
                        for choice in itertools.product(shapes, repeat=n):
                            coef = cf * cg
                            edges = list(base_edges)
                            for (vf, af, vg, ag), (shape, kc) in zip(pairs, choice):
                                dc, dshape = shape_derivative(shape, af, ag)
                                coef = coef * kc * dc
                                edges.append((vf, vg, dshape))
                            t = (verts, tuple(edges))
                            out[t] = out.get(t, ZERO) + coef
    return Functional(out)


def self_contract(F: Functional, K: KernelExpr, n: int) -> Functional:
    """Sum over sets of n unordered pairs of distinct legs within each term (smooth K)."""
    shapes = _kernel_shapes(K)
    for shape, _ in shapes:
        if shape[0] != "smooth":
            raise AlgebraError("self contraction needs a smooth kernel")
    out: dict = {}
    for t, c in F.terms.items():
        legs = _legs(t)
        for matching in _matchings(legs, n):
            used: dict = {}
            for (va, la), (vb, lb) in matching:
                used.setdefault(va, []).append(la)
                used.setdefault(vb, []).append(lb)
            for choice in itertools.product(shapes, repeat=n):
                coef = c
                extra_smear: dict = {}
                edges = list(t[1])
                for ((va, la), (vb, lb)), (shape, kc) in zip(matching, choice):
                    aa, ab = t[0][va][1][la], t[0][vb][1][lb]
                    coef = coef * kc
                    if va == vb:
                        uid = diagonal_uid(shape[1], aa, ab)
                        extra_smear.setdefault(va, []).append((uid, 0))
                    else:
                        dc, dshape = shape_derivative(shape, aa, ab)
                        coef = coef * dc
                        edges.append((va, vb, dshape))
                verts = list(_strip(t[0], used))
                for vi, extra in extra_smear.items():
                    verts[vi] = make_vertex(verts[vi][0] + tuple(extra), verts[vi][1])
                nt = (tuple(verts), tuple(edges))
                out[nt] = out.get(nt, ZERO) + coef
    return Functional(out)


def _matchings(legs, n):
    """All sets of n disjoint unordered pairs from legs."""
    if n == 0:
        yield ()
        return
    if len(legs) < 2 * n:
        return
    first, rest = legs[0], legs[1:]
    # either first is unused
    yield from _matchings(rest, n)
    for k in range(len(rest)):
        for m in _matchings(rest[:k] + rest[k + 1:], n - 1):
            yield ((first, rest[k]),) + m


# ---------------------------------------------------------------- evaluation

class _Integrands:
    """Fn objects for vertex integrands at a configuration chi."""

    def __init__(self, chi: Fn):
        self.chi = chi
        self._cache: dict = {}

    def vertex(self, v) -> Fn:
        if v in self._cache:
            return self._cache[v]
        fn = None
        for uid, k in v[0]:
            factor = base(uid).derivative(k)
            fn = factor if fn is None else fn * factor
        for a in v[1]:
            factor = self.chi.derivative(a)
            fn = factor if fn is None else fn * factor
        if fn is None:
            raise AlgebraError("empty vertex")
        self._cache[v] = fn
        return fn


def _components(term):
    verts, edges = term
    parent = list(range(len(verts)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a
    for a, b, _ in edges:
        parent[find(a)] = find(b)
    comps: dict = {}
    for i in range(len(verts)):
        comps.setdefault(find(i), []).append(i)
    return list(comps.values())


def _integrate_vertex(fn: Fn) -> complex:
    sup = fn.support
    if sup is None:
        raise AlgebraError("vertex integrand without compact support")
    if support_empty(sup):
        return 0.0
    return complex(integrate(lambda x: fn(x), sup[0], sup[1], rel=1e-14, abs_tol=1e-300))


def _eval_component(term, comp, integrands: _Integrands) -> complex:
    verts, edges = term
    if len(comp) == 1:
        return _integrate_vertex(integrands.vertex(verts[comp[0]]))
    if len(comp) != 2:
        raise AlgebraError("numeric evaluation supports at most two vertices per connected component")
    i, j = comp
    shapes = [s for a, b, s in edges if {a, b} == {i, j}]
    A, B = integrands.vertex(verts[i]), integrands.vertex(verts[j])
    if len(shapes) == 1:
        return pair_shape(shapes[0], A, B)
    if all(s[0] == "smooth" for s in shapes):
        total = None
        prev = None
        for panels in (8, 16, 32, 64):
            xs, wx = composite_nodes(*A.support, panels)
            ys, wy = composite_nodes(*B.support, panels)
            H = np.ones((xs.size, ys.size))
            for s in shapes:
                H = H * s[1](xs[:, None], ys[None, :])
            total = (wx * A(xs)) @ H @ (wy * B(ys))
            if prev is not None and abs(total - prev) <= 1e-13 * abs(total) + 1e-16:
                return complex(total)
            prev = total
        return complex(total)
    raise AlgebraError("numeric evaluation of mixed singular and smooth multi-edges is unsupported")


def evaluate(F: Functional, chi: Fn | None) -> complex:
    """Value of F at the flat configuration chi (None means chi = 0)."""
    total = 0j
    integrands = _Integrands(chi) if chi is not None else None
    for t, c in F.terms.items():
        if chi is None and any(v[1] for v in t[0]):
            continue
        if integrands is None:
            from .functions import constant
            integrands = _Integrands(constant(0.0))
        val = complex(c)
        for comp in _components(t):
            val *= _eval_component(t, comp, integrands)
            if val == 0:
                break
        total += val
    return total
