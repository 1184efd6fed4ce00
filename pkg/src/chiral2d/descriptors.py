"""JSON descriptors: {"family": name, "params": {...}} or {"samples": [[x, y], ...]}."""

from __future__ import annotations

import math

import numpy as np
import sympy as sp

from . import functions as fns
from .fields import LocalField, psi_power, STRESS, UNIT_FIELD
from .geometry import CYLINDER, MINKOWSKI, CauchySurface, Spacetime, TWO_PI, truncated


class DescriptorError(ValueError):
    pass


def _params(desc: dict) -> dict:
    p = desc.get("params", {})
    if not isinstance(p, dict):
        raise DescriptorError("params must be an object")
    return p


def _support(p):
    s = p.get("support")
    if s is None:
        return None
    if len(s) != 2 or not s[0] < s[1]:
        raise DescriptorError(f"bad support {s!r}")
    return (float(s[0]), float(s[1]))


def parse_function(desc: dict, label: str | None = None) -> fns.Fn:
    if not isinstance(desc, dict):
        raise DescriptorError("function descriptor must be an object")
    if "samples" in desc:
        p = _params(desc)
        f = fns.spline_function(desc["samples"], _support(p),
                                periodic=TWO_PI if p.get("periodic") else None)
    else:
        fam = desc.get("family")
        p = _params(desc)
        try:
            if fam == "bump":
                f = fns.bump(float(p.get("center", 0.0)), float(p.get("radius", 1.0)),
                             float(p.get("amplitude", 1.0)))
            elif fam == "gaussian_poly":
                f = fns.gaussian_poly(float(p.get("center", 0.0)), float(p.get("width", 1.0)),
                                      [float(c) for c in p.get("coeffs", [1.0])])
            elif fam == "expr":
                f = fns.expr_function(str(p["expr"]), support=_support(p),
                                      periodic=TWO_PI if p.get("periodic") else None)
            elif fam == "constant":
                f = fns.constant(float(p.get("value", 0.0)))
            else:
                raise DescriptorError(f"unknown function family {fam!r}")
        except (KeyError, TypeError, sp.SympifyError) as exc:
            raise DescriptorError(f"bad parameters for {fam!r}: {exc}") from exc
    if label:
        f.label = label
    return f


def parse_diffeo(desc: dict | None) -> fns.Diffeo:
    if desc is None:
        return fns.identity_diffeo()
    if "samples" in desc:
        return fns.spline_diffeo(desc["samples"])
    fam = desc.get("family", "identity")
    p = _params(desc)
    try:
        if fam == "identity":
            return fns.identity_diffeo()
        if fam == "affine":
            return fns.affine_diffeo(float(p.get("scale", 1.0)), float(p.get("shift", 0.0)))
        if fam == "sine":
            return fns.sine_diffeo(float(p["amplitude"]), float(p.get("frequency", 1.0)),
                                   float(p.get("phase", 0.0)))
        if fam == "expr":
            return fns.diffeo_from_expr(str(p["expr"]), label=str(p["expr"]))
    except (KeyError, ValueError, sp.SympifyError) as exc:
        raise DescriptorError(f"bad parameters for {fam!r}: {exc}") from exc
    raise DescriptorError(f"unknown diffeomorphism family {fam!r}")


def parse_spacetime(desc: dict | None) -> Spacetime:
    if desc is None:
        return MINKOWSKI
    kind = desc.get("kind", "minkowski")
    if kind == "minkowski":
        return MINKOWSKI
    if kind == "cylinder":
        return CYLINDER
    if kind == "truncated":
        return truncated(float(desc["T"]))
    if kind == "slab":
        lower = desc.get("lower")
        upper = desc.get("upper")
        return Spacetime("subset", MINKOWSKI,
                         None if lower is None else parse_function(lower),
                         None if upper is None else parse_function(upper))
    raise DescriptorError(f"unknown spacetime kind {kind!r}")


def parse_surface(desc: dict | None, host: Spacetime) -> CauchySurface:
    gamma = parse_diffeo(None if desc is None else desc.get("gamma"))
    return CauchySurface(gamma, host)


def parse_field(desc) -> LocalField:
    """"Psi", "T", "1", "Psi^n", or {"monomials": [[n, "q"], ...]}."""
    if isinstance(desc, str):
        if desc == "Psi":
            return psi_power(1)
        if desc == "T":
            return STRESS
        if desc == "1":
            return UNIT_FIELD
        if desc.startswith("Psi^"):
            try:
                return psi_power(int(desc[4:]))
            except ValueError:
                pass
        raise DescriptorError(f"unknown field {desc!r}")
    if isinstance(desc, dict) and "monomials" in desc:
        from fractions import Fraction
        return LocalField([(int(n), Fraction(str(c))) for n, c in desc["monomials"]],
                          desc.get("name", "field"))
    raise DescriptorError(f"bad field descriptor {desc!r}")


def random_configuration(rng: np.random.Generator, terms: int = 3, periodic: bool = False) -> fns.Fn:
    """A smooth random psi: sum of a few trigonometric modes."""
    x = fns._X
    expr = sp.Float(float(rng.normal()))
    for k in range(1, terms + 1):
        a, b = rng.normal(size=2) / k
        expr += sp.Float(float(a)) * sp.cos(k * x) + sp.Float(float(b)) * sp.sin(k * x)
    return fns.expr_function(expr, x, label="psi", periodic=TWO_PI if periodic else None)
