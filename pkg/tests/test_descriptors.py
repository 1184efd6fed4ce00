import math

import numpy as np
import pytest

from chiral2d import geometry as geo
from chiral2d.descriptors import (DescriptorError, parse_diffeo, parse_field, parse_function,
                                  parse_spacetime, random_configuration)


def test_function_families():
    b = parse_function({"family": "bump", "params": {"center": 1.0, "radius": 0.5}})
    assert b.support == (0.5, 1.5) and b(1.0) > 0 and b(2.0) == 0
    e = parse_function({"family": "expr", "params": {"expr": "x**2", "support": [-1, 1]}})
    assert e(0.5) == pytest.approx(0.25)
    c = parse_function({"family": "constant", "params": {"value": 3}})
    assert c(7.0) == 3.0
    s = parse_function({"samples": [[x, math.sin(x)] for x in np.linspace(-3, 3, 61)]})
    assert s(0.3) == pytest.approx(math.sin(0.3), abs=1e-6)


def test_bad_descriptors():
    with pytest.raises(DescriptorError):
        parse_function({"family": "wavelet"})
    with pytest.raises(DescriptorError):
        parse_function({"family": "expr", "params": {"expr": "x", "support": [1, 0]}})
    with pytest.raises(DescriptorError):
        parse_diffeo({"family": "sine"})
    with pytest.raises(DescriptorError):
        parse_spacetime({"kind": "de Sitter"})
    with pytest.raises(DescriptorError):
        parse_field("Phi")


def test_diffeos_and_spacetimes():
    assert parse_diffeo({"family": "affine", "params": {"scale": 2, "shift": 1}})(3.0) == 7.0
    assert parse_spacetime({"kind": "cylinder"}) is geo.CYLINDER
    assert parse_spacetime(None) is geo.MINKOWSKI


def test_fields():
    assert parse_field("Psi^3").weight == 3
    assert parse_field("T").weight == 2
    assert parse_field({"monomials": [[2, "1/2"]]}).weight == 2


def test_random_configuration_is_seeded():
    a = random_configuration(np.random.default_rng(4))(np.linspace(0, 1, 5))
    b = random_configuration(np.random.default_rng(4))(np.linspace(0, 1, 5))
    assert np.array_equal(a, b)
