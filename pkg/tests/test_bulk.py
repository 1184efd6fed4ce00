import math

import numpy as np
import pytest
from scipy import integrate

from chiral2d import bulk, chiral_algebra as ca, fields, functions as fns, geometry as geo, kernels as kr
from chiral2d.verification import random_solution

S0 = geo.standard_surface()
P = geo.Point


def test_pauli_jordan_minkowski():
    E = bulk.PauliJordanKernel()
    assert bulk.pauli_jordan(E, P(0, 0), P(1, 1)) == 0.5
    assert bulk.pauli_jordan(E, P(0, 0), P(1, -1)) == 0
    assert bulk.pauli_jordan(E, P(1, 1), P(0, 0)) == -0.5


def test_pauli_jordan_cylinder_single_image():
    Ec = bulk.PauliJordanKernel(geo.CYLINDER)
    E = bulk.PauliJordanKernel()
    x, y = P(0, 0, True), P(3 * math.pi, -math.pi, True)
    # only the image shifted by one period is causally related
    assert bulk.pauli_jordan(Ec, x, y) == bulk.pauli_jordan(E, P(0, 0), P(math.pi, math.pi))


def test_hadamard_bulk_timelike_branch():
    W = bulk.HadamardBulkKernel(1e-6, 1.0)
    val = bulk.hadamard_bulk(W, P(0, 0), P(1, 1))
    assert val == pytest.approx(0.25j, abs=1e-6)


def test_hadamard_bulk_coincident_raises():
    W = bulk.HadamardBulkKernel(1e-6, 1.0)
    with pytest.raises(bulk.BulkError):
        bulk.hadamard_bulk(W, P(0.3, 0.3), P(0.3, 0.3))


def test_hadamard_oracle_overlapping():
    f = fns.bump(0.0, 1.0, label="f")
    g = fns.bump(0.3, 0.9, label="g")
    a = bulk.hadamard_chiral_oracle(f, g, form="complexified")
    b = kr.pair(ca.HadamardChiralKernel().kernel, f, g)
    assert abs(a - b) / abs(b) < 1e-4


def test_nascent_delta_unit_mass():
    d = bulk.nascent_delta(0.2)
    mass, _ = integrate.quad(d, -0.2, 0.2, epsabs=1e-14)
    assert mass == pytest.approx(1.0, abs=1e-12)


def test_mollifier_examples():
    s = np.linspace(-1, 1, 9)
    for w in (0.2, 0.1, 0.05):
        D = bulk.MollifiedChiralDerivative(S0, w)
        assert np.allclose(bulk.mollified_chiral_derivative(D, fields.ExprBulk("u**2"))(s), -2 * s)
        assert np.allclose(bulk.mollified_chiral_derivative(D, fields.ExprBulk("v"))(s), 0)
        # off shell: phi_u = v = s on the standard surface
        assert np.allclose(bulk.mollified_chiral_derivative(D, fields.ExprBulk("u*v"))(s), s)


def test_mollifier_slab_error():
    host = geo.truncated(0.05)
    D = bulk.MollifiedChiralDerivative(geo.standard_surface(host), 0.3)
    with pytest.raises(bulk.SlabError):
        bulk.mollified_chiral_derivative(D, fields.ExprBulk("u"))(np.array([0.0]))


def test_embedded_linear_observable():
    f = fns.bump(0.0, 1.0, label="f")
    D = bulk.MollifiedChiralDerivative(S0, 0.1)
    B = bulk.embed_chiral_observable(fields.PSI(f), D)
    ref, _ = integrate.quad(f, -1, 1)
    assert B(fields.ExprBulk("u")) == pytest.approx(ref, rel=1e-10)


def test_embedded_observables_transport_between_surfaces():
    f = fns.bump(0.0, 1.0, label="f")
    rho = fns.sine_diffeo(0.3)
    dst = geo.CauchySurface(fns.sine_diffeo(0.2))
    emb = geo.extend_diffeo(rho, S0, dst)
    image = fields.diffeo_action_on_functional(rho, fields.PSI(f))
    rng = np.random.default_rng(11)
    for _ in range(5):
        phi = random_solution(rng)
        lhs = fields.evaluate_functional(fields.PSI(f), S0, fields.chiral_derivative(S0, fields.PulledBack(phi, emb)))
        rhs = fields.evaluate_functional(image, dst, fields.chiral_derivative(dst, phi))
        assert abs(lhs - rhs) < 1e-9


def test_bracket_consistency_disjoint_and_equal():
    f = fns.bump(-2.0, 0.5, label="f")
    g = fns.bump(2.0, 0.5, label="g")
    D = bulk.MollifiedChiralDerivative(S0, 0.1)
    assert abs(bulk.bulk_bracket(f, g, D)) < 1e-10
    assert abs(bulk.bulk_bracket(f, f, D)) < 1e-10


def test_bracket_consistency_overlapping():
    f = fns.bump(0.0, 1.0, label="f")
    g = fns.bump(0.3, 0.9, label="g")
    rep = bulk.commutator_consistency(bulk.MollifiedChiralDerivative(S0, 0.1), None, f, g)
    assert rep["pass"] and rep["error"] < 1e-8


def test_canonical_bracket():
    f = fns.bump(0.0, 1.0, label="f")
    g = fns.bump(0.3, 0.9, label="g")
    rep = bulk.canonical_bracket_check(f, g)
    assert rep["match"]
    assert bulk.canonical_bracket_check(f, f)["value"] == 0
