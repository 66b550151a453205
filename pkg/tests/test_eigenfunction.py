import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import central_difference_gradient, direct_exponential_sum
from torusnodal.eigenfunction import (SMOOTH_E65, CROSSING_E65, TWO_PI, UNIT, Eigenfunction,
                                      ExponentialSum1D, TrigPolynomial, l2_norm, l2_norm_quadrature,
                                      parse_trig_terms, random_eigenfunction)
from torusnodal.errors import PreconditionError

ENERGIES = [25, 65, 325]


def test_smooth65_at_origin():
    phi = Eigenfunction.from_expression(SMOOTH_E65)
    assert phi.E == 65 and phi.convention == TWO_PI
    assert phi.evaluate([0.0, 0.0]) == pytest.approx(1.0, abs=1e-15)


def test_e65_expressions_match_trig_expression():
    phi = Eigenfunction.from_expression(SMOOTH_E65)
    rng = np.random.default_rng(3)
    for X, Y in rng.random((20, 2)) * 2 * math.pi:
        ref = math.cos(4 * X - 7 * Y) + math.sin(8 * X - Y) + math.sin(4 * X + 7 * Y)
        assert phi.evaluate([X, Y]) == pytest.approx(ref, abs=1e-13)
    right = Eigenfunction.from_expression(CROSSING_E65)
    X, Y = 0.3, 1.1
    # the factored form 2 sin 4x cos 7y + 2 sin 8x cos y
    ref = 2 * math.sin(4 * X) * math.cos(7 * Y) + 2 * math.sin(8 * X) * math.cos(Y)
    assert right.evaluate([X, Y]) == pytest.approx(ref, abs=1e-13)


def test_double_cosine_at_origin():
    phi = Eigenfunction.from_terms([((3, 4), 1.0)])
    assert len(phi.amps) == 2
    assert phi.evaluate([0.0, 0.0]) == pytest.approx(2.0, abs=1e-15)


@pytest.mark.parametrize("E", ENERGIES)
@pytest.mark.parametrize("model", ["gaussian", "unimodular"])
def test_evaluate_matches_direct_sum(E, model):
    phi = random_eigenfunction(E, seed=11, model=model)
    coeffs = phi.coefficients()
    rng = np.random.default_rng(E)
    pts = rng.random((50, 2))
    vals = phi.evaluate(pts)
    for x, v in zip(pts, vals):
        ref = direct_exponential_sum(coeffs, x)
        assert abs(ref.imag) <= 1e-12 * sum(abs(c) for c in coeffs.values())
        assert v == pytest.approx(ref.real, rel=1e-12, abs=1e-12 * phi.amplitude)


def test_reality_of_complex_sum():
    rng = np.random.default_rng(0)
    worst = 0.0
    for seed in range(20):
        phi = random_eigenfunction(int(rng.choice(ENERGIES)), seed)
        z = phi.evaluate_complex(rng.random((5000, 2)))
        worst = max(worst, float(np.abs(z.imag).max() / np.abs(phi.amps).sum()))
    assert worst <= 1e-12


def test_grid_matches_pointwise():
    phi = random_eigenfunction(65, 2)
    n = 37
    G = phi.grid(n, offset=(0.01, 0.02))
    xs = 0.01 + np.arange(n) / n
    ys = 0.02 + np.arange(n) / n
    pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
    assert np.allclose(G, phi.evaluate(pts), atol=1e-12)
    assert np.allclose(G[5:9], phi.grid(n, offset=(0.01, 0.02), rows=slice(5, 9)))


def test_single_frequency_gradient():
    n = 4
    phi = Eigenfunction.from_terms([((n, 0), 1.0)])
    for x1 in [0.0, 0.1, 0.37]:
        g = phi.gradient([x1, 0.2])
        assert g[0] == pytest.approx(-4 * math.pi * n * math.sin(2 * math.pi * n * x1), abs=1e-12)
        assert g[1] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("E", ENERGIES)
def test_gradient_and_hessian_finite_differences(E):
    phi = random_eigenfunction(E, seed=4)
    h = 1e-6 / phi.lam
    rng = np.random.default_rng(1)
    for x in rng.random((10, 2)):
        g = phi.gradient(x)
        fd = central_difference_gradient(phi.evaluate, x, h)
        scale = 2 * math.pi * phi.lam * np.abs(phi.amps).sum()
        assert np.allclose(g, fd, rtol=1e-6, atol=1e-6 * scale)
        H = phi.hessian(x)
        assert np.allclose(H, H.T)
        fdH = np.array([central_difference_gradient(lambda y, i=i: phi.gradient(y)[i], x, h)
                        for i in range(2)])
        assert np.allclose(H, fdH, rtol=1e-5, atol=1e-6 * scale * 2 * math.pi * phi.lam)


@pytest.mark.parametrize("convention,factor", [(UNIT, 4 * math.pi**2), (TWO_PI, 1.0)])
def test_laplacian_identity(convention, factor):
    for E in ENERGIES:
        phi = random_eigenfunction(E, seed=9, convention=convention)
        pts = np.random.default_rng(E).random((200, 2)) * phi.period
        tr = np.trace(phi.hessian(pts), axis1=-2, axis2=-1)
        resid = tr + factor * E * phi.evaluate(pts)
        assert np.abs(resid).max() <= 1e-8 * factor * E * np.abs(phi.amps).sum()


def test_conventions_are_a_rescale():
    phi = random_eigenfunction(65, 3)
    psi = phi.with_convention(TWO_PI)
    x = np.array([[0.1, 0.7], [0.45, 0.2]])
    assert np.allclose(phi.evaluate(x), psi.evaluate(2 * math.pi * x), atol=1e-13)


def test_random_determinism_and_count():
    a = random_eigenfunction(25, 5)
    b = random_eigenfunction(25, 5)
    assert a.coefficients() == b.coefficients()
    assert len(a.coefficients()) == 12
    assert random_eigenfunction(25, 6).coefficients() != a.coefficients()
    assert l2_norm(a) == pytest.approx(1.0, abs=1e-14)


def test_random_rejects_empty_eigenspace():
    with pytest.raises(PreconditionError):
        random_eigenfunction(3, 0)


@pytest.mark.parametrize("E", ENERGIES)
def test_parseval_vs_quadrature(E):
    phi = random_eigenfunction(E, seed=1, model="unimodular")
    assert l2_norm_quadrature(phi) == pytest.approx(l2_norm(phi), rel=1e-2)


def test_norm_trivial_cases():
    phi = Eigenfunction.from_terms([((1, 2), 1.0)])
    assert l2_norm(phi) == pytest.approx(math.sqrt(2))
    zero = Eigenfunction(5, {})
    assert l2_norm(zero) == 0.0
    assert zero.evaluate([0.3, 0.3]) == 0.0


def test_rejects_bad_coefficients():
    with pytest.raises(PreconditionError):
        Eigenfunction(25, {(3, 4): 1.0, (-3, -4): 1.0, (1, 1): 1.0})
    with pytest.raises(PreconditionError):
        Eigenfunction(25, {(3, 4): 1.0 + 1j, (-3, -4): 1.0 + 1j})
    with pytest.raises(PreconditionError):
        Eigenfunction(25, {(3, 4): 1.0})


def test_json_round_trip_and_sincos_schema():
    phi = random_eigenfunction(65, 7)
    doc = json.loads(json.dumps(phi.to_json()))
    back = Eigenfunction.from_json(doc)
    assert back.coefficients() == phi.coefficients()
    alt = Eigenfunction.from_json({"sincos": [{"kind": "cos", "coef": 1, "k": [4, -7]},
                                              {"kind": "sin", "coef": 1, "k": [8, -1]},
                                              {"kind": "sin", "coef": 1, "k": [4, 7]}]})
    ref = Eigenfunction.from_expression(SMOOTH_E65)
    assert alt.coefficients() == ref.coefficients()
    assert Eigenfunction.from_json({"expression": SMOOTH_E65}).coefficients() == ref.coefficients()


def test_parse_trig_terms():
    assert parse_trig_terms("cos(4x - 7y) - 2sin(x)") == [("cos", 1.0, (4, -7)), ("sin", -2.0, (1, 0))]
    with pytest.raises(PreconditionError):
        parse_trig_terms("tan(x)")


def test_scaled_preserves_shape():
    phi = random_eigenfunction(25, 1)
    x = [0.2, 0.9]
    assert phi.scaled(-2.5).evaluate(x) == pytest.approx(-2.5 * phi.evaluate(x))


def test_trig_polynomial_complex():
    psi = TrigPolynomial([(3, 4)], [2j])
    z = psi.evaluate_complex(np.random.default_rng(0).random((10, 2)))
    assert np.allclose(np.abs(z), 2.0)
    assert psi.sup_norm_estimate() == pytest.approx(2.0)


def test_exponential_sum_validation():
    with pytest.raises(PreconditionError):
        ExponentialSum1D([1.0, 0.5], [1, 1])
    f = ExponentialSum1D([0.0, 1.0], [1, 1])
    assert f.J == 2 and f.spread == 1.0
    assert f.abs(0.25) == pytest.approx(math.sqrt(2))


@settings(max_examples=40, deadline=None)
@given(E=st.sampled_from([5, 25, 65, 85, 125]), seed=st.integers(0, 10**6),
       x=st.tuples(st.floats(0, 1), st.floats(0, 1)))
def test_property_real_and_symmetric(E, seed, x):
    phi = random_eigenfunction(E, seed)
    c = phi.coefficients()
    for (a, b), v in c.items():
        assert c[(-a, -b)] == v.conjugate()
    z = phi.evaluate_complex(np.array(x))
    assert abs(z.imag) <= 1e-12 * np.abs(phi.amps).sum()
    assert phi.evaluate(np.array(x)) == pytest.approx(z.real, abs=1e-12)
