import numpy as np
import pytest

from siegel_lie import (HomPoly, HomVectorField, PolySeries, apply_transform,
                        compose_lie_series_chain, compose_transforms, lie_series_apply,
                        lie_transform_E, lie_transform_E_nonrecursive)
from siegel_lie.lie import (GeneratingSequence, LieSeriesChain, flow_ode, lie_derivative_fn,
                            lie_derivative_vf, random_field, random_poly)

from helpers import random_sequence, rel_close, series_bracket, series_product, single


def x_pow(d, c=1.0):
    return HomPoly(1, d, {(d,): c})


def field_1d(d, c=1.0):
    return HomVectorField([x_pow(d, c)])


# -- Lie derivatives -------------------------------------------------------------

def test_lie_derivative_of_function_by_hand():
    assert lie_derivative_fn(field_1d(2), x_pow(3)) == x_pow(4, 3.0)


def test_lie_derivative_of_constant_vanishes():
    out = lie_derivative_fn(field_1d(2), HomPoly(1, 0, {(0,): 5.0}))
    assert out.is_zero() and out.degree == 1


def test_bracket_by_hand_and_antisymmetry(rng):
    assert lie_derivative_vf(field_1d(2), field_1d(3)) == field_1d(4, 1.0)
    X, V = random_field(2, 1, rng), random_field(2, 2, rng)
    assert lie_derivative_vf(X, X).norm() < 1e-14
    assert (lie_derivative_vf(X, V) + lie_derivative_vf(V, X)).norm() < 1e-13


def test_lie_derivative_matches_directional_derivative(rng):
    X, f = random_field(2, 2, rng), random_poly(2, 3, rng)
    x = np.array([0.3 + 0.1j, -0.2 + 0.4j])
    h = 1e-6
    fd = (f.evaluate(x + h * X.evaluate(x)) - f.evaluate(x - h * X.evaluate(x))) / (2 * h)
    assert abs(fd - lie_derivative_fn(X, f).evaluate(x)) < 1e-8


def test_leibniz_rule(rng):
    X, f, g = random_field(2, 1, rng), random_poly(2, 2, rng), random_poly(2, 3, rng)
    lhs = lie_derivative_fn(X, f * g)
    rhs = lie_derivative_fn(X, f) * g + f * lie_derivative_fn(X, g)
    assert lhs.max_abs_diff(rhs) < 1e-13


@pytest.mark.parametrize("n", [1, 2, 3])
def test_derivative_norm_inequalities(rng, n):
    for _ in range(40):
        r, s = int(rng.integers(1, 4)), int(rng.integers(0, 4))
        X = random_field(n, r, rng, rng.uniform(0.1, 2))
        f = random_poly(n, s + 1, rng, rng.uniform(0.1, 2))
        v = random_field(n, s, rng, rng.uniform(0.1, 2))
        assert lie_derivative_fn(X, f).norm() <= (s + 1) * X.norm() * f.norm() * (1 + 1e-12)
        assert lie_derivative_vf(X, v).norm() <= (r + s + 2) * X.norm() * v.norm() * (1 + 1e-12)


# -- Lie series ----------------------------------------------------------------

def test_lie_series_of_zero_is_identity(rng):
    t = PolySeries(2, 6, "map", {0: HomVectorField.identity(2), 2: random_field(2, 2, rng)})
    assert lie_series_apply(HomVectorField.zero(2, 1), t).max_abs_diff(t) == 0


def test_lie_series_rejects_order_zero():
    with pytest.raises(ValueError):
        lie_series_apply(HomVectorField.identity(1), PolySeries.identity(1, 3))


def test_flow_of_x_squared_is_geometric():
    # dx/dt = x^2 gives x(1) = x / (1 - x) = x + x^2 + x^3 + ...
    out = lie_series_apply(field_1d(2), PolySeries.identity(1, 12))
    coeffs = [out.part(s).components[0].terms[(s + 1,)] for s in range(13)]
    assert np.allclose(coeffs, 1.0, rtol=0, atol=1e-15)


def test_exp_of_negative_field_inverts(rng):
    X = random_field(2, 1, rng)
    ident = PolySeries.identity(2, 8)
    back = lie_series_apply(-X, lie_series_apply(X, ident))
    assert rel_close(back, ident) < 1e-12


# -- E operators -------------------------------------------------------------------

def test_E0_and_E1(rng):
    X = random_sequence(2, 4, rng)
    f = random_poly(2, 2, rng)
    assert lie_transform_E(X, 0, f, "function") == f
    assert lie_transform_E(X, 1, f, "function").max_abs_diff(lie_derivative_fn(X[1], f)) < 1e-15


def test_E2_unrolled(rng):
    X = random_sequence(2, 4, rng)
    v = random_field(2, 1, rng)
    want = lie_derivative_vf(X[2], v) + lie_derivative_vf(X[1], lie_derivative_vf(X[1], v)) * 0.5
    assert lie_transform_E(X, 2, v, "field").max_abs_diff(want) < 1e-13


@pytest.mark.parametrize("kind", ["function", "field", "map"])
@pytest.mark.parametrize("s", [1, 3, 5])
def test_recursive_and_closed_forms_agree(rng, kind, s):
    X = random_sequence(2, s, rng)
    target = random_poly(2, 2, rng) if kind == "function" else random_field(2, 1, rng)
    a = lie_transform_E(X, s, target, kind)
    b = lie_transform_E_nonrecursive(X, s, target, kind)
    assert a.max_abs_diff(b) <= 1e-12 * (1 + a.norm())


def test_closed_form_respects_leading_zeros(rng):
    X = random_sequence(1, 6, rng, start=3)
    f = random_poly(1, 2, rng)
    full = lie_transform_E_nonrecursive(X, 6, f, "function")
    restricted = lie_transform_E_nonrecursive(X, 6, f, "function", min_index=3)
    assert full.max_abs_diff(restricted) == 0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_single_slot_sequence_is_a_lie_series(rng, k):
    Xk = random_field(2, k, rng)
    X = GeneratingSequence(2, 9, {k: Xk})
    ident = PolySeries.identity(2, 9)
    assert rel_close(apply_transform(X, ident), lie_series_apply(Xk, ident)) < 1e-13


def test_E_raises_order_by_s(rng):
    X = random_sequence(2, 5, rng)
    v = random_field(2, 2, rng)
    for s in range(6):
        assert lie_transform_E(X, s, v, "field").order == 2 + s


# -- Lie transforms -----------------------------------------------------------------

def test_zero_sequence_transform_is_identity(rng):
    f = single(random_poly(2, 2, rng), 6)
    assert apply_transform(GeneratingSequence(2, 6), f).max_abs_diff(f) == 0


def test_transform_is_an_algebra_morphism(rng):
    N = 7
    X = random_sequence(2, N, rng, 0.5)
    f, g = single(random_poly(2, 2, rng), N), single(random_poly(2, 1, rng), N)
    lhs = apply_transform(X, series_product(f, g, N))
    rhs = series_product(apply_transform(X, f), apply_transform(X, g), N)
    assert rel_close(lhs, rhs) < 1e-12


def test_transform_preserves_brackets(rng):
    N = 7
    X = random_sequence(2, N, rng, 0.5)
    v, w = single(random_field(2, 1, rng), N), single(random_field(2, 2, rng), N)
    lhs = apply_transform(X, series_bracket(v, w, N))
    rhs = series_bracket(apply_transform(X, v), apply_transform(X, w), N)
    assert rel_close(lhs, rhs) < 1e-12


def test_compose_with_zero(rng):
    X = random_sequence(2, 5, rng)
    Z = compose_transforms(X, GeneratingSequence(2, 5))
    assert all(Z[r].max_abs_diff(X[r]) == 0 for r in range(1, 6))


def test_composition_rule(rng):
    N = 8
    X, Y = random_sequence(2, N, rng, 0.5), random_sequence(2, N, rng, 0.5)
    Z = compose_transforms(X, Y)
    assert Z[1].max_abs_diff(X[1] + Y[1]) < 1e-15
    f = single(random_poly(2, 2, rng), N)
    assert rel_close(apply_transform(Z, f), apply_transform(X, apply_transform(Y, f))) < 1e-12


# -- chains of Lie series ------------------------------------------------------------

def test_empty_chain_and_single_chain(rng):
    ident = PolySeries.identity(2, 6)
    assert compose_lie_series_chain([], 6).apply_series(ident).max_abs_diff(ident) == 0
    X = random_field(2, 1, rng)
    one = compose_lie_series_chain([X], 6).apply_series(ident)
    assert one.max_abs_diff(lie_series_apply(X, ident)) == 0


def test_chain_inverse_series_and_points(rng):
    fields = [random_field(2, r, rng, 0.05) for r in (1, 2, 3)]
    chain = compose_lie_series_chain(fields, 10)
    ident = PolySeries.identity(2, 10)
    back = chain.inverse().apply_series(chain.apply_series(ident))
    assert rel_close(back, ident) < 1e-12
    pts = 0.1 * np.exp(2j * np.pi * rng.random((32, 2)))
    roundtrip = chain.inverse().apply_point(chain.apply_point(pts, 30), 30)
    assert np.abs(roundtrip - pts).max() < 1e-10


def test_point_map_order_matches_series(rng):
    # the point map of the chain, evaluated flow by flow, equals the series chain
    fields = [random_field(2, r, rng, 0.1) for r in (1, 2)]
    chain = compose_lie_series_chain(fields, 14)
    pts = 0.05 * np.exp(2j * np.pi * rng.random((16, 2)))
    series = chain.apply_series(PolySeries.identity(2, 14)).evaluate(pts)
    assert np.abs(series - chain.apply_point(pts, 14)).max() < 1e-12
    assert np.abs(series - chain.apply_point(pts, method="ode")).max() < 1e-12


def test_flow_ode_matches_closed_form():
    x = np.array([[0.2 + 0.1j], [-0.3j]])
    assert np.allclose(flow_ode(field_1d(2), x), x / (1 - x), rtol=1e-11, atol=0)
