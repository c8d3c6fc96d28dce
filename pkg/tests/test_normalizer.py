import numpy as np
import pytest

from siegel_lie import (AnalyticMap, HomPoly, HomVectorField, PolySeries, Spectrum,
                        conjugacy_residual, map_to_generating_sequence, normalize,
                        normalize_step, transform_coordinates)
from siegel_lie.errors import ResonantDivisor
from siegel_lie.lie import GeneratingSequence, random_field
from siegel_lie.maps import random_map
from siegel_lie.normalizer import read_generators, write_archive

from conftest import rotation_pair


def test_step_with_nothing_to_remove(rng):
    W = GeneratingSequence(2, 5, {3: random_field(2, 3, rng), 4: random_field(2, 4, rng)})
    out = normalize_step(W, 2, Spectrum.from_lambda([0.5, 0.7]))
    assert out.X.is_zero() and out.W is W


def test_first_step_lambda_half():
    w = 0.3 + 0.4j
    W = GeneratingSequence(1, 4, {1: HomVectorField([HomPoly.monomial((2,), w)])})
    out = normalize_step(W, 1, Spectrum.from_lambda([0.5]))
    assert abs(out.X.components[0].terms[(2,)] + 2 * w) < 1e-15
    assert out.W.get(1) is None


def test_step_refuses_unnormalized_input(rng):
    W = GeneratingSequence(1, 3, {1: random_field(1, 1, rng)})
    with pytest.raises(ValueError):
        normalize_step(W, 2, Spectrum.from_lambda([0.5]))


@pytest.mark.parametrize("seed", range(5))
def test_stages_annihilate_and_keep_normal_form(seed):
    rng = np.random.default_rng(seed)
    spec = rotation_pair(rng)
    W, _ = map_to_generating_sequence(random_map(spec, 6, rng, 0.5))
    for r in range(1, 7):
        Wr = W[r]
        out = normalize_step(W, r, spec)
        assert out.annihilation <= 1e-12 * max(1.0, Wr.norm())
        assert all(out.W.get(q) is None for q in range(1, r + 1))
        W = out.W


def test_linear_map_gives_identity():
    amap = AnalyticMap.from_parts(Spectrum.from_lambda([0.5, 0.9j]), {}, 5)
    res = normalize(amap)
    assert not res.generators.fields
    assert res.transform.max_abs_diff(PolySeries.identity(2, 5)) == 0


def test_second_coefficient_lambda_half(half_map):
    res = normalize(half_map, 4)
    assert abs(res.transform.part(1).components[0].terms[(2,)] - 4.0) < 1e-14


def test_resonance_reports_stage():
    with pytest.raises(ResonantDivisor) as err:
        normalize(AnalyticMap.quadratic_1d(-1.0, 4))
    assert err.value.r == 2 and err.value.k == (3,)


def test_golden_residual(golden_map, golden_result):
    rep = conjugacy_residual(golden_map, golden_result)
    assert rep.within(1e-10)


@pytest.mark.parametrize("seed", range(3))
def test_conjugacy_at_every_truncation(seed):
    rng = np.random.default_rng(10 + seed)
    spec = rotation_pair(rng)
    amap = random_map(spec, 6, rng, 0.3)
    res = normalize(amap)
    for r in range(1, 7):
        rep = conjugacy_residual(amap, res.truncated(r))
        assert all(rep.order_norms[s] <= 1e-12 * rep.scale for s in range(1, r + 1))


def test_multiprecision_agrees_with_double(rng):
    spec = rotation_pair(rng)
    amap = random_map(spec, 5, rng, 0.5)
    a, b = normalize(amap), normalize(amap, precision=128)
    assert a.transform.max_abs_diff(b.transform) < 1e-12
    assert isinstance(b.transform.coefficient_sample(), complex)


def test_coordinates_round_trip(golden_result, rng):
    rho, delta = 0.05, 0.01
    mod = (rho - 2 * delta) * np.sqrt(rng.random((100, 1)))
    x = mod * np.exp(2j * np.pi * rng.random((100, 1)))
    y = transform_coordinates(golden_result, "forward", x)
    back = transform_coordinates(golden_result, "inverse", y)
    assert np.abs(back - x).max() < 1e-9
    assert np.all(transform_coordinates(golden_result, "forward", np.zeros((1, 1))) == 0)


def test_coordinates_series_mode(golden_result):
    ident = PolySeries.identity(1, golden_result.N)
    out = transform_coordinates(golden_result, "forward", ident)
    assert out.max_abs_diff(golden_result.transform) < 1e-15
    with pytest.warns(RuntimeWarning):
        transform_coordinates(golden_result, "forward", np.array([[0.5]]), radius=0.1)
    with pytest.raises(ValueError):
        transform_coordinates(golden_result, "sideways", ident)


def test_archive_round_trip(tmp_path, golden_map, golden_result):
    write_archive(golden_result, golden_map, tmp_path, [(1, 1, 0.5, 0.0, 1.0, 1.0)])
    gens = read_generators(tmp_path, 1, golden_result.N)
    assert set(gens.fields) == set(golden_result.generators.fields)
    for r, X in gens.fields.items():
        assert X.max_abs_diff(golden_result.generators[r]) == 0
    assert (tmp_path / "ledger.csv").read_text().startswith("r,s,norm_X,norm_W,bound_X,bound_W")
