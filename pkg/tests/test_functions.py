import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from grload.errors import DegenerateFunction, DomainError, SingularityError
from grload.functions import (
    FAMILIES,
    OPPOSITE_SLOPE,
    FunctionSpec,
    discretize,
    estimate_eta,
    eta_bound,
    grid,
    registry_spec,
    standardize,
)
from oracles import mpmath_normal_grid


def test_uniform_n1():
    np.testing.assert_allclose(discretize(registry_spec("uniform"), 1).amplitudes, [2**-0.5] * 2)


def test_uniform_n3():
    np.testing.assert_allclose(discretize(registry_spec("uniform"), 3).amplitudes, 2**-1.5)


def test_normal_grid_against_high_precision():
    got = discretize(registry_spec("normal", mu=0.5, sigma=1.0), 8).amplitudes
    want = mpmath_normal_grid(0.5, 1.0, 0.0, 1.0, 8)
    np.testing.assert_allclose(got, want, atol=1e-15)


@pytest.mark.parametrize(
    "sigma, eta", [(1.0, 2.00), (0.6, 5.56), (0.4, 12.50), (0.3, 22.22)]
)
def test_normal_eta_values(sigma, eta):
    assert eta_bound(registry_spec("normal", sigma=sigma)) == pytest.approx(eta, rel=5e-3)


def test_uniform_eta_zero():
    assert eta_bound(registry_spec("uniform")) == 0.0


@pytest.mark.parametrize("sigma, lo, hi", [(0.3, 0, 1), (1.0, -2, 3), (0.7, 0.2, 0.5)])
def test_normal_eta_formula_and_estimator(sigma, lo, hi):
    spec = registry_spec("normal", mu=0.5, sigma=sigma, domain=(lo, hi))
    eta = eta_bound(spec)
    assert eta == pytest.approx(2 * (hi - lo) ** 2 / sigma**2, rel=1e-12)
    assert estimate_eta(spec) == pytest.approx(eta, rel=1e-2)


def test_probability_encoding_halves_eta():
    spec = registry_spec("normal", sigma=0.5)
    assert eta_bound(standardize(spec, "probability")) == pytest.approx(eta_bound(spec) / 2)


def test_eta_refuses_landmarks():
    with pytest.raises(SingularityError):
        eta_bound(registry_spec("exp_x32"))
    with pytest.raises(SingularityError):
        eta_bound(registry_spec("black_scholes"))


def test_default_landmarks():
    assert registry_spec("sine").zeros == (0.0, math.pi)
    bs = registry_spec("black_scholes", K=45, c=3)
    edge = math.log(45 * 135)
    assert bs.zeros == pytest.approx((-edge, edge))
    assert registry_spec("exp_x32").singular_points == (0.0,)
    assert registry_spec("exp_x32", domain=(0.1, 1.0)).singular_points == ()
    beta = registry_spec("beta", alpha=0.5, beta=3.0)
    assert beta.singular_points == (0.0,) and beta.zeros == (1.0,)


def test_black_scholes_vanishes_at_edges():
    spec = registry_spec("black_scholes")
    assert spec(np.array(spec.domain)) == pytest.approx([0.0, 0.0], abs=1e-12)


def test_validation():
    with pytest.raises(DomainError):
        registry_spec("normal", sigma=0.0)
    with pytest.raises(DomainError):
        FunctionSpec("normal", domain=(1.0, 1.0))
    with pytest.raises(DomainError):
        FunctionSpec("uniform", zeros=(2.0,))
    with pytest.raises(DomainError):
        FunctionSpec("nope")
    with pytest.raises(DomainError):
        FunctionSpec("sine", zero_kinds=("same_slope_sign",))


def test_degenerate_and_non_finite():
    with pytest.raises(DegenerateFunction):
        discretize(FunctionSpec("tabulated", {"samples": [0.0, 0.0, 0.0]}), 3)
    with pytest.raises(DomainError):
        discretize(registry_spec("beta", alpha=0.5, beta=2.0), 3)


def test_endpoint_zeros_degenerate_at_n1():
    # the two grid points are the domain ends, where beta(2, 2) vanishes
    with pytest.raises(DegenerateFunction):
        discretize(registry_spec("beta", alpha=2.0, beta=2.0), 1)


def test_json_round_trip():
    spec = FunctionSpec("sine", zero_kinds=(OPPOSITE_SLOPE, "same_slope_sign"))
    assert FunctionSpec.from_json(json.dumps(spec.to_dict())) == spec


def test_grid_endpoints():
    spec = registry_spec("sine")
    g = grid(spec, 4)
    assert g[0] == 0.0 and g[-1] == pytest.approx(1.5 * math.pi) and g.size == 16


def test_tabulated_interpolates_linearly():
    spec = FunctionSpec("tabulated", {"samples": [1.0, 3.0]}, domain=(0.0, 2.0))
    assert spec(np.array([0.5, 1.0])) == pytest.approx([1.5, 2.0])


@pytest.mark.parametrize("family", [f for f in FAMILIES if f != "tabulated"])
@pytest.mark.parametrize("n", [3, 6, 18])
def test_norm_is_one(family, n):
    spec = registry_spec(family)
    if family == "beta":
        spec = registry_spec(family, alpha=2.0, beta=3.0)
    assert np.linalg.norm(discretize(spec, n).amplitudes) == pytest.approx(1.0, abs=1e-12)


@given(st.floats(-2, 2), st.floats(0.1, 3), st.floats(0.05, 2), st.integers(1, 10))
def test_standardized_matches_direct(lo, width, sigma, n):
    spec = registry_spec("normal", mu=0.3, sigma=sigma, domain=(lo, lo + width))
    direct = spec(grid(spec, n))
    norm = np.linalg.norm(direct)
    if norm == 0.0:
        # the gaussian underflows on a far-away domain
        with pytest.raises(DegenerateFunction):
            discretize(spec, n)
        return
    np.testing.assert_allclose(discretize(spec, n).amplitudes, direct / norm, atol=1e-12)
