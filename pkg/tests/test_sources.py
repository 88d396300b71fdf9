import numpy as np
import pytest

from icadyn import (
    SourceParams,
    analytic_moments,
    empirical_moments,
    moment_argmax,
    peak_moments,
    sample_source,
    sampler_sixth_moment,
)
from icadyn.sources import UNIFORM_HALF_WIDTH


def _rng(seed=0):
    return np.random.default_rng(seed)


def test_params_validation():
    SourceParams(0.0)
    SourceParams(1.0)
    with pytest.raises(ValueError):
        SourceParams(-0.1)
    with pytest.raises(ValueError):
        SourceParams(1.0001)


def test_endpoint_moments_exact():
    m0 = analytic_moments(SourceParams(0.0))
    assert abs(m0.m4 - 1.8) < 1e-12
    assert abs(m0.m6 - 27.0 / 7.0) < 1e-12
    m1 = analytic_moments(SourceParams(1.0))
    assert abs(m1.m4 - 1.0) < 1e-12
    assert abs(m1.m6 - 1.0) < 1e-12


def test_reference_values_at_0p6():
    m = analytic_moments(SourceParams(0.6))
    assert m.m4 == pytest.approx(2.24928, abs=1e-12)
    assert m.m6 == pytest.approx(4.513782857142857, abs=1e-12)
    assert sampler_sixth_moment(SourceParams(0.6)) == pytest.approx(
        6.283254857142857, abs=1e-12
    )


def test_reference_curve_matches_expanded_polynomials():
    # independent route: plain (non-Horner) evaluation of the same curves
    for beta in np.linspace(0.0, 1.0, 23):
        s = beta * beta
        m = analytic_moments(SourceParams(float(beta)))
        assert m.m4 == pytest.approx(1.8 + 2.4 * s - 3.2 * s * s, abs=1e-13)
        assert m.m6 == pytest.approx(
            (27.0 + 24.0 * s - 24.0 * s * s - 20.0 * s**3) / 7.0, abs=1e-13
        )


def test_sampler_gap_is_12_s_one_minus_s_squared():
    # the drawn mixture's sixth moment exceeds the reference curve by
    # exactly 12 s (1-s)^2; zero only at the endpoints
    for beta in np.linspace(0.0, 1.0, 21):
        s = beta * beta
        gap = sampler_sixth_moment(SourceParams(float(beta))) - analytic_moments(
            SourceParams(float(beta))
        ).m6
        assert gap == pytest.approx(12.0 * s * (1.0 - s) ** 2, abs=1e-12)


def test_peak_moments():
    pk = peak_moments()
    assert pk["m4"] == pytest.approx(2.25, abs=1e-12)
    assert pk["beta_m4"] ** 2 == pytest.approx(3.0 / 8.0, abs=1e-14)
    # stationarity of the sixth-moment peak
    for d in (-1e-4, 1e-4):
        assert pk["m6"] > analytic_moments(SourceParams(pk["beta_m6"] + d)).m6
    # closed-form root of 5 s^2 + 4 s - 2
    s6 = pk["beta_m6"] ** 2
    assert 5.0 * s6 * s6 + 4.0 * s6 - 2.0 == pytest.approx(0.0, abs=1e-12)


def test_moment_argmax_grid():
    betas = np.round(np.arange(0.0, 1.01, 0.1), 10)
    b4, b6 = moment_argmax(betas)
    assert b4 == 0.6
    assert b6 == 0.6
    with pytest.raises(ValueError):
        moment_argmax(np.array([]))


def test_sampling_statistics():
    params = SourceParams(0.3)
    c = sample_source(params, _rng(11), size=1_000_000)
    assert abs(c.mean()) < 5e-3
    assert c.var() == pytest.approx(1.0, abs=1e-2)
    emp = empirical_moments(params, 1_000_000, _rng(12))
    assert emp.m4 == pytest.approx(analytic_moments(params).m4, abs=0.02)
    # the drawn sixth moment follows the sampler curve, not the reference one
    assert emp.m6 == pytest.approx(sampler_sixth_moment(params), abs=0.1)


def test_sampling_bounds_and_determinism():
    params = SourceParams(0.8)
    c1 = sample_source(params, _rng(5), size=1000)
    c2 = sample_source(params, _rng(5), size=1000)
    np.testing.assert_array_equal(c1, c2)
    bound = 0.8 + np.sqrt(1 - 0.64) * UNIFORM_HALF_WIDTH
    assert np.max(np.abs(c1)) <= bound + 1e-12
    one = sample_source(params, _rng(6))
    assert isinstance(one, float)
