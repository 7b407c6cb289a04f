"""Closed-form single-cell model, checked against tests/oracles.py."""

import math
from dataclasses import replace
from unittest import mock

import numpy as np
import pytest
from scipy import integrate

import oracles
from dronecell import analytic
from dronecell.analytic import (
    AnalyticScenario, QuadratureError, high_snr_bound, hover_se_at, hover_se_expected,
    mobile_se_at, mobile_se_expected, moving_time, parse_range, parse_sweep_spec,
    radial_expectation, sweep,
)
from dronecell.channel import ChannelParams

BASE = AnalyticScenario()
TAUS = [0.5 * k for k in range(1, 13)]


@pytest.mark.parametrize("r0, expected", [(0.0, 18.934922639342439), (40.0, 9.5350239115731349)])
def test_hover_se_at(r0, expected):
    assert hover_se_at(BASE, r0) == pytest.approx(expected, rel=1e-10)


def test_hover_se_at_decreasing():
    values = [hover_se_at(BASE, r) for r in np.linspace(0, 40, 100)]
    assert np.all(np.diff(values) < 0)
    with pytest.raises(ValueError):
        hover_se_at(BASE, 41.0)


def test_radial_expectation_of_constant():
    assert radial_expectation(BASE, lambda r: 3.25) == pytest.approx(3.25, rel=1e-12)


def test_tiny_disk_collapses_to_overhead():
    tiny = replace(BASE, radius=0.1)
    assert hover_se_expected(tiny) == pytest.approx(hover_se_at(tiny, 0.0), rel=1e-5)


def test_hover_expected_value():
    assert hover_se_expected(BASE) == pytest.approx(12.7730316771273735, rel=1e-8)


def test_moving_time():
    assert moving_time(replace(BASE, tau=3.0), 40.0) == 3.0
    assert moving_time(replace(BASE, tau=3.0), 20.0) == 2.0
    assert moving_time(replace(BASE, speed=0.0), 20.0) == 1.0
    assert moving_time(BASE, 0.0) == 0.0


def test_mobile_at_examples():
    assert mobile_se_at(BASE, 0.0) == hover_se_at(BASE, 0.0)
    scn = replace(BASE, tau=3.0)
    value = mobile_se_at(scn, 40.0)
    assert value == pytest.approx(13.2802355820686076, rel=1e-8)
    assert hover_se_at(scn, 40.0) < value < hover_se_at(scn, 10.0)
    assert value == pytest.approx(float(oracles.mobile_at(40.0, tau=3.0)), rel=1e-8)


def test_mobile_at_long_tau_tends_to_overhead():
    far = replace(BASE, tau=1e6)
    assert mobile_se_at(far, 40.0) == pytest.approx(hover_se_at(far, 0.0), rel=1e-5)


@pytest.mark.parametrize("tau", [0.5, 2.0, 6.0])
def test_mobile_at_between_hover_and_overhead(tau):
    scn = replace(BASE, tau=tau)
    top = hover_se_at(scn, 0.0)
    for r0 in np.linspace(0, 40, 21):
        value = mobile_se_at(scn, r0)
        assert hover_se_at(scn, r0) - 1e-9 <= value <= top + 1e-9


@pytest.mark.parametrize("tau, expected", [
    (0.5, 13.41659333), (2.0, 15.32257565), (6.0, 17.61488649),
])
def test_mobile_expected_values(tau, expected):
    assert mobile_se_expected(replace(BASE, tau=tau)) == pytest.approx(expected, rel=1e-7)


def test_zero_speed_is_hovering():
    assert mobile_se_expected(replace(BASE, speed=0.0, tau=4.0)) == pytest.approx(
        hover_se_expected(BASE), rel=1e-9)


def test_monotone_in_tau_and_speed():
    rows = sweep(TAUS, [10.0, 15.0, 20.0])
    grid = np.array([r.mobile_se for r in rows]).reshape(3, len(TAUS))
    assert np.all(np.diff(grid, axis=1) >= -1e-9)
    assert np.all(np.diff(grid, axis=0) >= -1e-9)
    for row in rows:
        assert 1.0 <= row.ratio <= row.bound
        assert row.ratio == pytest.approx(row.mobile_se / row.hover_se)
    assert [(r.speed, r.tau) for r in rows[:2]] == [(10.0, 0.5), (10.0, 1.0)]


def test_bound_value():
    assert high_snr_bound(BASE) == pytest.approx(2.1988407589832824, rel=1e-12)
    assert high_snr_bound(BASE) == pytest.approx(float(oracles.bound()), rel=1e-12)


def test_bound_degenerates_to_one():
    params = ChannelParams(a_los=41.1, a_nlos=41.1, gamma_los=2.09, gamma_nlos=2.09)
    assert high_snr_bound(AnalyticScenario(radius=10.0, params=params)) == pytest.approx(1.0)


def test_bound_warns_at_low_snr():
    with pytest.warns(UserWarning):
        high_snr_bound(replace(BASE, radius=4000.0))


def test_quadrature_agrees_with_monte_carlo():
    hover_mc = oracles.mc_hover()
    assert hover_se_expected(BASE) == pytest.approx(hover_mc, rel=1e-3)
    for tau in (0.5, 6.0):
        mobile_mc = oracles.mc_mobile(n=10**6, tau=tau)
        assert mobile_se_expected(replace(BASE, tau=tau)) == pytest.approx(mobile_mc, rel=1e-3)


def test_non_convergence_is_reported():
    def noisy(*args, **kwargs):
        import warnings
        warnings.warn("did not converge", integrate.IntegrationWarning)
        return 0.0, 1.0

    with mock.patch.object(analytic.integrate, "quad", noisy):
        with pytest.raises(QuadratureError):
            hover_se_expected(BASE)


@pytest.mark.parametrize("kwargs", [{"radius": 0.0}, {"tau": 0.0}, {"speed": -1.0}])
def test_scenario_validation(kwargs):
    with pytest.raises(ValueError):
        AnalyticScenario(**kwargs)


def test_parse_range():
    assert parse_range("0.5:6:0.5") == TAUS
    assert parse_range("10,15, 20") == [10.0, 15.0, 20.0]
    assert parse_range("1:1:1") == [1.0]
    with pytest.raises(ValueError):
        parse_range("1:2:0")


def test_parse_sweep_spec():
    assert parse_sweep_spec("") == (TAUS, [10.0, 15.0, 20.0])
    assert parse_sweep_spec("tau=1,2 v=5") == ([1.0, 2.0], [5.0])
    for bad in ("tau", "h=3"):
        with pytest.raises(ValueError):
            parse_sweep_spec(bad)


def test_ceiling_ratio():
    ceiling = hover_se_at(BASE, 0.0) / hover_se_expected(BASE)
    assert ceiling == pytest.approx(1.4824, abs=1e-4)
    assert mobile_se_expected(replace(BASE, tau=6.0)) / hover_se_expected(BASE) < ceiling
    assert math.isfinite(ceiling)
