import json
import math

import numpy as np
import pytest

import certbound as cb


def test_gaussian_helpers():
    assert cb.erfcx(3.0) == pytest.approx(0.17900115118138995, rel=1e-13)
    assert cb.log_gaussian_q(10.0) == pytest.approx(-53.231285150512471, rel=1e-13)
    q = cb.gaussian_q(np.array([0.0, 1.0]))
    assert q.shape == (2,)
    assert q[0] == pytest.approx(0.5)


def test_distribution_roundtrip():
    d = cb.Distribution.from_weights([0.0, 1.0], [0.8, 0.2])
    assert len(d) == 2
    assert d.is_exact
    np.testing.assert_allclose(d.weights, [0.8, 0.2], rtol=1e-15)
    assert d.mean() == pytest.approx(0.2)
    assert not cb.Distribution.chi_squared(501).is_exact


def test_tilted_moments_bernoulli():
    m = cb.tilted_moments(cb.Distribution.bernoulli(0.2), 0.7)
    assert m.k == pytest.approx(0.18461105181066519, rel=1e-13)
    assert m.k1 == pytest.approx(0.33485791741468322, rel=1e-13)
    assert m.xi == pytest.approx(0.53351813240065331, rel=1e-12)


def test_envelope_contains_binomial_cdf():
    d = cb.Distribution.bernoulli(0.2)
    for a in (12.0, 20.0, 30.0):
        exact = cb.binomial_cdf(100, 0.2, a)
        env = cb.thm3_envelope(d, 100, a)
        assert env.lower <= exact <= env.upper
        assert env.method
    s = cb.solve_theta_star(d, 100, 30.0)
    assert s.theta_star == pytest.approx(0.53899650073268701, abs=1e-8)
    assert cb.exponent_h(d, 100, 30.0) == pytest.approx(-2.8167557595283478, rel=1e-9)


def test_out_of_hull_raises_with_code():
    with pytest.raises(cb.CertboundError) as info:
        cb.solve_theta_star(cb.Distribution.bernoulli(0.2), 10, 20.0)
    assert info.value.code == "OutOfHull"


def test_stable_density_closed_forms():
    z = np.linspace(-3.0, 3.0, 7)
    cauchy = 1.0 / (math.pi * (1.0 + z**2))
    np.testing.assert_allclose(cb.sas_density(1.0, 1.0, z), cauchy, rtol=1e-9)
    assert cb.sas_density(1.4, 1.0, 2.0) == pytest.approx(0.080298148617241337, rel=1e-9)


def test_bsc_dependence_testing_sandwich():
    density = cb.build_density(cb.ChannelModel.bsc(0.11))
    n = 500
    m = cb.CodeSize.from_rate(n, 0.32)
    p = cb.dt_bounds(density, n, m)
    exact = cb.bsc_exact_t(0.11, n, m)
    assert exact == pytest.approx(3.4802721827153945e-5, rel=1e-9)
    assert p.sp.g <= exact <= p.sp.s
    assert p.normal.d <= exact <= p.normal.n_upper


def test_meta_converse_gamma_search():
    density = cb.build_density(cb.ChannelModel.bsc(0.11))
    search = cb.mc_optimize_gamma(density, 300, cb.CodeSize.from_rate(300, 0.42))
    assert search.point.flavor == "mc"
    assert math.isfinite(search.log_gamma)


def test_monte_carlo_is_seeded():
    d = cb.Distribution.bernoulli(0.2)
    a = cb.mc_cdf(d, 50, 8.0, 20000, 7)
    b = cb.mc_cdf(d, 50, 8.0, 20000, 7, threads=2)
    assert a.value == b.value
    assert a.ci95_low <= cb.binomial_cdf(50, 0.2, 8.0) <= a.ci95_high


def test_presets_render():
    assert "fig1" in cb.PRESETS
    table = cb.run_table(preset="fig1")
    assert table["columns"][0] == "a"
    assert len(table["rows"]) == 31
    assert not table["failures"]
    doc = json.loads(cb.render(preset="fig3a", format="json"))
    assert doc["command"] == "dt-curve"
    csv = cb.render("n_grid: {start: 100, stop: 300, step: 100}\n", preset="fig3a")
    assert csv.startswith("# certbound")


def test_bad_config_raises():
    with pytest.raises(cb.CertboundError) as info:
        cb.run_table("bogus_key: 1\n", preset="fig1")
    assert info.value.code == "ConfigError"
