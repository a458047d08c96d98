import logging
import math

import numpy as np
import pytest
from scipy.integrate import quad

from chaoslab.dos import cumulative
from chaoslab.params import ModelParams
from chaoslab.stats import (
    AD_CRITICAL_95,
    anderson_darling,
    monte_carlo_ad,
    scan_windows,
    unfold,
    wigner_cdf,
    wigner_median,
    wigner_pdf,
    wigner_sample,
)


def ad_integral_oracle(x):
    """A^2 from its defining integral n * int (F_n - u)^2 / (u (1 - u)) du over u = F(x)."""
    u = np.sort(1.0 - np.exp(-np.pi * np.asarray(x) ** 2 / 4))
    n = len(u)
    edges = np.concatenate([[0.0], u, [1.0]])
    total = 0.0
    # (c - t)^2 / (t (1 - t)) = -1 + c^2 / t + (1 - c)^2 / (1 - t)
    for k in range(n + 1):
        c = k / n
        a, b = edges[k], edges[k + 1]
        total += a - b
        if c > 0:
            total += c * c * (math.log(b) - math.log(a))
        if c < 1:
            total += (1 - c) ** 2 * (math.log1p(-a) - math.log1p(-b))
    return n * total


def test_wigner_pdf_and_cdf():
    assert quad(wigner_pdf, 0, np.inf)[0] == pytest.approx(1.0, abs=1e-12)
    assert quad(lambda s: s * wigner_pdf(s), 0, np.inf)[0] == pytest.approx(1.0, abs=1e-12)
    assert wigner_median() == pytest.approx(0.93944, abs=1e-5)
    assert wigner_cdf(wigner_median()) == pytest.approx(0.5, abs=1e-14)
    s = np.linspace(0, 4, 9)
    h = 1e-6
    fd = (wigner_cdf(s + h) - wigner_cdf(np.maximum(s - h, 0))) / (s + h - np.maximum(s - h, 0))
    assert fd == pytest.approx(wigner_pdf(s), abs=1e-6)
    with pytest.raises(ValueError):
        wigner_pdf(-0.1)
    with pytest.raises(ValueError):
        wigner_cdf([0.5, -1.0])


def test_wigner_sampler_moments():
    x = wigner_sample(200_000, np.random.default_rng(3))
    assert x.mean() == pytest.approx(1.0, abs=5e-3)
    assert np.median(x) == pytest.approx(wigner_median(), abs=1e-2)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_ad_matches_integral_form(seed):
    rng = np.random.default_rng(seed)
    for x in (wigner_sample(50, rng), rng.exponential(1.0, 50)):
        assert anderson_darling(x) == pytest.approx(ad_integral_oracle(x), rel=1e-8)


def test_ad_is_order_invariant():
    rng = np.random.default_rng(9)
    x = wigner_sample(300, rng)
    a = anderson_darling(x)
    for _ in range(5):
        assert anderson_darling(rng.permutation(x)) == a


def test_ad_zero_spacing_is_finite():
    x = np.array([0.0, 0.0, 0.5, 1.0, 1.5])
    a = anderson_darling(x)
    assert math.isfinite(a) and a > AD_CRITICAL_95
    with pytest.raises(ValueError):
        anderson_darling([1.0])
    with pytest.raises(ValueError):
        anderson_darling([1.0, -0.2, 0.4])


def test_monte_carlo_reference_values():
    w = monte_carlo_ad(2000, 300, "wigner", seed=1)
    # A^2 under the null: mean 1, 95th percentile ~ 2.49
    assert w.mean() == pytest.approx(1.0, abs=0.05)
    assert np.mean(w > AD_CRITICAL_95) == pytest.approx(0.05, abs=0.015)
    assert np.median(monte_carlo_ad(500, 300, "poisson", seed=1)) > 20
    with pytest.raises(ValueError):
        monte_carlo_ad(2, 10, "gue")


# --- unfolding ----------------------------------------------------------------

@pytest.fixture(scope="module")
def G():
    p = ModelParams.from_ratio(2.0, j=20)
    return cumulative(p, E_hi=3.0 * p.energy_scale)


def test_unfold_is_linear_above_plus_one(G):
    p = G.params
    E = np.linspace(1.2, 2.8, 50) * p.energy_scale
    u = unfold(E, G)
    assert u.spacings == pytest.approx(np.diff(E) * p.j / p.omega, rel=1e-10)
    assert u.approx_spacings == pytest.approx(u.spacings, rel=1e-10)


def test_local_density_approximation(G):
    p = G.params
    rng = np.random.default_rng(0)
    for lo, hi in ((-2.0, -1.1), (-0.9, 0.9)):
        E = np.sort(rng.uniform(lo, hi, 200)) * p.energy_scale
        u = unfold(E, G)
        # only where the density varies slowly over a spacing
        assert np.max(np.abs(u.approx_spacings / u.spacings - 1)) < 0.01


def test_unfold_rejections(G):
    p = G.params
    E = np.linspace(-1.5, 0.0, 10) * p.energy_scale
    with pytest.raises(ValueError):
        unfold(E, G, converged=np.r_[np.ones(9, bool), False])
    with pytest.raises(ValueError):
        unfold(E[::-1], G)
    with pytest.raises(ValueError):
        unfold(np.r_[G.E_gs - 1.0, E], G)
    with pytest.raises(ValueError):
        unfold(E[:1], G)


def test_unfold_drops_duplicates(G, caplog):
    p = G.params
    E = np.array([-1.0, -0.5, -0.5, 0.0]) * p.energy_scale
    with caplog.at_level(logging.WARNING):
        u = unfold(E, G)
    assert u.energies.size == 3 and "near-duplicate" in caplog.text


# --- window scans -------------------------------------------------------------

class _Fake:
    def __init__(self, e):
        self.unfolded = np.asarray(e)
        self.spacings = np.diff(e)
        self.scaled_energies = np.asarray(e)


def test_scan_flags_match_threshold():
    rng = np.random.default_rng(5)
    e = np.concatenate([[0.0], np.cumsum(np.r_[wigner_sample(700, rng), rng.exponential(1.0, 700)])])
    s = scan_windows(_Fake(e), N=301, step=50)
    assert np.array_equal(s.reject, s.a2 > AD_CRITICAL_95)
    assert s.reject[-1] and not s.reject[0]
    assert s.first_accept() == s.eps_center[0]
    assert s.a2[0] == pytest.approx(anderson_darling(np.diff(e[:301])))


def test_scan_is_not_scale_free():
    # A^2 is taken against the unit-mean surmise: raw spacings are not rescaled
    rng = np.random.default_rng(6)
    e = np.concatenate([[0.0], np.cumsum(wigner_sample(400, rng))])
    a = scan_windows(_Fake(e), N=301, step=100).a2
    b = scan_windows(_Fake(2.0 * e), N=301, step=100).a2
    assert np.all(b > a)


def test_scan_errors():
    e = np.arange(100.0)
    with pytest.raises(ValueError):
        scan_windows(_Fake(e), N=301)
    with pytest.raises(ValueError):
        scan_windows(_Fake(e), N=2)
    with pytest.raises(ValueError):
        scan_windows(_Fake(e), N=10, step=0)
