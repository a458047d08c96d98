import math

import numpy as np
import pytest
from scipy.integrate import quad

from chaoslab.dos import (
    CumulativeDensity,
    QuadratureError,
    branch,
    cumulative,
    dos,
    dos_curve,
    dos_peak_scan,
    reduced_dos,
    y_bounds,
)
from chaoslab.model import ground_state_energy
from chaoslab.params import ModelParams


# --- independent oracle -------------------------------------------------------
# Integrating out the boson at fixed spin (Q1, P1) leaves the potential
#   U(r) = -w0 j + w0 r^2/2 - 2 gamma^2 (1 - r^2/4j) P1^2 / w,   r^2 = Q1^2 + P1^2 <= 4j
# and the boson plane contributes (2 pi / w) (E - U)_+. The DoS is then the
# area of {U <= E} over 2 pi w and the phase volume gives the level count.

def _intervals(a, b, c0, R2):
    """Sub-intervals of [0, R2] where a x^2 + b x + c0 <= 0."""
    xs = [0.0, R2]
    if a > 0:
        disc = b * b - 4 * a * c0
        if disc > 0:
            xs += [x for x in ((-b - math.sqrt(disc)) / (2 * a), (-b + math.sqrt(disc)) / (2 * a)) if 0 < x < R2]
    elif b != 0:
        x = -c0 / b
        if 0 < x < R2:
            xs.append(x)
    xs = sorted(xs)
    return [(lo, hi) for lo, hi in zip(xs[:-1], xs[1:]) if a * ((lo + hi) / 2) ** 2 + b * (lo + hi) / 2 + c0 <= 0]


def _coeffs(p, E, th):
    c2 = math.cos(th) ** 2
    j, w, w0, g = p.j, p.omega, p.omega0, p.gamma
    return 2 * g * g * c2 / (4 * j * w), 0.5 * w0 - 2 * g * g * c2 / w, -w0 * j - E


def area_dos(p, E):
    def length(th):
        return sum(hi - lo for lo, hi in _intervals(*_coeffs(p, E, th), 4 * p.j))

    # polar area element: d(area) = (1/2) d(r^2) d(theta)
    val = 4 * quad(lambda th: 0.5 * length(th), 0, math.pi / 2, limit=400, epsabs=1e-13, epsrel=1e-12)[0]
    return val / (2 * math.pi * p.omega)


def volume_count(p, E):
    def inner(th):
        a, b, c0 = _coeffs(p, E, th)
        # integral of (E - U) = -(a x^2 + b x + c0) over the sub-level set
        F = lambda x: -(a * x**3 / 3 + b * x * x / 2 + c0 * x)
        return sum(F(hi) - F(lo) for lo, hi in _intervals(a, b, c0, 4 * p.j))

    area_int = 4 * quad(lambda th: 0.5 * inner(th), 0, math.pi / 2, limit=400, epsabs=1e-12, epsrel=1e-12)[0]
    vol = 2 * math.pi / p.omega * area_int
    return vol / (2 * (2 * math.pi) ** 2)


# --- closed-form limits -------------------------------------------------------

def test_flat_above_plus_one():
    p = ModelParams.from_ratio(1.7, j=12, omega=1.4)
    for eps in (1.0001, 1.5, 4.0):
        assert dos(eps, p) == pytest.approx(2 * p.j / p.omega, rel=1e-14)
    assert branch(1.5, p) == "above_plus1" and branch(0.0, p) == "middle" and branch(-1.2, p) == "below_minus1"


@pytest.mark.parametrize("ratio", [1.2, 2.0, 3.5])
def test_vanishes_at_ground_state(ratio):
    p = ModelParams.from_ratio(ratio, j=10)
    e0 = ground_state_energy(p)
    vals = [dos(e0 + d, p) for d in (1e-2, 1e-4, 1e-6)]
    assert vals[0] > vals[1] > vals[2] >= 0
    assert vals[2] < 1e-4 * dos(1.5, p)
    assert dos(e0, p) == pytest.approx(0.0, abs=1e-12)


def test_normal_phase_starts_at_minus_one():
    p = ModelParams.from_ratio(0.6, j=10)
    assert dos(-1.0, p) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        dos(-1.01, p)


def test_zero_coupling_limit():
    p = ModelParams(gamma=0.0, j=5, omega=2.0)
    for eps in (-0.8, 0.0, 0.6):
        assert dos(eps, p) == pytest.approx(2 * p.j / p.omega * 0.5 * (eps + 1), rel=1e-14)
    # weak coupling tends to the decoupled ramp
    small = ModelParams(gamma=1e-4, j=5, omega=2.0)
    assert dos(0.2, small) == pytest.approx(dos(0.2, p), rel=1e-6)


@pytest.mark.parametrize("ratio", [0.4, 2.0])
def test_continuous_across_minus_one(ratio):
    p = ModelParams.from_ratio(ratio, j=10)
    lo = -1.0 - 1e-9 if ratio > 1 else -1.0
    assert dos(lo, p) == pytest.approx(dos(-1.0 + 1e-9, p), abs=1e-5)


def test_continuous_at_plus_one():
    p = ModelParams.from_ratio(2.0, j=10)
    assert dos(1.0 - 1e-10, p) == pytest.approx(dos(1.0 + 1e-10, p), abs=1e-5)


def test_depends_only_on_eps_and_ratio():
    rng = np.random.default_rng(21)
    for _ in range(10):
        ratio = rng.uniform(0.2, 3.0)
        eps = rng.uniform(max(ground_state_energy(ModelParams.from_ratio(ratio)), -1.0 if ratio < 1 else -5) + 0.01, 1.2)
        a = ModelParams.from_ratio(ratio, j=1.0, omega=1.0, omega0=1.0)
        b = ModelParams.from_ratio(ratio, j=int(rng.integers(1, 120)) / 2, omega=rng.uniform(0.3, 3), omega0=rng.uniform(0.3, 3))
        fa, _ = reduced_dos(eps, a)
        fb, _ = reduced_dos(eps, b)
        assert fa == pytest.approx(fb, rel=1e-10, abs=1e-13)
        assert dos(eps, b) == pytest.approx(2 * b.j / b.omega * fb, rel=1e-12)


def test_y_bounds_are_roots():
    for g, eps in ((0.25, -1.5), (0.5, 0.3), (2.0, -0.9)):
        lo, hi = y_bounds(eps, g)
        for y in (lo, hi):
            assert 1 - y * y == pytest.approx(2 * g * (y - eps), abs=1e-13)


def test_rejections():
    p = ModelParams.from_ratio(2.0, j=10)
    with pytest.raises(ValueError):
        dos(ground_state_energy(p) - 0.01, p)
    with pytest.raises(ValueError):
        dos(0.0, ModelParams.from_ratio(2.0, j=10, delta=0))
    assert issubclass(QuadratureError, ArithmeticError)


# --- oracle comparison --------------------------------------------------------

@pytest.mark.parametrize("ratio", [0.5, 2.0, 3.0])
def test_dos_matches_area_oracle(ratio):
    p = ModelParams.from_ratio(ratio, j=7.5, omega=1.3, omega0=0.8)
    for eps in (-1.5, -1.0001, -0.5, 0.3, 0.99, 1.5):
        if eps < max(ground_state_energy(p), -1.0 if ratio < 1 else -10):
            continue
        assert dos(eps, p) == pytest.approx(area_dos(p, eps * p.energy_scale), rel=1e-8)


@pytest.mark.parametrize("ratio", [0.5, 2.0])
def test_cumulative_matches_volume_oracle(ratio):
    p = ModelParams.from_ratio(ratio, j=10)
    G = cumulative(p, E_hi=2.0 * p.energy_scale, resolution=1500)
    assert G(G.E_gs) == pytest.approx(0.0, abs=1e-12)
    for eps in (-1.8, -1.2, -0.999, -0.3, 0.5, 1.0, 1.7):
        E = eps * p.energy_scale
        if E < G.E_gs:
            continue
        assert G(E) == pytest.approx(volume_count(p, E), rel=1e-7, abs=1e-9)


def test_cumulative_slope_above_plus_one():
    p = ModelParams.from_ratio(2.0, j=40)
    G = cumulative(p, E_hi=3.0 * p.energy_scale)
    E1, E2 = 1.5 * p.energy_scale, 2.5 * p.energy_scale
    assert (G(E2) - G(E1)) / (E2 - E1) == pytest.approx(p.j / p.omega, rel=1e-10)
    assert G.density(2.0 * p.energy_scale) == pytest.approx(p.j / p.omega, rel=1e-10)


def test_cumulative_monotone_and_domain():
    p = ModelParams.from_ratio(2.0, j=20)
    G = cumulative(p)
    rng = np.random.default_rng(4)
    E = np.sort(rng.uniform(G.E_lo, G.E_hi, size=(1000, 2)), axis=1)
    v = G(E)
    assert np.all(v[:, 1] >= v[:, 0])
    with pytest.raises(ValueError):
        G(G.E_hi + 1.0)
    with pytest.raises(ValueError):
        G(G.E_gs - 1.0)
    with pytest.raises(ValueError):
        CumulativeDensity(p, E_lo=G.E_gs - 1.0)
    with pytest.raises(ValueError):
        CumulativeDensity(p, E_lo=0.0, E_hi=-1.0)


def test_dos_curve_labels():
    p = ModelParams.from_ratio(2.0, j=10)
    c = dos_curve(p, [-1.5, 0.0, 1.5])
    assert c.branches == ("below_minus1", "middle", "above_plus1")
    assert c.nu == pytest.approx([dos(e, p) for e in (-1.5, 0.0, 1.5)])


# --- features -----------------------------------------------------------------

def test_peak_scan_normal_phase():
    feats = dos_peak_scan(ModelParams.from_ratio(0.5, j=40))
    assert [(round(f.eps, 3), f.kind) for f in feats] == [(1.0, "nonanalytic")]


@pytest.mark.parametrize("ratio, near", [(2.0, -1.005), (1.35, -0.9956)])
def test_peak_scan_superradiant(ratio, near):
    feats = dos_peak_scan(ModelParams.from_ratio(ratio, j=40))
    eps = [f.eps for f in feats]
    assert len(eps) == 2
    assert eps[0] == pytest.approx(near, abs=6e-3) and abs(eps[0] + 1) < 0.01
    assert eps[1] == pytest.approx(1.0, abs=1e-12)
    assert all(f.kind == "nonanalytic" for f in feats)
