import math

import numpy as np
import pytest
from scipy.optimize import minimize

from chaoslab.model import (
    ShellSampler,
    classical_ground_energy,
    critical_coupling,
    energy_minima,
    epsilon_zero,
    ground_state_energy,
    normal_modes,
    quadratic_hamiltonian,
    quadratic_validity,
    superradiant_minima,
)
from chaoslab.params import ModelParams
from chaoslab.phase_space import ClassicalState, eom_rhs, hamiltonian_phi, hamiltonian_qp, hamiltonian_value


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(j=0.3)
    with pytest.raises(ValueError):
        ModelParams(delta=2)
    with pytest.raises(ValueError):
        ModelParams(omega=0)
    with pytest.raises(ValueError):
        ModelParams(gamma=-1)
    p = ModelParams.from_ratio(2.0, j=3)
    assert p.ratio == pytest.approx(2.0)
    assert p.n_atoms == 6


def test_critical_coupling_and_phase():
    p = ModelParams(omega=2.0, omega0=0.5)
    assert critical_coupling(p) == pytest.approx(0.5)
    assert critical_coupling(p.with_(delta=0)) == pytest.approx(1.0)
    assert ModelParams.from_ratio(0.5).phase() == "normal"
    assert ModelParams.from_ratio(1.0).phase() == "critical"
    assert ModelParams.from_ratio(1.5).phase() == "superradiant"


def test_epsilon_zero_closed_form():
    p = ModelParams.from_ratio(2.0, j=40)
    assert epsilon_zero(p) == pytest.approx(-2.125, abs=1e-14)
    assert epsilon_zero(ModelParams.from_ratio(1.0)) == pytest.approx(-1.0)


def _numerical_minimum(p):
    # oracle: brute minimisation of H_cl over (q, p, phi, jz/j) from several starts
    j = p.j
    best = math.inf
    for q0 in (-3.0, 0.0, 3.0):
        for phi0 in (0.1, 2.0, 3.0):
            for z0 in (-0.9, -0.3):
                f = lambda x: hamiltonian_phi(x[0] * math.sqrt(j), x[1] * math.sqrt(j), x[2], j * math.tanh(x[3]), p)
                r = minimize(f, [q0, 0.0, phi0, math.atanh(z0)], method="Nelder-Mead",
                             options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000})
                best = min(best, r.fun)
    # the south pole (tanh -> -1) is only reached asymptotically
    best = min(best, -p.omega0 * j)
    return best / p.energy_scale


@pytest.mark.parametrize("ratio", [0.0, 0.5, 0.9, 1.2, 2.0, 3.0])
def test_ground_energy_matches_minimisation(ratio):
    p = ModelParams.from_ratio(ratio, j=5)
    assert ground_state_energy(p) == pytest.approx(_numerical_minimum(p), abs=1e-7)


@pytest.mark.parametrize("delta", [0, 1])
def test_minima_are_fixed_points(delta):
    p = ModelParams.from_ratio(2.0, j=4, delta=delta)
    for m in superradiant_minima(p):
        s = ClassicalState(m.q_m, m.p_m, m.phi_m, m.jz_m)
        assert hamiltonian_value(s, p) == pytest.approx(classical_ground_energy(p), rel=1e-12)
        assert np.allclose(eom_rhs(s, p, "phi"), 0.0, atol=1e-12)


def test_minima_converge_to_south_pole():
    p = ModelParams.from_ratio(1.0 + 1e-9, j=2)
    for m in superradiant_minima(p):
        assert abs(m.q_m) < 1e-3 and m.jz_m == pytest.approx(-p.j, abs=1e-6)
    assert len(energy_minima(ModelParams.from_ratio(0.5))) == 1
    with pytest.raises(ValueError):
        superradiant_minima(ModelParams.from_ratio(0.5))


def _hessian_frequencies(p, centre):
    # oracle: normal frequencies from a finite-difference Hessian in the canonical (q, p, Q1, P1) chart
    h = 1e-4
    x0 = np.asarray(centre, dtype=float)
    f = lambda x: hamiltonian_qp(*x, p)
    H = np.zeros((4, 4))
    for a in range(4):
        for b in range(4):
            ea, eb = np.eye(4)[a] * h, np.eye(4)[b] * h
            H[a, b] = (f(x0 + ea + eb) - f(x0 + ea - eb) - f(x0 - ea + eb) + f(x0 - ea - eb)) / (4 * h * h)
    # canonical pairs are (q, p) and (Q1, P1)
    Jm = np.array([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]])
    w = np.abs(np.linalg.eigvals(Jm @ H).imag)
    return np.sort(np.unique(np.round(w, 6)))[::-1]


@pytest.mark.parametrize("ratio", [0.3, 0.8, 1.4, 2.0, 3.0])
def test_normal_modes_match_hessian(ratio):
    p = ModelParams.from_ratio(ratio, j=20, omega=1.0, omega0=1.0)
    centre = energy_minima(p)[0]
    centre = centre.qp_chart(p.j)
    w = _hessian_frequencies(p, centre)
    nm = normal_modes(p)
    assert nm.omega_plus == pytest.approx(w[0], abs=1e-5)
    assert nm.omega_minus == pytest.approx(w[-1], abs=1e-5)


def test_normal_modes_off_resonance():
    p = ModelParams.from_ratio(0.6, j=10, omega=1.7, omega0=0.6)
    w = _hessian_frequencies(p, energy_minima(p)[0].qp_chart(p.j))
    nm = normal_modes(p)
    assert (nm.omega_plus, nm.omega_minus) == pytest.approx((w[0], w[-1]), abs=1e-5)


def test_normal_modes_critical_soft_mode():
    nm = normal_modes(ModelParams.from_ratio(1.0))
    assert nm.omega_minus == 0.0
    assert nm.omega_plus == pytest.approx(math.sqrt(2.0))


@pytest.mark.parametrize("ratio", [0.4, 2.0])
def test_quadratic_hamiltonian_is_second_order(ratio):
    p = ModelParams.from_ratio(ratio, j=10)
    c = np.asarray(energy_minima(p)[0].qp_chart(p.j))
    rng = np.random.default_rng(3)
    d = rng.standard_normal(4)
    d /= np.linalg.norm(d)
    errs = []
    for s in (1e-2, 5e-3):
        x = c + s * d
        errs.append(abs(hamiltonian_qp(*x, p) - quadratic_hamiltonian(p, x)))
    # residual is cubic in the displacement
    assert errs[1] < errs[0] / 6.0


def test_quadratic_hamiltonian_errors():
    with pytest.raises(ValueError):
        quadratic_hamiltonian(ModelParams.from_ratio(1.0), (0, 0, 0, 0))
    with pytest.raises(ValueError):
        quadratic_hamiltonian(ModelParams.from_ratio(0.5, delta=0), (0, 0, 0, 0))


def test_validity_zero_coupling_is_exact():
    p = ModelParams(gamma=0.0, j=10)
    assert quadratic_validity(p, 0.3 * p.energy_scale, ShellSampler(n_points=2000)) < 1e-12


def test_validity_errors():
    p = ModelParams.from_ratio(2.0, j=10)
    with pytest.raises(ValueError):
        quadratic_validity(p, classical_ground_energy(p) - 1.0)
    with pytest.raises(ValueError):
        quadratic_validity(p, classical_ground_energy(p))
    with pytest.raises(ValueError):
        quadratic_validity(ModelParams.from_ratio(1.0), 0.0)


def test_sampler_points_on_shell_and_nested():
    p = ModelParams.from_ratio(2.0, j=10)
    E = -1.5 * p.energy_scale
    small = ShellSampler(n_points=500, seed=4).sample(p, E)
    big = ShellSampler(n_points=1000, seed=4).sample(p, E)
    assert np.allclose(hamiltonian_qp(*big.T, p), E, atol=1e-6 * (E - classical_ground_energy(p)))
    assert np.array_equal(small, big[:500])
    # refinement never lowers the maximum: the bigger sample contains the smaller
    v_small = quadratic_validity(p, E, ShellSampler(n_points=500, seed=4))
    v_big = quadratic_validity(p, E, ShellSampler(n_points=1000, seed=4))
    assert v_big >= v_small


def test_frozen_superradiant_values():
    p = ModelParams.from_ratio(2.0, j=40)
    nm = normal_modes(p)
    # 2 w^2 = 17 +/- sqrt(229) at omega = omega0 = 1
    assert nm.omega_plus == pytest.approx(math.sqrt((17 + math.sqrt(229)) / 2), rel=1e-12)
    assert nm.omega_minus == pytest.approx(math.sqrt((17 - math.sqrt(229)) / 2), rel=1e-12)
    assert (nm.omega_plus, nm.omega_minus) == pytest.approx((4.00829, 0.96624), abs=1e-5)
    for m in superradiant_minima(p):
        assert m.jz_m / p.j == pytest.approx(-0.25, rel=1e-12)
        assert abs(m.q_m) == pytest.approx(12.2474, abs=1e-4)
        assert m.p_m == 0.0 and math.copysign(1, m.q_m) == -math.copysign(1, math.cos(m.phi_m))


def test_soft_mode_near_critical_coupling():
    for r in (0.99, 1.01):
        assert normal_modes(ModelParams.from_ratio(r)).omega_minus < 0.2
    nm = normal_modes(ModelParams(gamma=0.0))
    assert (nm.omega_plus, nm.omega_minus) == pytest.approx((1.0, 1.0))


def test_ground_energy_random_sets():
    rng = np.random.default_rng(17)
    for _ in range(20):
        p = ModelParams.from_ratio(rng.uniform(0, 3), j=int(rng.integers(1, 40)) / 2,
                                   omega=rng.uniform(0.5, 2), omega0=rng.uniform(0.5, 2))
        ref = _numerical_minimum(p)
        assert ground_state_energy(p) == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("ratio", [0.5, 2.0])
def test_quadratic_hamiltonian_at_minimum(ratio):
    p = ModelParams.from_ratio(ratio, j=10)
    for m in energy_minima(p):
        assert quadratic_hamiltonian(p, m.qp_chart(p.j)) == pytest.approx(classical_ground_energy(p), rel=1e-13)


def test_validity_is_scale_free():
    s = ShellSampler(n_points=1000, seed=2)
    a = ModelParams.from_ratio(0.6, j=10)
    b = ModelParams.from_ratio(0.6, j=10, omega=2.5, omega0=2.5)
    assert quadratic_validity(a, 0.2 * a.energy_scale, s) == pytest.approx(
        quadratic_validity(b, 0.2 * b.energy_scale, s), rel=1e-9)


def test_validity_vanishes_at_the_minimum():
    p = ModelParams.from_ratio(2.0, j=10)
    s = ShellSampler(n_points=1000)
    e0 = classical_ground_energy(p)
    v = [quadratic_validity(p, e0 + d * p.energy_scale, s) for d in (1e-2, 1e-3, 1e-4)]
    # cubic remainder over a quadratic well: v ~ sqrt(E - E_gs)
    for a, b in zip(v, v[1:]):
        assert a / b == pytest.approx(math.sqrt(10), rel=0.1)
    assert v[-1] < 5e-3


def test_validity_threshold_moves_down_towards_critical():
    s = ShellSampler(n_points=2000)
    grid = np.arange(-0.95, 2.0, 0.05)
    first = []
    for r in (0.3, 0.6, 0.9):
        p = ModelParams.from_ratio(r, j=40)
        v = np.array([quadratic_validity(p, e * p.energy_scale, s) for e in grid])
        first.append(grid[np.argmax(v > 0.1)])
    assert first[0] > first[1] > first[2]
