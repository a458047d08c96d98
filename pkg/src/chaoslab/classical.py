"""Orbit integration, Poincare sections (p = 0) and maximal Lyapunov exponents.

Orbits are integrated in the scaled Cartesian variables
x = q / sqrt(j), P = p / sqrt(j), s = J / j, for which the flow does not depend on j
(energy per j: h = H / j). The spin vector has no coordinate singularity, so
passages over the poles need no special care.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import ode

from .model import classical_ground_energy
from .params import ModelParams
from .phase_space import ClassicalState, cartesian_jacobian, cartesian_rhs, hamiltonian_cartesian

log = logging.getLogger(__name__)

RTOL = 1e-12
ATOL = 1e-12
DRIFT_TOL = 1e-8
ROOT_TOL = 1e-6


class IntegrationError(RuntimeError):
    def __init__(self, msg, t):
        super().__init__(f"{msg} at t={t:.6g}")
        self.t = t


class EmptyShellError(ValueError):
    pass


def _unit(params: ModelParams) -> ModelParams:
    return params.with_(j=1.0, n_max=0)


def _scale_state(state: ClassicalState, j: float) -> np.ndarray:
    y = state.cartesian(j)
    return np.array([y[0], y[1], y[2], y[3], y[4]]) / np.array([math.sqrt(j)] * 2 + [j] * 3)


def _unscale(y: np.ndarray, j: float) -> np.ndarray:
    f = np.array([math.sqrt(j)] * 2 + [j] * 3)
    return y * f


def _solver(fun, y0, t0=0.0, rtol=RTOL, atol=ATOL, nsteps=10**7, solout=None):
    r = ode(fun).set_integrator("dop853", rtol=rtol, atol=atol, nsteps=nsteps)
    if solout is not None:
        r.set_solout(solout)
    r.set_initial_value(y0, t0)
    return r


@dataclass
class Orbit:
    params: ModelParams
    t: np.ndarray
    y: np.ndarray  # (n, 5) rows (q, p, jx, jy, jz) in physical units
    energy: float
    max_drift: float
    spin_excess: float
    flagged: bool

    def final_state(self) -> ClassicalState:
        return ClassicalState.from_cartesian(self.y[-1])


def _integrate_scaled(y0, unit: ModelParams, t1: float, rtol=RTOL, atol=ATOL, record=True):
    ts, ys = [], []

    def solout(t, y):
        if record:
            ts.append(t)
            ys.append(np.array(y))
        return 0

    r = _solver(lambda t, y: cartesian_rhs(y, unit), y0, rtol=rtol, atol=atol, solout=solout)
    r.integrate(t1)
    if not r.successful():
        raise IntegrationError("step-size underflow or step budget exhausted", r.t)
    if not ts:
        ts, ys = [0.0, t1], [np.array(y0), np.array(r.y)]
    return np.array(ts), np.array(ys)


def integrate_orbit(state0: ClassicalState, params: ModelParams, T: float,
                    rtol: float = RTOL, atol: float = ATOL, drift_tol: float = DRIFT_TOL) -> Orbit:
    """Integrate from ``state0`` over [0, T]; samples are the accepted steps.

    ``T`` may be negative for backward integration. Energy drift is measured
    relative to H(0) - E_gs and orbits exceeding ``drift_tol`` are flagged.
    """
    if T == 0:
        raise ValueError("T must be non-zero")
    j = params.j
    unit = _unit(params)
    y0 = _scale_state(state0, j)
    t, ys = _integrate_scaled(y0, unit, T, rtol, atol)
    h = hamiltonian_cartesian(ys.T, unit)
    e_gs = classical_ground_energy(params) / j
    denom = max(abs(h[0] - e_gs), 1e-12 * params.omega0)
    drift = float(np.max(np.abs(h - h[0])) / denom)
    excess = float(np.max(np.abs(ys[:, 4])) - 1.0)
    flagged = drift > drift_tol or excess > 1e-9
    if flagged:
        log.warning("orbit flagged: drift %.2e, |jz|/j - 1 = %.2e", drift, excess)
    return Orbit(params, t, _unscale(ys, j), float(h[0] * j), drift, excess, flagged)


# --- Poincare sections ---------------------------------------------------------

def solve_q_on_shell(params: ModelParams, E: float, jz: float, phi: float) -> list[float]:
    """Real roots q of H_cl(q, p=0, jz, phi) = E, sorted descending."""
    j = params.j
    if abs(jz) > j:
        raise ValueError(f"|jz| = {abs(jz)} exceeds j = {j}")
    c = (1 + params.delta) * params.gamma * math.sqrt(j) * math.sqrt(max(1.0 - (jz / j) ** 2, 0.0)) * math.cos(phi)
    a = 0.5 * params.omega
    k = params.omega0 * jz - E
    disc = c * c - 4.0 * a * k
    if disc < 0:
        return []
    if disc == 0:
        return [-c / (2 * a)]
    root = math.sqrt(disc)
    # numerically stable pair
    qq = -0.5 * (c + math.copysign(root, c)) if c != 0 else -0.5 * root
    r1 = qq / a
    r2 = k / qq if qq != 0 else -r1
    return sorted([r1, r2], reverse=True)


@dataclass
class PoincareSection:
    params: ModelParams
    energy: float
    points: np.ndarray  # rows (seed, t, r, phi, q)
    seeds: list
    crossings_per_seed: list
    rejected_per_seed: list = field(default_factory=list)
    flagged_seeds: list = field(default_factory=list)


def seed_grid(params: ModelParams, E: float, n_seeds: int = 24, max_grid: int = 1024) -> list[ClassicalState]:
    """Deterministic seeds at p = 0 on a (jz, phi) grid, q from the larger root.

    The grid is refined until at least ``n_seeds`` nodes lie on the shell; the
    valid nodes are then thinned with a uniform stride.
    """
    if E < classical_ground_energy(params):
        raise EmptyShellError(f"E={E} is below the classical minimum")
    j = params.j
    k = 8
    while k <= max_grid:
        jz = -j + (np.arange(k) + 0.5) * 2 * j / k
        phis = -math.pi + (np.arange(k) + 0.5) * 2 * math.pi / k
        valid = []
        for z in jz:
            for ph in phis:
                roots = solve_q_on_shell(params, E, z, ph)
                if roots:
                    valid.append(ClassicalState(roots[0], 0.0, float(ph), float(z)))
        if len(valid) >= n_seeds:
            idx = np.round(np.linspace(0, len(valid) - 1, n_seeds)).astype(int)
            return [valid[i] for i in idx]
        k *= 2
    if not valid:
        raise EmptyShellError(f"no seeds on the energy shell E={E}")
    return valid


def _henon_to_section(y, t, unit: ModelParams):
    """Advance (y, t) along the flow until P = 0, with P as the independent
    variable (Henon's trick); returns the 6-vector (y, t) on the section."""

    def fun(P, z):
        f = cartesian_rhs(z[:5], unit)
        return np.append(f, 1.0) / f[1]

    r = _solver(fun, np.append(y, t), t0=y[1])
    z = r.integrate(0.0)
    if not r.successful():
        return None
    return z


def poincare_section(params: ModelParams, E: float, seeds=None, T: float = 1000.0,
                     max_points: int | None = None, n_seeds: int = 24,
                     root_tol: float = ROOT_TOL) -> PoincareSection:
    """Crossings of p = 0 (both orientations) on the larger-q branch.

    Stored points are (seed index, t, r = 1 + jz/j, phi, q).
    """
    e_gs = classical_ground_energy(params)
    if E < e_gs:
        raise EmptyShellError(f"E={E} is below E_gs={e_gs}")
    seeds = seed_grid(params, E, n_seeds) if seeds is None else list(seeds)
    if not seeds:
        raise EmptyShellError(f"no seeds on the energy shell E={E}")
    j = params.j
    unit = _unit(params)
    rows, counts, rejected, flagged = [], [], [], []
    for i, s in enumerate(seeds):
        orbit = integrate_orbit(s, params, T)
        if orbit.flagged:
            flagged.append(i)
        ys = orbit.y / np.array([math.sqrt(j)] * 2 + [j] * 3)
        P = ys[:, 1]
        hits = np.flatnonzero((P[:-1] != 0) & (np.sign(P[:-1]) != np.sign(P[1:])))
        kept = bad = 0
        for k in hits:
            t0, t1 = orbit.t[k], orbit.t[k + 1]
            slack = 1e-9 * max(1.0, abs(t1))
            # the refined crossing must fall inside its step; if P turns over
            # near the section the P-parametrised flow can run to a neighbour
            z = None
            for start in (k, k + 1):
                cand = _henon_to_section(ys[start], orbit.t[start], unit)
                if cand is not None and t0 - slack <= cand[5] <= t1 + slack:
                    z = cand
                    break
            if z is None:
                bad += 1
                continue
            phi = math.atan2(z[3], z[2])
            jz = z[4] * j
            roots = solve_q_on_shell(params, E, max(min(jz, j), -j), phi)
            q = z[0] * math.sqrt(j)
            if not roots or abs(q - roots[0]) > root_tol * max(1.0, math.sqrt(j)):
                continue
            rows.append((i, z[5], 1.0 + z[4], phi, q))
            kept += 1
            if max_points is not None and kept >= max_points:
                break
        counts.append(kept)
        rejected.append(bad)
    pts = np.array(rows, dtype=float).reshape(-1, 5)
    return PoincareSection(params, E, pts, seeds, counts, rejected, flagged)


# --- Lyapunov exponents --------------------------------------------------------

@dataclass(frozen=True)
class LyapunovEstimate:
    lambda_max: float
    horizon: float
    renormalizations: int
    classification: str
    drift: float
    chaotic_threshold: float
    regular_threshold: float

    @property
    def lambda_T(self) -> float:
        return self.lambda_max * self.horizon


def classify(lambda_T: float, chaotic_threshold: float = 20.0, regular_threshold: float = 10.0) -> str:
    if lambda_T > chaotic_threshold:
        return "chaotic"
    if lambda_T < regular_threshold:
        return "regular"
    return "undetermined"


def lyapunov_max(state0: ClassicalState, params: ModelParams, T: float = 1000.0,
                 renorm_interval: float = 1.0, chaotic_threshold: float = 20.0,
                 regular_threshold: float = 10.0, seed: int = 0,
                 rtol: float = RTOL, atol: float = ATOL) -> LyapunovEstimate:
    """Benettin estimate of the largest Lyapunov exponent.

    The tangent vector is renormalized every ``renorm_interval``; the orbit is
    called chaotic when lambda*T exceeds ``chaotic_threshold`` and regular when
    it is below ``regular_threshold``.
    """
    if T <= 0 or renorm_interval <= 0:
        raise ValueError("T and renorm_interval must be positive")
    if regular_threshold > chaotic_threshold:
        raise ValueError("regular_threshold must not exceed chaotic_threshold")
    j = params.j
    unit = _unit(params)
    y = _scale_state(state0, j)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(5)
    v[2:] -= np.dot(v[2:], y[2:]) * y[2:]  # keep the spin perturbation tangent to the sphere
    v /= np.linalg.norm(v)

    def fun(t, z):
        x, dv = z[:5], z[5:]
        return np.concatenate([cartesian_rhs(x, unit), cartesian_jacobian(x, unit) @ dv])

    r = _solver(fun, np.concatenate([y, v]), rtol=rtol, atol=atol)
    h0 = hamiltonian_cartesian(y, unit)
    e_gs = classical_ground_energy(params) / j
    denom = max(abs(h0 - e_gs), 1e-12 * params.omega0)
    n = int(math.ceil(T / renorm_interval - 1e-9))
    total, drift = 0.0, 0.0
    for k in range(1, n + 1):
        z = r.integrate(min(k * renorm_interval, T))
        if not r.successful():
            raise IntegrationError("step-size underflow in tangent integration", r.t)
        norm = np.linalg.norm(z[5:])
        total += math.log(norm)
        drift = max(drift, float(abs(hamiltonian_cartesian(z[:5], unit) - h0) / denom))
        r.set_initial_value(np.concatenate([z[:5], z[5:] / norm]), r.t)
    lam = total / T
    cls = "undetermined" if drift > DRIFT_TOL else classify(lam * T, chaotic_threshold, regular_threshold)
    return LyapunovEstimate(lam, T, n, cls, drift, chaotic_threshold, regular_threshold)
