"""Phase structure, energy minima and the small-oscillation (quadratic) picture."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import ModelParams
from .phase_space import hamiltonian_qp, qp_to_spin, wrap_angle


@dataclass(frozen=True)
class NormalModes:
    omega_plus: float
    omega_minus: float
    phase: str


@dataclass(frozen=True)
class FixedPoint:
    q_m: float
    p_m: float
    phi_m: float
    jz_m: float
    stability: str

    def qp_chart(self, j: float) -> tuple[float, float, float, float]:
        r = math.sqrt(max(2.0 * (j + self.jz_m), 0.0))
        return self.q_m, self.p_m, r * math.sin(self.phi_m), r * math.cos(self.phi_m)


def critical_coupling(params: ModelParams) -> float:
    return math.sqrt(params.omega0 * params.omega) / (1 + params.delta)


def epsilon_zero(params: ModelParams) -> float:
    """Bottom of the superradiant wells in units of omega0*j.

    Only a physical energy for gamma > gamma_c; evaluates to -1 at gamma_c.
    """
    if params.gamma == 0:
        return -math.inf
    g = (critical_coupling(params) / params.gamma) ** 2
    return -0.5 * (g + 1.0 / g)


def ground_state_energy(params: ModelParams) -> float:
    """Scaled classical ground-state energy E_gs / (omega0 j)."""
    if params.gamma <= critical_coupling(params):
        return -1.0
    return epsilon_zero(params)


def classical_ground_energy(params: ModelParams) -> float:
    """E_gs in energy units."""
    return params.energy_scale * ground_state_energy(params)


def superradiant_minima(params: ModelParams) -> tuple[FixedPoint, FixedPoint]:
    """The parity-broken pair of energy minima for gamma > gamma_c.

    For the Tavis-Cummings model the minima form a ring in phi; the two
    points returned are its phi = 0 and phi = pi members.
    """
    gc = critical_coupling(params)
    if params.gamma <= gc:
        raise ValueError(
            f"no superradiant minima for gamma={params.gamma} <= gamma_c={gc}"
        )
    g = (gc / params.gamma) ** 2
    j = params.j
    amp = params.gamma * math.sqrt(j) * math.sqrt(1.0 - g * g) / params.omega
    # Dicke: the well depth comes from (1+delta)=2 on q only; TC splits it over q, p
    amp *= 1 + params.delta
    out = []
    for phi in (0.0, math.pi):
        out.append(FixedPoint(-amp * math.cos(phi), 0.0, phi, -j * g, "stable"))
    return out[0], out[1]


def energy_minima(params: ModelParams) -> list[FixedPoint]:
    if params.gamma <= critical_coupling(params):
        return [FixedPoint(0.0, 0.0, 0.0, -params.j, "stable")]
    return list(superradiant_minima(params))


def normal_modes(params: ModelParams) -> NormalModes:
    """Small-oscillation frequencies around the global minimum (Dicke only)."""
    if not params.is_dicke:
        raise ValueError("normal modes are only provided for the Dicke model")
    w, w0, gam = params.omega, params.omega0, params.gamma
    gc = critical_coupling(params)
    phase = params.phase()
    if phase == "critical":
        hi = w * w + w0 * w0
        return NormalModes(math.sqrt(hi), 0.0, phase)
    if phase == "normal":
        a = w * w + w0 * w0
        b = math.sqrt((w * w - w0 * w0) ** 2 + 16.0 * w * w0 * gam * gam)
        plus2, minus2 = (a + b) / 2, (a - b) / 2
    else:
        g4, c4 = gam**4, gc**4
        a = w0 * w0 * g4 + w * w * c4
        b = math.sqrt((w0 * w0 * g4 - w * w * c4) ** 2 + 4 * w * w * w0 * w0 * c4 * c4)
        plus2, minus2 = (a + b) / (2 * c4), (a - b) / (2 * c4)
    return NormalModes(math.sqrt(plus2), math.sqrt(max(minus2, 0.0)), phase)


def quadratic_hamiltonian(params: ModelParams, point) -> np.ndarray | float:
    """Quadratic expansion of H_cl around the nearest energy minimum.

    ``point`` is ``(q, p, Q1, P1)`` (scalars or equal-shape arrays). In the
    superradiant phase each point is expanded around whichever of the two
    minima is closer in the (q, p, Q1, P1) chart.
    """
    if not params.is_dicke:
        raise ValueError("the quadratic Hamiltonian is only provided for the Dicke model")
    phase = params.phase()
    if phase == "critical":
        raise ValueError("quadratic form is degenerate at gamma = gamma_c")
    q, p, Q1, P1 = (np.asarray(x, dtype=float) for x in point)
    w, w0, gam, j = params.omega, params.omega0, params.gamma, params.j
    if phase == "normal":
        out = (
            -w0 * j
            + 0.5 * w0 * (Q1**2 + P1**2)
            + 0.5 * w * (q**2 + p**2)
            + 2.0 * gam * q * P1
        )
        return out if out.ndim else float(out)

    g = (critical_coupling(params) / gam) ** 2
    e_gs = classical_ground_energy(params)
    m0, m1 = superradiant_minima(params)
    c0 = np.asarray(m0.qp_chart(j))
    c1 = np.asarray(m1.qp_chart(j))
    pts = np.stack(np.broadcast_arrays(q, p, Q1, P1), axis=-1)
    d0 = np.sum((pts - c0) ** 2, axis=-1)
    d1 = np.sum((pts - c1) ** 2, axis=-1)
    use1 = d1 < d0
    q_m = np.where(use1, m1.q_m, m0.q_m)
    phi_m = np.where(use1, m1.phi_m, m0.phi_m)
    sign = np.cos(phi_m)

    phi, jz = qp_to_spin(Q1, P1, j)
    dphi = wrap_angle(phi - phi_m)
    dz = (jz - m0.jz_m) / j
    stiff = 1.0 / g - g
    out = (
        e_gs
        + 0.5 * w * ((q - q_m) ** 2 + p**2)
        + 0.5 * j * w0 * (stiff * dphi**2 + (1.0 / g**2) / stiff * dz**2)
        + sign * math.sqrt(w * w0 * j) / math.sqrt(stiff) * (q - q_m) * dz
    )
    return out if out.ndim else float(out)


@dataclass
class ShellSampler:
    """Rejection sampler for points on the energy shell H_cl = E.

    ``(p, Q1, P1)`` are drawn uniformly inside the energetically allowed box
    and ``q`` is then solved for exactly (H_cl is quadratic in q), keeping
    both roots. Draws come from a fixed-size batch stream, so the first ``n``
    points for a given seed are always a prefix of the first ``2n``.
    """

    n_points: int = 10_000
    seed: int = 0
    tol: float = 1e-6
    batch: int = 4096
    grid: int = 201
    max_batches: int = 20_000

    def box(self, params: ModelParams, energy: float):
        j, w, w0, gam, d = params.j, params.omega, params.omega0, params.gamma, params.delta
        e_gs = classical_ground_energy(params)
        p_max = math.sqrt(2.0 * (energy - e_gs) / w)
        R = 2.0 * math.sqrt(j)
        axis = np.linspace(-R, R, self.grid)
        Q, P = np.meshgrid(axis, axis, indexing="ij")
        r2 = Q**2 + P**2
        inside = r2 <= 4.0 * j
        s2 = np.clip(1.0 - r2 / (4.0 * j), 0.0, None)
        floor = w0 * (0.5 * r2 - j) - gam**2 * s2 * (
            (1 + d) ** 2 * P**2 + (1 - d) ** 2 * Q**2
        ) / (2.0 * w)
        ok = inside & (floor <= energy)
        step = axis[1] - axis[0]
        # the minima themselves are always allowed; the grid can miss them
        extra = np.array([m.qp_chart(j)[2:] for m in energy_minima(params)])
        qs = np.concatenate([Q[ok], extra[:, 0]])
        ps = np.concatenate([P[ok], extra[:, 1]])
        qb = (max(qs.min() - 2 * step, -R), min(qs.max() + 2 * step, R))
        pb = (max(ps.min() - 2 * step, -R), min(ps.max() + 2 * step, R))
        return p_max, qb, pb

    def sample(self, params: ModelParams, energy: float) -> np.ndarray:
        """Return an ``(n_points, 4)`` array of (q, p, Q1, P1) shell points."""
        e_gs = classical_ground_energy(params)
        if energy <= e_gs:
            raise ValueError(f"energy {energy} is not above E_gs={e_gs}")
        j, w, w0, gam, d = params.j, params.omega, params.omega0, params.gamma, params.delta
        p_max, qb, pb = self.box(params, energy)
        rng = np.random.default_rng(self.seed)
        found = []
        count = 0
        for _ in range(self.max_batches):
            p = rng.uniform(-p_max, p_max, self.batch)
            Q1 = rng.uniform(*qb, self.batch)
            P1 = rng.uniform(*pb, self.batch)
            r2 = Q1**2 + P1**2
            s = np.sqrt(np.clip(1.0 - r2 / (4.0 * j), 0.0, None))
            B = gam * s * (1 + d) * P1
            C = w0 * (0.5 * r2 - j) + 0.5 * w * p**2 - gam * s * (1 - d) * p * Q1 - energy
            disc = B**2 - 2.0 * w * C
            ok = (r2 < 4.0 * j) & (disc >= 0)
            root = np.sqrt(np.where(ok, disc, 0.0))
            for sgn in (1.0, -1.0):
                q = (-B + sgn * root) / w
                pts = np.stack([q, p, Q1, P1], axis=1)[ok]
                resid = np.abs(hamiltonian_qp(*pts.T, params) - energy) / (energy - e_gs)
                pts = pts[resid < self.tol]
                found.append(pts)
                count += len(pts)
            if count >= self.n_points:
                break
        else:
            raise RuntimeError(
                f"shell sampler found only {count} points after {self.max_batches} batches"
            )
        return np.concatenate(found)[: self.n_points]


def quadratic_validity(
    params: ModelParams, energy: float, sampler: ShellSampler | None = None
) -> float:
    """Maximum over the shell H_cl = E of |E - H_q| / (E - E_gs)."""
    if params.phase() == "critical":
        raise ValueError("quadratic validity is undefined at gamma = gamma_c")
    e_gs = classical_ground_energy(params)
    if energy < e_gs:
        raise ValueError(f"empty energy shell: E={energy} < E_gs={e_gs}")
    if energy == e_gs:
        raise ValueError("quadratic validity is undefined at E = E_gs")
    sampler = sampler or ShellSampler()
    pts = sampler.sample(params, energy)
    hq = quadratic_hamiltonian(params, pts.T)
    return float(np.max(np.abs(energy - hq)) / (energy - e_gs))
