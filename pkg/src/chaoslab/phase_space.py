"""Classical phase space of the atom-field models: charts and the Hamiltonian.

Three coordinate systems are used for the pseudospin:

* ``phi`` chart: the canonical pair (phi, j_z), singular at both poles;
* ``qp`` chart: Q1 = sqrt(2(j+j_z)) sin(phi), P1 = sqrt(2(j+j_z)) cos(phi),
  smooth at the south pole, singular at the north pole;
* Cartesian spin vector (j_x, j_y, j_z) with |j| = j, smooth everywhere.
  This is what the integrator uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ModelParams


@dataclass(frozen=True)
class ClassicalState:
    q: float
    p: float
    phi: float
    jz: float

    def qp_chart(self, j: float) -> tuple[float, float, float, float]:
        """Return (q, p, Q1, P1)."""
        Q1, P1 = spin_to_qp(self.phi, self.jz, j)
        return self.q, self.p, float(Q1), float(P1)

    @classmethod
    def from_qp(cls, q, p, Q1, P1, j) -> "ClassicalState":
        phi, jz = qp_to_spin(Q1, P1, j)
        return cls(float(q), float(p), float(phi), float(jz))

    def cartesian(self, j: float) -> np.ndarray:
        """Return (q, p, j_x, j_y, j_z)."""
        return np.array([self.q, self.p, *spin_to_cartesian(self.phi, self.jz, j)])

    @classmethod
    def from_cartesian(cls, y) -> "ClassicalState":
        q, p, jx, jy, jz = y
        return cls(float(q), float(p), float(np.arctan2(jy, jx)), float(jz))


def wrap_angle(phi):
    """Map angles to (-pi, pi]."""
    out = np.mod(np.asarray(phi) + np.pi, 2 * np.pi) - np.pi
    out = np.where(out == -np.pi, np.pi, out)
    return out if out.ndim else float(out)


def spin_to_qp(phi, jz, j):
    r = np.sqrt(np.maximum(2.0 * (j + np.asarray(jz)), 0.0))
    return r * np.sin(phi), r * np.cos(phi)


def qp_to_spin(Q1, P1, j):
    Q1 = np.asarray(Q1)
    P1 = np.asarray(P1)
    jz = 0.5 * (Q1**2 + P1**2) - j
    phi = np.arctan2(Q1, P1)
    return wrap_angle(phi), jz


def spin_to_cartesian(phi, jz, j):
    s = np.sqrt(np.maximum(j * j - np.asarray(jz) ** 2, 0.0))
    return s * np.cos(phi), s * np.sin(phi), jz


def hamiltonian_value(state: ClassicalState, params: ModelParams) -> float:
    """Classical energy in the (q, p, phi, j_z) chart, both models."""
    return float(hamiltonian_phi(state.q, state.p, state.phi, state.jz, params))


def hamiltonian_phi(q, p, phi, jz, params: ModelParams):
    w, w0, g, d, j = params.omega, params.omega0, params.gamma, params.delta, params.j
    root = np.sqrt(j) * np.sqrt(np.maximum(1.0 - (np.asarray(jz) / j) ** 2, 0.0))
    coupling = (1 + d) * q * np.cos(phi) - (1 - d) * p * np.sin(phi)
    return w0 * jz + 0.5 * w * (q**2 + p**2) + g * root * coupling


def hamiltonian_qp(q, p, Q1, P1, params: ModelParams):
    """Classical energy in the smooth south-pole chart (q, p, Q1, P1)."""
    w, w0, g, d, j = params.omega, params.omega0, params.gamma, params.delta, params.j
    r2 = Q1**2 + P1**2
    s = np.sqrt(np.maximum(1.0 - r2 / (4.0 * j), 0.0))
    return (
        -w0 * j
        + 0.5 * w0 * r2
        + 0.5 * w * (q**2 + p**2)
        + g * s * ((1 + d) * q * P1 - (1 - d) * p * Q1)
    )


def hamiltonian_cartesian(y, params: ModelParams):
    q, p, jx, jy, jz = y
    w, w0, g, d, j = params.omega, params.omega0, params.gamma, params.delta, params.j
    return (
        w0 * jz
        + 0.5 * w * (q**2 + p**2)
        + g / np.sqrt(j) * ((1 + d) * q * jx - (1 - d) * p * jy)
    )


def eom_rhs(state, params: ModelParams, chart: str = "phi") -> np.ndarray:
    """Time derivatives of the chart variables.

    ``chart="phi"`` takes a :class:`ClassicalState` (or a 4-sequence
    ``(q, p, phi, jz)``) and returns ``(dq, dp, dphi, djz)``.
    ``chart="qp"`` takes ``(q, p, Q1, P1)`` and returns their derivatives.
    ``chart="cartesian"`` takes ``(q, p, jx, jy, jz)``.
    """
    if chart == "phi":
        if isinstance(state, ClassicalState):
            q, p, phi, jz = state.q, state.p, state.phi, state.jz
        else:
            q, p, phi, jz = state
        return _rhs_phi(q, p, phi, jz, params)
    if chart == "qp":
        return _rhs_qp(*state, params)
    if chart == "cartesian":
        return cartesian_rhs(np.asarray(state, dtype=float), params)
    raise ValueError(f"unknown chart {chart!r}")


def _rhs_phi(q, p, phi, jz, params):
    w, w0, g, d, j = params.omega, params.omega0, params.gamma, params.delta, params.j
    if abs(jz) >= j:
        raise ValueError(f"phi chart is singular at |jz| = j (jz={jz}, j={j})")
    root = np.sqrt(1.0 - (jz / j) ** 2)
    c, s = np.cos(phi), np.sin(phi)
    dq = w * p - (1 - d) * g * np.sqrt(j) * root * s
    dp = -w * q - (1 + d) * g * np.sqrt(j) * root * c
    dphi = w0 - g * jz / (j**1.5 * root) * ((1 + d) * q * c - (1 - d) * p * s)
    djz = g * np.sqrt(j) * root * ((1 + d) * q * s + (1 - d) * p * c)
    return np.array([dq, dp, dphi, djz])


def _rhs_qp(q, p, Q1, P1, params):
    w, w0, g, d, j = params.omega, params.omega0, params.gamma, params.delta, params.j
    r2 = Q1**2 + P1**2
    s2 = 1.0 - r2 / (4.0 * j)
    if s2 <= 0.0:
        raise ValueError("qp chart is singular at the north pole (Q1^2+P1^2 = 4j)")
    s = np.sqrt(s2)
    C = (1 + d) * q * P1 - (1 - d) * p * Q1
    dH_dq = w * q + g * s * (1 + d) * P1
    dH_dp = w * p - g * s * (1 - d) * Q1
    dH_dQ = w0 * Q1 + g * (-Q1 / (4.0 * j * s) * C - s * (1 - d) * p)
    dH_dP = w0 * P1 + g * (-P1 / (4.0 * j * s) * C + s * (1 + d) * q)
    # Q1 is the coordinate and P1 its conjugate momentum
    return np.array([dH_dp, -dH_dq, dH_dP, -dH_dQ])


def cartesian_rhs(y, params: ModelParams) -> np.ndarray:
    """Flow of (q, p, j_x, j_y, j_z); the spin obeys dJ/dt = grad_J H x J."""
    q, p, jx, jy, jz = y
    w, w0, g, d, j = params.omega, params.omega0, params.gamma, params.delta, params.j
    a = g * (1 + d) / np.sqrt(j)
    b = g * (1 - d) / np.sqrt(j)
    gx, gy = a * q, -b * p
    return np.array(
        [
            w * p - b * jy,
            -w * q - a * jx,
            gy * jz - w0 * jy,
            w0 * jx - gx * jz,
            gx * jy - gy * jx,
        ]
    )


def cartesian_jacobian(y, params: ModelParams) -> np.ndarray:
    q, p, jx, jy, jz = y
    w, w0, g, d, j = params.omega, params.omega0, params.gamma, params.delta, params.j
    a = g * (1 + d) / np.sqrt(j)
    b = g * (1 - d) / np.sqrt(j)
    return np.array(
        [
            [0.0, w, 0.0, -b, 0.0],
            [-w, 0.0, -a, 0.0, 0.0],
            [0.0, -b * jz, 0.0, -w0, -b * p],
            [-a * jz, 0.0, w0, 0.0, -a * q],
            [a * jy, b * jx, b * p, a * q, 0.0],
        ]
    )
