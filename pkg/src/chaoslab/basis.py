"""Symmetry-adapted bases for the quantum Dicke and Tavis-Cummings Hamiltonians.

Three schemes are supported:

``fock_parity``
    Product states |n> x |j, m> (J_z eigenbasis) with a fixed parity
    (-1)^(n + m + j). Simple and exact, but needs a large cutoff in the
    superradiant phase.
``coherent_parity``
    Parity-adapted extended coherent states built on the J_x eigenbasis:
    |N; m'; p> = (|N; m'> + p (-1)^N |N; -m'>) / sqrt(2 (1 + delta_{m',0})),
    where |N; m'> is a displaced number state D(alpha(m')) |N> times |j, m'>_x.
    Converges with far smaller cutoffs in the superradiant phase.
``tc_lambda_block``
    One block of fixed excitation number lambda = n + m + j of the
    Tavis-Cummings model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .params import ModelParams

SCHEMES = ("fock_parity", "coherent_parity", "tc_lambda_block")
PARITIES = ("plus", "minus")


@dataclass(frozen=True)
class BasisSpec:
    scheme: str
    parity: str | None = "plus"
    lam: int | None = None
    n_max: int = 0

    def __post_init__(self):
        if self.scheme not in SCHEMES + ("fock_full",):
            raise ValueError(f"unknown basis scheme {self.scheme!r}")
        if self.scheme in ("fock_parity", "coherent_parity") and self.parity not in PARITIES:
            raise ValueError(f"parity must be one of {PARITIES}, got {self.parity!r}")
        if self.scheme == "tc_lambda_block" and (self.lam is None or self.lam < 0):
            raise ValueError("tc_lambda_block needs a non-negative lambda")


@dataclass
class Basis:
    """An enumerated basis.

    ``labels`` holds one row per state: (n, m) for the Fock and TC schemes,
    (N, m') with m' >= 0 for the coherent scheme.
    """

    spec: BasisSpec
    params: ModelParams
    labels: np.ndarray
    alphas: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return len(self.labels)

    @property
    def sign(self) -> int:
        return 1 if self.spec.parity == "plus" else -1


def parity_sign(parity: str) -> int:
    if parity not in PARITIES:
        raise ValueError(f"parity must be one of {PARITIES}, got {parity!r}")
    return 1 if parity == "plus" else -1


def fock_state_parity(n: int, m: float, j: float) -> str:
    """Parity label of |n> x |j, m> under exp(i pi (a^+a + J_z + j))."""
    if n < 0 or int(n) != n:
        raise ValueError(f"photon number must be a non-negative integer, got {n}")
    if abs(m) > j or abs((m + j) - round(m + j)) > 1e-12:
        raise ValueError(f"invalid spin projection m={m} for j={j}")
    return "plus" if (int(n) + int(round(m + j))) % 2 == 0 else "minus"


def _m_values(j: float) -> np.ndarray:
    return -j + np.arange(int(round(2 * j)) + 1)


def build_fock_parity_basis(params: ModelParams, parity: str) -> Basis:
    """All |n, m> with n <= n_max and the requested parity; n major, m minor."""
    want = parity_sign(parity)
    ms = _m_values(params.j)
    labels = [
        (n, m)
        for n in range(params.n_max + 1)
        for m in ms
        if (-1) ** ((n + int(round(m + params.j))) % 2) == want
    ]
    spec = BasisSpec("fock_parity", parity, None, params.n_max)
    return Basis(spec, params, np.array(labels, dtype=float).reshape(-1, 2))


def build_fock_full_basis(params: ModelParams) -> Basis:
    ms = _m_values(params.j)
    labels = [(n, m) for n in range(params.n_max + 1) for m in ms]
    spec = BasisSpec("fock_full", None, None, params.n_max)
    return Basis(spec, params, np.array(labels, dtype=float))


def displacement_amplitude(m_prime, params: ModelParams):
    """alpha(m') = -2 gamma m' / (omega sqrt(N_atoms))."""
    return -2.0 * params.gamma * np.asarray(m_prime) / (params.omega * np.sqrt(params.n_atoms))


def coherent_m_values(j: float) -> np.ndarray:
    """Non-negative J_x eigenvalues m' labelling the parity-adapted states."""
    return _m_values(j)[_m_values(j) >= 0]


def build_coherent_parity_basis(params: ModelParams, parity: str) -> Basis:
    """Parity-adapted extended coherent basis, ordered m' major, N minor.

    States with m' = 0 exist only when p (-1)^N = +1.
    """
    if not params.is_dicke:
        raise ValueError("the extended coherent basis targets the Dicke model (delta=1)")
    want = parity_sign(parity)
    labels = []
    for mp in coherent_m_values(params.j):
        for N in range(params.n_max + 1):
            if mp == 0 and want * (-1) ** N != 1:
                continue
            labels.append((N, mp))
    spec = BasisSpec("coherent_parity", parity, None, params.n_max)
    mps = coherent_m_values(params.j)
    alphas = dict(zip(mps.tolist(), displacement_amplitude(mps, params).tolist()))
    return Basis(spec, params, np.array(labels, dtype=float), alphas)


def build_tc_block_basis(params: ModelParams, lam: int) -> Basis:
    """States |n = lam - j - m, m> of one excitation-number block, m ascending."""
    j = params.j
    ms = _m_values(j)
    ms = ms[ms <= lam - j + 1e-12]
    labels = np.column_stack([lam - j - ms, ms])
    spec = BasisSpec("tc_lambda_block", None, int(lam), params.n_max)
    return Basis(spec, params, labels)


def displacement_overlaps(beta: float, n_max: int) -> np.ndarray:
    """Matrix of <N'|D(beta)|N> for real beta and 0 <= N, N' <= n_max.

    Uses the associated-Laguerre closed form with log-factorial prefactors.
    """
    if beta == 0.0:
        return np.eye(n_max + 1)
    n = np.arange(n_max + 1)
    hi = np.maximum.outer(n, n)  # N' >= N branch uses (N', N) = (hi, lo)
    lo = np.minimum.outer(n, n)
    k = hi - lo
    x = beta * beta
    lag = eval_genlaguerre(lo, k, x)
    logpref = 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) + k * np.log(abs(beta)) - 0.5 * x
    pref = np.exp(logpref)
    # <N'|D|N> carries beta^(N'-N) above the diagonal and (-beta)^(N-N') below it
    rows, cols = np.indices(hi.shape)
    sign = np.where(rows >= cols, np.sign(beta) ** k, (-np.sign(beta)) ** k)
    return sign * pref * lag
