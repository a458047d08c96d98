"""Hamiltonian assembly, diagonalization, convergence control and Peres lattices."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .basis import (
    Basis,
    BasisSpec,
    build_coherent_parity_basis,
    build_fock_full_basis,
    build_fock_parity_basis,
    build_tc_block_basis,
    coherent_m_values,
    displacement_amplitude,
    displacement_overlaps,
)
from .params import ModelParams

log = logging.getLogger(__name__)

DEFAULT_MAX_DIM = 20_000
OBSERVABLES = ("jz", "jx2", "n")


class DimensionError(ValueError):
    """Raised when a matrix would exceed the configured maximum dimension."""


@dataclass(frozen=True)
class SpectrumBlock:
    params: ModelParams
    basis: BasisSpec
    energies: np.ndarray
    scaled_energies: np.ndarray
    observables: np.ndarray | None = None  # columns <J_z>/j, <J_x^2>/j, <a^+a>/j
    converged_count: int | None = None
    eigenvectors: np.ndarray | None = None

    def __len__(self):
        return len(self.energies)

    def converged(self) -> np.ndarray:
        """Boolean mask of states that passed the cutoff test (all if untested)."""
        mask = np.zeros(len(self.energies), dtype=bool)
        mask[: len(self.energies) if self.converged_count is None else self.converged_count] = True
        return mask

    def close_pairs(self, tol: float | None = None) -> np.ndarray:
        """Indices i with E[i+1] - E[i] below tol (default 1e-12 omega0)."""
        tol = 1e-12 * self.params.omega0 if tol is None else tol
        return np.flatnonzero(np.diff(self.energies) < tol)


@dataclass(frozen=True)
class ConvergenceReport:
    n_max_low: int
    n_max_high: int
    delta_e: np.ndarray
    tolerance: float
    converged_count: int


def build_basis(params: ModelParams, spec: BasisSpec) -> Basis:
    if spec.scheme == "fock_parity":
        return build_fock_parity_basis(params, spec.parity)
    if spec.scheme == "coherent_parity":
        return build_coherent_parity_basis(params, spec.parity)
    if spec.scheme == "tc_lambda_block":
        return build_tc_block_basis(params, spec.lam)
    if spec.scheme == "fock_full":
        return build_fock_full_basis(params)
    raise ValueError(f"unknown scheme {spec.scheme!r}")


# --- Fock / TC product bases -------------------------------------------------

def _ladder(j, m, step):
    """<m+step|J_(+/-)|m> for step = +1 / -1."""
    return np.sqrt(np.maximum(j * (j + 1) - m * (m + step), 0.0))


def _product_index(basis: Basis):
    j = basis.params.j
    n = basis.labels[:, 0].astype(int)
    k = np.rint(basis.labels[:, 1] + j).astype(int)
    table = -np.ones((n.max() + 2, int(round(2 * j)) + 1), dtype=int)
    table[n, k] = np.arange(len(n))
    return n, k, table


def _product_hamiltonian(basis: Basis, params: ModelParams) -> np.ndarray:
    j = params.j
    n, k, table = _product_index(basis)
    m = basis.labels[:, 1]
    dim = len(n)
    H = np.zeros((dim, dim))
    H[np.arange(dim), np.arange(dim)] = params.omega * n + params.omega0 * m
    g = params.gamma / np.sqrt(params.n_atoms)
    # a^+ J_- always; a^+ J_+ only for the Dicke model. Hermitian partners mirrored.
    moves = [(-1, 1.0)] + ([(+1, 1.0)] if params.delta == 1 else [])
    for dm, _ in moves:
        n2, k2 = n + 1, k + dm
        ok = (k2 >= 0) & (k2 <= int(round(2 * j))) & (n2 < table.shape[0])
        src = np.flatnonzero(ok)
        dst = table[n2[ok], k2[ok]]
        keep = dst >= 0
        src, dst = src[keep], dst[keep]
        val = g * np.sqrt(n[src] + 1.0) * _ladder(j, m[src], dm)
        H[dst, src] = val
        H[src, dst] = val
    return H


def _product_observables(basis: Basis) -> dict:
    j = basis.params.j
    n, k, table = _product_index(basis)
    m = basis.labels[:, 1]
    dim = len(n)
    ms = -j + np.arange(int(round(2 * j)) + 1)
    jp = np.diag(_ladder(j, ms[:-1], 1), -1)
    jx = 0.5 * (jp + jp.T)
    jx2 = jx @ jx
    JX2 = np.zeros((dim, dim))
    for dk in (-2, 0, 2):
        k2 = k + dk
        ok = (k2 >= 0) & (k2 < len(ms))
        src = np.flatnonzero(ok)
        dst = table[n[ok], k2[ok]]
        keep = dst >= 0
        JX2[dst[keep], src[keep]] = jx2[k2[ok][keep], k[src[keep]]]
    return {"jz": np.diag(m.astype(float)), "jx2": JX2, "n": np.diag(n.astype(float))}


# --- parity-adapted extended coherent basis ----------------------------------

def _jz_x_basis(j, a, b):
    """<a|J_z|b> in the J_x eigenbasis for |a - b| = 1 (phases fixed so that
    exp(i pi (J_z + j)) |m'> = |-m'>)."""
    return -0.5 * np.sqrt(max(j * (j + 1) - a * b, 0.0))


def _coherent_operator(basis: Basis, full_block) -> np.ndarray:
    """Project an operator given by its full-coherent-basis blocks onto one
    parity sector.

    ``full_block(a, b)`` returns the (n_max+1)^2 block <N', a| O |N, b> for
    signed m' values a, b, or None when it vanishes.
    """
    params = basis.params
    nmax = params.n_max
    p = basis.sign
    mps = coherent_m_values(params.j)
    Ns = np.arange(nmax + 1)
    alt = (-1.0) ** Ns
    keep = {mp: (alt * p == 1) if mp == 0 else np.ones(nmax + 1, bool) for mp in mps}
    offsets, pos = {}, 0
    for mp in mps:
        offsets[mp] = pos
        pos += int(keep[mp].sum())
    M = np.zeros((pos, pos))
    for a in mps:
        ca = 1.0 / np.sqrt(2.0 * (1 + (a == 0)))
        for b in mps:
            if abs(a - b) > 1 and a + b > 1:
                continue
            cb = 1.0 / np.sqrt(2.0 * (1 + (b == 0)))
            blk = np.zeros((nmax + 1, nmax + 1))
            direct = full_block(a, b)
            if direct is not None:
                blk += direct
            crossed = full_block(a, -b)
            if crossed is not None:
                blk += crossed * (p * alt)[None, :]
            if not blk.any():
                continue
            blk *= 2.0 * ca * cb
            ra, rb = keep[a], keep[b]
            ia, ib = offsets[a], offsets[b]
            M[ia : ia + ra.sum(), ib : ib + rb.sum()] = blk[np.ix_(ra, rb)]
    return M


def _coherent_blocks(params: ModelParams):
    j, nmax = params.j, params.n_max
    Ns = np.arange(nmax + 1, dtype=float)
    kappa = 2.0 * params.gamma / (params.omega * np.sqrt(params.n_atoms))
    # beta = alpha(b) - alpha(a) = kappa (a - b): only +/- kappa ever occurs
    up = displacement_overlaps(kappa, nmax)  # a = b + 1
    down = up.T  # a = b - 1, D(-kappa) = D(kappa)^T for real kappa

    def overlap(a, b):
        return up if a - b > 0 else down

    def jz(a, b):
        if abs(abs(a - b) - 1) > 1e-9:
            return None
        return _jz_x_basis(j, a, b) * overlap(a, b)

    def ham(a, b):
        if a == b:
            alpha = float(displacement_amplitude(a, params))
            return np.diag(params.omega * (Ns - alpha**2))
        blk = jz(a, b)
        return None if blk is None else params.omega0 * blk

    def jx2(a, b):
        return np.eye(nmax + 1) * a * a if a == b else None

    def number(a, b):
        if a != b:
            return None
        alpha = float(displacement_amplitude(a, params))
        off = alpha * np.sqrt(Ns[1:])
        return np.diag(Ns + alpha**2) + np.diag(off, 1) + np.diag(off, -1)

    return {"H": ham, "jz": jz, "jx2": jx2, "n": number}


# --- public API ---------------------------------------------------------------

def assemble_hamiltonian(
    basis: Basis, params: ModelParams | None = None, max_dim: int = DEFAULT_MAX_DIM
) -> np.ndarray:
    """Real symmetric Hamiltonian matrix of ``params`` in ``basis``."""
    params = params or basis.params
    if basis.dimension > max_dim:
        raise DimensionError(
            f"basis dimension {basis.dimension} exceeds max_dim={max_dim}"
        )
    scheme = basis.spec.scheme
    if scheme in ("fock_parity", "fock_full"):
        return _product_hamiltonian(basis, params)
    if scheme == "tc_lambda_block":
        if params.delta != 0:
            raise ValueError("Lambda blocks are exact only for the Tavis-Cummings model")
        return _tc_block_matrix(basis, params)
    if scheme == "coherent_parity":
        return _coherent_operator(basis, _coherent_blocks(params)["H"])
    raise ValueError(f"unknown scheme {scheme!r}")


def _tc_block_matrix(basis: Basis, params: ModelParams) -> np.ndarray:
    j, lam = params.j, basis.spec.lam
    m = basis.labels[:, 1]
    diag = params.omega * (lam - j - m) + params.omega0 * m
    mm = m[:-1]
    off = params.gamma / np.sqrt(params.n_atoms) * np.sqrt(lam - j - mm) * _ladder(j, mm, 1)
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def observable_matrices(basis: Basis) -> dict:
    """Matrices of J_z, J_x^2 and a^+a in ``basis`` (unscaled)."""
    scheme = basis.spec.scheme
    if scheme in ("fock_parity", "fock_full"):
        return _product_observables(basis)
    if scheme == "tc_lambda_block":
        j = basis.params.j
        m = basis.labels[:, 1]
        n = basis.labels[:, 0]
        return {
            "jz": np.diag(m),
            # J_+^2 terms change lambda, so only (J_+J_- + J_-J_+)/4 survives
            "jx2": np.diag(0.5 * (j * (j + 1) - m**2)),
            "n": np.diag(n),
        }
    blocks = _coherent_blocks(basis.params)
    return {name: _coherent_operator(basis, blocks[name]) for name in OBSERVABLES}


def diagonalize(matrix: np.ndarray, vectors: bool = False, check: bool = True):
    """Full dense symmetric eigensolver; eigenvalues ascending.

    Returns ``w`` or ``(w, v)``.
    """
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    scale = np.abs(A).max() if A.size else 0.0
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    if np.abs(A - A.T).max() > 1e-13 * max(scale, 1.0):
        raise ValueError("matrix is not symmetric")
    if not vectors:
        return sla.eigh(A, eigvals_only=True, check_finite=False)
    w, v = sla.eigh(A, check_finite=False)
    if check and A.size:
        norm = np.linalg.norm(A, 2) if A.shape[0] <= 2000 else np.linalg.norm(A, "fro")
        resid = np.linalg.norm(A @ v - v * w, axis=0)
        if resid.max() >= 1e-9 * max(norm, 1e-300):
            raise ArithmeticError(f"eigen-residual {resid.max():.3e} too large")
    return w, v


def expectation_values(vectors: np.ndarray, matrices: dict, j: float) -> np.ndarray:
    """Per-state (<J_z>/j, <J_x^2>/j, <a^+a>/j)."""
    cols = []
    for name in OBSERVABLES:
        M = matrices[name]
        if np.count_nonzero(M - np.diag(np.diag(M))) == 0:
            cols.append((vectors**2).T @ np.diag(M))
        else:
            cols.append(np.einsum("ij,ij->j", vectors, M @ vectors))
    return np.column_stack(cols) / j


def solve(
    params: ModelParams,
    scheme: str = "coherent_parity",
    parity: str | None = "plus",
    lam: int | None = None,
    vectors: bool = False,
    max_dim: int = DEFAULT_MAX_DIM,
    keep_vectors: bool = False,
) -> SpectrumBlock:
    """Build, assemble and diagonalize one symmetry block.

    With ``vectors=True`` the Peres observables are filled in.
    """
    spec = BasisSpec(scheme, parity if scheme != "tc_lambda_block" else None, lam, params.n_max)
    basis = build_basis(params, spec)
    H = assemble_hamiltonian(basis, params, max_dim=max_dim)
    if vectors:
        w, v = diagonalize(H, vectors=True)
        obs = expectation_values(v, observable_matrices(basis), params.j)
    else:
        w, v, obs = diagonalize(H), None, None
    block = SpectrumBlock(
        params, spec, w, w / params.energy_scale, obs, None, v if keep_vectors else None
    )
    close = block.close_pairs()
    if close.size:
        log.warning("%d near-degenerate pairs (< 1e-12 omega0) in %s", close.size, spec)
    return block


def peres_observables(block: SpectrumBlock) -> np.ndarray:
    """Peres-lattice coordinates of the converged states of ``block``."""
    if block.observables is None:
        raise ValueError("block was solved without eigenvectors")
    return block.observables[block.converged()]


def default_cutoff_step(n_max: int) -> int:
    return max(10, n_max // 10)


def check_convergence(
    params: ModelParams,
    parity: str = "plus",
    tolerance: float | None = None,
    cutoff_step: int | None = None,
    scheme: str = "coherent_parity",
    max_dim: int = DEFAULT_MAX_DIM,
    low: SpectrumBlock | None = None,
) -> ConvergenceReport:
    """Compare spectra at n_max and n_max + cutoff_step.

    ``converged_count`` is the length of the longest prefix of states whose
    energy changes by less than ``tolerance`` (default 1e-6 omega0).
    """
    tolerance = 1e-6 * params.omega0 if tolerance is None else tolerance
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    step = default_cutoff_step(params.n_max) if cutoff_step is None else cutoff_step
    if low is None:
        low = solve(params, scheme, parity, max_dim=max_dim)
    high = solve(params.with_(n_max=params.n_max + step), scheme, parity, max_dim=max_dim)
    k = len(low.energies)
    dE = np.abs(low.energies - high.energies[:k])
    bad = np.flatnonzero(dE >= tolerance)
    count = int(bad[0]) if bad.size else k
    return ConvergenceReport(params.n_max, params.n_max + step, dE, tolerance, count)


def solve_converged(
    params: ModelParams,
    parity: str = "plus",
    scheme: str = "coherent_parity",
    vectors: bool = False,
    tolerance: float | None = None,
    cutoff_step: int | None = None,
    max_dim: int = DEFAULT_MAX_DIM,
) -> tuple[SpectrumBlock, ConvergenceReport]:
    """Solve one parity block and mark how many of its states are converged."""
    block = solve(params, scheme, parity, vectors=vectors, max_dim=max_dim)
    report = check_convergence(
        params, parity, tolerance, cutoff_step, scheme, max_dim, low=block
    )
    block = SpectrumBlock(
        block.params,
        block.basis,
        block.energies,
        block.scaled_energies,
        block.observables,
        report.converged_count,
    )
    return block, report


# --- Tavis-Cummings ------------------------------------------------------------

def tc_spectrum(params: ModelParams, lam_max: int, vectors: bool = False) -> list[SpectrumBlock]:
    """All Lambda blocks 0..lam_max of the Tavis-Cummings model."""
    if params.delta != 0:
        raise ValueError("tc_spectrum needs delta=0")
    return [solve(params, "tc_lambda_block", None, lam, vectors=vectors) for lam in range(lam_max + 1)]


@dataclass(frozen=True)
class GapMinimum:
    lam: int
    gap: float
    energy: float  # midpoint of the two levels, energy units

    def scaled_energy(self, params: ModelParams) -> float:
        return self.energy / params.energy_scale


def tc_gap_minima(params: ModelParams, lam_range) -> list[GapMinimum]:
    """Per-lambda smallest nearest-level gap and where it sits.

    Blocks of dimension 1 have no gap and are skipped.
    """
    if params.delta != 0:
        raise ValueError("tc_gap_minima needs delta=0")
    out = []
    for lam in lam_range:
        basis = build_tc_block_basis(params, lam)
        if basis.dimension < 2:
            continue
        w = diagonalize(_tc_block_matrix(basis, params))
        gaps = np.diff(w)
        i = int(np.argmin(gaps))
        out.append(GapMinimum(int(lam), float(gaps[i]), float(0.5 * (w[i] + w[i + 1]))))
    return out
