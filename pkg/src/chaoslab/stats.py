"""Unfolding, Wigner-surmise statistics and sliding-window Anderson-Darling scans."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .dos import CumulativeDensity, dos

log = logging.getLogger(__name__)

AD_CRITICAL_95 = 2.5
CLAMP_LO, CLAMP_HI = 1e-300, 1.0 - 1e-16
DUPLICATE_GAP = 1e-12


def wigner_pdf(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("spacing must be non-negative")
    out = 0.5 * np.pi * s * np.exp(-0.25 * np.pi * s * s)
    return out if out.ndim else float(out)


def wigner_cdf(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("spacing must be non-negative")
    out = -np.expm1(-0.25 * np.pi * s * s)
    return out if out.ndim else float(out)


def wigner_sample(size, rng: np.random.Generator) -> np.ndarray:
    """Draw Wigner-surmise spacings by inverting the CDF."""
    u = rng.random(size)
    return np.sqrt(-4.0 * np.log1p(-u) / np.pi)


def _ad_sorted(x: np.ndarray) -> np.ndarray:
    """A^2 of already-sorted rows (last axis) against the Wigner CDF."""
    n = x.shape[-1]
    F = np.clip(-np.expm1(-0.25 * np.pi * x * x), CLAMP_LO, CLAMP_HI)
    k = np.arange(1, n + 1)
    w = (2 * k - 1) / n
    return -n - np.sum(w * (np.log(F) + np.log1p(-F[..., ::-1])), axis=-1)


def anderson_darling(spacings) -> float:
    """Anderson-Darling statistic of the spacings against the Wigner surmise."""
    x = np.asarray(spacings, dtype=float).ravel()
    if x.size < 2:
        raise ValueError(f"need at least 2 spacings, got {x.size}")
    if np.any(x < 0):
        raise ValueError("spacings must be non-negative")
    return float(_ad_sorted(np.sort(x)))


def monte_carlo_ad(trials: int = 10_000, n: int = 300, law: str = "wigner", seed: int = 0) -> np.ndarray:
    """A^2 values of ``trials`` synthetic samples of ``n`` unit-mean spacings.

    ``law`` is "wigner" (null hypothesis) or "poisson" (exponential spacings).
    """
    rng = np.random.default_rng(seed)
    if law == "wigner":
        x = wigner_sample((trials, n), rng)
    elif law == "poisson":
        x = rng.exponential(1.0, (trials, n))
    else:
        raise ValueError(f"unknown law {law!r}")
    return _ad_sorted(np.sort(x, axis=1))


@dataclass(frozen=True)
class UnfoldedSpectrum:
    source: str
    energies: np.ndarray
    scaled_energies: np.ndarray
    unfolded: np.ndarray
    spacings: np.ndarray
    approx_spacings: np.ndarray  # local-density estimate nu_+(midpoint) dE
    window: tuple | None = None

    def window_mean_spacing(self, start: int, size: int) -> float:
        return float(np.mean(self.spacings[start: start + size - 1]))


def unfold(energies, cumulative: CumulativeDensity, converged=None, source: str = "") -> UnfoldedSpectrum:
    """Map sorted energies through Gamma_+.

    ``converged`` is an optional boolean mask; any unconverged state is an error,
    so callers must trim to the converged prefix first.
    """
    E = np.asarray(energies, dtype=float)
    if converged is not None:
        bad = int(np.size(converged) - np.count_nonzero(converged))
        if bad:
            raise ValueError(f"{bad} unconverged states passed to unfold")
    if E.size < 2:
        raise ValueError("need at least two energies")
    if np.any(np.diff(E) < 0):
        raise ValueError("energies must be sorted ascending")
    if E[0] < cumulative.E_lo - 1e-9 * max(abs(cumulative.E_lo), 1.0):
        raise ValueError(f"energy {E[0]} below the unfolding domain starting at {cumulative.E_lo}")
    dup = np.flatnonzero(np.diff(E) < DUPLICATE_GAP)
    if dup.size:
        log.warning("dropping %d near-duplicate levels (gap < %g)", dup.size, DUPLICATE_GAP)
        E = np.delete(E, dup + 1)
    e = np.asarray(cumulative(E))
    params = cumulative.params
    mid = 0.5 * (E[1:] + E[:-1]) / params.energy_scale
    approx = 0.5 * dos(mid, params) * np.diff(E)
    return UnfoldedSpectrum(source, E, E / params.energy_scale, e, np.diff(e), approx)


def unfold_block(block, cumulative: CumulativeDensity) -> UnfoldedSpectrum:
    """Unfold the converged states of a :class:`SpectrumBlock`.

    Levels below the classical minimum (zero-point shifted states at the very
    bottom of the spectrum) lie outside the domain of Gamma_+ and are skipped.
    """
    E = block.energies[block.converged()]
    below = E < cumulative.E_lo
    if np.any(below):
        log.info("skipping %d levels below E_gs=%g", int(below.sum()), cumulative.E_lo)
        E = E[~below]
    return unfold(E, cumulative, source=f"{block.basis.scheme}/{block.basis.parity}/n_max={block.basis.n_max}")


@dataclass(frozen=True)
class ADScan:
    eps_center: np.ndarray
    a2: np.ndarray
    reject: np.ndarray
    window: int
    step: int
    mean_spacing: np.ndarray
    start: np.ndarray

    def first_accept(self) -> float | None:
        """Centre of the first window (lowest energy) that does not reject Wigner."""
        ok = np.flatnonzero(~self.reject)
        return float(self.eps_center[ok[0]]) if ok.size else None


def scan_windows(unfolded: UnfoldedSpectrum, N: int = 301, step: int = 25) -> ADScan:
    """Slide a window of N consecutive states by ``step``; test its N-1 spacings."""
    n = unfolded.unfolded.size
    if N < 3:
        raise ValueError("window must hold at least 3 states")
    if step < 1:
        raise ValueError("step must be positive")
    if n < N:
        raise ValueError(f"only {n} states available, window needs {N}")
    starts = np.arange(0, n - N + 1, step)
    centers, a2, means = [], [], []
    for s in starts:
        gaps = unfolded.spacings[s: s + N - 1]
        centers.append(float(np.mean(unfolded.scaled_energies[s: s + N])))
        means.append(float(np.mean(gaps)))
        a2.append(anderson_darling(gaps))
    a2 = np.array(a2)
    return ADScan(np.array(centers), a2, a2 > AD_CRITICAL_95, N, step, np.array(means), starts)


def wigner_median() -> float:
    return math.sqrt(4.0 * math.log(2.0) / math.pi)
