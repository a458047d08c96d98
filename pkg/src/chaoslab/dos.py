"""Semiclassical density of states of the Dicke model and its cumulative count.

Working quantity is the reduced density f(eps) = (omega / 2j) nu(eps); it only
depends on eps and g = (gamma_c / gamma)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline

from .model import critical_coupling, epsilon_zero, ground_state_energy
from .params import ModelParams

QUAD_RTOL = 1e-10
QUAD_ATOL = 1e-13
BRANCHES = ("below_minus1", "middle", "above_plus1")


class QuadratureError(ArithmeticError):
    def __init__(self, eps, err):
        super().__init__(f"quadrature failed at eps={eps}: error estimate {err:.3e}")
        self.eps = eps


def _check(params: ModelParams):
    if not params.is_dicke:
        raise ValueError("the semiclassical DoS is implemented for the Dicke model only")


def _g(params: ModelParams) -> float:
    return (critical_coupling(params) / params.gamma) ** 2 if params.gamma > 0 else math.inf


def y_bounds(eps: float, g: float) -> tuple[float, float]:
    """Roots y_- <= y_+ of 1 - y^2 = 2 g (y - eps)."""
    disc = g * g + 2.0 * g * eps + 1.0
    root = math.sqrt(max(disc, 0.0))
    y_plus = (2.0 * g * eps + 1.0) / (g + root)  # = -g + root without cancellation
    return -g - root, y_plus


def _integrand(y, eps, g):
    den = 1.0 - y * y
    if den <= 0.0:
        return 0.0
    x = 2.0 * g * (y - eps) / den
    return math.acos(math.sqrt(min(max(x, 0.0), 1.0)))


def _endpoint_quad(lo, hi, eps, g):
    """Integral of the arccos kernel over [lo, hi], with y = end -/+ u^2
    substitutions to absorb the square-root behaviour at both ends."""
    if hi <= lo:
        return 0.0, 0.0
    mid = 0.5 * (lo + hi)
    L = math.sqrt(mid - lo)
    a, ea = quad(lambda u: 2.0 * u * _integrand(lo + u * u, eps, g), 0.0, L, epsabs=QUAD_ATOL, epsrel=QUAD_RTOL, limit=200)
    b, eb = quad(lambda u: 2.0 * u * _integrand(hi - u * u, eps, g), 0.0, L, epsabs=QUAD_ATOL, epsrel=QUAD_RTOL, limit=200)
    return a + b, ea + eb


def branch(eps: float, params: ModelParams) -> str:
    if eps > 1.0:
        return "above_plus1"
    if eps >= -1.0:
        return "middle"
    return "below_minus1"


def reduced_dos(eps: float, params: ModelParams) -> tuple[float, float]:
    """(f(eps), absolute error estimate) with f = omega nu / (2j)."""
    _check(params)
    eps = float(eps)
    eps_gs = ground_state_energy(params)
    if eps < eps_gs:
        raise ValueError(f"eps={eps} is below the ground-state energy {eps_gs}")
    if eps > 1.0:
        return 1.0, 0.0
    g = _g(params)
    if math.isinf(g):
        return 0.5 * (eps + 1.0), 0.0
    y_minus, y_plus = y_bounds(eps, g)
    if eps >= -1.0:
        val, err = _endpoint_quad(eps, min(y_plus, 1.0), eps, g)
        return 0.5 * (eps + 1.0) + val / math.pi, err / math.pi
    if params.gamma <= critical_coupling(params):
        raise ValueError("no phase space below eps=-1 in the normal phase")
    val, err = _endpoint_quad(max(y_minus, -1.0), min(y_plus, 1.0), eps, g)
    return val / math.pi, err / math.pi


def dos(epsilon, params: ModelParams):
    """Semiclassical density of states nu(eps) (states per energy unit)."""
    scale = 2.0 * params.j / params.omega
    if np.ndim(epsilon) == 0:
        f, err = reduced_dos(epsilon, params)
        if err > 1e-8 * max(f, 1e-300) and err > 1e-14:
            raise QuadratureError(epsilon, err)
        return scale * f
    return np.array([dos(e, params) for e in np.asarray(epsilon, dtype=float)])


@dataclass(frozen=True)
class DoSCurve:
    params: ModelParams
    eps: np.ndarray
    nu: np.ndarray
    branches: tuple
    err: np.ndarray


def dos_curve(params: ModelParams, eps_grid) -> DoSCurve:
    eps_grid = np.asarray(eps_grid, dtype=float)
    scale = 2.0 * params.j / params.omega
    vals, errs = zip(*(reduced_dos(e, params) for e in eps_grid)) if len(eps_grid) else ((), ())
    return DoSCurve(
        params,
        eps_grid,
        scale * np.array(vals),
        tuple(branch(e, params) for e in eps_grid),
        scale * np.array(errs),
    )


# --- cumulative count -----------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def _interval_integral(a, b, params):
    x = 0.5 * (b - a) * _GL_X + 0.5 * (a + b)
    f = np.array([reduced_dos(xi, params)[0] for xi in x])
    return 0.5 * (b - a) * float(np.dot(_GL_W, f))


def _eps_nodes(lo, hi, resolution):
    """Nodes on [lo, hi] with the seams at -1 and +1 included and refined."""
    seams = [s for s in (-1.0, 1.0) if lo < s < hi]
    cuts = [lo] + seams + [hi]
    pieces = []
    total = hi - lo
    for a, b in zip(cuts[:-1], cuts[1:]):
        n = max(int(resolution * (b - a) / total), 50)
        # cosine spacing clusters nodes at both ends of each piece
        t = 0.5 * (1.0 - np.cos(np.linspace(0.0, np.pi, n + 1)))
        pieces.append(a + (b - a) * t)
    return np.unique(np.concatenate(pieces))


def _fritsch_carlson(x, y, d):
    """Limit Hermite slopes so the cubic interpolant stays monotone."""
    d = d.copy()
    secant = np.diff(y) / np.diff(x)
    for k, s in enumerate(secant):
        if s <= 0.0:
            d[k] = d[k + 1] = 0.0
            continue
        a, b = d[k] / s, d[k + 1] / s
        r = a * a + b * b
        if r > 9.0:
            t = 3.0 / math.sqrt(r)
            d[k], d[k + 1] = t * a * s, t * b * s
    return d


class CumulativeDensity:
    """Smooth positive-parity level counter Gamma_+(E), with Gamma_+(E_gs) = 0.

    ``nu_+ = nu / 2``; callable on energies (energy units).
    """

    def __init__(self, params: ModelParams, E_lo: float | None = None, E_hi: float | None = None,
                 resolution: int = 3000):
        _check(params)
        self.params = params
        scale_E = params.energy_scale
        eps_gs = ground_state_energy(params)
        self.E_gs = eps_gs * scale_E
        E_lo = self.E_gs if E_lo is None else E_lo
        E_hi = 2.0 * scale_E if E_hi is None else E_hi
        if E_lo < self.E_gs - 1e-12 * abs(self.E_gs):
            raise ValueError(f"E_lo={E_lo} is below E_gs={self.E_gs}")
        if E_hi <= E_lo:
            raise ValueError("E_hi must exceed E_lo")
        lo, hi = max(E_lo / scale_E, eps_gs), E_hi / scale_E
        # reduced units: Gamma_+ = (omega0 j^2 / omega) * int f d(eps)
        self._pref = params.omega0 * params.j**2 / params.omega
        start = 0.0
        if lo > eps_gs:
            for a, b in zip(*(lambda n: (n[:-1], n[1:]))(_eps_nodes(eps_gs, lo, 400))):
                start += _interval_integral(a, b, params)
        nodes = _eps_nodes(lo, hi, resolution)
        pieces = [_interval_integral(a, b, params) for a, b in zip(nodes[:-1], nodes[1:])]
        cum = start + np.concatenate([[0.0], np.cumsum(pieces)])
        f = np.array([reduced_dos(e, params)[0] for e in nodes])
        self.eps_nodes = nodes
        self.E_nodes = nodes * scale_E
        self.values = self._pref * cum
        slopes = 0.5 * (2.0 * params.j / params.omega) * f
        slopes = _fritsch_carlson(self.E_nodes, self.values, slopes)
        self._spline = CubicHermiteSpline(self.E_nodes, self.values, slopes)
        self.E_lo, self.E_hi = float(self.E_nodes[0]), float(self.E_nodes[-1])

    def _domain(self, E):
        E = np.asarray(E, dtype=float)
        tol = 1e-9 * max(abs(self.E_lo), abs(self.E_hi), 1.0)
        if np.any(E < self.E_lo - tol) or np.any(E > self.E_hi + tol):
            bad = E[(E < self.E_lo - tol) | (E > self.E_hi + tol)]
            raise ValueError(
                f"energy {bad.flat[0]} outside interpolation domain [{self.E_lo}, {self.E_hi}]"
            )
        return np.clip(E, self.E_lo, self.E_hi)

    def __call__(self, E):
        out = self._spline(self._domain(E))
        return out if np.ndim(out) else float(out)

    def density(self, E):
        """nu_+(E) from the interpolant (derivative of Gamma_+)."""
        out = self._spline(self._domain(E), 1)
        return out if np.ndim(out) else float(out)


def cumulative(params: ModelParams, E_lo=None, E_hi=None, resolution: int = 3000) -> CumulativeDensity:
    return CumulativeDensity(params, E_lo, E_hi, resolution)


@dataclass(frozen=True)
class DosFeature:
    eps: float
    kind: str  # "maximum" (local maximum of nu) or "nonanalytic" (singular slope)


def dos_peak_scan(params: ModelParams, epsilon_window=(-3.0, 3.0), step: float = 0.005,
                  kink_factor: float = 25.0) -> list[DosFeature]:
    """Locate local maxima and non-analytic points of nu on a uniform grid.

    A node is flagged non-analytic when the change of the discrete slope
    exceeds ``kink_factor`` times its median over the window. This catches
    both a finite slope jump (eps = 1) and the divergent slope of the
    superradiant phase at eps = -1, where nu itself stays monotone.
    Nodes within two steps of the ground-state edge are ignored.
    """
    _check(params)
    lo = max(epsilon_window[0], ground_state_energy(params))
    if params.gamma <= critical_coupling(params):
        lo = max(lo, -1.0)
    hi = epsilon_window[1]
    n = int(round((hi - lo) / step))
    grid = lo + step * np.arange(n + 1)
    # keep exact seams on the grid so features land on a node
    for s in (-1.0, 1.0):
        k = int(round((s - lo) / step))
        if 0 < k < n:
            grid[k] = s
    f = np.array([reduced_dos(e, params)[0] for e in grid])
    out = []
    peaks = np.flatnonzero((f[1:-1] > f[:-2]) & (f[1:-1] > f[2:])) + 1
    out += [DosFeature(float(grid[i]), "maximum") for i in peaks]
    slope = np.diff(f) / np.diff(grid)
    jump = np.abs(np.diff(slope))
    ref = np.median(jump) + 1e-12
    kinks = np.flatnonzero(jump > kink_factor * ref) + 1
    # collapse neighbouring flagged nodes to the one with the largest jump
    groups = np.split(kinks, np.flatnonzero(np.diff(kinks) > 2) + 1) if kinks.size else []
    edge = ground_state_energy(params) if params.gamma > critical_coupling(params) else -1.0
    for grp in groups:
        i = grp[np.argmax(jump[grp - 1])]
        if grid[i] - edge <= 2 * step + 1e-12:
            continue
        if not any(abs(ft.eps - grid[i]) <= 2 * step for ft in out):
            out.append(DosFeature(float(grid[i]), "nonanalytic"))
    return sorted(out, key=lambda ft: ft.eps)
