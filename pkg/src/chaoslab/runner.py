"""Experiment pipelines: each kind turns a resolved config into CSV files plus a manifest."""

from __future__ import annotations

import json
import logging
import platform
import time
from pathlib import Path

import numpy as np
import scipy

from .cache import SpectrumCache
from .classical import lyapunov_max, poincare_section, seed_grid
from .config import ExperimentConfig
from .dos import cumulative, dos_curve
from .model import ground_state_energy, quadratic_validity, ShellSampler
from .spectra import tc_gap_minima, tc_spectrum
from .stats import scan_windows, unfold_block

log = logging.getLogger(__name__)

__version__ = "0.1.0"


class NumericalFailure(RuntimeError):
    """A module error surfaced with experiment context."""


def _fmt(x) -> str:
    if isinstance(x, (str, bool, np.bool_)):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".15g")


def write_csv(path: Path, header, rows, sha: str) -> Path:
    with open(path, "w") as fh:
        fh.write(f"# config_sha256={sha}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def write_gnuplot(path: Path, data: str, using: str, xlabel: str, ylabel: str, style="points pt 7 ps 0.3"):
    path.write_text(
        "set datafile separator ','\n"
        f"set xlabel '{xlabel}'\nset ylabel '{ylabel}'\n"
        f"plot '{data}' every ::2 using {using} with {style} notitle\n"
        "pause -1\n"
    )
    return path


class Run:
    def __init__(self, cfg: ExperimentConfig, out: Path):
        self.cfg = cfg
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.sha = cfg.sha256()
        self.files: list[str] = []
        self.convergence: list[dict] = []
        self.cache = SpectrumCache(cfg["cache_dir"]) if cfg["cache_dir"] else SpectrumCache()

    def csv(self, name, header, rows):
        write_csv(self.out / name, header, rows, self.sha)
        self.files.append(name)

    def gnuplot(self, name, data, using, xlabel, ylabel, **kw):
        if self.cfg["gnuplot"]:
            write_gnuplot(self.out / name, data, using, xlabel, ylabel, **kw)
            self.files.append(name)

    def parities(self):
        p = self.cfg["parity"]
        return ("plus", "minus") if p == "both" else (p,)

    def block(self, parity, vectors):
        c = self.cfg
        params = c.params
        b = self.cache.solve(params, parity, c["scheme"], vectors=vectors, check=c["check_convergence"],
                             tolerance=c["tolerance"], cutoff_step=c["cutoff_step"], max_dim=c["max_dim"])
        n = int(b.converged().sum())
        self.convergence.append({
            "parity": parity,
            "n_max": params.n_max,
            "dimension": len(b),
            "converged_count": n,
            "eps_last_converged": float(b.scaled_energies[n - 1]) if n else None,
        })
        return b


def _spectrum(run: Run, vectors: bool):
    c = run.cfg
    params = c.params
    header = ["index", "parity", "E", "eps", "jz_avg", "jx2_avg", "n_avg", "converged"]
    rows = []
    if not params.is_dicke:
        header = ["lam"] + header
        for blk in tc_spectrum(params, c["lam_max"], vectors=vectors):
            obs = blk.observables if blk.observables is not None else np.full((len(blk), 3), np.nan)
            for i, (E, e) in enumerate(zip(blk.energies, blk.scaled_energies)):
                rows.append([blk.basis.lam, i, "-", E, e, *obs[i], True])
    else:
        for parity in run.parities():
            blk = run.block(parity, vectors)
            obs = blk.observables if blk.observables is not None else np.full((len(blk), 3), np.nan)
            conv = blk.converged()
            for i, (E, e) in enumerate(zip(blk.energies, blk.scaled_energies)):
                if vectors and not conv[i]:
                    continue  # Peres output carries converged states only
                rows.append([i, parity, E, e, *obs[i], bool(conv[i])])
    name = "peres.csv" if vectors else "spectrum.csv"
    run.csv(name, header, rows)
    col = header.index("eps") + 1
    if vectors:
        run.gnuplot("peres.gp", name, f"{col}:{col + 1}", "E/(omega0 j)", "<Jz>/j")
    else:
        run.gnuplot("spectrum.gp", name, f"1:{col}", "index", "E/(omega0 j)")


def _tc_gaps(run: Run):
    params = run.cfg.params
    if params.is_dicke:
        raise NumericalFailure("tc-gaps needs model=tc")
    lam_max = run.cfg["lam_max"]
    rows = []
    for blk in tc_spectrum(params, lam_max):
        rows += [[blk.basis.lam, E, e] for E, e in zip(blk.energies, blk.scaled_energies)]
    run.csv("tc_lattice.csv", ["lam", "E", "eps"], rows)
    gaps = tc_gap_minima(params, range(lam_max + 1))
    run.csv("tc_gaps.csv", ["lam", "gap", "E_mid", "eps_mid"],
            [[g.lam, g.gap, g.energy, g.scaled_energy(params)] for g in gaps])
    run.gnuplot("tc_lattice.gp", "tc_lattice.csv", "1:3", "lambda", "E/(omega0 j)")


def _poincare(run: Run):
    c = run.cfg
    params = c.params
    rows, summary = [], []
    for eps in c["energies"]:
        E = eps * params.energy_scale
        sec = poincare_section(params, E, T=c["T"], n_seeds=c["n_seeds"], max_points=c["max_points"])
        for seed, t, r, phi, q in sec.points:
            rows.append([eps, int(seed), t, r, phi, q])
        for i, s in enumerate(sec.seeds):
            summary.append([eps, i, s.q, s.phi, s.jz, sec.crossings_per_seed[i], i in sec.flagged_seeds])
    run.csv("poincare.csv", ["eps", "seed", "t", "r", "phi", "q"], rows)
    run.csv("poincare_seeds.csv", ["eps", "seed", "q0", "phi0", "jz0", "crossings", "flagged"], summary)
    run.gnuplot("poincare.gp", "poincare.csv", "5:4:(1) ", "phi", "1+jz/j", style="points pt 7 ps 0.2")


def _lyapunov(run: Run):
    c = run.cfg
    params = c.params
    rows = []
    for eps in c["energies"]:
        E = eps * params.energy_scale
        for i, s in enumerate(seed_grid(params, E, c["n_seeds"])):
            est = lyapunov_max(s, params, c["T"], c["renorm_interval"], c["chaotic_threshold"],
                               c["regular_threshold"], seed=c["seed"] + i)
            rows.append([eps, i, s.q, s.phi, s.jz, est.lambda_max, est.lambda_T, est.classification, est.drift])
    run.csv("lyapunov.csv", ["eps", "seed", "q0", "phi0", "jz0", "lambda_max", "lambda_T", "class", "drift"], rows)
    run.gnuplot("lyapunov.gp", "lyapunov.csv", "1:6", "E/(omega0 j)", "lambda_max")


def _eps_grid(lo, hi, step):
    n = int(np.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(n + 1)


def _dos(run: Run):
    c = run.cfg
    params = c.params
    eps_gs = ground_state_energy(params)
    lo = c["eps_min"] if c["eps_min"] is not None else eps_gs
    curve = dos_curve(params, _eps_grid(max(lo, eps_gs), c["eps_max"], c["eps_step"]))
    run.csv("dos.csv", ["eps", "nu", "branch", "err"],
            zip(curve.eps, curve.nu, curve.branches, curve.err))
    G = cumulative(params, E_hi=c["eps_max"] * params.energy_scale, resolution=c["resolution"])
    E = curve.eps * params.energy_scale
    run.csv("cumulative.csv", ["E", "eps", "gamma_plus"], zip(E, curve.eps, G(E)))
    run.gnuplot("dos.gp", "dos.csv", "1:2", "E/(omega0 j)", "nu", style="lines")


def _adscan(run: Run):
    c = run.cfg
    params = c.params
    if not params.is_dicke:
        raise NumericalFailure("adscan is defined for the Dicke model only")
    rows, peres = [], []
    for parity in run.parities():
        blk = run.block(parity, c["with_observables"])
        conv = blk.converged()
        E_top = blk.energies[conv][-1]
        G = cumulative(params, E_hi=E_top + params.omega0)
        scan = scan_windows(unfold_block(blk, G), c["window"], c["step"])
        rows += [[parity, e, a, bool(r), m, int(s)] for e, a, r, m, s in
                 zip(scan.eps_center, scan.a2, scan.reject, scan.mean_spacing, scan.start)]
        if blk.observables is not None:
            peres += [[parity, e, *o] for e, o in zip(blk.scaled_energies[conv], blk.observables[conv])]
    run.csv("adscan.csv", ["parity", "eps_center", "A2", "reject", "mean_spacing", "window_start"], rows)
    if peres:
        run.csv("peres.csv", ["parity", "eps", "jz_avg", "jx2_avg", "n_avg"], peres)
    run.gnuplot("adscan.gp", "adscan.csv", "2:3", "E/(omega0 j)", "A^2", style="linespoints")


def _vmap(run: Run):
    c = run.cfg
    base = c.params
    rows = []
    sampler = ShellSampler(n_points=c["n_points"], seed=c["seed"])
    for ratio in c["gamma_ratios"]:
        if abs(ratio - 1.0) < 1e-12:
            log.warning("skipping gamma = gamma_c in vmap (quadratic form degenerate)")
            continue
        p = type(base).from_ratio(ratio, omega=base.omega, omega0=base.omega0, delta=base.delta,
                                  j=base.j, n_max=base.n_max)
        eps_gs = ground_state_energy(p)
        energies = c["energies"] or list(_eps_grid(eps_gs + c["eps_step"], c["eps_max"], c["eps_step"]))
        for eps in energies:
            if eps <= eps_gs:
                continue
            v = quadratic_validity(p, eps * p.energy_scale, sampler)
            rows.append([ratio, eps, v])
    run.csv("vmap.csv", ["gamma_over_gc", "eps", "v_max"], rows)
    run.gnuplot("vmap.gp", "vmap.csv", "1:2:3", "gamma/gamma_c", "E/(omega0 j)", style="points pt 5 ps 1 palette")


PIPELINES = {
    "spectrum": lambda r: _spectrum(r, False),
    "peres": lambda r: _spectrum(r, True),
    "tc-gaps": _tc_gaps,
    "poincare": _poincare,
    "lyapunov-map": _lyapunov,
    "dos": _dos,
    "adscan": _adscan,
    "vmap": _vmap,
}


def run(cfg: ExperimentConfig, out) -> dict:
    """Run one experiment; returns the manifest (also written to manifest.json)."""
    t0 = time.perf_counter()
    r = Run(cfg, Path(out))
    try:
        PIPELINES[cfg.kind](r)
    except NumericalFailure:
        raise
    except (ArithmeticError, RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        raise NumericalFailure(f"{cfg.kind} failed for {cfg.params}: {exc}") from exc
    manifest = {
        "kind": cfg.kind,
        "config": cfg.values,
        "config_sha256": r.sha,
        "files": r.files,
        "versions": {
            "chaoslab": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "wall_clock_s": round(time.perf_counter() - t0, 3),
        "convergence": r.convergence,
    }
    (r.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
