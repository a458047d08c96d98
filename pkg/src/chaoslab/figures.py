"""Canned configurations that regenerate the data behind each published figure.

Every tag maps to one or more (name, kind, config) parts; each part is run into
its own sub-directory of the output folder.
"""

from __future__ import annotations

from pathlib import Path

from .config import resolve
from .runner import run

_TC = {"model": "tc", "j": 10, "n_max": 10}


def _dicke(ratio, j, n_max, **kw):
    return {"model": "dicke", "gamma_over_gc": ratio, "j": j, "n_max": n_max, **kw}


def _sections(ratio, energies, **kw):
    return {"model": "dicke", "gamma_over_gc": ratio, "j": 40, "n_max": 0, "energies": energies, **kw}


FIGURES = {
    # TC spectrum vs lambda and per-lambda gaps
    "fig1": [
        ("gc", "tc-gaps", dict(_TC, gamma_over_gc=1.0, lam_max=60)),
        ("2gc", "tc-gaps", dict(_TC, gamma_over_gc=2.0, lam_max=60)),
    ],
    # TC Peres lattices and the matching classical sections
    "fig2": [
        ("peres_gc", "peres", dict(_TC, gamma_over_gc=1.0, lam_max=50)),
        ("peres_2gc", "peres", dict(_TC, gamma_over_gc=2.0, lam_max=50)),
        ("sections_gc", "poincare", dict(_TC, gamma_over_gc=1.0, energies=[-0.8, 1.2])),
        ("sections_2gc", "poincare", dict(_TC, gamma_over_gc=2.0, energies=[-1.5, 1.5])),
    ],
    # Dicke Peres lattices for Jz, Jx^2 and a^+a (all three columns in one file)
    "fig3": [("peres", "peres", _dicke(3.0, 40, 300))],
    "fig4": [
        ("normal", "vmap", _dicke(0.5, 40, 0, gamma_ratios=[0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
                                  eps_step=0.25, eps_max=2.0)),
        ("superradiant", "vmap", _dicke(2.0, 40, 0, gamma_ratios=[1.2, 1.4, 1.6, 1.8, 2.0, 2.5, 3.0],
                                        eps_step=0.25, eps_max=2.0)),
    ],
    "fig5": [("adscan", "adscan", _dicke(0.2, 40, 160))],
    "fig6": [("sections", "poincare", _sections(0.2, [-0.5, 2.0]))],
    "fig7": [("adscan", "adscan", _dicke(0.9, 40, 160))],
    "fig8": [("sections", "poincare", _sections(0.9, [-0.8, -0.5, 0.5, 1.2, 1.8, 2.5]))],
    "fig9": [
        ("adscan", "adscan", _dicke(1.0, 40, 160)),
        ("sections", "poincare", _sections(1.0, [-0.9, -0.8, -0.2, 0.2])),
    ],
    "fig10": [
        ("adscan_j40", "adscan", _dicke(1.35, 40, 160)),
        ("adscan_j100", "adscan", _dicke(1.35, 100, 70)),
    ],
    "fig11": [("sections", "poincare", _sections(1.35, [-1.16, -1.0, -0.95, -0.8, -0.5, 0.5]))],
    "fig12": [
        ("adscan_j40", "adscan", _dicke(2.0, 40, 160)),
        ("adscan_j80", "adscan", _dicke(2.0, 80, 95)),
    ],
    "fig13": [("sections", "poincare", _sections(2.0, [-2.0, -1.4, -1.2, -1.0, -0.5, 1.5]))],
}


def available() -> list[str]:
    return sorted(FIGURES, key=lambda t: int(t[3:]))


def figure_configs(tag: str, overrides: dict | None = None):
    if tag not in FIGURES:
        raise KeyError(f"unknown figure tag {tag!r}; available: {', '.join(available())}")
    return [(name, resolve(kind, {**cfg, **(overrides or {})})) for name, kind, cfg in FIGURES[tag]]


def reproduce_figure(tag: str, out, overrides: dict | None = None) -> list[dict]:
    """Run every part of ``tag`` into ``out/<part>``; returns the manifests."""
    out = Path(out)
    return [run(cfg, out / name) for name, cfg in figure_configs(tag, overrides)]
