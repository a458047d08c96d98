"""On-disk cache of diagonalized blocks, one .npz per (model, omega, omega0, gamma, j, n_max, parity)."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path

import numpy as np

from .basis import BasisSpec
from .params import ModelParams
from .spectra import SpectrumBlock, solve, solve_converged

log = logging.getLogger(__name__)


def default_cache_dir() -> Path:
    env = os.environ.get("CHAOSLAB_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "chaoslab"


class SpectrumCache:
    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root is not None else default_cache_dir()

    @staticmethod
    def key(params, parity, scheme, tolerance, cutoff_step) -> dict:
        return {
            "model": "dicke" if params.delta == 1 else "tc",
            "omega": params.omega,
            "omega0": params.omega0,
            "gamma": params.gamma,
            "j": params.j,
            "n_max": params.n_max,
            "parity": parity,
            "scheme": scheme,
            "tolerance": tolerance,
            "cutoff_step": cutoff_step,
        }

    def path(self, key: dict) -> Path:
        digest = hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:24]
        return self.root / f"block_{digest}.npz"

    def load(self, key: dict, need_observables: bool) -> SpectrumBlock | None:
        path = self.path(key)
        if not path.exists():
            return None
        try:
            with np.load(path, allow_pickle=False) as data:
                if json.loads(str(data["key"])) != key:
                    return None
                obs = data["observables"] if data["observables"].size else None
                if need_observables and obs is None:
                    return None
                energies = data["energies"]
                count = int(data["converged_count"])
        except (OSError, KeyError, ValueError) as exc:
            log.warning("ignoring unreadable cache file %s (%s)", path, exc)
            return None
        params = ModelParams(key["omega"], key["omega0"], key["gamma"], 1 if key["model"] == "dicke" else 0,
                             key["j"], key["n_max"])
        spec = BasisSpec(key["scheme"], key["parity"], None, key["n_max"])
        return SpectrumBlock(params, spec, energies, energies / params.energy_scale, obs,
                             None if count < 0 else count)

    def store(self, key: dict, block: SpectrumBlock) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.path(key)
        fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                np.savez(
                    fh,
                    key=np.array(json.dumps(key, sort_keys=True)),
                    energies=block.energies,
                    observables=block.observables if block.observables is not None else np.zeros(0),
                    converged_count=np.array(-1 if block.converged_count is None else block.converged_count),
                )
            os.replace(tmp, path)  # atomic on POSIX: readers see old or new file, never a partial one
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return path

    def solve(self, params, parity="plus", scheme="coherent_parity", vectors=False, check=True,
              tolerance=1e-6, cutoff_step=None, max_dim=20000) -> SpectrumBlock:
        """Cached wrapper around :func:`solve_converged` / :func:`solve`."""
        key = self.key(params, parity, scheme, tolerance if check else None, cutoff_step if check else None)
        block = self.load(key, vectors)
        if block is not None:
            log.info("cache hit %s", self.path(key).name)
            return block
        if check:
            block, _ = solve_converged(params, parity, scheme, vectors=vectors,
                                       tolerance=tolerance * params.omega0,
                                       cutoff_step=cutoff_step, max_dim=max_dim)
        else:
            block = solve(params, scheme, parity, vectors=vectors, max_dim=max_dim)
        self.store(key, block)
        return block
