"""Model parameters shared by every part of the toolkit."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

DICKE = 1
TAVIS_CUMMINGS = 0


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the Dicke (``delta=1``) or Tavis-Cummings (``delta=0``) model.

    ``j`` is the pseudospin length (half the number of atoms) and ``n_max`` the
    bosonic cutoff used by the quantum bases.
    """

    omega: float = 1.0
    omega0: float = 1.0
    gamma: float = 0.0
    delta: int = DICKE
    j: float = 0.5
    n_max: int = 0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if self.delta not in (0, 1):
            raise ValueError(f"delta must be 0 (TC) or 1 (Dicke), got {self.delta}")
        two_j = 2 * self.j
        if abs(two_j - round(two_j)) > 1e-12 or round(two_j) < 1:
            raise ValueError(f"2j must be a positive integer, got j={self.j}")
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise ValueError(f"n_max must be a non-negative integer, got {self.n_max}")
        object.__setattr__(self, "j", round(two_j) / 2)
        object.__setattr__(self, "n_max", int(self.n_max))
        object.__setattr__(self, "delta", int(self.delta))

    @classmethod
    def from_ratio(cls, gamma_over_gc: float, **kwargs) -> "ModelParams":
        """Build parameters with the coupling given in units of the critical one."""
        omega = kwargs.get("omega", 1.0)
        omega0 = kwargs.get("omega0", 1.0)
        delta = kwargs.get("delta", DICKE)
        gc = math.sqrt(omega * omega0) / (1 + delta)
        return cls(gamma=gamma_over_gc * gc, **kwargs)

    @property
    def gamma_c(self) -> float:
        return math.sqrt(self.omega0 * self.omega) / (1 + self.delta)

    @property
    def ratio(self) -> float:
        """gamma / gamma_c."""
        return self.gamma / self.gamma_c

    @property
    def n_atoms(self) -> int:
        return int(round(2 * self.j))

    @property
    def is_dicke(self) -> bool:
        return self.delta == DICKE

    @property
    def energy_scale(self) -> float:
        """omega0 * j, the unit of the scaled energy epsilon."""
        return self.omega0 * self.j

    def phase(self, rtol: float = 1e-12) -> str:
        r = self.ratio
        if abs(r - 1.0) <= rtol:
            return "critical"
        return "normal" if r < 1.0 else "superradiant"

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def key(self) -> tuple:
        return (self.delta, self.omega, self.omega0, self.gamma, self.j, self.n_max)
