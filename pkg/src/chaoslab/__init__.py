"""Regular and chaotic dynamics of the Dicke and Tavis-Cummings models.

Exact diagonalization in symmetry-adapted bases, classical orbits and
Poincare sections, the semiclassical density of states and level-spacing
statistics.
"""

from .params import DICKE, TAVIS_CUMMINGS, ModelParams
from .phase_space import ClassicalState, eom_rhs, hamiltonian_value
from .model import (
    FixedPoint,
    NormalModes,
    ShellSampler,
    critical_coupling,
    energy_minima,
    epsilon_zero,
    ground_state_energy,
    normal_modes,
    quadratic_hamiltonian,
    quadratic_validity,
)
from .basis import BasisSpec, fock_state_parity
from .spectra import (
    SpectrumBlock,
    assemble_hamiltonian,
    check_convergence,
    diagonalize,
    solve,
    solve_converged,
    tc_gap_minima,
    tc_spectrum,
)
from .classical import (
    LyapunovEstimate,
    PoincareSection,
    integrate_orbit,
    lyapunov_max,
    poincare_section,
    solve_q_on_shell,
)
from .dos import CumulativeDensity, DoSCurve, cumulative, dos, dos_peak_scan
from .stats import ADScan, UnfoldedSpectrum, anderson_darling, scan_windows, unfold, wigner_cdf, wigner_pdf

__version__ = "0.1.0"
