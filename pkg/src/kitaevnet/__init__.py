"""Correlation networks of the finite Kitaev chain."""

from .errors import (
    CapacityError,
    ConvergenceError,
    DomainError,
    InvalidStateError,
    KitaevNetError,
    SymmetryError,
    UnsupportedBoundaryError,
)
from .freefermion import bdg_matrix, bdg_spectrum, majorana_zero_mode_potentials, min_bdg_gap
from .kernels import BACKEND
from .measures import (
    LogBase,
    MeasureKind,
    concurrence,
    concurrence_x_state,
    l1_coherence,
    mutual_information,
    von_neumann_entropy,
)
from .model import (
    Boundary,
    ChainSpec,
    XYSpec,
    build_kitaev_hamiltonian,
    build_parity_operator,
    build_xy_hamiltonian,
    get_basis,
    sector_project,
)
from .network import (
    CorrelationNetwork,
    Normalization,
    build_network,
    clustering,
    network_report,
    node_density,
)
from .rdm import pair_correlators, reduce_to_pair, reduce_to_site
from .scan import (
    SweepSpec,
    detect_discontinuities,
    fidelity_sweep,
    locate_c1_point,
    run_sweep,
)
from .solver import (
    QuantumState,
    fidelity,
    ground_energy_analytic,
    ground_state,
    quasiparticle_spectrum,
)
from .theory import (
    build_factorized_odd_state,
    factorization_angle,
    factorization_point,
    factorization_potential,
    jw_image,
    permutation_invariance_deviation,
)

__version__ = "0.1.0"
