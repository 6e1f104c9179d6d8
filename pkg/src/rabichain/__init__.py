"""Dimerized-chain band structure and coupled-chain Rabi dynamics.

Two halves share this package.  The band half (``ssh_band``,
``quasiparticle``) covers a dimerized tight-binding chain: quasiparticle
dispersions on two branches, sufficient conditions for a spectrum minimum,
and the continuum ground-state energy whose double well drives spontaneous
dimerization.  The dynamics half (``rabi_dynamics``, ``spectra``) evolves
Rabi wave packets on n cyclically coupled chains in a single quantized field
mode and reads stationary line spectra off the time-dependent inversion.
``hypercomplex`` supplies the commutative circulant algebra used for the
chain-ring couplings, and the ``rabichain`` command line exposes the report
paths.
"""

from .hypercomplex import (
    CirculantMatrix,
    DimensionError,
    HyperNumber,
    ProjectorBasis,
    eigenvalues,
    hyper_mul,
    projector,
    shift_power,
)
from .quasiparticle import (
    AfeswrReference,
    SolitonProfile,
    afeswr_catalog,
    coherence_length,
    sigma_length_estimate,
)
from .rabi_dynamics import (
    AmplitudeField,
    ContinuumResult,
    HamiltonianParts,
    IntegratorFailure,
    InversionTrace,
    LatticeResult,
    NonResonantError,
    SystemConfig,
    build_hamiltonian,
    chain_mode_bands,
    evolve_continuum,
    evolve_lattice,
    evolve_packet_spectrum,
    inversion_of,
    rabi_frequency,
    stable_dt,
)
from .spectra import (
    Catalog,
    CatalogDiagnostics,
    CatalogEntry,
    CatalogLine,
    DegenerateFitError,
    LinearFit,
    LinearityReport,
    LineMatch,
    MatchReport,
    NonUniformGridError,
    Peak,
    PeakNotFoundError,
    RevivalReport,
    Spectrum,
    catalog_diagnostics,
    classify_revival,
    compare_catalog,
    detect_peaks,
    fit_linear_response,
    linearity_scan,
    load_catalog,
    measure_principal_frequency,
    principal_peak,
    spectrum_of,
)
from .ssh_band import (
    BranchSelector,
    DegeneratePointError,
    IndeterminateOccupationError,
    MinimaResult,
    OccupationState,
    QuadratureError,
    SSHParams,
    coherence_factors,
    dispersion,
    find_dimerization_minima,
    ground_state_energy_elliptic,
    ground_state_energy_integral,
    ground_state_energy_smallz,
    minimum_conditions,
    quasiparticle_energy,
    u_from_ratio,
)
from .config import AnalysisSpec, ConfigError, PacketSpec, RunConfig, load_config, parse_config

__version__ = "0.1.0"
