"""Unbiased measurements with thermal pointers: correlation limits and energy costs."""

from .errors import (
    ChannelError,
    DomainError,
    FinmeasError,
    PartitionError,
    RankError,
    SizeError,
    UsageError,
)
from .measure import (
    CorrelationMatrixView,
    PointerPartition,
    PropertyReport,
    average_correlation,
    build_cnot,
    build_swap,
    build_u_d,
    build_unb,
    check_implications,
    check_properties,
    check_state_properties,
    compose_unbiased_unitary,
    correlation,
    extract_correlation_matrix,
    implication_suite,
    validate_kraus_structure,
)
from .optimal import (
    CostCurvePoint,
    OptimalConstruction,
    build_optimal_general,
    build_optimal_qubit_pointer,
    c_max,
    c_max_qubit_closed_form,
    cooling_cost,
    cost_curve,
    delta_E_corr_analytic,
    delta_E_corr_numeric,
    write_cost_curve_csv,
)
from .oracle import OracleResult, brute_c_max, brute_min_energy, simulate_channel_dense
from .qmat import (
    BasisPermutation,
    KrausChannel,
    PermutationChannel,
    UnitaryChannel,
    kron,
    partial_trace,
)
from .states import (
    SectoredSpectrum,
    ThermalWeights,
    energy,
    gibbs,
    joint_energies,
    load_spectrum,
    qubit_pointer_spectrum,
    thermal_weights,
)

__version__ = "0.1.0"
