"""Discrete beam-splitter channels on prime-dimensional qudits."""

from .linalg import (
    Spectrum,
    eig_hermitian,
    max_relative_entropy,
    partial_trace,
    relative_entropy,
    tensor,
    von_neumann_entropy,
)
from .weyl import (
    BSParams,
    CharacteristicTable,
    QuditParams,
    WeylIndex,
    characteristic_function,
    inverse_weyl_transform,
    phase_point_operator,
    random_clifford,
    valid_st_pairs,
    weyl_operator,
    wigner_function,
)
from .states import (
    DensityMatrix,
    PurifiedState,
    StabilizerFamily,
    dephasing_channel,
    enumerate_stabilizers,
    is_phase_inversion_symmetric,
    mean_state,
    preset_state,
    purify,
    read_state,
    write_state,
)
from .channel import (
    BeamSplitterChannel,
    ChoiMatrix,
    beam_splitter_unitary,
    complement_identity_check,
    convolve,
    convolve_complement,
    degradation_witness,
    iterate_convolution,
)
from .magic import mrm, mrm_enumerated, mrm_inf, wigner_negativity
from .capacity import (
    CapacityReport,
    OptimizerBudget,
    VerifyConfig,
    capacity_witness_construction,
    coherent_information,
    coherent_information_purification,
    qcap_one_shot,
    verify_theorem,
)
from .coding import (
    CodeSpec,
    entanglement_fidelity,
    fidelity_ratio_bound_check,
    magic_code_construction,
    stabilizer_ceiling_search,
    stabilizer_code_construction,
)

__version__ = "0.1.0"
