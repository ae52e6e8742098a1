"""Passive RLCT network modelling and closed-form H2/H-infinity synthesis."""

from .errors import (
    ConvergenceError,
    ImproperBehaviorError,
    NetlistError,
    RlctError,
    SolverError,
    StructureError,
)
from .internal_map import (
    InternalData,
    build_internal_map,
    commuting_eigvecs,
    element_law_residual,
    parse_internal,
    serialize_internal,
    validate_internal_data,
)
from .riccati import (
    RiccatiSolution,
    h2_norm,
    hinf_norm,
    hinf_solvable,
    solve_care,
    solve_lyapunov,
)
from .structured import (
    BlockPartition,
    Signature,
    StructuredRealization,
    ValidationReport,
    build_lct,
    build_rct,
    build_rlt,
    infer_signatures,
    parse_realization,
    reduce_to_controllable,
    serialize_realization,
    transfer_eval,
    validate_structure,
)
from .sim import (
    SimulationResult,
    kkt_residual,
    simulate,
    solve_constrained_ls,
)
from .synthesis import (
    Controller,
    GeneralizedPlant,
    Problem2Plant,
    Problem3Plant,
    close_loop,
    controller_symmetry_residual,
    embed_problem2,
    gamma_star,
    h2_symmetric,
    hinf_symmetric,
    lct_coprime,
    lct_h2,
    lct_hinf,
    parse_controller,
    plant_symmetry_residual,
    rct_static,
    rlt_static,
    serialize_controller,
)

__version__ = "0.1.0"
