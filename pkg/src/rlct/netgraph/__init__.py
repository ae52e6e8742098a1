"""Netlists, MNA descriptor models, network builders, and planar duals."""

from .builders import (
    LeastSquaresCircuit,
    build_least_squares_circuit,
    build_swing_grid,
    kron_reduce,
    swing_grid_netlist,
)
from .dual import planar_dual
from .mna import (
    DescriptorModel,
    descriptor_to_statespace,
    impedance_at,
    mna_descriptor,
    transfer_of_descriptor,
)
from .netlist import (
    Element,
    Netlist,
    open_circuit_capacitors,
    parse_netlist,
    serialize_netlist,
    validate_netlist,
)

__all__ = [
    "DescriptorModel",
    "Element",
    "LeastSquaresCircuit",
    "Netlist",
    "build_least_squares_circuit",
    "build_swing_grid",
    "descriptor_to_statespace",
    "impedance_at",
    "kron_reduce",
    "mna_descriptor",
    "open_circuit_capacitors",
    "parse_netlist",
    "planar_dual",
    "serialize_netlist",
    "swing_grid_netlist",
    "transfer_of_descriptor",
    "validate_netlist",
]
