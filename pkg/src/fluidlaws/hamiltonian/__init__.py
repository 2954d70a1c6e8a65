"""Hamiltonian operator of the fluid system, Casimirs and density-generated symmetries."""

from .operator import (
    SymmetryGenerator,
    VariationalTriple,
    antisymmetry_defect,
    apply_hamiltonian,
    density_generator,
    hamiltonian_flow_residual,
    pairing,
    symmetry_determining_residual,
    symmetry_from_density,
    variational_triple,
)

__all__ = [name for name in dir() if not name.startswith("_")]
