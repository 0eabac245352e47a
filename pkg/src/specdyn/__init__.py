"""Symmetry sectors, polynomial dynamical algebras and quasispin classification
for bosonic multiphoton models."""

from . import fock, polarization, polyalg, quasiclassics, spectral
from .fock import FockBasis, OperatorMatrix, build_basis
from .polyalg import SectorLabel, build_supd2_rep, hp_map
from .spectral import ModelParams, diagonalize

__version__ = "0.1.0"

__all__ = [
    "FockBasis", "OperatorMatrix", "SectorLabel", "ModelParams",
    "build_basis", "build_supd2_rep", "hp_map", "diagonalize",
    "fock", "polyalg", "spectral", "quasiclassics", "polarization",
]
