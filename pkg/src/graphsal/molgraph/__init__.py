from .generate import (
    GeneratorConfig,
    SolubilityConfig,
    generate_solubility_dataset,
    generate_synthetic_dataset,
)
from .graph import BOND_ORDERS, Atom, Bond, MolecularGraph
from .match import match_motif, motif_atoms
from .smiles import SmilesError, parse_smiles, write_smiles
from .vocab import AtomVocabulary, featurize

__all__ = [
    "Atom",
    "AtomVocabulary",
    "BOND_ORDERS",
    "Bond",
    "GeneratorConfig",
    "MolecularGraph",
    "SmilesError",
    "SolubilityConfig",
    "featurize",
    "generate_solubility_dataset",
    "generate_synthetic_dataset",
    "match_motif",
    "motif_atoms",
    "parse_smiles",
    "write_smiles",
]
