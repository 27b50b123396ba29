"""Regenerate smiles_corpus.json.

Reference adjacency lists come from RDKit (parsed with sanitize=False, so
aromaticity and bond orders are exactly as written).  RDKit is only needed
to run this script; the tests read the committed JSON.

    python tests/fixtures/make_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

from rdkit import Chem

from graphsal.molgraph import (
    GeneratorConfig,
    SolubilityConfig,
    generate_solubility_dataset,
    generate_synthetic_dataset,
    write_smiles,
)

HAND_BUILT = [
    "C", "CC", "CCO", "C=C", "C#N", "CC(=O)O", "CC(C)(C)C", "C1CC1", "C1CCCCC1",
    "c1ccccc1", "c1ccncc1", "c1ccoc1", "c1ccsc1", "c1cc[nH]c1", "n1ccccc1",
    "Clc1ccccc1", "Brc1ccc(Br)cc1", "FC(F)(F)c1ccccc1", "ICCI", "OB(O)c1ccccc1",
    "CC(=O)Oc1ccccc1C(=O)O", "CN1C=NC2=C1C(=O)N(C(=O)N2C)C", "c1ccc2ccccc2c1",
    "c1ccc2c(c1)ccc1ccccc12", "C1CC2CCC1CC2", "C12C3C4C1C5C2C3C45",
    "O=C(O)CC(O)(CC(=O)O)C(=O)O", "CC(C)Cc1ccc(cc1)C(C)C(=O)O", "NC(=O)c1cccnc1",
    "COc1ccc2[nH]cc(CCN)c2c1", "C[N+](C)(C)C", "CC(=O)[O-]", "[Na+]", "[NH4+]",
    "[O-][N+](=O)c1ccccc1", "C[S](=O)(=O)C", "OP(=O)(O)O", "CSC", "C=CC=C",
    "C/C=C/C", "F/C=C\\F", "C[C@H](N)C(=O)O", "C[C@@H](O)CC", "N[C@@H](Cc1ccccc1)C(=O)O",
    "C%10CCCCC%10", "C1CCC%11CCCCC%11C1", "c1cc2cccc3cccc(c1)c23", "C1=CC=CC=C1",
    "C-C-C", "c1ccccc1-c1ccccc1", "c1ccccc1:c1ccccc1", "C(C(C(C(C)C)C)C)C",
    "OCC(O)C(O)C(O)C(O)CO", "Cc1ccncc1CCO", "Oc1ccncc1", "c1cnc2ncncc2c1",
    "CC1=C(C(=O)O)C=CC=C1", "O=C1NC(=O)C=C1", "C1OC1", "C1=COC=C1",
    "S=C=S", "O=C=O", "N#CC#N", "CC#CC", "[Cl-]", "[Fe+2]", "[Cu+]",
    "CCN(CC)CC", "CC(C)N", "c1cscn1", "c1ccc(cc1)P(c1ccccc1)c1ccccc1",
    "BrCCBr", "ClC(Cl)(Cl)Cl", "C1CCC2(CC1)CCCC2", "[se]1cccc1", "c1ccc[se]1",
    "CC[O-]", "C[NH3+]", "c1ccc(nc1)-c1ccccn1",
]

MALFORMED = [
    ("C1CC", 1, "unclosed ring closure"),
    ("CC1", 2, "unclosed ring closure"),
    ("C%12CC", 1, "unclosed ring closure"),
    ("CC(C", 2, "unbalanced '('"),
    ("CC(C)(", 5, "unbalanced '('"),
    ("C1CC1(", 5, "unbalanced '('"),
    ("CC)C", 2, "unbalanced ')'"),
    ("c1ccccc1)", 8, "unbalanced ')'"),
    ("CC[N+](C)(C)C)", 13, "unbalanced ')'"),
    ("CXC", 1, "unknown element"),
    ("Q", 0, "unknown element"),
    ("Clc1cccc1Cx", 10, "unknown element"),
    ("C[Xx]C", 2, "unknown element"),
    ("CC=", 2, "dangling bond"),
    ("C-", 1, "dangling bond"),
    ("CC#", 2, "dangling bond"),
    ("C(=)C", 2, "dangling bond"),
    ("C1=CC=CC=C1=", 11, "dangling bond"),
    ("C==C", 2, "consecutive bond"),
    ("=CC", 0, "without a preceding atom"),
    ("C.C", 1, "multi-fragment"),
    ("C[NH4+C", 1, "unterminated bracket"),
    ("c1cc[nH+]cc1[", 12, "unterminated bracket"),
    ("C1CC%1", 4, "'%' must be followed by two digits"),
    ("", 0, "empty SMILES"),
    ("C()C", 2, "empty branch"),
    ("(CC)", 0, "branch opened before any atom"),
    ("C1C1", 3, "duplicate bond"),
    ("C[13C]", 2, "isotope"),
    ("C=1CC#1", 6, "conflicting bond types"),
]

ORDERS = {"SINGLE": "single", "DOUBLE": "double", "TRIPLE": "triple", "AROMATIC": "aromatic"}


def reference(smiles: str) -> dict:
    mol = Chem.MolFromSmiles(smiles, sanitize=False)
    if mol is None:
        raise ValueError(f"RDKit rejects {smiles!r}")
    atoms = [[a.GetSymbol(), a.GetFormalCharge(), a.GetIsAromatic()] for a in mol.GetAtoms()]
    bonds = sorted(
        [min(b.GetBeginAtomIdx(), b.GetEndAtomIdx()), max(b.GetBeginAtomIdx(), b.GetEndAtomIdx()),
         ORDERS[str(b.GetBondType())]]
        for b in mol.GetBonds()
    )
    return {"smiles": smiles, "source": "", "atoms": atoms, "bonds": bonds}


def main():
    cases = []
    for s in HAND_BUILT:
        cases.append({**reference(s), "source": "hand"})
    motif = generate_synthetic_dataset(GeneratorConfig(count=90, seed=11, min_atoms=6, max_atoms=22))
    solub = generate_solubility_dataset(SolubilityConfig(count=200 - len(cases) - 90, seed=12))
    for g, _ in motif + solub:
        cases.append({**reference(write_smiles(g)), "source": "generator"})
    assert len(cases) == 200, len(cases)
    doc = {
        "format_version": "1.0",
        "reference": f"RDKit {Chem.rdBase.rdkitVersion}, MolFromSmiles(sanitize=False)",
        "cases": cases,
        "malformed": [{"smiles": s, "offset": o, "message": m} for s, o, m in MALFORMED],
    }
    out = Path(__file__).with_name("smiles_corpus.json")
    out.write_text(json.dumps(doc, indent=1) + "\n")
    print(f"wrote {len(cases)} cases and {len(MALFORMED)} malformed cases to {out}")


if __name__ == "__main__":
    main()
