#!/usr/bin/env python3
#
# Project RigidFlow - Copyright 2026 RigidFlow authors.
# SPDX-License-Identifier: Apache-2.0
#
"""Regenerate the SDF fixtures under tests/data with RDKit.

The output is committed; this script only documents how it was made.
"""

import argparse
import pathlib

from rdkit import Chem
from rdkit.Chem import AllChem

CORPUS = [
    ("methane", "C"),
    ("ethane", "CC"),
    ("ethene", "C=C"),
    ("acrylonitrile", "C=CC#N"),
    ("propane", "CCC"),
    ("isobutane", "CC(C)C"),
    ("water", "O"),
    ("ammonia", "N"),
    ("methanol", "CO"),
    ("ethanol", "CCO"),
    ("acetone", "CC(C)=O"),
    ("acetic_acid", "CC(=O)O"),
    ("acetonitrile", "CC#N"),
    ("propyne", "CC#C"),
    ("but2yne", "CC#CC"),
    ("cyclopropane", "C1CC1"),
    ("cyclohexane", "C1CCCCC1"),
    ("benzene", "c1ccccc1"),
    ("toluene", "Cc1ccccc1"),
    ("chlorobenzene", "Clc1ccccc1"),
    ("fluorobenzene", "Fc1ccccc1"),
    ("phenol", "Oc1ccccc1"),
    ("aniline", "Nc1ccccc1"),
    ("benzoic_acid", "OC(=O)c1ccccc1"),
    ("naphthalene", "c1ccc2ccccc2c1"),
    ("pyridine", "c1ccncc1"),
    ("pyrrole", "c1cc[nH]c1"),
    ("furan", "c1ccoc1"),
    ("thiophene", "c1ccsc1"),
    ("imidazole", "c1c[nH]cn1"),
    ("indole", "c1ccc2[nH]ccc2c1"),
    ("biphenyl", "c1ccc(cc1)-c1ccccc1"),
    ("ethylbenzene", "CCc1ccccc1"),
    ("anisole", "COc1ccccc1"),
    ("acetanilide", "CC(=O)Nc1ccccc1"),
    ("nitrobenzene", "[O-][N+](=O)c1ccccc1"),
    ("dimethyl_ether", "COC"),
    ("methylamine", "CN"),
    ("urea", "NC(N)=O"),
    ("formamide", "NC=O"),
    ("glycine", "NCC(=O)O"),
    ("alanine", "CC(N)C(=O)O"),
    ("butane", "CCCC"),
    ("chloroform", "ClC(Cl)Cl"),
    ("dichloromethane", "ClCCl"),
    ("bromoethane", "CCBr"),
    ("ethanethiol", "CCS"),
    ("tetrahydrofuran", "C1CCOC1"),
    ("paracetamol", "CC(=O)Nc1ccc(O)cc1"),
    ("aspirin", "CC(=O)Oc1ccccc1C(=O)O"),
]

CONFORMER_SET = [
    "butane", "ethylbenzene", "anisole", "acetanilide", "glycine",
    "alanine", "biphenyl", "paracetamol", "aspirin", "ethanol",
]


def embed(name, smiles, n_conf, seed):
    mol = Chem.AddHs(Chem.MolFromSmiles(smiles))
    params = AllChem.ETKDGv3()
    params.randomSeed = seed
    cids = list(AllChem.EmbedMultipleConfs(mol, numConfs=n_conf, params=params))
    if not cids:
        raise RuntimeError(f"embedding failed for {name}")
    AllChem.MMFFOptimizeMoleculeConfs(mol, maxIters=2000)
    Chem.Kekulize(mol, clearAromaticFlags=True)
    mol.SetProp("_Name", name)
    return mol, cids


def write(path, entries):
    with Chem.SDWriter(str(path)) as w:
        w.SetKekulize(True)
        for mol, cids in entries:
            for cid in cids:
                w.write(mol, confId=cid)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve()
                                         .parents[1] / "tests" / "data"))
    ap.add_argument("--seed", type=int, default=20260101)
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    single = [embed(n, s, 1, args.seed) for n, s in CORPUS]
    write(out / "corpus50.sdf", single)
    write(out / "toy10.sdf", single[:10])

    smiles = dict(CORPUS)
    multi = [embed(n, smiles[n], 6, args.seed) for n in CONFORMER_SET]
    write(out / "conformers.sdf", multi)


if __name__ == "__main__":
    main()
