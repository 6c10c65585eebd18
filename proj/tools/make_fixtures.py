#!/usr/bin/env python3
"""Regenerate the checked-in FCIDUMP fixtures (requires pyscf).

Linear hydrogen chains, 1.0 Angstrom spacing, STO-3G, RHF orbitals.
The C++ build never runs this script.
"""
import sys
from pathlib import Path

from pyscf import fci, gto, scf
from pyscf.tools import fcidump


def hydrogen_chain(n_atoms, spacing=1.0):
    atoms = "; ".join(f"H 0 0 {i * spacing:.6f}" for i in range(n_atoms))
    mol = gto.M(atom=atoms, basis="sto-3g", unit="Angstrom", verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.kernel()
    return mol, mf


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for n_atoms in (4, 6):
        mol, mf = hydrogen_chain(n_atoms)
        path = out / f"h{n_atoms}_sto3g.fcidump"
        fcidump.from_scf(mf, str(path), tol=1e-15)
        e_fci = fci.FCI(mf).kernel()[0]
        print(f"{path.name}: E_HF={mf.e_tot:.12f} E_FCI={e_fci:.12f}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures")
