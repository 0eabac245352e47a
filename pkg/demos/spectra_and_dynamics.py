"""Sector spectra of the harmonics-generation Hamiltonian and confined dynamics.

Run: python3 demos/spectra_and_dynamics.py
"""

import numpy as np

from specdyn import fock
from specdyn.polyalg import SectorLabel
from specdyn.spectral import (
    ModelParams, build_hhg, build_hqs, complete_sectors, diagonalize, evolve, hhg_fock, hhg_partition,
)

params = ModelParams(2, omega1=1.0, omega0=2.0, g=1.0)  # resonant
print(f"a = {params.a}, b = {params.b}, c = {params.c}")

print("\nlowest levels per complete sector (N_max = 8), three constructions:")
for sec in complete_sectors(2, 8)[:8]:
    w = [diagonalize(build_hhg(params, sec, form)).eigenvalues for form in ("linear", "fock")]
    w.append(diagonalize(build_hqs(params, sec)).eigenvalues)
    spread = max(np.abs(x - w[0]).max() for x in w)
    print(f"  ({sec.kappa},{sec.s}) E0 = {w[0][0]: .6f}   forms agree to {spread:.1e}")

sec = SectorLabel(2, 0, 1)
t = np.linspace(0, np.pi / np.sqrt(2), 5)
ev = evolve(build_hhg(params, sec), np.array([1, 0], dtype=complex), t)
print("\nRabi flop in sector (0,1): <Y0>(t) =", np.round(ev.expectations["Y0"].real, 4))

# two sectors at once in the full truncated space: populations stay put
H = hhg_fock(params, 10)
b = H.basis
psi0 = fock.normalize(b.basis_vector([2, 0]) + b.basis_vector([0, 3]))
ev = evolve(H, psi0, np.linspace(0, 20, 201), partition=hhg_partition(b, 2))
print(f"\nnorm drift {np.abs(ev.norms - 1).max():.1e}, "
      f"sector population drift {np.abs(ev.populations - ev.populations[0]).max():.1e}")
