"""Walk through one su_pd(2) sector: labels, matrices, closure and the HP map.

Run: python3 demos/algebra_tour.py
"""

import numpy as np

from specdyn.polyalg import (
    SectorLabel, build_supd2_rep, build_supd2_rep_fock, casimir_check, green_nilpotency_check, hp_map,
    build_supd11_rep, verify_commutation, w_operators,
)
from specdyn.spectral import decompose_sectors

np.set_printoptions(precision=4, suppress=True, linewidth=110)

# second harmonic generation: pump mode 0, signal mode 1, n = 2
print("sectors of the two-mode space with N0 + N1 <= 4 (n = 2):")
for slot in decompose_sectors(2, 4):
    lab = slot.label
    flag = "partial" if slot.partial else "complete"
    print(f"  kappa={lab.kappa} s={lab.s}  l0={str(lab.l0):>5} l1={str(lab.l1):>4}  "
          f"fits {slot.fitted_dim}/{lab.dim}  {flag}")

sec = SectorLabel(2, 1, 4)
rep = build_supd2_rep(sec)
print(f"\nsector {sec.kappa, sec.s}: basis |N0, N1> =", sec.occupations())
print("Y0 levels:", [str(y) for y in rep.levels])
print("Y+ (structure-polynomial build):\n", rep.Yplus.data.real)
other = build_supd2_rep_fock(sec)
print("max |difference| to the Fock restriction:", np.abs(rep.Yplus.data - other.Yplus.data).max())

res = verify_commutation(rep)
print("\nclosure residuals (40-digit check):", {k: f"{v:.1e}" for k, v in res.residuals.items()})
print("same relations on the float64 matrices:", {k: f"{v:.1e}" for k, v in res.float64_residuals.items()})
cas = casimir_check(rep)
print(f"Casimir Psi(Y0) - Y+Y- = {cas.value:.2e} (expected {cas.expected}), spread {cas.deviation:.1e}")

hp = hp_map(rep)
print("\nHP map: V0 diagonal", np.diag(hp.V0.data).real, " V+ sub-diagonal", np.diag(hp.Vplus.data, -1).real)

# one-mode n-photon generation and its canonical cluster operator
for n in (2, 3):
    nil = green_nilpotency_check(build_supd11_rep(n, 0, 60))
    print(f"\nn={n}: ad^{nil.order} residual {nil.residual:.1e}, previous order norm {nil.previous_norm:.3g}")
w = w_operators(3, 1, 16)
print("n=3, kappa=1 photon numbers", w.basis.photon_numbers(), "-> cluster numbers", np.diag(w.NW.data).real)
