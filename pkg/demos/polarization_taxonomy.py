"""Polarization quasispin, biphoton clusters and the unpolarized-light taxonomy.

Run: python3 demos/polarization_taxonomy.py
"""

import numpy as np
from scipy.linalg import expm

from specdyn import polarization as pol

B1 = pol.build_polarized_basis(1, 30)
q1 = pol.build_quasispin(B1)
B2 = pol.build_polarized_basis(2, 6)
q2 = pol.build_quasispin(B2)
c2 = pol.build_clusters(B2)

small = pol.build_polarized_basis(1, 4)
qs = pol.build_quasispin(small)
mixture = 0.5 * (np.outer(small.vector([1], [0]), small.vector([1], [0]))
                 + np.outer(small.vector([0], [1]), small.vector([0], [1])))
states = {
    "|1,0>": (small.vector([1], [0]), qs),
    "(|2,0> + |0,2>)/sqrt2": ((small.vector([2], [0]) + small.vector([0], [2])) / np.sqrt(2), qs),
    "mixture of |1,0> and |0,1>": (mixture, qs),
    "TMSV beta=0.5": (pol.tmsv_state(0.5, B1), q1),
}
for k in (1, 2, 3):
    states[f"(X+_12)^{k}|0>"] = (pol.singlet_power(c2, B2, k), q2)

for name, (st, q) in states.items():
    r = pol.classify_ul(st, q, seed=0)
    big = max(abs(v) for v in r.moments.values())
    print(f"{name:28s} degree {r.polarization_degree:.3f}  max|<P^s>| {big:.3f}  -> {r.verdict}")

print("\nSU(2)_p multiplets in the N-photon spaces of two spatial modes:")
for N in range(5):
    print(f"  N={N}: {pol.character_multiplicities(2, N)}")

# the Y cluster preset H = 2 g (Y+ + Y-) squeezes the vacuum with beta = -2i g t
Bq = pol.build_polarized_basis(1, 24)
g, t = 0.5, 0.1
H = pol.quadratic_hamiltonian([0.0], pol.cluster_preset(np.array([[g]]), "Y"), Bq)
psi = expm(-1j * t * H.data) @ Bq.fock.basis_vector([0, 0])
for beta in (-2j * g * t, -1j * g * t):
    f = abs(np.vdot(pol.tmsv_state(beta, Bq), psi)) ** 2
    print(f"fidelity with TMSV(beta={beta:.2f}): {f:.10f}")
