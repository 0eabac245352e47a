"""Coherent-state energy landscapes, stationary points and the classical flow.

Run: python3 demos/quasiclassics_tour.py
"""

import numpy as np

from specdyn.polyalg import SectorLabel
from specdyn.quasiclassics import (
    FlowState, FlowSurface, classical_flow, select_best, stationary_points,
)
from specdyn.spectral import ModelParams, build_hhg, diagonalize, evolve

params = ModelParams.resonant(2)

sec = SectorLabel(2, 0, 1)
H = build_hhg(params, sec)
pts = stationary_points(H, sec)
best = select_best(pts)
print("dim-2 sector: stationary energies", [round(p.energy, 10) for p in pts],
      "exact", np.round(diagonalize(H).eigenvalues, 10))
print(f"selected r={best.r:.6f}, variance {best.variance:.1e}")

sec = SectorLabel(2, 0, 10)
for omega0 in (1.0, 2.0, 3.0):
    p = ModelParams(2, 1.0, omega0, 0.3)
    H = build_hhg(p, sec)
    pts = stationary_points(H, sec)
    e0 = diagonalize(H).eigenvalues[0]
    print(f"(0,10), a={p.a:+.1f}: {len(pts)} stationary points, "
          f"min E_qc - E0 = {min(c.energy for c in pts) - e0:.4f}")

sec = SectorLabel(2, 0, 8)
H = build_hhg(params, sec)
traj = classical_flow(H, sec, FlowState(0.3, float(sec.l0) + 3.0), T=50.0, dt=1e-3)
print(f"\nflow in (0,8) over T=50: relative energy drift {traj.relative_drift:.1e}, "
      f"charts used {sorted(set(traj.chart.tolist()))}")

# classical <Y0> against the quantum evolution of the same coherent state
sec = SectorLabel(2, 0, 40)
H = build_hhg(params, sec)
surf = FlowSurface(H, sec)
q0, p0 = 0.3, float(sec.l0) + 12.0
T = 0.5
psi0 = surf.state(q0, surf.r_of_p(p0))
for orientation in ("literal", "schrodinger"):
    traj = classical_flow(H, sec, FlowState(q0, p0), T=T, dt=1e-3, orientation=orientation)
    ev = evolve(H, psi0, traj.t[::50])
    dev = np.abs(ev.expectations["Y0"].real - traj.p[::50])
    print(f"(0,40) {orientation:>11}: max |<Y0>_quantum - p_classical| over t <= {T}: "
          f"{dev.max():.3f}, at t=0.05: {dev[1]:.3f} (range of Y0 is {sec.s})")
