"""Invariant suites behind ``specdyn verify``.

Each suite returns a list of :class:`Check` rows.  A row holds the worst
value over its sweep, the bound it is compared with and where the worst
value occurred.  Every random draw comes from ``numpy.random.default_rng(seed)``
so reports are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Callable

import numpy as np
from scipy.linalg import expm

from . import fock, polarization as pol, polyalg as pa, quasiclassics as qc, spectral as sp

SUITES = ("algebra", "spectral", "quasiclassics", "polarization")


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: float
    bound: float
    relation: str = "<="
    where: str = ""

    @property
    def passed(self) -> bool:
        v = self.value
        if not np.isfinite(v):
            return False
        if self.relation == "<=":
            return bool(v <= self.bound)
        if self.relation == ">":
            return bool(v > self.bound)
        if self.relation == "==":
            return bool(v == self.bound)
        raise ValueError(self.relation)

    def to_json(self) -> dict:
        return {"suite": self.suite, "name": self.name, "value": float(self.value), "relation": self.relation,
                "bound": float(self.bound), "passed": bool(self.passed), "where": self.where}


class _Worst:
    """Running maximum with the label of its location."""

    def __init__(self):
        self.value, self.where = 0.0, ""

    def add(self, value: float, where: str):
        value = float(value)
        if not self.where or not np.isfinite(value) or (np.isfinite(self.value) and value > self.value):
            self.value, self.where = value, where


def _label(sec: pa.SectorLabel) -> str:
    return f"n={sec.n} kappa={sec.kappa} s={sec.s}"


def sweep_sectors(s_max: int = 20):
    for n in (2, 3):
        for kappa in range(n):
            for s in range(1, s_max + 1):
                yield pa.SectorLabel(n, kappa, s)


def random_params(n: int, rng: np.random.Generator) -> sp.ModelParams:
    return sp.ModelParams(n, float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.5, 3.0)),
                          complex(rng.normal(), rng.normal()))


# --- algebra ------------------------------------------------------------------------

def _fock_checks(out: list):
    b = fock.build_basis(3, 6)
    a = [fock.annihilation_op(b, k) for k in range(3)]
    ad = [x.dag() for x in a]
    inner = b.totals < b.n_max
    ccr = max((fock.commutator(a[k], ad[k]) - fock.identity(b)).max_abs(inner) for k in range(3))
    out.append(Check("algebra", "fock [a_k,a_k^+]-1 (interior)", ccr, 1e-12, where="m=3 N_max=6"))
    lower, mixed = 0.0, 0.0
    for j in range(3):
        for k in range(3):
            if j != k:
                lower = max(lower, fock.commutator(a[j], a[k]).max_abs())
                # a_k^+ leaves the basis from the top shell, so the mixed pair commutes below it only
                mixed = max(mixed, fock.commutator(a[j], ad[k]).max_abs(inner))
    out.append(Check("algebra", "fock [a_j,a_k] for j!=k (full basis)", lower, 0.0, where="m=3 N_max=6"))
    out.append(Check("algebra", "fock [a_j,a_k^+] for j!=k (interior)", mixed, 0.0, where="m=3 N_max=6"))
    num = max(float(np.max(np.abs(fock.number_op(b, k).data - (ad[k] @ a[k]).data))) for k in range(3))
    out.append(Check("algebra", "fock N_k - a_k^+ a_k", num, 1e-12, where="m=3 N_max=6"))
    E = {(i, j): ad[i] @ a[j] for i in range(3) for j in range(3)}
    inner2 = b.totals < b.n_max - 1
    um = 0.0
    for (i, j), Eij in E.items():
        for (k, l), Ekl in E.items():
            rhs = fock.identity(b) * 0.0
            if j == k:
                rhs = rhs + E[(i, l)]
            if l == i:
                rhs = rhs - E[(k, j)]
            um = max(um, (fock.commutator(Eij, Ekl) - rhs).max_abs(inner2))
    out.append(Check("algebra", "u(m) closure [E_ij,E_kl]", um, 1e-12, where="m=3 N_max=6"))


def algebra_suite(seed: int = 0) -> list[Check]:
    out: list[Check] = []
    _fock_checks(out)
    comm, comm64, agree, cas, su2, v0 = _Worst(), _Worst(), _Worst(), _Worst(), _Worst(), _Worst()
    for sec in sweep_sectors():
        rep = pa.build_supd2_rep(sec)
        rep_f = pa.build_supd2_rep_fock(sec)
        where = _label(sec)
        r = pa.verify_commutation(rep)
        comm.add(r.max_residual, where)
        comm64.add(max(r.float64_residuals.values()), where)
        comm.add(pa.verify_commutation(rep_f).max_residual, where + " (Fock build)")
        diff = max(float(np.max(np.abs(rep.Yplus.data - rep_f.Yplus.data))),
                   float(np.max(np.abs(rep.Y0.data - rep_f.Y0.data))))
        agree.add(diff, where)
        c = pa.casimir_check(rep)
        cas.add(max(c.deviation, abs(c.value - float(c.expected))), where)
        hp = pa.hp_map(rep)
        su2.add(pa.verify_su2(hp).max_residual, where)
        spec = np.sort(np.real(np.diag(hp.V0.data)))
        j = float(sec.j)
        v0.add(float(np.max(np.abs(spec - (np.arange(sec.dim) - j)))), where)
    out += [
        Check("algebra", "[Y0,Y+-]-+Y+-, [Y-,Y+]-Phi", comm.value, 1e-10,
              where=f"{comm.where}; float64 storage {comm64.value:.2e} at {comm64.where}"),
        Check("algebra", "Y+ and Y0: structure build vs Fock build", agree.value, 1e-12, where=agree.where),
        Check("algebra", "Casimir Psi(Y0)-Y+Y- - (s+1)kappa^(n)", cas.value, 1e-10, where=cas.where),
        Check("algebra", "HP su(2) relations", su2.value, 1e-10, where=su2.where),
        Check("algebra", "HP spectrum of V0 = -j..j", v0.value, 1e-12, where=v0.where),
    ]
    nil, two_nil, w_can, w_num = _Worst(), _Worst(), _Worst(), _Worst()
    prev_min = np.inf
    prev_where = ""
    for n in (2, 3):
        for kappa in range(n):
            rep = pa.build_supd11_rep(n, kappa, 60)
            rpt = pa.green_nilpotency_check(rep)
            where = f"one-mode n={n} kappa={kappa} N_max=60"
            nil.add(rpt.residual, where)
            if rpt.previous_norm < prev_min:
                prev_min, prev_where = rpt.previous_norm, where
            W = pa.w_operators(n, kappa, 60)
            m = W.interior()
            c = (W.Wminus @ W.Wplus - W.Wplus @ W.Wminus).data - np.eye(W.basis.dim)
            w_can.add(float(np.max(np.abs(c[np.ix_(m, m)]))), f"n={n} kappa={kappa}")
            nu = (W.basis.photon_numbers() - kappa) // n
            exact = np.real(np.diag(W.NW.data))
            mism = float(np.max(np.abs(exact[m] - nu[m])))
            mism = max(mism, float(np.max(np.abs(W.NW.data - np.diag(np.diag(W.NW.data))))))
            w_num.add(mism, f"n={n} kappa={kappa}")
    for sec in (pa.SectorLabel(2, 0, 6), pa.SectorLabel(3, 1, 6)):
        two_nil.add(pa.green_nilpotency_check(pa.build_supd2_rep(sec)).residual, _label(sec))
    out += [
        Check("algebra", "ad_Y^(n+1) Y+ (one-mode, interior)", nil.value, 1e-8, where=nil.where),
        Check("algebra", "||ad_Y^n Y+|| (sharp order)", prev_min, 1e-3, ">", where=prev_where),
        Check("algebra", "ad_Y^(n+2) Y+ (two-mode sectors)", two_nil.value, 1e-8, where=two_nil.where),
        Check("algebra", "[W,W+]-I (interior)", w_can.value, 1e-10, where=w_can.where),
        Check("algebra", "N_W diagonal = floor(N/n)", w_num.value, 0.0, "==", where=w_num.where),
    ]
    return out


# --- spectral -----------------------------------------------------------------------

def spectral_suite(seed: int = 0) -> list[Check]:
    out: list[Check] = []
    rng = np.random.default_rng(seed)
    ent, eig, herm = _Worst(), _Worst(), _Worst()
    for n in (2, 3):
        draws = [sp.ModelParams.resonant(n)] + [random_params(n, rng) for _ in range(5)]
        for d, params in enumerate(draws):
            for kappa in range(n):
                for s in range(1, 21):
                    sec = pa.SectorLabel(n, kappa, s)
                    where = f"{_label(sec)} draw={d}"
                    A = sp.build_hhg(params, sec, "linear")
                    B = sp.build_hhg(params, sec, "fock")
                    C = sp.build_hhg(params, sec, "quasispin")
                    ent.add(np.max(np.abs(A.data - B.data)), where)
                    herm.add(max(np.max(np.abs(X.data - X.data.conj().T)) for X in (A, B, C)), where)
                    ea, eb, ec = (np.linalg.eigvalsh(X.data) for X in (A, B, C))
                    eig.add(max(np.max(np.abs(ea - eb)), np.max(np.abs(ea - ec))), where)
    out += [
        Check("spectral", "H_hg linear form vs Fock form (entrywise)", ent.value, 1e-12, where=ent.where),
        Check("spectral", "spectra: linear vs Fock vs quasi-spin form", eig.value, 1e-9, where=eig.where),
        Check("spectral", "Hermiticity of all three forms", herm.value, 1e-12, where=herm.where),
    ]
    # dynamic constant R1 on the full basis
    r1 = 0.0
    for n in (2, 3):
        H = sp.hhg_fock(random_params(n, rng), 12)
        st = H.basis.states
        R1 = fock.diagonal(H.basis, (st[:, 1] + n * st[:, 0]) / (1 + n))
        r1 = max(r1, fock.commutator(H, R1).max_abs())
    out.append(Check("spectral", "[H_hg, R1] on full two-mode basis", r1, 1e-12, where="N_max=12"))
    part = 0
    for n in (2, 3):
        for n_max in (6, 12):
            slots = sp.decompose_sectors(n, n_max)
            part = max(part, abs(sum(sl.fitted_dim for sl in slots) - fock.build_basis(2, n_max).dim))
    out.append(Check("spectral", "sector dims partition the two-mode basis", part, 0, "==", where="N_max in {6,12}"))
    sec = pa.SectorLabel(2, 0, 10)
    H = sp.build_hhg(random_params(2, rng), sec)
    spec = sp.diagonalize(H)
    v = spec.eigenvectors
    out.append(Check("spectral", "eigenvector unitarity", float(np.max(np.abs(v.conj().T @ v - np.eye(sec.dim)))),
                     1e-10, where=_label(sec)))
    scaled = spec.residuals(H) / np.maximum(1.0, np.abs(spec.eigenvalues))
    out.append(Check("spectral", "eigen-residual / max(1,|E|)", float(np.max(scaled)), 1e-9, where=_label(sec)))
    # evolution: unitarity and sector confinement
    params = sp.ModelParams(2, 1.0, 1.7, 0.6 + 0.3j)
    Hf = sp.hhg_fock(params, 12)
    b = Hf.basis
    psi0 = np.zeros(b.dim, dtype=complex)
    psi0[b.index((3, 0))] = 0.6
    psi0[b.index((1, 5))] = 0.8j
    ev = sp.evolve(Hf, psi0, np.linspace(0.0, 20.0, 401), partition=sp.hhg_partition(b, 2))
    e = np.real(ev.expectations["H"])
    out += [
        Check("spectral", "evolution norm drift", float(np.max(np.abs(ev.norms - 1))), 1e-9, where="t in [0,20]"),
        Check("spectral", "evolution relative energy drift", float(np.max(np.abs(e - e[0])) / max(1.0, abs(e[0]))),
              1e-9, where="t in [0,20]"),
        Check("spectral", "per-sector population drift", float(np.max(np.abs(ev.populations - ev.populations[0]))),
              1e-10, where="t in [0,20]"),
    ]
    Hm = sp.build_hmp_general([2.0, 1.0, 1.0], {(1, 2): 0.7 - 0.2j}, 2, 2, 8)
    st = Hm.basis.states
    D = fock.diagonal(Hm.basis, st[:, 1] - st[:, 2])
    out.append(Check("spectral", "frequency conversion [H, N1-N2]", fock.commutator(Hm, D).max_abs(), 1e-12,
                     where="m=n=2 N_max=8"))
    mb = sp.ModelParams(2, 1.0, 0.0, 0.1)
    lo40 = np.linalg.eigvalsh(sp.build_hn_multiboson(mb, 0, 40).data)[:5]
    lo60 = np.linalg.eigvalsh(sp.build_hn_multiboson(mb, 0, 60).data)[:5]
    out.append(Check("spectral", "one-mode multiboson truncation shift (5 lowest)", float(np.max(np.abs(lo40 - lo60))),
                     1e-6, where="n=2 g=0.1 N_max 40 vs 60"))
    return out


# --- quasiclassics ------------------------------------------------------------------

def quasiclassics_suite(seed: int = 0) -> list[Check]:
    out: list[Check] = []
    rng = np.random.default_rng(seed)
    var, stat = _Worst(), _Worst()
    for n in (2, 3):
        for kappa in range(n):
            for d in range(5):
                params = sp.ModelParams.resonant(n) if d == 0 else random_params(n, rng)
                sec = pa.SectorLabel(n, kappa, 1)
                H = sp.build_hhg(params, sec)
                best = qc.minimize_energy(H, sec)
                var.add(abs(best.energy - np.linalg.eigvalsh(H.data)[0]), f"{_label(sec)} draw={d}")
    for sec in (pa.SectorLabel(2, 0, 10), pa.SectorLabel(3, 2, 5), pa.SectorLabel(2, 1, 6)):
        H = sp.build_hhg(random_params(sec.n, rng), sec)
        for v in (0, 1):
            for c in qc.stationary_points(H, sec, v):
                stat.add(max(c.residual, c.theta_residual), f"{_label(sec)} v={v}")
    out += [
        Check("quasiclassics", "dim-2 sectors: min coherent energy - E_ground", var.value, 1e-6, where=var.where),
        Check("quasiclassics", "stationarity residual at reported points", stat.value, 1e-8, where=stat.where),
    ]
    sec = pa.SectorLabel(2, 0, 1)
    H = sp.build_hhg(sp.ModelParams(2, 1.0, 2.0, 1.0), sec)
    best = qc.select_best(qc.stationary_points(H, sec))
    out.append(Check("quasiclassics", "selected point variance (exact eigenstate)", best.variance, 1e-9,
                     where=_label(sec)))
    out.append(Check("quasiclassics", "selected point energy - (2 - sqrt 2)", abs(best.energy - (2 - sqrt(2))), 1e-9,
                     where=_label(sec)))
    sec = pa.SectorLabel(2, 0, 6)
    H = sp.build_hhg(random_params(2, rng), sec)
    E = np.linalg.eigvalsh(H.data)
    below = 0.0
    for _ in range(1000):
        v = int(rng.integers(0, sec.dim))
        xi = complex(rng.uniform(0, np.pi) * np.exp(-1j * rng.uniform(0, 2 * np.pi)))
        e = qc.energy_functional(H, qc.TrialState(sec, v, xi))
        below = max(below, E[0] - e, e - E[-1])
    out.append(Check("quasiclassics", "Rayleigh containment excess (1000 trials)", below, 1e-9, where=_label(sec)))
    hp = qc.hp_for(sec)
    nrm = abs(np.linalg.norm(qc.coherent_state(hp, 2, 0.7 - 0.3j)) - 1)
    out.append(Check("quasiclassics", "coherent state norm", nrm, 1e-12, where=_label(sec) + " v=2"))
    cont = float(np.max(np.abs(qc.coherent_state(hp, 2, 1e-8) - np.eye(sec.dim)[2])))
    out.append(Check("quasiclassics", "continuity at xi -> 0", cont, 1e-7, where="xi=1e-8"))
    sec = pa.SectorLabel(2, 0, 8)
    H = sp.build_hhg(sp.ModelParams.resonant(2), sec)
    p0 = float(sec.l0) + 3.0
    tr = qc.classical_flow(H, sec, qc.FlowState(0.3, p0), 50.0, 1e-3)
    out.append(Check("quasiclassics", "classical flow relative energy drift", tr.relative_drift, 1e-6,
                     where=f"{_label(sec)} T=50 dt=1e-3"))
    lo, hi = float(sec.l0), float(sec.l0 + sec.s)
    excess = max(0.0, lo - float(tr.p.min()), float(tr.p.max()) - hi)
    out.append(Check("quasiclassics", "flow p outside [l0, l0+s]", excess, 1e-9, where=_label(sec)))
    return out


# --- polarization -------------------------------------------------------------------

def polarization_suite(seed: int = 0) -> list[Check]:
    out: list[Check] = []
    B = pol.build_polarized_basis(2, 8)
    qs = pol.build_quasispin(B)
    cl = pol.build_clusters(B)
    inner = B.fock.interior(2)
    cl_res = max((fock.commutator(qs.P0, qs.Pplus) - qs.Pplus).max_abs(inner),
                 (fock.commutator(qs.P0, qs.Pminus) + qs.Pminus).max_abs(inner),
                 (fock.commutator(qs.Pplus, qs.Pminus) - qs.P0 * 2).max_abs(inner))
    out.append(Check("polarization", "quasispin su(2) closure", cl_res, 1e-12, where="m=2 N_max=8"))
    sq = (qs.Psq - (qs.P0 @ qs.P0 + (qs.Pplus @ qs.Pminus + qs.Pminus @ qs.Pplus) * 0.5)).max_abs()
    out.append(Check("polarization", "P^2 = P0^2 + (P+P- + P-P+)/2", sq, 0.0, "==", where="m=2 N_max=8"))
    com = 0.0
    for X in cl.Xplus.values():
        for P in (qs.P0, qs.Pplus, qs.Pminus):
            com = max(com, fock.commutator(P, X).max_abs(inner))
    for Y in cl.Yplus.values():
        com = max(com, fock.commutator(qs.P0, Y).max_abs(inner))
    out.append(Check("polarization", "commutants [P_a,X+_ij], [P0,Y+_ij]", com, 1e-12, where="m=2 N_max=8"))
    xii = max(X.max_abs() for (i, j), X in cl.Xplus.items() if i == j)
    out.append(Check("polarization", "X+_ii (literal formula)", xii, 0.0, "==", where="m=2"))
    mom, inv = _Worst(), _Worst()
    verdicts = []
    for k in (1, 2, 3):
        st = pol.singlet_power(cl, B, k)
        rpt = pol.classify_ul(st, qs, S=6, sample_count=32, seed=seed)
        mom.add(max(abs(v) for v in rpt.moments.values()), f"k={k}")
        inv.add(max(rpt.invariance_residuals["P"]), f"k={k}")
        verdicts.append(rpt.verdict == "P-scalar")
    out += [
        Check("polarization", "singlet powers: max |<P_a^s>|, s<=6", mom.value, 1e-9, where=mom.where),
        Check("polarization", "singlet powers: SU(2)_p invariance (32 samples)", inv.value, 1e-8, where=inv.where),
        Check("polarization", "singlet powers classified P-scalar", float(sum(not v for v in verdicts)), 0, "==",
              where="k=1..3"),
    ]
    B1 = pol.build_polarized_basis(1, 30)
    q1 = pol.build_quasispin(B1)
    t = pol.tmsv_state(0.5, B1)
    rpt = pol.classify_ul(t, q1, S=6, seed=seed)
    p0max = max(abs(rpt.moments[(0, s)]) for s in range(1, 7))
    out += [
        Check("polarization", "TMSV <P0^s> (s<=6)", p0max, 0.0, "==", where="beta=0.5"),
        Check("polarization", "TMSV <P1^2>", rpt.moments[(1, 2)], 1e-3, ">", where="beta=0.5"),
        Check("polarization", "TMSV classified P0-scalar", float(rpt.verdict != "P0-scalar"), 0, "==",
              where="beta=0.5"),
    ]
    Bs = pol.build_polarized_basis(1, 4)
    qss = pol.build_quasispin(Bs)
    one = Bs.vector([1], [0])
    deg = pol.polarization_degree(one, qss)
    out.append(Check("polarization", "|1,0> polarization degree - 1", abs(deg - 1), 1e-10, where="m=1"))
    out.append(Check("polarization", "|1,0> classified polarized",
                     float(pol.classify_ul(one, qss, seed=seed).verdict != "polarized"), 0, "==", where="m=1"))
    weak = (Bs.vector([2], [0]) + Bs.vector([0], [2])) / np.sqrt(2)
    wr = pol.classify_ul(weak, qss, seed=seed)
    out.append(Check("polarization", "weak-UL state: first moments under sampled S",
                     max(wr.first_moment_residuals) if wr.verdict == "weak-UL" else np.inf, wr.tol,
                     where="(|2,0>+|0,2>)/sqrt2"))
    mism = 0
    for m in (1, 2):
        Bm = pol.build_polarized_basis(m, 8)
        rep = pol.duality_check(Bm, pol.build_quasispin(Bm), pol.build_clusters(Bm), 6)
        mism += int(not rep.passed)
        out.append(Check("polarization", f"duality commutant residual m={m}", rep.commutant_residual, 1e-12,
                         where="N_max=8"))
        if m == 2:
            ok = rep.multiplicities[2] == {1.0: 3, 0.0: 1}
            out.append(Check("polarization", "m=2 N=2 multiplicities {p=1:3, p=0:1}", float(not ok), 0, "=="))
    out.append(Check("polarization", "multiplicity tables vs character count (m<=2, N<=6)", mism, 0, "=="))
    # Y-preset evolution from vacuum against the closed-form TMSV
    Bq = pol.build_polarized_basis(1, 24)
    g = 0.5
    H = pol.quadratic_hamiltonian([0.0], pol.cluster_preset(np.array([[g]]), "Y"), Bq)
    vac = Bq.fock.basis_vector([0, 0])
    worst = 0.0
    for tt in (0.05, 0.1, 0.2):
        psi = expm(-1j * tt * H.data) @ vac
        ref = pol.tmsv_state(-2j * g * tt, Bq)
        worst = max(worst, 1 - abs(np.vdot(ref, psi)) ** 2)
    out.append(Check("polarization", "Y-preset evolution vs TMSV(beta=-2i g t) infidelity", worst, 1e-6,
                     where="g*t <= 0.1"))
    return out


_SUITE_FUNCS: dict[str, Callable[[int], list[Check]]] = {
    "algebra": algebra_suite,
    "spectral": spectral_suite,
    "quasiclassics": quasiclassics_suite,
    "polarization": polarization_suite,
}


def run_suite(name: str, seed: int = 0) -> list[Check]:
    if name == "all":
        return [c for s in SUITES for c in _SUITE_FUNCS[s](seed)]
    if name not in _SUITE_FUNCS:
        raise ValueError(f"unknown suite {name!r}")
    return _SUITE_FUNCS[name](seed)


def format_table(checks: list[Check]) -> str:
    w = max((len(c.name) for c in checks), default=10)
    lines = [f"{'suite':<14} {'check':<{w}} {'value':>12} {'rel':>3} {'bound':>9}  status  where"]
    for c in checks:
        lines.append(f"{c.suite:<14} {c.name:<{w}} {c.value:>12.3e} {c.relation:>3} {c.bound:>9.1e}  "
                     f"{'PASS' if c.passed else 'FAIL':<6}  {c.where}")
    n_fail = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - n_fail}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"
