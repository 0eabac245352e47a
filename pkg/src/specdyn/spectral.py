"""Model Hamiltonians, sector decomposition, exact spectra and unitary evolution."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import fock
from .fock import OperatorMatrix, diagonal
from .polyalg import (
    SectorBasis,
    SectorLabel,
    build_supd11_rep,
    build_supd2_rep,
    hp_map,
    sector_basis,
    sector_indices,
    two_mode_ladder,
)


@dataclass(frozen=True)
class ModelParams:
    """Harmonics-generation parameters; ``a``, ``b``, ``c`` are derived on access."""

    n: int
    omega1: float
    omega0: float
    g: complex = 0.0

    @property
    def a(self) -> float:
        return self.n * self.omega1 - self.omega0

    @property
    def b(self) -> complex:
        return complex(self.g)

    @property
    def c(self) -> float:
        return self.omega1 + self.omega0

    @classmethod
    def resonant(cls, n: int, omega1: float = 1.0, g: complex = 1.0) -> "ModelParams":
        """Default configuration with ``omega0 = n omega1`` (a = 0)."""
        return cls(n, omega1, n * omega1, g)


@dataclass(frozen=True)
class SectorSlot:
    """A sector met inside a two-mode truncation ``N0 + N1 <= n_max``."""

    label: SectorLabel
    fitted_dim: int

    @property
    def partial(self) -> bool:
        return self.fitted_dim < self.label.dim


def decompose_sectors(n: int, n_max: int) -> list[SectorSlot]:
    """All sectors with at least one basis vector inside the truncation.

    A sector is complete when its top vector ``|N1 = kappa + n s, N0 = 0>``
    fits; otherwise it is flagged partial.  Fitted dimensions sum to the
    two-mode basis dimension.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    out = []
    for s in range(n_max + 1):
        for kappa in range(n):
            if kappa + s > n_max:
                continue
            # eta-th vector has total kappa + s + (n-1) eta
            fitted = min(s, (n_max - kappa - s) // (n - 1)) + 1
            out.append(SectorSlot(SectorLabel(n, kappa, s), fitted))
    out.sort(key=lambda sl: (sl.label.kappa + sl.label.s, sl.label.s, sl.label.kappa))
    return out


def complete_sectors(n: int, n_max: int) -> list[SectorLabel]:
    return [sl.label for sl in decompose_sectors(n, n_max) if not sl.partial]


# --- Hamiltonians ------------------------------------------------------------

def build_hhg_linear(params: ModelParams, sector: SectorLabel) -> OperatorMatrix:
    """``a Y0 + b Y+ + b* Y- + c R1`` from the algebraic sector representation."""
    _check_n(params, sector)
    rep = build_supd2_rep(sector)
    b = params.b
    return (rep.Y0 * params.a + rep.Yplus * b + rep.Yminus * b.conjugate()
            + fock.identity(rep.basis) * (params.c * float(sector.l1)))


def hhg_fock(params: ModelParams, n_max: int) -> OperatorMatrix:
    """``w1 N1 + w0 N0 + g (a1^+)^n a0 + h.c.`` on the full two-mode basis (modes: pump, signal)."""
    basis = fock.build_basis(2, n_max)
    yp = fock.monomial(basis, create={1: params.n}, annihilate={0: 1})
    free = diagonal(basis, params.omega0 * basis.states[:, 0] + params.omega1 * basis.states[:, 1])
    return free + yp * params.b + yp.dag() * params.b.conjugate()


def build_hhg_fock(params: ModelParams, sector: SectorLabel, n_max: int | None = None) -> OperatorMatrix:
    _check_n(params, sector)
    n_max = sector.kappa + sector.n * sector.s if n_max is None else n_max
    basis, ladder, n0, n1 = two_mode_ladder(sector.n, n_max)
    idx = sector_indices(sector, basis)
    sb = sector_basis(sector)
    free = params.omega0 * n0[idx] + params.omega1 * n1[idx]
    yp = ladder.data[np.ix_(idx, idx)]
    mat = np.diag(free).astype(complex) + params.b * yp + np.conj(params.b) * yp.conj().T
    return OperatorMatrix(sb, mat)


def build_hhg(params: ModelParams, sector: SectorLabel, form: str = "linear") -> OperatorMatrix:
    if form == "linear":
        return build_hhg_linear(params, sector)
    if form == "fock":
        return build_hhg_fock(params, sector)
    if form == "quasispin":
        return build_hqs(params, sector)
    raise ValueError(f"unknown form {form!r}")


def build_hqs(params: ModelParams, sector: SectorLabel) -> OperatorMatrix:
    """Quasi-spin form ``a V0 + b V+ phi^(-1/2) + b* phi^(-1/2) V- + c R1 + a (R0 + J)``."""
    _check_n(params, sector)
    hp = hp_map(build_supd2_rep(sector))
    inv = hp.phi_matrix(-0.5)
    b = params.b
    shift = params.c * float(sector.l1) + params.a * float(sector.l0 + sector.j)
    return (hp.V0 * params.a + (hp.Vplus @ inv) * b + (inv @ hp.Vminus) * b.conjugate()
            + fock.identity(hp.basis) * shift)


def _check_n(params: ModelParams, sector: SectorLabel):
    if params.n != sector.n:
        raise ValueError(f"model order n={params.n} differs from sector n={sector.n}")


def build_hn_multiboson(params: ModelParams, kappa: int, n_max: int) -> OperatorMatrix:
    """One-mode ``w1 N + g (a^+)^n + g* a^n`` on the class ``N = kappa mod n``, cut at ``n_max``."""
    rep = build_supd11_rep(params.n, kappa, n_max)
    N = rep.basis.photon_numbers()
    b = params.b
    return diagonal(rep.basis, params.omega1 * N) + rep.Yplus * b + rep.Yminus * b.conjugate()


def build_hmp_general(frequencies: Sequence[float], couplings: Mapping[tuple[int, ...], complex],
                      m: int, n: int, n_max: int, max_dim: int = fock.DEFAULT_MAX_DIM) -> OperatorMatrix:
    """General multiphoton Hamiltonian on ``m`` signal modes plus the pump.

    ``frequencies`` is ``(w0, w1, ..., wm)``; mode 0 of the basis is the pump.
    ``couplings`` maps non-decreasing index tuples ``(i1, ..., in)`` with
    ``1 <= i <= m`` to ``g_{i1...in}``.
    """
    if len(frequencies) != m + 1:
        raise ValueError(f"need {m + 1} frequencies (pump first), got {len(frequencies)}")
    basis = fock.build_basis(m + 1, n_max, max_dim)
    H = diagonal(basis, basis.states @ np.asarray(frequencies, dtype=float))
    for idx, g in couplings.items():
        idx = tuple(idx)
        if len(idx) != n or list(idx) != sorted(idx) or idx[0] < 1 or idx[-1] > m:
            raise ValueError(f"bad coupling index {idx} for m={m}, n={n}")
        if g == 0:
            continue
        counts: dict[int, int] = {}
        for i in idx:
            counts[i] = counts.get(i, 0) + 1
        y = fock.monomial(basis, create=counts, annihilate={0: 1})
        H = H + y * g + y.dag() * np.conj(g)
    return H


# --- spectra -----------------------------------------------------------------

@dataclass(frozen=True)
class SectorSpectrum:
    sector: SectorLabel | None
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    basis: object

    def residuals(self, H: OperatorMatrix) -> np.ndarray:
        r = H.data @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return np.linalg.norm(r, axis=0)

    def to_json(self) -> dict:
        return {"sector": None if self.sector is None else self.sector.to_json(),
                "eigenvalues": [float(e) for e in self.eigenvalues]}


def diagonalize(H: OperatorMatrix, sector: SectorLabel | None = None, tol: float = 1e-10) -> SectorSpectrum:
    """Dense Hermitian eigendecomposition with ascending eigenvalues."""
    if not fock.is_hermitian(H, tol):
        raise ValueError("Hamiltonian is not Hermitian within tolerance")
    if sector is None and isinstance(H.basis, SectorBasis):
        sector = H.basis.label
    w, v = np.linalg.eigh(H.data)
    w.flags.writeable = False
    v.flags.writeable = False
    return SectorSpectrum(sector, w, v, H.basis)


def spectra_csv(spectra: Sequence[SectorSpectrum]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["kappa", "s", "level_index", "energy"])
    for sp in spectra:
        for k, e in enumerate(sp.eigenvalues):
            wr.writerow([sp.sector.kappa, sp.sector.s, k, f"{e:.17g}"])
    return buf.getvalue()


# --- evolution -----------------------------------------------------------------

@dataclass(frozen=True)
class Evolution:
    t: np.ndarray
    states: np.ndarray
    expectations: dict[str, np.ndarray]
    norms: np.ndarray
    populations: np.ndarray | None = None
    eigenvalues: np.ndarray | None = None
    hermitian: dict[str, bool] | None = None

    def is_real(self, name: str) -> bool:
        return True if self.hermitian is None else self.hermitian.get(name, True)

    def to_json(self, sector: SectorLabel | None = None) -> dict:
        """Hermitian observables as real lists, the others as ``[re, im]`` pairs."""
        ex = {"t": [float(x) for x in self.t]}
        for k, v in self.expectations.items():
            if self.is_real(k):
                ex[k] = [float(x) for x in np.real(v)]
            else:
                ex[k] = [[float(z.real), float(z.imag)] for z in v]
        ev = [] if self.eigenvalues is None else [float(x) for x in self.eigenvalues]
        return {"sector": None if sector is None else sector.to_json(), "eigenvalues": ev, "expectations": ex}


def default_observables(basis) -> dict[str, OperatorMatrix]:
    """``Y0, Y+, Y-, N1, N0`` for two-mode sector bases or two-mode Fock bases."""
    if isinstance(basis, SectorBasis) and basis.kind == "two-mode":
        rep = build_supd2_rep(basis.label)
        occ = np.array(basis.label.occupations())
        return {"Y0": rep.Y0, "Y+": rep.Yplus, "Y-": rep.Yminus,
                "N1": diagonal(basis, occ[:, 1]), "N0": diagonal(basis, occ[:, 0])}
    if isinstance(basis, fock.FockBasis) and basis.mode_count == 2:
        return {"N0": fock.number_op(basis, 0), "N1": fock.number_op(basis, 1)}
    return {}


def hhg_partition(basis: fock.FockBasis, n: int) -> dict[tuple[int, int], np.ndarray]:
    """Indices of each (kappa, s) sector in a two-mode Fock basis (modes: pump, signal)."""
    n0, n1 = basis.states[:, 0], basis.states[:, 1]
    kappa, s = n1 % n, n0 + n1 // n
    out: dict[tuple[int, int], np.ndarray] = {}
    for key in sorted(set(zip(kappa.tolist(), s.tolist()))):
        out[key] = np.flatnonzero((kappa == key[0]) & (s == key[1]))
    return out


def charge_partition(basis: fock.FockBasis, charges: Sequence[np.ndarray]) -> dict[tuple, np.ndarray]:
    """Group basis rows by the joint values of diagonal conserved charges."""
    keys = np.stack([np.round(np.asarray(c, dtype=float), 9) for c in charges], axis=1)
    out = {}
    for key in sorted(set(map(tuple, keys.tolist()))):
        out[key] = np.flatnonzero(np.all(keys == np.array(key), axis=1))
    return out


def evolve(H: OperatorMatrix, psi0, t_grid, observables: Mapping[str, OperatorMatrix] | None = None,
           partition: Mapping | None = None, tol: float = 1e-10) -> Evolution:
    """``psi(t) = sum_k exp(-i E_k t) <v_k|psi0> v_k`` on every grid time."""
    t = np.asarray(t_grid, dtype=float)
    if t.size == 0:
        raise ValueError("empty time grid")
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-12:
        raise ValueError("initial state must be normalized")
    sp = diagonalize(H, tol=tol)
    coef = sp.eigenvectors.conj().T @ psi0
    phases = np.exp(-1j * np.outer(t, sp.eigenvalues))
    states = (phases * coef) @ sp.eigenvectors.T
    obs = default_observables(H.basis) if observables is None else dict(observables)
    obs.setdefault("H", H)
    ex, herm = {}, {}
    for name, op in obs.items():
        ex[name] = np.einsum("ti,ij,tj->t", states.conj(), op.data, states)
        herm[name] = fock.is_hermitian(op, 0.0)
    norms = np.linalg.norm(states, axis=1)
    pops = None
    if partition is not None:
        pops = np.stack([np.sum(np.abs(states[:, idx]) ** 2, axis=1) for idx in partition.values()], axis=1)
    return Evolution(t, states, ex, norms, pops, sp.eigenvalues, herm)


def sector_label_from_fraction(n: int, l0: Fraction, l1: Fraction) -> SectorLabel:
    """Recover (kappa, s) from the eigenvalues of R0 and R1."""
    s = l1 - l0
    kappa = n * l0 + l1
    if s.denominator != 1 or kappa.denominator != 1:
        raise ValueError("labels do not correspond to a physical sector")
    return SectorLabel(n, int(kappa), int(s))
