"""Polarization quasispin of two-polarization multimode light.

Mode ``i`` (0-based) carries polarizations ``+`` and ``-`` stored as Fock
modes ``2i`` and ``2i + 1``.  Quasispin generators::

    P0(i) = (N_{+i} - N_{-i})/2,   P+(i) = a+_{+i} a_{-i},   P-(i) = P+(i)^+
    P1 = (P+ + P-)/2,   P2 = (P+ - P-)/(2i)

Biphoton clusters ``X+_ij = a+_{+i} a+_{-j} - a+_{-i} a+_{+j}`` commute with
all ``P_alpha``; ``Y+_ij = (a+_{+i} a+_{-j} + a+_{-i} a+_{+j})/2`` commute
with ``P0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from . import fock
from .fock import FockBasis, OperatorMatrix, commutator, diagonal

VERDICTS = ("polarized", "weak-UL", "P0-scalar", "P-scalar", "strong-UL-invariance")


@dataclass(frozen=True)
class PolarizedBasis:
    m: int
    n_max: int
    fock: FockBasis = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.fock.dim

    @staticmethod
    def mode(i: int, pol: str) -> int:
        return 2 * i + (0 if pol == "+" else 1)

    def occupations(self, plus: Sequence[int], minus: Sequence[int]) -> tuple[int, ...]:
        occ = []
        for a, b in zip(plus, minus):
            occ += [a, b]
        return tuple(occ)

    def vector(self, plus: Sequence[int], minus: Sequence[int]) -> np.ndarray:
        return self.fock.basis_vector(self.occupations(plus, minus))

    def photon_numbers(self) -> np.ndarray:
        return self.fock.totals


def build_polarized_basis(m: int, n_max: int, max_dim: int = fock.DEFAULT_MAX_DIM) -> PolarizedBasis:
    if m < 1:
        raise ValueError("need at least one spatiotemporal mode")
    return PolarizedBasis(m, n_max, fock.build_basis(2 * m, n_max, max_dim))


def polarized_basis_of(basis: FockBasis) -> PolarizedBasis:
    if basis.mode_count % 2:
        raise ValueError("a polarized basis needs an even mode count")
    return PolarizedBasis(basis.mode_count // 2, basis.n_max, basis)


@dataclass(frozen=True)
class QuasispinOps:
    P0: OperatorMatrix
    Pplus: OperatorMatrix
    Pminus: OperatorMatrix
    P1: OperatorMatrix
    P2: OperatorMatrix
    Psq: OperatorMatrix
    N: OperatorMatrix
    P0_mode: tuple[OperatorMatrix, ...]
    Pplus_mode: tuple[OperatorMatrix, ...]
    Pminus_mode: tuple[OperatorMatrix, ...]

    def component(self, alpha: int) -> OperatorMatrix:
        return (self.P0, self.P1, self.P2)[alpha]


def build_quasispin(basis: PolarizedBasis) -> QuasispinOps:
    fb = basis.fock
    p0m, ppm, pmm = [], [], []
    for i in range(basis.m):
        a, b = basis.mode(i, "+"), basis.mode(i, "-")
        p0m.append(diagonal(fb, (fb.states[:, a] - fb.states[:, b]) / 2))
        pp = fock.monomial(fb, create={a: 1}, annihilate={b: 1})
        ppm.append(pp)
        pmm.append(pp.dag())
    P0 = fock.add(*p0m)
    Pp = fock.add(*ppm)
    Pm = Pp.dag()
    P1 = (Pp + Pm) * 0.5
    P2 = (Pp - Pm) * (-0.5j)
    Psq = P0 @ P0 + (Pp @ Pm + Pm @ Pp) * 0.5
    return QuasispinOps(P0, Pp, Pm, P1, P2, Psq, fock.total_number_op(fb),
                        tuple(p0m), tuple(ppm), tuple(pmm))


@dataclass(frozen=True)
class ClusterOps:
    """``Xplus[(i, j)]``, ``Yplus[(i, j)]`` for ``i <= j`` and the u(m) generators ``E[(i, j)]``."""

    Xplus: dict
    Yplus: dict
    E: dict

    def Xminus(self, i, j) -> OperatorMatrix:
        return self.Xplus[(i, j)].dag()

    def Yminus(self, i, j) -> OperatorMatrix:
        return self.Yplus[(i, j)].dag()


def _pair(fb: FockBasis, k: int, l: int) -> OperatorMatrix:
    if k == l:
        return fock.monomial(fb, create={k: 2})
    return fock.monomial(fb, create={k: 1, l: 1})


def build_clusters(basis: PolarizedBasis) -> ClusterOps:
    """Evaluates the cluster formulas literally as products of creation matrices.

    ``X+_ii`` comes out as the zero matrix because the two bosonic products
    coincide; it is kept in the table rather than dropped.
    """
    fb = basis.fock
    cre = [fock.creation_op(fb, k) for k in range(fb.mode_count)]
    X, Y, E = {}, {}, {}
    for i in range(basis.m):
        for j in range(basis.m):
            pi, mi = basis.mode(i, "+"), basis.mode(i, "-")
            pj, mj = basis.mode(j, "+"), basis.mode(j, "-")
            if i <= j:
                t1 = cre[pi] @ cre[mj]
                t2 = cre[mi] @ cre[pj]
                X[(i, j)] = t1 - t2
                Y[(i, j)] = (t1 + t2) * 0.5
            E[(i, j)] = (fock.monomial(fb, create={pi: 1}, annihilate={pj: 1})
                         + fock.monomial(fb, create={mi: 1}, annihilate={mj: 1}))
    return ClusterOps(X, Y, E)


# --- expectations ----------------------------------------------------------------

def as_density(state) -> np.ndarray:
    arr = np.asarray(state, dtype=complex)
    if arr.ndim == 1:
        return np.outer(arr, arr.conj())
    return arr


def _check_rho(rho: np.ndarray, tol: float):
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise ValueError(f"density matrix trace {tr!r} differs from 1")
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > tol:
        raise ValueError("density matrix is not Hermitian")


def _ev(op: OperatorMatrix, rho: np.ndarray) -> complex:
    return complex(np.einsum("ij,ji->", op.data, rho))


def polarization_degree(state, qs: QuasispinOps, tol: float = 1e-10) -> float:
    """``|<P>| / (<N>/2)``, zero for the vacuum."""
    rho = as_density(state)
    _check_rho(rho, tol)
    vec = np.array([_ev(qs.component(a), rho).real for a in range(3)])
    n = _ev(qs.N, rho).real
    if n <= tol:
        return 0.0
    return float(np.linalg.norm(vec) / (n / 2))


def moment_profile(state, qs: QuasispinOps, S: int) -> dict[tuple[int, int], float]:
    """``<P_alpha^s>`` for alpha in (0, 1, 2) and s = 1..S."""
    if S < 1:
        raise ValueError("S must be >= 1")
    rho = as_density(state)
    table = {}
    for a in range(3):
        P = qs.component(a).data
        cur = rho
        for s in range(1, S + 1):
            cur = P @ cur
            val = np.trace(cur)
            if abs(val.imag) > 1e-12 * max(1.0, abs(val.real)):
                raise ArithmeticError(f"<P{a}^{s}> has imaginary part {val.imag}")
            table[(a, s)] = float(val.real)
    return table


def haar_su2(rng: np.random.Generator) -> tuple[float, np.ndarray]:
    """Rotation angle and axis of a Haar-random SU(2) element (uniform quaternion)."""
    qv = rng.standard_normal(4)
    qv /= np.linalg.norm(qv)
    angle = 2 * np.arccos(np.clip(qv[0], -1.0, 1.0))
    axis = qv[1:]
    na = np.linalg.norm(axis)
    axis = axis / na if na > 0 else np.array([0.0, 0.0, 1.0])
    return float(angle), axis


def su2_element(qs: QuasispinOps, angle: float, axis) -> np.ndarray:
    """Dense ``exp(-i angle n.P)`` by matrix exponential (reference implementation)."""
    gen = axis[2] * qs.P0.data + axis[0] * qs.P1.data + axis[1] * qs.P2.data
    return expm(-1j * angle * gen)


class ShellRotations:
    """SU(2)_p elements assembled shell by shell.

    The quasispin conserves photon number, so every group element is block
    diagonal over the photon-number shells.  Each shell keeps the
    eigendecomposition of its ``P2`` block and

        exp(-i t n.P) = R exp(-i t P0) R^+,   R = exp(-i phi P0) exp(-i theta P2)

    with ``n = (sin theta cos phi, sin theta sin phi, cos theta)``.  Only the
    shells listed in ``shells`` are built (default: all).
    """

    def __init__(self, qs: QuasispinOps, totals: np.ndarray, shells: Sequence[int] | None = None):
        totals = np.asarray(totals)
        if shells is None:
            shells = np.unique(totals)
        self.index = np.concatenate([np.flatnonzero(totals == N) for N in shells]) if len(shells) else np.zeros(0, int)
        self._blocks = []
        p0 = np.real(np.diag(qs.P0.data))
        for N in shells:
            idx = np.flatnonzero(totals == N)
            lam, V = np.linalg.eigh(qs.P2.data[np.ix_(idx, idx)])
            self._blocks.append((idx.size, p0[idx], lam, V))

    @classmethod
    def for_support(cls, qs: QuasispinOps, totals: np.ndarray, rho: np.ndarray, cut: float = 0.0):
        """Rotations restricted to the shells on which ``rho`` has weight."""
        weight = np.max(np.abs(rho), axis=1)
        shells = np.unique(np.asarray(totals)[weight > cut])
        return cls(qs, totals, shells)

    def restrict(self, mat: np.ndarray) -> np.ndarray:
        return mat[np.ix_(self.index, self.index)]

    def _assemble(self, block_fn) -> np.ndarray:
        dim = self.index.size
        out = np.zeros((dim, dim), dtype=complex)
        pos = 0
        for blk in self._blocks:
            k = blk[0]
            out[pos:pos + k, pos:pos + k] = block_fn(*blk[1:])
            pos += k
        return out

    def element(self, angle: float, axis) -> np.ndarray:
        """``exp(-i angle n.P)`` on the retained shells."""
        nx, ny, nz = (float(x) for x in axis)
        theta = np.arccos(np.clip(nz, -1.0, 1.0))
        phi = np.arctan2(ny, nx)

        def block(d, lam, V):
            R = np.exp(-1j * phi * d)[:, None] * ((V * np.exp(-1j * theta * lam)) @ V.conj().T)
            return (R * np.exp(-1j * angle * d)) @ R.conj().T

        return self._assemble(block)

    def p2_flip(self) -> np.ndarray:
        """``exp(i pi P2)`` on the retained shells."""
        return self._assemble(lambda d, lam, V: (V * np.exp(1j * np.pi * lam)) @ V.conj().T)

    def p0_phase(self, b0: float) -> np.ndarray:
        """Diagonal of ``exp(i b0 P0)`` on the retained shells."""
        return np.concatenate([np.exp(1j * b0 * d) for _, d, _, _ in self._blocks]) if self._blocks else np.zeros(0)


def invariance_residuals(rho: np.ndarray, qs: QuasispinOps, sample_count: int, seed: int,
                         group: str = "P", rotations: ShellRotations | None = None) -> list[float]:
    """``max|S rho S^+ - rho|`` over sampled group elements.

    ``group = "P"`` draws Haar-random SU(2)_p elements; ``"P0"`` uses
    ``exp(i b0 P0)`` on a uniform grid of ``b0`` plus ``exp(i pi P2)``.
    ``rotations`` must cover every shell on which ``rho`` has weight.
    """
    rho = np.asarray(rho)
    if rotations is None:
        totals = np.real(np.diag(qs.N.data)).round().astype(int)
        rotations = ShellRotations.for_support(qs, totals, rho)
    sub = rotations.restrict(rho)
    out = []
    if group == "P":
        rng = np.random.default_rng(seed)
        for _ in range(sample_count):
            S = rotations.element(*haar_su2(rng))
            out.append(float(np.max(np.abs(S @ sub @ S.conj().T - sub), initial=0.0)))
    elif group == "P0":
        for b0 in np.linspace(0, 4 * np.pi, sample_count, endpoint=False):
            ph = rotations.p0_phase(b0)
            out.append(float(np.max(np.abs(ph[:, None] * sub * ph.conj()[None, :] - sub), initial=0.0)))
        S = rotations.p2_flip()
        out.append(float(np.max(np.abs(S @ sub @ S.conj().T - sub), initial=0.0)))
    else:
        raise ValueError(f"unknown group {group!r}")
    return out


@dataclass(frozen=True)
class ULReport:
    polarization_degree: float
    moments: dict
    verdict: str
    invariance_residuals: dict
    first_moment_residuals: list
    tol: float
    seed: int
    normalization: str = "<N>/2"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "polarization_degree": self.polarization_degree,
            "normalization": self.normalization,
            "moments": {f"P{a}^{s}": v for (a, s), v in sorted(self.moments.items())},
            "invariance_residuals": {k: list(v) for k, v in sorted(self.invariance_residuals.items())},
            "first_moment_residuals": list(self.first_moment_residuals),
            "tol": self.tol,
            "seed": self.seed,
        }


def classify_ul(state, qs: QuasispinOps, S: int = 6, tol: float | None = None, sample_count: int = 32,
                seed: int = 0) -> ULReport:
    """Sort a state into the polarization taxonomy.

    Rules, applied in order:

    * ``polarized`` when the polarization degree exceeds ``tol``;
    * ``P-scalar`` when every ``<P_alpha^s>``, ``s <= S``, vanishes;
    * ``P0-scalar`` when every ``<P0^s>`` vanishes;
    * ``strong-UL-invariance`` when ``S rho S^+ = rho`` for all sampled
      SU(2)_p elements although some higher moment is nonzero;
    * ``weak-UL`` otherwise: only the first moments vanish.
    """
    pure = np.asarray(state).ndim == 1
    if tol is None:
        tol = 1e-8 if pure else 1e-6
    rho = as_density(state)
    _check_rho(rho, max(tol, 1e-10))
    deg = polarization_degree(rho, qs, tol=max(tol, 1e-10))
    mom = moment_profile(rho, qs, S)
    totals = np.real(np.diag(qs.N.data)).round().astype(int)
    rot = ShellRotations.for_support(qs, totals, rho)
    inv = {
        "P": invariance_residuals(rho, qs, sample_count, seed, "P", rot),
        "P0": invariance_residuals(rho, qs, sample_count, seed, "P0", rot),
    }
    # first moments under every sampled rotation (weak-UL property)
    rng = np.random.default_rng(seed)
    sub = rot.restrict(rho)
    comps = [rot.restrict(qs.component(a).data) for a in range(3)]
    firsts = []
    for _ in range(sample_count):
        Sg = rot.element(*haar_su2(rng))
        r2 = Sg @ sub @ Sg.conj().T
        firsts.append(float(max(abs(np.einsum("ij,ji->", c, r2)) for c in comps)))
    if deg > tol:
        verdict = "polarized"
    elif all(abs(v) <= tol for v in mom.values()):
        verdict = "P-scalar"
    elif all(abs(mom[(0, s)]) <= tol for s in range(1, S + 1)):
        verdict = "P0-scalar"
    elif max(inv["P"], default=0.0) <= tol:
        verdict = "strong-UL-invariance"
    else:
        verdict = "weak-UL"
    return ULReport(deg, mom, verdict, inv, firsts, tol, seed)


# --- states -----------------------------------------------------------------------

def tmsv_state(beta: complex, basis: PolarizedBasis, mode: int = 0, leakage_tol: float = 1e-10) -> np.ndarray:
    """``exp(beta Y+_ii - beta* Y_ii)|0>`` on the (+i, -i) pair, truncated at ``n_max``.

    Closed form ``sum_k exp(i k phi) tanh(r)^k / cosh(r) |k, k>`` with
    ``beta = r exp(i phi)``.  Raises if the discarded probability exceeds
    ``leakage_tol``.
    """
    r, phi = abs(beta), np.angle(beta)
    kmax = basis.n_max // 2
    t = np.tanh(r)
    leak = t ** (2 * (kmax + 1))
    if leak > leakage_tol:
        raise ValueError(f"truncation leakage {leak:.3e} exceeds {leakage_tol:.1e}; raise n_max")
    psi = np.zeros(basis.dim, dtype=complex)
    zero = [0] * basis.m
    for k in range(kmax + 1):
        plus, minus = list(zero), list(zero)
        plus[mode] = minus[mode] = k
        psi[basis.fock.index(basis.occupations(plus, minus))] = np.exp(1j * k * phi) * t**k / np.cosh(r)
    return psi / np.linalg.norm(psi)


def singlet_power(clusters: ClusterOps, basis: PolarizedBasis, k: int, i: int = 0, j: int = 1) -> np.ndarray:
    """Normalized ``(X+_ij)^k |0>``."""
    vac = basis.fock.basis_vector([0] * basis.fock.mode_count)
    X = clusters.Xplus[(i, j)].data
    psi = vac
    for _ in range(k):
        psi = X @ psi
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise ValueError("state vanished; n_max too small for this power")
    return psi / nrm


# --- duality -----------------------------------------------------------------------

def character_multiplicities(m: int, N: int) -> dict:
    """SU(2)_p spin multiplicities in the N-photon space of 2m modes, by counting.

    ``c(mu)`` counts occupation vectors with helicity ``mu``; the number of
    spin-p multiplets is ``c(p) - c(p + 1)``.
    """
    def count(npl):
        nmi = N - npl
        return comb(npl + m - 1, m - 1) * comb(nmi + m - 1, m - 1)

    c = {}
    for npl in range(N + 1):
        mu2 = 2 * npl - N  # twice the helicity
        c[mu2] = c.get(mu2, 0) + count(npl)
    out = {}
    for p2 in range(N % 2, N + 1, 2):
        mult = c.get(p2, 0) - c.get(p2 + 2, 0)
        if mult:
            out[p2 / 2] = mult
    return out


def numeric_multiplicities(qs: QuasispinOps, basis: PolarizedBasis, N: int) -> dict:
    """Spin multiplicities from the eigenvalues of the quasispin square on the N-photon block."""
    idx = np.flatnonzero(basis.photon_numbers() == N)
    w = np.linalg.eigvalsh(qs.Psq.data[np.ix_(idx, idx)])
    p = np.round((-1 + np.sqrt(1 + 4 * np.clip(w, 0, None))) / 2 * 2) / 2
    out = {}
    for val in np.unique(p):
        cnt = int(np.sum(p == val))
        out[float(val)] = cnt // int(2 * val + 1)
    return out


@dataclass
class DualityReport:
    commutant_residual: float
    multiplicities: dict
    oracle: dict
    rank_checks: dict = field(default_factory=dict)

    @property
    def tables_match(self) -> bool:
        return self.multiplicities == self.oracle

    @property
    def passed(self) -> bool:
        ranks_ok = all(v["eigenspace_dim"] == v["span_rank"] and v["outside"] <= 1e-10
                       for v in self.rank_checks.values())
        return self.tables_match and ranks_ok


def duality_check(basis: PolarizedBasis, qs: QuasispinOps, clusters: ClusterOps, N_cut: int) -> DualityReport:
    if basis.m > 3:
        raise ValueError("duality checks are limited to m <= 3")
    if N_cut > basis.n_max - 2:
        raise ValueError("N_cut must leave two spare shells")
    interior = basis.fock.interior(2)
    res = 0.0
    for P in (qs.P0, qs.Pplus, qs.Pminus):
        for X in clusters.Xplus.values():
            res = max(res, commutator(P, X).max_abs(interior))
        for E in clusters.E.values():
            res = max(res, commutator(P, E).max_abs(interior))
    mult = {N: numeric_multiplicities(qs, basis, N) for N in range(N_cut + 1)}
    oracle = {N: character_multiplicities(basis.m, N) for N in range(N_cut + 1)}
    ranks = _highest_weight_rank(basis, qs, clusters, N_cut) if basis.m == 2 else {}
    return DualityReport(res, mult, oracle, ranks)


def _highest_weight_rank(basis: PolarizedBasis, qs: QuasispinOps, clusters: ClusterOps, N_cut: int) -> dict:
    """Compare the (p, mu = p) joint eigenspace with the span of X+ and E words on pseudovacua.

    For m = 2 the pseudovacuum of spin p is ``(a+_{+1})^{2p}|0>``; lowering the
    u(2) index with ``E_21`` and multiplying by powers of ``X+_12`` generates
    the candidate span.
    """
    fb = basis.fock
    vac = fb.basis_vector([0] * fb.mode_count)
    ap = fock.creation_op(fb, basis.mode(0, "+")).data
    X = clusters.Xplus[(0, 1)].data
    E21 = clusters.E[(1, 0)].data
    Psq, P0 = qs.Psq.data, np.real(np.diag(qs.P0.data))
    Ntot = basis.photon_numbers()
    out = {}
    for N in range(N_cut + 1):
        for p2 in range(N % 2, N + 1, 2):
            p = p2 / 2
            k = (N - p2) // 2  # number of singlet pairs
            pv = vac
            for _ in range(p2):
                pv = ap @ pv
            vecs = []
            w = pv
            for _ in range(p2 + 1):
                v = w
                for _ in range(k):
                    v = X @ v
                if np.linalg.norm(v) > 1e-12:
                    vecs.append(v / np.linalg.norm(v))
                w = E21 @ w
            idx = np.flatnonzero((Ntot == N) & np.isclose(P0, p))
            blk = Psq[np.ix_(idx, idx)]
            wv = np.linalg.eigvalsh(blk)
            eig_dim = int(np.sum(np.isclose(wv, p * (p + 1), atol=1e-9)))
            if vecs:
                M = np.stack(vecs, axis=1)
                rank = int(np.linalg.matrix_rank(M, tol=1e-9))
                outside = float(np.max(np.abs(Psq @ M - p * (p + 1) * M)))
                outside = max(outside, float(np.max(np.abs(qs.P0.data @ M - p * M))))
            else:
                rank, outside = 0, 0.0
            out[(N, p)] = {"eigenspace_dim": eig_dim, "span_rank": rank, "outside": outside}
    return out


# --- quadratic model --------------------------------------------------------------

def quadratic_hamiltonian(freqs: Sequence[float], g: np.ndarray, basis: PolarizedBasis) -> OperatorMatrix:
    """``sum_i w_i N_i + sum_{i,j,alpha,beta} [g^{ab}_{ij} a+_{ai} a+_{bj} + h.c.]``.

    ``g`` has shape ``(2, 2, m, m)`` with polarization index 0 for ``+`` and 1 for ``-``.
    """
    g = np.asarray(g, dtype=complex)
    m = basis.m
    if g.shape != (2, 2, m, m):
        raise ValueError(f"couplings must have shape (2, 2, {m}, {m})")
    if len(freqs) != m:
        raise ValueError(f"need {m} frequencies")
    fb = basis.fock
    w = np.repeat(np.asarray(freqs, dtype=float), 2)
    H = diagonal(fb, fb.states @ w)
    pols = "+-"
    for a in range(2):
        for b in range(2):
            for i in range(m):
                for j in range(m):
                    c = g[a, b, i, j]
                    if c == 0:
                        continue
                    op = _pair(fb, basis.mode(i, pols[a]), basis.mode(j, pols[b]))
                    H = H + op * c + op.dag() * np.conj(c)
    return H


def cluster_preset(gtilde: np.ndarray, kind: str) -> np.ndarray:
    """Couplings ``g^{+-}_ij = -+ g^{-+}_ij = gtilde_ij``, all others zero.

    ``kind="X"`` takes the upper sign (P-scalar X clusters), ``kind="Y"`` the
    lower one (P0-scalar Y clusters).  The Y preset equals ``2 gtilde_ij Y+_ij + h.c.``
    summed over i, j.
    """
    gt = np.atleast_2d(np.asarray(gtilde, dtype=complex))
    m = gt.shape[0]
    g = np.zeros((2, 2, m, m), dtype=complex)
    g[0, 1] = gt
    g[1, 0] = -gt if kind == "X" else gt
    if kind not in ("X", "Y"):
        raise ValueError("kind must be 'X' or 'Y'")
    return g


def shell_leakage(basis: PolarizedBasis | FockBasis, psi, shells: int = 2) -> float:
    """Probability carried by the top ``shells`` photon-number shells."""
    fb = basis.fock if isinstance(basis, PolarizedBasis) else basis
    top = fb.totals > fb.n_max - shells
    return float(np.sum(np.abs(np.asarray(psi)[top]) ** 2))
