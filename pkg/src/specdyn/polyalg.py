"""Polynomial deformations of su(2) and su(1,1) realized as matrices.

Two-mode harmonics model (pump mode 0, signal mode 1)::

    Y0 = (N1 - N0)/(1 + n),  Y+ = (a1^+)^n a0,  R1 = (N1 + n N0)/(1 + n)
    [Y0, Y+-] = +-Y+-,  [Y-, Y+] = Psi(Y0 + 1; R1) - Psi(Y0; R1)
    Psi(y; r1) = (r1 - y + 1) * (n y + r1)^(n)        (falling factorial)

A sector (kappa, s) is spanned by ``|N1 = kappa + n*eta, N0 = s - eta>`` for
``eta = 0..s``.  The one-mode model uses ``Y+ = (a^+)^n``, ``Y0 = N/n`` and
``Psi(Y0) = (n Y0)^(n)`` on the residue class ``N = kappa mod n``.

Structure values are evaluated in exact rational arithmetic; floats appear
only when matrices are filled.  Each representation keeps the exact squares
of its ladder elements, so the residual checks can re-evaluate the relations
in extended decimal precision.  Stored float64 matrices carry an error of
about one ulp of ``sqrt(Psi)``, which for ``Psi ~ 1e6`` already moves
``Y- Y+`` by ~1e-10.
"""

from __future__ import annotations

import decimal
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import sqrt

import numpy as np

from . import fock
from .fock import OperatorMatrix, commutator, diagonal

Rational = Fraction | int

CHECK_DIGITS = 40


def falling_factorial(x: Rational, k: int) -> Fraction:
    """``x (x-1) ... (x-k+1)``; 1 for k = 0."""
    out = Fraction(1)
    x = Fraction(x)
    for t in range(k):
        out *= x - t
    return out


def psi_eval(n: int, y: Rational, r1: Rational) -> Fraction:
    """Two-mode structure polynomial ``Psi(y; r1) = (r1 - y + 1)(n y + r1)^(n)``."""
    if n < 2:
        raise ValueError("cluster order n must be >= 2")
    y, r1 = Fraction(y), Fraction(r1)
    return (r1 - y + 1) * falling_factorial(n * y + r1, n)


def phi_eval(n: int, y: Rational, r1: Rational) -> Fraction:
    return psi_eval(n, Fraction(y) + 1, r1) - psi_eval(n, y, r1)


def psi_one_mode(n: int, y: Rational) -> Fraction:
    """One-mode structure polynomial ``Psi(Y0) = (n Y0)^(n) = E11^(n)``."""
    return falling_factorial(n * Fraction(y), n)


@dataclass(frozen=True)
class SectorLabel:
    """Invariant labels of one two-mode sector L([l_i])."""

    n: int
    kappa: int
    s: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if not 0 <= self.kappa < self.n:
            raise ValueError(f"kappa must lie in 0..{self.n - 1}, got {self.kappa}")
        if self.s < 0:
            raise ValueError(f"s must be >= 0, got {self.s}")

    @property
    def l0(self) -> Fraction:
        return Fraction(self.kappa - self.s, 1 + self.n)

    @property
    def l1(self) -> Fraction:
        return Fraction(self.kappa + self.n * self.s, 1 + self.n)

    @property
    def j(self) -> Fraction:
        return Fraction(self.s, 2)

    @property
    def dim(self) -> int:
        return self.s + 1

    def occupations(self) -> list[tuple[int, int]]:
        """``(N0, N1)`` of each sector basis vector, eta = 0..s."""
        return [(self.s - eta, self.kappa + self.n * eta) for eta in range(self.s + 1)]

    def to_json(self) -> dict:
        return {"n": self.n, "kappa": self.kappa, "s": self.s,
                "l0": [self.l0.numerator, self.l0.denominator],
                "l1": [self.l1.numerator, self.l1.denominator]}


@dataclass(frozen=True)
class SectorBasis:
    """Basis key for operators living on one sector.

    ``kind`` is ``"two-mode"`` (finite su_pd(2) sector, ``s`` set) or
    ``"one-mode"`` (truncated residue class, ``n_max`` set).
    """

    kind: str
    n: int
    kappa: int
    s: int | None = None
    n_max: int | None = None

    @property
    def dim(self) -> int:
        if self.kind == "two-mode":
            return self.s + 1
        return (self.n_max - self.kappa) // self.n + 1

    @property
    def label(self) -> SectorLabel | None:
        return SectorLabel(self.n, self.kappa, self.s) if self.kind == "two-mode" else None

    def photon_numbers(self) -> np.ndarray:
        """Signal-mode occupation N1 of each basis vector."""
        return self.kappa + self.n * np.arange(self.dim)


def sector_basis(sector: SectorLabel) -> SectorBasis:
    return SectorBasis("two-mode", sector.n, sector.kappa, s=sector.s)


@dataclass(frozen=True)
class AlgebraRep:
    """Matrices (Y0, Y+, Y-) of one su_pd(2) sector or truncated su_pd(1,1) class.

    ``levels`` holds the exact Y0 eigenvalue of each basis vector,
    ``ladder_sq[eta]`` the exact square of ``<eta+1|Y+|eta>`` and
    ``mask_margin`` the number of top photon shells excluded from residual
    checks (0 for finite sectors).
    """

    basis: SectorBasis
    Y0: OperatorMatrix
    Yplus: OperatorMatrix
    Yminus: OperatorMatrix
    levels: tuple[Fraction, ...]
    R1_value: Fraction | None
    ladder_sq: tuple[Fraction, ...] = ()
    mask_margin: int = 0

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def sector(self) -> SectorLabel | None:
        return self.basis.label

    def psi(self, y: Rational) -> Fraction:
        if self.basis.kind == "two-mode":
            return psi_eval(self.n, y, self.R1_value)
        return psi_one_mode(self.n, y)

    def psi_matrix(self, shift: int = 0) -> OperatorMatrix:
        """``Psi(Y0 + shift)`` as a diagonal matrix."""
        return diagonal(self.basis, [float(self.psi(y + shift)) for y in self.levels])

    def phi_matrix(self) -> OperatorMatrix:
        return diagonal(self.basis, [float(self.psi(y + 1) - self.psi(y)) for y in self.levels])

    def interior(self) -> np.ndarray:
        """Rows kept by residual checks (all rows for finite sectors)."""
        if self.mask_margin == 0:
            return np.ones(self.basis.dim, dtype=bool)
        return self.basis.photon_numbers() <= self.basis.n_max - self.mask_margin

    def to_json(self) -> dict:
        out = {"n": self.n, "kappa": self.basis.kappa, "s": self.basis.s}
        if self.sector is not None:
            sj = self.sector.to_json()
            out["l0"], out["l1"] = sj["l0"], sj["l1"]
        else:
            out["n_max"] = self.basis.n_max
            l0 = Fraction(self.basis.kappa, self.n)
            out["l0"], out["l1"] = [l0.numerator, l0.denominator], None
        out["Y0"] = fock.matrix_to_json(self.Y0)
        out["Yplus"] = fock.matrix_to_json(self.Yplus)
        return out


def _bidiagonal(basis: SectorBasis, levels, psi):
    dim = basis.dim
    yp = np.zeros((dim, dim))
    squares = []
    for eta in range(dim - 1):
        val = psi(levels[eta] + 1)
        if val < 0:
            raise ArithmeticError(f"negative structure value {val} at level {eta}")
        yp[eta + 1, eta] = sqrt(val)
        squares.append(val)
    Y0 = diagonal(basis, [float(y) for y in levels])
    Yp = OperatorMatrix(basis, yp)
    return Y0, Yp, Yp.dag(), tuple(squares)


@lru_cache(maxsize=512)
def build_supd2_rep(sector: SectorLabel) -> AlgebraRep:
    """su_pd(2) generators on a sector from the structure polynomial alone.

    ``<eta+1|Y+|eta> = sqrt(Psi(l0 + eta + 1; l1))`` with the positive root,
    ``Y0 = diag(l0 + eta)``.
    """
    basis = sector_basis(sector)
    levels = tuple(sector.l0 + eta for eta in range(sector.dim))
    Y0, Yp, Ym, sq = _bidiagonal(basis, levels, lambda y: psi_eval(sector.n, y, sector.l1))
    return AlgebraRep(basis, Y0, Yp, Ym, levels, sector.l1, sq)


@lru_cache(maxsize=16)
def two_mode_ladder(n: int, n_max: int):
    """Cached ``(basis, (a1^+)^n a0, N0, N1)`` on the two-mode space (modes: pump, signal)."""
    b = fock.build_basis(2, n_max)
    yp = fock.monomial(b, create={1: n}, annihilate={0: 1})
    n0 = b.states[:, 0].astype(float)
    n1 = b.states[:, 1].astype(float)
    return b, yp, n0, n1


def sector_indices(sector: SectorLabel, basis: fock.FockBasis) -> np.ndarray:
    """Positions of the sector vectors (eta = 0..s) in a two-mode Fock basis (modes: pump, signal)."""
    if sector.kappa + sector.n * sector.s > basis.n_max:
        raise ValueError(f"basis n_max={basis.n_max} cannot hold sector {sector}")
    return basis.indices(np.array(sector.occupations(), dtype=np.int64))


def restrict(op: OperatorMatrix, idx: np.ndarray, target_basis) -> OperatorMatrix:
    return OperatorMatrix(target_basis, op.data[np.ix_(idx, idx)])


def build_supd2_rep_fock(sector: SectorLabel, n_max: int | None = None) -> AlgebraRep:
    """Same generators, obtained by restricting ``(a1^+)^n a0`` and ``(N1 - N0)/(1+n)``
    from the two-mode Fock space to the sector.  Independent of the structure polynomial."""
    n_max = sector.kappa + sector.n * sector.s if n_max is None else n_max
    b, yp, n0, n1 = two_mode_ladder(sector.n, n_max)
    idx = sector_indices(sector, b)
    sb = sector_basis(sector)
    Yp = restrict(yp, idx, sb)
    Y0 = diagonal(sb, (n1[idx] - n0[idx]) / (1 + sector.n))
    levels = tuple(sector.l0 + eta for eta in range(sector.dim))
    # squared matrix elements of (a1^+)^n a0 between consecutive sector vectors
    occ = sector.occupations()
    sq = tuple(Fraction(n0) * falling_factorial(n1 + sector.n, sector.n) for n0, n1 in occ[:-1])
    return AlgebraRep(sb, Y0, Yp, Yp.dag(), levels, sector.l1, sq)


@dataclass(frozen=True)
class ResidualReport:
    """Max-norm residuals of a set of relations.

    ``residuals`` decide ``passed``.  ``float64_residuals`` holds the same
    relations evaluated on the stored float64 matrices, for information.
    """

    residuals: dict[str, float]
    tol: float
    mask_margin: int = 0
    digits: int | None = None
    float64_residuals: dict[str, float] | None = None

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)


def _dec(x: Rational) -> decimal.Decimal:
    x = Fraction(x)
    return decimal.Decimal(x.numerator) / decimal.Decimal(x.denominator)


class _Precise:
    """Generators of a representation as object arrays of Decimals.

    Must be used inside a ``decimal.localcontext`` with the working precision.
    """

    def __init__(self, rep: AlgebraRep):
        dim = rep.basis.dim
        zero = decimal.Decimal(0)
        self.dim = dim
        self.Y0 = self.diag([_dec(y) for y in rep.levels])
        yp = np.full((dim, dim), zero, dtype=object)
        for eta, v in enumerate(rep.ladder_sq):
            yp[eta + 1, eta] = _dec(v).sqrt()
        self.Yplus = yp
        self.Yminus = yp.T.copy()

    def diag(self, values) -> np.ndarray:
        out = np.full((self.dim, self.dim), decimal.Decimal(0), dtype=object)
        for i, v in enumerate(values):
            out[i, i] = v
        return out

    @staticmethod
    def comm(a, b):
        return a.dot(b) - b.dot(a)

    @staticmethod
    def max_abs(m, mask) -> float:
        sub = m[np.ix_(mask, mask)]
        return float(max((abs(v) for v in sub.ravel()), default=decimal.Decimal(0)))


def _precise_context(digits: int):
    return decimal.localcontext(decimal.Context(prec=digits))


def _require_squares(rep: AlgebraRep):
    if len(rep.ladder_sq) != rep.basis.dim - 1:
        raise ValueError("representation carries no exact ladder elements; pass digits=None")


def verify_commutation(rep: AlgebraRep, tol: float = 1e-10, digits: int | None = CHECK_DIGITS) -> ResidualReport:
    """Max-norm residuals of ``[Y0, Y+-] -+ Y+-`` and ``[Y-, Y+] - Phi(Y0)``.

    With ``digits`` set the relations are evaluated in decimal arithmetic at
    that precision from the exact ladder elements; ``digits=None`` uses the
    float64 matrices only.
    """
    mask = rep.interior()
    f64 = {
        "[Y0,Y+]-Y+": (commutator(rep.Y0, rep.Yplus) - rep.Yplus).max_abs(mask),
        "[Y0,Y-]+Y-": (commutator(rep.Y0, rep.Yminus) + rep.Yminus).max_abs(mask),
        "[Y-,Y+]-Phi": (commutator(rep.Yminus, rep.Yplus) - rep.phi_matrix()).max_abs(mask),
    }
    if digits is None:
        return ResidualReport(f64, tol, rep.mask_margin, None, f64)
    _require_squares(rep)
    with _precise_context(digits):
        P = _Precise(rep)
        phi = P.diag([_dec(rep.psi(y + 1) - rep.psi(y)) for y in rep.levels])
        res = {
            "[Y0,Y+]-Y+": P.max_abs(P.comm(P.Y0, P.Yplus) - P.Yplus, mask),
            "[Y0,Y-]+Y-": P.max_abs(P.comm(P.Y0, P.Yminus) + P.Yminus, mask),
            "[Y-,Y+]-Phi": P.max_abs(P.comm(P.Yminus, P.Yplus) - phi, mask),
        }
    return ResidualReport(res, tol, rep.mask_margin, digits, f64)


@dataclass(frozen=True)
class CasimirResult:
    value: float
    deviation: float
    expected: Fraction


def casimir_check(rep: AlgebraRep, digits: int | None = CHECK_DIGITS) -> CasimirResult:
    """``Psi(Y0; R1) - Y+ Y-`` should be ``(s+1) kappa^(n)`` times the identity."""
    mask = rep.interior()
    if rep.sector is not None:
        expected = (rep.sector.s + 1) * falling_factorial(rep.basis.kappa, rep.n)
    else:
        expected = falling_factorial(rep.basis.kappa, rep.n)
    if digits is None:
        c = rep.psi_matrix() - rep.Yplus @ rep.Yminus
        d = np.diag(c.data)[mask]
        value = float(d.mean().real) if d.size else 0.0
        dev = (c - fock.identity(rep.basis) * value).max_abs(mask)
        return CasimirResult(value, dev, expected)
    _require_squares(rep)
    with _precise_context(digits):
        P = _Precise(rep)
        c = P.diag([_dec(rep.psi(y)) for y in rep.levels]) - P.Yplus.dot(P.Yminus)
        d = [c[i, i] for i in np.flatnonzero(mask)]
        value = sum(d, decimal.Decimal(0)) / len(d) if d else decimal.Decimal(0)
        dev = P.max_abs(c - P.diag([value] * P.dim), mask)
    return CasimirResult(float(value), dev, expected)


@dataclass(frozen=True)
class HPRep:
    """Exact su(2) generators dressed from an su_pd(2) sector."""

    rep: AlgebraRep
    V0: OperatorMatrix
    Vplus: OperatorMatrix
    Vminus: OperatorMatrix
    phi: tuple[Fraction, ...]

    @property
    def J_value(self) -> Fraction:
        return self.rep.sector.j

    @property
    def basis(self) -> SectorBasis:
        return self.rep.basis

    def phi_matrix(self, power: float = 1.0) -> OperatorMatrix:
        return diagonal(self.basis, [float(p) ** power for p in self.phi])


def hp_map(rep: AlgebraRep) -> HPRep:
    """Holstein-Primakoff dressing ``V0 = Y0 - R0 - J``, ``V+ = Y+ phi(V0)^(1/2)``.

    ``phi(V0) = (J + V0 + 1)(J - V0) / Psi(Y0 + 1; R1)``.  The factor
    ``J - V0 = R1 - Y0`` is shared with ``Psi(Y0 + 1; R1)``, so phi is
    evaluated in the cancelled form ``(J + V0 + 1) / (n Y0 + n + R1)^(n)``,
    which is finite on the top vector as well.
    """
    sector = rep.sector
    if sector is None:
        raise ValueError("hp_map needs a finite two-mode sector")
    j, l0, l1, n = sector.j, sector.l0, sector.l1, sector.n
    phi = []
    for eta, y in enumerate(rep.levels):
        m = y - l0 - j
        den = falling_factorial(n * (y + 1) + l1, n)
        if den == 0:
            raise ArithmeticError(f"vanishing structure value inside sector {sector} at eta={eta}")
        full_num = (j + m + 1) * (j - m)
        full_den = psi_eval(n, y + 1, l1)
        if full_den != 0 and full_num / full_den != (j + m + 1) / den:
            raise ArithmeticError("internal inconsistency in phi cancellation")
        phi.append((j + m + 1) / den)
    basis = rep.basis
    V0 = rep.Y0 - fock.identity(basis) * float(l0 + j)
    sq = diagonal(basis, [sqrt(p) for p in phi])
    Vp = rep.Yplus @ sq
    return HPRep(rep, V0, Vp, Vp.dag(), tuple(phi))


def verify_su2(hp: HPRep, tol: float = 1e-10) -> ResidualReport:
    res = {
        "[V0,V+]-V+": (commutator(hp.V0, hp.Vplus) - hp.Vplus).max_abs(),
        "[V0,V-]+V-": (commutator(hp.V0, hp.Vminus) + hp.Vminus).max_abs(),
        "[V+,V-]-2V0": (commutator(hp.Vplus, hp.Vminus) - hp.V0 * 2).max_abs(),
    }
    return ResidualReport(res, tol)


@lru_cache(maxsize=64)
def build_supd11_rep(n: int, kappa: int, n_max: int) -> AlgebraRep:
    """One-mode su_pd(1,1): ``Y+ = (a^+)^n``, ``Y0 = N/n`` on ``{|kappa>, |kappa+n>, ...}``.

    The residue class is cut at ``n_max``; residual checks drop the top
    ``n (n + 1)`` photon shells.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0 <= kappa < n:
        raise ValueError(f"kappa must lie in 0..{n - 1}, got {kappa}")
    if n_max < kappa:
        raise ValueError("n_max below kappa leaves an empty class")
    basis = SectorBasis("one-mode", n, kappa, n_max=n_max)
    levels = tuple(Fraction(int(N), n) for N in basis.photon_numbers())
    Y0, Yp, Ym, sq = _bidiagonal(basis, levels, lambda y: psi_one_mode(n, y))
    return AlgebraRep(basis, Y0, Yp, Ym, levels, None, sq, mask_margin=n * (n + 1))


def build_supd11_rep_fock(n: int, kappa: int, n_max: int) -> AlgebraRep:
    """Same as :func:`build_supd11_rep` but from ``(a^+)^n`` on the one-mode Fock space."""
    b = fock.build_basis(1, n_max)
    yp = fock.monomial(b, create={0: n})
    basis = SectorBasis("one-mode", n, kappa, n_max=n_max)
    idx = basis.photon_numbers()
    Yp = restrict(yp, idx, basis)
    levels = tuple(Fraction(int(N), n) for N in idx)
    Y0 = diagonal(basis, idx / n)
    sq = tuple(falling_factorial(int(N) + n, n) for N in idx[:-1])
    return AlgebraRep(basis, Y0, Yp, Yp.dag(), levels, None, sq, mask_margin=n * (n + 1))


@dataclass(frozen=True)
class WOps:
    """Canonical cluster operators on one truncated residue class."""

    basis: SectorBasis
    Wplus: OperatorMatrix
    Wminus: OperatorMatrix
    NW: OperatorMatrix
    E11: OperatorMatrix

    def interior(self) -> np.ndarray:
        """Rows with ``N <= n_max - 2n``."""
        return self.basis.photon_numbers() <= self.basis.n_max - 2 * self.basis.n


def w_operators(n: int, kappa: int, n_max: int) -> WOps:
    """``W+ = Y+ [(Y0 - R0 + 1) / (E11 + n)^(n)]^(1/2)`` on the class ``N = kappa mod n``.

    ``Y0 - R0`` is the cluster number ``nu = floor(N/n)``.  Each element is
    the root of the exact product of the squared factors, and ``NW = W+ W-``
    is formed from those exact squares, so its diagonal is ``nu`` exactly.
    """
    rep = build_supd11_rep(n, kappa, n_max)
    N = rep.basis.photon_numbers()
    nu = [Fraction(int(x) - kappa, n) for x in N]
    w_sq = [rep.ladder_sq[k] * (nu[k] + 1) / falling_factorial(int(N[k]) + n, n) for k in range(len(N) - 1)]
    dim = rep.basis.dim
    wp = np.zeros((dim, dim))
    for k, v in enumerate(w_sq):
        wp[k + 1, k] = sqrt(v)
    Wp = OperatorMatrix(rep.basis, wp)
    NW = diagonal(rep.basis, [0.0] + [float(v) for v in w_sq])
    E11 = diagonal(rep.basis, N)
    return WOps(rep.basis, Wp, Wp.dag(), NW, E11)


def nested_ad(rep: AlgebraRep, order: int) -> OperatorMatrix:
    """``ad_Y^order (Y+)`` with ``ad_Y X = [Y-, X]``, in float64."""
    out = rep.Yplus
    for _ in range(order):
        out = commutator(rep.Yminus, out)
    return out


@dataclass(frozen=True)
class NilpotencyReport:
    order: int
    residual: float
    previous_norm: float
    tol: float
    mask_margin: int
    digits: int | None = None
    float64_residual: float | None = None

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol and self.previous_norm > 1e-3


def nilpotency_order(rep: AlgebraRep) -> int:
    """Sharp order k with ``ad^k_Y Y+ = 0``: degree of Psi in Y0 plus one.

    ``n + 1`` for the one-mode algebra (Green-type relation); ``n + 2`` for
    two-mode sectors, whose Psi carries the extra factor ``R1 - Y0 + 1``.
    """
    return rep.n + 1 if rep.basis.kind == "one-mode" else rep.n + 2


def green_nilpotency_check(
    rep: AlgebraRep, tol: float = 1e-8, order: int | None = None, digits: int | None = CHECK_DIGITS
) -> NilpotencyReport:
    """Interior max-norm of ``ad^order_Y Y+`` and of the preceding power.

    The nested commutators cancel terms of size ``max|Y+|^(order+1)``
    (~1e13 for ``n = 3``, ``n_max = 60``), far beyond float64 resolution, so
    by default they are evaluated in decimal arithmetic with ``digits``
    significant digits.  The float64 value is kept as ``float64_residual``.
    """
    order = nilpotency_order(rep) if order is None else order
    mask = rep.interior()
    f64 = commutator(rep.Yminus, nested_ad(rep, order - 1))
    if digits is None:
        prev = nested_ad(rep, order - 1)
        return NilpotencyReport(order, f64.max_abs(mask), prev.max_abs(mask), tol, rep.mask_margin, None, f64.max_abs(mask))
    _require_squares(rep)
    with _precise_context(digits):
        P = _Precise(rep)
        out = P.Yplus
        for _ in range(order - 1):
            out = P.comm(P.Yminus, out)
        prev = P.max_abs(out, mask)
        last = P.max_abs(P.comm(P.Yminus, out), mask)
    return NilpotencyReport(order, last, prev, tol, rep.mask_margin, digits, f64.max_abs(mask))
