"""Truncated bosonic Fock bases and dense operator matrices.

States are occupation vectors ``(n_0, ..., n_{m-1})`` with total occupation
bounded by ``n_max``.  The ordering is graded lexicographic: states are
sorted by total occupation, and inside one shell by the occupation tuple in
descending lexicographic order (mode 0 most significant).  For two modes and
``n_max = 2`` this gives ``(0,0), (1,0), (0,1), (2,0), (1,1), (0,2)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Iterable, Sequence

import numpy as np

DEFAULT_MAX_DIM = 200_000
NORM_TOL = 1e-12


class BasisMismatchError(ValueError):
    pass


class DimensionCapError(MemoryError):
    """Raised when a requested basis would exceed the dimension cap."""


def _shell(mode_count: int, total: int):
    # descending lexicographic compositions of `total` into `mode_count` parts
    if mode_count == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _shell(mode_count - 1, total - first):
            yield (first,) + rest


@dataclass(frozen=True)
class FockBasis:
    mode_count: int
    n_max: int
    states: np.ndarray = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    @property
    def totals(self) -> np.ndarray:
        return self.states.sum(axis=1)

    def index(self, occupations: Sequence[int]) -> int:
        """Position of an occupation vector; raises KeyError if absent."""
        occ = np.asarray(occupations, dtype=np.int64)
        if occ.shape != (self.mode_count,) or occ.min() < 0 or occ.sum() > self.n_max:
            raise KeyError(tuple(occupations))
        pos = _lookup(self, occ[None, :])[0]
        return int(pos)

    def indices(self, occupations: np.ndarray) -> np.ndarray:
        """Vectorized lookup; returns -1 for vectors outside the basis."""
        occ = np.atleast_2d(np.asarray(occupations, dtype=np.int64))
        return _lookup(self, occ)

    def state(self, i: int) -> tuple[int, ...]:
        return tuple(int(x) for x in self.states[i])

    def basis_vector(self, occupations: Sequence[int]) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(occupations)] = 1.0
        return v

    def interior(self, margin: int = 1) -> np.ndarray:
        """Boolean mask of rows whose total occupation is at most n_max - margin."""
        return self.totals <= self.n_max - margin


def _keys(basis: FockBasis, occ: np.ndarray) -> np.ndarray:
    radix = (basis.n_max + 1) ** np.arange(basis.mode_count - 1, -1, -1, dtype=np.int64)
    return occ @ radix


@lru_cache(maxsize=64)
def _sorted_keys(basis: FockBasis):
    keys = _keys(basis, basis.states)
    order = np.argsort(keys, kind="stable")
    return keys[order], order


def _lookup(basis: FockBasis, occ: np.ndarray) -> np.ndarray:
    out = np.full(occ.shape[0], -1, dtype=np.int64)
    ok = (occ.min(axis=1) >= 0) & (occ.sum(axis=1) <= basis.n_max)
    if not ok.any():
        return out
    skeys, order = _sorted_keys(basis)
    k = _keys(basis, occ[ok])
    pos = np.searchsorted(skeys, k)
    out[ok] = order[pos]
    return out


def basis_dimension(mode_count: int, n_max: int) -> int:
    return comb(n_max + mode_count, mode_count)


@lru_cache(maxsize=32)
def build_basis(mode_count: int, n_max: int, max_dim: int = DEFAULT_MAX_DIM) -> FockBasis:
    """All occupation vectors of ``mode_count`` modes with total <= ``n_max``.

    The dimension is ``C(n_max + mode_count, mode_count)``; bases above
    ``max_dim`` raise :class:`DimensionCapError`.
    """
    if mode_count < 1 or n_max < 0:
        raise ValueError(f"need mode_count >= 1 and n_max >= 0, got {mode_count}, {n_max}")
    dim = basis_dimension(mode_count, n_max)
    if dim > max_dim:
        raise DimensionCapError(f"basis dimension {dim} exceeds cap {max_dim}")
    if (n_max + 1.0) ** mode_count >= 2.0**62:
        raise DimensionCapError("occupation keys overflow int64 for this basis")
    states = np.array(
        [s for total in range(n_max + 1) for s in _shell(mode_count, total)],
        dtype=np.int64,
    ).reshape(dim, mode_count)
    states.flags.writeable = False
    return FockBasis(mode_count, n_max, states)


class OperatorMatrix:
    """Dense complex matrix bound to the basis it acts on.

    ``basis`` is any object with a ``dim`` attribute and value equality
    (a :class:`FockBasis` or a sector basis).  The matrix is read-only.
    """

    __slots__ = ("basis", "data")

    def __init__(self, basis, data):
        arr = np.array(data, dtype=complex)
        if arr.shape != (basis.dim, basis.dim):
            raise ValueError(f"matrix shape {arr.shape} does not match basis dim {basis.dim}")
        arr.flags.writeable = False
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("OperatorMatrix is immutable")

    def __repr__(self):
        return f"OperatorMatrix(dim={self.basis.dim}, basis={self.basis!r})"

    @property
    def dim(self) -> int:
        return self.basis.dim

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.basis, self.data.conj().T)

    def _check(self, other: "OperatorMatrix"):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        if other.basis != self.basis:
            raise BasisMismatchError(f"{self.basis!r} vs {other.basis!r}")
        return None

    def __add__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return OperatorMatrix(self.basis, self.data + other.data)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return OperatorMatrix(self.basis, self.data - other.data)
        return NotImplemented

    def __neg__(self):
        return OperatorMatrix(self.basis, -self.data)

    def __mul__(self, c):
        if isinstance(c, OperatorMatrix):
            return NotImplemented
        return OperatorMatrix(self.basis, complex(c) * self.data)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return OperatorMatrix(self.basis, self.data @ other.data)
        return apply(self, other)

    def max_abs(self, mask: np.ndarray | None = None) -> float:
        """Max-norm, optionally restricted to rows and columns selected by ``mask``."""
        d = self.data if mask is None else self.data[np.ix_(mask, mask)]
        return float(np.max(np.abs(d))) if d.size else 0.0


def identity(basis) -> OperatorMatrix:
    return OperatorMatrix(basis, np.eye(basis.dim))


def diagonal(basis, values) -> OperatorMatrix:
    return OperatorMatrix(basis, np.diag(np.asarray(values, dtype=complex)))


def _check_mode(basis: FockBasis, mode: int):
    if not 0 <= mode < basis.mode_count:
        raise IndexError(f"mode {mode} out of range for {basis.mode_count} modes")


def monomial(basis: FockBasis, create: dict[int, int] | None = None,
             annihilate: dict[int, int] | None = None) -> OperatorMatrix:
    """Normal-ordered monomial ``prod (a_k^+)^{c_k} prod a_k^{d_k}`` on the truncated basis.

    Matrix elements are the exact untruncated ones; columns whose image leaves
    the basis are zero.  This coincides with the product of truncated ladder
    matrices because normal ordering never passes through a higher shell than
    the final one.
    """
    create = {k: v for k, v in (create or {}).items() if v}
    annihilate = {k: v for k, v in (annihilate or {}).items() if v}
    for k in list(create) + list(annihilate):
        _check_mode(basis, k)
    occ = basis.states
    amp = np.ones(basis.dim)
    target = occ.copy()
    for k, d in annihilate.items():
        nk = occ[:, k].astype(float)
        for t in range(d):
            amp *= np.sqrt(np.clip(nk - t, 0.0, None))
        target[:, k] -= d
    for k, c in create.items():
        base = target[:, k].astype(float)
        for t in range(1, c + 1):
            amp *= np.sqrt(np.clip(base + t, 0.0, None))
        target[:, k] += c
    rows = basis.indices(target)
    cols = np.arange(basis.dim)
    keep = (rows >= 0) & (amp != 0.0)
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    mat[rows[keep], cols[keep]] = amp[keep]
    return OperatorMatrix(basis, mat)


def creation_op(basis: FockBasis, mode: int) -> OperatorMatrix:
    """``a_mode^+``: ``<m|a^+|n> = sqrt(n_mode + 1)`` when ``m`` fits in the basis."""
    return monomial(basis, create={mode: 1})


def annihilation_op(basis: FockBasis, mode: int) -> OperatorMatrix:
    return creation_op(basis, mode).dag()


def number_op(basis: FockBasis, mode: int) -> OperatorMatrix:
    _check_mode(basis, mode)
    return diagonal(basis, basis.states[:, mode])


def total_number_op(basis: FockBasis) -> OperatorMatrix:
    return diagonal(basis, basis.totals)


# --- operator algebra -------------------------------------------------------

def _same_basis(ops: Sequence[OperatorMatrix]):
    if not ops:
        raise ValueError("need at least one operator")
    b = ops[0].basis
    for op in ops[1:]:
        if op.basis != b:
            raise BasisMismatchError(f"{b!r} vs {op.basis!r}")
    return b


def add(*ops: OperatorMatrix) -> OperatorMatrix:
    b = _same_basis(ops)
    return OperatorMatrix(b, sum(op.data for op in ops))


def scale(op: OperatorMatrix, c: complex) -> OperatorMatrix:
    return op * c


def multiply(*ops: OperatorMatrix) -> OperatorMatrix:
    b = _same_basis(ops)
    out = ops[0].data
    for op in ops[1:]:
        out = out @ op.data
    return OperatorMatrix(b, out)


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    _same_basis((a, b))
    return OperatorMatrix(a.basis, a.data @ b.data - b.data @ a.data)


def anticommutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    _same_basis((a, b))
    return OperatorMatrix(a.basis, a.data @ b.data + b.data @ a.data)


def adjoint(a: OperatorMatrix) -> OperatorMatrix:
    return a.dag()


def power(a: OperatorMatrix, k: int) -> OperatorMatrix:
    return OperatorMatrix(a.basis, np.linalg.matrix_power(a.data, k))


def is_hermitian(a: OperatorMatrix, tol: float = 1e-10) -> bool:
    return float(np.max(np.abs(a.data - a.data.conj().T), initial=0.0)) <= tol


# --- states ------------------------------------------------------------------

def _as_state(op: OperatorMatrix, state) -> np.ndarray:
    psi = np.asarray(state, dtype=complex)
    if psi.shape[0] != op.dim:
        raise ValueError(f"state dimension {psi.shape[0]} != basis dimension {op.dim}")
    return psi


def apply(op: OperatorMatrix, state) -> np.ndarray:
    return op.data @ _as_state(op, state)


def expect(op: OperatorMatrix, state, tol: float = NORM_TOL) -> complex:
    """``<state|op|state>`` for a normalized state vector (|norm - 1| <= tol)."""
    psi = _as_state(op, state)
    if psi.ndim != 1:
        raise ValueError("expect takes a state vector; use expect_rho for density matrices")
    norm = np.vdot(psi, psi).real
    if abs(norm - 1.0) > tol:
        raise ValueError(f"state not normalized: <psi|psi> = {norm!r}")
    return complex(np.vdot(psi, op.data @ psi))


def expect_rho(op: OperatorMatrix, rho, tol: float = NORM_TOL) -> complex:
    r = _as_state(op, rho)
    tr = np.trace(r).real
    if abs(tr - 1.0) > tol:
        raise ValueError(f"density matrix trace {tr!r} is not 1")
    return complex(np.trace(op.data @ r))


def normalize(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return psi / np.linalg.norm(psi)


def state_to_json(basis: FockBasis, psi, rho=None) -> dict:
    psi = None if psi is None else np.asarray(psi, dtype=complex)
    out = {"mode_count": basis.mode_count, "n_max": basis.n_max}
    if psi is not None:
        out["amplitudes"] = [[float(z.real), float(z.imag)] for z in psi]
    if rho is not None:
        out["rho"] = [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(rho)]
    return out


def state_from_json(obj: dict | str):
    """Inverse of :func:`state_to_json`; returns ``(basis, psi, rho)``."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    basis = build_basis(int(obj["mode_count"]), int(obj["n_max"]))
    psi = rho = None
    if "amplitudes" in obj:
        psi = np.array([complex(re, im) for re, im in obj["amplitudes"]])
        if psi.shape != (basis.dim,):
            raise ValueError(f"expected {basis.dim} amplitudes, got {psi.shape[0]}")
    if "rho" in obj:
        rho = np.array([[complex(re, im) for re, im in row] for row in obj["rho"]])
        if rho.shape != (basis.dim, basis.dim):
            raise ValueError("rho shape does not match basis")
    if psi is None and rho is None:
        raise ValueError("state JSON needs 'amplitudes' or 'rho'")
    return basis, psi, rho


def matrix_to_json(m) -> list:
    data = m.data if isinstance(m, OperatorMatrix) else np.asarray(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in data]


def occupation_list(basis: FockBasis) -> Iterable[tuple[int, ...]]:
    return (basis.state(i) for i in range(basis.dim))
