"""SU(2) coherent-state trial functions, variational spectra and classical flow.

Trial states ``S_V(xi) N V+^v |lowest>`` use ``xi = r exp(-i theta)``; flow
states ``S_V(z)|lowest>`` use ``z = -r exp(i theta)`` with canonical pair
``q = theta``, ``p = <Y0>``.  For the v = 0 family
``p = l0 + j (1 - cos 2r)`` with ``r`` in ``[0, pi/2]``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import lru_cache
from math import acos, comb, pi
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq

from .fock import OperatorMatrix
from .polyalg import HPRep, SectorBasis, SectorLabel, build_supd2_rep, hp_map, psi_eval

_HP_CACHE: dict[SectorLabel, HPRep] = {}


def hp_for(sector: SectorLabel) -> HPRep:
    hp = _HP_CACHE.get(sector)
    if hp is None:
        hp = _HP_CACHE.setdefault(sector, hp_map(build_supd2_rep(sector)))
    return hp


def coherent_state(hp: HPRep, v: int, xi: complex) -> np.ndarray:
    """Normalized ``exp(xi V+ - xi* V-) V+^v |lowest>`` by dense matrix exponential."""
    s = hp.basis.dim - 1
    if not 0 <= v <= s:
        raise ValueError(f"excitation index v={v} outside 0..{s}")
    seed = np.zeros(s + 1, dtype=complex)
    seed[v] = 1.0  # V+^v |lowest> is proportional to the v-th basis vector
    gen = xi * hp.Vplus.data - np.conj(xi) * hp.Vminus.data
    psi = expm(gen) @ seed
    return psi / np.linalg.norm(psi)


@lru_cache(maxsize=None)
def _root_binomials(s: int) -> tuple[np.ndarray, np.ndarray]:
    eta = np.arange(s + 1)
    root = np.sqrt(np.array([comb(s, k) for k in eta], dtype=float))
    eta.setflags(write=False)
    root.setflags(write=False)
    return eta, root


def spin_coherent_amplitudes(s: int, r: float, phase: complex) -> np.ndarray:
    """Closed form of ``exp(z V+ - z* V-)|lowest>`` for ``z = r * phase``, ``|phase| = 1``."""
    eta, root = _root_binomials(s)
    return root * np.cos(r) ** (s - eta) * np.sin(r) ** eta * phase**eta


@dataclass(frozen=True)
class TrialState:
    sector: SectorLabel
    v: int
    xi: complex

    @property
    def r(self) -> float:
        return abs(self.xi)

    @property
    def theta(self) -> float:
        return float(np.mod(-np.angle(self.xi), 2 * pi)) if self.xi != 0 else 0.0

    @classmethod
    def polar(cls, sector: SectorLabel, v: int, r: float, theta: float) -> "TrialState":
        return cls(sector, v, r * np.exp(-1j * theta))

    def vector(self) -> np.ndarray:
        return coherent_state(hp_for(self.sector), self.v, self.xi)


def _check_basis(H: OperatorMatrix, sector: SectorLabel):
    if not isinstance(H.basis, SectorBasis) or H.basis.label != sector:
        raise ValueError(f"Hamiltonian basis {H.basis!r} does not belong to sector {sector}")


def energy_functional(H: OperatorMatrix, trial: TrialState) -> float:
    """``<trial|H|trial>``; real part returned, imaginary part must vanish."""
    _check_basis(H, trial.sector)
    psi = trial.vector()
    e = np.vdot(psi, H.data @ psi)
    if abs(e.imag) > 1e-10 * max(1.0, abs(e.real)):
        raise ValueError("non-real energy: Hamiltonian is not Hermitian")
    return float(e.real)


def _variance(H: np.ndarray, psi: np.ndarray) -> float:
    hp = H @ psi
    e = np.vdot(psi, hp).real
    return float(max(np.vdot(hp, hp).real - e * e, 0.0))


@dataclass(frozen=True)
class StationaryPoint:
    r: float
    theta: float
    energy: float
    residual: float
    variance: float
    theta_residual: float = 0.0

    def to_json(self, sector: SectorLabel, v: int) -> dict:
        return {"sector": sector.to_json(), "v": v, "r": self.r, "theta": self.theta,
                "energy": self.energy, "residual": self.residual, "variance": self.variance}


class _Orbit:
    """Energy and analytic derivatives along ``xi = r exp(-i theta)``."""

    def __init__(self, H: OperatorMatrix, hp: HPRep, v: int, theta: float):
        self.H = H.data
        self.v = v
        ph = np.exp(-1j * theta)
        A = ph * hp.Vplus.data - np.conj(ph) * hp.Vminus.data  # d/dr generator
        # A is anti-Hermitian: A = -i B with B Hermitian
        self._w, self._U = np.linalg.eigh(1j * A)
        self.comm_r = self.H @ A - A @ self.H
        # theta rotation acts as conjugation by exp(-i theta V0) up to a phase
        V0 = hp.V0.data
        self.comm_t = 1j * (V0 @ self.H - self.H @ V0)
        self._seed = self._U.conj().T[:, v].copy()

    def state(self, r: float) -> np.ndarray:
        psi = self._U @ (np.exp(-1j * r * self._w) * self._seed)
        return psi / np.linalg.norm(psi)

    def energy(self, r: float) -> float:
        psi = self.state(r)
        return float(np.vdot(psi, self.H @ psi).real)

    def d_r(self, r: float) -> float:
        psi = self.state(r)
        return float(np.vdot(psi, self.comm_r @ psi).real)

    def d_theta(self, r: float) -> float:
        psi = self.state(r)
        return float(np.vdot(psi, self.comm_t @ psi).real)


def phase_angle(b: complex) -> float:
    """theta with ``exp(-i theta) = b/|b|``; 0 when b = 0."""
    if b == 0:
        return 0.0
    return float(np.mod(-np.angle(b), 2 * pi))


def stationary_points(H: OperatorMatrix, sector: SectorLabel, v: int = 0, b: complex | None = None,
                      grid: int = 2000) -> list[StationaryPoint]:
    """r-stationary points of the energy functional at the phase fixed by ``b``.

    ``b`` defaults to the (1,0) element ratio of H, i.e. the coefficient of
    ``Y+``.  A 2000-point scan of ``dE/dr`` over ``[0, pi]`` brackets sign
    changes which are polished with Brent's method.
    """
    _check_basis(H, sector)
    hp = hp_for(sector)
    if b is None:
        b = complex(H.data[1, 0]) if H.dim > 1 else 0.0
    theta = phase_angle(b)
    orb = _Orbit(H, hp, v, theta)
    rs = np.linspace(0.0, pi, grid + 1)
    d = np.array([orb.d_r(r) for r in rs])
    scale = max(1.0, float(np.max(np.abs(H.data))))
    roots = []
    for k in range(grid):
        if d[k] == 0.0:
            roots.append(rs[k])
        elif d[k] * d[k + 1] < 0:
            roots.append(brentq(orb.d_r, rs[k], rs[k + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    if d[-1] == 0.0:
        roots.append(rs[-1])
    if not roots:
        # flat functional (e.g. one-dimensional sector): every r is stationary
        if np.max(np.abs(d)) <= 1e-12 * scale:
            roots = [0.0]
        else:
            raise RuntimeError("no stationary point found on the coherent orbit")
    out = []
    for r in roots:
        psi = orb.state(r)
        out.append(StationaryPoint(float(r), theta, orb.energy(r), abs(orb.d_r(r)),
                                   _variance(H.data, psi), abs(orb.d_theta(r))))
    return out


def select_best(candidates: Sequence[StationaryPoint],
                criterion: Callable[[StationaryPoint], float] | None = None,
                tie_tol: float = 1e-9) -> StationaryPoint:
    """Candidate with the smallest energy variance (or ``criterion``).

    Scores within ``tie_tol`` of the best count as tied; ties go to the lower
    energy, then to the smaller r.
    """
    if not candidates:
        raise ValueError("no candidates")
    key = criterion or (lambda c: c.variance)
    best = min(key(c) for c in candidates)
    tied = [c for c in candidates if key(c) <= best + tie_tol]
    return min(tied, key=lambda c: (c.energy, c.r))


def minimize_energy(H: OperatorMatrix, sector: SectorLabel, v: int = 0) -> StationaryPoint:
    """Lowest-energy stationary point of the v-family."""
    pts = stationary_points(H, sector, v)
    return min(pts, key=lambda c: (c.energy, c.r))


def manifold_residual(n: int, l1, Ybar0, Yplus_bar, Yminus_bar) -> float:
    """``2 Y+ Y- - Psi(Y0; l1) - Psi(Y0 + 1; l1)`` for mean-field values."""
    def psi(y):
        if isinstance(y, (int,)) or hasattr(y, "denominator"):
            return float(psi_eval(n, y, l1))
        l1f = float(l1)
        ff = 1.0
        for k in range(n):
            ff *= n * y + l1f - k
        return (l1f - y + 1) * ff
    val = 2 * Yplus_bar * Yminus_bar - psi(Ybar0) - psi(Ybar0 + 1)
    return float(np.real(val))


# --- classical flow --------------------------------------------------------------

@dataclass(frozen=True)
class FlowState:
    q: float
    p: float
    t: float = 0.0
    energy: float = float("nan")


@dataclass
class Trajectory:
    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    energy: np.ndarray
    chart: np.ndarray = field(repr=False)

    @property
    def relative_drift(self) -> float:
        e0 = self.energy[0]
        return float(np.max(np.abs(self.energy - e0)) / max(abs(e0), 1e-300))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "q", "p", "energy"])
        for row in zip(self.t, self.q, self.p, self.energy):
            w.writerow([f"{x:.17g}" for x in row])
        return buf.getvalue()


class FlowSurface:
    """Energy function ``H(q, p)`` on the v = 0 coherent sphere of one sector.

    Derivatives come from ``dH/dr = <[H, A]>`` and ``dH/dq`` from the V0
    rotation; the polar-chart singularities at the poles are removed by
    switching to the Darboux charts ``sqrt(2 P) exp(i q)``.
    """

    def __init__(self, H: OperatorMatrix, sector: SectorLabel):
        _check_basis(H, sector)
        if sector.s == 0:
            raise ValueError("flow needs a sector of dimension >= 2")
        self.sector = sector
        self.hp = hp_for(sector)
        self.H = H.data
        self.s = sector.s
        self.j = float(sector.j)
        self.l0 = float(sector.l0)
        Vp, Vm, V0 = self.hp.Vplus.data, self.hp.Vminus.data, self.hp.V0.data
        self._cr_p = self.H @ Vp - Vp @ self.H
        self._cr_m = self.H @ Vm - Vm @ self.H
        self._ct = 1j * (self.H @ V0 - V0 @ self.H)

    def r_of_p(self, p: float) -> float:
        x = 1.0 - (p - self.l0) / self.j
        return 0.5 * acos(min(1.0, max(-1.0, x)))

    def p_of_r(self, r: float) -> float:
        return self.l0 + self.j * (1.0 - np.cos(2 * r))

    def state(self, q: float, r: float) -> np.ndarray:
        # z = -r exp(i q): phase of z is -exp(i q)
        return spin_coherent_amplitudes(self.s, r, -np.exp(1j * q))

    def energy(self, q: float, p: float) -> float:
        psi = self.state(q, self.r_of_p(p))
        return float(np.vdot(psi, self.H @ psi).real)

    def _derivs(self, q: float, r: float) -> tuple[float, float]:
        """(dH/dr, dH/dq) at fixed (q, r)."""
        psi = self.state(q, r)
        ph = -np.exp(1j * q)
        hr = (ph * np.vdot(psi, self._cr_p @ psi) - ph.conjugate() * np.vdot(psi, self._cr_m @ psi)).real
        # rotating q by alpha multiplies the eta-th amplitude by exp(i alpha eta)
        eta, _ = _root_binomials(self.s)
        hq = 2 * np.vdot(psi, self.H @ (1j * eta * psi)).real
        return float(hr), float(hq)

    def polar_field(self, q: float, p: float) -> tuple[float, float]:
        """(dq/dt, dp/dt) = (dH/dp, -dH/dq)."""
        r = self.r_of_p(p)
        hr, hq = self._derivs(q, r)
        return hr / (2 * self.j * np.sin(2 * r)), -hq

    def cart_field(self, x: float, y: float, top: bool) -> tuple[float, float]:
        """Field in ``x + i y = sqrt(2 P) exp(i q)`` with ``P`` measured from the nearer pole."""
        rho = float(np.hypot(x, y))
        if rho < 1e-12:
            # limit at the pole itself, approached along the x axis
            return self.cart_field(1e-7, 0.0, top)
        q = float(np.arctan2(y, x))
        P = 0.5 * rho * rho
        p = self.l0 + 2 * self.j - P if top else self.l0 + P
        r = self.r_of_p(p)
        hr, hq = self._derivs(q, r)
        sq = 2.0 * np.sqrt(self.j)
        if top:
            # rho = 2 sqrt(j) cos r and dP/dt = -dp/dt
            rho_qdot = hr / (sq * np.sin(r))
            rho_dot = hq / (sq * np.cos(r))
        else:
            # rho = 2 sqrt(j) sin r
            rho_qdot = hr / (sq * np.cos(r))
            rho_dot = -hq / (sq * np.sin(r))
        c, s_ = x / rho, y / rho
        return rho_dot * c - rho_qdot * s_, rho_dot * s_ + rho_qdot * c


def _rk4(f, y, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def classical_flow(H: OperatorMatrix, sector: SectorLabel, initial: FlowState, T: float, dt: float,
                   pole_fraction: float = 0.1, range_tol: float = 1e-9,
                   orientation: str = "literal") -> Trajectory:
    """Fixed-step RK4 integration of ``q' = dH/dp``, ``p' = -dH/dq``.

    Steps taken within ``pole_fraction * s`` of either end of the p-range use
    the Darboux chart around that pole.

    With the flow states ``z = -r exp(i q)`` the amplitudes carry ``exp(i eta q)``,
    and the Schrodinger equation projected on them runs the opposite way:
    ``q' = -dH/dp``, ``p' = dH/dq``.  ``orientation="schrodinger"`` integrates
    that field, which follows the quantum ``<Y0>(t)`` at short times; the
    default ``"literal"`` keeps the equations above.  Both conserve H.
    """
    if orientation not in ("literal", "schrodinger"):
        raise ValueError(f"unknown orientation {orientation!r}")
    sgn = 1.0 if orientation == "literal" else -1.0
    surf = FlowSurface(H, sector)
    lo, hi = surf.l0, surf.l0 + sector.s
    if not lo - range_tol <= initial.p <= hi + range_tol:
        raise ValueError(f"p={initial.p} outside admissible range [{lo}, {hi}]")
    steps = int(round(T / dt))
    if steps <= 0:
        raise ValueError("need T > 0 and dt > 0")
    band = pole_fraction * sector.s
    q, p = float(initial.q), float(initial.p)
    ts = np.empty(steps + 1)
    qs = np.empty(steps + 1)
    ps = np.empty(steps + 1)
    es = np.empty(steps + 1)
    charts = np.zeros(steps + 1, dtype=np.int8)
    ts[0], qs[0], ps[0], es[0] = initial.t, q, p, surf.energy(q, p)

    polar = lambda y: sgn * np.array(surf.polar_field(y[0], y[1]))
    bottom = lambda y: sgn * np.array(surf.cart_field(y[0], y[1], False))
    top = lambda y: sgn * np.array(surf.cart_field(y[0], y[1], True))

    for k in range(1, steps + 1):
        if p - lo < band:
            rho = np.sqrt(2 * max(p - lo, 0.0))
            x, y = _rk4(bottom, np.array([rho * np.cos(q), rho * np.sin(q)]), dt)
            q, p, chart = float(np.arctan2(y, x)), lo + 0.5 * (x * x + y * y), 1
        elif hi - p < band:
            rho = np.sqrt(2 * max(hi - p, 0.0))
            x, y = _rk4(top, np.array([rho * np.cos(q), rho * np.sin(q)]), dt)
            q, p, chart = float(np.arctan2(y, x)), hi - 0.5 * (x * x + y * y), 2
        else:
            q, p = _rk4(polar, np.array([q, p]), dt)
            chart = 0
        if not lo - range_tol <= p <= hi + range_tol:
            raise FloatingPointError(f"p left the admissible range at t={initial.t + k * dt}; reduce dt")
        q = float(np.mod(q, 2 * pi))
        ts[k] = initial.t + k * dt
        qs[k], ps[k], es[k], charts[k] = q, p, surf.energy(q, p), chart
    return Trajectory(ts, qs, ps, es, charts)
