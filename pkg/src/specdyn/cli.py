"""``specdyn`` command-line entry point.

Exit status: 0 on success, 1 when a check or computation fails, 2 on usage
errors.  Errors print a one-line message followed by a JSON record on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import fock, polarization as pol, polyalg as pa, quasiclassics as qc, spectral as sp, verify

# flag defaults, applied after merging the optional JSON config
DEFAULTS = {
    "n": 2,
    "m": 1,
    "omega1": 1.0,
    "omega0": None,  # resonant n * omega1 when unset
    "g_re": 1.0,
    "g_im": 0.0,
    "kappa": None,
    "s": None,
    "n_max": None,
    "tol": None,
    "seed": 0,
    "out": None,
    "format": "json",
    "state": None,
    "order": 6,
    "v": 0,
    "t_max": None,
    "steps": 201,
    "dt": 1e-3,
    "q0": 0.0,
    "p0": None,
    "samples": 32,
    "beta_re": 0.5,
    "beta_im": 0.0,
    "mode": 0,
    "suite": "all",
    "form": "linear",
    "orientation": "literal",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser):
    # defaults are None so explicitly given flags can be told apart from config values
    p.add_argument("--config", help="JSON file whose keys mirror the flags (flags win)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="write the artifact here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--tol", type=float)


def _model(p: argparse.ArgumentParser):
    p.add_argument("--n", type=int, help="cluster order (>= 2)")
    p.add_argument("--omega1", type=float)
    p.add_argument("--omega0", type=float, help="pump frequency (default: n * omega1)")
    p.add_argument("--g-re", dest="g_re", type=float)
    p.add_argument("--g-im", dest="g_im", type=float)


def _sector(p: argparse.ArgumentParser):
    p.add_argument("--kappa", type=int)
    p.add_argument("--s", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="specdyn", description="Sector spectra, quasiclassics and polarization checks.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("sectors", help="sectors of the two-mode truncation")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)

    p = sub.add_parser("spectrum", help="exact spectrum of one sector or of all complete sectors")
    _common(p)
    _model(p)
    _sector(p)
    p.add_argument("--n-max", dest="n_max", type=int, help="sweep every complete sector within this truncation")
    p.add_argument("--form", choices=("linear", "fock", "quasispin"))

    p = sub.add_parser("variational", help="coherent-state stationary points of one sector")
    _common(p)
    _model(p)
    _sector(p)
    p.add_argument("--v", type=int, help="excitation index of the trial family")

    p = sub.add_parser("evolve", help="unitary evolution of the lowest sector vector or of a state file")
    _common(p)
    _model(p)
    _sector(p)
    p.add_argument("--state", help="two-mode state JSON (pump, signal); evolves on its full basis")
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--steps", type=int)

    p = sub.add_parser("flow", help="classical Hamiltonian flow on the coherent sphere")
    _common(p)
    _model(p)
    _sector(p)
    p.add_argument("--q0", type=float)
    p.add_argument("--p0", type=float, help="initial <Y0> (default: l0 + s/2)")
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--orientation", choices=("literal", "schrodinger"),
                   help="literal: q' = dH/dp; schrodinger: reversed field that follows quantum <Y0>")

    p = sub.add_parser("polarization", help="unpolarized-light classification and state generation")
    psub = p.add_subparsers(dest="action", parser_class=_Parser)
    psub.required = True
    c = psub.add_parser("classify", help="classify a state or density matrix")
    _common(c)
    c.add_argument("--state")
    c.add_argument("--order", type=int, help="highest moment order S")
    c.add_argument("--samples", type=int, help="number of sampled group elements")
    t = psub.add_parser("tmsv", help="write a two-mode squeezed vacuum state")
    _common(t)
    t.add_argument("--m", type=int)
    t.add_argument("--n-max", dest="n_max", type=int)
    t.add_argument("--beta-re", dest="beta_re", type=float)
    t.add_argument("--beta-im", dest="beta_im", type=float)
    t.add_argument("--mode", type=int, help="0-based spatiotemporal mode carrying the pair")

    p = sub.add_parser("verify", help="run the invariant suites")
    _common(p)
    p.add_argument("--suite", choices=verify.SUITES + ("all",))
    return parser


def merge_config(args: argparse.Namespace) -> dict:
    """Flags, then config file values, then defaults."""
    meta = {"config", "command", "action"}
    allowed = set(vars(args)) - meta
    given = {k: v for k, v in vars(args).items() if v is not None and k not in meta}
    cfg = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file {path} does not exist")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a JSON object")
        for key, val in raw.items():
            k = key.replace("-", "_")
            if k not in allowed:
                raise UsageError(f"unknown config key {key!r} for this command")
            cfg[k] = val
    merged = {k: DEFAULTS.get(k) for k in allowed}
    merged.update(cfg)
    merged.update(given)
    return merged


# --- validation ------------------------------------------------------------------

def _int(cfg, key, lo=None, hi=None, required=False):
    v = cfg.get(key)
    if v is None:
        if required:
            raise UsageError(f"--{key.replace('_', '-')} is required")
        return None
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) and not (isinstance(v, float) and v.is_integer()):
        raise UsageError(f"{key} must be an integer, got {v!r}")
    v = int(v)
    if lo is not None and v < lo:
        raise UsageError(f"{key} must be >= {lo}, got {v}")
    if hi is not None and v > hi:
        raise UsageError(f"{key} must be <= {hi}, got {v}")
    return v


def _real(cfg, key, positive=False):
    v = cfg.get(key)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise UsageError(f"{key} must be a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise UsageError(f"{key} must be finite")
    if positive and v <= 0:
        raise UsageError(f"{key} must be positive, got {v}")
    return v


def _params(cfg) -> sp.ModelParams:
    n = _int(cfg, "n", lo=2)
    w1 = _real(cfg, "omega1")
    w0 = _real(cfg, "omega0")
    g = complex(_real(cfg, "g_re"), _real(cfg, "g_im"))
    return sp.ModelParams(n, w1, n * w1 if w0 is None else w0, g)


def _sector_label(cfg, n: int, required=True) -> pa.SectorLabel | None:
    kappa = _int(cfg, "kappa", lo=0, hi=n - 1, required=required)
    s = _int(cfg, "s", lo=0, required=required)
    if kappa is None or s is None:
        return None
    return pa.SectorLabel(n, kappa, s)


def _check_format(cfg, allowed=("json",)):
    if cfg["format"] not in allowed:
        raise UsageError(f"format {cfg['format']!r} not available here (choose from {', '.join(allowed)})")


# --- commands --------------------------------------------------------------------

def cmd_sectors(cfg) -> tuple[str, int]:
    _check_format(cfg, ("json", "csv"))
    n = _int(cfg, "n", lo=2)
    n_max = _int(cfg, "n_max", lo=0, required=True)
    slots = sp.decompose_sectors(n, n_max)
    if cfg["format"] == "csv":
        rows = ["kappa,s,dim,fitted_dim,partial"]
        rows += [f"{sl.label.kappa},{sl.label.s},{sl.label.dim},{sl.fitted_dim},{str(sl.partial).lower()}"
                 for sl in slots]
        return "\n".join(rows) + "\n", 0
    recs = []
    for sl in slots:
        r = sl.label.to_json()
        r.update({"dim": sl.label.dim, "fitted_dim": sl.fitted_dim, "partial": sl.partial})
        recs.append(r)
    total = sum(sl.fitted_dim for sl in slots)
    return _dump({"n": n, "n_max": n_max, "sectors": recs, "fitted_total": total,
                  "fock_dim": fock.build_basis(2, n_max).dim}), 0


def _params_json(p: sp.ModelParams) -> dict:
    return {"n": p.n, "omega1": p.omega1, "omega0": p.omega0, "g": [p.b.real, p.b.imag],
            "a": p.a, "b": [p.b.real, p.b.imag], "c": p.c}


def cmd_spectrum(cfg) -> tuple[str, int]:
    _check_format(cfg, ("json", "csv"))
    params = _params(cfg)
    sec = _sector_label(cfg, params.n, required=False)
    n_max = _int(cfg, "n_max", lo=0)
    if sec is None and n_max is None:
        raise UsageError("give --kappa and --s, or --n-max for a sweep")
    if sec is not None and n_max is not None:
        raise UsageError("--n-max sweeps all sectors; do not combine it with --kappa/--s")
    secs = [sec] if sec is not None else sp.complete_sectors(params.n, n_max)
    tol = cfg["tol"] if cfg["tol"] is not None else 1e-10
    spectra = [sp.diagonalize(sp.build_hhg(params, s_, cfg["form"]), s_, tol=tol) for s_ in secs]
    if cfg["format"] == "csv":
        return sp.spectra_csv(spectra), 0
    if sec is not None:
        out = spectra[0].to_json()
        out["params"] = _params_json(params)
        out["form"] = cfg["form"]
        return _dump(out), 0
    return _dump({"params": _params_json(params), "form": cfg["form"], "n_max": n_max,
                  "spectra": [s_.to_json() for s_ in spectra]}), 0


def cmd_variational(cfg) -> tuple[str, int]:
    _check_format(cfg)
    params = _params(cfg)
    sec = _sector_label(cfg, params.n)
    v = _int(cfg, "v", lo=0, hi=sec.s)
    H = sp.build_hhg(params, sec)
    cands = qc.stationary_points(H, sec, v)
    best = qc.select_best(cands)
    exact = np.linalg.eigvalsh(H.data)
    out = best.to_json(sec, v)
    out["params"] = _params_json(params)
    out["candidates"] = [c.to_json(sec, v) for c in cands]
    out["exact_eigenvalues"] = [float(e) for e in exact]
    out["selection"] = "minimum energy variance; ties to lower energy, then smaller r"
    return _dump(out), 0


def cmd_evolve(cfg) -> tuple[str, int]:
    _check_format(cfg, ("json", "csv"))
    params = _params(cfg)
    t_max = _real(cfg, "t_max", positive=True) or 20.0
    steps = _int(cfg, "steps", lo=1)
    grid = np.linspace(0.0, t_max, steps)
    if cfg["state"]:
        basis, psi, rho = _read_state(cfg["state"])
        if basis.mode_count != 2 or psi is None:
            raise UsageError("evolve needs a pure two-mode state (pump, signal)")
        H = sp.hhg_fock(params, basis.n_max)
        ev = sp.evolve(H, psi, grid, partition=sp.hhg_partition(basis, params.n))
        sec = None
    else:
        sec = _sector_label(cfg, params.n)
        H = sp.build_hhg(params, sec)
        psi0 = np.zeros(sec.dim, dtype=complex)
        psi0[0] = 1.0
        ev = sp.evolve(H, psi0, grid)
    if cfg["format"] == "csv":
        cols = []
        for nm, series in ev.expectations.items():
            if ev.is_real(nm):
                cols.append((nm, np.real(series)))
            else:
                cols += [(nm + "_re", np.real(series)), (nm + "_im", np.imag(series))]
        rows = [",".join(["t"] + [c for c, _ in cols])]
        for k, t in enumerate(ev.t):
            rows.append(",".join([f"{t:.17g}"] + [f"{float(v[k]):.17g}" for _, v in cols]))
        return "\n".join(rows) + "\n", 0
    out = ev.to_json(sec)
    out["params"] = _params_json(params)
    out["norm_drift"] = float(np.max(np.abs(ev.norms - 1)))
    if ev.populations is not None:
        out["population_drift"] = float(np.max(np.abs(ev.populations - ev.populations[0])))
    return _dump(out), 0


def cmd_flow(cfg) -> tuple[str, int]:
    _check_format(cfg, ("json", "csv"))
    params = _params(cfg)
    sec = _sector_label(cfg, params.n)
    if sec.s == 0:
        raise UsageError("flow needs s >= 1")
    if cfg["orientation"] not in ("literal", "schrodinger"):
        raise UsageError("orientation must be 'literal' or 'schrodinger'")
    T = _real(cfg, "t_max", positive=True) or 50.0
    dt = _real(cfg, "dt", positive=True)
    p0 = _real(cfg, "p0")
    p0 = float(sec.l0 + sec.j) if p0 is None else p0
    lo, hi = float(sec.l0), float(sec.l0 + sec.s)
    if not lo <= p0 <= hi:
        raise UsageError(f"p0 must lie in [{lo}, {hi}]")
    H = sp.build_hhg(params, sec)
    tr = qc.classical_flow(H, sec, qc.FlowState(_real(cfg, "q0"), p0), T, dt,
                           orientation=cfg["orientation"])
    if cfg["format"] == "csv":
        return tr.to_csv(), 0
    return _dump({"sector": sec.to_json(), "params": _params_json(params), "T": T, "dt": dt,
                  "orientation": cfg["orientation"], "relative_drift": tr.relative_drift,
                  "t": tr.t.tolist(), "q": tr.q.tolist(), "p": tr.p.tolist(), "energy": tr.energy.tolist()}), 0


def _read_state(path):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"state file {p} does not exist")
    try:
        return fock.state_from_json(p.read_text())
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read state file: {exc}") from None


def cmd_polarization(cfg, action: str) -> tuple[str, int]:
    _check_format(cfg)
    if action == "tmsv":
        m = _int(cfg, "m", lo=1)
        mode = _int(cfg, "mode", lo=0, hi=m - 1)
        n_max = _int(cfg, "n_max", lo=0)
        beta = complex(_real(cfg, "beta_re"), _real(cfg, "beta_im"))
        if n_max is None:
            # smallest even cut meeting the leakage bound
            t = math.tanh(abs(beta))
            kmax = 0 if t == 0 else max(0, math.ceil(math.log(1e-10) / (2 * math.log(t))) - 1)
            n_max = 2 * kmax
        basis = pol.build_polarized_basis(m, n_max)
        psi = pol.tmsv_state(beta, basis, mode=mode)
        return _dump(fock.state_to_json(basis.fock, psi)), 0
    if not cfg["state"]:
        raise UsageError("--state is required")
    fb, psi, rho = _read_state(cfg["state"])
    if fb.mode_count % 2:
        raise UsageError("polarized states need an even number of Fock modes (+i, -i pairs)")
    basis = pol.polarized_basis_of(fb)
    qs = pol.build_quasispin(basis)
    S = _int(cfg, "order", lo=1)
    samples = _int(cfg, "samples", lo=1)
    seed = _int(cfg, "seed")
    state = psi if psi is not None else rho
    try:
        rpt = pol.classify_ul(state, qs, S=S, tol=cfg["tol"], sample_count=samples, seed=seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return _dump(rpt.to_json()), 0


def cmd_verify(cfg) -> tuple[str, int]:
    _check_format(cfg)
    checks = verify.run_suite(cfg["suite"], seed=_int(cfg, "seed"))
    status = 0 if all(c.passed for c in checks) else 1
    return verify.format_table(checks), status, checks


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _error(kind: str, message: str, status: int, extra: dict | None = None) -> int:
    rec = {"error": {"kind": kind, "message": message, "status": status}}
    if extra:
        rec["error"].update(extra)
    sys.stderr.write(f"specdyn: {message}\n")
    sys.stderr.write(json.dumps(rec, sort_keys=True) + "\n")
    return status


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = merge_config(args)
        if args.command == "verify":
            table, status, checks = cmd_verify(cfg)
            if cfg["out"]:
                Path(cfg["out"]).write_text(_dump({"suite": cfg["suite"], "seed": cfg["seed"],
                                                   "checks": [c.to_json() for c in checks]}))
            sys.stdout.write(table)
            if status:
                failed = [c.name for c in checks if not c.passed]
                return _error("check", f"{len(failed)} check(s) failed", 1, {"failed": failed})
            return 0
        if args.command == "polarization":
            text, status = cmd_polarization(cfg, args.action)
        else:
            text, status = {
                "sectors": cmd_sectors,
                "spectrum": cmd_spectrum,
                "variational": cmd_variational,
                "evolve": cmd_evolve,
                "flow": cmd_flow,
            }[args.command](cfg)
        _emit(text, cfg["out"])
        return status
    except UsageError as exc:
        return _error("usage", str(exc), 2)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (ArithmeticError, FloatingPointError, ValueError, MemoryError) as exc:
        return _error("computation", f"{type(exc).__name__}: {exc}", 1)


if __name__ == "__main__":
    sys.exit(main())
