"""Command-line sweeps: QFI scans, phase diagrams, spectra, witness tables, ED vs analytic.

Examples:
  dicke-qfi qfi-scan --nb 3 --kappa 1 --temp-k 300 --g-min 0.05 --g-max 3 --g-steps 60
  dicke-qfi qfi-scan --mode analytic --kappa 0 --temp-k 0 --g-min 0 --g-max 1.5 --g-steps 151
  dicke-qfi phase-diagram --kappa-min 0 --kappa-max 0.95 --kappa-steps 20 --g-max 3
  dicke-qfi spectrum --nb 3 --g 0.2 --temp-k 300 --gamma-mev 1 --out spec.csv
  dicke-qfi witness --nb 3 --f 6.06
  dicke-qfi compare --kappa 0 --g 0.3 --nb-list 8 16 32 --tolerance 0.05
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import meanfield as mf
from .hilbert import DEFAULT_CUTOFF, ModelParams, build_hamiltonian, dipole_operator, embedded_spins, parity_operator
from .qfi import WitnessSpec, entanglement_depth_bound, qfi as qfi_single, qfi_max, thresholds
from .spectral import EigenSystem, MixedState, eigendecompose, eigenstate, photon_distribution, thermal_state
from .spectroscopy import (
    SpectrumError,
    bare_polariton_reference,
    pump_probe_ratio,
    qfi_from_spectrum,
    synthesize_spectrum,
    write_spectrum_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TOLERANCE = 3

SIG_DIGITS = 12
TAIL_LEVELS = 5
TAIL_TOL = 1e-6
MAX_CUTOFF = 1024
STATE_KINDS = ("thermal", "ground", "lower", "upper")


class ConfigError(ValueError):
    """Invalid command-line configuration."""


# --- exact diagonalization drivers -------------------------------------------

def polariton_fock_index(eig: EigenSystem, params: ModelParams, n_plus: int, n_minus: int) -> int:
    """Eigenstate closest in energy to |n+, n-> among those of matching parity.

    Target energy is E_0 + n+ Omega_+ + n- Omega_- with the thermodynamic-limit
    polariton frequencies, so this is meant for the normal phase.
    """
    sol = mf.polariton_solution(params)
    target = eig.energies[0] + n_plus * sol.omega_plus + n_minus * sol.omega_minus
    parity = np.real(np.einsum("il,ij,jl->l", eig.vectors.conj(), parity_operator(params), eig.vectors))
    want = 1.0 if (n_plus + n_minus) % 2 == 0 else -1.0
    candidates = np.flatnonzero(np.sign(np.round(parity, 6)) == want)
    if not len(candidates):
        raise ValueError("no eigenstate with the requested parity")
    return int(candidates[np.argmin(np.abs(eig.energies[candidates] - target))])


def ed_state(eig: EigenSystem, kind: str, temperature: float = 0.0) -> MixedState:
    """thermal: Boltzmann state; ground / lower / upper: eigenstates 0 / 1 / 2."""
    if kind == "thermal":
        return thermal_state(eig, temperature)
    if kind not in STATE_KINDS:
        raise ValueError(f"unknown state {kind!r}; choose from {STATE_KINDS}")
    return eigenstate(eig, STATE_KINDS.index(kind) - 1)


def photon_tail(state: MixedState, params: ModelParams) -> float:
    """Probability carried by the top few Fock levels of the truncated space."""
    return float(photon_distribution(state, params)[-TAIL_LEVELS:].sum())


@dataclass(frozen=True)
class EdPoint:
    f_total: float
    direction: str
    tail: float
    cutoff: int

    @property
    def converged(self) -> bool:
        return self.tail < TAIL_TOL


def ed_fq_max(params: ModelParams, kind: str = "thermal", temperature: float = 0.0) -> EdPoint:
    eig = eigendecompose(build_hamiltonian(params))
    state = ed_state(eig, kind, temperature)
    res = qfi_max(state, embedded_spins(params))
    return EdPoint(res.value, res.label, photon_tail(state, params), params.photon_cutoff)


def ed_fq_max_converged(params: ModelParams, kind: str = "thermal", temperature: float = 0.0,
                        rel_tol: float = 1e-6, max_cutoff: int = MAX_CUTOFF) -> tuple[EdPoint, bool]:
    """Double the photon cutoff until F_Q^Max moves by less than rel_tol."""
    cutoff = max(params.photon_cutoff, 1)
    prev = ed_fq_max(params.replace(photon_cutoff=cutoff), kind, temperature)
    while cutoff * 2 <= max_cutoff:
        cutoff *= 2
        cur = ed_fq_max(params.replace(photon_cutoff=cutoff), kind, temperature)
        if abs(cur.f_total - prev.f_total) <= rel_tol * max(abs(cur.f_total), 1e-300):
            return cur, True
        prev = cur
    return prev, False


def analytic_state(kind: str, temperature: float) -> mf.StateSpec:
    if kind == "thermal":
        return mf.StateSpec.thermal(temperature)
    return {
        "ground": mf.StateSpec.fock(0, 0),
        "lower": mf.StateSpec.fock(0, 1),
        "upper": mf.StateSpec.fock(1, 0),
    }[kind]


# --- output ------------------------------------------------------------------

def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(float(x), f".{SIG_DIGITS}g")
    return str(x)


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            return fmt(x)  # JSON has no inf/nan literals
        return float(fmt(x))
    return x


@dataclass
class Table:
    columns: list
    rows: list
    params: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows([fmt(v) for v in row] for row in self.rows)
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "params": {k: _json_value(v) if not isinstance(v, (list, tuple)) else [_json_value(x) for x in v]
                       for k, v in self.params.items()},
            "columns": list(self.columns),
            "rows": [[_json_value(v) for v in row] for row in self.rows],
        }
        return json.dumps(doc, indent=2) + "\n"

    def render(self, kind: str) -> str:
        return self.to_json() if kind == "json" else self.to_csv()


def emit(text: str, out: Optional[str]):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    if not path.parent.exists():
        raise ConfigError(f"output directory does not exist: {path.parent}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# --- sweeps ------------------------------------------------------------------

def default_workers() -> int:
    raw = os.environ.get("DICKE_QFI_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"DICKE_QFI_WORKERS must be an integer, got {raw!r}") from None
    return n


def run_grid(func: Callable, points: Sequence, workers: int) -> list:
    """Evaluate func over points; results come back in grid order."""
    if workers < 1:
        raise ConfigError(f"--workers must be >= 1, got {workers}")
    if workers == 1 or len(points) < 2:
        return [func(p) for p in points]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, points))


def g_grid(args) -> np.ndarray:
    if args.g is not None:
        grid = np.asarray(args.g, dtype=float)
    else:
        if args.g_steps < 1:
            raise ConfigError("--g-steps must be >= 1")
        grid = np.linspace(args.g_min, args.g_max, args.g_steps)
    if not len(grid):
        raise ConfigError("empty coupling grid")
    if np.any(grid < 0):
        raise ConfigError("couplings must be >= 0")
    return grid


def base_params(args) -> ModelParams:
    try:
        return ModelParams(omega_c=args.omega_c, omega_m=args.omega_m, G=0.0, kappa=args.kappa,
                           n_molecules=args.nb, photon_cutoff=args.cutoff)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class ScanTask:
    params: ModelParams
    mode: str
    state: str
    temperature: float
    converge: bool

    def __call__(self, G: float) -> tuple:
        p = self.params.replace(G=float(G))
        nb = p.n_molecules
        spec = WitnessSpec.uniform(nb)
        if self.mode == "analytic":
            val = mf.f_q_max_analytic(p, analytic_state(self.state, self.temperature))
            f_total = math.inf if val.divergent else val.value * nb
            depth = nb if val.divergent else entanglement_depth_bound(f_total, spec)
            return (G, p.g, f_total / nb, f_total, val.direction, depth, None, True)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            if self.converge:
                pt, ok = ed_fq_max_converged(p, self.state, self.temperature)
            else:
                pt = ed_fq_max(p, self.state, self.temperature)
                ok = pt.converged
        depth = entanglement_depth_bound(pt.f_total, spec)
        return (G, p.g, pt.f_total / nb, pt.f_total, pt.direction, depth, pt.cutoff, ok)


SCAN_COLUMNS = ["G_ev", "g_ev", "f_max", "F_max", "direction", "depth_bound", "cutoff", "converged"]


def cmd_qfi_scan(args) -> tuple[Table, int]:
    params = base_params(args)
    grid = g_grid(args)
    if args.temp_k < 0:
        raise ConfigError("--temp-k must be >= 0")
    task = ScanTask(params, args.mode, args.state, args.temp_k, args.converge_cutoff)
    rows = run_grid(task, list(grid), args.workers)
    unconverged = [r[0] for r in rows if not r[-1]]
    for G in unconverged:
        print(f"warning: photon cutoff not converged at G={fmt(G)} eV", file=sys.stderr)
    table = Table(SCAN_COLUMNS, rows, _params_dict(args, params, state=args.state, mode=args.mode))
    return table, EXIT_TOLERANCE if (unconverged and args.converge_cutoff) else EXIT_OK


def _params_dict(args, params: ModelParams, **extra) -> dict:
    d = {
        "omega_c_ev": params.omega_c,
        "omega_m_ev": params.omega_m,
        "kappa": params.kappa,
        "n_molecules": params.n_molecules,
        "photon_cutoff": params.photon_cutoff,
        "temperature_k": getattr(args, "temp_k", None),
    }
    d.update(extra)
    return d


@dataclass(frozen=True)
class PhaseTask:
    params: ModelParams
    temperature: float

    def __call__(self, point) -> tuple:
        kappa, G, temp = point
        p = self.params.replace(kappa=float(kappa), G=float(G))
        val = mf.f_q_max_analytic(p, mf.StateSpec.thermal(temp))
        value = math.inf if val.divergent else val.value
        return value, val.direction


def cmd_phase_diagram(args) -> tuple[Table, int]:
    params = base_params(args)
    grid = g_grid(args)
    rows = []
    if args.axis == "kappa":
        kappas = np.linspace(args.kappa_min, args.kappa_max, args.kappa_steps)
        if args.kappa_steps < 1 or np.any(kappas < 0):
            raise ConfigError("kappa grid must be non-empty and non-negative")
        points = [(k, G, args.temp_k) for k in kappas for G in grid]
        values = run_grid(PhaseTask(params, args.temp_k), points, args.workers)
        for (k, G, _), (v, d) in zip(points, values):
            p = params.replace(kappa=float(k))
            rows.append((k, G, G / math.sqrt(params.n_molecules), v, d,
                         mf.critical_coupling(p), _g_ew_cached(p)))
        columns = ["kappa", "G_ev", "g_ev", "f_max", "direction", "G_c_ev", "G_ew_ev"]
    else:
        temps = np.linspace(args.t_min, args.t_max, args.t_steps)
        if args.t_steps < 1 or np.any(temps < 0):
            raise ConfigError("temperature grid must be non-empty and non-negative")
        points = [(params.kappa, G, t) for t in temps for G in grid]
        values = run_grid(PhaseTask(params, 0.0), points, args.workers)
        for (_, G, t), (v, d) in zip(points, values):
            cap = mf.finite_t_cap(params, t) if (t > 0 and params.kappa < 1) else None
            rows.append((t, G, G / math.sqrt(params.n_molecules), v, d, cap))
        columns = ["temperature_k", "G_ev", "g_ev", "f_max", "direction", "cap"]
    extra = {"axis": args.axis, "kappa_c": mf.KAPPA_C, "kappa_ew": mf.kappa_ew()}
    return Table(columns, rows, _params_dict(args, params, **extra)), EXIT_OK


_G_EW_CACHE: dict = {}


def _g_ew_cached(params: ModelParams):
    key = (params.omega_c, params.omega_m, params.kappa)
    if key not in _G_EW_CACHE:
        _G_EW_CACHE[key] = mf.g_ew(params)
    return _G_EW_CACHE[key]


def cmd_spectrum(args) -> tuple[Table, int]:
    params = base_params(args)
    if args.g is None or len(args.g) != 1:
        raise ConfigError("spectrum needs exactly one --g value")
    if not args.gamma_mev > 0:
        raise ConfigError("--gamma-mev must be > 0")
    if args.out is None:
        raise ConfigError("spectrum needs --out PATH for the CSV")
    out = Path(args.out)
    if not out.parent.exists():
        raise ConfigError(f"output directory does not exist: {out.parent}")
    gamma = args.gamma_mev * 1e-3
    p = params.replace(G=float(args.g[0]))
    nb = p.n_molecules
    eig = eigendecompose(build_hamiltonian(p))
    dip = dipole_operator(p)
    sx = embedded_spins(p)[0]
    if args.fock is None:
        if args.temp_k <= 0:
            raise ConfigError("thermal spectrum inversion needs --temp-k > 0")
        state = thermal_state(eig, args.temp_k)
        spec = synthesize_spectrum(eig, state, dip, gamma)
        bare_p = p.replace(G=0.0)
        bare_eig = eigendecompose(build_hamiltonian(bare_p))
        bare = synthesize_spectrum(bare_eig, thermal_state(bare_eig, args.temp_k), dipole_operator(bare_p), gamma)
        recovered = qfi_from_spectrum(spec, bare, args.temp_k)
        direct = qfi_single(state, sx) / nb
        label = "thermal"
    else:
        n_plus, n_minus = args.fock
        idx = polariton_fock_index(eig, p, n_plus, n_minus)
        state = eigenstate(eig, idx)
        spec = synthesize_spectrum(eig, state, dip, gamma, fold_emission=True)
        bare = bare_polariton_reference(n_plus, n_minus, nb, p.omega_m, gamma, spec.omega_grid)
        recovered = pump_probe_ratio(spec, bare, n_plus, n_minus)
        direct = qfi_single(state, sx) / nb
        label = f"fock({n_plus},{n_minus})"
    write_spectrum_csv(spec, out)
    rel = abs(recovered - direct) / abs(direct) if direct else abs(recovered)
    rows = [(p.G, p.g, label, recovered, direct, rel)]
    columns = ["G_ev", "g_ev", "state", "f_spectrum", "f_direct", "rel_dev"]
    extra = {"gamma_mev": args.gamma_mev, "spectrum_csv": str(out)}
    return Table(columns, rows, _params_dict(args, p, **extra)), EXIT_OK


def cmd_witness(args) -> tuple[Table, int]:
    try:
        spec = WitnessSpec(tuple(args.widths)) if args.widths else WitnessSpec.uniform(args.nb)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    ths = thresholds(spec)
    rows = []
    for k, th in enumerate(ths, start=1):
        exceeded = None if args.f is None else bool(args.f > th)
        rows.append((k, th, exceeded))
    extra = {"widths": list(spec.widths)}
    if args.f is not None:
        if args.f < 0:
            raise ConfigError("--f must be >= 0")
        extra["f_measured"] = args.f
        extra["depth_bound"] = entanglement_depth_bound(args.f, spec)
    return Table(["K", "threshold", "exceeded"], rows, extra), EXIT_OK


@dataclass(frozen=True)
class CompareTask:
    params: ModelParams
    state: str
    temperature: float

    def __call__(self, item) -> tuple:
        nb, cutoff = item
        p = self.params.replace(n_molecules=int(nb), photon_cutoff=int(cutoff))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            pt = ed_fq_max(p, self.state, self.temperature)
        val = mf.f_q_max_analytic(p, analytic_state(self.state, self.temperature))
        f_ed = pt.f_total / nb
        f_an = math.inf if val.divergent else val.value
        dev = abs(f_ed - f_an) / abs(f_an) if f_an else abs(f_ed)
        return (nb, cutoff, p.G, p.g, f_ed, f_an, dev, pt.converged)


def cmd_compare(args) -> tuple[Table, int]:
    params = base_params(args)
    if args.g is None or len(args.g) != 1:
        raise ConfigError("compare needs exactly one --g value")
    if not args.nb_list or any(n < 1 for n in args.nb_list):
        raise ConfigError("--nb-list needs positive integers")
    params = params.replace(G=float(args.g[0]))
    cutoffs = args.cutoff_list or [args.cutoff] * len(args.nb_list)
    if len(cutoffs) != len(args.nb_list):
        raise ConfigError("--cutoff-list must match --nb-list in length")
    task = CompareTask(params, args.state, args.temp_k)
    rows = run_grid(task, list(zip(args.nb_list, cutoffs)), args.workers)
    columns = ["n_molecules", "cutoff", "G_ev", "g_ev", "f_ed", "f_analytic", "rel_dev", "converged"]
    extra = {"state": args.state, "tolerance": args.tolerance}
    table = Table(columns, rows, _params_dict(args, params, **extra))
    final = rows[-1][6]
    if not final <= args.tolerance:
        print(f"deviation {fmt(final)} at N_B={rows[-1][0]} exceeds tolerance {fmt(args.tolerance)}",
              file=sys.stderr)
        return table, EXIT_TOLERANCE
    return table, EXIT_OK


# --- argument parsing --------------------------------------------------------

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--omega-c", type=float, default=1.0, help="cavity frequency, eV")
    p.add_argument("--omega-m", type=float, default=1.0, help="molecular frequency, eV")
    p.add_argument("--kappa", type=float, default=0.0, help="diamagnetic prefactor")
    p.add_argument("--g", type=float, nargs="+", default=None, help="collective coupling(s) G, eV")
    p.add_argument("--g-min", type=float, default=0.0)
    p.add_argument("--g-max", type=float, default=2.0)
    p.add_argument("--g-steps", type=int, default=41)
    p.add_argument("--nb", type=int, default=3, help="number of molecules N_B")
    p.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF, help="photon Fock cutoff")
    p.add_argument("--temp-k", type=float, default=0.0, help="temperature, K")
    p.add_argument("--gamma-mev", type=float, default=1.0, help="Lorentzian FWHM, meV")
    p.add_argument("--mode", choices=("ed", "analytic"), default="ed")
    p.add_argument("--state", choices=STATE_KINDS, default="thermal")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--workers", type=int, default=None, help="worker processes (env DICKE_QFI_WORKERS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dicke-qfi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qfi-scan", help="maximized QFI along a coupling grid")
    _add_common(p)
    p.add_argument("--converge-cutoff", action="store_true",
                   help="double the photon cutoff until F_Q^Max changes < 1e-6 relative")
    p.set_defaults(func=cmd_qfi_scan)

    p = sub.add_parser("phase-diagram", help="analytic f_Q^Max over (kappa, G) or (T, G)")
    _add_common(p)
    p.add_argument("--axis", choices=("kappa", "temp"), default="kappa")
    p.add_argument("--kappa-min", type=float, default=0.0)
    p.add_argument("--kappa-max", type=float, default=0.95)
    p.add_argument("--kappa-steps", type=int, default=20)
    p.add_argument("--t-min", type=float, default=0.0)
    p.add_argument("--t-max", type=float, default=300.0)
    p.add_argument("--t-steps", type=int, default=7)
    p.set_defaults(func=cmd_phase_diagram)

    p = sub.add_parser("spectrum", help="synthesize an absorption spectrum and invert it to QFI")
    _add_common(p)
    p.add_argument("--fock", type=int, nargs=2, metavar=("N_PLUS", "N_MINUS"), default=None,
                   help="pump-probe on the polariton Fock state instead of the thermal state")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("witness", help="k-producibility thresholds and depth bound")
    _add_common(p)
    p.add_argument("--widths", type=float, nargs="+", default=None, help="local spectral widths")
    p.add_argument("--f", type=float, default=None, help="measured total QFI")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("compare", help="ED against the thermodynamic-limit formula")
    _add_common(p)
    p.add_argument("--nb-list", type=int, nargs="+", default=[8, 16, 32])
    p.add_argument("--cutoff-list", type=int, nargs="+", default=None)
    p.add_argument("--tolerance", type=float, default=0.05, help="max relative deviation at the last N_B")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.workers is None:
            args.workers = default_workers()
        table, code = args.func(args)
        if args.command == "spectrum":
            # the spectrum itself went to --out; the summary goes to stdout
            sys.stdout.write(table.render(args.format))
        else:
            emit(table.render(args.format), args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, SpectrumError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return code


if __name__ == "__main__":
    raise SystemExit(main())
