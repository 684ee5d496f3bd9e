"""Bounded-mode absorption spectra and their inversion to QFI per molecule.

Spectra are in arbitrary units: the dipole scale and the overall
proportionality constant cancel in every ratio computed here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .hilbert import K_B_EV
from .spectral import EigenSystem, MixedState

CSV_HEADER = "omega_ev,absorption"
STICK_THRESHOLD = 1e-12
DEFAULT_POINTS = 4000
POINTS_PER_LINEWIDTH = 10
UNIFORM_TOL = 1e-12


class SpectrumError(ValueError):
    pass


class CoverageError(SpectrumError):
    """The frequency grid loses too much of the stick weight."""

    def __init__(self, lost_fraction: float, message: str):
        super().__init__(message)
        self.lost_fraction = lost_fraction


@dataclass(frozen=True)
class Spectrum:
    omega_grid: np.ndarray
    values: np.ndarray
    temperature: Optional[float] = None
    linewidth: Optional[float] = None

    def __post_init__(self):
        w = np.asarray(self.omega_grid, dtype=float)
        a = np.asarray(self.values, dtype=float)
        if w.ndim != 1 or w.shape != a.shape or len(w) < 2:
            raise SpectrumError("omega_grid and values must be 1-D arrays of equal length >= 2")
        steps = np.diff(w)
        if np.any(steps <= 0):
            raise SpectrumError("omega grid must be strictly ascending")
        if np.max(np.abs(steps - steps.mean())) > UNIFORM_TOL * (w[-1] - w[0]) + 1e-15:
            raise SpectrumError("omega grid must be uniform")
        if not np.all(np.isfinite(a)) or np.any(a < 0):
            raise SpectrumError("absorption values must be finite and non-negative")
        object.__setattr__(self, "omega_grid", w)
        object.__setattr__(self, "values", a)

    def integral(self, weights: Optional[np.ndarray] = None) -> float:
        y = self.values if weights is None else self.values * weights
        return float(np.trapezoid(y, self.omega_grid))


def kernel_weights(omega: np.ndarray, temperature: float) -> np.ndarray:
    """(1 - e^{-w/kT})^2 / (1 + e^{-w/kT}); the T=0 limit is 1 for w > 0."""
    omega = np.asarray(omega, dtype=float)
    if temperature < 0:
        raise ValueError("temperature must be >= 0 K")
    if temperature == 0:
        return (omega > 0).astype(float)
    x = omega / (K_B_EV * temperature)
    return np.expm1(-x) ** 2 / (1 + np.exp(-x))


def populations_in(eig: EigenSystem, state: Union[MixedState, np.ndarray], tol: float = 1e-8) -> np.ndarray:
    """Occupations of the eigenstates of ``eig``; the state must be diagonal in that basis."""
    if not isinstance(state, MixedState):
        p = np.asarray(state, dtype=float)
        if p.shape != eig.energies.shape:
            raise ValueError("population vector does not match the eigensystem")
        return p
    if state.basis.shape == eig.vectors.shape and state.basis is eig.vectors:
        return state.weights
    overlap = eig.vectors.conj().T @ state.basis
    rho = (overlap * state.weights) @ overlap.conj().T
    p = np.real(np.diag(rho)).copy()
    off = rho - np.diag(np.diag(rho))
    if np.max(np.abs(off), initial=0.0) > tol:
        raise ValueError("state carries coherences between eigenstates; spectrum synthesis needs a stationary state")
    p[p < 0] = 0.0
    return p / p.sum()


def stick_spectrum(eig: EigenSystem, state, dipole: np.ndarray, fold_emission: bool = False,
                   threshold: float = STICK_THRESHOLD):
    """Transition frequencies, weights p_l |<l|D|l'>|^2 and final-state indices.

    Only upward transitions are kept unless ``fold_emission`` is set, in which
    case downward (stimulated emission) lines are mirrored to |w|. Lines below
    ``threshold`` times the strongest line are discarded.
    """
    p = populations_in(eig, state)
    pop = np.flatnonzero(p > 0)
    elems = eig.vectors[:, pop].conj().T @ (dipole @ eig.vectors)
    weight = p[pop][:, None] * np.abs(elems) ** 2
    freq = eig.energies[None, :] - eig.energies[pop][:, None]
    final = np.broadcast_to(np.arange(len(eig.energies))[None, :], freq.shape)
    if fold_emission:
        freq = np.abs(freq)
    keep = freq > 1e-12
    freq, weight, final = freq[keep], weight[keep], final[keep]
    if weight.size == 0:
        return freq, weight, final
    keep = weight >= threshold * weight.max()
    return freq[keep], weight[keep], final[keep]


def lorentzian(omega: np.ndarray, center, gamma) -> np.ndarray:
    """Area-normalized Lorentzian with full width at half maximum gamma."""
    hw = 0.5 * gamma
    return (hw / math.pi) / ((omega - center) ** 2 + hw ** 2)


def default_grid(frequencies: np.ndarray, gamma: float, n_points: int = DEFAULT_POINTS) -> np.ndarray:
    """Uniform grid from 0 to w_max + max(20 gamma, w_max), at least 10 points per linewidth."""
    if len(frequencies) == 0:
        raise SpectrumError("no transitions to place on a grid")
    w_max = float(np.max(frequencies))
    hi = w_max + max(20 * gamma, w_max)
    n = max(n_points, int(math.ceil(hi / (gamma / POINTS_PER_LINEWIDTH))) + 1)
    return np.linspace(0.0, hi, n)


def lost_weight_fraction(frequencies, weights, gammas, lo: float, hi: float) -> float:
    """Fraction of Lorentzian area falling in (0, lo) or above hi.

    Area below zero frequency is clipped by design and not counted as lost.
    """
    hw = 0.5 * np.asarray(gammas, dtype=float)
    f = np.asarray(frequencies, dtype=float)
    inside = (np.arctan((hi - f) / hw) - np.arctan((max(lo, 0.0) - f) / hw)) / math.pi
    positive = 0.5 + np.arctan(f / hw) / math.pi
    lost = np.asarray(weights) * np.clip(positive - inside, 0.0, None)
    return float(lost.sum() / np.sum(weights))


def _broaden(grid, freq, weight, gammas, chunk=256):
    out = np.zeros_like(grid)
    for i in range(0, len(freq), chunk):
        sl = slice(i, i + chunk)
        out += lorentzian(grid[:, None], freq[None, sl], gammas[None, sl]) @ weight[sl]
    return out


def synthesize_spectrum(eig: EigenSystem, state, dipole: np.ndarray, gamma: float,
                        grid: Optional[np.ndarray] = None, *,
                        gamma_per_state: Optional[np.ndarray] = None,
                        fold_emission: bool = False,
                        max_lost_fraction: float = 1e-2,
                        temperature: Optional[float] = None) -> Spectrum:
    """Lorentzian-broadened absorption of ``state`` probed by ``dipole``.

    ``gamma_per_state`` overrides the linewidth per final eigenstate.
    """
    if not gamma > 0:
        raise ValueError("linewidth gamma must be > 0")
    freq, weight, final = stick_spectrum(eig, state, dipole, fold_emission=fold_emission)
    gammas = np.full(freq.shape, float(gamma))
    if gamma_per_state is not None:
        gammas = np.asarray(gamma_per_state, dtype=float)[final]
        if np.any(gammas <= 0):
            raise ValueError("per-state linewidths must be > 0")
    if grid is None:
        grid = default_grid(freq, max(gammas.min(), 1e-300) if len(gammas) else gamma)
    grid = np.asarray(grid, dtype=float)
    if len(freq):
        lo, hi = grid[0], grid[-1]
        lost = lost_weight_fraction(freq, weight, gammas, lo, hi)
        outside = np.any((freq < lo) | (freq > hi))
        if outside or lost > max_lost_fraction:
            raise CoverageError(
                lost,
                f"grid [{lo:.6g}, {hi:.6g}] eV loses {lost:.3%} of the spectral weight"
                + (" and misses transition lines" if outside else ""),
            )
    values = _broaden(grid, freq, weight, gammas) if len(freq) else np.zeros_like(grid)
    if temperature is None and isinstance(state, MixedState):
        temperature = state.temperature
    return Spectrum(grid, values, temperature=temperature, linewidth=float(gamma))


def _check_temperatures(spec: Spectrum, bare: Spectrum, temperature: float):
    for s, name in ((spec, "sample"), (bare, "bare")):
        if s.temperature is not None and not math.isclose(s.temperature, temperature, rel_tol=1e-9, abs_tol=1e-12):
            raise SpectrumError(f"{name} spectrum temperature {s.temperature} K != {temperature} K")


def qfi_from_spectrum(spec: Spectrum, spec_bare: Spectrum, temperature: float) -> float:
    """Per-molecule QFI from kernel-weighted absorption relative to the bare sample."""
    _check_temperatures(spec, spec_bare, temperature)
    den = spec_bare.integral(kernel_weights(spec_bare.omega_grid, temperature))
    if not den > 0:
        raise SpectrumError("bare reference spectrum has zero kernel-weighted area")
    return spec.integral(kernel_weights(spec.omega_grid, temperature)) / den


def pump_probe_ratio(spec_excited: Spectrum, spec_bare_excited: Spectrum, n_plus: int, n_minus: int) -> float:
    """Per-molecule QFI of |n+, n-> from excited-state absorption areas."""
    if n_plus < 0 or n_minus < 0:
        raise ValueError("occupations must be non-negative")
    den = spec_bare_excited.integral()
    if not den > 0:
        raise SpectrumError("bare reference spectrum has zero area")
    return (n_plus + n_minus + 1) * spec_excited.integral() / den


def bare_polariton_reference(n_plus: int, n_minus: int, n_molecules: int, omega_m: float,
                             gamma: float, grid: np.ndarray, mu: float = 1.0) -> Spectrum:
    """Excited-state absorption of |n+, n-> at vanishing coupling and resonance, N_B -> infinity.

    Each polariton is half matter; the dipole 2 mu S^x then carries total
    squared weight mu^2 N_B (n+ + n- + 1), all at omega_m (emission folded).
    """
    area = mu ** 2 * n_molecules * (n_plus + n_minus + 1)
    grid = np.asarray(grid, dtype=float)
    values = area * lorentzian(grid, omega_m, gamma)
    return Spectrum(grid, values, linewidth=gamma)


def write_spectrum_csv(spec: Spectrum, path) -> None:
    path = Path(path)
    lines = [CSV_HEADER]
    if spec.temperature is not None:
        lines.append(f"# temperature_k={spec.temperature!r}")
    if spec.linewidth is not None:
        lines.append(f"# linewidth_ev={spec.linewidth!r}")
    lines.extend(f"{w!r},{a!r}" for w, a in zip(spec.omega_grid.tolist(), spec.values.tolist()))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write spectrum to {path}: {exc.strerror}") from exc


def read_spectrum_csv(path) -> Spectrum:
    path = Path(path)
    meta = {}
    omega, values = [], []
    header_seen = False
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, sep, val = line[1:].strip().partition("=")
                if sep:
                    meta[key.strip()] = val.strip()
                continue
            if not header_seen:
                if line != CSV_HEADER:
                    raise SpectrumError(f"{path}: line {lineno}: expected header '{CSV_HEADER}', got {line!r}")
                header_seen = True
                continue
            fields = line.split(",")
            if len(fields) != 2:
                raise SpectrumError(f"{path}: line {lineno}: expected 2 fields, got {len(fields)}")
            try:
                w, a = float(fields[0]), float(fields[1])
            except ValueError:
                raise SpectrumError(f"{path}: line {lineno}: non-numeric field in {line!r}") from None
            if omega and w <= omega[-1]:
                raise SpectrumError(f"{path}: line {lineno}: omega grid is not strictly ascending ({w} after {omega[-1]})")
            omega.append(w)
            values.append(a)
    if not header_seen:
        raise SpectrumError(f"{path}: line 1: missing header '{CSV_HEADER}'")
    temperature = float(meta["temperature_k"]) if "temperature_k" in meta else None
    linewidth = float(meta["linewidth_ev"]) if "linewidth_ev" in meta else None
    return Spectrum(np.array(omega), np.array(values), temperature=temperature, linewidth=linewidth)
