"""Thermodynamic-limit solution of the squeezed Dicke model.

Classical minimum, Holstein-Primakoff + Bogoliubov polariton modes and the
closed-form per-molecule QFI for thermal and polariton Fock states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .hilbert import K_B_EV, ModelParams

KAPPA_C = 1.0
KAPPA_EW = math.sqrt((math.sqrt(5) - 1) / 2)
DIRECTIONS = ("x", "y", "z")


@dataclass(frozen=True)
class PolaritonSolution:
    theta: float
    alpha_per_sqrtN: float
    omega_plus: float
    omega_minus: float
    zeta: float
    zero_point: float  # E_0 without the extensive term
    zero_point_extensive: float  # coefficient of N_B in E_0
    u: np.ndarray
    v: np.ndarray
    omega_c_tilde: float
    omega_m_tilde: float

    @property
    def photon_weight_minus(self) -> float:
        return math.sin(self.zeta / 2) ** 2

    @property
    def matter_weight_minus(self) -> float:
        return math.cos(self.zeta / 2) ** 2


@dataclass(frozen=True)
class StateSpec:
    """Thermal state at temperature (K) or polariton Fock state |n+, n->."""

    kind: str = "thermal"
    temperature: float = 0.0
    n_plus: int = 0
    n_minus: int = 0

    def __post_init__(self):
        if self.kind not in ("thermal", "fock"):
            raise ValueError(f"unknown state kind {self.kind!r}")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0 K")
        if self.n_plus < 0 or self.n_minus < 0:
            raise ValueError("occupations must be non-negative")

    @classmethod
    def thermal(cls, temperature: float = 0.0) -> "StateSpec":
        return cls("thermal", temperature=temperature)

    @classmethod
    def fock(cls, n_plus: int = 0, n_minus: int = 0) -> "StateSpec":
        return cls("fock", n_plus=n_plus, n_minus=n_minus)


@dataclass(frozen=True)
class FqValue:
    value: float
    direction: str
    divergent: bool = False


def critical_coupling(params: ModelParams) -> Optional[float]:
    """G_c for kappa < 1; None when the superradiant transition is forbidden."""
    if params.kappa >= KAPPA_C:
        return None
    return math.sqrt(params.omega_m * params.omega_c / (4 * (1 - params.kappa)))


def _one_minus_cos_theta(params: ModelParams) -> float:
    """1 - cos(theta) on the superradiant branch, written to avoid cancellation near G_c."""
    gc = critical_coupling(params)
    if gc is None or params.G <= gc:
        return 0.0
    g = params.G
    return (1 - params.kappa) * (g - gc) * (g + gc) / g ** 2


def classical_minimum(params: ModelParams) -> tuple[float, float]:
    """(theta, alpha / sqrt(N_B)) at the non-negative classical minimum."""
    d = _one_minus_cos_theta(params)
    if d == 0.0:
        return 0.0, 0.0
    cos_t = 1.0 - d
    sin_t = math.sqrt(d * (2 - d))
    theta = math.atan2(sin_t, cos_t)
    return theta, params.omega_m / (4 * params.G) * sin_t / cos_t


def polariton_solution(params: ModelParams) -> PolaritonSolution:
    wc, wm, g, kappa = params.omega_c, params.omega_m, params.G, params.kappa
    theta, alpha = classical_minimum(params)
    d = _one_minus_cos_theta(params)
    cos_t = 1.0 - d
    sin2_t = d * (2 - d)
    wc_t = wc + 4 * kappa * g ** 2 / wm
    wm_t = wm / cos_t

    # dynamical matrix in mass-weighted coordinates: [[wc*wc_t, c], [c, wm_t^2]]
    m11 = wc * wc_t
    m22 = wm_t ** 2
    half_diff = 0.5 * (m11 - m22)
    coupling_sq = 4 * g ** 2 * wc * wm * cos_t
    root = math.hypot(half_diff, math.sqrt(coupling_sq))
    mean = 0.5 * (m11 + m22)
    if d > 0:
        det = m11 * m22 * sin2_t
    else:
        gc = critical_coupling(params)
        # normal phase: det = wc*wm*4(1-kappa)(G_c^2 - G^2), or wc*wm*(wc*wm + 4(kappa-1)G^2)
        if gc is not None:
            det = wc * wm * 4 * (1 - kappa) * (gc - g) * (gc + g)
        else:
            det = wc * wm * (wc * wm + 4 * (kappa - 1) * g ** 2)
    om_plus = math.sqrt(mean + root)
    om_minus = math.sqrt(max(det, 0.0) / (mean + root))

    cos_zeta = half_diff / root if root > 0 else 1.0
    zeta = math.acos(max(-1.0, min(1.0, cos_zeta)))
    cz, sz = math.cos(zeta / 2), math.sin(zeta / 2)

    nu = np.array([wc, wm_t])  # kinetic coefficients of photon and matter quadratures
    omegas = np.array([om_plus, om_minus])
    rot = np.array([[cz, -sz], [sz, cz]])  # columns: (+, -) normal modes
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = 2 * np.sqrt(np.outer(nu, omegas))
        u = rot * (nu[:, None] + omegas[None, :]) / denom
        v = rot * (nu[:, None] - omegas[None, :]) / denom

    zero_point = 0.5 * (om_plus + om_minus - wc - wm_t)
    extensive = -wm_t * math.sin(theta / 2) ** 4
    return PolaritonSolution(
        theta=theta,
        alpha_per_sqrtN=alpha,
        omega_plus=om_plus,
        omega_minus=om_minus,
        zeta=zeta,
        zero_point=zero_point,
        zero_point_extensive=extensive,
        u=u,
        v=v,
        omega_c_tilde=wc_t,
        omega_m_tilde=wm_t,
    )


def polariton_energies_main_text(params: ModelParams) -> tuple[float, float]:
    """Omega_+- written with the dressed frequencies, as a cross-check on polariton_solution."""
    sol = polariton_solution(params)
    wc, wm, g = params.omega_c, params.omega_m, params.G
    a = 0.5 * (sol.omega_c_tilde * wc + sol.omega_m_tilde ** 2)
    b = math.sqrt((0.5 * (sol.omega_c_tilde * wc - sol.omega_m_tilde ** 2)) ** 2
                  + 4 * g ** 2 * wc * wm ** 2 / sol.omega_m_tilde)
    return math.sqrt(a + b), math.sqrt(max(a - b, 0.0))


def _w_over_omega(omega: float, state: StateSpec, n: int) -> tuple[float, bool]:
    """W / Omega for one mode; flags the T=0, Omega=0 divergence."""
    if state.kind == "fock":
        w = 2 * n + 1
        if omega == 0:
            return math.inf, True
        return w / omega, False
    if state.temperature == 0:
        if omega == 0:
            return math.inf, True
        return 1.0 / omega, False
    kt = K_B_EV * state.temperature
    x = omega / (2 * kt)
    if x < 1e-8:
        return 1.0 / (2 * kt), False
    return math.tanh(x) / omega, False


def _w_times_omega(omega: float, state: StateSpec, n: int) -> float:
    if state.kind == "fock":
        return (2 * n + 1) * omega
    if state.temperature == 0:
        return omega
    return math.tanh(omega / (2 * K_B_EV * state.temperature)) * omega


def rotated_fq(params: ModelParams, state: StateSpec) -> tuple[float, float, bool]:
    """(f_Q[S^x'], f_Q[S^y'], divergent) in the frame rotated to the classical minimum."""
    sol = polariton_solution(params)
    sp, cm = math.sin(sol.zeta / 2) ** 2, math.cos(sol.zeta / 2) ** 2
    wp, div_p = _w_over_omega(sol.omega_plus, state, state.n_plus)
    wmn, div_m = _w_over_omega(sol.omega_minus, state, state.n_minus)
    wm_t = sol.omega_m_tilde
    term_p = sp * wp if sp > 0 else 0.0
    term_m = cm * wmn if cm > 0 else 0.0
    fx = wm_t * (term_p + term_m)
    div_p, div_m = div_p and sp > 0, div_m and cm > 0
    fy = (sp * _w_times_omega(sol.omega_plus, state, state.n_plus)
          + cm * _w_times_omega(sol.omega_minus, state, state.n_minus)) / wm_t
    return fx, fy, div_p or div_m


def f_q_analytic(params: ModelParams, state: StateSpec, direction: str = "x") -> FqValue:
    """Per-molecule QFI of the collective spin along x, y or z."""
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    fx_r, fy_r, divergent = rotated_fq(params, state)
    theta, _ = classical_minimum(params)
    if direction == "x":
        value = math.cos(theta) ** 2 * fx_r
    elif direction == "y":
        value = fy_r
    else:
        s2 = math.sin(theta) ** 2
        value = s2 * fx_r if s2 > 0 else 0.0
    return FqValue(value, direction, divergent and direction != "y")


def f_q_max_analytic(params: ModelParams, state: StateSpec) -> FqValue:
    vals = [f_q_analytic(params, state, d) for d in DIRECTIONS]
    best = max(vals, key=lambda r: r.value)
    return best


def asymptotic_fq_x(kappa: float) -> float:
    """T=0 limit of f_Q[S^x] as G -> infinity."""
    if kappa < 1:
        return kappa ** 2 / math.sqrt(1 - kappa ** 2)
    if kappa == 1:
        return math.inf
    return 1 / math.sqrt(1 - 1 / kappa)


def kappa_ew() -> float:
    """Positive root of kappa^4 + kappa^2 - 1 = 0."""
    return brentq(lambda k: k ** 4 + k ** 2 - 1, 0.0, 1.0, xtol=1e-15)


def g_ew(params: ModelParams, tol: float = 1e-6, g_max_factor: float = 1e8,
         use_asymptote: bool = True) -> Optional[float]:
    """Largest coupling where the T=0 maximized QFI still exceeds 1 (the EW boundary).

    Returns None when no such boundary exists (kappa >= kappa_ew, or no
    superradiant branch). With ``use_asymptote=False`` the large-G limit is
    not consulted and the search simply gives up past ``g_max_factor * G_c``.
    """
    gc = critical_coupling(params)
    if gc is None:
        return None
    if use_asymptote and asymptotic_fq_x(params.kappa) >= 1:
        return None
    t0 = StateSpec.thermal(0.0)

    def excess(g):
        return f_q_max_analytic(params.replace(G=g), t0).value - 1.0

    lo = gc * (1 + 1e-9)
    hi = 2 * gc
    while excess(hi) > 0:
        lo, hi = hi, hi * 2
        if hi > g_max_factor * gc:
            return None
    return brentq(excess, lo, hi, xtol=tol, rtol=1e-12)


def ew_onset_kappa(tol: float = 1e-6, g_max_factor: float = 1e8) -> float:
    """Smallest kappa at which the numerical G_ew search runs off to infinity."""

    def finite(kappa):
        return g_ew(ModelParams(kappa=kappa), g_max_factor=g_max_factor, use_asymptote=False) is not None

    lo, hi = 0.0, 0.999
    if not finite(lo) or finite(hi):
        raise RuntimeError("G_ew onset is not bracketed by [0, 0.999]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if finite(mid) else (lo, mid)
    return 0.5 * (lo + hi)


def finite_t_cap(params: ModelParams, temperature: float) -> float:
    """Finite-temperature height of the critical QFI peak: r^2/(r^2+1) * omega_m / 2T."""
    if params.kappa >= 1:
        raise ValueError("no critical point for kappa >= 1")
    if temperature <= 0:
        raise ValueError("the cap needs T > 0")
    r = (params.omega_c / params.omega_m) / math.sqrt(1 - params.kappa)
    return r ** 2 / (r ** 2 + 1) * params.omega_m / (2 * K_B_EV * temperature)


def critical_scaling(params: ModelParams, side: str = "below", temperature: float = 0.0,
                     n_points: int = 40, window=(1e-6, 1e-3)) -> float:
    """T=0: log-log slope of f_Q^Max against |G - G_c|. T>0: the finite-T cap."""
    gc = critical_coupling(params)
    if gc is None:
        raise ValueError("no critical point for kappa >= 1")
    if side not in ("below", "above"):
        raise ValueError("side must be 'below' or 'above'")
    if temperature > 0:
        return finite_t_cap(params, temperature)
    rel = np.geomspace(window[0], window[1], n_points)
    sign = -1 if side == "below" else 1
    t0 = StateSpec.thermal(0.0)
    f = np.array([f_q_max_analytic(params.replace(G=gc * (1 + sign * r)), t0).value for r in rel])
    slope, _ = np.polyfit(np.log(rel * gc), np.log(f), 1)
    return float(slope)
