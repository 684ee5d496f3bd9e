"""Quantum Fisher information, direction maximization and k-producibility witnesses."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Optional, Sequence

import numpy as np

from .spectral import MixedState

PAIR_WEIGHT_CUTOFF = 1e-14
ORACLE_MAX_PARTICLES = 8


@dataclass(frozen=True)
class QfiResult:
    value: float
    direction: Optional[np.ndarray]
    per_direction: np.ndarray  # 3x3 matrix F^{ab} over (x, y, z)

    @property
    def label(self) -> str:
        """Dominant Cartesian axis of the optimal direction."""
        return "xyz"[int(np.argmax(np.abs(self.direction)))]


@dataclass(frozen=True)
class WitnessSpec:
    """Local spectral widths of the perturbed particles, stored in descending order."""

    widths: tuple
    n_total: Optional[int] = None
    n_perturbed: int = field(init=False)

    def __post_init__(self):
        w = sorted((float(x) for x in self.widths), reverse=True)
        if any(x < 0 for x in w):
            raise ValueError("widths must be non-negative")
        if not w:
            raise ValueError("at least one perturbed particle is required")
        object.__setattr__(self, "widths", tuple(w))
        object.__setattr__(self, "n_perturbed", len(w))
        if self.n_total is None:
            object.__setattr__(self, "n_total", len(w))
        elif self.n_total < len(w):
            raise ValueError("n_total must be >= the number of perturbed particles")

    @classmethod
    def uniform(cls, n_perturbed: int, width: float = 1.0, n_total=None) -> "WitnessSpec":
        return cls((width,) * n_perturbed, n_total)


def _populated_pairs(weights: np.ndarray):
    """Indices of populated states and the pair coefficient matrix against all states.

    Row l runs over populated states, column l' over every basis state. For
    l' populated the symmetric coefficient 2 (p-p')^2/(p+p') appears once per
    ordering; for unpopulated l' both orderings are folded into 4 p_l.
    """
    p = np.asarray(weights, dtype=float)
    pop = np.flatnonzero(p > 0)
    pl = p[pop][:, None]
    pr = p[None, :]
    total = pl + pr
    with np.errstate(divide="ignore", invalid="ignore"):
        coeff = np.where(pr > 0, 2 * (pl - pr) ** 2 / total, 4 * pl)
    coeff[total < PAIR_WEIGHT_CUTOFF] = 0.0
    return pop, coeff


def _fisher_matrix(state: MixedState, ops: Sequence[np.ndarray]) -> np.ndarray:
    """F^{ab} = sum_{l,l'} 2 (p_l-p_l')^2/(p_l+p_l') Re(<l|A|l'><l'|B|l>).

    States outside the supplied basis are treated as unpopulated; their
    contribution is recovered through the completeness relation.
    """
    for op in ops:
        if op.shape != (state.dim, state.dim):
            raise ValueError(f"operator shape {op.shape} does not match state dimension {state.dim}")
    pop, coeff = _populated_pairs(state.weights)
    v = state.basis
    vpop = v[:, pop]
    p_pop = state.weights[pop]
    applied = [op @ vpop for op in ops]  # O|l> for populated l
    elems = [vpop.conj().T @ (op @ v) for op in ops]  # <l|O|l'>
    n = len(ops)
    f = np.zeros((n, n))
    for a in range(n):
        for b in range(a, n):
            # Re(<l|A|l'><l'|B|l>) = Re(A_ll' conj(B_ll')) for Hermitian B
            inside = np.sum(coeff * np.real(elems[a] * elems[b].conj()))
            # pairs (l, l'') with l'' orthogonal to the stored basis
            full = np.real(np.sum(applied[a].conj() * applied[b], axis=0))
            proj = np.real(np.sum(elems[a].conj() * elems[b], axis=1))
            outside = 4 * np.sum(p_pop * (full - proj))
            f[a, b] = f[b, a] = inside + outside
    return f


def qfi(state: MixedState, op: np.ndarray) -> float:
    """F_Q[rho, O] for rho given in its eigenbasis."""
    return float(_fisher_matrix(state, [op])[0, 0])


def qfi_matrix(state: MixedState, spins: Sequence[np.ndarray]) -> np.ndarray:
    return _fisher_matrix(state, spins)


def qfi_max(state: MixedState, spins: Sequence[np.ndarray]) -> QfiResult:
    """Maximize F_Q[rho, n.S] over unit vectors n via the 3x3 Fisher matrix."""
    f = _fisher_matrix(state, spins)
    vals, vecs = np.linalg.eigh(f)
    direction = vecs[:, -1]
    # sign convention: largest component positive
    if direction[np.argmax(np.abs(direction))] < 0:
        direction = -direction
    return QfiResult(float(vals[-1]), direction, f)


def variance_qfi(vector: np.ndarray, op: np.ndarray) -> float:
    """4 Var(O) of a pure state."""
    psi = np.asarray(vector).ravel()
    psi = psi / np.linalg.norm(psi)
    o_psi = op @ psi
    mean = np.vdot(psi, o_psi).real
    return float(4 * (np.vdot(o_psi, o_psi).real - mean ** 2))


def witness_threshold(spec: WitnessSpec, k: int) -> float:
    """Largest QFI reachable by a k-producible state: sum of squared block sums."""
    if int(k) != k or not 1 <= k <= spec.n_perturbed:
        raise ValueError(f"depth K must be an integer in [1, {spec.n_perturbed}], got {k}")
    w = spec.widths
    return float(sum(sum(w[i:i + k]) ** 2 for i in range(0, len(w), k)))


def thresholds(spec: WitnessSpec) -> list[float]:
    return [witness_threshold(spec, k) for k in range(1, spec.n_perturbed + 1)]


def entanglement_depth_bound(f_measured: float, spec: WitnessSpec) -> int:
    """Lower bound on the entanglement depth certified by a measured QFI."""
    if f_measured < 0:
        raise ValueError("QFI must be non-negative")
    depth = 1
    for k in range(1, spec.n_perturbed + 1):
        if f_measured > witness_threshold(spec, k):
            depth = k + 1
        else:
            break
    return min(depth, spec.n_perturbed)


# --- brute-force oracle -----------------------------------------------------

def set_partitions(items: Sequence[int], max_block: int):
    """All partitions of items into blocks of size <= max_block."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest, max_block):
        for i, block in enumerate(part):
            if len(block) < max_block:
                yield part[:i] + [[first] + block] + part[i + 1:]
        yield [[first]] + part


def _random_local_operator(width: float, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    u, _ = np.linalg.qr(z)
    offset = rng.normal()
    return u @ np.diag([offset + width / 2, offset - width / 2]) @ u.conj().T


def _kron_vectors(vecs):
    return reduce(lambda a, b: np.outer(a, b).ravel(), vecs)


def _block_ghz(vecs_max, vecs_min, block):
    """GHZ state of the block particles built from their local extremal eigenvectors."""
    hi = _kron_vectors([vecs_max[i] for i in block])
    lo = _kron_vectors([vecs_min[i] for i in block])
    return (hi + lo) / np.sqrt(2)


def producibility_oracle(widths: Sequence[float], k: int, seed: int = 0) -> float:
    """Max 4 Var(sum O_i) over products of block-GHZ states with blocks <= k.

    Every local operator is a randomly rotated 2x2 Hermitian matrix with the
    requested spectral width; states are assembled explicitly in the full
    2^N space.
    """
    n = len(widths)
    if n > ORACLE_MAX_PARTICLES:
        raise ValueError(f"oracle limited to N <= {ORACLE_MAX_PARTICLES} particles, got {n}")
    if not 1 <= k <= n:
        raise ValueError(f"K must be in [1, {n}]")
    rng = np.random.default_rng(seed)
    local = [_random_local_operator(w, rng) for w in widths]
    vmax, vmin = [], []
    for op in local:
        _, vec = np.linalg.eigh(op)
        vmin.append(vec[:, 0])
        vmax.append(vec[:, 1])
    eye = np.eye(2)
    total = sum(
        reduce(np.kron, [local[i] if j == i else eye for j in range(n)]) for i in range(n)
    )
    best = 0.0
    for part in set_partitions(range(n), k):
        order = [i for block in part for i in block]
        psi = _kron_vectors([_block_ghz(vmax, vmin, block) for block in part])
        # psi is in the particle order `order`; permute tensor axes back to 0..n-1
        psi = psi.reshape([2] * n).transpose(np.argsort(order)).ravel()
        best = max(best, variance_qfi(psi, total))
    return best
