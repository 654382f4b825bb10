"""Key-carrying quantum states, partial-transpose tests, and scheme memory bounds.

Dense complex matrices with full eigendecompositions; the intended scale
(key times shield dimension up to a few dozen) keeps that cheap.  All
bound formulas use base-2 logarithms, matching bit units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_EIG_TOL = 1e-9
UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class DenseOperator:
    """Complex square matrix with declared tensor-factor dimensions."""

    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator must be a square matrix")
        if int(np.prod(self.dims)) != m.shape[0]:
            raise ValueError(f"factor dims {self.dims} do not multiply to size {m.shape[0]}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return bool(np.abs(self.matrix - self.matrix.conj().T).max() <= tol)

    def min_eigenvalue(self) -> float:
        if not self.is_hermitian():
            raise ValueError("eigenvalue test requires a Hermitian operator")
        return float(np.linalg.eigvalsh(self.matrix).min())

    def check_state(self) -> None:
        """Raise unless Hermitian, unit trace, and positive semidefinite within tolerance."""
        if not self.is_hermitian():
            raise ValueError("state is not Hermitian within tolerance")
        if abs(self.trace() - 1.0) > TRACE_TOL:
            raise ValueError(f"state trace {self.trace()} differs from one")
        if self.min_eigenvalue() < -PSD_EIG_TOL:
            raise ValueError(f"state has negative eigenvalue {self.min_eigenvalue()}")


def partial_transpose(op: DenseOperator, subsystems: Sequence[int]) -> DenseOperator:
    """Transpose the given tensor factors; an exact index permutation."""
    dims = op.dims
    n = len(dims)
    subsystems = sorted(set(subsystems))
    if any(s < 0 or s >= n for s in subsystems):
        raise ValueError("subsystem index out of range for the declared factors")
    tensor = op.matrix.reshape(dims + dims)
    perm = list(range(2 * n))
    for s in subsystems:
        perm[s], perm[n + s] = perm[n + s], perm[s]
    out = tensor.transpose(perm).reshape(op.size, op.size)
    return DenseOperator(out, dims)


def is_ppt(op: DenseOperator, subsystems: Sequence[int] | None = None, tol: float = PSD_EIG_TOL) -> bool:
    """Positivity of the partial transpose: min eigenvalue >= −tol.

    For the four-factor layout (key A, key B, shield A', shield B') the
    default transposes Bob's share (factors 1 and 3); for two factors, the
    second.
    """
    if subsystems is None:
        if len(op.dims) == 4:
            subsystems = (1, 3)
        elif len(op.dims) == 2:
            subsystems = (1,)
        else:
            raise ValueError("no default bipartition for this factor count; pass subsystems")
    return partial_transpose(op, subsystems).min_eigenvalue() >= -tol


# ---------------------------------------------------------------------------
# private states
# ---------------------------------------------------------------------------


def build_private_state(
    d_k: int,
    d_s: int,
    sigma: np.ndarray | None = None,
    unitaries: Sequence[np.ndarray] | None = None,
) -> DenseOperator:
    """Key-correlated state (1/d_k)·Σ_ij |ii><jj| ⊗ U_i σ U_j† on factors (k, k, s, s).

    ``sigma`` is a state on the two shield factors (default maximally
    mixed); ``unitaries`` one unitary per key value (default identities).
    Measuring the key factors in the canonical basis yields perfectly
    correlated uniform outcomes.
    """
    if d_k < 2 or d_s < 1:
        raise ValueError("need key dimension >= 2 and shield dimension >= 1")
    ds2 = d_s * d_s
    if sigma is None:
        sigma = np.eye(ds2) / ds2
    sigma = np.asarray(sigma, dtype=complex)
    if sigma.shape != (ds2, ds2):
        raise ValueError(f"shield state must be {ds2}x{ds2}")
    DenseOperator(sigma, (d_s, d_s)).check_state()
    if unitaries is None:
        unitaries = [np.eye(ds2) for _ in range(d_k)]
    if len(unitaries) != d_k:
        raise ValueError("need one twisting unitary per key value")
    us = []
    for u in unitaries:
        u = np.asarray(u, dtype=complex)
        if u.shape != (ds2, ds2):
            raise ValueError(f"twisting unitaries must be {ds2}x{ds2}")
        defect = np.linalg.norm(u.conj().T @ u - np.eye(ds2), 2)
        if defect > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary: ||U†U − 1|| = {defect:.2e}")
        us.append(u)
    n = d_k * d_k * ds2
    out = np.zeros((n, n), dtype=complex)
    for i in range(d_k):
        xi = us[i] @ sigma
        for j in range(d_k):
            block = xi @ us[j].conj().T / d_k
            r = (i * d_k + i) * ds2
            c = (j * d_k + j) * ds2
            out[r:r + ds2, c:c + ds2] = block
    gamma = DenseOperator(out, (d_k, d_k, d_s, d_s))
    gamma.check_state()
    return gamma


def key_attack(gamma: DenseOperator) -> DenseOperator:
    """Dephase the key part: keep only the |ii><ii| key blocks.

    This is the state after an adversarial measurement of the key part; on
    key-correlated states it is idempotent and commutes with measuring the
    key in the canonical basis.
    """
    if len(gamma.dims) != 4:
        raise ValueError("expected factors (key, key, shield, shield)")
    d_k = gamma.dims[0]
    ds2 = gamma.dims[2] * gamma.dims[3]
    out = np.zeros_like(gamma.matrix)
    for i in range(d_k):
        r = (i * d_k + i) * ds2
        out[r:r + ds2, r:r + ds2] = gamma.matrix[r:r + ds2, r:r + ds2]
    return DenseOperator(out, gamma.dims)


def measure_key_part(gamma: DenseOperator) -> np.ndarray:
    """Outcome table p(a,b) of canonical-basis measurements on the key factors."""
    if len(gamma.dims) != 4:
        raise ValueError("expected factors (key, key, shield, shield)")
    d_k = gamma.dims[0]
    ds2 = gamma.dims[2] * gamma.dims[3]
    table = np.zeros((d_k, d_k))
    for a in range(d_k):
        for b in range(d_k):
            r = (a * d_k + b) * ds2
            table[a, b] = float(np.trace(gamma.matrix[r:r + ds2, r:r + ds2]).real)
    return table


def swap_matrix(d: int) -> np.ndarray:
    """Swap gate F = Σ |ij><ji| on two d-dimensional factors."""
    f = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            f[i * d + j, j * d + i] = 1.0
    return f


def build_omega(d_s: int) -> DenseOperator:
    """Swap-shielded key-correlated state on factors (2, 2, d_s, d_s).

    Block form ½·[[I/d_s², 0, 0, F/d_s²], [0,0,0,0], [0,0,0,0],
    [F/d_s², 0, 0, I/d_s²]] with F the swap gate; the off-diagonal key
    block has unit trace norm, the hallmark of an exact key bit.  The
    d_s = 3 member is the documented case with a strictly positive gap
    between distillable and repeatable key.
    """
    if d_s < 2:
        raise ValueError("shield dimension must be at least 2")
    ds2 = d_s * d_s
    eye = np.eye(ds2) / ds2
    f = swap_matrix(d_s) / ds2
    n = 4 * ds2
    out = np.zeros((n, n))
    out[0:ds2, 0:ds2] = eye / 2
    out[3 * ds2:, 3 * ds2:] = eye / 2
    out[0:ds2, 3 * ds2:] = f / 2
    out[3 * ds2:, 0:ds2] = f / 2
    op = DenseOperator(out, (2, 2, d_s, d_s))
    op.check_state()
    return op


OMEGA_STRICT_GAP_SHIELD_DIM = 3  # smallest documented strictly-positive-gap case


# ---------------------------------------------------------------------------
# closed-form scheme bounds
# ---------------------------------------------------------------------------


def binary_entropy(p: float) -> float:
    """h(p) in bits with h(0) = h(1) = 0."""
    if p < -1e-15 or p > 1 + 1e-15:
        raise ValueError("binary entropy argument must lie in [0, 1]")
    p = min(max(p, 0.0), 1.0)
    if p == 0.0 or p == 1.0:
        return 0.0
    return float(-p * math.log2(p) - (1 - p) * math.log2(1 - p))


def scheme_memory(d_k: int, d_s: int, delta: int) -> float:
    """Total hub memory in qubits: Δ links, log2(d_k·d_s) qubits per link share."""
    if d_k < 2 or d_s < 1 or delta < 1:
        raise ValueError("need d_k >= 2, d_s >= 1, delta >= 1")
    return delta * math.log2(d_k * d_s)


@dataclass(frozen=True)
class OverheadResult:
    v_bound: float
    theta: float
    eta: float


def thm1_overhead(d_k: int, d_s: int, theta: float, delta: int) -> float:
    """One-way-scheme overhead bound Δ·log2(d_k d_s)·(1 − 1/(2 − θ/log2 d_k)).

    Admissible for 0 <= θ < log2(d_k); at θ = 0 this is half the scheme
    memory.  Linear in the hub degree Δ.
    """
    if d_k < 2 or d_s < 1 or delta < 1:
        raise ValueError("need d_k >= 2, d_s >= 1, delta >= 1")
    log_dk = math.log2(d_k)
    if not 0 <= theta < log_dk:
        raise ValueError(f"theta must satisfy 0 <= theta < log2(d_k) = {log_dk}")
    return delta * math.log2(d_k * d_s) * (1.0 - 1.0 / (2.0 - theta / log_dk))


def lemma1_shield_bound(d_k: int, eps: float) -> float:
    """Shield-dimension lower bound (d_k − 1)/ε for ε-indistinguishable shields."""
    if d_k < 2:
        raise ValueError("need d_k >= 2")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    return (d_k - 1) / eps


def lemma2_bounds(d_k: int, d_s: int, eps: float) -> tuple[float, float]:
    """Approximation tradeoffs for ε-close states.

    Returns the shield lower bound ((d_k−1)/ε)(1 − ε d_k), valid for
    0 < ε < 1/d_k, and the distance lower bound (d_k−1)/(d_s + d_k(d_k−1)).
    """
    if d_k < 2 or d_s < 1:
        raise ValueError("need d_k >= 2, d_s >= 1")
    if not 0 < eps < 1 / d_k:
        raise ValueError(f"eps must lie in (0, 1/d_k) = (0, {1 / d_k})")
    shield = ((d_k - 1) / eps) * (1 - eps * d_k)
    distance = (d_k - 1) / (d_s + d_k * (d_k - 1))
    return shield, distance


def thm3_overhead(d_k: int, d_s: int, eps: float, m_total: float) -> OverheadResult:
    """Overhead bound M·(1 − log2(d_k)/(log2(d_k) + log2((d_k−1)/ε))).

    Returns the bound together with the repeatable-key cap
    θ = 2·log2(1+ε) and the distillable-key floor η = log2(d_k).
    """
    if d_k < 2 or d_s < 1:
        raise ValueError("need d_k >= 2, d_s >= 1")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    log_dk = math.log2(d_k)
    v = m_total * (1.0 - log_dk / (log_dk + math.log2((d_k - 1) / eps)))
    theta = 2.0 * math.log2(1.0 + eps)
    eta = log_dk
    return OverheadResult(v, theta, eta)


def thm5_overhead(d_k: int, d_s: int, eps: float, m_total: float, dim_h: float) -> OverheadResult:
    """Overhead bound for two-way schemes using nearly-key-correlated PPT states.

    V >= M·(1 − ε/2 − f(d_k, ε)) with
    f = (log2 d_k + (1+ε/2)·h((ε/2)/(1+ε/2))) /
        (log2 d_k + log2((d_k−1)/ε) + log2(1−ε d_k)),
    η = log2 d_k − 8ε·log2 d_k − 4h(ε), and
    θ = 2(√ε+ε)·log2(dim_h) + (1+2√ε+2ε)·h((√ε+ε)/(½+√ε+ε)).
    Admissible for (d_k−1)/(d_s + d_k(d_k−1)) <= ε < 1/d_k.
    """
    if d_k < 2 or d_s < 1:
        raise ValueError("need d_k >= 2, d_s >= 1")
    lower = (d_k - 1) / (d_s + d_k * (d_k - 1))
    if eps < lower:
        raise ValueError(f"eps = {eps} violates (d_k-1)/(d_s + d_k(d_k-1)) = {lower} <= eps")
    if eps >= 1 / d_k:
        raise ValueError(f"eps = {eps} violates eps < 1/d_k = {1 / d_k}")
    log_dk = math.log2(d_k)
    half = eps / 2.0
    f = (log_dk + (1 + half) * binary_entropy(half / (1 + half))) / (
        log_dk + math.log2((d_k - 1) / eps) + math.log2(1 - eps * d_k)
    )
    v = m_total * (1.0 - half - f)
    eta = log_dk - 8 * eps * log_dk - 4 * binary_entropy(eps)
    root = math.sqrt(eps) + eps
    theta = 2 * root * math.log2(dim_h) + (1 + 2 * math.sqrt(eps) + 2 * eps) * binary_entropy(root / (0.5 + root))
    return OverheadResult(v, theta, eta)


def thm5_denominator_positive(d_k: int, eps: float) -> bool:
    """Whether the f-denominator log2(d_k(d_k−1)(1−ε d_k)/ε) is positive.

    Past the sign change the printed bound exceeds the total memory and
    carries no information; sweeps restrict to the positive region.
    """
    return d_k * (d_k - 1) * (1 - eps * d_k) / eps > 1


# ---------------------------------------------------------------------------
# relayed key distribution with untrusted measurement
# ---------------------------------------------------------------------------


def mdi_capacity(q: float, eta1: float, eta2: float) -> float:
    """Secret-key capacity q·η1·η2 of the dual-rail relay prototype."""
    for name, v in (("q", q), ("eta1", eta1), ("eta2", eta2)):
        if not 0 <= v <= 1:
            raise ValueError(f"{name} must lie in [0, 1]")
    return q * eta1 * eta2


def repeaterless_bound(eta1: float, eta2: float) -> float:
    """Repeaterless cap min(η1, η2); never below the relay capacity."""
    for name, v in (("eta1", eta1), ("eta2", eta2)):
        if not 0 <= v <= 1:
            raise ValueError(f"{name} must lie in [0, 1]")
    return min(eta1, eta2)
