"""Classical secrecy quantifiers, device measurement, squashing, and the device norm.

This module works in floats (base-2 logarithms, normalization tolerance
``P_TOL``); everything upstream of it stays exact.  The intrinsic
information and the squashed quantities are heuristic upper estimates: the
search over post-processing channels and adversarial input strategies can
only overestimate the true infimum, never underestimate it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations, product
from typing import Callable, Sequence

import numpy as np

from .behavior import Behavior
from .extension import CompleteExtension, nsce

P_TOL = 1e-12


def snap_small(value: float, tol: float = P_TOL) -> float:
    """Clamp float dust below ``tol`` to an exact zero (output hygiene only)."""
    return 0.0 if abs(value) < tol else float(value)


# ---------------------------------------------------------------------------
# distributions and channels
# ---------------------------------------------------------------------------


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TripartiteDistribution:
    """Joint table P(a, b, e) with float probabilities.

    ``provenance`` records which measurement produced the distribution (for
    traceability of squashing sweeps); it does not affect equality of the
    numeric content.
    """

    table: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        t = _freeze(self.table)
        if t.ndim != 3:
            raise ValueError("expected a rank-3 joint table P(a,b,e)")
        if t.min() < -P_TOL:
            raise ValueError(f"negative probability {t.min()} below tolerance")
        if abs(t.sum() - 1.0) > P_TOL:
            raise ValueError(f"table sums to {t.sum()}, not 1")
        object.__setattr__(self, "table", t)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.table.shape


@dataclass(frozen=True)
class StochasticChannel:
    """Columnit-stochastic matrix p(f|e): column e is the distribution of f."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _freeze(self.matrix)
        if m.ndim != 2:
            raise ValueError("a channel is a matrix p(f|e)")
        if m.min() < -P_TOL:
            raise ValueError("channel entries must be nonnegative")
        colsums = m.sum(axis=0)
        if np.abs(colsums - 1.0).max() > 1e-9:
            raise ValueError("channel columns must sum to one")
        object.__setattr__(self, "matrix", m)

    @property
    def n_inputs(self) -> int:
        return self.matrix.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.matrix.shape[0]

    @staticmethod
    def identity(n: int) -> "StochasticChannel":
        return StochasticChannel(np.eye(n))

    @staticmethod
    def constant(n_in: int, n_out: int = 1) -> "StochasticChannel":
        m = np.zeros((n_out, n_in))
        m[0, :] = 1.0
        return StochasticChannel(m)


# ---------------------------------------------------------------------------
# entropic quantities (bits)
# ---------------------------------------------------------------------------


def shannon_entropy(p: np.ndarray) -> float:
    """Base-2 entropy with the 0·log0 = 0 convention."""
    p = np.asarray(p, dtype=float).ravel()
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def mutual_information(p_ab: np.ndarray) -> float:
    """I(A:B) in bits of a joint table."""
    p = np.asarray(p_ab, dtype=float)
    if abs(p.sum() - 1.0) > P_TOL or p.min() < -P_TOL:
        raise ValueError("not a probability table")
    ha = shannon_entropy(p.sum(axis=1))
    hb = shannon_entropy(p.sum(axis=0))
    return ha + hb - shannon_entropy(p)


def cond_mutual_information(p_abe) -> float:
    """I(A:B|E) = Σ_e p(e) I(A:B|E=e) in bits."""
    t = p_abe.table if isinstance(p_abe, TripartiteDistribution) else np.asarray(p_abe, dtype=float)
    if abs(t.sum() - 1.0) > P_TOL or t.min() < -P_TOL:
        raise ValueError("not a probability table")
    h_ae = shannon_entropy(t.sum(axis=1))
    h_be = shannon_entropy(t.sum(axis=0))
    h_e = shannon_entropy(t.sum(axis=(0, 1)))
    h_abe = shannon_entropy(t)
    return h_ae + h_be - h_e - h_abe


def _batch_cmi(p_abe: np.ndarray, channels: np.ndarray) -> np.ndarray:
    """I(A:B|F) for a stack of channels; channels has shape (k, F, E)."""
    joint = np.einsum("abe,kfe->kabf", p_abe, channels)
    joint = np.maximum(joint, 0.0)

    def h(x, axes):
        s = x.sum(axis=axes) if axes else x
        flat = s.reshape(s.shape[0], -1)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(flat > 0, flat * np.log2(np.where(flat > 0, flat, 1.0)), 0.0)
        return -terms.sum(axis=1)

    h_af = h(joint, (2,))
    h_bf = h(joint, (1,))
    h_f = h(joint, (1, 2))
    h_abf = h(joint, ())
    return h_af + h_bf - h_f - h_abf


# ---------------------------------------------------------------------------
# intrinsic information
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntrinsicConfig:
    """Search budget for the channel minimization.

    ``output_cap`` bounds |F| (default |E|; shrinking F below |E| is an
    external assumption documented in the package README), ``restarts``
    counts random refinement starts, ``det_enumeration_cap`` limits how many
    deterministic channels are enumerated exhaustively.
    """

    output_cap: int | None = None
    restarts: int = 32
    det_enumeration_cap: int = 4096
    refine_starts: int = 4
    refine_maxiter: int = 300
    refine_output_cap: int = 3
    seed: int = 0
    tol: float = 1e-9


@dataclass(frozen=True)
class IntrinsicResult:
    value: float
    channel: StochasticChannel
    evaluations: int
    converged: bool = True


def _deterministic_channels(n_e: int, n_f: int, cap: int) -> np.ndarray | None:
    if n_f ** n_e > cap:
        return None
    chans = np.zeros((n_f ** n_e, n_f, n_e))
    for k, assignment in enumerate(product(range(n_f), repeat=n_e)):
        for e, f in enumerate(assignment):
            chans[k, f, e] = 1.0
    return chans


def _project_channel(raw: np.ndarray, n_f: int, n_e: int) -> np.ndarray:
    m = np.abs(raw.reshape(n_f, n_e))
    colsums = m.sum(axis=0)
    dead = colsums <= 0
    m[:, dead] = 1.0 / n_f
    colsums = m.sum(axis=0)
    return m / colsums


def _product_split_channels(table: np.ndarray) -> list[np.ndarray]:
    """Channels that try to make every conditional a product, for 2x2 honest parts.

    I(A:B|F) vanishes iff each aggregated slice Σ_e Λ(f|e)·P(:,:,e) is
    singular.  When the distinct outcome slices are diagonal, antidiagonal,
    or single-corner matrices (as for vertex ensembles measured at fixed
    inputs), one group balancing the diagonal and antidiagonal products plus
    one group per leftover corner achieves that whenever the product
    intervals overlap; the construction below solves the balance exactly.
    """
    v_a, v_b, n_e = table.shape
    if v_a != 2 or v_b != 2 or n_e < 2:
        return []
    pools: list[tuple[np.ndarray, list[int]]] = []
    for e in range(n_e):
        col = table[:, :, e]
        for mat, idx in pools:
            if np.abs(mat / max(mat.sum(), 1e-300) - col / max(col.sum(), 1e-300)).max() < 1e-9:
                idx.append(e)
                break
        else:
            pools.append((col.copy(), [e]))
    agg = [sum(table[:, :, e] for e in idx) for _, idx in pools]
    diag = np.zeros(2)
    anti = np.zeros(2)
    corners = {(0, 0): [], (0, 1): [], (1, 0): [], (1, 1): []}
    kinds: list[tuple[str, tuple | None]] = []
    for m in agg:
        offd = m[0, 1] + m[1, 0]
        ond = m[0, 0] + m[1, 1]
        nonzero = [(a, b) for a in (0, 1) for b in (0, 1) if m[a, b] > 1e-14]
        if len(nonzero) == 1:
            kinds.append(("corner", nonzero[0]))
            corners[nonzero[0]].append(m[nonzero[0]])
        elif offd <= 1e-14 and ond > 0:
            kinds.append(("diag", None))
            diag += np.array([m[0, 0], m[1, 1]])
        elif ond <= 1e-14 and offd > 0:
            kinds.append(("anti", None))
            anti += np.array([m[0, 1], m[1, 0]])
        else:
            return []  # slices not of the structured kind
    mu = {c: float(sum(v)) for c, v in corners.items()}
    d0, d1 = float(diag[0]), float(diag[1])
    a0, a1 = float(anti[0]), float(anti[1])
    lhs_lo, lhs_hi = d0 * d1, (d0 + mu[(0, 0)]) * (d1 + mu[(1, 1)])
    rhs_lo, rhs_hi = a0 * a1, (a0 + mu[(0, 1)]) * (a1 + mu[(1, 0)])
    if lhs_lo > rhs_hi + 1e-18 or rhs_lo > lhs_hi + 1e-18:
        return []
    target = max(lhs_lo, rhs_lo)

    def solve_scale(base0, base1, add0, add1, tgt):
        # smallest q in [0,1] with (base0+q·add0)(base1+q·add1) = tgt
        if base0 * base1 >= tgt - 1e-30:
            return 0.0
        a = add0 * add1
        b = base0 * add1 + base1 * add0
        c = base0 * base1 - tgt
        if a <= 1e-30:
            return min(1.0, -c / b) if b > 1e-30 else 0.0
        disc = b * b - 4 * a * c
        q = (-b + math.sqrt(max(disc, 0.0))) / (2 * a)
        return min(1.0, max(0.0, q))

    q_diag = solve_scale(d0, d1, mu[(0, 0)], mu[(1, 1)], target)
    q_anti = solve_scale(a0, a1, mu[(0, 1)], mu[(1, 0)], target)
    share = {
        "diag": 1.0,
        "anti": 1.0,
        (0, 0): q_diag,
        (1, 1): q_diag,
        (0, 1): q_anti,
        (1, 0): q_anti,
    }
    leftover_group = {c: 1 + k for k, c in enumerate(sorted(c for c in corners if share[c] < 1.0))}
    n_f = 1 + len(leftover_group)
    if n_f < 2:
        n_f = 2
    chan = np.zeros((n_f, n_e))
    for (mat, idx), (kind, corner) in zip(pools, kinds):
        key = corner if kind == "corner" else kind
        s = share[key]
        for e in idx:
            chan[0, e] = s
            if s < 1.0:
                chan[leftover_group[corner], e] = 1.0 - s
    return [chan]


def intrinsic_information(
    p_abe,
    config: IntrinsicConfig | None = None,
    extra_channels: Sequence[StochasticChannel] = (),
) -> IntrinsicResult:
    """Upper estimate of I(A:B↓E): min over searched channels Λ of I(A:B|Λ(E)).

    The identity channel is always searched, so the result never exceeds
    I(A:B|E); adding channels through ``extra_channels`` can only lower it.
    The witness channel achieving the reported value is returned.
    """
    cfg = config or IntrinsicConfig()
    dist = p_abe if isinstance(p_abe, TripartiteDistribution) else TripartiteDistribution(np.asarray(p_abe, dtype=float))
    t = dist.table
    n_e = t.shape[2]
    n_f = cfg.output_cap or n_e
    rng = np.random.default_rng(cfg.seed)

    stacks: list[np.ndarray] = []
    if n_f >= n_e:
        ident = np.zeros((1, n_f, n_e))
        ident[0, :n_e, :n_e] = np.eye(n_e)
        stacks.append(ident)
    const = np.zeros((1, n_f, n_e))
    const[0, 0, :] = 1.0
    stacks.append(const)
    det2 = _deterministic_channels(n_e, min(2, n_f), cfg.det_enumeration_cap)
    if det2 is not None and n_e > 1:
        stacks.append(det2)
    if n_f > 2:
        det_full = _deterministic_channels(n_e, n_f, cfg.det_enumeration_cap)
        if det_full is not None:
            stacks.append(det_full)
        elif n_f > 3:
            det3 = _deterministic_channels(n_e, 3, cfg.det_enumeration_cap)
            if det3 is not None:
                pad = np.zeros((det3.shape[0], n_f, n_e))
                pad[:, :3, :] = det3
                stacks.append(pad)
    for split in _product_split_channels(t):
        stacks.append(split[None, :, :])
    for ch in extra_channels:
        m = ch.matrix
        if m.shape[1] != n_e:
            raise ValueError("extra channel input size does not match |E|")
        pad = np.zeros((1, max(n_f, m.shape[0]), n_e))
        pad[0, : m.shape[0], :] = m
        stacks.append(pad[:, :n_f, :] if m.shape[0] <= n_f else pad)
    if cfg.restarts > 0 and n_e > 1:
        rand = rng.dirichlet(np.ones(n_f), size=(cfg.restarts, n_e))  # (k, E, F)
        stacks.append(np.transpose(rand, (0, 2, 1)))

    evaluations = 0
    best_val = np.inf
    best_channel = None
    candidates: list[tuple[float, np.ndarray]] = []
    for stack in stacks:
        if stack.shape[1] != n_f:
            vals = _batch_cmi(t, stack)  # oversized extra channel: own F
        else:
            vals = _batch_cmi(t, stack)
        evaluations += len(vals)
        k = int(np.argmin(vals))
        candidates.append((float(vals[k]), stack[k]))
        if vals[k] < best_val:
            best_val = float(vals[k])
            best_channel = stack[k]

    converged = True
    if n_e > 1 and cfg.refine_starts > 0 and best_val > cfg.tol:
        from scipy.optimize import minimize

        # refine from the most promising candidates; large-F starts are
        # truncated to keep the simplex dimension manageable
        refine_f = min(n_f, max(2, cfg.refine_output_cap))
        pool = []
        for val, chan in sorted(candidates, key=lambda c: c[0]):
            trimmed = chan[:refine_f, :] if chan.shape[0] > refine_f else chan
            pool.append((val, trimmed))
        starts = [c[1] for c in pool[: cfg.refine_starts]]

        for start in starts:
            f_dim = start.shape[0]

            def objective(raw, f_dim=f_dim):
                m = _project_channel(raw, f_dim, n_e)
                return _batch_cmi(t, m[None, :, :])[0]

            res = minimize(
                objective,
                start.ravel() + 1e-3 * rng.standard_normal(start.size),
                method="Nelder-Mead",
                options={"maxiter": cfg.refine_maxiter, "fatol": cfg.tol / 10, "xatol": 1e-6},
            )
            evaluations += res.nfev
            val = float(res.fun)
            if val < best_val - 1e-15:
                best_val = val
                best_channel = _project_channel(res.x, f_dim, n_e)
            converged = converged and bool(res.success or res.status == 1)
            if best_val <= cfg.tol:
                break

    best_val = max(best_val, 0.0)
    return IntrinsicResult(best_val, StochasticChannel(best_channel), evaluations, converged)


# ---------------------------------------------------------------------------
# measuring tripartite devices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EveStrategy:
    """Adversarial measurement: a distribution over device inputs plus optional
    per-input post-processing channels of the outcome."""

    z_weights: tuple[float, ...]
    post: tuple[StochasticChannel, ...] | None = None

    def __post_init__(self):
        w = tuple(float(v) for v in self.z_weights)
        if min(w) < -P_TOL or abs(sum(w) - 1.0) > 1e-9:
            raise ValueError("z_weights must be a probability distribution")
        object.__setattr__(self, "z_weights", w)

    @staticmethod
    def pure(z: int, n_inputs: int) -> "EveStrategy":
        w = [0.0] * n_inputs
        w[z] = 1.0
        return EveStrategy(tuple(w))

    @staticmethod
    def tagged_mixture(weights: Sequence[float], outcome_counts: Sequence[int]) -> "EveStrategy":
        """Mixture that keeps track of which input was used: outcome
        alphabets of the mixed inputs are embedded into disjoint blocks."""
        weights = tuple(float(w) for w in weights)
        support = [z for z, w in enumerate(weights) if w > 0]
        n_f = sum(outcome_counts[z] for z in support)
        offsets = {}
        off = 0
        for z in support:
            offsets[z] = off
            off += outcome_counts[z]
        channels = []
        for z, v in enumerate(outcome_counts):
            m = np.zeros((n_f, v))
            if z in offsets:
                for e in range(v):
                    m[offsets[z] + e, e] = 1.0
            else:
                m[0, :] = 1.0  # never used: weight zero
            channels.append(StochasticChannel(m))
        return EveStrategy(weights, tuple(channels))


def measure_device(device: Behavior, x: int, y: int, strategy: EveStrategy) -> TripartiteDistribution:
    """Outcome distribution P(a,b,f) of direct honest inputs (x,y) against
    an adversarial strategy: P(a,b,f) = Σ_z p(z) Σ_e P(a,b,e|x,y,z)·p(f|e,z).

    The honest inputs are direct (no randomization); the adversary may mix
    device inputs and post-process outcomes.  Without post-processing,
    outcome labels are passed through into a common alphabet.
    """
    sc = device.scenario
    if sc.n_parties != 3:
        raise ValueError("expected a tripartite device")
    m_x, m_y, m_z = sc.inputs_per_party
    if not (0 <= x < m_x and 0 <= y < m_y):
        raise IndexError("honest input out of range")
    if len(strategy.z_weights) != m_z:
        raise IndexError("strategy distributes over the wrong number of inputs")
    if strategy.post is not None and len(strategy.post) != m_z:
        raise ValueError("need one post-processing channel per device input")
    v_e = sc.outputs_per_input[2]
    if strategy.post is not None:
        n_f = max(ch.n_outputs for ch in strategy.post)
    else:
        n_f = max(v_e[z] for z in range(m_z) if strategy.z_weights[z] > 0)
    v_a = sc.outputs_per_input[0][x]
    v_b = sc.outputs_per_input[1][y]
    table = np.zeros((v_a, v_b, n_f))
    for z, w in enumerate(strategy.z_weights):
        if w == 0:
            continue
        slice_ = np.zeros((v_a, v_b, v_e[z]))
        for a in range(v_a):
            for b in range(v_b):
                for e in range(v_e[z]):
                    slice_[a, b, e] = float(device.prob((a, b, e), (x, y, z)))
        if strategy.post is not None:
            ch = strategy.post[z]
            if ch.n_inputs != v_e[z]:
                raise ValueError(f"post channel for input {z} expects {ch.n_inputs} outcomes, device has {v_e[z]}")
            slice_ = np.einsum("abe,fe->abf", slice_, ch.matrix)
            table[:, :, : slice_.shape[2]] += w * slice_
        else:
            table[:, :, : v_e[z]] += w * slice_
    return TripartiteDistribution(table, provenance=f"x={x},y={y},strategy={strategy.z_weights}")


# ---------------------------------------------------------------------------
# squashing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SquashConfig:
    """Adversarial input search: all pure inputs, plus pairwise mixtures on a
    1/``mixture_denominator`` grid over the most promising pure inputs."""

    mixture_denominator: int = 16
    mixture_top: int = 6
    dedupe_decimals: int = 12
    early_exit_tol: float = 1e-11


@dataclass(frozen=True)
class SquashResult:
    value: float
    x: int
    y: int
    strategy: EveStrategy
    strategy_kind: str  # "pure" | "mixture"
    per_input_values: tuple[tuple[int, int, float], ...]


def _canonical_key(table: np.ndarray, decimals: int) -> tuple:
    cols = sorted(tuple(np.round(table[:, :, e], decimals).ravel()) + (round(table[:, :, e].sum(), decimals),)
                  for e in range(table.shape[2]))
    return tuple(cols)


def squash(
    quantifier: Callable[[TripartiteDistribution], float],
    device: Behavior,
    config: SquashConfig | None = None,
) -> SquashResult:
    """max over honest direct inputs, min over adversarial strategies, of a quantifier.

    The honest maximization is exact (finite enumeration of inputs).  The
    adversarial minimization searches pure device inputs and pairwise
    mixtures; output post-processing belongs to the quantifier itself (the
    intrinsic information optimizes it, mutual and conditional mutual
    information do not).  The reported value is therefore an upper estimate
    of the max-min.
    """
    cfg = config or SquashConfig()
    sc = device.scenario
    if sc.n_parties != 3:
        raise ValueError("expected a tripartite device")
    m_x, m_y, m_z = sc.inputs_per_party
    best = None
    per_input = []
    for x in range(m_x):
        for y in range(m_y):
            val, strat, kind = _min_over_strategies(quantifier, device, x, y, cfg)
            per_input.append((x, y, val))
            if best is None or val > best[0]:
                best = (val, x, y, strat, kind)
    value, x, y, strat, kind = best
    return SquashResult(value, x, y, strat, kind, tuple(per_input))


def _min_over_strategies(quantifier, device, x, y, cfg: SquashConfig):
    m_z = device.scenario.inputs_per_party[2]
    v_e = device.scenario.outputs_per_input[2]
    seen: dict[tuple, int] = {}
    pure_vals: list[tuple[float, int]] = []
    best = (np.inf, None, "pure")
    for z in range(m_z):
        strat = EveStrategy.pure(z, m_z)
        dist = measure_device(device, x, y, strat)
        key = _canonical_key(dist.table, cfg.dedupe_decimals)
        if key in seen:
            continue
        seen[key] = z
        val = quantifier(dist)
        pure_vals.append((val, z))
        if val < best[0]:
            best = (val, strat, "pure")
        if best[0] <= cfg.early_exit_tol:
            return max(best[0], 0.0), best[1], best[2]
    pure_vals.sort()
    top = [z for _, z in pure_vals[: cfg.mixture_top]]
    denom = cfg.mixture_denominator
    for z1, z2 in combinations(top, 2):
        for k in range(1, denom):
            w = [0.0] * m_z
            w[z1] = k / denom
            w[z2] = 1.0 - k / denom
            strat = EveStrategy.tagged_mixture(w, v_e)
            val = quantifier(measure_device(device, x, y, strat))
            if val < best[0]:
                best = (val, strat, "mixture")
            if best[0] <= cfg.early_exit_tol:
                return max(best[0], 0.0), best[1], best[2]
    return max(best[0], 0.0), best[1], best[2]


# ---------------------------------------------------------------------------
# squashed nonlocality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NsqConfig:
    """Two-phase adversarial search budget for the squashed nonlocality.

    Every distinct measured distribution gets a cheap vectorized channel
    battery; only the ``refine_top`` most promising ones (per honest input
    pair) get the full refinement.  Skipping refinement elsewhere can only
    loosen the upper estimate, never invalidate it.
    """

    intrinsic: IntrinsicConfig = field(default_factory=IntrinsicConfig)
    squash: SquashConfig = field(default_factory=SquashConfig)
    refine_top: int = 4


@dataclass(frozen=True)
class NsqResult:
    """Upper estimate of the squashed nonlocality with the achieving witness.

    The honest max is exact; the adversarial min is heuristic, so ``value``
    upper-bounds the true quantity only up to the search gap.
    """

    value: float
    x: int
    y: int
    strategy: EveStrategy
    channel: StochasticChannel
    strategy_kind: str
    per_input_values: tuple[tuple[int, int, float], ...]


def squashed_nonlocality(
    p: Behavior,
    config: NsqConfig | None = None,
    warm_channels: Sequence[StochasticChannel] = (),
    ce: CompleteExtension | None = None,
) -> NsqResult:
    """Squashed intrinsic information of the complete extension of ``p``.

    Builds the complete extension (one adversarial input per minimal
    ensemble of ``p``), then maximizes over honest direct inputs and
    minimizes over adversarial strategies the intrinsic information of the
    measured distribution.  ``warm_channels`` seed the channel search (used
    by parameter sweeps); they can only tighten the estimate.
    """
    cfg = config or NsqConfig()
    if ce is None:
        ce = nsce(p)
    device = ce.extension
    if device.scenario.n_parties != 3:
        raise ValueError("squashed nonlocality is defined for bipartite behaviors")
    sc = device.scenario
    m_z = sc.inputs_per_party[2]
    cheap_cfg = replace(cfg.intrinsic, refine_starts=0)

    def usable(dist):
        return [c for c in warm_channels if c.n_inputs == dist.shape[2]]

    best = None
    per_input = []
    for x in range(sc.inputs_per_party[0]):
        for y in range(sc.inputs_per_party[1]):
            # phase 1: cheap channel battery on every distinct pure input
            seen: set[tuple] = set()
            scored: list[tuple[float, EveStrategy, TripartiteDistribution]] = []
            for z in range(m_z):
                strat = EveStrategy.pure(z, m_z)
                dist = measure_device(device, x, y, strat)
                key = _canonical_key(dist.table, cfg.squash.dedupe_decimals)
                if key in seen:
                    continue
                seen.add(key)
                val = intrinsic_information(dist, cheap_cfg, extra_channels=usable(dist)).value
                scored.append((val, strat, dist))
            scored.sort(key=lambda s: s[0])
            # phase 2: full refinement on the most promising distributions
            val_xy = scored[0][0]
            strat_xy, kind_xy = scored[0][1], "pure"
            chan_xy = None
            for cheap_val, strat, dist in scored[: cfg.refine_top]:
                if val_xy <= cfg.squash.early_exit_tol:
                    break
                res = intrinsic_information(dist, cfg.intrinsic, extra_channels=usable(dist))
                if res.value < val_xy:
                    val_xy, strat_xy, kind_xy, chan_xy = res.value, strat, "pure", res.channel
            # input-tagged pairwise mixtures of the most promising pure inputs
            if val_xy > cfg.squash.early_exit_tol:
                v_e = sc.outputs_per_input[2]
                top = [s[1] for s in scored[: cfg.squash.mixture_top]]
                denom = cfg.squash.mixture_denominator
                for s1, s2 in combinations(top, 2):
                    z1 = s1.z_weights.index(1.0)
                    z2 = s2.z_weights.index(1.0)
                    for k in range(1, denom):
                        w = [0.0] * m_z
                        w[z1] = k / denom
                        w[z2] = 1.0 - k / denom
                        strat = EveStrategy.tagged_mixture(w, v_e)
                        dist = measure_device(device, x, y, strat)
                        val = intrinsic_information(dist, cheap_cfg, extra_channels=usable(dist)).value
                        if val < val_xy:
                            val_xy, strat_xy, kind_xy, chan_xy = val, strat, "mixture", None
                    if val_xy <= cfg.squash.early_exit_tol:
                        break
            if chan_xy is None:
                dist = measure_device(device, x, y, strat_xy)
                res = intrinsic_information(dist, cfg.intrinsic, extra_channels=usable(dist))
                if res.value < val_xy:
                    val_xy = res.value
                chan_xy = res.channel
            val_xy = max(val_xy, 0.0)
            per_input.append((x, y, val_xy))
            if best is None or val_xy > best[0]:
                best = (val_xy, x, y, strat_xy, chan_xy, kind_xy)
    value, x, y, strat, channel, kind = best
    return NsqResult(value, x, y, strat, channel, kind, tuple(per_input))


def squashed_quantifier(name: str, intrinsic_config: IntrinsicConfig | None = None) -> Callable[[TripartiteDistribution], float]:
    """Quantifiers usable with :func:`squash`: 'mi', 'cmi', or 'intrinsic'."""
    if name == "mi":
        return lambda d: mutual_information(d.table.sum(axis=2))
    if name == "cmi":
        return cond_mutual_information
    if name == "intrinsic":
        cfg = intrinsic_config or IntrinsicConfig()
        return lambda d: intrinsic_information(d, cfg).value
    raise ValueError(f"unknown quantifier {name!r}; expected mi, cmi, or intrinsic")


# ---------------------------------------------------------------------------
# the device norm on classical-device states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CdState:
    """Classical-device state: classical outcome a jointly with a one-party device.

    ``table[a, z, e]`` is P(a, e|z).  For each classical value the device
    part must be a valid single-party behavior: the per-``a`` mass is
    independent of the device input and the total mass is one.
    ``classical_shape`` optionally records a multi-variable structure of the
    classical part (key pair first, transcript after).
    """

    table: np.ndarray
    classical_shape: tuple[int, ...] = ()

    def __post_init__(self):
        t = _freeze(self.table)
        if t.ndim != 3:
            raise ValueError("expected table[a, z, e]")
        if t.min() < -P_TOL:
            raise ValueError("negative probability in the classical-device table")
        mass = t.sum(axis=2)
        if np.abs(mass - mass[:, :1]).max() > P_TOL:
            raise ValueError("per-outcome mass must not depend on the device input")
        if np.abs(mass[:, 0].sum() - 1.0) > P_TOL:
            raise ValueError("total probability must be one")
        if self.classical_shape and int(np.prod(self.classical_shape)) != t.shape[0]:
            raise ValueError("classical_shape inconsistent with the table")
        object.__setattr__(self, "table", t)

    @property
    def classical_dist(self) -> np.ndarray:
        return self.table.sum(axis=2)[:, 0]


def ns_norm_cd(p1: CdState, p2: CdState) -> float:
    """Distance ½ Σ_a sup_z Σ_e |P¹(a,e|z) − P²(a,e|z)| between c-d states.

    The supremum over direct device measurements is taken independently for
    each classical outcome.  With a trivial device part this collapses to
    the total-variation distance of the classical distributions.
    """
    if p1.table.shape != p2.table.shape:
        raise ValueError("shape mismatch between the two classical-device states")
    diff = np.abs(p1.table - p2.table).sum(axis=2)  # (a, z)
    return 0.5 * float(diff.max(axis=1).sum())


def ideal_key_cd(cd: CdState, n_key: int) -> CdState:
    """Idealized version of a c-d state whose classical part starts with a key pair.

    The key pair is replaced by a perfectly correlated uniform pair while
    the remaining classical variables and the device part keep the summed
    statistics: P'(s,s',rest,e|z) = δ_{s,s'}/K · Σ_{u,u'} P(u,u',rest,e|z).
    """
    if not cd.classical_shape or len(cd.classical_shape) < 2:
        raise ValueError("classical part must expose at least the two key variables")
    if cd.classical_shape[0] != n_key or cd.classical_shape[1] != n_key:
        raise ValueError("leading classical variables must both have the key cardinality")
    rest = cd.classical_shape[2:]
    shape = (n_key, n_key) + rest + cd.table.shape[1:]
    t = cd.table.reshape(shape)
    summed = t.sum(axis=(0, 1), keepdims=True)  # (1,1,rest,z,e)
    out = np.zeros_like(t)
    for s in range(n_key):
        out[s, s] = summed[0, 0] / n_key
    return CdState(out.reshape(cd.table.shape), cd.classical_shape)
