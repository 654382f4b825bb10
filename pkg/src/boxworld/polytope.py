"""Non-signaling polytope: constraint system, vertex enumeration, membership, cost.

Vertex enumeration uses the double description method on the homogenized
cone, with integer arithmetic (rays are gcd-reduced integer vectors), so
every extreme point comes out as an exact rational table.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

from .behavior import Behavior, Scenario, behavior_from_dict, behavior_to_dict, validate
from .rationallp import feasible_point, solve_lp

DEFAULT_AMBIENT_CAP = 64

LOCAL_DETERMINISTIC = "local-deterministic"
NONLOCAL = "nonlocal"


class ScenarioTooLargeError(ValueError):
    """Ambient dimension exceeds the enumeration cap; no partial results."""


@dataclass(frozen=True)
class Vertex:
    behavior: Behavior
    tag: str


def dimension(scenario: Scenario) -> int:
    """Affine dimension of the non-signaling polytope: Π_i(Σ_j(v_ij−1)+1) − 1."""
    d = 1
    for outs in scenario.outputs_per_input:
        d *= sum(v - 1 for v in outs) + 1
    return d - 1


# ---------------------------------------------------------------------------
# constraint system
# ---------------------------------------------------------------------------


def _row_offsets(scenario: Scenario) -> list[int]:
    offsets = []
    base = 0
    for x in scenario.joint_inputs():
        offsets.append(base)
        base += scenario.row_size(x)
    return offsets


def normalization_rows(scenario: Scenario) -> list[tuple[int, ...]]:
    """Homogenized rows (const, coefficients): Σ_a p(a|x) − s = 0 per joint input."""
    t = scenario.total_entries
    rows = []
    offsets = _row_offsets(scenario)
    for xi, x in enumerate(scenario.joint_inputs()):
        row = [0] * (t + 1)
        row[0] = -1
        for k in range(scenario.row_size(x)):
            row[1 + offsets[xi] + k] = 1
        rows.append(tuple(row))
    return rows


def no_signaling_rows(scenario: Scenario) -> list[tuple[int, ...]]:
    """Marginal-equality rows: party i's summed-out row is input-independent."""
    t = scenario.total_entries
    offsets = _row_offsets(scenario)
    input_list = list(scenario.joint_inputs())
    input_index = {x: i for i, x in enumerate(input_list)}
    rows = []
    for i in range(scenario.n_parties):
        if scenario.inputs_per_party[i] < 2:
            continue
        others = [p for p in range(scenario.n_parties) if p != i]
        for xo in product(*(range(scenario.inputs_per_party[p]) for p in others)):
            outs_other = tuple(scenario.outputs_per_input[p][xo[k]] for k, p in enumerate(others))
            for ao in product(*(range(v) for v in outs_other)):
                for xi in range(scenario.inputs_per_party[i] - 1):
                    row = [0] * (t + 1)
                    for sign, xval in ((1, xi), (-1, xi + 1)):
                        x_full = [0] * scenario.n_parties
                        x_full[i] = xval
                        for k, p in enumerate(others):
                            x_full[p] = xo[k]
                        x_full = tuple(x_full)
                        ri = input_index[x_full]
                        for a_i in range(scenario.outputs_per_input[i][xval]):
                            a_full = [0] * scenario.n_parties
                            a_full[i] = a_i
                            for k, p in enumerate(others):
                                a_full[p] = ao[k]
                            col = scenario.output_index(x_full, tuple(a_full))
                            row[1 + offsets[ri] + col] += sign
                    rows.append(tuple(row))
    return rows


@dataclass(frozen=True)
class NsPolytope:
    """H-representation of the non-signaling polytope of a scenario.

    ``equalities`` are homogenized integer rows (const, coeffs) with
    row·(1, p) = 0; together with 0 <= p <= 1 they encode the probabilistic,
    normalization, and no-signaling constraints.  ``h`` counts the encoded
    constraint rows (inequalities plus equalities, equalities as two
    inequalities); no minimality claim is attached to it.
    """

    scenario: Scenario
    equalities: tuple[tuple[int, ...], ...]

    @staticmethod
    def for_scenario(scenario: Scenario) -> "NsPolytope":
        rows = normalization_rows(scenario) + no_signaling_rows(scenario)
        return NsPolytope(scenario, tuple(rows))

    @property
    def ambient(self) -> int:
        return self.scenario.total_entries

    @property
    def dim(self) -> int:
        return dimension(self.scenario)

    @property
    def equality_rank(self) -> int:
        return len(_independent_rows(self.equalities, self.ambient + 1))

    @property
    def h(self) -> int:
        return 2 * self.ambient + 2 * len(self.equalities)

    def contains_vector(self, point: Sequence[Fraction]) -> bool:
        if len(point) != self.ambient:
            raise ValueError("dimension mismatch")
        p = [Fraction(v) for v in point]
        if any(v < 0 or v > 1 for v in p):
            return False
        for row in self.equalities:
            if row[0] + sum(c * v for c, v in zip(row[1:], p)) != 0:
                return False
        return True

    def contains(self, point) -> bool:
        """Exact membership for a Behavior or a flat coordinate vector."""
        if isinstance(point, Behavior):
            if point.scenario != self.scenario:
                raise ValueError("dimension mismatch: behavior is on a different scenario")
            return self.contains_vector(point.flat())
        return self.contains_vector(point)


# ---------------------------------------------------------------------------
# exact linear algebra helpers (integer / Fraction rows)
# ---------------------------------------------------------------------------


def _independent_rows(rows: Sequence[Sequence], width: int) -> list[tuple[Fraction, ...]]:
    """Gaussian elimination returning one reduced row per pivot."""
    reduced: list[list[Fraction]] = []
    pivots: list[int] = []
    for row in rows:
        work = [Fraction(v) for v in row]
        for prow, pcol in zip(reduced, pivots):
            if work[pcol] != 0:
                f = work[pcol]
                work = [w - f * p for w, p in zip(work, prow)]
        pcol = next((j for j in range(width) if work[j] != 0), None)
        if pcol is None:
            continue
        inv = 1 / work[pcol]
        work = [w * inv for w in work]
        reduced.append(work)
        pivots.append(pcol)
    return [tuple(r) for r in reduced]


def _integerize(row: Sequence[Fraction]) -> tuple[int, ...]:
    denoms = [Fraction(v).denominator for v in row]
    lcm = 1
    for d in denoms:
        lcm = lcm * d // math.gcd(lcm, d)
    ints = [int(Fraction(v) * lcm) for v in row]
    g = 0
    for v in ints:
        g = math.gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    return tuple(ints)


def matrix_rank(rows: Sequence[Sequence], width: int) -> int:
    return len(_independent_rows(rows, width))


# ---------------------------------------------------------------------------
# double description over the homogenized cone
# ---------------------------------------------------------------------------


def _normalize_ray(ray: list[int]) -> tuple[int, ...]:
    g = 0
    for v in ray:
        g = math.gcd(g, abs(v))
    if g > 1:
        ray = [v // g for v in ray]
    return tuple(ray)


def dd_enumerate_vertices(n_vars: int, equalities: Sequence[Sequence]) -> list[tuple[Fraction, ...]]:
    """Vertices of {x in R^n : x >= 0, row·(1,x) = 0 for each equality row}.

    The polytope must be bounded; an unbounded direction raises.  Rows are
    (const, coeffs) and may be rational; they are reduced to an independent
    integer set before the double description iteration.
    """
    width = n_vars + 1
    indep = _independent_rows(equalities, width)
    int_rows = [_integerize(r) for r in indep]

    rays: list[tuple[int, ...]] = []
    zeros: list[int] = []  # bitmask of zero coordinates per ray
    full_mask = (1 << width) - 1
    for k in range(width):
        e = [0] * width
        e[k] = 1
        rays.append(tuple(e))
        zeros.append(full_mask & ~(1 << k))

    for row in int_rows:
        vals = [sum(c * r for c, r in zip(row, ray)) for ray in rays]
        keep_idx = [i for i, v in enumerate(vals) if v == 0]
        pos_idx = [i for i, v in enumerate(vals) if v > 0]
        neg_idx = [i for i, v in enumerate(vals) if v < 0]
        new_rays = [rays[i] for i in keep_idx]
        new_zeros = [zeros[i] for i in keep_idx]
        for ip in pos_idx:
            for im in neg_idx:
                common = zeros[ip] & zeros[im]
                if not _adjacent(zeros, common, ip, im):
                    continue
                vp, vm = vals[ip], vals[im]
                combo = [vp * rm - vm * rp for rp, rm in zip(rays[ip], rays[im])]
                ray = _normalize_ray(combo)
                mask = 0
                for k, v in enumerate(ray):
                    if v == 0:
                        mask |= 1 << k
                new_rays.append(ray)
                new_zeros.append(mask)
        rays, zeros = new_rays, new_zeros

    vertices = []
    for ray in rays:
        s = ray[0]
        if s <= 0:
            if all(v == 0 for v in ray):
                continue
            raise ValueError("constraint system is unbounded; cannot list vertices")
        vertices.append(tuple(Fraction(v, s) for v in ray[1:]))
    return vertices


def _adjacent(zeros: list[int], common: int, ip: int, im: int) -> bool:
    for k, z in enumerate(zeros):
        if k == ip or k == im:
            continue
        if z & common == common:
            return False
    return True


# ---------------------------------------------------------------------------
# vertex enumeration of the non-signaling polytope
# ---------------------------------------------------------------------------


def _flat_to_behavior(scenario: Scenario, flat: Sequence[Fraction]) -> Behavior:
    rows = []
    k = 0
    for x in scenario.joint_inputs():
        size = scenario.row_size(x)
        rows.append(tuple(flat[k:k + size]))
        k += size
    return Behavior(scenario, tuple(rows))


def _tag(flat: Sequence[Fraction]) -> str:
    # deterministic tables are exactly the local extreme points
    if all(v == 0 or v == 1 for v in flat):
        return LOCAL_DETERMINISTIC
    return NONLOCAL


def _scenario_key(scenario: Scenario) -> tuple:
    return (scenario.inputs_per_party, scenario.outputs_per_input)


@lru_cache(maxsize=32)
def _vertices_cached(key: tuple, cap: int) -> tuple[Vertex, ...]:
    scenario = Scenario(*key)
    cached = _disk_cache_load(scenario)
    if cached is not None:
        return cached
    poly = NsPolytope.for_scenario(scenario)
    flats = dd_enumerate_vertices(poly.ambient, poly.equalities)
    flats = sorted(set(flats))
    out = tuple(Vertex(_flat_to_behavior(scenario, f), _tag(f)) for f in flats)
    _disk_cache_store(scenario, out)
    return out


def vertices(scenario: Scenario, cap: int = DEFAULT_AMBIENT_CAP) -> tuple[Vertex, ...]:
    """Complete, duplicate-free extreme-point list, lexicographically ordered.

    Raises :class:`ScenarioTooLargeError` when the ambient dimension exceeds
    ``cap`` rather than returning a partial list.
    """
    t = scenario.total_entries
    if t > cap:
        raise ScenarioTooLargeError(
            f"scenario ambient dimension {t} exceeds the cap {cap}; raise the cap to enumerate anyway"
        )
    return _vertices_cached(_scenario_key(scenario), cap)


def _disk_cache_path(scenario: Scenario) -> str | None:
    root = os.environ.get("BOXWORLD_CACHE_DIR")
    if not root:
        return None
    sig = json.dumps(_scenario_key(scenario))
    import hashlib

    digest = hashlib.sha256(sig.encode()).hexdigest()[:16]
    return os.path.join(root, f"vertices-{digest}.json")


def _disk_cache_load(scenario: Scenario) -> tuple[Vertex, ...] | None:
    path = _disk_cache_path(scenario)
    if path is None or not os.path.exists(path):
        return None
    with open(path) as fh:
        data = json.load(fh)
    return tuple(Vertex(behavior_from_dict(d["behavior"]), d["tag"]) for d in data)


def _disk_cache_store(scenario: Scenario, verts: tuple[Vertex, ...]) -> None:
    path = _disk_cache_path(scenario)
    if path is None:
        return
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    data = [{"behavior": behavior_to_dict(v.behavior), "tag": v.tag} for v in verts]
    with open(path, "w") as fh:
        json.dump(data, fh)


def certify_extremality(scenario: Scenario, behavior: Behavior) -> bool:
    """Vertex certificate: tight constraints at the point span the ambient space."""
    poly = NsPolytope.for_scenario(scenario)
    if not poly.contains(behavior):
        return False
    flat = behavior.flat()
    t = len(flat)
    rows: list[tuple[Fraction, ...]] = []
    for k, v in enumerate(flat):
        if v == 0 or v == 1:
            row = [Fraction(0)] * t
            row[k] = Fraction(1)
            rows.append(tuple(row))
    for eq in poly.equalities:
        rows.append(tuple(Fraction(c) for c in eq[1:]))
    return matrix_rank(rows, t) == t


def enumerate_deterministic(scenario: Scenario) -> list[Behavior]:
    """All products of deterministic single-party strategies (the local vertices)."""
    per_party_strategies = []
    for i in range(scenario.n_parties):
        outs = scenario.outputs_per_input[i]
        per_party_strategies.append(list(product(*(range(v) for v in outs))))
    out = []
    for combo in product(*per_party_strategies):
        def fn(a, x, combo=combo):
            for i, strat in enumerate(combo):
                if a[i] != strat[x[i]]:
                    return Fraction(0)
            return Fraction(1)

        from .behavior import behavior_from_function

        out.append(behavior_from_function(scenario, fn))
    return out


def affine_rank(points: Sequence[Sequence[Fraction]]) -> int:
    """Dimension of the affine hull spanned by the points."""
    if not points:
        return -1
    base = [Fraction(v) for v in points[0]]
    diffs = [[Fraction(v) - b for v, b in zip(p, base)] for p in points[1:]]
    return matrix_rank(diffs, len(base))


# ---------------------------------------------------------------------------
# membership and nonlocality cost
# ---------------------------------------------------------------------------


def contains(polytope: NsPolytope, point) -> bool:
    return polytope.contains(point)


def local_contains(behavior: Behavior, cap: int = DEFAULT_AMBIENT_CAP) -> bool:
    """Membership in the convex hull of the deterministic vertices (exact LP)."""
    dets = enumerate_deterministic(behavior.scenario)
    flats = [d.flat() for d in dets]
    target = behavior.flat()
    t = len(target)
    a_eq = [[flats[i][k] for i in range(len(flats))] for k in range(t)]
    a_eq.append([Fraction(1)] * len(flats))
    b_eq = list(target) + [Fraction(1)]
    return feasible_point(a_eq, b_eq).optimal


def nonlocality_cost(behavior: Behavior, cap: int = DEFAULT_AMBIENT_CAP) -> Fraction:
    """Minimal weight that must be placed outside the local set.

    Solves, as one exact LP over vertex weights w >= 0 with Σw = 1 and
    Σ w_i V_i = P, the minimum of the total weight carried by nonlocal
    vertices.  This equals the least λ with P = λQ + (1−λ)L, Q non-signaling
    and L local.
    """
    report = validate(behavior)
    if not report.ok:
        raise ValueError(f"behavior is not a polytope member: {report.violations[0]}")
    verts = vertices(behavior.scenario, cap)
    flats = [v.behavior.flat() for v in verts]
    target = behavior.flat()
    t = len(target)
    a_eq = [[flats[i][k] for i in range(len(flats))] for k in range(t)]
    a_eq.append([Fraction(1)] * len(flats))
    b_eq = list(target) + [Fraction(1)]
    cost_row = [Fraction(1) if v.tag == NONLOCAL else Fraction(0) for v in verts]
    res = solve_lp(a_eq, b_eq, cost_row)
    if not res.optimal:
        raise ValueError("cost LP infeasible; the behavior is not in the polytope")
    return res.objective
