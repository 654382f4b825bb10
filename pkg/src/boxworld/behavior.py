"""Exact representation, validation, and algebra of multipartite non-signaling behaviors.

All probabilities in this module are ``fractions.Fraction`` values, so
normalization, no-signaling, and membership statements are tested as exact
identities rather than within a floating tolerance.

The canonical flat layout of a behavior table is the interchange contract
for the whole package: rows enumerate joint inputs lexicographically with
party 0 outermost, and within a row the joint outputs are enumerated
lexicographically with party 0 outermost.  Output cardinalities may differ
per input, so rows may have different lengths.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator, Sequence


class ShapeError(ValueError):
    """Table shape does not match the declared scenario."""


def _as_fraction(value) -> Fraction:
    if isinstance(value, float):
        raise TypeError("floats are not accepted in exact tables; pass Fraction, int or 'num/den' string")
    return Fraction(value)


@dataclass(frozen=True)
class Scenario:
    """Party/input/output cardinalities fixing a behavior space.

    ``inputs_per_party[i]`` is the number of settings of party ``i`` and
    ``outputs_per_input[i][j]`` the number of outcomes of its ``j``-th
    setting.  Single-outcome settings are allowed (they model trivial
    systems) and are reported through ``has_trivial_inputs``.
    """

    inputs_per_party: tuple[int, ...]
    outputs_per_input: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs_per_party", tuple(int(m) for m in self.inputs_per_party))
        object.__setattr__(self, "outputs_per_input", tuple(tuple(int(v) for v in row) for row in self.outputs_per_input))
        if self.n_parties < 1:
            raise ValueError("a scenario needs at least one party")
        if len(self.outputs_per_input) != self.n_parties:
            raise ValueError("outputs_per_input must list one tuple per party")
        for i, m in enumerate(self.inputs_per_party):
            if m < 1:
                raise ValueError(f"party {i} must have at least one input")
            if len(self.outputs_per_input[i]) != m:
                raise ValueError(f"party {i}: expected {m} output counts, got {len(self.outputs_per_input[i])}")
            if any(v < 1 for v in self.outputs_per_input[i]):
                raise ValueError(f"party {i} has an input with fewer than one output")

    @property
    def n_parties(self) -> int:
        return len(self.inputs_per_party)

    @property
    def total_entries(self) -> int:
        """Ambient dimension t: the total number of table entries."""
        t = 1
        for outs in self.outputs_per_input:
            t *= sum(outs)
        return t

    @property
    def has_trivial_inputs(self) -> bool:
        return any(v == 1 for outs in self.outputs_per_input for v in outs)

    @staticmethod
    def uniform(n_parties: int, n_inputs: int, n_outputs: int) -> "Scenario":
        """Scenario with the same input and output cardinality everywhere."""
        return Scenario(
            tuple(n_inputs for _ in range(n_parties)),
            tuple(tuple(n_outputs for _ in range(n_inputs)) for _ in range(n_parties)),
        )

    def joint_inputs(self) -> Iterator[tuple[int, ...]]:
        return product(*(range(m) for m in self.inputs_per_party))

    def outputs_at(self, joint_input: Sequence[int]) -> tuple[int, ...]:
        """Per-party output cardinalities for a fixed joint input."""
        return tuple(self.outputs_per_input[i][x] for i, x in enumerate(joint_input))

    def joint_outputs(self, joint_input: Sequence[int]) -> Iterator[tuple[int, ...]]:
        return product(*(range(v) for v in self.outputs_at(joint_input)))

    def n_joint_inputs(self) -> int:
        n = 1
        for m in self.inputs_per_party:
            n *= m
        return n

    def row_size(self, joint_input: Sequence[int]) -> int:
        n = 1
        for v in self.outputs_at(joint_input):
            n *= v
        return n

    def input_index(self, joint_input: Sequence[int]) -> int:
        idx = 0
        for i, x in enumerate(joint_input):
            if not 0 <= x < self.inputs_per_party[i]:
                raise IndexError(f"input {x} out of range for party {i}")
            idx = idx * self.inputs_per_party[i] + x
        return idx

    def output_index(self, joint_input: Sequence[int], joint_output: Sequence[int]) -> int:
        outs = self.outputs_at(joint_input)
        idx = 0
        for i, a in enumerate(joint_output):
            if not 0 <= a < outs[i]:
                raise IndexError(f"output {a} out of range for party {i} at input {joint_input[i]}")
            idx = idx * outs[i] + a
        return idx

    def flat_index(self, joint_input: Sequence[int], joint_output: Sequence[int]) -> int:
        """Position of an entry in the flattened table (rows concatenated)."""
        base = 0
        for x in self.joint_inputs():
            if tuple(x) == tuple(joint_input):
                return base + self.output_index(joint_input, joint_output)
            base += self.row_size(x)
        raise IndexError("joint input out of range")


@dataclass(frozen=True)
class Behavior:
    """Conditional probability table p(a⃗|x⃗) over a :class:`Scenario`, exact rationals."""

    scenario: Scenario
    table: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(_as_fraction(v) for v in row) for row in self.table)
        object.__setattr__(self, "table", rows)
        expected = [self.scenario.row_size(x) for x in self.scenario.joint_inputs()]
        if len(rows) != len(expected):
            raise ShapeError(f"expected {len(expected)} joint-input rows, got {len(rows)}")
        for r, (row, size) in enumerate(zip(rows, expected)):
            if len(row) != size:
                raise ShapeError(f"row {r}: expected {size} entries, got {len(row)}")

    def prob(self, joint_output: Sequence[int], joint_input: Sequence[int]) -> Fraction:
        x = self.scenario.input_index(joint_input)
        a = self.scenario.output_index(joint_input, joint_output)
        return self.table[x][a]

    def flat(self) -> tuple[Fraction, ...]:
        return tuple(v for row in self.table for v in row)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...]


def behavior_from_function(scenario: Scenario, fn) -> Behavior:
    """Build a behavior from ``fn(joint_output, joint_input) -> Fraction``."""
    rows = []
    for x in scenario.joint_inputs():
        rows.append(tuple(_as_fraction(fn(a, x)) for a in scenario.joint_outputs(x)))
    return Behavior(scenario, tuple(rows))


def validate(behavior: Behavior) -> ValidationReport:
    """Check range, normalization, and no-signaling constraints exactly.

    Every violated constraint is reported with the party and the fixed
    indices that witness it.
    """
    sc = behavior.scenario
    violations: list[str] = []
    for xi, x in enumerate(sc.joint_inputs()):
        row = behavior.table[sc.input_index(x)]
        for ai, v in enumerate(row):
            if v < 0 or v > 1:
                violations.append(f"entry out of [0,1] at joint input {x}, output index {ai}: {v}")
        total = sum(row)
        if total != 1:
            violations.append(f"normalization violated at joint input {x}: sum = {total}")
    violations.extend(_no_signaling_violations(behavior))
    return ValidationReport(ok=not violations, violations=tuple(violations))


def _marginal_over_party(row: Sequence[Fraction], v_i: int, stride: int) -> list[Fraction]:
    """Sum out one party's outcome digit from a flat row (others' order preserved)."""
    block = stride * v_i
    out = []
    for high in range(len(row) // block):
        base = high * block
        for low in range(stride):
            out.append(sum(row[base + k * stride + low] for k in range(v_i)))
    return out


def _no_signaling_violations(behavior: Behavior) -> list[str]:
    sc = behavior.scenario
    out: list[str] = []
    inputs = list(sc.joint_inputs())
    for i in range(sc.n_parties):
        if sc.inputs_per_party[i] < 2:
            continue
        # group joint inputs by the other parties' settings
        groups: dict[tuple[int, ...], list[tuple[int, int]]] = {}
        for ri, x in enumerate(inputs):
            key = x[:i] + x[i + 1:]
            groups.setdefault(key, []).append((x[i], ri))
        for key, rows in groups.items():
            marginals = []
            for xi, ri in sorted(rows):
                outs = sc.outputs_at(inputs[ri])
                stride = 1
                for v in outs[i + 1:]:
                    stride *= v
                marginals.append(_marginal_over_party(behavior.table[ri], outs[i], stride))
            for m in marginals[1:]:
                if m != marginals[0]:
                    out.append(
                        f"no-signaling violated for party {i}: the marginal of the other "
                        f"parties at their inputs {key} depends on party {i}'s input"
                    )
                    break
    return out


def marginal(behavior: Behavior, kept_parties: Iterable[int], *, check: bool = True) -> Behavior:
    """Marginal behavior on a nonempty subset of parties.

    Requires a valid behavior: no-signaling is what makes the marginal
    independent of the discarded parties' inputs (input 0 is used for them).
    ``check=False`` skips re-validation when the caller has already done it.
    """
    kept = sorted(set(kept_parties))
    sc = behavior.scenario
    if not kept:
        raise ValueError("kept party set must be nonempty")
    if any(p < 0 or p >= sc.n_parties for p in kept):
        raise ValueError("kept party index out of range")
    if check:
        report = validate(behavior)
        if not report.ok:
            raise ValueError(f"refusing to marginalize an invalid behavior: {report.violations[0]}")
    dropped = [p for p in range(sc.n_parties) if p not in kept]
    sub = Scenario(
        tuple(sc.inputs_per_party[p] for p in kept),
        tuple(sc.outputs_per_input[p] for p in kept),
    )

    def fn(a_sub, x_sub):
        x_full = [0] * sc.n_parties
        for k, p in enumerate(kept):
            x_full[p] = x_sub[k]
        outs_dropped = [sc.outputs_per_input[p][0] for p in dropped]
        s = Fraction(0)
        for a_drop in product(*(range(v) for v in outs_dropped)):
            a_full = [0] * sc.n_parties
            for k, p in enumerate(kept):
                a_full[p] = a_sub[k]
            for k, p in enumerate(dropped):
                a_full[p] = a_drop[k]
            s += behavior.prob(tuple(a_full), tuple(x_full))
        return s

    return behavior_from_function(sub, fn)


def tensor(p: Behavior, q: Behavior) -> Behavior:
    """Independent composition on the concatenated party list."""
    for b in (p, q):
        report = validate(b)
        if not report.ok:
            raise ValueError(f"refusing to tensor an invalid behavior: {report.violations[0]}")
    sc = Scenario(
        p.scenario.inputs_per_party + q.scenario.inputs_per_party,
        p.scenario.outputs_per_input + q.scenario.outputs_per_input,
    )
    np_ = p.scenario.n_parties

    def fn(a, x):
        return p.prob(a[:np_], x[:np_]) * q.prob(a[np_:], x[np_:])

    return behavior_from_function(sc, fn)


def permute_parties(behavior: Behavior, order: Sequence[int]) -> Behavior:
    """Behavior with parties reordered so new party k is old party ``order[k]``."""
    sc = behavior.scenario
    order = tuple(order)
    if sorted(order) != list(range(sc.n_parties)):
        raise ValueError("order must be a permutation of the party indices")
    new_sc = Scenario(
        tuple(sc.inputs_per_party[p] for p in order),
        tuple(sc.outputs_per_input[p] for p in order),
    )

    def fn(a, x):
        a_old = [0] * sc.n_parties
        x_old = [0] * sc.n_parties
        for k, p in enumerate(order):
            a_old[p] = a[k]
            x_old[p] = x[k]
        return behavior.prob(tuple(a_old), tuple(x_old))

    return behavior_from_function(new_sc, fn)


def merge_parties(behavior: Behavior, groups: Sequence[Sequence[int]]) -> Behavior:
    """Coarse-grain parties into groups, each acting as a single party.

    Group inputs/outputs are the cartesian products of the members'
    inputs/outputs (member order as listed).  Grouping preserves the
    no-signaling property across groups.
    """
    sc = behavior.scenario
    flat = [p for g in groups for p in g]
    if sorted(flat) != list(range(sc.n_parties)):
        raise ValueError("groups must partition the party indices")
    groups = [tuple(g) for g in groups]
    new_inputs = []
    new_outputs = []
    for g in groups:
        m = 1
        for p in g:
            m *= sc.inputs_per_party[p]
        outs = []
        for xg in product(*(range(sc.inputs_per_party[p]) for p in g)):
            v = 1
            for k, p in enumerate(g):
                v *= sc.outputs_per_input[p][xg[k]]
            outs.append(v)
        new_inputs.append(m)
        new_outputs.append(tuple(outs))
    new_sc = Scenario(tuple(new_inputs), tuple(new_outputs))

    # decode composite labels back into per-member labels
    def fn(a, x):
        x_old = [0] * sc.n_parties
        a_old = [0] * sc.n_parties
        for gi, g in enumerate(groups):
            xg = _decode(x[gi], [sc.inputs_per_party[p] for p in g])
            for k, p in enumerate(g):
                x_old[p] = xg[k]
            ag = _decode(a[gi], [sc.outputs_per_input[p][xg[k]] for k, p in enumerate(g)])
            for k, p in enumerate(g):
                a_old[p] = ag[k]
        return behavior.prob(tuple(a_old), tuple(x_old))

    return behavior_from_function(new_sc, fn)


def _decode(index: int, radices: Sequence[int]) -> tuple[int, ...]:
    digits = []
    for r in reversed(radices):
        digits.append(index % r)
        index //= r
    return tuple(reversed(digits))


def convex_mix(behaviors: Sequence[Behavior], weights: Sequence[Fraction]) -> Behavior:
    """Exact convex combination of behaviors on a common scenario."""
    if len(behaviors) != len(weights) or not behaviors:
        raise ValueError("need matching, nonempty behavior and weight lists")
    sc = behaviors[0].scenario
    if any(b.scenario != sc for b in behaviors):
        raise ValueError("behaviors must share a scenario")
    ws = [_as_fraction(w) for w in weights]
    if sum(ws) != 1 or any(w < 0 for w in ws):
        raise ValueError("weights must be nonnegative and sum to one exactly")
    rows = []
    for r in range(len(behaviors[0].table)):
        rows.append(tuple(sum(w * b.table[r][c] for w, b in zip(ws, behaviors)) for c in range(len(behaviors[0].table[r]))))
    return Behavior(sc, tuple(rows))


# ---------------------------------------------------------------------------
# named behaviors of the two-party binary scenario and the single-party boxes
# ---------------------------------------------------------------------------

CHSH_SCENARIO = Scenario.uniform(2, 2, 2)
SINGLE_BINARY_SCENARIO = Scenario((2,), ((2, 2),))


def pr_box() -> Behavior:
    """The extremal box with a⊕b = x·y, each consistent outcome weight 1/2."""
    return behavior_from_function(
        CHSH_SCENARIO,
        lambda a, x: Fraction(1, 2) if (a[0] ^ a[1]) == (x[0] & x[1]) else Fraction(0),
    )


def anti_pr_box() -> Behavior:
    """The extremal box with a⊕b = x·y ⊕ 1."""
    return behavior_from_function(
        CHSH_SCENARIO,
        lambda a, x: Fraction(1, 2) if (a[0] ^ a[1]) == (x[0] & x[1]) ^ 1 else Fraction(0),
    )


def local_vertex(alpha: int, beta: int, gamma: int, sigma: int) -> Behavior:
    """Deterministic two-party box a = αx⊕β, b = γy⊕σ."""
    return behavior_from_function(
        CHSH_SCENARIO,
        lambda a, x: Fraction(1) if a[0] == (alpha & x[0]) ^ beta and a[1] == (gamma & x[1]) ^ sigma else Fraction(0),
    )


def nonlocal_vertex(r: int, s: int, t: int) -> Behavior:
    """Extremal nonlocal box with a⊕b = xy ⊕ rx ⊕ sy ⊕ t."""
    return behavior_from_function(
        CHSH_SCENARIO,
        lambda a, x: Fraction(1, 2) if (a[0] ^ a[1]) == ((x[0] & x[1]) ^ (r & x[0]) ^ (s & x[1]) ^ t) else Fraction(0),
    )


def maximally_mixed_single() -> Behavior:
    """Uniform single-party box with one binary input variable (two settings)."""
    return behavior_from_function(SINGLE_BINARY_SCENARIO, lambda a, x: Fraction(1, 2))


def single_party_vertex(kind: int) -> Behavior:
    """The four extreme points of the single-party two-setting binary polytope.

    kind 0: a=0, kind 1: a=1, kind 2: a=x, kind 3: a=x⊕1.
    """
    fns = {
        0: lambda a, x: a[0] == 0,
        1: lambda a, x: a[0] == 1,
        2: lambda a, x: a[0] == x[0],
        3: lambda a, x: a[0] == x[0] ^ 1,
    }
    fn = fns[kind]
    return behavior_from_function(SINGLE_BINARY_SCENARIO, lambda a, x: Fraction(1) if fn(a, x) else Fraction(0))


def iso(eps) -> Behavior:
    """Isotropic behavior: the mixture (1−ε)·PR + ε·anti-PR, exact in ε."""
    e = _as_fraction(eps)
    if e < 0 or e > 1:
        raise ValueError("eps must lie in [0, 1]")
    return convex_mix([pr_box(), anti_pr_box()], [1 - e, e])


def chsh(behavior: Behavior) -> Fraction:
    """CHSH value S = Σ_{xy} (−1)^{xy} E(x,y) with E(x,y) = Σ_{ab} (−1)^{a⊕b} p(ab|xy).

    The sign convention is fixed so that the box of :func:`pr_box` attains
    the algebraic maximum S = 4.
    """
    if behavior.scenario != CHSH_SCENARIO:
        raise ValueError("CHSH is defined on the two-party, two-setting, binary-output scenario")
    s = Fraction(0)
    for x in (0, 1):
        for y in (0, 1):
            e = Fraction(0)
            for a in (0, 1):
                for b in (0, 1):
                    e += (-1) ** (a ^ b) * behavior.prob((a, b), (x, y))
            s += (-1) ** (x & y) * e
    return s


def relabel(
    behavior: Behavior,
    party: int,
    input_perm: Sequence[int],
    output_perms: Sequence[Sequence[int]],
) -> Behavior:
    """Relabel one party's inputs and outputs.

    ``input_perm[x]`` is the old input used when the new input is ``x``;
    ``output_perms[x][a_old]`` is the new output label for old outcome
    ``a_old`` at new input ``x``.  The permutation must map between inputs
    of equal output cardinality.
    """
    sc = behavior.scenario
    if not 0 <= party < sc.n_parties:
        raise ValueError("party index out of range")
    m = sc.inputs_per_party[party]
    input_perm = tuple(input_perm)
    if sorted(input_perm) != list(range(m)):
        raise ValueError("input_perm must be a permutation of the party's inputs")
    if len(output_perms) != m:
        raise ValueError("need one output permutation per (new) input")
    inv_out = []
    for x in range(m):
        v_old = sc.outputs_per_input[party][input_perm[x]]
        perm = tuple(output_perms[x])
        if sorted(perm) != list(range(v_old)):
            raise ValueError(f"output_perms[{x}] must permute {v_old} outcomes")
        inv = [0] * v_old
        for a_old, a_new in enumerate(perm):
            inv[a_new] = a_old
        inv_out.append(tuple(inv))
    new_sc = Scenario(
        sc.inputs_per_party,
        tuple(
            tuple(sc.outputs_per_input[i][input_perm[x]] if i == party else sc.outputs_per_input[i][x]
                  for x in range(sc.inputs_per_party[i]))
            for i in range(sc.n_parties)
        ),
    )

    def fn(a, x):
        x_old = list(x)
        a_old = list(a)
        x_old[party] = input_perm[x[party]]
        a_old[party] = inv_out[x[party]][a[party]]
        return behavior.prob(tuple(a_old), tuple(x_old))

    return behavior_from_function(new_sc, fn)


def equal_up_to_party_relabeling(p: Behavior, q: Behavior, party: int) -> bool:
    """True if some relabeling of ``party``'s inputs/outputs maps p onto q."""
    if p.scenario.n_parties != q.scenario.n_parties:
        return False
    sc = p.scenario
    m = sc.inputs_per_party[party]
    from itertools import permutations

    for input_perm in permutations(range(m)):
        cards = [sc.outputs_per_input[party][input_perm[x]] for x in range(m)]
        if list(cards) != list(q.scenario.outputs_per_input[party]):
            continue
        out_choices = [list(permutations(range(v))) for v in cards]
        for combo in product(*out_choices):
            if relabel(p, party, input_perm, combo) == q:
                return True
    return False


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------


def behavior_to_dict(behavior: Behavior) -> dict:
    return {
        "scenario": {
            "inputs": list(behavior.scenario.inputs_per_party),
            "outputs": [list(row) for row in behavior.scenario.outputs_per_input],
        },
        "table": [[str(v) for v in row] for row in behavior.table],
    }


def behavior_from_dict(data: dict) -> Behavior:
    sc = Scenario(
        tuple(data["scenario"]["inputs"]),
        tuple(tuple(row) for row in data["scenario"]["outputs"]),
    )
    table = tuple(tuple(Fraction(v) for v in row) for row in data["table"])
    return Behavior(sc, table)


def behavior_to_json(behavior: Behavior, indent: int | None = None) -> str:
    return json.dumps(behavior_to_dict(behavior), indent=indent)


def behavior_from_json(text: str) -> Behavior:
    return behavior_from_dict(json.loads(text))
