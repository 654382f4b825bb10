"""Figure-data pipelines: parameter sweeps emitted as plain columnar data.

Each pipeline returns a mapping from a curve label to a list of
``(parameter, value)`` rows (plus optional witness columns); the CLI
serializes them to CSV.  External overlay curves (protocol rates whose
formulas this package does not own) are consumed as user files, never
synthesized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .behavior import Behavior, iso
from .convexify import BoundCurve, lower_convex_hull
from .extension import nsce
from .polytope import nonlocality_cost
from .privstate import (
    mdi_capacity,
    repeaterless_bound,
    thm5_denominator_positive,
    thm5_overhead,
)
from .secrecy import (
    NsqConfig,
    snap_small,
    squash,
    squashed_nonlocality,
    squashed_quantifier,
)

FIGURE_IDS = ("nsdi-2222", "nsdi-3222-partial", "ppt-overhead", "mdi-tradeoff")


@dataclass
class CurveBundle:
    """Columnar sweep results: label -> rows of (parameter, value, extra...)."""

    curves: dict[str, list[tuple]] = field(default_factory=dict)
    notes: dict[str, str] = field(default_factory=dict)

    def add(self, label: str, rows: list[tuple], note: str = "") -> None:
        self.curves[label] = rows
        if note:
            self.notes[label] = note


def iso_grid(n_points: int = 21) -> list[Fraction]:
    """Evenly spaced exact mixing parameters on [0, 1/2]."""
    if n_points < 2:
        raise ValueError("need at least two grid points")
    return [Fraction(k, 2 * (n_points - 1)) for k in range(n_points)]


def nsdi_iso_sweep(
    grid: Sequence[Fraction],
    nsq_config: NsqConfig | None = None,
) -> CurveBundle:
    """Key-rate bound curves for the PR/anti-PR mixture family.

    Emits the squashed-intrinsic upper estimate (with witness summary), the
    squashed conditional mutual information, the squashed mutual
    information, and the exact LP nonlocality cost.  The channel witness of
    each sweep point seeds the next point's search, which can only tighten
    the estimates.
    """
    cfg = nsq_config or NsqConfig()
    nsq_rows = []
    cmi_rows = []
    mi_rows = []
    cost_rows = []
    warm = []
    cmi_q = squashed_quantifier("cmi")
    mi_q = squashed_quantifier("mi")
    for eps in grid:
        p = iso(eps)
        ce = nsce(p)
        res = squashed_nonlocality(p, cfg, warm_channels=warm, ce=ce)
        warm = [res.channel]
        witness = f"x={res.x};y={res.y};{res.strategy_kind}"
        nsq_rows.append((float(eps), snap_small(res.value), witness))
        cmi_rows.append((float(eps), snap_small(squash(cmi_q, ce.extension, cfg.squash).value)))
        mi_rows.append((float(eps), snap_small(squash(mi_q, ce.extension, cfg.squash).value)))
        cost_rows.append((float(eps), float(nonlocality_cost(p))))
    bundle = CurveBundle()
    bundle.add("squashed_nonlocality", nsq_rows, "upper estimate; witness = honest inputs and strategy kind")
    bundle.add("squashed_cmi", cmi_rows)
    bundle.add("squashed_mi", mi_rows)
    bundle.add("nonlocality_cost", cost_rows, "exact rational LP, rendered as float")
    return bundle


def reproduce_nsdi_2222(n_points: int = 21, nsq_config: NsqConfig | None = None) -> CurveBundle:
    return nsdi_iso_sweep(iso_grid(n_points), nsq_config)


def reproduce_nsdi_3222_partial(
    family: Sequence[tuple[float, Behavior]],
    overlays: Sequence[BoundCurve] = (),
    nsq_config: NsqConfig | None = None,
) -> CurveBundle:
    """Conditional-mutual-information bound for a user-supplied device family,
    plus the convex-hull combination with any overlay curves.

    The device family (e.g. a three-setting/two-setting family) is external
    input: this package does not own the formulas of published protocol
    curves, so it consumes them as data.
    """
    if not family:
        raise ValueError("device family is external input; supply (parameter, behavior) pairs")
    cfg = nsq_config or NsqConfig()
    cmi_q = squashed_quantifier("cmi")
    cmi_rows = []
    for param, behavior in family:
        ce = nsce(behavior)
        cmi_rows.append((float(param), snap_small(squash(cmi_q, ce.extension, cfg.squash).value)))
    bundle = CurveBundle()
    bundle.add("squashed_cmi", cmi_rows)
    if overlays:
        ours = BoundCurve([r[0] for r in cmi_rows], [r[1] for r in cmi_rows], "squashed_cmi")
        hull = lower_convex_hull([ours, *overlays])
        bundle.add("convex_hull", list(zip(hull.grid.tolist(), hull.values.tolist())),
                   "lower convex hull of the computed bound and the overlay curves")
    return bundle


def reproduce_ppt_overhead(
    key_dims: Sequence[int] = (2, 4, 8, 16, 32),
    shield_rule=lambda d_k: d_k * d_k,
    n_points: int = 60,
) -> CurveBundle:
    """Memory-overhead and gap lower bounds against approximation quality.

    For each key dimension, sweeps the admissible approximation parameter
    (restricted to where the bound formula is informative) and emits the
    overhead fraction V/M together with the gap floor and repeatable-key
    cap.
    """
    bundle = CurveBundle()
    for d_k in key_dims:
        d_s = shield_rule(d_k)
        lo = (d_k - 1) / (d_s + d_k * (d_k - 1))
        hi = 1 / d_k
        rows = []
        for k in range(n_points):
            eps = lo + (hi - lo) * k / n_points
            if eps < lo or eps >= hi or not thm5_denominator_positive(d_k, eps):
                continue
            m_total = math.log2(d_k * d_s)
            dim_h = (d_k * d_s) ** 2
            res = thm5_overhead(d_k, d_s, eps, m_total, dim_h)
            rows.append((eps, res.v_bound / m_total, res.eta, res.theta))
        bundle.add(f"overhead_dk{d_k}", rows, "columns: eps, V/M, eta, theta")
    return bundle


def reproduce_mdi_tradeoff(
    l_max_km: float = 200.0,
    step_km: float = 1.0,
    alpha_per_km: float = 1.0 / 22.0,
    qs: Sequence[float] = (0.25, 0.5, 0.75, 1.0),
) -> CurveBundle:
    """Rate-distance tradeoff of the relay prototype versus the repeaterless cap.

    Transmissivities follow η = exp(−α·L) on both arms.
    """
    bundle = CurveBundle()
    n = int(l_max_km / step_km) + 1
    grid = [k * step_km for k in range(n)]
    for q in qs:
        rows = []
        for length in grid:
            eta = math.exp(-alpha_per_km * length)
            rows.append((length, mdi_capacity(q, eta, eta)))
        bundle.add(f"capacity_q{q:g}", rows)
    rb_rows = []
    for length in grid:
        eta = math.exp(-alpha_per_km * length)
        rb_rows.append((length, repeaterless_bound(eta, eta)))
    bundle.add("repeaterless_bound", rb_rows)
    return bundle
