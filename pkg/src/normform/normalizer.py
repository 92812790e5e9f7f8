"""Degree-by-degree normalization of a defining series.

At each pseudo-weight T >= k0 + 1 the transformed tail class phi'_T depends
affinely on the not-yet-fixed map coefficients.  Each candidate coefficient
is a monomial increment to G or to one F_l; its first-order effect on the
tail is computed once, mechanically, against the bare model:

    G  += c z^a w^n :  Im(c z^a R^n) - s x^(s-1) P Re(c z^a R^n)
    F_l += c z^a w^n : -x^s (dP/dz_l * c z^a R^n + dP/dzb_l * conj(...))

with R = x + i x^s P the graph value of w on the model.  Cross terms with
already-fixed increments or with tail classes land strictly above the
increment's entry class, so these effects are exact where it matters and
independent of the input series.  Every candidate is bucketed at the lowest
weight its effect reaches, which sidesteps the bookkeeping of closed-form
index rules entirely.

The class-T system then asks that phi'_T land in the normalization space
(chain-remainder kernels plus the x-power condition) subject to the jet
constraints.  Candidate directions whose effect vanishes through the whole
working order are the model's infinitesimal symmetries; they cannot be seen
by any class and are pinned to zero, deterministically, by explicit gauge
rows.  After that pinning the stacked system must have full column rank;
any survivor kernel is a genuine non-uniqueness and is raised with a
witness, as is an unsolvable class.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import linalg
from .errors import Inconsistent, NonUniqueSolution, OrderOverflow, ValidationError
from .fischer import (
    FischerBasisFamily,
    build_basis_family,
    class_conditions,
)
from .hypersurface import (
    DefiningSeries,
    FormalMap,
    identity_map,
    jet_conditions_check,
    transform_defining,
)
from .poly import HoloMono, HoloPoly, Mono, Poly, deriv_z, deriv_zb, zeros
from .scalars import GaussRat, I, ONE
from .weights import ModelSpec, WeightPreset, block_minimal_preset, weighted_parts


@dataclass
class ClassRecord:
    """Diagnostics for one weight class of the induction."""

    weight: int
    real_unknowns: int
    condition_rows: int
    gauge_dim: int
    rank: int
    consistent: bool
    gauge_directions: list = field(default_factory=list)
    elapsed: float = 0.0

    def as_dict(self) -> dict:
        return {
            "weight": self.weight,
            "real_unknowns": self.real_unknowns,
            "condition_rows": self.condition_rows,
            "gauge_dim": self.gauge_dim,
            "rank": self.rank,
            "consistent": self.consistent,
            "gauge_directions": self.gauge_directions,
            "elapsed_seconds": self.elapsed,
        }


@dataclass
class NormalFormResult:
    normal_form: DefiningSeries
    map: FormalMap
    diagnostics: list


@dataclass
class NormalizationState:
    model: ModelSpec
    series: DefiningSeries
    preset: WeightPreset
    family: FischerBasisFamily
    order: int
    T: int
    g_coeffs: dict = field(default_factory=dict)  # HoloMono -> GaussRat
    f_coeffs: list = field(default_factory=list)  # per l: HoloMono -> GaussRat
    diagnostics: list = field(default_factory=list)

    def current_map(self) -> FormalMap:
        n = self.model.nz
        f = []
        for l in range(n):
            fl = HoloPoly.var_z(n, l)
            fl = fl + HoloPoly.from_terms(n, list(self.f_coeffs[l].items()))
            f.append(fl)
        g = HoloPoly.var_w(n) + HoloPoly.from_terms(n, list(self.g_coeffs.items()))
        return FormalMap(f, g, self.order)


# -- candidate increments and their effects -----------------------------------


_EFFECT_CACHE: dict = {}


def _increment_effects(model: ModelSpec, order: int) -> dict:
    """Per-class buckets of candidate increments with exact effect classes.

    Returns {"buckets": {T: [unk, ...]}, "effects": {(unk, part): {cls: Poly}},
    "inert": [unk, ...]} where unk = ("G", alpha, n) or ("F", l, alpha, n)
    and part is "re" or "im".
    """
    key = (model.key, order)
    got = _EFFECT_CACHE.get(key)
    if got is not None:
        return got
    n, s, k0 = model.nz, model.s, model.k0
    preset = block_minimal_preset(model)
    rho = model.divisor()
    rho_pow = [Poly.const(n, 1)]
    for _ in range(order // k0 + 1):
        rho_pow.append(rho_pow[-1].mul(rho, order))
    idx_zero = zeros(n)
    xs = Poly.var_x(n).pow(s)
    xs1 = Poly.var_x(n).pow(s - 1) if s >= 1 else None
    p_dz = [deriv_z(model.p, l) for l in range(n)]
    p_dzb = [deriv_zb(model.p, l) for l in range(n)]

    def on_graph(alpha: tuple, nw: int) -> Poly:
        base = Poly(n, {Mono(alpha, idx_zero, 0): ONE})
        return base.mul(rho_pow[nw], order)

    unknowns: list = []
    for total in range(2, order + 1):
        # G candidates of nominal weight `total`
        for nw in range(0, total // k0 + 1):
            rest = total - k0 * nw
            if (rest, nw) == (0, 1):
                continue  # the fixed linear part of G
            if nw == 0 and rest <= k0:
                continue  # pure z terms of degree <= k0 are forced to zero
            for alpha in _multi(n, rest):
                unknowns.append(("G", alpha, nw))
    for total in range(2, order - (k0 - 1) + 1):
        for nw in range(0, total // k0 + 1):
            rest = total - k0 * nw
            if nw == 0 and rest <= 1:
                continue  # constants and the identity linear part
            for alpha in _multi(n, rest):
                for l in range(n):
                    unknowns.append(("F", l, alpha, nw))

    effects: dict = {}
    buckets: dict = {}
    inert: list = []
    for unk in unknowns:
        if unk[0] == "G":
            _, alpha, nw = unk
            base = on_graph(alpha, nw)
            for part, c in (("re", ONE), ("im", I)):
                dg = base.scale(c)
                eff = dg.imag_part()
                if s >= 1:
                    eff = eff - xs1.mul(model.p, order).mul(
                        dg.real_part(), order
                    ).scale(s)
                effects[(unk, part)] = weighted_parts(eff, preset)
        else:
            _, l, alpha, nw = unk
            base = on_graph(alpha, nw)
            for part, c in (("re", ONE), ("im", I)):
                df = base.scale(c)
                eff = -(
                    xs.mul(p_dz[l].mul(df, order), order)
                    + xs.mul(p_dzb[l].mul(df.conjugate(), order), order)
                )
                effects[(unk, part)] = weighted_parts(eff, preset)
        lows = [
            min(ws)
            for part in ("re", "im")
            for ws in [
                [w for w in effects[(unk, part)] if w <= order]
            ]
            if ws
        ]
        if not lows:
            inert.append(unk)
            continue
        entry = min(lows)
        if entry <= k0:
            raise AssertionError(
                f"increment {unk} reaches weight class {entry} <= k0"
            )
        buckets.setdefault(entry, []).append(unk)
    got = {"buckets": buckets, "effects": effects, "inert": inert}
    _EFFECT_CACHE[key] = got
    return got


def _multi(n: int, total: int) -> list:
    if n == 1:
        return [(total,)]
    out = []
    for head in range(total + 1):
        for rest in _multi(n - 1, total - head):
            out.append((head,) + rest)
    return out


# -- the per-class linear system ------------------------------------------------


_SYSTEM_CACHE: dict = {}


class _ClassSystem:
    """Prepared solver for one weight class of one model."""

    def __init__(
        self,
        model: ModelSpec,
        family: FischerBasisFamily,
        preset: WeightPreset,
        order: int,
        T: int,
    ):
        data = _increment_effects(model, order)
        self.unknowns = list(data["buckets"].get(T, []))
        self.conditions = class_conditions(model, family, preset, T)
        effects = data["effects"]
        k0 = model.k0
        ncols = 2 * len(self.unknowns)
        self.labels = []
        for unk in self.unknowns:
            for part in ("re", "im"):
                self.labels.append(f"{_unk_label(unk)} [{part}]")

        cond_rows: list = []
        zero_poly = Poly.zero(model.nz)
        col_values = []
        for unk in self.unknowns:
            for part in ("re", "im"):
                eff_T = effects[(unk, part)].get(T, zero_poly)
                col_values.append(self.conditions.values(eff_T))
        n_cond = len(self.conditions.rows)
        for r in range(n_cond):
            row_re = [col_values[cidx][r].re for cidx in range(ncols)]
            row_im = [col_values[cidx][r].im for cidx in range(ncols)]
            cond_rows.append(row_re)
            cond_rows.append(row_im)

        jet_rows = []
        wzero = zeros(model.nz)
        for cidx, unk in enumerate(self.unknowns):
            if unk[0] == "F" and unk[2] == wzero and unk[3] == 1:
                row = [Fraction(0)] * ncols
                row[2 * cidx + 1] = Fraction(1)  # imaginary part vanishes
                jet_rows.append(row)
            if unk[0] == "G" and unk[1] == wzero and unk[2] == k0:
                row = [Fraction(0)] * ncols
                row[2 * cidx] = Fraction(1)  # real part vanishes
                jet_rows.append(row)

        # gauge rows: directions with no effect on any class <= order
        support: dict = {}
        for unk in self.unknowns:
            for part in ("re", "im"):
                for w, p in effects[(unk, part)].items():
                    if w > order:
                        continue
                    for m in p.terms:
                        support.setdefault((w, m), len(support))
        eff_matrix = [[Fraction(0)] * ncols for _ in range(2 * len(support))]
        for cidx2 in range(ncols):
            unk = self.unknowns[cidx2 // 2]
            part = "re" if cidx2 % 2 == 0 else "im"
            for w, p in effects[(unk, part)].items():
                if w > order:
                    continue
                for m, c in p.terms.items():
                    ridx = support[(w, m)]
                    eff_matrix[2 * ridx][cidx2] = c.re
                    eff_matrix[2 * ridx + 1][cidx2] = c.im
        gauge = linalg.nullspace(eff_matrix, ncols) if ncols else []
        self.gauge_dim = len(gauge)
        self.gauge_directions = [
            {self.labels[i]: str(v) for i, v in enumerate(vec) if v}
            for vec in gauge
        ]

        rows = cond_rows + jet_rows + [list(v) for v in gauge]
        self.n_condition_rows = len(cond_rows) + len(jet_rows)
        self.ncols = ncols
        self.solver = linalg.PreparedSolver(rows, ncols) if ncols else None
        self.rank = self.solver.rank if self.solver else 0
        if self.solver and self.rank < ncols:
            kernel = self.solver.kernel()
            witness = {
                self.labels[i]: str(v) for i, v in enumerate(kernel[0]) if v
            }
            raise NonUniqueSolution(
                T,
                "class system keeps a non-gauge kernel direction",
                witness=witness,
            )

    def solve(self, phi: Poly, T: int):
        """Increment coefficients clearing phi into the normalization space."""
        vals = self.conditions.values(phi)
        rhs: list = []
        for v in vals:
            rhs.append(-v.re)
            rhs.append(-v.im)
        rhs.extend([Fraction(0)] * (self.n_condition_rows - 2 * len(vals)))
        rhs.extend([Fraction(0)] * self.gauge_dim)
        if self.solver is None:
            if any(rhs):
                raise Inconsistent(T, "no unknowns but conditions are violated")
            return []
        sol = self.solver.solve(rhs)
        if sol is None:
            raise Inconsistent(
                T, "conditions unreachable from the class unknowns"
            )
        out = []
        for idx, unk in enumerate(self.unknowns):
            c = GaussRat(sol[2 * idx], sol[2 * idx + 1])
            if c:
                out.append((unk, c))
        return out


def _unk_label(unk) -> str:
    if unk[0] == "G":
        _, alpha, nw = unk
        return f"G z^{list(alpha)} w^{nw}"
    _, l, alpha, nw = unk
    return f"F_{l+1} z^{list(alpha)} w^{nw}"


def _class_system(
    model: ModelSpec,
    family: FischerBasisFamily,
    preset: WeightPreset,
    order: int,
    T: int,
) -> _ClassSystem:
    key = (
        model.key,
        preset.tag,
        family.symmetric,
        family.mixed_index_offset,
        order,
        T,
    )
    got = _SYSTEM_CACHE.get(key)
    if got is None:
        got = _SYSTEM_CACHE[key] = _ClassSystem(model, family, preset, order, T)
    return got


# -- public driver ---------------------------------------------------------------


def solve_degree(state: NormalizationState) -> NormalizationState:
    """Fix the map increments of the active class and advance to the next."""
    t0 = time.monotonic()
    T = state.T
    system = _class_system(
        state.model, state.family, state.preset, state.order, T
    )
    current = transform_defining(state.series, state.current_map(), T)
    phi = current.tail.get(T, Poly.zero(state.model.nz))
    increments = system.solve(phi, T)
    for unk, c in increments:
        if unk[0] == "G":
            _, alpha, nw = unk
            mono = HoloMono(alpha, nw)
            prev = state.g_coeffs.get(mono, GaussRat(0))
            state.g_coeffs[mono] = prev + c
        else:
            _, l, alpha, nw = unk
            mono = HoloMono(alpha, nw)
            prev = state.f_coeffs[l].get(mono, GaussRat(0))
            state.f_coeffs[l][mono] = prev + c
    state.diagnostics.append(
        ClassRecord(
            weight=T,
            real_unknowns=system.ncols,
            condition_rows=system.n_condition_rows,
            gauge_dim=system.gauge_dim,
            rank=system.rank,
            consistent=True,
            gauge_directions=system.gauge_directions,
            elapsed=time.monotonic() - t0,
        )
    )
    state.T = T + 1
    return state


def normalize(
    series: DefiningSeries,
    order: int,
    family: Optional[FischerBasisFamily] = None,
    symmetric: bool = True,
    mixed_index_offset: int = 1,
) -> NormalFormResult:
    """Unique normalizing map and normal form through pseudo-weight order."""
    model = series.model
    k0 = model.k0
    if order < k0 + 1:
        raise ValidationError("order_range", f"order {order} < k0 + 1")
    cap = series.order_cap()
    if cap is not None and order > cap:
        raise OrderOverflow(f"order {order} exceeds truncation order {cap}")
    preset = block_minimal_preset(model)
    if family is None:
        family = _shared_family(model, order, symmetric, mixed_index_offset)
    state = NormalizationState(
        model=model,
        series=series,
        preset=preset,
        family=family,
        order=order,
        T=k0 + 1,
        f_coeffs=[{} for _ in range(model.nz)],
    )
    while state.T <= order:
        state = solve_degree(state)
    fmap = state.current_map()
    normal_form = transform_defining(series, fmap, order)
    for t, p in normal_form.tail.items():
        cc = class_conditions(model, family, preset, t)
        if not cc.is_member(p):
            raise Inconsistent(
                t, f"normalized tail class fails membership: {p!r}"
            )
    if not jet_conditions_check(fmap, model):
        raise Inconsistent(order, "normalizing map violates jet conditions")
    return NormalFormResult(normal_form, fmap, state.diagnostics)


_FAMILY_CACHE: dict = {}


def _shared_family(
    model: ModelSpec, order: int, symmetric: bool, mixed_index_offset: int
):
    key = (model.key, symmetric, mixed_index_offset)
    got = _FAMILY_CACHE.get(key)
    if got is None or got.kmax < max(order, 2):
        got = build_basis_family(
            model,
            max(order, 2),
            block_minimal_preset(model),
            mixed_index_offset=mixed_index_offset,
            symmetric=symmetric,
        )
        _FAMILY_CACHE[key] = got
    return got
